"""Tactile intrinsic motivation for goal-conditioned manipulation.

Planar contact environments, a force-based intrinsic reward, contact-prioritized
hindsight replay and a numpy DDPG learner.
"""

__version__ = "0.1.0"
