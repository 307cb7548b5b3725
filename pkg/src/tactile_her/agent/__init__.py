from .checkpoint import load_agent, read_arrays, save_agent, write_arrays
from .ddpg import (
    DdpgAgent, DdpgHyper, actor_forward, actor_objective_and_grads, critic_forward,
    critic_loss_and_grads, td_targets,
)
from .mlp import Adam, Mlp, Sgd, soft_update
from .normalizer import Normalizer
