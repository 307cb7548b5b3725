from .core import (
    DEFAULT_EPS_POS, DEFAULT_HORIZON, LEVELS, ObsLayout, PlanarEnv, StepOutcome,
    dump_trajectory, goal_distance, is_success, load_trajectory, rollout_actions,
)
from .physics import PhysicsConfig, PhysicsState, contact_force, integrate
from .tasks import (
    TASKS, LiftEnv, PushEnv, SlideEnv, default_physics, make_env, region_out_of_reach,
    sample_goal, slide_reachability,
)
