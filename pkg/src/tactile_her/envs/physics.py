"""Deterministic planar rigid-body physics with penalty contact.

Bodies are point masses with circular or square footprints.  The effector is
driven by a force command and viscous damping; contact between the effector
(or its fingers) and the object is a linear spring on the overlap depth.  The
object feels Coulomb friction against the table.

Push and Slide live in the horizontal (x, y) plane.  Lift lives in the
vertical (x, z) plane, with z = 0 the table surface.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

import numpy as np

from ..errors import ConfigError, SimulationError

GRAVITY = 9.81
LEVEL_SCALES = {"Simple": 0.5, "Intermediate": 0.75, "Hard": 1.0}


@dataclass
class PhysicsConfig:
    dt: float = 0.02
    substeps: int = 2
    k_n: float = 1000.0
    mu: float = 0.3
    m_obj: float = 0.5
    m_eff: float = 1.0
    eff_damping: float = 20.0
    eff_max_force: float = 20.0
    eff_radius: float = 0.02
    # disc radius, or half side length when obj_shape == "square"
    obj_size: float = 0.025
    obj_shape: str = "disc"
    gripper: bool = False
    finger_radius: float = 0.01
    aperture_max: float = 0.08
    aperture_speed: float = 0.2
    grasp_threshold: float = 2.0
    eff_lo: tuple = (0.0, -0.4)
    eff_hi: tuple = (0.8, 0.4)
    obj_lo: tuple = (0.0, -0.4)
    obj_hi: tuple = (0.8, 0.4)
    eff_start: tuple = (0.05, 0.0)
    obj_start_center: tuple = (0.2, 0.0)
    obj_start_half: tuple = (0.03, 0.05)
    # Hard region; Simple and Intermediate are scaled about its center
    goal_center: tuple = (0.5, 0.0)
    goal_half: tuple = (0.1, 0.35)
    level_scales: dict = field(default_factory=lambda: dict(LEVEL_SCALES))

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.k_n > 0:
            raise ConfigError(f"k_n must be positive, got {self.k_n}")
        if self.mu < 0:
            raise ConfigError(f"mu must be nonnegative, got {self.mu}")
        if self.substeps < 1:
            raise ConfigError("substeps must be >= 1")
        if self.obj_shape not in ("disc", "square"):
            raise ConfigError(f"unknown obj_shape {self.obj_shape!r}")
        scales = [self.level_scales[k] for k in ("Simple", "Intermediate", "Hard")]
        if not 0 < scales[0] <= scales[1] <= scales[2]:
            raise ConfigError(f"level scales must be nested, got {scales}")

    def goal_region(self, level: str) -> tuple[np.ndarray, np.ndarray]:
        if level not in self.level_scales:
            raise ConfigError(f"unknown goal level {level!r}")
        c = np.asarray(self.goal_center, dtype=float)
        h = np.asarray(self.goal_half, dtype=float) * self.level_scales[level]
        return c - h, c + h

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PhysicsConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown physics fields: {sorted(unknown)}")
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**kw)


@dataclass
class PhysicsState:
    eff_pos: np.ndarray
    eff_vel: np.ndarray
    obj_pos: np.ndarray
    obj_vel: np.ndarray
    aperture: float = 0.0
    latched: bool = False
    grasp_offset: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def copy(self) -> "PhysicsState":
        return PhysicsState(
            self.eff_pos.copy(), self.eff_vel.copy(),
            self.obj_pos.copy(), self.obj_vel.copy(),
            float(self.aperture), bool(self.latched), self.grasp_offset.copy(),
        )


def disc_overlap(eff_pos, obj_pos, r_sum):
    """Overlap depth of two discs and the unit normal pointing from effector to object."""
    d = obj_pos - eff_pos
    dist = float(np.hypot(d[0], d[1]))
    if dist > 0:
        n = d / dist
    else:
        n = np.array([1.0, 0.0])
    return r_sum - dist, n


def disc_square_overlap(center, radius, sq_center, half):
    """Overlap depth of a disc with an axis-aligned square, normal pointing from disc into square."""
    rel = center - sq_center
    inside = abs(rel[0]) <= half and abs(rel[1]) <= half
    if inside:
        gaps = half - np.abs(rel)
        axis = int(np.argmin(gaps))
        n = np.zeros(2)
        # push the square away from the disc along the shallowest face
        n[axis] = -1.0 if rel[axis] >= 0 else 1.0
        return radius + gaps[axis], n
    q = np.clip(rel, -half, half)
    d = rel - q
    dist = float(np.hypot(d[0], d[1]))
    return radius - dist, -d / dist


def finger_positions(state: PhysicsState):
    off = np.array([state.aperture / 2.0, 0.0])
    return state.eff_pos - off, state.eff_pos + off


def contact_vectors(state: PhysicsState, config: PhysicsConfig) -> list:
    """Penalty forces acting on the object, one vector per contact pair.

    The effector receives the negation of each vector.
    """
    if config.gripper:
        out = []
        for fp in finger_positions(state):
            depth, n = disc_square_overlap(fp, config.finger_radius, state.obj_pos, config.obj_size)
            out.append(config.k_n * max(0.0, depth) * n)
        return out
    depth, n = disc_overlap(state.eff_pos, state.obj_pos, config.eff_radius + config.obj_size)
    return [config.k_n * max(0.0, depth) * n]


def finger_forces(state: PhysicsState, config: PhysicsConfig) -> tuple[float, float]:
    left, right = contact_vectors(state, config)
    return float(np.hypot(*left)), float(np.hypot(*right))


def contact_force(state: PhysicsState, config: PhysicsConfig) -> float:
    """Scalar tactile reading: total penalty force magnitude over all contact pairs."""
    return float(sum(np.hypot(f[0], f[1]) for f in contact_vectors(state, config)))


def apply_friction(vel: np.ndarray, decel: float, dt: float) -> np.ndarray:
    speed = float(np.hypot(vel[0], vel[1]))
    if speed == 0.0:
        return vel
    new_speed = max(0.0, speed - decel * dt)
    return vel * (new_speed / speed)


def _clamp(pos, vel, lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    clipped = np.clip(pos, lo, hi)
    hit_lo = pos < lo
    hit_hi = pos > hi
    vel = vel.copy()
    vel[hit_lo & (vel < 0)] = 0.0
    vel[hit_hi & (vel > 0)] = 0.0
    return clipped, vel


def integrate(state: PhysicsState, action, config: PhysicsConfig) -> PhysicsState:
    """Advance one physics substep of length ``config.dt`` (semi-implicit Euler)."""
    a = np.clip(np.asarray(action, dtype=float), -1.0, 1.0)
    if config.gripper:
        new = _integrate_gripper(state, a, config)
    else:
        new = _integrate_disc(state, a, config)
    for arr in (new.eff_pos, new.eff_vel, new.obj_pos, new.obj_vel):
        if not np.all(np.isfinite(arr)):
            raise SimulationError("non-finite physics state")
    return new


def _integrate_disc(state, a, cfg):
    dt = cfg.dt
    (f_obj,) = contact_vectors(state, cfg)
    f_eff = cfg.eff_max_force * a[:2] - cfg.eff_damping * state.eff_vel - f_obj
    eff_vel = state.eff_vel + dt * f_eff / cfg.m_eff
    eff_pos = state.eff_pos + dt * eff_vel
    obj_vel = state.obj_vel + dt * f_obj / cfg.m_obj
    obj_vel = apply_friction(obj_vel, cfg.mu * GRAVITY, dt)
    obj_pos = state.obj_pos + dt * obj_vel
    eff_pos, eff_vel = _clamp(eff_pos, eff_vel, cfg.eff_lo, cfg.eff_hi)
    obj_pos, obj_vel = _clamp(obj_pos, obj_vel, cfg.obj_lo, cfg.obj_hi)
    return PhysicsState(eff_pos, eff_vel, obj_pos, obj_vel)


def _integrate_gripper(state, a, cfg):
    dt = cfg.dt
    h = cfg.obj_size
    left, right = contact_vectors(state, cfg)
    f_l = float(np.hypot(*left))
    f_r = float(np.hypot(*right))
    cmd = a[2]
    latched = state.latched
    offset = state.grasp_offset
    if latched and cmd > 0:
        latched = False
    elif not latched and cmd < 0 and f_l > cfg.grasp_threshold and f_r > cfg.grasp_threshold:
        latched = True
        offset = state.obj_pos - state.eff_pos
    if latched:
        aperture = state.aperture
    else:
        aperture = float(np.clip(state.aperture + cmd * cfg.aperture_speed * dt, 0.0, cfg.aperture_max))

    f_obj = left + right
    f_eff = cfg.eff_max_force * a[:2] - cfg.eff_damping * state.eff_vel
    if not latched:
        f_eff = f_eff - f_obj
    eff_vel = state.eff_vel + dt * f_eff / cfg.m_eff
    eff_pos = state.eff_pos + dt * eff_vel
    eff_pos, eff_vel = _clamp(eff_pos, eff_vel, cfg.eff_lo, cfg.eff_hi)

    if latched:
        obj_pos = eff_pos + offset
        obj_vel = eff_vel.copy()
        obj_pos, obj_vel = _clamp(obj_pos, obj_vel, cfg.obj_lo, cfg.obj_hi)
    else:
        obj_vel = state.obj_vel + dt * f_obj / cfg.m_obj
        obj_vel[1] -= GRAVITY * dt
        resting = state.obj_pos[1] <= h + 1e-12
        if resting and obj_vel[1] <= 0:
            obj_vel[1] = 0.0
            obj_vel[0] = apply_friction(np.array([obj_vel[0], 0.0]), cfg.mu * GRAVITY, dt)[0]
        obj_pos = state.obj_pos + dt * obj_vel
        if obj_pos[1] < h:
            obj_pos[1] = h
            obj_vel[1] = 0.0
        obj_pos, obj_vel = _clamp(obj_pos, obj_vel, cfg.obj_lo, cfg.obj_hi)
    return PhysicsState(eff_pos, eff_vel, obj_pos, obj_vel, aperture, latched, np.asarray(offset, dtype=float).copy())
