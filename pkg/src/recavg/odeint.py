"""Deterministic fixed-step fourth-order integration of time-varying ODEs.

The step size is derived from the fastest forcing period so that the
oscillatory right-hand sides produced by the averaging modules are always
resolved. An optional projection pass renormalizes rotation-matrix blocks
after every step.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geom3 import project_so3, so3_defect


class DivergenceError(RuntimeError):
    """State became non-finite during integration."""

    def __init__(self, time: float):
        super().__init__(f"non-finite state encountered at t = {time:.6g}")
        self.time = time


@dataclass(frozen=True)
class IntegratorSettings:
    """Fixed-step integrator configuration.

    steps_per_period: substeps per shortest forcing period (>= 16).
    method: only "rk4" is implemented.
    projection: renormalize rotation blocks after every step.
    sample_stride: keep every k-th step in the output trajectory.
    """

    steps_per_period: int = 64
    method: str = "rk4"
    projection: bool = True
    sample_stride: int = 1

    def __post_init__(self):
        if self.steps_per_period < 16:
            raise ValueError("steps_per_period must be >= 16")
        if self.sample_stride < 1:
            raise ValueError("sample_stride must be >= 1")
        if self.method != "rk4":
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution: times (m,) strictly increasing, states (m, n)."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        if self.times.ndim != 1 or self.states.ndim != 2:
            raise ValueError("times must be 1-D and states 2-D")
        if self.times.shape[0] != self.states.shape[0]:
            raise ValueError("times and states must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must be strictly increasing")

    def __len__(self):
        return self.times.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _plan_steps(t0, tf, nominal_dt, sample_dt, sample_stride):
    """Pick (dt, total steps, sample-every) so samples land on an exact grid.

    When sample_dt is given it is snapped so that (tf - t0) is an integer
    number of sample intervals and dt divides the interval exactly; this is
    what makes trajectories from different systems comparable sample-by-sample.
    """
    horizon = tf - t0
    if horizon <= 0:
        raise ValueError("horizon must be positive (tf > t0)")
    if sample_dt is not None:
        if sample_dt <= 0 or sample_dt > horizon:
            raise ValueError("sample_dt must lie in (0, tf - t0]")
        n_samples = max(1, round(horizon / sample_dt))
        sample_dt = horizon / n_samples
        sub = max(1, math.ceil(sample_dt / nominal_dt - 1e-12))
        return sample_dt / sub, n_samples * sub, sub
    n = max(1, math.ceil(horizon / nominal_dt - 1e-12))
    return horizon / n, n, sample_stride


def _rk4_run(rhs, x0, t0, dt, n_steps, every, post_step=None):
    x = np.array(x0, dtype=float)
    if x.ndim != 1:
        raise ValueError("state must be a flat vector")
    times = [t0]
    states = [x.copy()]
    half = 0.5 * dt
    sixth = dt / 6.0
    for k in range(n_steps):
        t = t0 + k * dt
        k1 = rhs(t, x)
        k2 = rhs(t + half, x + half * k1)
        k3 = rhs(t + half, x + half * k2)
        k4 = rhs(t + dt, x + dt * k3)
        x = x + sixth * (k1 + 2.0 * (k2 + k3) + k4)
        t_next = t0 + (k + 1) * dt
        if post_step is not None:
            x = post_step(x)
        if not np.all(np.isfinite(x)):
            raise DivergenceError(t_next)
        if (k + 1) % every == 0 or k + 1 == n_steps:
            if t_next > times[-1]:
                times.append(t_next)
                states.append(x.copy())
    return Trajectory(np.array(times), np.array(states))


def integrate(
    rhs,
    x0,
    t0: float,
    tf: float,
    settings: IntegratorSettings,
    *,
    fastest_period: float = None,
    dt: float = None,
    sample_dt: float = None,
) -> Trajectory:
    """Integrate dx/dt = rhs(t, x) from t0 to tf with fixed RK4 steps.

    The nominal step is fastest_period / steps_per_period (or an explicit
    dt). Identical inputs produce bit-identical outputs.
    """
    nominal = _nominal_dt(fastest_period, dt, settings)
    step, n_steps, every = _plan_steps(t0, tf, nominal, sample_dt, settings.sample_stride)
    return _rk4_run(rhs, x0, t0, step, n_steps, every)


def integrate_projected(
    rhs,
    x0,
    t0: float,
    tf: float,
    settings: IntegratorSettings,
    rotation_blocks,
    *,
    fastest_period: float = None,
    dt: float = None,
    sample_dt: float = None,
) -> Trajectory:
    """As integrate, reprojecting each 9-coordinate rotation block onto SO(3).

    rotation_blocks is a list of start offsets; block i occupies coordinates
    [start, start + 9) holding a row-major rotation matrix. Projection is
    applied after every step when settings.projection is set; otherwise the
    blocks are left to drift and only validated at the initial state.
    """
    x0 = np.asarray(x0, dtype=float)
    for start in rotation_blocks:
        block = x0[start : start + 9].reshape(3, 3)
        if so3_defect(block) > 0.5:
            raise ValueError(
                f"initial rotation block at offset {start} is not near SO(3)"
            )

    post = None
    if settings.projection:

        def post(x, _blocks=tuple(rotation_blocks)):
            for start in _blocks:
                x[start : start + 9] = project_so3(
                    x[start : start + 9].reshape(3, 3)
                ).ravel()
            return x

    nominal = _nominal_dt(fastest_period, dt, settings)
    step, n_steps, every = _plan_steps(t0, tf, nominal, sample_dt, settings.sample_stride)
    return _rk4_run(rhs, x0, t0, step, n_steps, every, post_step=post)


def _nominal_dt(fastest_period, dt, settings):
    if dt is not None:
        if dt <= 0:
            raise ValueError("dt must be positive")
        return dt
    if fastest_period is None or fastest_period <= 0:
        raise ValueError("either fastest_period or dt must be given and positive")
    return fastest_period / settings.steps_per_period
