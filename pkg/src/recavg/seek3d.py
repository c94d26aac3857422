"""3D source seeking for a rigid body with a single collocated scalar sensor.

The vehicle translates along its body x-axis at constant speed sqrt(2 w) and
is steered by roll and yaw inputs built from a washout filter of the sensed
signal strength. Four representations of the same closed loop are provided:

* full:        state (p, R, z) with the literal feedback law;
* transformed: state (p, Q, z) in the co-rotating frame that removes the
               nominal yaw and roll phases (an exact change of variables);
* embedded:    the transformed rotation unpacked into R^12 column
               coordinates, packaged as a slow/fast system for the averaging
               engine;
* rora:        the closed-form averaged limit dp/dt = Q A Q^T grad c with
               the constant gain matrix A = [[3,1,0],[1,3,0],[0,0,2]] / 4.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import avgcore
from .avgcore import QuadratureSettings, SingularField, SingularSystem
from .geom3 import E1, E2, E3, as_mat3, as_vec3, hat, rot_exp, rot_z, so3_defect
from .odeint import IntegratorSettings, Trajectory, integrate, integrate_projected

AVERAGED_GAIN = np.array([[3.0, 1.0, 0.0], [1.0, 3.0, 0.0], [0.0, 0.0, 2.0]]) / 4.0


@dataclass(frozen=True)
class SeekParams:
    """Roll amplitude coefficient, forcing frequency, filter time constant."""

    alpha: float
    omega: float
    mu: float

    def __post_init__(self):
        if self.alpha <= 0 or self.omega <= 0 or self.mu <= 0:
            raise ValueError("alpha, omega, mu must all be strictly positive")

    @property
    def sigma_period(self) -> float:
        """Period in sigma of the roll-frame rotation (angle alpha*sigma*sqrt(2))."""
        return math.sqrt(2.0) * math.pi / self.alpha

    @property
    def tau_period(self) -> float:
        """Common period in tau of the translation and roll oscillations."""
        return 2.0 * math.pi


@dataclass(frozen=True)
class SignalField:
    """Scalar strength field with analytic gradient and the source path."""

    strength: Callable  # (p, t) -> float
    gradient: Callable  # (p, t) -> (3,)
    source: Callable  # t -> (3,)
    kappa: Optional[float] = None


def signal_field(kind: str, **params) -> SignalField:
    """Log-family field c(p, t) = -log(1 + |p - p*(t)|^2 / 2).

    kind "static": fixed source at `center` (default origin).
    kind "orbit": source on the closed path
        (r sin(a t), r cos(a t), h cos(b t))
    with radius r (`radius`, default 2), rate a (`rate`, default 0.05),
    vertical amplitude h (`height`, default 2) and rate b (`vertical_rate`,
    default 0.1).
    """
    kappa = params.pop("kappa", None)
    if kind == "static":
        center = as_vec3(params.pop("center", np.zeros(3)))
        if params:
            raise ValueError(f"unknown parameters for static field: {sorted(params)}")
        source = lambda t: center
    elif kind == "orbit":
        r = float(params.pop("radius", 2.0))
        a = float(params.pop("rate", 0.05))
        h = float(params.pop("height", 2.0))
        b = float(params.pop("vertical_rate", 0.1))
        if params:
            raise ValueError(f"unknown parameters for orbit field: {sorted(params)}")

        def source(t):
            return np.array([r * math.sin(a * t), r * math.cos(a * t), h * math.cos(b * t)])
    else:
        raise ValueError(f"unknown field kind {kind!r}")

    def strength(p, t):
        d = p - source(t)
        return -math.log1p(0.5 * float(d @ d))

    def gradient(p, t):
        d = p - source(t)
        return -d / (1.0 + 0.5 * float(d @ d))

    return SignalField(strength=strength, gradient=gradient, source=source, kappa=kappa)


@dataclass(frozen=True)
class RigidState:
    """Seeker state: position, body-to-reference rotation, filter value."""

    p: np.ndarray
    R: np.ndarray
    z: float

    def pack(self) -> np.ndarray:
        return np.concatenate([self.p, self.R.ravel(), [self.z]])

    @staticmethod
    def unpack(y) -> "RigidState":
        y = np.asarray(y, dtype=float)
        return RigidState(p=y[0:3].copy(), R=y[3:12].reshape(3, 3).copy(), z=float(y[12]))

    def so3_defect(self) -> float:
        return so3_defect(self.R)


# state layouts used by the flat integrators
FULL_DIM = 13  # p(3), R(9) row-major, z
TRANSFORMED_DIM = 13  # p(3), Q(9) row-major, z
EMBEDDED_DIM = 12  # p(3), q1(3), q2(3), q3(3)
_ROT_BLOCK = (3,)  # rotation coordinates start at offset 3 in all layouts


def embed_columns(p, Q) -> np.ndarray:
    """Pack (p, Q) into the 12-vector [p, q1, q2, q3] of Q's columns."""
    Q = as_mat3(Q)
    return np.concatenate([as_vec3(p), Q[:, 0], Q[:, 1], Q[:, 2]])


def split_columns(x):
    """Inverse of embed_columns: returns (p, Q)."""
    x = np.asarray(x, dtype=float)
    Q = np.column_stack([x[3:6], x[6:9], x[9:12]])
    return x[0:3].copy(), Q


def manifold_defect(x) -> float:
    """Deviation of the embedded rotation coordinates from the group structure.

    Checks both orthonormality q_i . q_j = delta_ij and the orientation
    (right-handedness) relations q_i x q_j = q_k for cyclic (i, j, k).
    """
    _, Q = split_columns(x)
    ortho = np.abs(Q.T @ Q - np.eye(3)).max()
    cols = [Q[:, 0], Q[:, 1], Q[:, 2]]
    cross = max(
        np.abs(np.cross(cols[i], cols[(i + 1) % 3]) - cols[(i + 2) % 3]).max()
        for i in range(3)
    )
    return float(max(ortho, cross))


# ---------------------------------------------------------------------------
# the feedback law and its representations

def control_inputs(state: RigidState, t: float, params: SeekParams, field: SignalField):
    """Roll rate, yaw rate, and filter derivative of the seeking law.

    dz/dt = (c(p, t) - z) / mu, yaw = omega - dz/dt, and the roll
    oscillates as 2 alpha sqrt(2 omega) sin(omega t - z + pi/4).
    """
    c = field.strength(state.p, t)
    zdot = (c - state.z) / params.mu
    omega_yaw = params.omega - zdot
    omega_roll = (
        2.0
        * params.alpha
        * math.sqrt(2.0 * params.omega)
        * math.sin(params.omega * t - state.z + math.pi / 4.0)
    )
    return omega_roll, omega_yaw, zdot


def full_rhs(state: RigidState, t: float, params: SeekParams, field: SignalField):
    """Closed-loop kinematics: dp = sqrt(2 w) R e1, dR = R hat(roll e1 + yaw e3)."""
    omega_roll, omega_yaw, zdot = control_inputs(state, t, params, field)
    dp = math.sqrt(2.0 * params.omega) * (state.R @ E1)
    dR = state.R @ hat(omega_roll * E1 + omega_yaw * E3)
    return dp, dR, zdot


def _full_rhs_flat(t, y, params, field):
    state = RigidState(p=y[0:3], R=y[3:12].reshape(3, 3), z=y[12])
    dp, dR, dz = full_rhs(state, t, params, field)
    return np.concatenate([dp, dR.ravel(), [dz]])


def roll_frame(sigma: float, alpha: float) -> np.ndarray:
    """Co-rotating roll frame: exp(alpha sigma (hat(e1) + hat(e2)))."""
    return rot_exp(alpha * sigma * (E1 + E2))


def _body_direction(z: float, tau) -> np.ndarray:
    """Heading factor exp((tau - z) hat(e3)) e1; broadcasts over tau."""
    th = np.asarray(tau) - z
    return np.stack([np.cos(th), np.sin(th), np.zeros_like(th)])


def _roll_axis(z: float, tau) -> np.ndarray:
    """Roll oscillation axis exp(2 (tau - z) hat(e3)) (e1 - e2); broadcasts."""
    th = 2.0 * (np.asarray(tau) - z)
    return np.stack(
        [np.cos(th) + np.sin(th), np.sin(th) - np.cos(th), np.zeros_like(th)]
    )


def transformed_rhs(p, Q, z, t, params: SeekParams, field: SignalField):
    """Dynamics of the co-rotating representation.

    dp = sqrt(w) Q f, dQ = sqrt(w) Q hat(L) with f = sqrt(2) R2(sigma)
    R1(tau, z) e1 and L = alpha R2(sigma) exp(2 (tau - z) hat(e3)) (e1 - e2),
    where sigma = sqrt(w) t and tau = w t.
    """
    sigma = math.sqrt(params.omega) * t
    tau = params.omega * t
    R2 = roll_frame(sigma, params.alpha)
    f = math.sqrt(2.0) * (R2 @ _body_direction(z, tau))
    lam = params.alpha * (R2 @ _roll_axis(z, tau))
    sqw = math.sqrt(params.omega)
    dp = sqw * (Q @ f)
    dQ = sqw * (Q @ hat(lam))
    dz = (field.strength(p, t) - z) / params.mu
    return dp, dQ, dz


def _transformed_rhs_flat(t, y, params, field):
    dp, dQ, dz = transformed_rhs(
        y[0:3], y[3:12].reshape(3, 3), y[12], t, params, field
    )
    return np.concatenate([dp, dQ.ravel(), [dz]])


def reconstruct_R(Q, z: float, t: float, params: SeekParams) -> np.ndarray:
    """Recover the physical attitude R = Q R2(sigma) R1(tau, z)."""
    sigma = math.sqrt(params.omega) * t
    tau = params.omega * t
    return as_mat3(Q) @ roll_frame(sigma, params.alpha) @ rot_z(tau - z)


def initial_Q(R0, z0: float, t0: float, params: SeekParams) -> np.ndarray:
    """Co-rotating frame matching R0 at time t0: Q = R R1^T R2^T."""
    sigma = math.sqrt(params.omega) * t0
    tau = params.omega * t0
    return as_mat3(R0) @ rot_z(tau - z0).T @ roll_frame(sigma, params.alpha).T


def rora_rhs(p, Q, t, field: SignalField):
    """Closed-form averaged drift: dp = Q A Q^T grad c(p, t), dQ = 0.

    Returns (dp, dQ, zbar) with zbar = c(p, t), the quasi-steady filter value.
    """
    dp = Q @ (AVERAGED_GAIN @ (Q.T @ field.gradient(p, t)))
    return dp, np.zeros((3, 3)), field.strength(p, t)


# ---------------------------------------------------------------------------
# embedding into R^12 for the averaging engine

def _embedded_pieces(z: float, sigma: float, taus, alpha: float):
    """f, L and their z-derivatives on a tau grid, all of shape (3, len(taus))."""
    R2 = roll_frame(sigma, alpha)
    th = np.asarray(taus) - z
    cos_t, sin_t = np.cos(th), np.sin(th)
    zeros = np.zeros_like(cos_t)
    rho = np.stack([cos_t, sin_t, zeros])
    drho = np.stack([-sin_t, cos_t, zeros])  # d/d theta
    cos2, sin2 = np.cos(2.0 * th), np.sin(2.0 * th)
    w1 = np.stack([cos2 + sin2, sin2 - cos2, zeros])
    dw1 = 2.0 * np.stack([cos2 - sin2, cos2 + sin2, zeros])
    f = math.sqrt(2.0) * (R2 @ rho)
    fz = -math.sqrt(2.0) * (R2 @ drho)  # d/dz = -d/dtheta
    lam = alpha * (R2 @ w1)
    lamz = -alpha * (R2 @ dw1)
    return f, fz, lam, lamz


def _embedded_values(x, z, sigma, taus, alpha):
    q1, q2, q3 = x[3:6], x[6:9], x[9:12]
    f, fz, lam, lamz = _embedded_pieces(z, sigma, taus, alpha)
    m = np.asarray(taus).size
    out = np.zeros((m, 12))
    qcols = np.stack([q1, q2, q3])  # (3, 3): row i is q_{i+1}
    out[:, 0:3] = f.T @ qcols
    out[:, 3:6] = np.outer(lam[2], q2) - np.outer(lam[1], q3)
    out[:, 6:9] = np.outer(lam[0], q3) - np.outer(lam[2], q1)
    out[:, 9:12] = np.outer(lam[1], q1) - np.outer(lam[0], q2)
    return out, (f, fz, lam, lamz), qcols


def embedded_field(params: SeekParams) -> SingularField:
    """The R^12 coordinate field of the transformed kinematics.

    Translation rows carry sum_i f_i q_i; each rotation-column row j carries
    sum_{i,k} L_i eps_{ijk} q_k, the cross-product structure written without
    reference to the group so that state Jacobians are plain matrices.
    """
    alpha = params.alpha

    def func(x, z, t, sigma, tau):
        scalar = np.ndim(tau) == 0
        taus = np.atleast_1d(tau)
        out, _, _ = _embedded_values(np.asarray(x, float), float(z[0]), sigma, taus, alpha)
        return out[0] if scalar else out

    def jac_x(x, z, t, sigma, tau):
        scalar = np.ndim(tau) == 0
        taus = np.atleast_1d(np.asarray(tau, dtype=float))
        m = taus.size
        _, (f, fz, lam, lamz), _ = _embedded_values(
            np.asarray(x, float), float(z[0]), sigma, taus, alpha
        )
        jac = np.zeros((m, 12, 12))
        eye = np.eye(3)
        for i in range(3):
            jac[:, 0:3, 3 + 3 * i : 6 + 3 * i] = f[i][:, None, None] * eye
        jac[:, 3:6, 6:9] = lam[2][:, None, None] * eye
        jac[:, 3:6, 9:12] = -lam[1][:, None, None] * eye
        jac[:, 6:9, 9:12] = lam[0][:, None, None] * eye
        jac[:, 6:9, 3:6] = -lam[2][:, None, None] * eye
        jac[:, 9:12, 3:6] = lam[1][:, None, None] * eye
        jac[:, 9:12, 6:9] = -lam[0][:, None, None] * eye
        return jac[0] if scalar else jac

    def jac_z(x, z, t, sigma, tau):
        scalar = np.ndim(tau) == 0
        taus = np.atleast_1d(np.asarray(tau, dtype=float))
        x = np.asarray(x, float)
        q1, q2, q3 = x[3:6], x[6:9], x[9:12]
        f, fz, lam, lamz = _embedded_pieces(float(z[0]), sigma, taus, alpha)
        m = taus.size
        col = np.zeros((m, 12, 1))
        qcols = np.stack([q1, q2, q3])
        col[:, 0:3, 0] = fz.T @ qcols
        col[:, 3:6, 0] = np.outer(lamz[2], q2) - np.outer(lamz[1], q3)
        col[:, 6:9, 0] = np.outer(lamz[0], q3) - np.outer(lamz[2], q1)
        col[:, 9:12, 0] = np.outer(lamz[1], q1) - np.outer(lamz[0], q2)
        return col[0] if scalar else col

    return SingularField(
        dim=EMBEDDED_DIM,
        fast_dim=1,
        func=func,
        T1=params.sigma_period,
        T2=params.tau_period,
        jac_x=jac_x,
        jac_z=jac_z,
        vectorized=True,
        depends_sigma=True,
    )


def embedded_system(
    params: SeekParams, field: SignalField, validate: bool = True
) -> SingularSystem:
    """Package the embedded kinematics as a slow/fast averaging problem.

    The fast state is the filter value with g(x, z) = c(p, t) - z and
    quasi-steady map phi(x) = c(p, t); the oscillatory drift is entirely in
    the sqrt(w) slot (no order-one forcing term).
    """
    f1 = embedded_field(params)

    def zero_func(x, z, t, sigma, tau):
        if np.ndim(tau) == 0:
            return np.zeros(EMBEDDED_DIM)
        return np.zeros((len(tau), EMBEDDED_DIM))

    def zero_jac_x(x, z, t, sigma, tau):
        if np.ndim(tau) == 0:
            return np.zeros((EMBEDDED_DIM, EMBEDDED_DIM))
        return np.zeros((len(tau), EMBEDDED_DIM, EMBEDDED_DIM))

    def zero_jac_z(x, z, t, sigma, tau):
        if np.ndim(tau) == 0:
            return np.zeros((EMBEDDED_DIM, 1))
        return np.zeros((len(tau), EMBEDDED_DIM, 1))

    f2 = SingularField(
        dim=EMBEDDED_DIM,
        fast_dim=1,
        func=zero_func,
        T1=params.sigma_period,
        T2=params.tau_period,
        jac_x=zero_jac_x,
        jac_z=zero_jac_z,
        vectorized=True,
        depends_sigma=False,
    )

    def g(x, z, t):
        return np.array([field.strength(x[0:3], t) - float(z[0])])

    def phi(x, t):
        return np.array([field.strength(x[0:3], t)])

    def phi_jac(x, t):
        out = np.zeros((1, EMBEDDED_DIM))
        out[0, 0:3] = field.gradient(x[0:3], t)
        return out

    return SingularSystem(
        f1=f1,
        f2=f2,
        g=g,
        phi=phi,
        mu=params.mu,
        omega=params.omega,
        phi_jac=phi_jac,
        validate=validate,
    )


def compute_A_numeric(
    params: SeekParams,
    field: SignalField = None,
    quad: QuadratureSettings = None,
    *,
    n_probes: int = 24,
    seed: int = 7,
    fit_tol: float = 1e-6,
    bracket_sign: int = 1,
    swap_prefactors: bool = False,
):
    """Recover the averaged gain matrix from the generic averaging engine.

    Evaluates the reduced averaged field at random (p, Q) probes and solves
    the overdetermined linear system  Q^T v_translation = A (Q^T grad c)
    for the constant matrix A. Returns (A, rotation_residual, fit_residual)
    where rotation_residual is the largest averaged rotation-row entry seen
    (the averaged frame must be stationary) and fit_residual the worst
    per-equation mismatch of the linear fit. A fit residual above fit_tol
    means the averaged translation is not of the assumed form, which signals
    a convention error upstream; that raises ArithmeticError.
    """
    if field is None:
        field = signal_field("static")
    if quad is None:
        # the gain is needed to 1e-6; 1e-7 agreement keeps refinement shallow
        quad = QuadratureSettings(base_panels=64, tol=1e-7, max_refinements=4)
    ssys = embedded_system(params, field, validate=False)
    averaged = avgcore.rora_reduce(
        ssys, quad, bracket_sign=bracket_sign, swap_prefactors=swap_prefactors
    )
    rng = np.random.default_rng(seed)
    rows, rhs = [], []
    rotation_residual = 0.0
    for _ in range(n_probes):
        p = rng.normal(0.0, 2.0, 3)
        Q = rot_exp(rng.normal(0.0, 1.0, 3))
        x = embed_columns(p, Q)
        v = averaged(x, 0.0)
        rotation_residual = max(rotation_residual, float(np.abs(v[3:]).max()))
        u = Q.T @ field.gradient(p, 0.0)
        w = Q.T @ v[0:3]
        for i in range(3):
            row = np.zeros(9)
            row[3 * i : 3 * i + 3] = u
            rows.append(row)
            rhs.append(w[i])
    rows = np.array(rows)
    rhs = np.array(rhs)
    coeffs, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    fit_residual = float(np.abs(rows @ coeffs - rhs).max())
    if fit_residual > fit_tol:
        raise ArithmeticError(
            "averaged translation drift does not fit the Q A Q^T grad c form "
            f"(residual {fit_residual:.3e}); averaging conventions are inconsistent"
        )
    return coeffs.reshape(3, 3), rotation_residual, fit_residual


# ---------------------------------------------------------------------------
# trajectory helpers shared by the scenario runner and the tests

def _seek_dt(params: SeekParams, settings: IntegratorSettings) -> float:
    # the filter adds a relaxation scale mu that the fixed step must resolve:
    # explicit RK4 diverges once dt/mu exceeds ~2.8
    return min(params.tau_period / params.omega / settings.steps_per_period, params.mu)


def full_trajectory(
    params: SeekParams,
    field: SignalField,
    p0,
    R0,
    z0: float,
    t0: float,
    tf: float,
    settings: IntegratorSettings = IntegratorSettings(),
    *,
    sample_dt: float = None,
) -> Trajectory:
    """Integrate the literal closed loop; states are [p, R rows, z]."""
    y0 = np.concatenate([as_vec3(p0), as_mat3(R0).ravel(), [float(z0)]])
    rhs = lambda t, y: _full_rhs_flat(t, y, params, field)
    return integrate_projected(
        rhs, y0, t0, t0 + tf, settings, _ROT_BLOCK,
        dt=_seek_dt(params, settings), sample_dt=sample_dt,
    )


def transformed_trajectory(
    params: SeekParams,
    field: SignalField,
    p0,
    Q0,
    z0: float,
    t0: float,
    tf: float,
    settings: IntegratorSettings = IntegratorSettings(),
    *,
    sample_dt: float = None,
) -> Trajectory:
    """Integrate the co-rotating representation; states are [p, Q rows, z]."""
    y0 = np.concatenate([as_vec3(p0), as_mat3(Q0).ravel(), [float(z0)]])
    rhs = lambda t, y: _transformed_rhs_flat(t, y, params, field)
    return integrate_projected(
        rhs, y0, t0, t0 + tf, settings, _ROT_BLOCK,
        dt=_seek_dt(params, settings), sample_dt=sample_dt,
    )


def rora_trajectory(
    params: SeekParams,
    field: SignalField,
    p0,
    Q0,
    t0: float,
    tf: float,
    settings: IntegratorSettings = IntegratorSettings(),
    *,
    sample_dt: float = None,
    dt: float = None,
) -> Trajectory:
    """Integrate the closed-form averaged flow; states are [p, Q rows].

    The averaged frame is constant by construction, so the rotation block
    needs no projection; the drift is order-one and integrates on the
    1 / steps_per_period default step.
    """
    y0 = np.concatenate([as_vec3(p0), as_mat3(Q0).ravel()])

    def rhs(t, y):
        dp, dQ, _ = rora_rhs(y[0:3], y[3:12].reshape(3, 3), t, field)
        return np.concatenate([dp, dQ.ravel()])

    step = dt if dt is not None else 1.0 / settings.steps_per_period
    return integrate(rhs, y0, t0, t0 + tf, settings, dt=step, sample_dt=sample_dt)
