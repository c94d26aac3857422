"""Exact 3D linear algebra and rotation-group primitives.

Vectors are numpy arrays of shape (3,), matrices of shape (3, 3). All
functions are pure and allocate fresh outputs.
"""

import numpy as np

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])

# Below this angle the Rodrigues coefficients are evaluated by series to
# avoid 0/0; the truncation error is O(theta^4) < 1e-24.
_SMALL_ANGLE = 1e-6


def as_vec3(v) -> np.ndarray:
    """Coerce to a finite float vector of shape (3,)."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected shape (3,), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite components")
    return v


def as_mat3(m) -> np.ndarray:
    """Coerce to a finite float matrix of shape (3, 3)."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"expected shape (3, 3), got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite components")
    return m


def hat(v) -> np.ndarray:
    """Skew-symmetric matrix of v, satisfying hat(v) @ w == cross(v, w)."""
    v = as_vec3(v)
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def rot_exp(v) -> np.ndarray:
    """Rotation matrix exp(hat(v)) by the closed-form Rodrigues evaluation.

    v is an axis-angle vector (axis * angle). Falls back to the quadratic
    series for angles below 1e-6 where sin(t)/t is ill-conditioned.
    """
    v = as_vec3(v)
    theta = float(np.linalg.norm(v))
    k = hat(v)
    if theta < _SMALL_ANGLE:
        return np.eye(3) + k + 0.5 * (k @ k)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + a * k + b * (k @ k)


def rot_z(angle: float) -> np.ndarray:
    """Rotation by `angle` about the third axis (exp(angle * hat(E3)))."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def project_so3(m) -> np.ndarray:
    """Nearest rotation matrix: the orthogonal factor of the polar decomposition.

    Computed via the symmetric square root of m^T m, which is optimal in the
    Frobenius norm. Raises ValueError when the polar factor is a reflection
    (determinant -1) or m is rank-deficient.
    """
    m = as_mat3(m)
    w, vecs = np.linalg.eigh(m.T @ m)
    if w[0] <= 1e-12:
        raise ValueError("matrix is rank-deficient; no unique nearest rotation")
    inv_sqrt = vecs @ np.diag(1.0 / np.sqrt(w)) @ vecs.T
    r = m @ inv_sqrt
    if np.linalg.det(r) < 0.0:
        raise ValueError("polar factor is a reflection (determinant -1)")
    return r


def levi_civita(i: int, j: int, k: int) -> int:
    """Sign of the permutation (i, j, k) of (1, 2, 3); 0 on repeated indices."""
    for idx in (i, j, k):
        if idx not in (1, 2, 3):
            raise ValueError(f"index {idx} out of range 1..3")
    return ((i - j) * (j - k) * (k - i)) // 2


def so3_defect(m) -> float:
    """Max-norm distance of m^T m from the identity."""
    m = as_mat3(m)
    return float(np.abs(m.T @ m - np.eye(3)).max())
