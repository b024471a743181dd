"""Real spherical harmonics up to degree 4.

Basis functions are stored as hard-coded polynomials in the direction
components (x, y, z), written as monomial tables so that values and
gradients come from the same closed form.  Flat ordering is
(l, m) = (0,0), (1,-1), (1,0), (1,1), (2,-2), ... and the sign convention
is the one common in graphics code (Condon-Shortley phase absorbed, so
Y_1^{-1} = -C1 y, Y_1^1 = -C1 x).
"""

import numpy as np

from .errors import ConfigurationError, ContractViolation

# Bumped whenever the basis definition changes; recorded in checkpoints.
SH_CONVENTION_VERSION = 1
MAX_DEGREE = 4

C0 = 0.28209479177387814
C1 = 0.4886025119029199
C2 = (1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
      -1.0925484305920792, 0.5462742152960396)
C3 = (-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
      0.3731763325901154, -0.4570457994644658, 1.445305721320277,
      -0.5900435899266435)
C4 = (2.5033429417967046, -1.7701307697799304, 0.9461746957575601,
      -0.6690465435572892, 0.10578554691520431, -0.6690465435572892,
      0.47308734787878004, -1.7701307697799304, 0.6258357354491761)

# Each entry: list of (coefficient, (power_x, power_y, power_z)).
_POLYNOMIALS = [
    # l = 0
    [(C0, (0, 0, 0))],
    # l = 1
    [(-C1, (0, 1, 0))],
    [(C1, (0, 0, 1))],
    [(-C1, (1, 0, 0))],
    # l = 2
    [(C2[0], (1, 1, 0))],
    [(C2[1], (0, 1, 1))],
    [(2 * C2[2], (0, 0, 2)), (-C2[2], (2, 0, 0)), (-C2[2], (0, 2, 0))],
    [(C2[3], (1, 0, 1))],
    [(C2[4], (2, 0, 0)), (-C2[4], (0, 2, 0))],
    # l = 3
    [(3 * C3[0], (2, 1, 0)), (-C3[0], (0, 3, 0))],
    [(C3[1], (1, 1, 1))],
    [(4 * C3[2], (0, 1, 2)), (-C3[2], (2, 1, 0)), (-C3[2], (0, 3, 0))],
    [(2 * C3[3], (0, 0, 3)), (-3 * C3[3], (2, 0, 1)), (-3 * C3[3], (0, 2, 1))],
    [(4 * C3[4], (1, 0, 2)), (-C3[4], (3, 0, 0)), (-C3[4], (1, 2, 0))],
    [(C3[5], (2, 0, 1)), (-C3[5], (0, 2, 1))],
    [(C3[6], (3, 0, 0)), (-3 * C3[6], (1, 2, 0))],
    # l = 4
    [(C4[0], (3, 1, 0)), (-C4[0], (1, 3, 0))],
    [(3 * C4[1], (2, 1, 1)), (-C4[1], (0, 3, 1))],
    [(7 * C4[2], (1, 1, 2)), (-C4[2], (1, 1, 0))],
    [(7 * C4[3], (0, 1, 3)), (-3 * C4[3], (0, 1, 1))],
    [(35 * C4[4], (0, 0, 4)), (-30 * C4[4], (0, 0, 2)), (3 * C4[4], (0, 0, 0))],
    [(7 * C4[5], (1, 0, 3)), (-3 * C4[5], (1, 0, 1))],
    [(7 * C4[6], (2, 0, 2)), (-7 * C4[6], (0, 2, 2)),
     (-C4[6], (2, 0, 0)), (C4[6], (0, 2, 0))],
    [(C4[7], (3, 0, 1)), (-3 * C4[7], (1, 2, 1))],
    [(C4[8], (4, 0, 0)), (-6 * C4[8], (2, 2, 0)), (C4[8], (0, 4, 0))],
]


def num_coeffs(l_max):
    return (l_max + 1) ** 2


def check_degree(l_max):
    if not isinstance(l_max, (int, np.integer)) or not 0 <= l_max <= MAX_DEGREE:
        raise ConfigurationError(f"l_max must be an integer in [0, {MAX_DEGREE}], got {l_max!r}")


def _check_unit(dirs, tol=1e-6):
    norms = np.linalg.norm(dirs, axis=-1)
    if not np.all(np.abs(norms - 1.0) <= tol):
        worst = float(np.max(np.abs(norms - 1.0)))
        raise ContractViolation(f"direction must be unit length (max deviation {worst:.3g})")


def _powers(dirs):
    # powers[k][d] = dirs[..., d] ** k, k = 0..4
    p = [np.ones_like(dirs), dirs]
    for _ in range(MAX_DEGREE - 1):
        p.append(p[-1] * dirs)
    return p


def sh_basis(direction, l_max, check=True):
    """Evaluate the real SH basis at one or many unit directions.

    ``direction`` has shape (3,) or (..., 3); the result has shape
    (..., (l_max+1)**2).
    """
    check_degree(l_max)
    dirs = np.asarray(direction, dtype=np.float64)
    if check:
        _check_unit(dirs)
    pw = _powers(dirs)
    nb = num_coeffs(l_max)
    out = np.empty(dirs.shape[:-1] + (nb,), dtype=np.float64)
    for b in range(nb):
        acc = 0.0
        for coef, (a, bb, c) in _POLYNOMIALS[b]:
            acc = acc + coef * pw[a][..., 0] * pw[bb][..., 1] * pw[c][..., 2]
        out[..., b] = acc
    return out


def sh_basis_jacobian(direction, l_max):
    """Derivatives of each basis polynomial w.r.t. (x, y, z).

    Returns shape (..., (l_max+1)**2, 3).  The polynomials are differentiated
    as written, so callers must chain through their own normalisation.
    """
    check_degree(l_max)
    dirs = np.asarray(direction, dtype=np.float64)
    pw = _powers(dirs)
    nb = num_coeffs(l_max)
    out = np.zeros(dirs.shape[:-1] + (nb, 3), dtype=np.float64)
    for b in range(nb):
        for coef, powers in _POLYNOMIALS[b]:
            for axis in range(3):
                k = powers[axis]
                if k == 0:
                    continue
                term = coef * k
                for d in range(3):
                    e = powers[d] - 1 if d == axis else powers[d]
                    term = term * pw[e][..., d]
                out[..., b, axis] += term
    return out


def sh_color_gradient(direction, upstream, l_max):
    """Gradient of a color w.r.t. its (3, (l_max+1)**2) coefficient block.

    ``upstream`` is dL/dcolor with shape (..., 3); the result has shape
    (..., 3, (l_max+1)**2) and equals upstream[c] * Y_b(direction).
    """
    basis = sh_basis(direction, l_max)
    up = np.asarray(upstream, dtype=np.float64)
    return up[..., :, None] * basis[..., None, :]


def eval_colors(coeffs, basis):
    """Contract (n, 3, B) coefficients with (n, B) basis values -> (n, 3)."""
    return np.einsum("ncb,nb->nc", coeffs, basis)
