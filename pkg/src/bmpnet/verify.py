"""Certification of bilinear schemes: residuals against the structure
tensor, snapping near-discrete factors to a rational grid, and the
classical rank-7 scheme for 2x2 product as a pinned reference.

Float residuals measure how close a trained scheme is; the object-array
path runs the same comparison in exact rational arithmetic, where a zero
residual is a proof rather than an impression.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .scheme import BilinearScheme, reconstruct
from .tensor import (
    ShapeMismatch,
    exact_array,
    frobenius,
    frobenius_sq,
    is_exact,
    matmul_tensor,
)

# snapping grid for trained factors; entries of published schemes for
# small n are drawn from exactly these values
DEFAULT_GRID = (
    Fraction(-1),
    Fraction(-1, 2),
    Fraction(0),
    Fraction(1, 2),
    Fraction(1),
)


@dataclass
class VerifyReport:
    """Outcome of checking one scheme against the structure tensor."""

    n: int
    r: int
    residual: float
    exact_zero: bool = None
    slot_norms: list = None
    note: str = ""

    def to_json(self):
        return {
            "n": self.n,
            "r": self.r,
            "residual": self.residual,
            "exact_zero": self.exact_zero,
            "slot_norms": list(self.slot_norms or []),
            "note": self.note,
        }


def residual(scheme, n):
    """Frobenius distance between the scheme's reconstruction and the
    n x n matrix-product structure tensor, as a float.  In exact mode the
    squared distance is formed in rational arithmetic before the root."""
    if scheme.n != n:
        raise ShapeMismatch("scheme is for n=%d, asked about n=%d"
                            % (scheme.n, n))
    diff = reconstruct(scheme) - matmul_tensor(n, n, n,
                                               exact=is_exact(scheme.H))
    return frobenius(diff)


def residual_sq_exact(scheme, n):
    """Exact squared residual as a Fraction; zero iff the scheme is a
    true decomposition.  Requires an exact-mode scheme."""
    if not is_exact(scheme.H):
        raise ShapeMismatch("exact residual needs an exact-mode scheme")
    if scheme.n != n:
        raise ShapeMismatch("scheme is for n=%d, asked about n=%d"
                            % (scheme.n, n))
    diff = reconstruct(scheme) - matmul_tensor(n, n, n, exact=True)
    return frobenius_sq(diff)


def slot_contribution_norms(scheme):
    """Frobenius norm of each rank-1 contribution h_s (x) k_s (x) f_s,
    which factorises as the product of the three vector norms.  Near-zero
    slots flag wasted rank."""
    norms = []
    for s in range(scheme.r):
        h = np.asarray([float(v) for v in scheme.H[:, s]])
        k = np.asarray([float(v) for v in scheme.K[:, s]])
        f = np.asarray([float(v) for v in scheme.F[s, :]])
        norms.append(float(np.linalg.norm(h) * np.linalg.norm(k)
                           * np.linalg.norm(f)))
    return norms


def verify_scheme(scheme):
    """Full report: float residual always, exact verdict when the scheme
    carries rational entries."""
    n = scheme.n
    if is_exact(scheme.H):
        sq = residual_sq_exact(scheme, n)
        return VerifyReport(
            n=n,
            r=scheme.r,
            residual=math.sqrt(float(sq)),
            exact_zero=(sq == 0),
            slot_norms=slot_contribution_norms(scheme),
            note="exact rational arithmetic",
        )
    return VerifyReport(
        n=n,
        r=scheme.r,
        residual=residual(scheme, n),
        exact_zero=None,
        slot_norms=slot_contribution_norms(scheme),
        note="float arithmetic",
    )


def _snap(x, grid):
    # nearest grid point; ties prefer smaller magnitude, then the
    # negative candidate.  Distances are exact, so the choice is stable.
    xf = Fraction(float(x))
    best = min(grid, key=lambda g: (abs(g - xf), abs(g), g))
    return best


def round_scheme(scheme, grid=DEFAULT_GRID):
    """Snap every factor entry to the nearest grid value, returning an
    exact-mode scheme ready for rational verification."""
    grid = tuple(Fraction(g) for g in grid)

    def snap_mat(mat):
        out = np.empty(mat.shape, dtype=object)
        for idx in np.ndindex(mat.shape):
            out[idx] = _snap(mat[idx], grid)
        return out

    return BilinearScheme(
        n=scheme.n,
        r=scheme.r,
        H=snap_mat(np.asarray(scheme.H)),
        K=snap_mat(np.asarray(scheme.K)),
        F=snap_mat(np.asarray(scheme.F)),
    )


def normalize_slots(scheme):
    """Gauge fix: rescale each slot so H and K columns have unit maximum
    magnitude, compensating in the matching F row.  Leaves the computed
    bilinear map unchanged; makes grids like {0, +-1/2, +-1} reachable."""
    H = np.asarray(scheme.H).copy()
    K = np.asarray(scheme.K).copy()
    F = np.asarray(scheme.F).copy()
    for s in range(scheme.r):
        lam = max(abs(v) for v in H[:, s])
        mu = max(abs(v) for v in K[:, s])
        if lam != 0:
            H[:, s] = H[:, s] / lam
        if mu != 0:
            K[:, s] = K[:, s] / mu
        F[s, :] = F[s, :] * (lam * mu)
    return BilinearScheme(n=scheme.n, r=scheme.r, H=H, K=K, F=F)


def known_strassen():
    """The classical seven-multiplication scheme for 2x2 matrices, with
    exact integer entries.  Operand entries are flattened row-major, so
    index order is (1,1), (1,2), (2,1), (2,2)."""
    H = exact_array([
        [1, 0, 1, 0, 1, -1, 0],
        [0, 0, 0, 0, 1, 0, 1],
        [0, 1, 0, 0, 0, 1, 0],
        [1, 1, 0, 1, 0, 0, -1],
    ])
    K = exact_array([
        [1, 1, 0, -1, 0, 1, 0],
        [0, 0, 1, 0, 0, 1, 0],
        [0, 0, 0, 1, 0, 0, 1],
        [1, 0, -1, 0, 1, 0, 1],
    ])
    F = exact_array([
        [1, 0, 0, 1],
        [0, 0, 1, -1],
        [0, 1, 0, 1],
        [1, 0, 1, 0],
        [-1, 1, 0, 0],
        [0, 0, 0, 1],
        [1, 0, 0, 0],
    ])
    return BilinearScheme(n=2, r=7, H=H, K=K, F=F)


def exponent(k, r):
    """Asymptotic exponent log_k(r) implied by a rank-r scheme for k x k
    product under recursive application."""
    if k < 2:
        raise ShapeMismatch("base extent must be at least 2")
    if r < 1:
        raise ShapeMismatch("rank must be positive")
    return math.log(r) / math.log(k)
