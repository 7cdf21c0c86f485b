"""Rank-r bilinear schemes for n x n matrix multiplication.

A scheme holds three factor matrices H, K (both n^2 x r) and F (r x n^2).
It computes ``vec(AB) = F^T ((H^T vec A) * (K^T vec B))`` where ``*`` is
the entrywise product, so ``r`` counts the scalar multiplications.  Two
forward routes are provided: the direct vectorised one above, and an
equivalent pipeline phrased purely in tensor-network operations, kept as
an independent cross-check of the calculus.
"""

from dataclasses import dataclass

import numpy as np

from .tensor import (
    ShapeMismatch,
    blow,
    bmp,
    contraction,
    exact_array,
    forget,
    scalar_from_json,
    scalar_to_json,
    zeros_matching,
)


class RankTooSmall(ValueError):
    """The tensor-network route needs r >= n^2 to embed the operands."""


@dataclass
class BilinearScheme:
    """Factor triple of a rank-r scheme for n x n matrix product."""

    n: int
    r: int
    H: np.ndarray
    K: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        if self.n < 1 or self.r < 1:
            raise ShapeMismatch("n and r must be positive")
        m = self.n * self.n
        self.H = np.asarray(self.H)
        self.K = np.asarray(self.K)
        self.F = np.asarray(self.F)
        if self.H.shape != (m, self.r):
            raise ShapeMismatch("H must be (n^2, r), got %s" % (self.H.shape,))
        if self.K.shape != (m, self.r):
            raise ShapeMismatch("K must be (n^2, r), got %s" % (self.K.shape,))
        if self.F.shape != (self.r, m):
            raise ShapeMismatch("F must be (r, n^2), got %s" % (self.F.shape,))
        for mat in (self.H, self.K, self.F):
            if mat.dtype != object and not np.all(np.isfinite(mat)):
                raise ShapeMismatch("scheme entries must be finite")


def init_scheme(n, r, seed, alpha=1.0):
    """Draw H, K, F (in that order) with i.i.d. N(0, alpha^2) entries."""
    rng = np.random.default_rng(seed)
    m = n * n
    H = rng.normal(0.0, alpha, (m, r))
    K = rng.normal(0.0, alpha, (m, r))
    F = rng.normal(0.0, alpha, (r, m))
    return BilinearScheme(n=n, r=r, H=H, K=K, F=F)


def forward_fast(scheme, a_vec, b_vec):
    """vec(AB) from flattened operands via the r multiplications."""
    a_vec = np.asarray(a_vec)
    b_vec = np.asarray(b_vec)
    m = scheme.n * scheme.n
    if a_vec.shape != (m,) or b_vec.shape != (m,):
        raise ShapeMismatch("operands must be flat vectors of length n^2")
    u = scheme.H.T.dot(a_vec)
    w = scheme.K.T.dot(b_vec)
    return scheme.F.T.dot(u * w)


def forward_fast_batch(scheme, a_rows, b_rows):
    """Batched forward: rows of a_rows/b_rows are flattened operands."""
    a_rows = np.asarray(a_rows)
    b_rows = np.asarray(b_rows)
    prods = a_rows.dot(scheme.H) * b_rows.dot(scheme.K)
    return prods.dot(scheme.F)


def padded_square_factors(scheme):
    """Zero-pad the factors to r x r squares for the network pipeline.

    H and K gain zero rows below index n^2, F gains zero columns; the
    stored scheme itself always stays at its true rectangular shapes.
    """
    m = scheme.n * scheme.n
    r = scheme.r
    if r < m:
        raise RankTooSmall("need r >= n^2 to pad, got r=%d < %d" % (r, m))
    H_sq = zeros_matching((r, r), scheme.H)
    K_sq = zeros_matching((r, r), scheme.K)
    F_sq = zeros_matching((r, r), scheme.F)
    H_sq[:m, :] = scheme.H
    K_sq[:m, :] = scheme.K
    F_sq[:, :m] = scheme.F
    return H_sq, K_sq, F_sq


def _pad_vec(v, r):
    out = zeros_matching((r,), v)
    out[: v.shape[0]] = v
    return out


def forward_bmp(scheme, a_mat, b_mat):
    """vec(AB) via the tensor-network pipeline.

    Each operand is flattened, zero-padded to length r, and pushed
    through a two-tensor product stage that forms the r linear
    combinations; a final three-tensor stage couples the two combination
    vectors through a diagonal activation built from F and sums out the
    hidden slots.  Must agree with :func:`forward_fast` on the first n^2
    coordinates (the padding coordinates are identically zero).
    """
    n = scheme.n
    a_mat = np.asarray(a_mat)
    b_mat = np.asarray(b_mat)
    if a_mat.shape != (n, n) or b_mat.shape != (n, n):
        raise ShapeMismatch("operands must be n x n matrices")
    r = scheme.r
    H_sq, K_sq, F_sq = padded_square_factors(scheme)

    a_pad = _pad_vec(a_mat.reshape(n * n), r)
    b_pad = _pad_vec(b_mat.reshape(n * n), r)
    # combination stage: contracting the source slot leaves H_sq^T a
    s1 = contraction(bmp([H_sq, blow(a_pad)]), {0})
    s2 = contraction(bmp([K_sq, blow(b_pad)]), {0})

    # product stage: both parents feed one node whose activation couples
    # them diagonally, entry [s, t, j] = F_sq[s, j] when s == t else 0
    coupler = np.transpose(blow(F_sq), (0, 2, 1))
    t1 = forget(blow(s1), [2], [r])
    t2 = blow(forget(s2, [0], [r]))
    total = bmp([coupler, t1, t2])
    out = contraction(total, {0, 1})
    return out[: n * n]


def reconstruct(scheme, n=None):
    """Order-3 tensor sum of the per-multiplication outer products.

    Equals the n x n matrix-product structure tensor exactly when the
    scheme is a true rank decomposition.  F rows hold coefficients on
    the row-major flattening of AB, whereas the structure tensor's last
    slot runs over the transposed layout, so each output factor is
    reindexed through that transpose before the outer product.
    """
    if n is not None and n != scheme.n:
        raise ShapeMismatch(
            "requested size %d but the scheme multiplies %d x %d matrices"
            % (n, scheme.n, scheme.n)
        )
    n = scheme.n
    m = n * n
    out = zeros_matching((m, m, m), scheme.H)
    for s in range(scheme.r):
        h = scheme.H[:, s]
        k = scheme.K[:, s]
        f = scheme.F[s, :].reshape(n, n).T.reshape(m)
        out = out + h[:, None, None] * k[None, :, None] * f[None, None, :]
    return out


def scheme_to_json(scheme):
    """Serialise as ``{"n", "r", "H", "K", "F"}`` with nested row lists."""

    def rows(mat):
        return [[scalar_to_json(v) for v in row] for row in np.asarray(mat)]

    return {
        "n": scheme.n,
        "r": scheme.r,
        "H": rows(scheme.H),
        "K": rows(scheme.K),
        "F": rows(scheme.F),
    }


def scheme_from_json(obj, exact=False):
    def mat(rows):
        vals = [[scalar_from_json(v, exact=exact) for v in row] for row in rows]
        return exact_array(vals) if exact else np.array(vals, dtype=np.float64)

    return BilinearScheme(
        n=int(obj["n"]),
        r=int(obj["r"]),
        H=mat(obj["H"]),
        K=mat(obj["K"]),
        F=mat(obj["F"]),
    )


def to_exact(scheme):
    """Exact-rational copy of a scheme (float entries convert exactly)."""
    return BilinearScheme(
        n=scheme.n,
        r=scheme.r,
        H=exact_array(scheme.H),
        K=exact_array(scheme.K),
        F=exact_array(scheme.F),
    )


def to_float(scheme):
    """float64 copy of a scheme."""
    from .tensor import float_array

    return BilinearScheme(
        n=scheme.n,
        r=scheme.r,
        H=float_array(scheme.H),
        K=float_array(scheme.K),
        F=float_array(scheme.F),
    )
