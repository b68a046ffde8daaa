"""Sketching primitives: orthonormal bases, shrinked leverage scores, row sampling.

The sampling operator built here is the tall sparse matrix S with one nonzero
per column: column j picks row i_j with probability p(i_j) and carries the
scale 1/sqrt(s * p(i_j)), which makes E[S S^T] = I.  Applying S^T to a matrix
is therefore a scaled row gather and never materializes S densely.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RANK_TOL_FACTOR",
    "LeverageProfile",
    "SketchMatrix",
    "as_matrix",
    "orthonormal_basis",
    "numerical_rank",
    "shrinked_row_scores",
    "column_leverage_and_coherence",
    "build_sketch",
    "apply_sketch_transpose",
    "check_subspace_embedding",
    "embedding_distortion",
]

# Singular values below max(m, n) * sigma_1 * RANK_TOL_FACTOR count as zero.
RANK_TOL_FACTOR = 1e-12


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and return ``a`` as a 2-D float64 C-contiguous array.

    Raises ValueError on wrong dimensionality or non-finite entries; this is
    the single entry-type gate used by every operation in the package.
    """
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {out.shape}")
    if out.size and not np.isfinite(out).all():
        raise ValueError(f"{name} contains non-finite entries")
    return out


def _rank_tolerance(shape, top_singular_value: float) -> float:
    return max(shape) * top_singular_value * RANK_TOL_FACTOR


def numerical_rank(a) -> int:
    """Number of singular values above the relative rank tolerance."""
    a = as_matrix(a)
    if min(a.shape) == 0:
        return 0
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > _rank_tolerance(a.shape, sv[0])))


def orthonormal_basis(a) -> np.ndarray:
    """Orthonormal basis of the column span of ``a`` via thin SVD.

    Returns an (m, r) matrix with orthonormal columns, where r is the
    numerical rank.  Raises ValueError for an all-zero input, which has no
    basis.
    """
    a = as_matrix(a)
    if min(a.shape) == 0:
        raise ValueError("cannot build a basis for an empty matrix")
    u, sv, _ = np.linalg.svd(a, full_matrices=False)
    if sv[0] == 0.0:
        raise ValueError("cannot build a basis for the zero matrix")
    r = int(np.count_nonzero(sv > _rank_tolerance(a.shape, sv[0])))
    return np.ascontiguousarray(u[:, :r])


@dataclass(frozen=True)
class LeverageProfile:
    """Leverage scores for one axis of a matrix.

    kind "shrinked-row" holds the sampling distribution used for row
    sketches: each score is 0.5 * lev_i / sum(lev) + 1/(2m), so the vector
    sums to one and is bounded below by 1/(2m).  kind "column" holds raw
    column-space leverage scores (norms of rows of the right singular
    factor), which sum to the rank.
    """

    scores: np.ndarray
    kind: str

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 1 or scores.size == 0:
            raise ValueError("scores must be a nonempty 1-D vector")
        if not np.isfinite(scores).all() or (scores < 0).any():
            raise ValueError("scores must be finite and nonnegative")
        if self.kind not in ("shrinked-row", "column"):
            raise ValueError(f"unknown leverage profile kind {self.kind!r}")
        if self.kind == "shrinked-row":
            if abs(scores.sum() - 1.0) > 1e-8:
                raise ValueError("shrinked-row scores must sum to 1")
            if (scores < 0.5 / scores.size - 1e-12).any():
                raise ValueError("shrinked-row scores must be >= 1/(2m)")
        object.__setattr__(self, "scores", scores)


def shrinked_row_scores(u) -> LeverageProfile:
    """Shrinked row sampling distribution of a basis-like matrix ``u``.

    score_i = 0.5 * ||row_i(u)||^2 / ||u||_F^2 + 1/(2m).  The result always
    sums to one, whether or not ``u`` has orthonormal columns.
    """
    u = as_matrix(u, "basis")
    row_sq = np.einsum("ij,ij->i", u, u)
    total = row_sq.sum()
    if total == 0.0:
        raise ValueError("cannot take leverage scores of a zero matrix")
    m = u.shape[0]
    scores = 0.5 * row_sq / total + 0.5 / m
    return LeverageProfile(scores=scores, kind="shrinked-row")


def column_leverage_and_coherence(a, rank: int | None = None):
    """Column-space leverage scores, coherence, and the incoherence ratio.

    The scores are squared row norms of the right singular factor of ``a``
    restricted to its top ``rank`` directions (numerical rank if not given),
    so they index columns of ``a`` and sum to the rank.  Coherence is their
    maximum; the returned beta is coherence * n / rank, i.e. how far the
    worst column sticks out relative to a perfectly incoherent matrix.

    Returns (LeverageProfile, coherence, beta).
    """
    a = as_matrix(a)
    if min(a.shape) == 0:
        raise ValueError("leverage scores of an empty matrix are undefined")
    sv, vt = np.linalg.svd(a, full_matrices=False)[1:]
    if sv[0] == 0.0:
        raise ValueError("leverage scores of the zero matrix are undefined")
    r_num = int(np.count_nonzero(sv > _rank_tolerance(a.shape, sv[0])))
    r = r_num if rank is None else int(rank)
    if not 1 <= r <= vt.shape[0]:
        raise ValueError(f"rank must be in [1, {vt.shape[0]}], got {r}")
    v = vt[:r].T  # (n, r) row-space basis
    scores = np.einsum("ij,ij->i", v, v)
    coherence = float(scores.max())
    n = a.shape[1]
    beta = coherence * n / r
    return LeverageProfile(scores=scores, kind="column"), coherence, beta


@dataclass(frozen=True)
class SketchMatrix:
    """Sparse row-sampling operator S of shape (n_rows, s).

    Column j has its single nonzero at row indices[j] with value scales[j].
    Stored as index/scale vectors; S is only densified on demand.
    """

    n_rows: int
    indices: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        sc = np.asarray(self.scales, dtype=np.float64)
        if idx.ndim != 1 or sc.ndim != 1 or idx.size != sc.size or idx.size == 0:
            raise ValueError("indices and scales must be nonempty 1-D vectors of equal length")
        if self.n_rows < 1:
            raise ValueError("n_rows must be >= 1")
        if (idx < 0).any() or (idx >= self.n_rows).any():
            raise ValueError("sketch indices out of range")
        if not np.isfinite(sc).all() or (sc <= 0).any():
            raise ValueError("sketch scales must be finite and positive")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "scales", sc)

    @property
    def n_cols(self) -> int:
        return self.indices.size

    def dense(self) -> np.ndarray:
        s = np.zeros((self.n_rows, self.n_cols))
        s[self.indices, np.arange(self.n_cols)] = self.scales
        return s

    def spectral_norm_sq(self) -> float:
        """Exact ||S||_2^2 = max_i sum of squared scales landing on row i."""
        per_row = np.bincount(self.indices, weights=self.scales**2, minlength=self.n_rows)
        return float(per_row.max())


def build_sketch(p, s: int, rng: np.random.Generator) -> SketchMatrix:
    """Draw a row-sampling sketch with s columns from the distribution p.

    p may be a probability vector or a LeverageProfile; it must be
    nonnegative and sum to one within 1e-8.  Rows are drawn i.i.d. with
    replacement; duplicates are kept, each with scale 1/sqrt(s * p_i).
    Zero-probability rows are never selected.
    """
    if isinstance(p, LeverageProfile):
        p = p.scores
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("p must be a nonempty 1-D probability vector")
    if not np.isfinite(p).all() or (p < 0).any():
        raise ValueError("p must be finite and nonnegative")
    total = p.sum()
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"p must sum to 1 within 1e-8, got {total!r}")
    if s < 1:
        raise ValueError("sketch size s must be >= 1")
    p_norm = p / total
    indices = rng.choice(p.size, size=int(s), replace=True, p=p_norm)
    scales = 1.0 / np.sqrt(s * p_norm[indices])
    return SketchMatrix(n_rows=p.size, indices=indices, scales=scales)


def apply_sketch_transpose(sketch: SketchMatrix, a) -> np.ndarray:
    """S^T a as a scaled row gather: row j of the result is scales[j] * a[indices[j]]."""
    a = as_matrix(a)
    if a.shape[0] != sketch.n_rows:
        raise ValueError(
            f"sketch expects {sketch.n_rows} rows, matrix has {a.shape[0]}"
        )
    return a[sketch.indices] * sketch.scales[:, None]


def embedding_distortion(sketch: SketchMatrix, a) -> float:
    """Measured subspace-embedding distortion of the sketch on span(a).

    Computes the eigenvalues of (S^T U)^T (S^T U) for U an orthonormal basis
    of a's column span and returns max(lambda_max - 1, 1 - lambda_min); 0
    means a perfect isometry on the span.  A sketch with fewer columns than
    the span dimension has distortion >= 1.
    """
    u = orthonormal_basis(a)
    t = apply_sketch_transpose(sketch, u)
    gram = t.T @ t
    w = np.linalg.eigvalsh(gram)
    lo = max(float(w[0]), 0.0)
    if t.shape[0] < u.shape[1]:
        lo = 0.0  # operator on the span is rank deficient
    hi = float(w[-1])
    return max(hi - 1.0, 1.0 - lo, 0.0)


def check_subspace_embedding(sketch: SketchMatrix, a, eps: float) -> bool:
    """True iff S is a (1 +- eps) subspace embedding for span(a).

    Equivalent to all singular values of S^T U lying in
    [sqrt(1 - eps), sqrt(1 + eps)].
    """
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    return embedding_distortion(sketch, a) <= eps
