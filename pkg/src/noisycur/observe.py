"""Two-cost observation model: cheap noisy columns vs costly accurate entries.

Column samples cost column_price each and are read through i.i.d. additive
N(0, sigma_c^2) noise; entry samples cost entry_price each with N(0,
sigma_e^2) noise, sigma_e < sigma_c.  A budget B buys d column samples plus
s full sketched rows (n entries per row), and s is always floored from
whatever is left after the columns.  Noise is regenerated per observation:
sampling the same column or cell twice yields independent noise draws.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import SketchMatrix, apply_sketch_transpose, as_matrix

__all__ = [
    "InfeasiblePlanError",
    "TwoCostModel",
    "SamplingPlan",
    "ObservationSet",
    "BudgetLedger",
    "plan_split",
    "sample_columns",
    "sample_rows_noisy",
    "sample_entries",
    "sample_rows_entrywise",
    "snr",
]


class InfeasiblePlanError(ValueError):
    """Requested column count alone exceeds the budget."""


@dataclass(frozen=True)
class TwoCostModel:
    """Prices, noise levels, and total budget of the observation regime.

    sigma_e and sigma_c are standard deviations.  The model requires strictly
    cheaper-per-entry and strictly noisier column samples (sigma_c > sigma_e);
    call validate_for_rows(m) to also enforce column_price < m * entry_price
    once the ambient row count is known.
    """

    entry_price: float
    column_price: float
    sigma_e: float
    sigma_c: float
    budget: float

    def __post_init__(self):
        if not (self.entry_price > 0 and math.isfinite(self.entry_price)):
            raise ValueError("entry_price must be positive and finite")
        if not (self.column_price > 0 and math.isfinite(self.column_price)):
            raise ValueError("column_price must be positive and finite")
        if not (0 <= self.sigma_e < self.sigma_c):
            raise ValueError("need sigma_c > sigma_e >= 0")
        if not (self.budget >= 0 and math.isfinite(self.budget)):
            raise ValueError("budget must be nonnegative and finite")

    def validate_for_rows(self, n_rows: int):
        if not self.column_price < n_rows * self.entry_price:
            raise ValueError(
                f"column_price {self.column_price} must be below "
                f"{n_rows} * entry_price = {n_rows * self.entry_price}"
            )

    @property
    def column_entries_equivalent(self) -> float:
        """How many entry reads one column read costs: column_price / entry_price."""
        return self.column_price / self.entry_price

    def column_price_fraction(self, n_rows: int) -> float:
        """Column price as a fraction of reading the column entrywise."""
        return self.column_price / (n_rows * self.entry_price)


@dataclass(frozen=True)
class SamplingPlan:
    """Resolved budget split: d column samples and s sketched rows."""

    n_columns: int
    n_rows: int
    spent: float
    leftover: float

    def __post_init__(self):
        if self.n_columns < 0:
            raise ValueError("column count cannot be negative")
        if self.n_rows < 0:
            raise ValueError("row count cannot be negative")
        if self.leftover < -1e-9:
            raise ValueError("plan overspends its budget")


def plan_split(model: TwoCostModel, n_cols: int, d: int) -> SamplingPlan:
    """Split the budget into d column samples plus as many full rows as fit.

    s = floor((B - d * column_price) / (n * entry_price)).  d = 0 sends the
    whole budget to rows.  Raises InfeasiblePlanError when the columns alone
    cost more than B.
    """
    if d < 0:
        raise ValueError("column count cannot be negative")
    if n_cols < 1:
        raise ValueError("need a positive ambient column count")
    col_cost = d * model.column_price
    if col_cost > model.budget + 1e-9:
        raise InfeasiblePlanError(
            f"{d} column samples cost {col_cost}, budget is {model.budget}"
        )
    row_cost = n_cols * model.entry_price
    s = int(math.floor((model.budget - col_cost) / row_cost + 1e-12))
    spent = col_cost + s * row_cost
    return SamplingPlan(n_columns=d, n_rows=s, spent=spent,
                        leftover=model.budget - spent)


@dataclass
class ObservationSet:
    """Raw ledger of noisy samples taken from a matrix.

    column_samples holds (column index, noisy m-vector) pairs; entry_samples
    holds (row, col, noisy value) triples.  Repeated indices are legal and
    keep their independent noise.
    """

    shape: tuple
    column_samples: list = field(default_factory=list)
    entry_samples: list = field(default_factory=list)

    def __post_init__(self):
        m, n = self.shape
        if m < 1 or n < 1:
            raise ValueError("shape must be positive")
        for j, col in self.column_samples:
            if not 0 <= j < n:
                raise ValueError(f"column index {j} out of range")
            if len(col) != m:
                raise ValueError("column sample has wrong length")
        for i, j, _ in self.entry_samples:
            if not (0 <= i < m and 0 <= j < n):
                raise ValueError(f"entry index ({i}, {j}) out of range")

    def cost(self, model: TwoCostModel) -> float:
        return (len(self.column_samples) * model.column_price
                + len(self.entry_samples) * model.entry_price)

    def merged(self, other: "ObservationSet") -> "ObservationSet":
        if other.shape != self.shape:
            raise ValueError("cannot merge observation sets of different shapes")
        return ObservationSet(
            shape=self.shape,
            column_samples=self.column_samples + other.column_samples,
            entry_samples=self.entry_samples + other.entry_samples,
        )


@dataclass
class BudgetLedger:
    """Append-only record of observation charges against one budget."""

    budget: float
    charges: list = field(default_factory=list)

    def charge(self, kind: str, count: int, unit_price: float):
        if count < 0 or unit_price < 0:
            raise ValueError("charges must be nonnegative")
        self.charges.append((kind, int(count), float(unit_price)))

    @property
    def spent(self) -> float:
        return float(sum(c * p for _, c, p in self.charges))

    @property
    def leftover(self) -> float:
        return self.budget - self.spent

    def within_budget(self, slack: float = 1e-9) -> bool:
        return self.spent <= self.budget + slack

    def assert_within_budget(self):
        if not self.within_budget():
            raise RuntimeError(
                f"budget violation: spent {self.spent} of {self.budget} "
                f"({self.charges})"
            )


def sample_columns(a, d: int, sigma_c: float, rng: np.random.Generator):
    """d columns of ``a`` drawn uniformly with replacement, read through noise.

    Returns (c_tilde, indices) where c_tilde is m x d.  Duplicated indices
    get fresh noise each time; sigma_c = 0 reproduces the columns bit-exactly.
    """
    a = as_matrix(a)
    if d < 1:
        raise ValueError("need d >= 1")
    if sigma_c < 0:
        raise ValueError("sigma_c must be nonnegative")
    indices = rng.integers(0, a.shape[1], size=int(d))
    c_tilde = a[:, indices].copy()
    if sigma_c > 0:
        c_tilde += sigma_c * rng.standard_normal(c_tilde.shape)
    return c_tilde, indices


def sample_rows_noisy(a, sketch: SketchMatrix, sigma_e: float,
                      rng: np.random.Generator) -> np.ndarray:
    """Sketched rows S^T a plus i.i.d. N(0, sigma_e^2) noise on every entry."""
    if sigma_e < 0:
        raise ValueError("sigma_e must be nonnegative")
    y = apply_sketch_transpose(sketch, a)
    if sigma_e > 0:
        y = y + sigma_e * rng.standard_normal(y.shape)
    return y


def sample_entries(a, count: int, sigma_e: float, rng: np.random.Generator,
                   weights=None) -> ObservationSet:
    """count noisy entry observations, i.i.d. with replacement.

    weights is either None (uniform over all cells) or an array of
    nonnegative cell weights, shape (m, n) or flat of length m * n; it is
    normalized internally.  Cells with zero weight are never sampled.
    """
    a = as_matrix(a)
    if count < 0:
        raise ValueError("count must be nonnegative")
    if sigma_e < 0:
        raise ValueError("sigma_e must be nonnegative")
    m, n = a.shape
    if weights is None:
        flat_idx = rng.integers(0, m * n, size=int(count))
    else:
        w = np.asarray(weights, dtype=np.float64).reshape(-1)
        if w.size != m * n:
            raise ValueError(f"weights must have {m * n} cells, got {w.size}")
        if not np.isfinite(w).all() or (w < 0).any():
            raise ValueError("weights must be finite and nonnegative")
        total = w.sum()
        if total <= 0:
            raise ValueError("weights sum to zero")
        flat_idx = rng.choice(m * n, size=int(count), p=w / total)
    rows, cols = np.unravel_index(flat_idx, (m, n))
    values = a[rows, cols]
    if sigma_e > 0:
        values = values + sigma_e * rng.standard_normal(values.shape)
    samples = [(int(i), int(j), float(v)) for i, j, v in zip(rows, cols, values)]
    return ObservationSet(shape=(m, n), entry_samples=samples)


def sample_rows_entrywise(a, s: int, sigma_e: float,
                          rng: np.random.Generator) -> ObservationSet:
    """s uniformly chosen rows (with replacement), every cell read at entry precision.

    Costs s * n entry observations; used by baselines that buy whole accurate
    rows instead of sketching.
    """
    a = as_matrix(a)
    if s < 1:
        raise ValueError("need s >= 1")
    if sigma_e < 0:
        raise ValueError("sigma_e must be nonnegative")
    m, n = a.shape
    rows = rng.integers(0, m, size=int(s))
    samples = []
    for i in rows:
        vals = a[i].copy()
        if sigma_e > 0:
            vals += sigma_e * rng.standard_normal(n)
        samples.extend((int(i), int(j), float(v)) for j, v in enumerate(vals))
    return ObservationSet(shape=(m, n), entry_samples=samples)


def snr(a, sigma_c: float) -> float:
    """Signal-to-noise ratio ||a||_F^2 / (m * n * sigma_c^2)."""
    a = as_matrix(a)
    if not sigma_c > 0:
        raise ValueError("sigma_c must be positive")
    signal = float(np.sum(a * a))
    return signal / (a.size * sigma_c**2)
