"""Hub model types, likelihoods and closed-form estimators.

Internally a label is a row index into the parameter matrix ``A``.  For the
asymmetric hub model row ``r`` belongs to hub node ``r`` (0-based).  For the
model with a null component row 0 is the null vector ``pi`` and row ``r >= 1``
belongs to hub node ``r - 1``.  The external (file/report) convention is the
1-based hub index with 0 reserved for hubless groups; see :func:`to_external`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp, xlogy

RHO_TOL = 1e-12


class InvalidInputError(ValueError):
    """Raised when inputs have the wrong shape or violate a type invariant."""


class Variant(str, Enum):
    ASYMMETRIC = "asymmetric"
    NULL = "null"

    @property
    def offset(self) -> int:
        """Number of non-hub rows at the top of ``A`` (1 for the null row)."""
        return 1 if self is Variant.NULL else 0

    @classmethod
    def parse(cls, value) -> "Variant":
        if isinstance(value, cls):
            return value
        aliases = {"asymmetric": cls.ASYMMETRIC, "null": cls.NULL,
                   "null-component": cls.NULL}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise InvalidInputError(f"unknown model variant {value!r}") from None


@dataclass(frozen=True)
class GroupedData:
    """T x n binary membership matrix, one row per observed group."""

    memberships: np.ndarray

    def __post_init__(self):
        G = np.asarray(self.memberships)
        if G.ndim != 2 or G.shape[0] < 1 or G.shape[1] < 1:
            raise InvalidInputError(f"memberships must be a non-empty 2-d matrix, got shape {G.shape}")
        if not np.isin(G, (0, 1)).all():
            raise InvalidInputError("memberships must contain only 0 and 1")
        G = G.astype(np.uint8)
        G.setflags(write=False)
        object.__setattr__(self, "memberships", G)

    @property
    def T(self) -> int:
        return self.memberships.shape[0]

    @property
    def n(self) -> int:
        return self.memberships.shape[1]


def _freeze(x) -> np.ndarray:
    a = np.array(x, dtype=float)
    a.setflags(write=False)
    return a


def _validate_params(rho, A, offset, min_leaders):
    if rho.ndim != 1 or A.ndim != 2:
        raise InvalidInputError("rho must be a vector and A a matrix")
    n_rows, n = A.shape
    n_L = n_rows - offset
    if rho.shape[0] != n_rows:
        raise InvalidInputError(f"rho has length {rho.shape[0]}, A has {n_rows} rows")
    if not min_leaders <= n_L <= n:
        raise InvalidInputError(f"hub-set size {n_L} outside [{min_leaders}, {n}]")
    if (rho < 0).any() or abs(rho.sum() - 1.0) > RHO_TOL:
        raise InvalidInputError("rho must be non-negative and sum to 1")
    if not np.isfinite(A).all() or (A < 0).any() or (A > 1).any():
        raise InvalidInputError("A entries must lie in [0, 1]")
    hubs = np.arange(n_L)
    if not (A[hubs + offset, hubs] == 1.0).all():
        raise InvalidInputError("A[i, i] must equal 1 for every hub")


@dataclass(frozen=True)
class HubParams:
    """Asymmetric hub model: ``rho`` over hubs 1..n_L, ``A`` is n_L x n."""

    rho: np.ndarray
    A: np.ndarray

    variant = Variant.ASYMMETRIC

    def __post_init__(self):
        object.__setattr__(self, "rho", _freeze(self.rho))
        object.__setattr__(self, "A", _freeze(self.A))
        _validate_params(self.rho, self.A, 0, 1)

    @property
    def n_L(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class NullHubParams:
    """Hub model with a null component: row 0 of ``A`` is ``pi``, ``rho[0]`` is
    the hubless probability."""

    rho: np.ndarray
    A: np.ndarray

    variant = Variant.NULL

    def __post_init__(self):
        object.__setattr__(self, "rho", _freeze(self.rho))
        object.__setattr__(self, "A", _freeze(self.A))
        _validate_params(self.rho, self.A, 1, 0)

    @property
    def n_L(self) -> int:
        return self.A.shape[0] - 1

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def pi(self) -> np.ndarray:
        return self.A[0]


Params = HubParams | NullHubParams


def make_params(variant, rho, A) -> Params:
    cls = NullHubParams if Variant.parse(variant) is Variant.NULL else HubParams
    return cls(rho, A)


class LabelFit(NamedTuple):
    A: np.ndarray
    rho: np.ndarray
    empty: np.ndarray  # boolean per row: no group carries this label
    counts: np.ndarray

    def profile_loglik(self) -> float:
        """Plug-in log-likelihood of the labelled data at ``A``.

        Each row contributes ``t_r * sum_j [a log a + (1-a) log(1-a)]``; empty
        rows contribute nothing.
        """
        A = self.A
        per_row = (xlogy(A, A) + xlogy(1.0 - A, 1.0 - A)).sum(axis=1)
        return float(self.counts @ per_row)


# -- labels -------------------------------------------------------------------

def to_external(labels, variant) -> np.ndarray:
    """Row indices -> external labels (1..n_L, 0 = hubless)."""
    return np.asarray(labels, dtype=np.int64) + (1 - Variant.parse(variant).offset)


def from_external(labels, variant) -> np.ndarray:
    return np.asarray(labels, dtype=np.int64) - (1 - Variant.parse(variant).offset)


def feasibility_mask(G: np.ndarray, n_L: int, variant) -> np.ndarray:
    """Boolean T x rows matrix; entry (t, r) says label r can produce group t.

    A hub always appears in its own group, so hub rows are feasible only for
    groups containing that hub.  The null row is always feasible.
    """
    offset = Variant.parse(variant).offset
    mask = np.ones((G.shape[0], n_L + offset), dtype=bool)
    mask[:, offset:] = G[:, :n_L].astype(bool)
    return mask


def check_labels(z, T: int, n_L: int, variant) -> np.ndarray:
    z = np.asarray(z)
    if z.ndim != 1 or z.shape[0] != T:
        raise InvalidInputError(f"expected {T} labels, got shape {z.shape}")
    if not np.issubdtype(z.dtype, np.integer):
        if not np.all(np.mod(z, 1) == 0):
            raise InvalidInputError("labels must be integers")
    z = z.astype(np.int64)
    rows = n_L + Variant.parse(variant).offset
    if z.size and (z.min() < 0 or z.max() >= rows):
        raise InvalidInputError(f"labels outside row range [0, {rows})")
    return z


def _check_shapes(data: GroupedData, A: np.ndarray):
    if A.shape[1] != data.n:
        raise InvalidInputError(f"parameters cover {A.shape[1]} nodes, data has {data.n}")


# -- likelihoods --------------------------------------------------------------

def component_log_probs(G: np.ndarray, A: np.ndarray) -> np.ndarray:
    """T x rows matrix of log P(G_t | row r) with 0 log 0 = 0.

    Entries whose probability is exactly zero (G=1 where A=0, or G=0 where
    A=1) come out as -inf.
    """
    G = np.asarray(G, dtype=float)
    A = np.asarray(A, dtype=float)
    zero, one = A == 0.0, A == 1.0
    with np.errstate(divide="ignore"):
        log_a = np.where(zero, 0.0, np.log(np.where(zero, 1.0, A)))
        log_1ma = np.where(one, 0.0, np.log1p(-np.where(one, 0.0, A)))
    scores = G @ log_a.T + (1.0 - G) @ log_1ma.T
    violations = G @ zero.T.astype(float) + (1.0 - G) @ one.T.astype(float)
    scores[violations > 0] = -np.inf
    return scores


def complete_data_loglik(data: GroupedData, z, params: Params) -> float:
    """Complete-data log-likelihood of ``data`` under labels ``z``.

    Returns -inf for labels that cannot produce their group (e.g. a hub
    absent from its own group); this is not an error.
    """
    _check_shapes(data, params.A)
    z = check_labels(z, data.T, params.n_L, params.variant)
    G = data.memberships.astype(float)
    Az = params.A[z]
    terms = xlogy(G, Az) + xlogy(1.0 - G, 1.0 - Az)
    return float(terms.sum())


def marginal_loglik_per_group(data: GroupedData, params: Params) -> np.ndarray:
    _check_shapes(data, params.A)
    scores = component_log_probs(data.memberships, params.A)
    with np.errstate(divide="ignore"):
        log_rho = np.log(params.rho)
    return logsumexp(scores + log_rho, axis=1)


def marginal_loglik(data: GroupedData, params: Params) -> float:
    """Mixture log-likelihood with hubs integrated out (null row included for
    the null variant)."""
    return float(marginal_loglik_per_group(data, params).sum())


def mle_given_labels(data: GroupedData, z, variant, n_L: int) -> LabelFit:
    """Closed-form estimates of ``A`` and ``rho`` for fixed labels.

    Rows with no assigned groups are filled with 0.5 and a 1 on the hub's own
    column (0.5 everywhere for an empty null row) and flagged in ``empty``.
    """
    variant = Variant.parse(variant)
    z = check_labels(z, data.T, n_L, variant)
    return _mle(data.memberships, z, n_L, variant.offset)


def _mle(G, z, n_L, offset) -> LabelFit:
    T, n = G.shape
    rows = n_L + offset
    onehot = np.zeros((rows, T))
    onehot[z, np.arange(T)] = 1.0
    counts = np.bincount(z, minlength=rows)
    sums = onehot @ G
    empty = counts == 0
    A = np.full((rows, n), 0.5)
    filled = ~empty
    A[filled] = sums[filled] / counts[filled, None]
    for r in np.flatnonzero(empty):
        if r >= offset:
            A[r, r - offset] = 1.0
    return LabelFit(A, counts / T, empty, counts)


def profile_loglik(data: GroupedData, z, variant, n_L: int) -> float:
    """Complete-data log-likelihood maximised over ``A`` for fixed labels."""
    return mle_given_labels(data, z, variant, n_L).profile_loglik()


def population_profile_loglik(assign, true_z, params: Params) -> float:
    """Profile log-likelihood with observations replaced by their conditional
    means ``A[true_z]``."""
    true_z = np.asarray(true_z)
    assign = np.asarray(assign)
    if assign.shape != true_z.shape or assign.ndim != 1:
        raise InvalidInputError("assignment and true labels must be equal-length vectors")
    T = true_z.shape[0]
    true_z = check_labels(true_z, T, params.n_L, params.variant)
    assign = check_labels(assign, T, params.n_L, params.variant)
    P = params.A[true_z]
    rows = params.A.shape[0]
    counts = np.bincount(assign, minlength=rows)
    sums = np.zeros_like(params.A)
    np.add.at(sums, assign, P)
    A_bar = np.divide(sums, counts[:, None], out=np.zeros_like(sums), where=counts[:, None] > 0)
    Az = A_bar[assign]
    return float((xlogy(P, Az) + xlogy(1.0 - P, 1.0 - Az)).sum())
