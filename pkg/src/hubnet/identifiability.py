"""Sufficient identifiability conditions and a brute-force distribution oracle.

The condition checkers test strict inequalities up to a tolerance ``tol``.
Witness indices in reports use the external 1-based node numbering.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .model import HubParams, InvalidInputError, NullHubParams, Params, component_log_probs

ENUMERATION_CAP = 14


class EnumerationLimitError(InvalidInputError):
    def __init__(self, n: int, cap: int):
        super().__init__(
            f"n={n} nodes means 2^{n} outcomes; the enumeration cap is {cap} nodes")
        self.n, self.cap = n, cap


@dataclass
class Condition:
    name: str
    passed: bool
    detail: str
    witnesses: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail,
                "witnesses": self.witnesses}


@dataclass
class ConditionReport:
    check: str
    tol: float
    conditions: list[Condition]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def to_dict(self) -> dict:
        return {"check": self.check, "tol": self.tol, "passed": self.passed,
                "conditions": [c.to_dict() for c in self.conditions]}


def _check_rho(rho, first_label: int, tol: float) -> Condition:
    bad = [int(i) + first_label for i in np.flatnonzero((rho <= tol) | (rho >= 1.0 - tol))]
    return Condition(
        "rho_interior", not bad,
        "0 < rho_i < 1 for every component",
        [{"label": i, "rho": float(rho[i - first_label])} for i in bad])


def _check_off_diagonal(A, offset: int, tol: float) -> Condition:
    n_L = A.shape[0] - offset
    off_diag = np.ones_like(A, dtype=bool)
    off_diag[np.arange(offset, offset + n_L), np.arange(n_L)] = False
    rows, cols = np.nonzero(off_diag & (A >= 1.0 - tol))
    witnesses = [{"row": int(r) + 1 - offset, "node": int(c) + 1, "value": float(A[r, c])}
                 for r, c in zip(rows, cols)]
    return Condition("off_diagonal_below_one", not witnesses,
                     "A_ij < 1 for every off-diagonal entry", witnesses)


def _check_pair_separation(A, offset: int, tol: float) -> Condition:
    n_L = A.shape[0] - offset
    hubs = A[offset:, n_L:]
    witnesses, failures = [], []
    for i, k in itertools.combinations(range(n_L), 2):
        gap = np.abs(hubs[i] - hubs[k])
        j = int(np.argmax(gap)) if gap.size else -1
        if gap.size and gap[j] > tol:
            witnesses.append({"pair": [i + 1, k + 1], "follower": n_L + j + 1,
                              "gap": float(gap[j])})
        else:
            failures.append({"pair": [i + 1, k + 1]})
    return Condition(
        "leader_pairs_separated", not failures,
        "every leader pair differs on some follower",
        failures if failures else witnesses)


def check_asymmetric(params: HubParams, tol: float = 1e-9) -> ConditionReport:
    """Sufficient conditions for the asymmetric hub model."""
    return ConditionReport("asymmetric", tol, [
        _check_rho(params.rho, 1, tol),
        _check_off_diagonal(params.A, 0, tol),
        _check_pair_separation(params.A, 0, tol),
    ])


def check_null_component(params: NullHubParams, tol: float = 1e-9) -> ConditionReport:
    """Sufficient conditions for the hub model with a null component.

    Adds the requirement that every hub row differ from ``pi`` on at least
    two followers.
    """
    A, n_L = params.A, params.n_L
    gaps = np.abs(A[1:, n_L:] - A[0, n_L:])
    witnesses, failures = [], []
    for i in range(n_L):
        idx = np.flatnonzero(gaps[i] > tol)
        if idx.size >= 2:
            top = idx[np.argsort(-gaps[i, idx], kind="stable")[:2]]
            witnesses.append({"leader": i + 1, "followers": sorted(int(k) + n_L + 1 for k in top)})
        else:
            failures.append({"leader": i + 1, "followers": [int(k) + n_L + 1 for k in idx]})
    differs_from_null = Condition(
        "leaders_differ_from_null", not failures,
        "every leader differs from pi on two followers",
        failures if failures else witnesses)
    return ConditionReport("null-component", tol, [
        _check_rho(params.rho, 0, tol),
        _check_off_diagonal(A, 1, tol),
        _check_pair_separation(A, 1, tol),
        differs_from_null,
    ])


def check_conditions(params: Params, tol: float = 1e-9) -> ConditionReport:
    if isinstance(params, NullHubParams):
        return check_null_component(params, tol)
    return check_asymmetric(params, tol)


def all_outcomes(n: int) -> np.ndarray:
    """2^n x n binary matrix; row b is the binary expansion of b, node 1 first."""
    codes = np.arange(2 ** n, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n)) & 1).astype(np.uint8)


def outcome_distribution(params: Params, cap: int = ENUMERATION_CAP):
    """Probability of every possible single group under ``params``.

    Returns ``(outcomes, probs)`` where ``outcomes`` comes from
    :func:`all_outcomes`.
    """
    n = params.n
    if n > cap:
        raise EnumerationLimitError(n, cap)
    outcomes = all_outcomes(n)
    comp = np.exp(component_log_probs(outcomes, params.A))
    return outcomes, comp @ params.rho


def distributions_distinct(p1: Params, p2: Params, tol: float = 1e-12,
                           cap: int = ENUMERATION_CAP):
    """Whether two parameter sets induce different single-group distributions.

    Returns ``(distinct, gap, outcome)`` where ``outcome`` maximises the
    absolute probability gap.
    """
    if type(p1) is not type(p2) or p1.A.shape != p2.A.shape:
        raise InvalidInputError("parameter sets differ in variant or shape")
    outcomes, q1 = outcome_distribution(p1, cap)
    _, q2 = outcome_distribution(p2, cap)
    diff = np.abs(q1 - q2)
    b = int(np.argmax(diff))
    return bool(diff[b] > tol), float(diff[b]), outcomes[b]
