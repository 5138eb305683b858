"""Hard EM maximisation of the profile likelihood over hub labels."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .model import (
    GroupedData,
    InvalidInputError,
    Variant,
    check_labels,
    feasibility_mask,
    _mle,
)

log = logging.getLogger(__name__)

INIT_STRATEGIES = ("mixed", "random-feasible", "cooccurrence", "provided-labels")


class InfeasibleInstanceError(InvalidInputError):
    """A group contains no leader, so the asymmetric model cannot explain it."""

    def __init__(self, group: int):
        self.group = group
        super().__init__(f"group {group + 1} (1-based data row) contains no hub-set node; "
                         "no feasible hub label exists")


@dataclass(frozen=True)
class FitConfig:
    restarts: int = 20
    max_iterations: int = 200
    variant: Variant = Variant.ASYMMETRIC
    clamp_eps: float = 1e-9
    seed: int = 0
    init_strategy: str = "mixed"
    init_labels: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        if self.restarts < 1 or self.max_iterations < 1:
            raise InvalidInputError("restarts and max_iterations must be at least 1")
        if not 0.0 < self.clamp_eps < 0.5:
            raise InvalidInputError("clamp_eps must lie in (0, 0.5)")
        if self.init_strategy not in INIT_STRATEGIES:
            raise InvalidInputError(f"unknown init strategy {self.init_strategy!r}")
        if self.init_strategy == "provided-labels" and self.init_labels is None:
            raise InvalidInputError("provided-labels initialisation needs init_labels")


@dataclass
class FitResult:
    labels: np.ndarray  # row indices
    A_hat: np.ndarray
    rho_hat: np.ndarray
    log_profile_lik: float
    trace: list[float]
    restart_index: int
    iterations: int
    variant: Variant
    converged: bool = True
    empty_rows: np.ndarray | None = None
    restart_logliks: list[float] = field(default_factory=list)

    @property
    def n_L(self) -> int:
        return self.A_hat.shape[0] - self.variant.offset


def e_step_scores(G, A_hat, variant, clamp_eps: float = 1e-9) -> np.ndarray:
    """Per-candidate label scores for each group (rows of ``G``).

    Probabilities are clamped into [eps, 1 - eps] before taking logs.  Hubs
    absent from a group score -inf.  Accepts a single group vector too.
    """
    variant = Variant.parse(variant)
    G = np.asarray(G, dtype=float)
    single = G.ndim == 1
    G = np.atleast_2d(G)
    A = np.clip(np.asarray(A_hat, dtype=float), clamp_eps, 1.0 - clamp_eps)
    log_1ma = np.log1p(-A)
    scores = G @ (np.log(A) - log_1ma).T + log_1ma.sum(axis=1)
    n_L = A.shape[0] - variant.offset
    scores[~feasibility_mask(G, n_L, variant)] = -np.inf
    return scores[0] if single else scores


def random_feasible_labels(G, n_L: int, variant, rng) -> np.ndarray:
    """Uniform over leaders present in each group.  In the null variant the
    hubless label is drawn with probability 1/(n_L + 1) and is forced when no
    leader is present."""
    variant = Variant.parse(variant)
    present = np.asarray(G[:, :n_L], dtype=bool)
    counts = present.sum(axis=1)
    T = G.shape[0]
    u = rng.random(T)
    # pick the k-th present leader, k uniform in [0, counts)
    k = np.minimum((u * counts).astype(np.int64), np.maximum(counts - 1, 0))
    cum = np.cumsum(present, axis=1)
    leader = np.argmax(cum > k[:, None], axis=1)
    if variant is Variant.ASYMMETRIC:
        return leader
    hubless = (rng.random(T) < 1.0 / (n_L + 1)) | (counts == 0)
    return np.where(hubless, 0, leader + 1)


def cooccurrence_labels(G, n_L: int, variant) -> np.ndarray:
    """Labels from one E-step against co-occurrence profiles.

    Hub i's row is the mean of all groups containing i; the null row is the
    mean of all groups.
    """
    variant = Variant.parse(variant)
    G = np.asarray(G, dtype=float)
    offset = variant.offset
    present = G[:, :n_L]
    A = np.empty((n_L + offset, G.shape[1]))
    if offset:
        A[0] = G.mean(axis=0)
    A[offset:] = (present.T @ G) / np.maximum(present.sum(axis=0), 1.0)[:, None]
    return np.argmax(e_step_scores(G, A, variant), axis=1)


def initial_labels(G, n_L: int, config: FitConfig) -> list[np.ndarray]:
    """Starting label vectors, one per restart."""
    variant = config.variant
    if config.init_strategy == "provided-labels":
        z0 = check_labels(config.init_labels, G.shape[0], n_L, variant)
        if not feasibility_mask(G, n_L, variant)[np.arange(G.shape[0]), z0].all():
            raise InvalidInputError("provided initial labels are infeasible")
        return [z0]
    if config.init_strategy == "cooccurrence":
        return [cooccurrence_labels(G, n_L, variant)]
    seeds = np.random.SeedSequence(config.seed).spawn(config.restarts)
    starts = [random_feasible_labels(G, n_L, variant, np.random.default_rng(s)) for s in seeds]
    if config.init_strategy == "mixed":
        starts[0] = cooccurrence_labels(G, n_L, variant)
    return starts


def _run_restart(G, z, n_L, config: FitConfig):
    variant = config.variant
    offset = variant.offset
    trace = []
    converged = False
    for it in range(1, config.max_iterations + 1):
        fit = _mle(G, z, n_L, offset)
        trace.append(fit.profile_loglik())
        z_new = np.argmax(e_step_scores(G, fit.A, variant, config.clamp_eps), axis=1)
        if np.array_equal(z_new, z):
            converged = True
            break
        z = z_new
    else:
        # labels moved on the last allowed iteration; score them before returning
        fit = _mle(G, z, n_L, offset)
        trace.append(fit.profile_loglik())
    return z, fit, trace, it, converged


def hard_em_fit(data: GroupedData, n_L: int, config: FitConfig | None = None) -> FitResult:
    """Best of ``config.restarts`` hard EM runs, ranked by profile likelihood.

    Ties between restarts go to the lowest restart index.
    """
    config = config or FitConfig()
    variant = config.variant
    if not 1 <= n_L <= data.n:
        raise InvalidInputError(f"n_L must lie in [1, {data.n}], got {n_L}")
    G = data.memberships
    if variant is Variant.ASYMMETRIC:
        no_leader = np.flatnonzero(~G[:, :n_L].any(axis=1))
        if no_leader.size:
            raise InfeasibleInstanceError(int(no_leader[0]))

    starts = initial_labels(G, n_L, config)

    Gf = G.astype(float)
    best = None
    restart_logliks = []
    for k, z0 in enumerate(starts):
        z, fit, trace, iters, converged = _run_restart(Gf, z0, n_L, config)
        restart_logliks.append(trace[-1])
        if best is None or trace[-1] > best.log_profile_lik:
            best = FitResult(
                labels=z, A_hat=fit.A, rho_hat=fit.rho, log_profile_lik=trace[-1],
                trace=trace, restart_index=k, iterations=iters, variant=variant,
                converged=converged, empty_rows=fit.empty)
        if not converged:
            log.warning("restart %d stopped at max_iterations=%d", k, config.max_iterations)
    best.restart_logliks = restart_logliks
    return best
