"""Accuracy metrics and the Monte-Carlo replicate harness."""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .estimate import FitConfig, hard_em_fit
from .model import InvalidInputError, Variant, mle_given_labels
from .simulate import SimDesign, generate_params, sample_data

METRICS = ("mislabel", "rmse", "rmse_star")


def mislabel_fraction(est_z, true_z) -> float:
    """Fraction of groups whose estimated hub differs from the true hub.

    Labels are compared directly; no permutation matching.
    """
    est_z, true_z = np.asarray(est_z), np.asarray(true_z)
    if est_z.shape != true_z.shape or est_z.ndim != 1:
        raise InvalidInputError("label vectors must have equal length")
    if est_z.size == 0:
        raise InvalidInputError("label vectors are empty")
    return float(np.mean(est_z != true_z))


def rmse(A_hat, A_true) -> float:
    A_hat, A_true = np.asarray(A_hat, dtype=float), np.asarray(A_true, dtype=float)
    if A_hat.shape != A_true.shape:
        raise InvalidInputError(f"shape mismatch {A_hat.shape} vs {A_true.shape}")
    return float(np.sqrt(np.mean((A_hat - A_true) ** 2)))


@dataclass(frozen=True)
class ReplicateRecord:
    index: int
    mislabel: float
    rmse: float
    rmse_star: float


class ReplicateError(RuntimeError):
    def __init__(self, index: int, cause: Exception):
        self.index = index
        self.cause = cause
        super().__init__(f"replicate {index}: {cause}")


@dataclass
class ReplicateSummary:
    design: SimDesign
    restarts: int
    records: list[ReplicateRecord]

    @property
    def R(self) -> int:
        return len(self.records)

    def values(self, metric: str) -> np.ndarray:
        return np.array([getattr(r, metric) for r in self.records])

    def mean(self, metric: str) -> float:
        return math.fsum(self.values(metric)) / self.R

    def sd(self, metric: str) -> float:
        if self.R < 2:
            return 0.0
        m = self.mean(metric)
        return math.sqrt(math.fsum((v - m) ** 2 for v in self.values(metric)) / (self.R - 1))

    def se(self, metric: str) -> float:
        return self.sd(metric) / math.sqrt(self.R)

    def row(self) -> dict:
        d = self.design
        out = {"variant": d.variant.value, "n_L": d.n_L, "n": d.n, "T": d.T}
        for m in METRICS:
            out[f"{m}_mean"] = self.mean(m)
            out[f"{m}_sd"] = self.sd(m)
        for m in METRICS:
            out[m] = format_cell(self.mean(m), self.sd(m))
        out.update(R=self.R, restarts=self.restarts, seed=d.seed,
                   rmse_includes_null_row=d.variant is Variant.NULL)
        return out


def format_cell(mean: float, sd: float) -> str:
    """``0.0379 (74)``: mean to four places, sd x 10^4 in parentheses."""
    return f"{mean:.4f} ({round(sd * 1e4):d})"


def replicate_seeds(seed: int, R: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(R)


def run_one(design: SimDesign, fit: FitConfig, index: int,
            seed_seq: np.random.SeedSequence) -> ReplicateRecord:
    """One replicate: fresh parameters, fresh data, hard EM and oracle fits.

    The replicate seed splits into three streams: parameters, data, restarts.
    """
    params_ss, data_ss, fit_ss = seed_seq.spawn(3)
    params = generate_params(design, params_ss)
    data, true_z = sample_data(params, design.T, data_ss)
    cfg = replace(fit, variant=design.variant, seed=int(fit_ss.generate_state(1)[0]))
    result = hard_em_fit(data, params.n_L, cfg)
    known = mle_given_labels(data, true_z, design.variant, params.n_L)
    return ReplicateRecord(
        index=index,
        mislabel=mislabel_fraction(result.labels, true_z),
        rmse=rmse(result.A_hat, params.A),
        rmse_star=rmse(known.A, params.A),
    )


def _run_indexed(args):
    design, fit, index, seed_seq = args
    try:
        return run_one(design, fit, index, seed_seq)
    except Exception as exc:  # re-raised with the replicate index by the caller
        return ReplicateError(index, exc)


def run_replicates(design: SimDesign, fit: FitConfig | None = None, R: int = 100,
                   jobs: int | None = 1) -> ReplicateSummary:
    """Run ``R`` independent replicates of ``design``.

    Replicate ``r`` draws from child ``r`` of the design seed, so results do
    not depend on ``jobs``.  ``jobs=None`` uses every available core.
    """
    if R < 1:
        raise InvalidInputError("R must be at least 1")
    fit = fit or FitConfig()
    tasks = [(design, fit, r, ss) for r, ss in enumerate(replicate_seeds(design.seed, R))]
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1 or R == 1:
        results = [_run_indexed(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(jobs, R)) as pool:
            results = list(pool.map(_run_indexed, tasks))
    for res in results:
        if isinstance(res, ReplicateError):
            raise res
    return ReplicateSummary(design, fit.restarts, results)


def summary_dict(summary: ReplicateSummary) -> dict:
    out = summary.row()
    out["design"] = {k: (v.value if isinstance(v, Variant) else v)
                     for k, v in asdict(summary.design).items()}
    return out
