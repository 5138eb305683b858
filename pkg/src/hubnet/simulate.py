"""Parameter generation and data sampling for both hub model variants.

Randomness comes from numpy ``Generator`` objects.  Any ``seed`` argument
accepts an int, a ``SeedSequence`` or a ``Generator``.  :func:`simulate`
derives two independent child streams from the design seed, the first for
parameters and the second for data, so either can be reproduced alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import GroupedData, HubParams, InvalidInputError, NullHubParams, Params, Variant


@dataclass(frozen=True)
class SimDesign:
    n_L: int
    n: int
    T: int
    variant: Variant = Variant.ASYMMETRIC
    rho0: float = 0.2
    pi_const: float = 0.05
    in_range: tuple[float, float] = (0.2, 0.4)
    out_range: tuple[float, float] = (0.0, 0.2)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        object.__setattr__(self, "in_range", tuple(map(float, self.in_range)))
        object.__setattr__(self, "out_range", tuple(map(float, self.out_range)))
        self.validate()

    def validate(self):
        if self.n_L < 1 or self.n_L >= self.n:
            raise InvalidInputError(f"need 1 <= n_L < n, got n_L={self.n_L}, n={self.n}")
        if self.n - self.n_L < self.n_L:
            raise InvalidInputError(
                f"{self.n - self.n_L} followers cannot be split into {self.n_L} blocks")
        if self.T < 1:
            raise InvalidInputError("T must be positive")
        for name, (lo, hi) in (("in_range", self.in_range), ("out_range", self.out_range)):
            if not 0.0 <= lo < hi <= 1.0:
                raise InvalidInputError(f"{name} must satisfy 0 <= lo < hi <= 1")
        if self.out_range[1] > self.in_range[0]:
            raise InvalidInputError("out_range must lie below in_range")
        if self.variant is Variant.NULL:
            if not 0.0 <= self.rho0 <= 1.0:
                raise InvalidInputError("rho0 must lie in [0, 1]")
            if not 0.0 <= self.pi_const <= 1.0:
                raise InvalidInputError("pi must lie in [0, 1]")


def follower_blocks(n_L: int, n: int) -> list[np.ndarray]:
    """Contiguous 0-based follower index blocks V_1..V_{n_L}.

    Sizes differ by at most one; the first blocks take the remainder.
    """
    followers = np.arange(n_L, n)
    return np.array_split(followers, n_L)


def generate_params(design: SimDesign, seed=None) -> Params:
    """Draw A and set rho following the simulation design.

    Preferred followers of hub i get U(in_range); every other off-diagonal
    entry, leader-to-leader included, gets U(out_range).
    """
    rng = np.random.default_rng(design.seed if seed is None else seed)
    n_L, n = design.n_L, design.n
    A = rng.uniform(*design.out_range, size=(n_L, n))
    for i, block in enumerate(follower_blocks(n_L, n)):
        A[i, block] = rng.uniform(*design.in_range, size=block.size)
    A[np.arange(n_L), np.arange(n_L)] = 1.0
    if design.variant is Variant.ASYMMETRIC:
        return HubParams(np.full(n_L, 1.0 / n_L), A)
    rho = np.empty(n_L + 1)
    rho[0] = design.rho0
    rho[1:] = (1.0 - design.rho0) / n_L
    rho /= rho.sum()
    pi = np.full((1, n), design.pi_const)
    return NullHubParams(rho, np.vstack([pi, A]))


def sample_data(params: Params, T: int, seed=None) -> tuple[GroupedData, np.ndarray]:
    """Draw T groups.  Returns the data and the true labels (row indices)."""
    if T < 1:
        raise InvalidInputError("T must be positive")
    rng = np.random.default_rng(seed)
    z = rng.choice(params.A.shape[0], size=T, p=params.rho)
    G = (rng.random((T, params.n)) < params.A[z]).astype(np.uint8)
    return GroupedData(G), z


def simulate(design: SimDesign, seed=None):
    """Parameters, data and true labels for one design, from split streams."""
    root = np.random.SeedSequence(design.seed) if seed is None else seed
    if isinstance(root, (int, np.integer)):
        root = np.random.SeedSequence(int(root))
    params_ss, data_ss = root.spawn(2)
    params = generate_params(design, params_ss)
    data, z = sample_data(params, design.T, data_ss)
    return params, data, z
