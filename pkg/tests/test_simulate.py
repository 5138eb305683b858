import numpy as np
import pytest

from hubnet.model import HubParams, InvalidInputError, NullHubParams
from hubnet.simulate import SimDesign, follower_blocks, generate_params, sample_data, simulate


def test_default_design_blocks_and_ranges():
    design = SimDesign(n_L=10, n=100, T=1000, seed=3)
    p = generate_params(design)
    blocks = follower_blocks(10, 100)
    assert [b.size for b in blocks] == [9] * 10
    assert np.array_equal(np.concatenate(blocks), np.arange(10, 100))
    for i, block in enumerate(blocks):
        assert ((p.A[i, block] >= 0.2) & (p.A[i, block] < 0.4)).all()
        others = np.setdiff1d(np.arange(100), np.append(block, i))
        assert ((p.A[i, others] >= 0.0) & (p.A[i, others] < 0.2)).all()
        assert p.A[i, i] == 1.0
    np.testing.assert_allclose(p.rho, 0.1)


def test_uneven_blocks_put_remainder_first():
    assert [b.size for b in follower_blocks(3, 14)] == [4, 4, 3]


def test_single_leader():
    p = generate_params(SimDesign(n_L=1, n=3, T=5))
    assert isinstance(p, HubParams)
    np.testing.assert_array_equal(follower_blocks(1, 3)[0], [1, 2])
    np.testing.assert_array_equal(p.rho, [1.0])


def test_null_design_parameters():
    p = generate_params(SimDesign(n_L=10, n=100, T=10, variant="null", rho0=0.2, pi_const=0.05))
    assert isinstance(p, NullHubParams)
    np.testing.assert_allclose(p.pi, 0.05)
    assert p.rho[0] == pytest.approx(0.2)
    np.testing.assert_allclose(p.rho[1:], 0.08)


def test_generate_is_deterministic():
    d = SimDesign(n_L=5, n=40, T=10, seed=11)
    assert np.array_equal(generate_params(d).A, generate_params(d).A)
    assert not np.array_equal(generate_params(d).A, generate_params(SimDesign(5, 40, 10, seed=12)).A)


@pytest.mark.parametrize("kwargs", [
    dict(n_L=5, n=5, T=1),                                   # no followers
    dict(n_L=6, n=10, T=1),                                  # too few followers to partition
    dict(n_L=2, n=10, T=0),
    dict(n_L=2, n=10, T=1, in_range=(0.4, 0.2)),
    dict(n_L=2, n=10, T=1, in_range=(0.1, 0.4)),            # overlaps out_range
    dict(n_L=2, n=10, T=1, variant="null", rho0=1.5),
])
def test_design_invariants(kwargs):
    with pytest.raises(InvalidInputError):
        SimDesign(**kwargs)


def test_all_ones_row_gives_all_ones_groups():
    data, z = sample_data(HubParams([1.0], [[1, 1, 1]]), 50, seed=0)
    assert data.memberships.all()
    assert (z == 0).all()


def test_pure_null_with_zero_pi_gives_empty_groups():
    p = NullHubParams([1.0, 0.0], [[0, 0, 0], [1, 0.5, 0.5]])
    data, z = sample_data(p, 50, seed=0)
    assert not data.memberships.any()
    assert (z == 0).all()


def test_column_means_within_binomial_band():
    T = 100_000
    data, _ = sample_data(HubParams([1.0], [[1, 0.5, 0.5]]), T, seed=5)
    means = data.memberships.mean(axis=0)
    assert means[0] == 1.0
    band = 3 * np.sqrt(0.25 / T)
    assert (np.abs(means[1:] - 0.5) <= band).all()


@pytest.mark.parametrize("variant", ["asymmetric", "null"])
def test_generated_data_is_feasible(variant):
    params, data, z = simulate(SimDesign(n_L=5, n=30, T=500, variant=variant, seed=1))
    offset = 1 if variant == "null" else 0
    hub_rows = z >= offset
    assert data.memberships[np.flatnonzero(hub_rows), z[hub_rows] - offset].all()


def test_label_frequencies_converge():
    rho = np.array([0.1, 0.2, 0.3, 0.4])
    A = np.full((4, 6), 0.3)
    A[np.arange(4), np.arange(4)] = 1.0
    p = HubParams(rho, A)
    T = 100_000
    inside = 0
    for seed in range(100):
        _, z = sample_data(p, T, seed=seed)
        freq = np.bincount(z, minlength=4) / T
        inside += (np.abs(freq - rho) <= 4 * np.sqrt(rho * (1 - rho) / T)).all()
    assert inside >= 99


def test_simulate_is_reproducible():
    d = SimDesign(n_L=3, n=20, T=100, variant="null", seed=9)
    p1, d1, z1 = simulate(d)
    p2, d2, z2 = simulate(d)
    assert p1.A.tobytes() == p2.A.tobytes()
    assert d1.memberships.tobytes() == d2.memberships.tobytes()
    assert z1.tobytes() == z2.tobytes()


def test_params_and_data_streams_are_separate():
    d = SimDesign(n_L=3, n=20, T=100, seed=9)
    params, data, _ = simulate(d)
    params_ss, data_ss = np.random.SeedSequence(9).spawn(2)
    assert np.array_equal(generate_params(d, params_ss).A, params.A)
    again, _ = sample_data(params, 100, data_ss)
    assert np.array_equal(again.memberships, data.memberships)
