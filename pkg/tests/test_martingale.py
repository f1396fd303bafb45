import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from banach_ito.martingale import (MONTE_CARLO, ScalarMartingale, mc_brownian, mc_compensated_poisson,
                                   martingale_from_config, quadratic_variation, random_tree_martingale,
                                   random_walk_martingale, verify_qv_properties)
from banach_ito.prob import Filtration, FiniteProbabilitySpace, Partition, cond_expectation, random_scalar


def _z(sample, target=0.0):
    return abs(sample.mean() - target) / (sample.std(ddof=1) / np.sqrt(sample.size))


def test_one_step_walk():
    omega, F, M = random_walk_martingale(1, 0.5)
    np.testing.assert_array_equal(M.paths[:, 1], [0.5, -0.5])
    assert omega.probs @ M.paths[:, 1] == 0


def test_two_step_walk_enumeration():
    omega, _, M = random_walk_martingale(2, 1.0)
    assert omega.leaf_count == 4
    # hand enumeration of the four sign sequences
    expected = {(1, 1): 2.0, (1, -1): 0.0, (-1, 1): 0.0, (-1, -1): -2.0}
    got = sorted(M.paths[:, -1].tolist())
    assert got == sorted(expected.values())
    assert omega.probs @ M.paths[:, -1] ** 2 == 2.0


def test_three_step_walk_martingale_property():
    omega, F, M = random_walk_martingale(3)
    ce = cond_expectation(random_scalar(omega, M.paths[:, 2]), F.partitions[1]).values[:, 0]
    np.testing.assert_array_equal(ce, M.paths[:, 1])
    assert F.partitions[1].n_blocks == 2


def test_walk_filtration_is_by_first_signs():
    _, F, M = random_walk_martingale(4)
    for j in range(5):
        assert F.partitions[j].n_blocks == 2 ** j
        # leaves sharing the first j signs share the block
        for block in F.partitions[j].blocks:
            assert len({tuple(M.paths[i, :j + 1]) for i in block}) == 1


def test_walk_guards():
    with pytest.raises(ValueError):
        random_walk_martingale(21)
    with pytest.raises(ValueError):
        random_walk_martingale(0)
    with pytest.raises(ValueError):
        random_walk_martingale(2, -1.0)


def test_constructor_rejects_bad_paths():
    omega = FiniteProbabilitySpace.uniform(2)
    F = Filtration([0.0, 1.0], [Partition.trivial(2), Partition.discrete(2)])
    with pytest.raises(ValueError, match="start at 0"):
        ScalarMartingale(omega, F, [[1, 2], [1, 0]])
    with pytest.raises(ValueError, match="martingale property"):
        ScalarMartingale(omega, F, [[0, 2], [0, 0]])
    Ftriv = Filtration([0.0, 1.0], [Partition.trivial(2), Partition.trivial(2)])
    with pytest.raises(ValueError, match="adapted"):
        ScalarMartingale(omega, Ftriv, [[0, 1], [0, -1]])


def test_mc_determinism():
    grid = np.linspace(0, 1, 5)
    a, b = mc_brownian(5000, grid, 9), mc_brownian(5000, grid, 9)
    assert a.paths.tobytes() == b.paths.tobytes()
    assert mc_brownian(5000, grid, 10).paths.tobytes() != a.paths.tobytes()
    p, q = mc_compensated_poisson(2.0, grid, 5000, 9), mc_compensated_poisson(2.0, grid, 5000, 9)
    assert p.paths.tobytes() == q.paths.tobytes()


def test_mc_stream_independent_of_path_count_prefix():
    grid = np.linspace(0, 1, 3)
    small, large = mc_brownian(100, grid, 4), mc_brownian(5000, grid, 4)
    np.testing.assert_array_equal(small.paths, large.paths[:100])


def test_brownian_mean_and_qv():
    W = mc_brownian(100_000, np.linspace(0, 1, 17), 7)
    assert W.backend == MONTE_CARLO
    assert _z(W.paths[:, -1]) < 4
    assert _z(quadratic_variation(W).paths[:, -1], 1.0) < 4


def test_poisson_mean():
    N = mc_compensated_poisson(3.0, np.linspace(0, 2, 9), 100_000, 5)
    assert _z(N.paths[:, -1]) < 4
    # the realized QV of the compensated process has mean rate*T + grid-drift terms
    assert np.all(np.diff(quadratic_variation(N).paths, axis=1) >= 0)


def test_qv_zero_martingale():
    omega = FiniteProbabilitySpace.uniform(3)
    F = Filtration([0.0, 1.0, 2.0], [Partition.trivial(3)] * 3)
    M = ScalarMartingale(omega, F, np.zeros((3, 3)))
    assert not quadratic_variation(M).paths.any()
    assert verify_qv_properties(M).passed


def test_qv_random_walk_is_time_index():
    _, _, M = random_walk_martingale(6)
    np.testing.assert_array_equal(quadratic_variation(M).paths, np.broadcast_to(np.arange(7.0), (64, 7)))


def test_qv_report_tree():
    _, _, M = random_walk_martingale(8, 0.3)
    rep = verify_qv_properties(M)
    assert rep.passed and rep.starts_at_zero
    assert rep.martingale_residual <= 1e-12 and rep.jump_residual == 0


def test_qv_report_brownian():
    W = mc_brownian(100_000, np.linspace(0, 1, 9), 3)
    rep = verify_qv_properties(W)
    assert rep.passed and rep.max_z < 4


@settings(max_examples=30)
@given(st.integers(1, 4), st.integers(2, 4), st.integers(0, 10 ** 6))
def test_tree_properties(steps, branching, seed):
    omega, F, M = random_tree_martingale(steps, branching, seed)
    qv = quadratic_variation(M)
    assert np.all(np.diff(qv.paths, axis=1) >= 0)
    np.testing.assert_allclose(qv.paths[:, -1], qv.increments.sum(axis=1), rtol=1e-12)
    assert verify_qv_properties(M, tol=1e-10).passed
    # E[(dM)^2 | F_t] = E[d[M] | F_t] step by step
    for j in range(steps):
        G = F.partitions[j]
        a = cond_expectation(random_scalar(omega, M.increments[:, j] ** 2), G).values
        b = cond_expectation(random_scalar(omega, qv.increments[:, j]), G).values
        np.testing.assert_allclose(a, b, rtol=1e-12)


def test_path_csv():
    _, _, M = random_walk_martingale(1)
    rows = M.to_csv().splitlines()
    assert rows[0] == "leaf,time,value"
    assert rows[1:] == ["0,0.0,0.0", "0,1.0,1.0", "1,0.0,0.0", "1,1.0,-1.0"]
    buf = io.StringIO()
    M.to_csv(buf)
    assert buf.getvalue().splitlines() == rows


@pytest.mark.parametrize("cfg", [
    {"kind": "random_walk", "steps": 3},
    {"kind": "random_tree", "steps": 2, "branching": 3, "seed": 1},
    {"kind": "brownian", "steps": 4, "path_count": 50, "horizon": 1.0, "seed": 1},
    {"kind": "poisson", "steps": 4, "path_count": 50, "rate": 1.5, "seed": 1},
])
def test_from_config(cfg):
    M = martingale_from_config(cfg)
    assert M.filtration.steps == cfg["steps"]


def test_random_kinds_need_a_seed():
    with pytest.raises(KeyError):
        martingale_from_config({"kind": "brownian", "steps": 4, "path_count": 50})
