import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from chshblocks import states as S
from chshblocks.errors import (
    ArityError,
    DegenerateStateError,
    LevelIndexError,
    ProbabilityError,
    StateInvariantError,
)


def test_make_pure_examples():
    assert dict(S.make_pure((2, 2), {(1, 1): 1}).amplitudes) == {(1, 1): 1}
    sing = S.make_pure((2, 2), {(1, 2): 1, (2, 1): -1})
    assert sing.amplitudes[(1, 2)] == pytest.approx(1 / math.sqrt(2))
    assert sing.amplitudes[(2, 1)] == pytest.approx(-1 / math.sqrt(2))
    me = S.make_pure((3, 3), {(1, 1): 1, (2, 2): 1, (3, 3): 1})
    assert all(v == pytest.approx(1 / math.sqrt(3)) for v in me.amplitudes.values())


def test_make_pure_errors():
    with pytest.raises(DegenerateStateError):
        S.make_pure((2, 2), {(1, 1): 0})
    with pytest.raises(LevelIndexError):
        S.make_pure((2, 2), {(3, 1): 1})
    with pytest.raises(LevelIndexError):
        S.make_pure((2, 2), {(0, 1): 1})


def test_support_is_canonically_sorted():
    psi = S.make_pure((3, 3), {(3, 1): 1, (1, 2): 1, (2, 3): 1})
    assert list(psi.amplitudes) == [(1, 2), (2, 3), (3, 1)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False,
                                                  allow_infinity=False))
def test_make_pure_scale_invariance(seed, c):
    rng = np.random.default_rng(seed)
    raw = {(i, j): complex(*rng.standard_normal(2)) for i in range(1, 4) for j in range(1, 3)}
    p1 = S.make_pure((3, 2), raw)
    p2 = S.make_pure((3, 2), {k: c * v for k, v in raw.items()})
    ref = (1, 1)
    for k in raw:
        assert p1.amplitudes[k] * p2.amplitudes[ref] == pytest.approx(p2.amplitudes[k] * p1.amplitudes[ref],
                                                                      abs=1e-12)


def test_to_density_examples():
    rho = S.to_density(S.make_pure((2, 2), {(1, 1): 1}))
    assert rho.matrix[0, 0] == 1 and np.count_nonzero(rho.matrix) == 1
    rho = S.to_density(S.singlet())
    assert np.allclose(np.linalg.eigvalsh(rho.matrix)[::-1], [1, 0, 0, 0], atol=1e-12)


@pytest.mark.parametrize("dims", [(2, 2), (3, 4), (2, 2, 3)])
def test_to_density_invariants_on_random_states(dims):
    for seed in range(20):
        rho = S.to_density(S.random_pure(dims, seed))
        assert np.trace(rho.matrix).real == pytest.approx(1, abs=1e-12)


def test_random_pure_determinism_and_norm():
    a, b = S.random_pure((2, 2), 7), S.random_pure((2, 2), 7)
    assert a == b
    assert np.linalg.norm(S.random_pure((3, 5), 1).vector()) == pytest.approx(1, abs=1e-12)


def test_random_pure_haar_purity_moment():
    # The sampler's mean purity must match an independent 10^5-draw estimate and
    # the Haar moment (dA + dB)/(dA dB + 1) = 4/5 at dims (2, 2).
    vals = [oracles.reduced_purity(S.random_pure((2, 2), k).vector(), (2, 2)) for k in range(10_000)]
    reference = oracles.haar_mean_purity(2, 2, 100_000, seed=12345)
    assert abs(reference - 0.8) < 0.005
    assert abs(np.mean(vals) - reference) < 0.01


def test_mix_examples():
    rho = S.to_density(S.singlet())
    assert np.array_equal(S.mix([(1.0, rho)]).matrix, rho.matrix)
    cc = S.mix([(0.5, S.make_pure((2, 2), {(1, 1): 1})), (0.5, S.make_pure((2, 2), {(2, 2): 1}))])
    assert np.allclose(cc.matrix, np.diag([0.5, 0, 0, 0.5]))
    werner = S.mix([(0.5, rho), (0.5, S.DensityOperator((2, 2), np.eye(4) / 4))])
    assert np.linalg.eigvalsh(werner.matrix)[0] >= -1e-12


def test_mix_errors():
    rho = S.to_density(S.singlet())
    with pytest.raises(ProbabilityError):
        S.mix([(0.6, rho), (0.6, rho)])
    with pytest.raises(ProbabilityError):
        S.mix([(1.5, rho), (-0.5, rho)])


def test_density_invariant_errors():
    with pytest.raises(StateInvariantError):
        S.DensityOperator((2, 2), np.diag([1.5, -0.5, 0, 0]))
    with pytest.raises(StateInvariantError):
        S.DensityOperator((2, 2), np.eye(4) / 2)
    with pytest.raises(StateInvariantError):
        S.DensityOperator((2, 2), np.triu(np.ones((4, 4))) / 4)


def test_reduced_examples():
    prod = S.random_product((3, 2), 1)
    assert np.linalg.matrix_rank(S.reduced(prod).matrix, tol=1e-9) == 1
    assert np.allclose(S.reduced(S.singlet()).matrix, np.eye(2) / 2)
    g = S.ghz(3)
    r = S.reduced(g, S.Bipartition((1,), (2, 3)), "left")
    assert np.allclose(r.matrix, np.diag([0.5, 0.5]))


def test_reduced_pure_matches_partial_trace():
    psi = S.random_pure((2, 3, 2), 3)
    p = S.Bipartition((1, 3), (2,))
    for side in ("left", "right"):
        assert np.allclose(S.reduced(psi, p, side).matrix, S.reduced(S.to_density(psi), p, side).matrix,
                           atol=1e-12)


def test_reduced_invariants():
    for seed in range(30):
        psi = S.random_pure((3, 4), seed)
        r = S.reduced(psi)
        assert np.trace(r.matrix).real == pytest.approx(1, abs=1e-10)
        w = np.linalg.eigvalsh(r.matrix)
        assert w.min() >= -1e-9 and w.max() <= 1 + 1e-9


def test_bipartitions():
    assert [p.label() for p in S.all_bipartitions(3)] == ["1|23", "12|3", "13|2"]
    assert len(S.all_bipartitions(5)) == 15
    assert S.Bipartition((2, 3), (1,)) == S.Bipartition((1,), (2, 3))
    with pytest.raises(ArityError):
        S.Bipartition((1, 2), (2, 3))
    with pytest.raises(ArityError):
        S.Bipartition((1, 2, 3), ())


def test_regroup_roundtrip():
    rng = np.random.default_rng(0)
    dims = (2, 3, 2)
    m = rng.standard_normal((12, 12))
    for p in S.all_bipartitions(3):
        assert np.array_equal(S.ungroup_operator(S.regroup_operator(m, dims, p), dims, p), m)


def test_horodecki_family_is_ppt_state():
    for a in (0.1, 0.5, 0.9):
        rho = S.horodecki_bound_entangled(a)
        assert np.trace(rho.matrix).real == pytest.approx(1)
