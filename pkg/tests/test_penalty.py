"""Penalty arithmetic, adaptive weights, and the block soft-threshold prox."""

import numpy as np
import pytest

from nodeprune import (
    NetworkParams,
    PenaltyKind,
    PenaltySpec,
    adaptive_weights,
    block_soft_threshold,
    group_norms,
    penalty_value,
)


def params_with_norms(norms, d=1):
    """One node per requested norm, all mass on the u entry."""
    h = len(norms)
    u = np.zeros((h, d))
    u[:, 0] = norms
    return NetworkParams(u=u, v=np.zeros(h), b1=np.zeros(h), b2=0.0)


def test_group_norms_345():
    # node block (u, v, b1) = (3, 0, 4)
    params = NetworkParams(u=np.array([[3.0]]), v=np.array([0.0]), b1=np.array([4.0]), b2=7.0)
    assert group_norms(params)[0] == pytest.approx(5.0, abs=1e-15)


def test_group_norms_zero_params():
    params = NetworkParams(u=np.zeros((4, 2)), v=np.zeros(4), b1=np.zeros(4), b2=0.0)
    assert np.array_equal(group_norms(params), np.zeros(4))


def test_group_norms_sign_flip_invariant():
    gen = np.random.default_rng(30)
    u = gen.standard_normal((3, 2))
    v = gen.standard_normal(3)
    b1 = gen.standard_normal(3)
    a = NetworkParams(u=u, v=v, b1=b1, b2=0.0)
    flipped = NetworkParams(u=-u, v=-v, b1=-b1, b2=0.0)
    assert np.array_equal(group_norms(a), group_norms(flipped))


def test_penalty_value_group_lasso():
    params = params_with_norms([5.0, 0.0, 2.0])
    spec = PenaltySpec.group_lasso(0.1, 3)
    assert penalty_value(params, spec) == pytest.approx(0.7, rel=1e-15)


def test_penalty_value_adaptive():
    params = params_with_norms([4.0, 3.0])
    spec = PenaltySpec.adaptive(
        1.0, weights=np.array([0.25, 1.0]), frozen=np.array([False, False])
    )
    assert penalty_value(params, spec) == pytest.approx(4.0, rel=1e-15)


def test_penalty_value_none_or_zero_reg():
    params = params_with_norms([5.0, 2.0])
    assert penalty_value(params, PenaltySpec.unpenalized(2)) == 0.0
    assert penalty_value(params, PenaltySpec.group_lasso(0.0, 2)) == 0.0


def test_penalty_value_frozen_zero_contributes_nothing():
    params = params_with_norms([3.0, 0.0])
    spec = PenaltySpec.adaptive(
        2.0, weights=np.array([0.5, 0.0]), frozen=np.array([False, True])
    )
    assert penalty_value(params, spec) == pytest.approx(3.0, rel=1e-15)


def test_penalty_value_rejects_nonzero_frozen_group():
    params = params_with_norms([3.0, 1.0])
    spec = PenaltySpec.adaptive(
        2.0, weights=np.array([0.5, 0.0]), frozen=np.array([False, True])
    )
    with pytest.raises(ValueError):
        penalty_value(params, spec)


def test_penalty_value_homogeneous_in_reg():
    gen = np.random.default_rng(31)
    params = NetworkParams(
        u=gen.standard_normal((4, 3)),
        v=gen.standard_normal(4),
        b1=gen.standard_normal(4),
        b2=0.5,
    )
    one = penalty_value(params, PenaltySpec.group_lasso(0.3, 4))
    two = penalty_value(params, PenaltySpec.group_lasso(0.6, 4))
    assert two == pytest.approx(2.0 * one, rel=1e-14)


def test_adaptive_weights_values_and_freezing():
    params = params_with_norms([2.0, 0.0, 1.0])
    weights, frozen = adaptive_weights(params, gamma=2.0)
    assert weights[0] == pytest.approx(0.25, rel=1e-15)
    assert weights[2] == pytest.approx(1.0, rel=1e-15)
    assert weights[1] == 0.0
    assert frozen.tolist() == [False, True, False]


def test_adaptive_weights_unit_norms_reduce_to_group_lasso():
    params = params_with_norms([1.0, 1.0, 1.0])
    for gamma in (0.5, 1.0, 2.0, 4.0):
        weights, frozen = adaptive_weights(params, gamma=gamma)
        assert np.allclose(weights, 1.0, atol=1e-15)
        assert not frozen.any()


def test_adaptive_weights_respects_zero_tol():
    params = params_with_norms([1e-9, 1.0])
    weights, frozen = adaptive_weights(params, gamma=2.0, zero_tol=1e-8)
    assert frozen.tolist() == [True, False]
    with pytest.raises(ValueError):
        adaptive_weights(params, gamma=0.0)


def test_penalty_spec_invariants():
    with pytest.raises(ValueError):
        PenaltySpec.group_lasso(-0.1, 2)
    with pytest.raises(ValueError):
        PenaltySpec(
            PenaltyKind.GROUP_LASSO,
            0.1,
            weights=np.array([1.0, 2.0]),
            frozen=np.array([False, False]),
        )
    with pytest.raises(ValueError):
        # frozen marker must match zero weights exactly
        PenaltySpec.adaptive(0.1, weights=np.array([0.0, 1.0]), frozen=np.array([False, False]))
    spec = PenaltySpec.group_lasso(0.1, 2)
    assert spec.to_dict()["kind"] == "group_lasso"


def test_prox_named_example():
    out = block_soft_threshold(np.array([3.0, 4.0]), 1.0)
    assert out == pytest.approx([2.4, 3.2], rel=1e-15)


def test_prox_zero_threshold_is_identity():
    gen = np.random.default_rng(32)
    w = gen.standard_normal(5)
    assert np.array_equal(block_soft_threshold(w, 0.0), w)


def test_prox_kills_small_groups_exactly():
    w = np.array([0.3, -0.4])
    out = block_soft_threshold(w, 0.5)
    assert np.array_equal(out, np.zeros(2))
    assert not np.signbit(out).any()


def test_prox_output_norm():
    gen = np.random.default_rng(33)
    for _ in range(50):
        w = gen.standard_normal(int(gen.integers(1, 7)))
        t = float(gen.uniform(0, 2))
        got = np.linalg.norm(block_soft_threshold(w, t))
        want = max(0.0, np.linalg.norm(w) - t)
        assert abs(got - want) <= 1e-12


def test_prox_beats_random_candidates():
    # prox(w) should minimize 0.5*||x - w||^2 + t*||x||
    gen = np.random.default_rng(34)
    for _ in range(20):
        dim = int(gen.integers(1, 6))
        w = 2.0 * gen.standard_normal(dim)
        t = float(gen.uniform(0, 2))
        x = block_soft_threshold(w, t)
        best = 0.5 * np.sum((x - w) ** 2) + t * np.linalg.norm(x)
        for _ in range(1000):
            cand = x + gen.standard_normal(dim) * gen.choice([1e-3, 0.1, 1.0])
            val = 0.5 * np.sum((cand - w) ** 2) + t * np.linalg.norm(cand)
            assert val >= best - 1e-10


def test_prox_nonexpansive():
    gen = np.random.default_rng(35)
    for _ in range(100):
        dim = int(gen.integers(1, 6))
        a = gen.standard_normal(dim)
        b = gen.standard_normal(dim)
        t = float(gen.uniform(0, 1.5))
        pa = block_soft_threshold(a, t)
        pb = block_soft_threshold(b, t)
        assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12


def test_prox_rejects_negative_threshold():
    with pytest.raises(ValueError):
        block_soft_threshold(np.ones(2), -0.1)
