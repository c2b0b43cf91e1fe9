import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from olma.loss import (LossSpec, Objective, olma_channel_loss, olma_gradient, olma_items, olma_temporal_loss,
                       olma_total, time_domain_gradient, time_domain_loss)

from conftest import direct_dft

R2 = math.sqrt(2.0)


def t3(x):
    """Shape a (l_out, c) list into a (1, l_out, c) batch."""
    return np.asarray(x, dtype=float)[None]


def fd_gradient(f, x, h=1e-6):
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        xp, xm = x.copy(), x.copy()
        xp[idx] += h
        xm[idx] -= h
        g[idx] = (f(xp) - f(xm)) / (2 * h)
    return g


class TestTimeDomain:
    def test_examples(self):
        assert time_domain_loss(t3([[1.0]]), t3([[1.0]])) == 0.0
        assert time_domain_loss(t3([[2.0]]), t3([[0.0]]), "mse") == 4.0
        assert time_domain_loss(t3([[1.0], [3.0]]), t3([[0.0], [0.0]]), "mae") == 2.0

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            time_domain_loss(np.zeros((1, 2, 1)), np.zeros((1, 3, 1)))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            time_domain_loss(np.zeros((1, 2, 1)), np.zeros((1, 2, 1)), "huber")

    def test_mse_gradient_fd(self, rng):
        p, y = rng.standard_normal((2, 4, 3)), rng.standard_normal((2, 4, 3))
        g = time_domain_gradient(p, y, "mse")
        np.testing.assert_allclose(g, 2 * (p - y) / p.size)
        np.testing.assert_allclose(g, fd_gradient(lambda q: time_domain_loss(q, y), p), atol=1e-8)


class TestChannel:
    def test_examples(self):
        assert olma_channel_loss(t3([[1.0, 2.0]]), t3([[1.0, 2.0]])) == 0.0
        assert olma_channel_loss(t3([[1.0, 0.0]]), t3([[0.0, 0.0]])) == pytest.approx(2.0, abs=1e-15)

    def test_direct_oracle(self, rng):
        p, y = rng.standard_normal((3, 5, 4)), rng.standard_normal((3, 5, 4))
        d = p - y
        expected = np.mean([sum(np.abs(direct_dft(d[b, t])).sum() for t in range(5)) for b in range(3)])
        assert olma_channel_loss(p, y) == pytest.approx(expected, rel=1e-12)

    def test_shared_shift(self, rng):
        p, y = rng.standard_normal((2, 4, 3)), rng.standard_normal((2, 4, 3))
        q, z = p.copy(), y.copy()
        q[:, :, 1] += 5.0
        z[:, :, 1] += 5.0
        assert olma_channel_loss(q, z) == pytest.approx(olma_channel_loss(p, y), rel=1e-12)


class TestTemporal:
    def test_zero(self):
        assert olma_temporal_loss(t3([[1.0], [2.0]]), t3([[1.0], [2.0]])) == (0.0, 0.0)

    def test_impulse(self):
        f, w = olma_temporal_loss(t3([[1.0], [0.0], [0.0], [0.0]]), t3(np.zeros((4, 1))))
        assert f == pytest.approx(4.0, abs=1e-15)
        assert w == pytest.approx(R2, abs=1e-15)

    def test_odd_horizon(self):
        with pytest.raises(ValueError, match="even"):
            olma_temporal_loss(np.zeros((1, 3, 1)), np.ones((1, 3, 1)))
        f, w = olma_temporal_loss(np.zeros((1, 3, 1)), np.ones((1, 3, 1)), wavelet=False)
        assert f == pytest.approx(3.0) and w == 0.0

    def test_direct_oracle(self, rng):
        p, y = rng.standard_normal((2, 6, 3)), rng.standard_normal((2, 6, 3))
        d = p - y
        fourier = np.mean([sum(np.abs(direct_dft(d[b, :, i])).sum() for i in range(3)) for b in range(2)])
        pairs = d.reshape(2, 3, 2, 3)   # (B, pair, member, c)
        wav = np.mean((np.abs(pairs[:, :, 0] + pairs[:, :, 1]) + np.abs(pairs[:, :, 0] - pairs[:, :, 1])).sum(axis=(1, 2)) / R2)
        f, w = olma_temporal_loss(p, y)
        assert f == pytest.approx(fourier, rel=1e-12)
        assert w == pytest.approx(wav, rel=1e-12)


class TestTotal:
    def test_zero_at_match(self, rng):
        p = rng.standard_normal((2, 4, 3))
        assert olma_total(p, p, LossSpec(0.2, 0.3, 0.5)) == 0.0

    def test_channel_only_weights(self, rng):
        p, y = rng.standard_normal((2, 4, 3)), rng.standard_normal((2, 4, 3))
        assert olma_total(p, y, LossSpec(1.0, 0.0, 0.0)) == olma_channel_loss(p, y)

    def test_weighted_composition(self, rng):
        p, y = rng.standard_normal((3, 8, 2)), rng.standard_normal((3, 8, 2))
        f, w = olma_temporal_loss(p, y)
        expected = 0.34 * olma_channel_loss(p, y) + 0.33 * f + 0.33 * w
        assert olma_total(p, y, LossSpec.equal()) == pytest.approx(expected, abs=1e-12)

    def test_toggles(self, rng):
        p, y = rng.standard_normal((2, 4, 3)), rng.standard_normal((2, 4, 3))
        ch_only = LossSpec(0.34, 0.33, 0.33, include_temporal=False)
        assert olma_total(p, y, ch_only) == pytest.approx(0.34 * olma_channel_loss(p, y))
        t_only = LossSpec(0.34, 0.33, 0.33, include_channel=False)
        f, w = olma_temporal_loss(p, y)
        assert olma_total(p, y, t_only) == pytest.approx(0.33 * (f + w))

    def test_items_mean(self, rng):
        p, y = rng.standard_normal((4, 4, 2)), rng.standard_normal((4, 4, 2))
        assert np.mean(olma_items(p, y, LossSpec())) == pytest.approx(olma_total(p, y))


class TestLossSpec:
    def test_defaults_and_presets(self):
        assert LossSpec().weights == (0.34, 0.33, 0.33)
        assert LossSpec.high_channel_entropy().weights == (0.1, 0.45, 0.45)
        assert LossSpec.from_channel_share(0.5).weights == (0.5, 0.25, 0.25)

    @pytest.mark.parametrize("w", [(0.5, 0.5, 0.5), (-0.1, 0.6, 0.5)])
    def test_invalid(self, w):
        with pytest.raises(ValueError):
            LossSpec(*w)

    def test_sum_unchecked_when_term_disabled(self):
        LossSpec(1.0, 1.0, 1.0, include_channel=False)

    def test_eps_positive(self):
        with pytest.raises(ValueError):
            LossSpec(smoothing_eps=0.0)

    def test_from_config(self):
        s = LossSpec.from_config({"loss.alpha": "0.1", "loss.beta": 0.45, "loss.gamma": 0.45,
                                  "loss.include_channel": "false", "loss.eps": 1e-9})
        assert s.weights == (0.1, 0.45, 0.45) and not s.include_channel and s.smoothing_eps == 1e-9


class TestGradient:
    def test_zero_at_match(self, rng):
        p = rng.standard_normal((2, 4, 3))
        assert np.all(olma_gradient(p, p) == 0.0)

    @pytest.mark.parametrize("spec", [LossSpec(), LossSpec(1, 0, 0), LossSpec(0, 1, 0), LossSpec(0, 0, 1),
                                      LossSpec.high_channel_entropy(include_channel=False)])
    def test_finite_differences(self, rng, spec):
        p, y = rng.standard_normal((2, 4, 3)), rng.standard_normal((2, 4, 3))
        g = olma_gradient(p, y, spec)
        fd = fd_gradient(lambda q: olma_total(q, y, spec), p)
        assert np.max(np.abs(g - fd)) / np.max(np.abs(fd)) < 1e-4

    def test_objective_dispatch(self, rng):
        p, y = rng.standard_normal((2, 4, 1)), rng.standard_normal((2, 4, 1))
        assert Objective("mae").value(p, y) == time_domain_loss(p, y, "mae")
        assert Objective(LossSpec()).name == "olma"
        np.testing.assert_array_equal(Objective(LossSpec()).gradient(p, y), olma_gradient(p, y))
        with pytest.raises(ValueError):
            Objective("rmse")


shapes = st.tuples(st.integers(1, 3), st.sampled_from([2, 4, 6, 8]), st.integers(1, 5))


@given(shapes, st.integers(0, 2**32 - 1), st.floats(0.01, 100))
@settings(max_examples=60, deadline=None)
def test_positive_homogeneity(shape, seed, s):
    rng = np.random.default_rng(seed)
    d = rng.standard_normal(shape)
    z = np.zeros(shape)
    for fn in (olma_channel_loss, lambda a, b: olma_temporal_loss(a, b)[0], lambda a, b: olma_temporal_loss(a, b)[1]):
        assert fn(s * d, z) == pytest.approx(s * fn(d, z), rel=1e-12)


@given(shapes, st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_depends_on_difference_only(shape, seed):
    rng = np.random.default_rng(seed)
    p, y, shift = rng.standard_normal(shape), rng.standard_normal(shape), rng.standard_normal(shape)
    assert olma_total(p + shift, y + shift) == pytest.approx(olma_total(p, y), rel=1e-10)


@given(shapes, st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_non_negative_and_zero_iff_equal(shape, seed):
    rng = np.random.default_rng(seed)
    p, y = rng.standard_normal(shape), rng.standard_normal(shape)
    assert olma_total(p, y) > 0
    assert olma_total(p, p) == 0


@given(st.sampled_from([2, 4, 7, 16, 96]), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_parseval_on_difference(l_out, seed):
    d = np.random.default_rng(seed).standard_normal(l_out)
    energy = np.sum(np.abs(np.fft.fft(d)) ** 2)
    assert abs(energy - l_out * np.sum(d * d)) <= 1e-9 * energy
