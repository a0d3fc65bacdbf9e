import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from thor_ordinal import losses
from thor_ordinal.core import Boundaries, binary_decisions, default_boundaries, infer_rank_binary, infer_rank_threshold
from thor_ordinal.errors import InvalidPair, ShapeError

B5 = default_boundaries(5)


def _fd(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2 * h)


class TestThorPairLoss:
    def test_midpoints_zero(self):
        r = losses.thor_pair_loss(0.5, 1.5, 2, B5)
        assert r.value == 0 and r.d_outputs == (0.0, 0.0)

    def test_inside_margin(self):
        r = losses.thor_pair_loss(0.8, 1.2, 2, B5)
        assert r.value == pytest.approx(0.6, abs=1e-12)
        assert r.d_outputs == (1.0, -1.0)

    def test_lower_hinge_only(self):
        r = losses.thor_pair_loss(-2.0, 0.5, 1, B5)
        assert r.value == pytest.approx(1.5, abs=1e-12)
        assert r.d_outputs[0] == -1.0

    def test_top_class_has_no_pair(self):
        with pytest.raises(InvalidPair):
            losses.thor_pair_loss(0.0, 0.0, 5, B5)

    def test_batch_is_mean(self, rng):
        fi, fj = rng.normal(1, 2, 50), rng.normal(1, 2, 50)
        cls = rng.integers(1, 5, 50)
        single = [losses.thor_pair_loss(a, b, c, B5) for a, b, c in zip(fi, fj, cls)]
        batch = losses.thor_batch(fi, fj, cls, B5)
        assert batch.value == pytest.approx(np.mean([s.value for s in single]), abs=1e-12)
        np.testing.assert_allclose(batch.d_outputs[0] * 50, [s.d_outputs[0] for s in single])
        np.testing.assert_allclose(batch.d_outputs[1] * 50, [s.d_outputs[1] for s in single])

    @given(st.floats(-5, 6), st.floats(-5, 6), st.integers(1, 4))
    def test_gradient_matches_fd(self, fi, fj, i):
        args = losses.thor_hinge_arguments(np.array(fi), np.array(fj), np.array(i), B5)
        assume(np.all(np.abs(args) > 1e-3))
        r = losses.thor_pair_loss(fi, fj, i, B5)
        assert _fd(lambda v: losses.thor_pair_loss(v, fj, i, B5).value, fi) == pytest.approx(r.d_outputs[0], abs=1e-6)
        assert _fd(lambda v: losses.thor_pair_loss(fi, v, i, B5).value, fj) == pytest.approx(r.d_outputs[1], abs=1e-6)

    @given(st.floats(-5, 6), st.floats(-5, 6), st.floats(-5, 6), st.floats(-5, 6), st.integers(1, 4))
    def test_convex_midpoint(self, a1, b1, a2, b2, i):
        f = lambda x, y: losses.thor_pair_loss(x, y, i, B5).value
        assert f((a1 + a2) / 2, (b1 + b2) / 2) <= (f(a1, b1) + f(a2, b2)) / 2 + 1e-12

    @given(st.floats(-5, 6), st.floats(-5, 6), st.integers(1, 4))
    def test_subgradient_signs(self, fi, fj, i):
        # raising fi can only shrink the lower hinge and grow the upper one
        t, g = B5.thresholds, B5.margin
        lower = lambda v: max(g + t[i - 1] - v, 0.0)
        upper = lambda v: max(g - t[i] + v, 0.0)
        assert lower(fi + 0.1) <= lower(fi) and upper(fi + 0.1) >= upper(fi)
        d = losses.thor_pair_loss(fi, fj, i, B5).d_outputs
        assert set(d) <= {-1.0, 0.0, 1.0}


class TestViolationCount:
    def test_midpoints(self):
        assert losses.thor_violation_count(0.5, 1.5, 2, B5) == 0

    def test_inside_margin_not_violation(self):
        assert losses.thor_violation_count(0.8, 1.2, 2, B5) == 0

    def test_two(self):
        assert losses.thor_violation_count(-2.0, 2.5, 2, B5) == 2

    @settings(max_examples=300)
    @given(st.floats(-5, 6), st.floats(-5, 6), st.integers(1, 4), st.floats(1e-9, 0.5))
    def test_zero_loss_soundness(self, fi, fj, i, gamma):
        b = B5.with_margin(gamma)
        if losses.thor_pair_loss(fi, fj, i, b).value == 0:
            assert losses.thor_violation_count(fi, fj, i, b) == 0
            assert infer_rank_threshold(fi, b) == i
            assert infer_rank_threshold(fj, b) == i + 1


    def test_zero_margin_boundary_tie(self):
        # without a margin, a score exactly on b_i costs nothing yet belongs to
        # the lower segment under the half-open rule
        b = B5.with_margin(0.0)
        assert losses.thor_pair_loss(0.0, 0.0, 1, b).value == 0
        assert losses.thor_violation_count(0.0, 0.0, 1, b) == 0
        assert infer_rank_threshold(0.0, b) == 1


class TestOrcnn:
    def test_zero_logits(self):
        r = losses.orcnn_loss(np.zeros(4), [1, 1, 0, 0])
        assert r.value == pytest.approx(4 * math.log(2), abs=1e-12)
        np.testing.assert_allclose(r.d_outputs[0], [-0.5, -0.5, 0.5, 0.5])

    def test_saturated(self):
        assert losses.orcnn_loss([50, 50, -50, -50], [1, 1, 0, 0]).value < 1e-20

    def test_k2_is_logistic(self):
        z = 0.7
        assert losses.orcnn_loss([z], [1]).value == pytest.approx(math.log1p(math.exp(-z)), abs=1e-15)

    def test_shape(self):
        with pytest.raises(ShapeError):
            losses.orcnn_loss([0.0, 0.0], [1, 0, 0])

    def test_batch_matches_scalar(self, rng):
        z = rng.normal(0, 5, (20, 4))
        bits = (rng.random((20, 4)) < 0.5).astype(float)
        b = losses.orcnn_batch(z, bits)
        assert b.value == pytest.approx(np.mean([losses.orcnn_loss(r, t).value for r, t in zip(z, bits)]), abs=1e-12)

    @given(st.lists(st.floats(-20, 20), min_size=4, max_size=4), st.integers(1, 5))
    def test_gradient_fd(self, logits, y):
        target = (y > np.arange(1, 5)).astype(float)
        r = losses.orcnn_loss(logits, target)
        for t in range(4):
            e = np.eye(4)[t]
            num = _fd(lambda v: losses.orcnn_loss(np.array(logits) + v * e, target).value, 0.0)
            assert num == pytest.approx(r.d_outputs[0][t], abs=1e-7)


class TestCoral:
    def test_symmetric_case(self):
        r = losses.coral_loss(0.0, losses.CoralHead(np.zeros(2)), [1, 0])
        assert r.value == pytest.approx(2 * math.log(2), abs=1e-12)
        assert r.d_outputs[0] == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(r.d_outputs[1], [-0.5, 0.5])

    @given(st.lists(st.floats(-10, 10), min_size=1, max_size=8), st.floats(-50, 50))
    def test_sorted_biases_monotone_decisions(self, biases, z):
        head = losses.CoralHead(np.sort(biases)[::-1])
        d = binary_decisions(head.logits(z))
        assert np.all(d[:-1] >= d[1:])

    def test_saturation(self):
        head = losses.CoralHead(np.array([1.0, 0.0, -1.0, -2.0]))
        assert infer_rank_binary(binary_decisions(head.logits(50.0))) == 5

    @given(st.floats(-10, 10), st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.integers(1, 4))
    def test_gradient_fd(self, z, biases, y):
        target = (y > np.arange(1, 4)).astype(float)
        head = losses.CoralHead(np.array(biases))
        r = losses.coral_loss(z, head, target)
        assert _fd(lambda v: losses.coral_loss(v, head, target).value, z) == pytest.approx(r.d_outputs[0], abs=1e-7)
        for t in range(3):
            e = np.eye(3)[t]
            num = _fd(lambda v: losses.coral_loss(z, losses.CoralHead(np.array(biases) + v * e), target).value, 0.0)
            assert num == pytest.approx(r.d_outputs[1][t], abs=1e-7)

    def test_batch_matches_scalar(self, rng):
        head = losses.CoralHead(rng.normal(size=3))
        z = rng.normal(size=10)
        bits = (rng.integers(1, 5, 10)[:, None] > np.arange(1, 4)).astype(float)
        b = losses.coral_batch(z, head, bits)
        singles = [losses.coral_loss(zz, head, t) for zz, t in zip(z, bits)]
        assert b.value == pytest.approx(np.mean([s.value for s in singles]), abs=1e-12)
        np.testing.assert_allclose(b.d_outputs[0] * 10, [s.d_outputs[0] for s in singles], atol=1e-12)
        np.testing.assert_allclose(b.d_outputs[1] * 10, sum(s.d_outputs[1] for s in singles), atol=1e-12)


class TestCnnpor:
    def test_ordered_pair_outside_margin(self):
        r = losses.cnnpor_loss(np.zeros(5), np.zeros(5), 2, 3, 0.0, 1.1)
        assert r.d_outputs[2] == 0.0
        assert r.value == pytest.approx(2 * math.log(5), abs=1e-12)

    def test_tie(self):
        cfg = losses.CnnporConfig(c=2.0)
        r = losses.cnnpor_loss(np.zeros(5), np.zeros(5), 2, 3, 0.4, 0.4, cfg)
        assert r.value == pytest.approx(2 * math.log(5) + 2.0 * 1.0, abs=1e-12)
        assert r.d_outputs[2] == 2.0 and r.d_outputs[3] == -2.0

    def test_uniform_logits(self):
        r = losses.cnnpor_loss(np.full(5, 3.3), np.full(5, 3.3), 1, 2, 0.0, 5.0)
        assert r.value == pytest.approx(2 * math.log(5), abs=1e-12)

    def test_non_adjacent(self):
        with pytest.raises(InvalidPair):
            losses.cnnpor_loss(np.zeros(5), np.zeros(5), 1, 3, 0.0, 0.0)

    @given(st.lists(st.floats(-8, 8), min_size=8, max_size=8), st.floats(-3, 3), st.floats(-3, 3), st.integers(1, 3))
    def test_gradient_fd(self, logits, ri, rj, yi):
        assume(abs(1.0 - (rj - ri)) > 1e-3)
        ci, cj = np.array(logits[:4]), np.array(logits[4:])
        r = losses.cnnpor_loss(ci, cj, yi, yi + 1, ri, rj)
        f = lambda a, b, c, d: losses.cnnpor_loss(a, b, yi, yi + 1, c, d).value
        for t in range(4):
            e = np.eye(4)[t]
            assert _fd(lambda v: f(ci + v * e, cj, ri, rj), 0.0) == pytest.approx(r.d_outputs[0][t], abs=1e-7)
            assert _fd(lambda v: f(ci, cj + v * e, ri, rj), 0.0) == pytest.approx(r.d_outputs[1][t], abs=1e-7)
        assert _fd(lambda v: f(ci, cj, v, rj), ri) == pytest.approx(r.d_outputs[2], abs=1e-7)
        assert _fd(lambda v: f(ci, cj, ri, v), rj) == pytest.approx(r.d_outputs[3], abs=1e-7)

    def test_batch_matches_scalar(self, rng):
        cl_lo, cl_hi = rng.normal(size=(8, 5)), rng.normal(size=(8, 5))
        cls = rng.integers(1, 5, 8)
        r_lo, r_hi = rng.normal(size=8), rng.normal(size=8)
        b = losses.cnnpor_batch(cl_lo, cl_hi, cls, r_lo, r_hi)
        singles = [losses.cnnpor_loss(a, c, y, y + 1, d, e) for a, c, y, d, e in zip(cl_lo, cl_hi, cls, r_lo, r_hi)]
        assert b.value == pytest.approx(np.mean([s.value for s in singles]), abs=1e-12)
        np.testing.assert_allclose(b.d_outputs[0] * 8, [s.d_outputs[0] for s in singles], atol=1e-12)


class TestHybrid:
    def test_c_zero_is_classification(self, rng):
        ci, cj = rng.normal(size=5), rng.normal(size=5)
        r = losses.hybrid_loss(ci, cj, 3.0, -4.0, 2, B5, c=0.0)
        ce = losses.softmax_cross_entropy(ci, 2)[0] + losses.softmax_cross_entropy(cj, 3)[0]
        assert r.value == pytest.approx(ce, abs=1e-12)

    def test_joint_optimum(self):
        ci, cj = np.full(5, -40.0), np.full(5, -40.0)
        ci[1], cj[2] = 40.0, 40.0
        r = losses.hybrid_loss(ci, cj, 0.5, 1.5, 2, B5)
        assert r.value < 1e-30

    def test_composition(self, rng):
        for _ in range(20):
            ci, cj = rng.normal(size=5), rng.normal(size=5)
            fi, fj = rng.normal(1, 2, 2)
            i = int(rng.integers(1, 5))
            hyb = losses.hybrid_loss(ci, cj, fi, fj, i, B5, c=1.0)
            l1 = losses.cnnpor_loss(ci, cj, i, i + 1, 0.0, 10.0).value  # pairwise hinge inactive
            th = losses.thor_pair_loss(fi, fj, i, B5).value
            assert abs(hyb.value - (l1 + th)) <= 1e-12
