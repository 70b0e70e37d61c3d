"""Tests for the Monte Carlo estimators and hit-and-run sampling."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lozvol.errors import VolumeEstimateError, VolumeMethod
from lozvol.norms import Block, BlockNorm, LpNorm, SubspaceBasis
from lozvol.volume.bodies import NormBall, QuotientBall, ball_volume_mc, body_volume
from lozvol.volume.montecarlo import (
    estimate_volume, hit_and_run, radial_second_moment, radial_volume, rejection_volume,
)


def euclidean(points):
    return np.linalg.norm(np.atleast_2d(points), axis=1)


def l1(points):
    return np.abs(np.atleast_2d(points)).sum(axis=1)


def l_inf(points):
    return np.abs(np.atleast_2d(points)).max(axis=1)


class TestEstimators:
    """Rejection sampling and radial integration."""

    def test_rejection_disk(self):
        est = rejection_volume(euclidean, np.ones(2), samples=40_000, seed=1)
        assert est.method == VolumeMethod.MONTE_CARLO
        assert est.std_error > 0
        assert abs(est.value - math.pi) <= 4 * est.std_error

    def test_radial_cross_polytope(self):
        est = radial_volume(l1, 3, samples=40_000, seed=2)
        assert abs(est.value - 8.0 / 6.0) <= 4 * est.std_error

    def test_radial_is_exact_for_the_euclidean_ball(self):
        est = radial_volume(euclidean, 3, samples=100, seed=0)
        assert est.value == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)

    def test_low_acceptance_switches_to_radial(self):
        # disk in a 200 x 200 box accepts about 8e-5 of the samples
        est = estimate_volume(euclidean, 2, half_widths=np.full(2, 100.0), samples=1000, seed=0)
        assert est.value == pytest.approx(math.pi, rel=1e-12)
        assert est.std_error == pytest.approx(0.0, abs=1e-12)

    def test_sample_growth_reaches_target(self):
        est = estimate_volume(l_inf, 2, half_widths=np.full(2, 1.5), samples=100, seed=3,
                              max_rel_error=0.02)
        assert est.relative_error <= 0.02
        assert est.samples > 100

    def test_unreachable_accuracy(self):
        with pytest.raises(VolumeEstimateError):
            estimate_volume(l1, 2, half_widths=np.ones(2), samples=100, seed=0,
                            max_samples=400, max_rel_error=1e-9)

    def test_bad_box(self):
        with pytest.raises(VolumeEstimateError):
            estimate_volume(l1, 2, half_widths=np.array([1.0, 0.0]))


class TestDeterminism:
    """Results depend on the seed only."""

    def test_same_seed_same_estimate(self):
        a = rejection_volume(l1, np.ones(3), samples=5000, seed=7)
        b = rejection_volume(l1, np.ones(3), samples=5000, seed=7)
        assert a == b

    def test_independent_of_thread_count(self, mocker):
        mocker.patch("lozvol.config.get_threads", return_value=1)
        single = radial_volume(l1, 4, samples=5000, seed=11)
        mocker.patch("lozvol.config.get_threads", return_value=4)
        parallel = radial_volume(l1, 4, samples=5000, seed=11)
        assert single.value == parallel.value
        assert single.std_error == parallel.std_error


class TestBalls:
    """Unit balls of subspaces."""

    def test_euclidean_section_is_a_disk(self):
        E = SubspaceBasis.from_rows([[1, 0, 1], [0, 1, 0]])
        est = body_volume(NormBall.of_subspace(LpNorm.standard(2, 3), E), seed=0)
        assert est.method == VolumeMethod.MONTE_CARLO
        assert abs(est.value - math.pi) <= 4 * est.std_error

    def test_l3_ball_against_gamma_formula(self):
        # |B_p^k| = (2 Gamma(1 + 1/p))^k / Gamma(1 + k/p)
        p, k = 3.0, 3
        exact = (2 * math.gamma(1 + 1 / p)) ** k / math.gamma(1 + k / p)
        est = ball_volume_mc(LpNorm.standard(p, k), samples=40_000, seed=5)
        assert abs(est.value - exact) <= 4 * est.std_error

    def test_agrees_with_exact_volume_on_random_polytopal_balls(self):
        rng = np.random.default_rng(21)
        for i in range(20):
            n = int(rng.integers(2, 6))
            k = int(rng.integers(1, min(n, 3) + 1))
            leaves = [LpNorm(p=p, weights=rng.uniform(0.5, 2.0, size).tolist())
                      for p, size in (("inf", n // 2), (1, n - n // 2))]
            norm = BlockNorm(kind="max" if i % 2 else "sum", blocks=[
                Block(coords=list(range(n // 2)), norm=leaves[0]),
                Block(coords=list(range(n // 2, n)), norm=leaves[1]),
            ])
            E = SubspaceBasis.from_rows(rng.standard_normal((k, n)))
            exact = body_volume(NormBall.of_subspace(norm, E))
            assert exact.method == VolumeMethod.EXACT_TRIANGULATION
            est = ball_volume_mc(norm, E, samples=20_000, seed=i)
            assert abs(est.value - exact.value) <= 4 * est.std_error + 1e-9 * exact.value, f"body {i}"

    def test_quotient_ball_lives_in_image_coordinates(self):
        norm, quotient = LpNorm.standard(1, 2), [[2.0, 0.0], [0.0, 1.0]]
        ball = QuotientBall.of_map(norm, quotient)
        assert_allclose(ball.support(np.array([[1.0, 0.0], [0.0, 1.0]])), [2.0, 1.0])
        assert body_volume(ball).value == pytest.approx(4.0)
        # the orthonormal-frame variant only sees the row space of the map
        assert body_volume(QuotientBall.projected(norm, quotient)).value == pytest.approx(2.0)

    def test_too_few_samples(self):
        with pytest.raises(VolumeEstimateError):
            ball_volume_mc(LpNorm.standard(2, 2), samples=5000)


class TestMoments:
    """Second moments and uniform sampling."""

    def test_disk_second_moment(self):
        moment, std_error = radial_second_moment(euclidean, 2, samples=20_000, seed=4)
        expected = math.pi / 4 * np.eye(2)
        assert np.all(np.abs(moment - expected) <= 4 * std_error + 1e-12)

    def test_hit_and_run_stays_inside(self):
        points = hit_and_run(l_inf, 3, radius=math.sqrt(3), samples=500, seed=0)
        assert points.shape == (500, 3)
        assert np.all(l_inf(points) <= 1.0 + 1e-9)
        assert_allclose(points.mean(axis=0), 0.0, atol=0.15)

    def test_hit_and_run_needs_samples(self):
        with pytest.raises(VolumeEstimateError):
            hit_and_run(l_inf, 2, radius=2.0, samples=0, seed=0)
