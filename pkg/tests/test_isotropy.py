"""Tests for isotropic position, the 1-summing estimates and the section inequalities."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lozvol.errors import DegenerateBodyError, Verdict
from lozvol.isotropy.bounds import (
    THEOREM4_DEFAULT_CONSTANT, absolute_first_moment, borell_moment_ratio, check_final_remark, check_lemma3,
    check_theorem3, check_theorem4, hensley_band, theorem3_constant,
)
from lozvol.isotropy.moments import covariance, isotropic_body, second_moments, to_isotropic
from lozvol.isotropy.summing import family_sup, pi1_lower_bound
from lozvol.norms import LpNorm, SubspaceBasis
from lozvol.volume.bodies import NormBall
from lozvol.volume.polytopes import PolytopeV, cross_polytope, cube


class TestIsotropicPosition:
    """A = L_K Sigma^(-1/2)."""

    def test_cube_constant(self):
        report = to_isotropic(cube(3))
        assert report.exact
        assert report.L_K == pytest.approx(12 ** -0.5, abs=1e-9)
        assert report.within_tolerance

    def test_image_has_unit_volume_and_scalar_covariance(self):
        body = PolytopeV.symmetric(np.array([[1.0, 0.2, 0.0], [0.0, 2.0, 0.5], [0.3, 0.0, 0.7]]))
        report = to_isotropic(body)
        assert report.volume_check < 1e-8
        assert report.cov_residual < 1e-8
        assert_allclose(report.matrix @ np.asarray(report.inverse_map), np.eye(3), atol=1e-10)

    def test_idempotent(self):
        body = cross_polytope(3).linear_image(np.diag([1.0, 2.0, 3.0]))
        first = to_isotropic(body)
        second = to_isotropic(isotropic_body(body, first.matrix))
        assert second.L_K == pytest.approx(first.L_K, rel=1e-9)
        assert_allclose(second.matrix, np.eye(3), atol=1e-8)

    @pytest.mark.parametrize("seed", range(3))
    def test_constant_is_invariant_under_rotations(self, seed):
        rng = np.random.default_rng(seed)
        body = PolytopeV.symmetric(rng.standard_normal((5, 3)))
        rotation, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        first = to_isotropic(body)
        rotated = to_isotropic(body.linear_image(rotation))
        assert first.exact and rotated.exact
        assert rotated.L_K == pytest.approx(first.L_K, rel=1e-8)

    def test_flat_body(self):
        with pytest.raises(DegenerateBodyError):
            to_isotropic(PolytopeV(np.array([[1.0, 0.0], [-1.0, 0.0], [0.5, 0.0]])))


class TestSecondMoments:
    """Exact and Monte Carlo second moments."""

    def test_square_exact(self):
        assert_allclose(covariance(cube(2)), 4.0 / 3.0 * np.eye(2), atol=1e-12)

    def test_disk_radial(self):
        moments = second_moments(NormBall.of_subspace(LpNorm.standard(2, 2)), seed=0)
        assert not moments.exact
        error = np.abs(moments.matrix - math.pi / 4 * np.eye(2))
        assert np.all(error <= 4 * np.asarray(moments.std_error) + 1e-12)

    def test_hit_and_run_agrees(self):
        ball = NormBall.of_subspace(LpNorm.standard(3, 2))
        radial = second_moments(ball, seed=1).matrix
        sampled = second_moments(ball, seed=1, mc_method="hit-and-run").matrix
        assert_allclose(sampled, radial, atol=0.08)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            second_moments(NormBall.of_subspace(LpNorm.standard(3, 2)), mc_method="grid")


class TestSumming:
    """Lower bounds on pi_1."""

    def test_exact_sup_on_cube(self):
        assert family_sup(cube(3), np.eye(3)) == pytest.approx(3.0)

    def test_sampled_sup_on_disk(self):
        disk = NormBall.of_subspace(LpNorm.standard(2, 2))
        assert family_sup(disk, np.eye(2), seed=0) == pytest.approx(math.sqrt(2.0), rel=1e-4)

    def test_extra_families_never_lower_the_bound(self):
        body = cross_polytope(3)
        base = pi1_lower_bound(body, seed=0)
        extra = pi1_lower_bound(body, families={"diagonal": [[1.0, 1.0, 1.0], [1.0, -1.0, 0.0]]}, seed=0)
        assert extra.lower_bound >= base.lower_bound
        assert extra.families_tried == base.families_tried + 1


class TestLemma3:
    """L_K pi_1 <= 2 sqrt(2) and the first-moment route to it."""

    @pytest.mark.parametrize("body", [cube(3), cross_polytope(3), cube(2)])
    def test_polytopes(self, body):
        report, estimate = check_lemma3(body)
        assert report.passed
        assert report.lhs == pytest.approx(report.details["L_K"] * estimate.lower_bound)

    def test_absolute_first_moment_of_square(self):
        assert absolute_first_moment(cube(2), [1.0, 0.0]) == pytest.approx(2.0)
        assert absolute_first_moment(cube(1), [1.0]) == pytest.approx(1.0)

    def test_borell_ratio(self):
        assert borell_moment_ratio(cube(2), seed=0).passed

    def test_hensley_band_of_cube(self):
        report = hensley_band(cube(3))
        assert report.inside
        assert report.product == pytest.approx(12 ** -0.5 * math.sqrt(2.0), rel=2e-2)


class TestSectionInequalities:
    """Volume against the largest central section."""

    def test_theorem3(self):
        E = SubspaceBasis.from_rows([[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 0, -1]])
        report = check_theorem3(LpNorm(p=1, weights=[1.0, 2.0, 3.0, 4.0]), E)
        assert report.passed
        assert report.constant_used == pytest.approx(theorem3_constant(4, 3))
        assert report.min_constant <= report.constant_used

    def test_theorem3_skips_lines(self):
        report = check_theorem3(LpNorm.standard(1, 3), SubspaceBasis.from_rows([[1, 1, 1]]))
        assert report.verdict == Verdict.SKIPPED

    def test_theorem4(self):
        report = check_theorem4(LpNorm.standard(1, 3), [[1, 0, 0], [0, 1, 1]])
        assert report.passed
        assert report.min_constant < THEOREM4_DEFAULT_CONSTANT

    def test_theorem4_is_invariant_under_scaling_the_map(self):
        quotient = np.array([[1.0, 0.0, 2.0], [0.0, 1.0, 1.0]])
        base = check_theorem4(LpNorm.standard(1, 3), quotient)
        scaled = check_theorem4(LpNorm.standard(1, 3), 3.0 * quotient)
        assert scaled.verdict == base.verdict
        assert scaled.min_constant == pytest.approx(base.min_constant, rel=1e-6)
        assert scaled.margin == pytest.approx(base.margin, rel=1e-6)

    def test_theorem4_with_tiny_constant_fails(self):
        report = check_theorem4(LpNorm.standard(1, 3), [[1, 0, 0], [0, 1, 1]], constant=1e-6)
        assert report.verdict == Verdict.FAIL

    def test_final_remark(self):
        report = check_final_remark(cube(3), LpNorm.standard("inf", 3))
        assert report.passed
        assert report.details["volume_ratio"] == pytest.approx(1.0)

    def test_final_remark_needs_containment(self):
        with pytest.raises(DegenerateBodyError):
            check_final_remark(PolytopeV(2.0 * cube(3).vertices), LpNorm.standard("inf", 3))
