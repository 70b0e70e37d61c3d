"""Tests for the unconditional norm grammar."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from lozvol.errors import NormError, RankDeficiencyError
from lozvol.linalg_utils import sign_vectors
from lozvol.norms import (
    Block, BlockNorm, LpNorm, SubspaceBasis, check_unconditionality, eval_dual_norm, eval_norm,
    parse_norm, sample_unit_sphere,
)
from lozvol.runner.suite import random_norm


def mixed_norm() -> BlockNorm:
    """max(l1 on {0, 1}, weighted l_inf on {2, 3})."""
    return BlockNorm(kind="max", blocks=[
        Block(coords=[0, 1], norm=LpNorm.standard(1, 2)),
        Block(coords=[2, 3], norm=LpNorm(p="inf", weights=[2.0, 0.5])),
    ])


class TestEvaluate:
    """Norm values on known vectors."""

    def test_standard_lp(self):
        v = [1.0, -2.0, 3.0]
        assert eval_norm(LpNorm.standard(1, 3), v) == pytest.approx(6.0)
        assert eval_norm(LpNorm.standard(2, 3), v) == pytest.approx(math.sqrt(14.0))
        assert eval_norm(LpNorm.standard("inf", 3), v) == pytest.approx(3.0)

    def test_weighted_l1(self):
        assert eval_norm(LpNorm(p=1, weights=[2.0, 1.0]), [1.0, 1.0]) == pytest.approx(3.0)

    def test_stack_returns_array(self):
        values = LpNorm.standard(1, 2).evaluate(np.array([[1.0, 1.0], [0.0, -3.0]]))
        assert_allclose(values, [2.0, 3.0])

    def test_block_max_and_sum(self):
        v = [1.0, 1.0, 5.0]
        blocks = [Block(coords=[0, 1], norm=LpNorm.standard(1, 2)),
                  Block(coords=[2], norm=LpNorm.standard("inf", 1))]
        assert eval_norm(BlockNorm(kind="max", blocks=blocks), v) == pytest.approx(5.0)
        assert eval_norm(BlockNorm(kind="sum", blocks=blocks), v) == pytest.approx(7.0)

    def test_large_p_does_not_overflow(self):
        assert eval_norm(LpNorm.standard(50, 2), [1e200, 1e200]) == pytest.approx(1e200 * 2 ** (1 / 50))

    def test_dimension_mismatch(self):
        with pytest.raises(NormError):
            eval_norm(LpNorm.standard(2, 3), [1.0, 2.0])

    def test_non_finite(self):
        with pytest.raises(NormError):
            eval_norm(LpNorm.standard(2, 2), [1.0, float("nan")])


class TestGrammar:
    """JSON grammar and validation."""

    def test_parse_inf_string(self):
        norm = parse_norm('{"kind": "lp", "p": "inf", "weights": [1, 2]}')
        assert math.isinf(norm.p)
        assert norm.model_dump(mode="json")["p"] == "inf"

    def test_parse_nested_blocks(self):
        norm = parse_norm(mixed_norm().model_dump(mode="json"))
        assert norm.dim == 4
        assert eval_norm(norm, [1, 1, 1, 1]) == pytest.approx(2.0)

    def test_p_below_one_rejected(self):
        with pytest.raises(ValidationError):
            LpNorm(p=0.5, weights=[1.0])

    def test_non_positive_weight_rejected(self):
        with pytest.raises(ValidationError):
            LpNorm(p=2, weights=[1.0, 0.0])

    def test_blocks_must_partition(self):
        with pytest.raises(ValidationError):
            BlockNorm(kind="sum", blocks=[
                Block(coords=[0, 2], norm=LpNorm.standard(1, 2)),
            ])

    def test_unknown_field_rejected(self):
        with pytest.raises(ValidationError):
            parse_norm({"kind": "lp", "p": 1, "weights": [1], "scale": 2})


class TestDuality:
    """Dual norms, dual maximisers and unit-ball vertices."""

    def test_structural_dual_of_weighted_l1(self):
        dual = LpNorm(p=1, weights=[2.0, 4.0]).dual()
        assert math.isinf(dual.p)
        assert_allclose(dual.weights, [0.5, 0.25])

    def test_dual_evaluate_matches_dual_norm(self):
        norm = mixed_norm()
        rng = np.random.default_rng(3)
        for v in rng.standard_normal((10, 4)):
            assert eval_dual_norm(norm, v) == pytest.approx(eval_norm(norm.dual(), v))

    def test_dual_norm_is_max_over_ball_vertices(self):
        norm = mixed_norm()
        vertices = norm.ball_vertices()
        assert_allclose(norm.evaluate(vertices), 1.0)
        rng = np.random.default_rng(4)
        for v in rng.standard_normal((10, 4)):
            assert eval_dual_norm(norm, v) == pytest.approx((vertices @ v).max())

    @pytest.mark.parametrize("p", [1, 1.5, 3, "inf"])
    def test_dual_maximizer_attains_dual_norm(self, p):
        norm = LpNorm(p=p, weights=[1.0, 2.0, 0.5])
        a = np.array([0.3, -1.2, 2.0])
        x = norm.dual_maximizer(a)
        assert eval_norm(norm, x) <= 1.0 + 1e-12
        assert float(a @ x) == pytest.approx(eval_dual_norm(norm, a))

    def test_euclidean_ball_has_no_vertices(self):
        with pytest.raises(NormError):
            LpNorm.standard(2, 3).ball_vertices()

    def test_subgradient_of_l_inf_at_tie(self):
        gens = LpNorm.standard("inf", 3).subgradients([1.0, 1.0, 0.5], eps=0.0)
        assert_allclose(gens, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])

    def test_dual_ball_vertices_of_l1_are_cube_corners(self):
        vertices = LpNorm.standard(1, 3).dual_ball_vertices()
        assert vertices.shape == (8, 3)
        assert_allclose(np.abs(vertices), 1.0)

    def test_polytopal_only_without_curved_blocks(self):
        assert mixed_norm().is_polytopal
        curved = BlockNorm(kind="sum", blocks=[
            Block(coords=[0], norm=LpNorm.standard(1, 1)),
            Block(coords=[1, 2], norm=LpNorm.standard(2, 2)),
        ])
        assert not curved.is_polytopal


class TestNormAxioms:
    """Homogeneity, the triangle inequality and the dual pairing on random grammar norms."""

    @pytest.fixture(params=range(8))
    def norm(self, request):
        rng = np.random.default_rng(100 + request.param)
        return random_norm(rng, int(rng.integers(1, 8)))

    def test_positive_homogeneity(self, norm):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((20, norm.dim))
        t = rng.uniform(-5.0, 5.0, 20)
        assert_allclose(norm.evaluate(t[:, None] * x), np.abs(t) * norm.evaluate(x), rtol=1e-12)

    def test_triangle_inequality(self, norm):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((50, norm.dim))
        y = rng.standard_normal((50, norm.dim)) * rng.uniform(0.01, 100.0, (50, 1))
        assert np.all(norm.evaluate(x + y) <= (norm.evaluate(x) + norm.evaluate(y)) * (1 + 1e-12))

    def test_dual_pairing(self, norm):
        rng = np.random.default_rng(2)
        for a in rng.standard_normal((10, norm.dim)):
            x = rng.standard_normal(norm.dim)
            assert abs(float(a @ x)) <= eval_norm(norm, x) * eval_dual_norm(norm, a) * (1 + 1e-12)
            best = norm.dual_maximizer(a)
            assert eval_norm(norm, best) <= 1.0 + 1e-10
            assert float(a @ best) == pytest.approx(eval_dual_norm(norm, a), rel=1e-9)


class TestSampling:
    """Unit-sphere samples and the unconditionality check."""

    def test_samples_on_unit_sphere(self):
        norm = mixed_norm()
        points = sample_unit_sphere(norm, 200, seed=1)
        assert points.shape == (200, 4)
        assert_allclose(norm.evaluate(points), 1.0)

    def test_samples_are_reproducible(self):
        norm = LpNorm.standard(3, 3)
        assert_allclose(sample_unit_sphere(norm, 5, seed=9), sample_unit_sphere(norm, 5, seed=9))

    def test_grammar_norms_are_unconditional(self):
        report = check_unconditionality(mixed_norm(), trials=200, seed=0)
        assert report.passed
        assert report.max_deviation <= 1e-12

    def test_callable_oracle_that_mixes_coordinates_fails(self):
        report = check_unconditionality(lambda x: abs(x[0] + x[1]) + abs(x[0]), trials=50, seed=0, dim=2)
        assert not report.passed

    def test_every_sign_pattern_is_checked_up_to_twenty_coordinates(self):
        report = check_unconditionality(LpNorm.standard(1.5, 14), trials=3, seed=0)
        assert report.passed
        assert report.trials == 3 + 2 ** 14
        report = check_unconditionality(LpNorm.standard(2, 21), trials=3, seed=0)
        assert report.trials == 3

    def test_exhaustive_patterns_catch_a_mixing_oracle_from_one_sample(self):
        report = check_unconditionality(
            lambda x: float(np.abs(x).sum() + abs(x[0] + x[1])), trials=1, seed=2, dim=16,
        )
        assert not report.passed
        assert report.trials == 1 + 2 ** 16

    def test_callable_needs_dim(self):
        with pytest.raises(NormError):
            check_unconditionality(lambda x: float(np.abs(x).sum()), trials=5, seed=0)


class TestSubspaceBasis:
    """Subspace bases and their orthonormal frames."""

    def test_frame_is_orthonormal_and_spans_basis(self):
        E = SubspaceBasis.from_rows([[1, 1, 0, 0], [0, 1, 1, 1]])
        frame = E.orthonormal_frame()
        assert frame.shape == (4, 2)
        assert_allclose(frame.T @ frame, np.eye(2), atol=1e-12)
        residual = E.matrix - frame @ (frame.T @ E.matrix)
        assert np.abs(residual).max() < 1e-12

    def test_rank_deficient_basis(self):
        with pytest.raises(RankDeficiencyError):
            SubspaceBasis.from_rows([[1, 2, 3], [2, 4, 6]])

    def test_too_many_rows(self):
        with pytest.raises(ValidationError):
            SubspaceBasis(basis=[[1, 0], [0, 1], [1, 1]])

    def test_sign_vectors_count(self):
        assert sign_vectors(4).shape == (16, 4)
