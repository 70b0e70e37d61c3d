"""Tests for central hyperplane sections."""

import math

import numpy as np
import pytest

from lozvol.errors import DegenerateBodyError
from lozvol.norms import LpNorm
from lozvol.volume.bodies import NormBall
from lozvol.volume.polytopes import PolytopeV, cross_polytope, cube
from lozvol.volume.sections import (
    central_section_volume, max_central_section, parallel_section_volume, polytope_section_volume,
)


class TestCentralSection:
    """Single sections of known bodies."""

    def test_cube_coordinate_section(self):
        assert central_section_volume(cube(3), [1, 0, 0]).value == pytest.approx(4.0)

    def test_cube_diagonal_section(self):
        assert central_section_volume(cube(3), [1, 1, 0]).value == pytest.approx(4.0 * math.sqrt(2.0))

    def test_direction_is_normalised(self):
        a = central_section_volume(cube(3), [0, 0, 5]).value
        assert a == pytest.approx(central_section_volume(cube(3), [0, 0, 1]).value)

    def test_square_sections(self):
        diamond = PolytopeV.symmetric(np.eye(2)).hrep
        assert central_section_volume(cube(2), [0, 1]).value == pytest.approx(2.0)
        assert central_section_volume(cube(2), [1, 1]).value == pytest.approx(2.0 * math.sqrt(2.0))
        # cross polytope: the diagonal section is the shortest
        assert central_section_volume(diamond, [1, 1]).value == pytest.approx(math.sqrt(2.0))

    def test_euclidean_ball_section_is_exact_segment(self):
        ball = NormBall.of_subspace(LpNorm.standard(2, 2))
        assert central_section_volume(ball, [1.0, 2.0]).value == pytest.approx(2.0, rel=1e-12)

    def test_zero_direction(self):
        with pytest.raises(DegenerateBodyError):
            central_section_volume(cube(2), [0, 0])

    def test_wrong_dimension(self):
        with pytest.raises(DegenerateBodyError):
            central_section_volume(cube(3), [1, 0])

    def test_one_dimensional_body(self):
        assert central_section_volume(cube(1), [1.0]).value == 0.0


class TestMaxSection:
    """Budgeted search for the largest section."""

    def test_cube_maximum_is_diagonal(self):
        search = max_central_section(cube(3), seed=0)
        assert search.exact_sections
        assert search.value == pytest.approx(4.0 * math.sqrt(2.0), rel=2e-2)
        assert search.value <= 4.0 * math.sqrt(2.0) + 1e-9

    def test_one_dimensional_is_degenerate(self):
        search = max_central_section(cube(1))
        assert search.degenerate
        assert search.value == 0.0

    def test_euclidean_ball_is_searched_from_inside(self):
        search = max_central_section(NormBall.of_subspace(LpNorm.standard(2, 3)), seed=0)
        assert not search.exact_sections
        assert 0.97 * math.pi <= search.value <= math.pi

    def test_reproducible(self):
        a = max_central_section(cube(3), seed=4)
        b = max_central_section(cube(3), seed=4)
        assert a == b


class TestParallelSections:
    """Sections by hyperplanes {<u, x> = t} away from the origin."""

    def test_cube_slices_are_constant(self):
        H = cube(3).hrep
        for t in (-0.9, -0.3, 0.0, 0.5, 0.9):
            assert parallel_section_volume(H, [1, 0, 0], t) == pytest.approx(4.0)
        assert parallel_section_volume(H, [1, 0, 0], 1.5) == 0.0

    def test_cross_polytope_slices_shrink_quadratically(self):
        H = cross_polytope(3).hrep
        for t in (0.0, 0.25, -0.5, 0.8):
            assert parallel_section_volume(H, [0, 0, 2], t) == pytest.approx(2.0 * (1 - abs(t)) ** 2)

    def test_offset_zero_is_the_central_section(self):
        H = cube(3).hrep
        assert parallel_section_volume(H, [1, 1, 0], 0.0) == pytest.approx(polytope_section_volume(H, [1, 1, 0]))

    @pytest.mark.parametrize("seed", range(5))
    def test_central_section_is_largest_and_slices_shrink(self, seed):
        rng = np.random.default_rng(seed)
        body = PolytopeV.symmetric(rng.standard_normal((6, 3)))
        H = body.hrep
        for u in rng.standard_normal((4, 3)):
            u = u / np.linalg.norm(u)
            reach = float(body.support(u[None, :])[0])
            slices = [parallel_section_volume(H, u, s * reach) for s in np.linspace(0.0, 0.95, 8)]
            central = polytope_section_volume(H, u)
            assert slices[0] == pytest.approx(central, rel=1e-9)
            assert all(v <= central + 1e-9 for v in slices)
            assert all(b <= a + 1e-9 for a, b in zip(slices, slices[1:]))
            mirrored = parallel_section_volume(H, u, -0.5 * reach)
            assert mirrored == pytest.approx(parallel_section_volume(H, u, 0.5 * reach), rel=1e-9)
