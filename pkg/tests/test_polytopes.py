"""Tests for exact polytope geometry."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lozvol.errors import DegenerateBodyError, VolumeEstimateError, VolumeMethod
from lozvol.volume.polytopes import (
    PolytopeH, PolytopeV, VolumeEstimate, cross_polytope, cross_polytope_image_volume, cube,
    cube_image_volume, polar_hrep, polar_polytope, triangulate, volume_hrep, volume_vrep,
)


class TestVolumes:
    """Exact volumes by triangulation."""

    @pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
    def test_cube_and_cross_polytope(self, k):
        assert volume_vrep(cube(k)).value == pytest.approx(2.0 ** k, rel=1e-12)
        assert volume_vrep(cross_polytope(k)).value == pytest.approx(2.0 ** k / math.factorial(k), rel=1e-12)

    def test_exact_method(self):
        est = volume_vrep(cube(2))
        assert est.method == VolumeMethod.EXACT_TRIANGULATION
        assert est.std_error == 0.0

    def test_h_representation(self):
        square = PolytopeH(np.vstack([np.eye(2), -np.eye(2)]))
        assert volume_hrep(square).value == pytest.approx(4.0)

    def test_redundant_points_do_not_count(self):
        points = np.vstack([cube(3).vertices, 0.3 * np.random.default_rng(0).uniform(-1, 1, (20, 3))])
        assert volume_vrep(PolytopeV(points)).value == pytest.approx(8.0)

    def test_off_center_segment(self):
        assert volume_vrep(PolytopeV(np.array([[-2.0], [3.0]]))).value == pytest.approx(5.0)

    def test_triangulation_from_interior_point(self):
        shifted = PolytopeV(cube(2).vertices + 5.0)
        simplices, volumes = triangulate(shifted)
        assert simplices.shape[1:] == (3, 2)
        assert volumes.sum() == pytest.approx(4.0)

    def test_flat_point_set(self):
        with pytest.raises(DegenerateBodyError):
            volume_vrep(PolytopeV(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])))

    def test_dimension_cap(self):
        with pytest.raises(VolumeEstimateError):
            volume_vrep(cube(3), max_dim=2)


class TestPolarity:
    """Polars and linear images."""

    def test_polar_of_cross_polytope_is_cube(self):
        polar = polar_polytope(cross_polytope(3))
        assert volume_hrep(polar).value == pytest.approx(8.0)

    def test_polar_of_h_polytope(self):
        square = PolytopeH(np.vstack([np.eye(2), -np.eye(2)]))
        assert volume_vrep(polar_hrep(square)).value == pytest.approx(2.0)

    def test_hrep_round_trip_volume(self):
        rng = np.random.default_rng(1)
        poly = PolytopeV.symmetric(rng.standard_normal((6, 3)))
        assert volume_hrep(poly.hrep).value == pytest.approx(volume_vrep(poly).value, rel=1e-10)

    def test_gauge_on_boundary(self):
        poly = cross_polytope(3)
        assert_allclose(poly.gauge(np.eye(3)), 1.0)
        assert poly.gauge(np.zeros(3))[0] == 0.0

    def test_polar_needs_interior_origin(self):
        with pytest.raises(DegenerateBodyError):
            polar_polytope(PolytopeV(cube(2).vertices + 3.0))

    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
    def test_santalo_product_is_affine_invariant(self, k):
        rng = np.random.default_rng(k)
        for _ in range(5):
            A = rng.standard_normal((k, k))
            image = cross_polytope(k).linear_image(A)
            polar_volume = volume_hrep(polar_polytope(image)).value
            product = cross_polytope_image_volume(A) * polar_volume
            assert product == pytest.approx(2.0 ** k / math.factorial(k) * 2.0 ** k, rel=1e-9)

    def test_h_polytope_image(self):
        square = PolytopeH(np.vstack([np.eye(2), -np.eye(2)]))
        image = square.linear_image(np.diag([2.0, 1.0]))
        assert volume_hrep(image).value == pytest.approx(8.0)
        assert cube_image_volume(np.diag([2.0, 1.0])) == pytest.approx(8.0)

    def test_singular_map(self):
        with pytest.raises(DegenerateBodyError):
            cross_polytope_image_volume(np.array([[1.0, 2.0], [2.0, 4.0]]))


class TestVolumeEstimate:
    """Folding an estimate towards the unfavourable side."""

    def test_monte_carlo_sides(self):
        est = VolumeEstimate(value=10.0, method=VolumeMethod.MONTE_CARLO, std_error=0.5)
        assert est.lower() == pytest.approx(8.5)
        assert est.upper() == pytest.approx(11.5)
        assert est.relative_error == pytest.approx(0.05)

    def test_sandwich_sides(self):
        est = VolumeEstimate(value=3.0, method=VolumeMethod.POLYTOPE_SANDWICH, inner=2.9, outer=3.2)
        assert est.lower() == 2.9
        assert est.upper() == 3.2

    def test_lower_is_non_negative(self):
        est = VolumeEstimate(value=1.0, method=VolumeMethod.MONTE_CARLO, std_error=1.0)
        assert est.lower() == 0.0
