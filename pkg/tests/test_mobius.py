"""Core map arithmetic: validation, forward/inverse/derivative, frames."""

import cmath

import numpy as np
import pytest

from mobiuspd import (
    CoordFrame,
    DegenerateParamsError,
    NearPoleError,
    complex_to_px,
    derivative,
    forward_map,
    identity_params,
    inverse_map,
    plane_to_px,
    px_to_complex,
    px_to_plane,
    validate_params,
)
from mobiuspd.mobius import _conformality_residuals, angle_distortion


def rand_params(rng, det_floor=0.1):
    """Well-conditioned random parameters near the practical distortion range."""
    while True:
        a = 1 + complex(*rng.normal(0, 0.1, 2))
        b = complex(*rng.normal(0, 0.1, 2))
        c = complex(*rng.uniform(-0.5, 0.5, 2))
        d = 1 + complex(*rng.normal(0, 0.1, 2))
        if abs(a * d - b * c) > det_floor:
            return validate_params(a, b, c, d)


class TestValidate:
    def test_identity_valid(self):
        p = validate_params(1, 0, 0, 1)
        assert p.det == 1

    def test_vanishing_determinant_rejected(self):
        # 1*1 - 2*0.5 = 0
        with pytest.raises(DegenerateParamsError):
            validate_params(1, 2, 0.5, 1)

    def test_paper_range_c_valid(self):
        p = validate_params(1, 0, 0.2 + 0.3j, 1)
        assert p.det == 1

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            validate_params(float("nan"), 0, 0, 1)
        with pytest.raises(ValueError):
            validate_params(1, complex(0, float("inf")), 0, 1)


class TestForward:
    def test_identity(self):
        assert forward_map(identity_params(), 0.3 + 0.7j) == 0.3 + 0.7j

    def test_real_c(self):
        # oracle: 1 / 1.2 by conjugate multiplication
        p = validate_params(1, 0, 0.2, 1)
        assert forward_map(p, 1 + 0j) == pytest.approx(0.8333333333333334 + 0j, abs=1e-15)

    def test_complex_point(self):
        # oracle: (0.5+0.5i)/(1.1+0.1i)
        p = validate_params(1, 0, 0.2, 1)
        w = forward_map(p, 0.5 + 0.5j)
        assert w.real == pytest.approx(0.4918032786885246, abs=1e-15)
        assert w.imag == pytest.approx(0.40983606557377045, abs=1e-15)

    def test_near_pole_raises(self):
        p = validate_params(1, 0, 1, 1)
        with pytest.raises(NearPoleError):
            forward_map(p, -1 + 0j)


class TestInverse:
    def test_identity(self):
        assert inverse_map(identity_params(), 0.2 + 0.9j) == 0.2 + 0.9j

    def test_real_c(self):
        # oracle: 0.8333.../(1 - 0.2*0.8333...)
        p = validate_params(1, 0, 0.2, 1)
        z = inverse_map(p, 0.8333333333333334 + 0j)
        assert z == pytest.approx(1.0 + 0j, abs=1e-12)

    def test_algebraic_inverse(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            p = rand_params(rng)
            z = complex(*rng.uniform(-1, 1, 2))
            if abs(p.c * z + p.d) < 0.1:
                continue
            w = forward_map(p, z)
            assert abs(inverse_map(p, w) - z) < 1e-12


class TestDerivative:
    def test_identity(self):
        assert derivative(identity_params(), 0.4 - 0.2j) == 1

    def test_at_origin(self):
        p = validate_params(1, 0, 0.2, 1)
        assert derivative(p, 0j) == pytest.approx(1 + 0j, abs=1e-15)

    def test_at_one(self):
        # oracle: 1 / 1.2^2
        p = validate_params(1, 0, 0.2, 1)
        assert derivative(p, 1 + 0j) == pytest.approx(0.6944444444444444 + 0j, abs=1e-15)

    def test_against_finite_differences(self):
        rng = np.random.default_rng(11)
        h = 1e-6
        for _ in range(200):
            p = rand_params(rng)
            z = complex(*rng.uniform(-1, 1, 2))
            if abs(p.c * z + p.d) < 0.2:
                continue
            fd = (forward_map(p, z + h) - forward_map(p, z - h)) / (2 * h)
            assert abs(derivative(p, z) - fd) < 1e-6


class TestRoundTrip:
    def test_bulk_roundtrip(self):
        rng = np.random.default_rng(3)
        n = 0
        while n < 10_000:
            p = rand_params(rng)
            z = complex(*rng.uniform(-1, 1, 2))
            if abs(p.c * z + p.d) <= 0.1:
                continue
            assert abs(inverse_map(p, forward_map(p, z)) - z) < 1e-9
            n += 1


class TestNonLinearity:
    def test_superposition_fails(self):
        # randomized search must find a witness |phi(z1+z2) - (phi(z1)+phi(z2))| > 1e-3
        rng = np.random.default_rng(5)
        p = validate_params(1, 0, 0.25 + 0.1j, 1)
        found = False
        for _ in range(1000):
            z1 = complex(*rng.uniform(-1, 1, 2))
            z2 = complex(*rng.uniform(-1, 1, 2))
            try:
                lhs = forward_map(p, z1 + z2)
                rhs = forward_map(p, z1) + forward_map(p, z2)
            except NearPoleError:
                continue
            if abs(lhs - rhs) > 1e-3:
                found = True
                break
        assert found


class TestAffineReduction:
    def test_c_zero_is_affine(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            a = complex(*rng.normal(0, 1, 2))
            b = complex(*rng.normal(0, 1, 2))
            d = complex(*rng.normal(0, 1, 2))
            if abs(a * d) < 0.1:
                continue
            p = validate_params(a, b, 0, d)
            z = complex(*rng.uniform(-1, 1, 2))
            assert abs(forward_map(p, z) - (a * z + b) / d) < 1e-12


class TestConformality:
    def test_cauchy_riemann_residuals(self):
        rng = np.random.default_rng(17)
        n = 0
        while n < 1000:
            p = rand_params(rng)
            z = complex(*rng.uniform(-1, 1, 2))
            if abs(p.c * z + p.d) < 0.3:
                continue
            r1, r2 = _conformality_residuals(p, z, h=1e-5)
            assert r1 < 1e-4 and r2 < 1e-4
            n += 1

    def test_angle_preservation(self):
        rng = np.random.default_rng(19)
        n = 0
        while n < 300:
            p = rand_params(rng)
            z = complex(*rng.uniform(-1, 1, 2))
            if abs(p.c * z + p.d) < 0.3:
                continue
            u = cmath.exp(1j * rng.uniform(0, 2 * np.pi))
            v = cmath.exp(1j * rng.uniform(0, 2 * np.pi))
            if abs(cmath.phase(v / u)) < 0.1:  # nearly parallel pairs are noisy
                continue
            assert angle_distortion(p, z, u, v, h=1e-5) < 1e-3
            n += 1


class TestFrames:
    def test_unit_square_corners(self):
        f = CoordFrame(224, 224)
        assert px_to_complex(f, 0, 0) == 0
        assert px_to_complex(f, 223, 223) == 1 + 1j

    def test_unit_square_division(self):
        f = CoordFrame(224, 224)
        assert px_to_complex(f, 111.5, 55.75) == 0.5 + 0.25j

    def test_unit_square_roundtrip_exact(self):
        f = CoordFrame(640, 480)
        for x, y in [(0, 0), (639, 479), (17, 201), (320.5, 100.25)]:
            z = px_to_complex(f, x, y)
            assert complex_to_px(f, z) == (x, y)

    def test_out_of_canvas_permitted(self):
        f = CoordFrame(100, 100)
        z = px_to_complex(f, -99, 198)
        assert z == -1 + 2j

    def test_plane_frame_corners(self):
        f = CoordFrame(224, 224)
        assert px_to_plane(f, 0, 0) == -1 + 1j
        assert px_to_plane(f, 223, 223) == 1 - 1j
        assert px_to_plane(f, 111.5, 111.5) == 0

    def test_plane_roundtrip(self):
        f = CoordFrame(640, 480)
        rng = np.random.default_rng(23)
        for _ in range(100):
            x, y = rng.uniform(0, 639), rng.uniform(0, 479)
            z = px_to_plane(f, x, y)
            rx, ry = plane_to_px(f, z)
            assert abs(rx - x) < 1e-9 and abs(ry - y) < 1e-9

    def test_degenerate_frame_rejected(self):
        with pytest.raises(ValueError):
            CoordFrame(0, 10)

    def test_single_pixel_axis_maps_to_center(self):
        f = CoordFrame(1, 5)
        assert px_to_plane(f, 0, 2).real == 0.0
