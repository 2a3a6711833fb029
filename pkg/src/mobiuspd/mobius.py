"""Complex arithmetic for the Möbius map and the pixel/complex coordinate frames.

The map is w = (a*z + b) / (c*z + d) with complex parameters a, b, c, d and
validity condition ad - bc != 0.  Everything here is pure double-precision
scalar math on Python ``complex``; the raster code in :mod:`mobiuspd.warp`
re-expresses the same formulas over real-valued arrays.

Coordinate frames
-----------------
Two normalizations are provided:

* ``px_to_complex`` / ``complex_to_px``: the plain unit square, z = x/(W-1) +
  i*y/(H-1), origin at the top-left, y downward.
* ``px_to_plane`` / ``plane_to_px``: the centered square [-1, 1]^2, x to the
  right, y *upward* (z = (2x/(W-1) - 1) + i*(1 - 2y/(H-1))).  This is the frame
  the warp and annotation transforms operate in: it is symmetric under sign
  flips of the parameters, so the left/right and top/bottom distortion
  families are mirror images of each other.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

__all__ = [
    "DET_EPS",
    "POLE_EPS",
    "MobiusPdError",
    "DegenerateParamsError",
    "NearPoleError",
    "MobiusParams",
    "CoordFrame",
    "validate_params",
    "identity_params",
    "forward_map",
    "inverse_map",
    "derivative",
    "px_to_complex",
    "complex_to_px",
    "px_to_plane",
    "plane_to_px",
]

# Determinant / pole thresholds in the normalized plane.  Far below any
# parameter magnitude of practical distortions; catches exact degeneracy
# without rejecting valid maps.
DET_EPS = 1e-8
POLE_EPS = 1e-8


class MobiusPdError(Exception):
    """Base class for library errors."""


class DegenerateParamsError(MobiusPdError, ValueError):
    """|ad - bc| below DET_EPS: the map collapses to a constant."""


class NearPoleError(MobiusPdError, ArithmeticError):
    """Evaluation requested too close to the pole of the map."""


def _require_finite(name: str, value: complex) -> complex:
    value = complex(value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ValueError(f"parameter {name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class MobiusParams:
    """Validated parameters (a, b, c, d) with |ad - bc| >= DET_EPS."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))
        if abs(self.det) < DET_EPS:
            raise DegenerateParamsError(
                f"degenerate parameters: |ad - bc| = {abs(self.det):.3e} < {DET_EPS:g}"
            )

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def is_identity(self) -> bool:
        return self.a == 1 and self.b == 0 and self.c == 0 and self.d == 1


def validate_params(a: complex, b: complex, c: complex, d: complex) -> MobiusParams:
    """Build MobiusParams, raising DegenerateParamsError when ad - bc vanishes."""
    return MobiusParams(a, b, c, d)


def identity_params() -> MobiusParams:
    return MobiusParams(1 + 0j, 0j, 0j, 1 + 0j)


def forward_map(p: MobiusParams, z: complex) -> complex:
    """w = (a*z + b) / (c*z + d); raises NearPoleError when |c*z + d| <= POLE_EPS."""
    den = p.c * z + p.d
    if abs(den) <= POLE_EPS:
        raise NearPoleError(f"forward map evaluated at pole neighborhood, |cz+d| = {abs(den):.3e}")
    return (p.a * z + p.b) / den


def inverse_map(p: MobiusParams, w: complex) -> complex:
    """z = (d*w - b) / (a - c*w), the closed-form inverse of the map."""
    den = p.a - p.c * w
    if abs(den) <= POLE_EPS:
        raise NearPoleError(f"inverse map evaluated at pole neighborhood, |a-cw| = {abs(den):.3e}")
    return (p.d * w - p.b) / den


def derivative(p: MobiusParams, z: complex) -> complex:
    """Complex derivative (ad - bc) / (c*z + d)^2."""
    den = p.c * z + p.d
    if abs(den) <= POLE_EPS:
        raise NearPoleError(f"derivative evaluated at pole neighborhood, |cz+d| = {abs(den):.3e}")
    return p.det / (den * den)


@dataclass(frozen=True)
class CoordFrame:
    """Pixel canvas dimensions plus the fixed normalization conventions."""

    width: int
    height: int

    CONVENTION = "unit-square x/(W-1), y/(H-1), y down; plane frame centered [-1,1]^2, y up"

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"frame must be at least 1x1, got {self.width}x{self.height}")

    @property
    def _wspan(self) -> float:
        return float(self.width - 1) if self.width > 1 else 1.0

    @property
    def _hspan(self) -> float:
        return float(self.height - 1) if self.height > 1 else 1.0


def px_to_complex(frame: CoordFrame, x: float, y: float) -> complex:
    """Unit-square normalization: z = x/(W-1) + i*y/(H-1).

    Out-of-canvas coordinates are permitted (used for boundary probing).
    """
    return complex(x / frame._wspan, y / frame._hspan)


def complex_to_px(frame: CoordFrame, z: complex) -> tuple[float, float]:
    """Exact inverse of px_to_complex."""
    return (z.real * frame._wspan, z.imag * frame._hspan)


def px_to_plane(frame: CoordFrame, x: float, y: float) -> complex:
    """Centered frame: z = (2x/(W-1) - 1) + i*(1 - 2y/(H-1)), y up.

    Degenerate 1-pixel axes map to the frame center.
    """
    re = 2.0 * (x / (frame.width - 1.0)) - 1.0 if frame.width > 1 else 0.0
    im = 1.0 - 2.0 * (y / (frame.height - 1.0)) if frame.height > 1 else 0.0
    return complex(re, im)


def plane_to_px(frame: CoordFrame, z: complex) -> tuple[float, float]:
    """Inverse of px_to_plane."""
    x = (z.real + 1.0) * 0.5 * (frame.width - 1.0)
    y = (1.0 - z.imag) * 0.5 * (frame.height - 1.0)
    return (x, y)


def _conformality_residuals(p: MobiusParams, z: complex, h: float = 1e-5) -> tuple[float, float]:
    """Cauchy-Riemann residuals of the finite-difference Jacobian at z.

    Returns (|J11 - J22|, |J12 + J21|); both vanish for a holomorphic map.
    """
    fe = forward_map(p, z + h) - forward_map(p, z - h)
    fn = forward_map(p, z + 1j * h) - forward_map(p, z - 1j * h)
    j11 = fe.real / (2 * h)
    j21 = fe.imag / (2 * h)
    j12 = fn.real / (2 * h)
    j22 = fn.imag / (2 * h)
    return (abs(j11 - j22), abs(j12 + j21))


def angle_distortion(p: MobiusParams, z: complex, u: complex, v: complex, h: float = 1e-5) -> float:
    """Change of the angle between directions u, v under the map's local Jacobian.

    Conformal maps preserve angles, so this is ~0 away from the pole.
    """
    du = (forward_map(p, z + h * u) - forward_map(p, z - h * u)) / (2 * h)
    dv = (forward_map(p, z + h * v) - forward_map(p, z - h * v)) / (2 * h)
    before = cmath.phase(v / u)
    after = cmath.phase(dv / du)
    diff = (after - before + math.pi) % (2 * math.pi) - math.pi
    return abs(diff)
