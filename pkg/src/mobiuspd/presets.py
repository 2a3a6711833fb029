"""Named distortion presets and probability-gated random parameter sampling.

Orientation semantics (centered plane, y up): the named edge is the one the
content tapers away from.

======== ==================
preset   c
======== ==================
left     (-intensity, 0)
right    (+intensity, 0)
top      (0, -intensity)
bottom   (0, +intensity)
======== ==================

Diagonal views combine the edge intensity with a fixed 0.2 on the orthogonal
component (left-top -> (-intensity, -0.2), and so on).  Only these named
presets are public; raw sign conventions never leak into calling code.
"""

from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass

from .mobius import MobiusParams, MobiusPdError, validate_params
from .warp import Background

__all__ = [
    "Orientation",
    "EDGE_ORIENTATIONS",
    "InvalidIntensityError",
    "preset_params",
    "affine_params",
    "AugmentPolicy",
    "SplitMix64",
    "sample_params",
    "parse_policy",
    "format_policy",
]

DIAGONAL_CROSS_INTENSITY = 0.2


class InvalidIntensityError(MobiusPdError, ValueError):
    pass


class Orientation(enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    TOP = "top"
    BOTTOM = "bottom"
    LEFT_TOP = "left-top"
    LEFT_BOTTOM = "left-bottom"
    RIGHT_TOP = "right-top"
    RIGHT_BOTTOM = "right-bottom"


EDGE_ORIENTATIONS = (Orientation.LEFT, Orientation.RIGHT, Orientation.TOP, Orientation.BOTTOM)

# (real sign, imag sign); diagonal presets carry the fixed cross component.
_C_SIGNS = {
    Orientation.LEFT: (-1.0, 0.0),
    Orientation.RIGHT: (+1.0, 0.0),
    Orientation.TOP: (0.0, -1.0),
    Orientation.BOTTOM: (0.0, +1.0),
    Orientation.LEFT_TOP: (-1.0, -1.0),
    Orientation.LEFT_BOTTOM: (-1.0, +1.0),
    Orientation.RIGHT_TOP: (+1.0, -1.0),
    Orientation.RIGHT_BOTTOM: (+1.0, +1.0),
}


def preset_params(orientation: Orientation, intensity: float) -> MobiusParams:
    """Parameters for a named view at the given intensity (a = d = 1, b = 0)."""
    if not intensity > 0:
        raise InvalidIntensityError(f"intensity must be > 0, got {intensity}")
    sr, si = _C_SIGNS[orientation]
    diagonal = sr != 0.0 and si != 0.0
    cr = sr * intensity if sr else 0.0
    ci = si * (DIAGONAL_CROSS_INTENSITY if diagonal else intensity) if si else 0.0
    return validate_params(1 + 0j, 0j, complex(cr, ci), 1 + 0j)


def affine_params(scale: float, rotation: float = 0.0, translate: complex = 0j) -> MobiusParams:
    """Affine subfamily (c = 0): a = scale * e^(i*rotation), d = 1, b = translate.

    ``rotation`` is in radians, counter-clockwise in the centered plane.
    Translation is in plane units (half the canvas span equals 1.0); the
    content shifts by exactly ``translate`` under the forward map.
    """
    if scale == 0:
        raise MobiusPdError("scale must be nonzero")
    a = scale * cmath.exp(1j * rotation)
    return validate_params(a, complex(translate), 0j, 1 + 0j)


class SplitMix64:
    """The fixed portable generator behind every sampling decision.

    Reference splitmix64 (Vigna): 64-bit state, golden-gamma increment, two
    xor-multiply mixes.  Chosen because identical streams are trivially
    reproducible in any runtime with 64-bit integers, and per-item streams
    split cleanly by seeding from a hash mix.
    """

    _MASK = (1 << 64) - 1
    _GAMMA = 0x9E3779B97F4A7C15

    def __init__(self, seed: int):
        self._state = seed & self._MASK

    @property
    def state(self) -> int:
        return self._state

    def next_uint64(self) -> int:
        self._state = (self._state + self._GAMMA) & self._MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_uint64() >> 11) * 2.0**-53

    def clone(self) -> "SplitMix64":
        return SplitMix64(self._state)


@dataclass(frozen=True)
class AugmentPolicy:
    """Probability-gated sampling policy for augmentation pipelines."""

    probability: float = 0.5
    intensity_lo: float = 0.2
    intensity_hi: float = 0.3
    orientations: tuple[Orientation, ...] = EDGE_ORIENTATIONS
    background: Background = Background.BLACK
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability must be in [0, 1], got {self.probability}")
        if not 0.0 < self.intensity_lo <= self.intensity_hi:
            raise ValueError(
                f"need 0 < intensity_lo <= intensity_hi, got [{self.intensity_lo}, {self.intensity_hi}]"
            )
        if not self.orientations:
            raise ValueError("orientations must be a non-empty subset")
        object.__setattr__(self, "orientations", tuple(self.orientations))

    def rng(self) -> SplitMix64:
        return SplitMix64(self.seed)


def sample_params(policy: AugmentPolicy, rng: SplitMix64) -> tuple[bool, MobiusParams]:
    """Draw (apply?, params) from the policy.

    Exactly three draws are consumed per call regardless of the gate outcome,
    so per-item streams stay aligned: gate, orientation index, intensity.
    """
    apply = rng.next_float() < policy.probability
    idx = int(rng.next_float() * len(policy.orientations))
    if idx == len(policy.orientations):  # guard the half-open interval edge
        idx -= 1
    intensity = policy.intensity_lo + rng.next_float() * (policy.intensity_hi - policy.intensity_lo)
    if intensity <= 0.0:
        intensity = policy.intensity_lo
    return apply, preset_params(policy.orientations[idx], intensity)


_POLICY_KEYS = ("probability", "intensity_lo", "intensity_hi", "orientations", "background", "seed")


def parse_policy(text: str) -> AugmentPolicy:
    """Parse the key/value policy document (one `key = value` pair per line,
    '#' comments allowed).  Keys mirror the CLI flags one-to-one."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"policy line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _POLICY_KEYS:
            raise ValueError(f"policy line {lineno}: unknown key {key!r}")
        raw[key] = value.strip()

    kwargs: dict = {}
    if "probability" in raw:
        kwargs["probability"] = float(raw["probability"])
    if "intensity_lo" in raw:
        kwargs["intensity_lo"] = float(raw["intensity_lo"])
    if "intensity_hi" in raw:
        kwargs["intensity_hi"] = float(raw["intensity_hi"])
    if "orientations" in raw:
        names = [s.strip() for s in raw["orientations"].split(",") if s.strip()]
        kwargs["orientations"] = tuple(Orientation(name) for name in names)
    if "background" in raw:
        kwargs["background"] = Background(raw["background"])
    if "seed" in raw:
        kwargs["seed"] = int(raw["seed"])
    return AugmentPolicy(**kwargs)


def format_policy(policy: AugmentPolicy) -> str:
    lines = [
        f"probability = {policy.probability}",
        f"intensity_lo = {policy.intensity_lo}",
        f"intensity_hi = {policy.intensity_hi}",
        "orientations = " + ",".join(o.value for o in policy.orientations),
        f"background = {policy.background.value}",
        f"seed = {policy.seed}",
    ]
    return "\n".join(lines) + "\n"
