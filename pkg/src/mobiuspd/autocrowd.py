"""Composite synthetic crowd patches into the vacated background of a warped
scene and emit the added point labels.

Patches are self-sourced from the scene's own annotated heads (no external
asset bank), sized from local annotation density, and pasted at full opacity
onto background-only positions.  Pasted patches may overlap each other - real
crowds do - but never the content region, and every added label is the center
of a pasted patch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .annotations import PointSet
from .mobius import CoordFrame, MobiusPdError
from .presets import SplitMix64
from .warp import Background, WarpedImage, ensure_image

__all__ = [
    "EmptyAnnotationsError",
    "HeadPatch",
    "extract_head_patches",
    "compose_autocrowd",
    "content_density_per_kpx",
]

FALLBACK_RADIUS = 16
RADIUS_MIN = 2
RADIUS_MAX = 64


class EmptyAnnotationsError(MobiusPdError, ValueError):
    pass


@dataclass
class HeadPatch:
    pixels: np.ndarray  # square crop, side 2*radius + 1
    center: tuple[float, float]  # original annotation position
    radius: int

    def __post_init__(self):
        if self.radius < RADIUS_MIN:
            raise ValueError(f"radius must be >= {RADIUS_MIN}, got {self.radius}")
        side = 2 * self.radius + 1
        if self.pixels.shape[:2] != (side, side):
            raise ValueError(f"patch pixels must be {side}x{side}, got {self.pixels.shape[:2]}")


def extract_head_patches(src: np.ndarray, pts: PointSet, k_neighbors: int = 3) -> list[HeadPatch]:
    """Square crops around each annotated point.

    Radius = half the mean distance to the k nearest annotated neighbors,
    clamped to [2, 64] px; an isolated point falls back to radius 16.  Crops
    that would be clipped by the image border are discarded.
    """
    src = ensure_image(src)
    if len(pts) == 0:
        raise EmptyAnnotationsError("no annotated points to extract patches from")
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be >= 1")

    coords = pts.points
    n = len(pts)
    h, w = src.shape[:2]
    patches: list[HeadPatch] = []
    for i in range(n):
        if n == 1:
            radius = float(FALLBACK_RADIUS)
        else:
            d = np.hypot(coords[:, 0] - coords[i, 0], coords[:, 1] - coords[i, 1])
            d = np.delete(d, i)
            k = min(k_neighbors, d.size)
            nearest = np.sort(d)[:k]
            radius = float(nearest.mean()) / 2.0
        radius = min(max(radius, float(RADIUS_MIN)), float(RADIUS_MAX))
        r = int(np.floor(radius + 0.5))
        r = min(max(r, RADIUS_MIN), RADIUS_MAX)
        xc = int(np.floor(coords[i, 0] + 0.5))
        yc = int(np.floor(coords[i, 1] + 0.5))
        if xc - r < 0 or yc - r < 0 or xc + r > w - 1 or yc + r > h - 1:
            continue  # clipped crop, discard
        crop = src[yc - r: yc + r + 1, xc - r: xc + r + 1].copy()
        patches.append(HeadPatch(pixels=crop, center=(float(coords[i, 0]), float(coords[i, 1])), radius=r))
    return patches


def content_density_per_kpx(pts: PointSet, content_px: int) -> float:
    """Annotated head density of the source scene: points per kilo-pixel of content."""
    if content_px <= 0:
        return 0.0
    return len(pts) / (content_px / 1000.0)


def _valid_centers(background: np.ndarray, radius: int) -> tuple[np.ndarray, np.ndarray]:
    """Centers where a (2r+1)-square fits entirely inside the background mask."""
    h, w = background.shape
    side = 2 * radius + 1
    if side > h or side > w:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    # summed-area table of the content (non-background) indicator
    content = (~background).astype(np.int64)
    sat = np.zeros((h + 1, w + 1), dtype=np.int64)
    sat[1:, 1:] = content.cumsum(0).cumsum(1)
    win = (
        sat[side:, side:] - sat[:-side, side:] - sat[side:, :-side] + sat[:-side, :-side]
    )
    ys, xs = np.nonzero(win == 0)
    return ys + radius, xs + radius


def compose_autocrowd(warped: WarpedImage, patches: list[HeadPatch],
                      density_per_kpx: float, rng: SplitMix64) -> tuple[np.ndarray, PointSet]:
    """Paste ~density_per_kpx * background_kpx patches into the background.

    Placement centers are drawn uniformly over background positions where the
    patch rectangle avoids the content mask entirely; the patch for each
    placement is drawn uniformly from `patches`.  Content pixels are
    bit-identical before and after.  Deterministic in the generator state.
    """
    if warped.spec.background is not Background.BLACK:
        raise ValueError("autocrowd requires a BLACK-background warp (a vacated background)")
    if not patches:
        raise EmptyAnnotationsError("no patches to composite")
    if density_per_kpx < 0:
        raise ValueError("density must be >= 0")

    h, w = warped.image.shape[:2]
    frame = CoordFrame(w, h)
    background = ~warped.mask
    background_px = int(background.sum())
    if background_px == 0:
        return warped.image.copy(), PointSet(np.empty((0, 2)), frame)

    n = int(round(density_per_kpx * background_px / 1000.0))
    out = warped.image.copy()
    added: list[tuple[float, float]] = []
    centers_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    for _ in range(n):
        pick = int(rng.next_float() * len(patches))
        if pick == len(patches):
            pick -= 1
        patch = patches[pick]
        if patch.radius not in centers_cache:
            centers_cache[patch.radius] = _valid_centers(background, patch.radius)
        ys, xs = centers_cache[patch.radius]
        if ys.size == 0:
            continue  # nowhere this patch fits; skip the placement
        j = int(rng.next_float() * ys.size)
        if j == ys.size:
            j -= 1
        yc, xc = int(ys[j]), int(xs[j])
        r = patch.radius
        out[yc - r: yc + r + 1, xc - r: xc + r + 1] = patch.pixels
        added.append((float(xc), float(yc)))

    return out, PointSet(np.asarray(added, dtype=np.float64).reshape(len(added), 2), frame)
