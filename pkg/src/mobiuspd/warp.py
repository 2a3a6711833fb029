"""Raster resampling under the Möbius map.

For each output pixel the source location is found with the closed-form
inverse of the map (inverse mapping leaves no holes; the black region emerges
naturally as the out-of-domain set).  Two background modes:

* ``Background.BLACK`` - pixels whose inverse image leaves the source square
  become zero-valued background; a coverage mask records which pixels carry
  content.
* ``Background.INTEGRATED_PADDING`` - source coordinates are clamped into the
  source square instead (replication padding), so every output pixel carries
  content and the mask is all-true.

The inner loop is written over explicit real-valued arrays with a fixed
operation order (conjugate-multiplication division, floor(v+0.5) rounding,
ceil(v-0.5) nearest with ties toward the lower index).  Keep that order stable:
the foreign-function layer reproduces it op-for-op, and its outputs are
required to match byte-for-byte.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .mobius import (
    POLE_EPS,
    CoordFrame,
    MobiusParams,
    NearPoleError,
    forward_map,
)

__all__ = [
    "Background",
    "Interpolation",
    "Fit",
    "WarpSpec",
    "WarpedImage",
    "BoundingBox",
    "ensure_image",
    "warp_image",
    "content_mask",
    "forward_boundary_probe",
    "sample",
]

# Source coordinates this close to an integer grid point are snapped onto it.
# Far below one intensity level at 8-bit depth, and large enough to absorb the
# ~1 ulp pixel->plane->pixel roundtrip error so identity warps are bit-exact.
SNAP_EPS = 1e-6

_POLE_EPS2 = POLE_EPS * POLE_EPS


class Background(enum.Enum):
    BLACK = "black"
    INTEGRATED_PADDING = "integrated"


class Interpolation(enum.Enum):
    NEAREST = "nearest"
    BILINEAR = "bilinear"


class Fit(enum.Enum):
    NONE = "none"
    BOUNDING_BOX = "bbox"


@dataclass(frozen=True)
class WarpSpec:
    background: Background = Background.BLACK
    interpolation: Interpolation = Interpolation.BILINEAR
    fit: Fit = Fit.NONE


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in [0,1]-normalized pixel coordinates (y down)."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min


@dataclass
class WarpedImage:
    image: np.ndarray
    mask: np.ndarray
    params: MobiusParams
    spec: WarpSpec
    fit_window: BoundingBox | None = field(default=None)

    def __post_init__(self):
        if self.mask.shape != self.image.shape[:2]:
            raise ValueError("mask dimensions must equal image dimensions")


def ensure_image(img: np.ndarray) -> np.ndarray:
    """Validate an 8-bit raster: (H, W) or (H, W, C) with 1-4 channels."""
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8 samples, got {img.dtype}")
    if img.ndim == 2:
        pass
    elif img.ndim == 3:
        if not 1 <= img.shape[2] <= 4:
            raise ValueError(f"expected 1-4 channels, got {img.shape[2]}")
    else:
        raise ValueError(f"expected (H, W) or (H, W, C) image, got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("empty image")
    return np.ascontiguousarray(img)


def _plane_grid(frame: CoordFrame, window: BoundingBox | None):
    """Centered-plane coordinates of every output pixel, optionally remapped
    so the output canvas spans `window` (in [0,1] normalized coords)."""
    w, h = frame.width, frame.height
    tx = np.arange(w, dtype=np.float64) / (w - 1.0) if w > 1 else np.full(1, 0.5)
    ty = np.arange(h, dtype=np.float64) / (h - 1.0) if h > 1 else np.full(1, 0.5)
    if window is not None:
        tx = window.x_min + tx * (window.x_max - window.x_min)
        ty = window.y_min + ty * (window.y_max - window.y_min)
    wre = 2.0 * tx - 1.0
    wim = 1.0 - 2.0 * ty
    return np.broadcast_to(wre[None, :], (h, w)), np.broadcast_to(wim[:, None], (h, w))


def _inverse_plane(p: MobiusParams, wre: np.ndarray, wim: np.ndarray):
    """z = (d*w - b) / (a - c*w) over real pairs; returns (zre, zim, den_mag2)."""
    a, b, c, d = p.a, p.b, p.c, p.d
    num_re = d.real * wre - d.imag * wim - b.real
    num_im = d.real * wim + d.imag * wre - b.imag
    den_re = a.real - (c.real * wre - c.imag * wim)
    den_im = a.imag - (c.real * wim + c.imag * wre)
    mag2 = den_re * den_re + den_im * den_im
    with np.errstate(divide="ignore", invalid="ignore"):
        zre = (num_re * den_re + num_im * den_im) / mag2
        zim = (num_im * den_re - num_re * den_im) / mag2
    return zre, zim, mag2


def _forward_plane(p: MobiusParams, zre: np.ndarray, zim: np.ndarray):
    """w = (a*z + b) / (c*z + d) over real pairs; returns (wre, wim, den_mag2)."""
    a, b, c, d = p.a, p.b, p.c, p.d
    num_re = a.real * zre - a.imag * zim + b.real
    num_im = a.real * zim + a.imag * zre + b.imag
    den_re = c.real * zre - c.imag * zim + d.real
    den_im = c.real * zim + c.imag * zre + d.imag
    mag2 = den_re * den_re + den_im * den_im
    with np.errstate(divide="ignore", invalid="ignore"):
        wre = (num_re * den_re + num_im * den_im) / mag2
        wim = (num_im * den_re - num_re * den_im) / mag2
    return wre, wim, mag2


def _snap(v: np.ndarray) -> np.ndarray:
    r = np.floor(v + 0.5)
    return np.where(np.abs(v - r) < SNAP_EPS, r, v)


def _gather(img: np.ndarray, yi: np.ndarray, xi: np.ndarray) -> np.ndarray:
    return img[yi, xi].astype(np.float64)


def _sample_grid(img: np.ndarray, sx: np.ndarray, sy: np.ndarray, interpolation: Interpolation) -> np.ndarray:
    """Sample at float pixel coordinates already inside [0, W-1] x [0, H-1]."""
    h, w = img.shape[:2]
    sx = _snap(sx)
    sy = _snap(sy)
    if interpolation is Interpolation.NEAREST:
        xi = np.clip(np.ceil(sx - 0.5), 0, w - 1).astype(np.int64)
        yi = np.clip(np.ceil(sy - 0.5), 0, h - 1).astype(np.int64)
        return img[yi, xi].astype(np.float64)
    x0 = np.clip(np.floor(sx), 0, w - 1).astype(np.int64)
    y0 = np.clip(np.floor(sy), 0, h - 1).astype(np.int64)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = sx - x0
    fy = sy - y0
    if img.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    p00 = _gather(img, y0, x0)
    p10 = _gather(img, y0, x1)
    p01 = _gather(img, y1, x0)
    p11 = _gather(img, y1, x1)
    top = p00 * (1.0 - fx) + p10 * fx
    bot = p01 * (1.0 - fx) + p11 * fx
    return top * (1.0 - fy) + bot * fy


def sample(src: np.ndarray, zx: float, zy: float, interpolation: Interpolation = Interpolation.BILINEAR):
    """Sample one value at [0,1]-normalized coordinates (clamped by the caller
    otherwise).  Nearest ties (coordinate exactly at .5) round toward the
    lower index."""
    src = ensure_image(src)
    h, w = src.shape[:2]
    sx = np.asarray([zx * (w - 1.0)])
    sy = np.asarray([zy * (h - 1.0)])
    out = _sample_grid(src, sx, sy, interpolation)
    val = np.floor(out + 0.5)
    val = np.clip(val, 0, 255).astype(np.uint8)
    return val[0]


def warp_image(src: np.ndarray, p: MobiusParams, spec: WarpSpec = WarpSpec(),
               fit_window: BoundingBox | None = None) -> WarpedImage:
    """Resample `src` under the map given by `p`.

    Output canvas size equals the input size.  With ``Fit.BOUNDING_BOX`` the
    output coordinates are first affinely mapped onto the bounding box of the
    forward image of the source square (probed via boundary samples, or the
    caller-provided window so annotations can share it) before inversion.
    Near-pole pixels resolve to background (BLACK) or a clamped boundary
    sample (INTEGRATED_PADDING); they never abort the warp.
    """
    src = ensure_image(src)
    h, w = src.shape[:2]
    frame = CoordFrame(w, h)

    window = None
    if spec.fit is Fit.BOUNDING_BOX:
        window = fit_window if fit_window is not None else forward_boundary_probe(p, frame)
    elif fit_window is not None:
        raise ValueError("fit_window given but spec.fit is not BOUNDING_BOX")

    wre, wim = _plane_grid(frame, window)
    zre, zim, mag2 = _inverse_plane(p, wre, wim)

    with np.errstate(invalid="ignore"):
        in_domain = (
            (mag2 > _POLE_EPS2)
            & (zre >= -1.0) & (zre <= 1.0)
            & (zim >= -1.0) & (zim <= 1.0)
        )

    sx = (zre + 1.0) * 0.5 * (w - 1.0)
    sy = (1.0 - zim) * 0.5 * (h - 1.0)

    if spec.background is Background.INTEGRATED_PADDING:
        sx = np.where(np.isnan(sx), 0.0, sx)
        sy = np.where(np.isnan(sy), 0.0, sy)
        sx = np.clip(sx, 0.0, w - 1.0)
        sy = np.clip(sy, 0.0, h - 1.0)
        mask = np.ones((h, w), dtype=bool)
    else:
        sx = np.where(in_domain, sx, 0.0)
        sy = np.where(in_domain, sy, 0.0)
        mask = in_domain

    values = _sample_grid(src, sx, sy, spec.interpolation)
    values = np.clip(np.floor(values + 0.5), 0, 255)

    if spec.background is Background.BLACK:
        sel = mask if src.ndim == 2 else mask[..., None]
        values = np.where(sel, values, 0.0)

    out = values.astype(np.uint8)
    return WarpedImage(image=out, mask=mask, params=p, spec=spec, fit_window=window)


def content_mask(warped: WarpedImage) -> np.ndarray:
    """Per-pixel content indicator (True = sourced from input content)."""
    return warped.mask


def forward_boundary_probe(p: MobiusParams, frame: CoordFrame, samples_per_edge: int = 64) -> BoundingBox:
    """Bounding box of the forward image of the source square.

    The square boundary is sampled uniformly (corners included) in the
    centered plane; the box is reported in [0,1]-normalized pixel coordinates
    (y down).  Raises NearPoleError if any boundary sample hits the pole.
    """
    if samples_per_edge < 2:
        raise ValueError("samples_per_edge must be >= 2")
    n = samples_per_edge
    ts = [(-1.0 + 2.0 * i / (n - 1)) for i in range(n)]
    pts = [complex(t, 1.0) for t in ts]
    pts += [complex(t, -1.0) for t in ts]
    pts += [complex(1.0, t) for t in ts]
    pts += [complex(-1.0, t) for t in ts]
    xs: list[float] = []
    ys: list[float] = []
    for z in pts:
        try:
            im = forward_map(p, z)
        except NearPoleError:
            raise NearPoleError(f"boundary sample {z} maps through the pole")
        xs.append((im.real + 1.0) * 0.5)
        ys.append((1.0 - im.imag) * 0.5)
    return BoundingBox(x_min=min(xs), y_min=min(ys), x_max=max(xs), y_max=max(ys))
