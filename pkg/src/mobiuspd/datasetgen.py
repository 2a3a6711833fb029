"""Deterministic generation of the eight distorted benchmark subsets.

From any directory of images this produces PD-L, PD-R, PD-T, PD-B (black
background) and PD-LI, PD-RI, PD-TI, PD-BI (integrated padding), each tree
mirroring the input layout, plus a manifest binding every output to its
parameters and a digest of its decoded pixels.  The whole run is a pure
function of (input pixels, intensity, seed): re-running, or enumerating the
inputs in any order, yields an identical manifest.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .presets import Orientation, preset_params
from .warp import Background, Interpolation, WarpSpec, warp_image

__all__ = [
    "SUBSETS",
    "FRAME_POLICY",
    "ItemRecord",
    "Manifest",
    "derive_item_seed",
    "pixel_digest",
    "load_image",
    "generate_pd",
]

# subset name -> (orientation, background); the I suffix marks integrated padding
SUBSETS: dict[str, tuple[Orientation, Background]] = {
    "PD-L": (Orientation.LEFT, Background.BLACK),
    "PD-R": (Orientation.RIGHT, Background.BLACK),
    "PD-T": (Orientation.TOP, Background.BLACK),
    "PD-B": (Orientation.BOTTOM, Background.BLACK),
    "PD-LI": (Orientation.LEFT, Background.INTEGRATED_PADDING),
    "PD-RI": (Orientation.RIGHT, Background.INTEGRATED_PADDING),
    "PD-TI": (Orientation.TOP, Background.INTEGRATED_PADDING),
    "PD-BI": (Orientation.BOTTOM, Background.INTEGRATED_PADDING),
}

FRAME_POLICY = "centered-unit-square-y-up/v1"

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


@dataclass
class ItemRecord:
    relpath: str
    subset: str
    params: dict
    digest: str

    def key(self):
        return (self.relpath, self.subset)


@dataclass
class Manifest:
    tool_version: str
    global_seed: int
    frame_policy: str
    intensity: float
    items: list[ItemRecord] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "tool_version": self.tool_version,
            "global_seed": self.global_seed,
            "frame_policy": self.frame_policy,
            "intensity": self.intensity,
            "items": [vars(r) for r in self.items],
            "failures": self.failures,
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def derive_item_seed(global_seed: int, relpath: str) -> int:
    """Stable 64-bit per-item seed, independent of enumeration order.

    SHA-256 over the global seed (little-endian u64) and the UTF-8 relpath;
    the first 8 digest bytes, little-endian.
    """
    h = hashlib.sha256()
    h.update((global_seed & (1 << 64) - 1).to_bytes(8, "little"))
    h.update(relpath.encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "little")


def pixel_digest(img: np.ndarray) -> str:
    """SHA-256 over the decoded pixel data (not file bytes), with a dims header."""
    img = np.ascontiguousarray(img)
    channels = 1 if img.ndim == 2 else img.shape[2]
    header = f"{img.shape[1]}x{img.shape[0]}x{channels}:".encode()
    return hashlib.sha256(header + img.tobytes()).hexdigest()


def load_image(path: str | Path) -> np.ndarray:
    """Decode to uint8 gray / RGB / RGBA."""
    with Image.open(path) as im:
        if im.mode in ("L", "RGB", "RGBA"):
            decoded = im
        elif im.mode == "LA" or (im.mode == "P" and "transparency" in im.info):
            decoded = im.convert("RGBA")
        else:
            decoded = im.convert("RGB")
        return np.asarray(decoded, dtype=np.uint8)


def _iter_images(input_dir: Path) -> list[Path]:
    """All image files under input_dir.  Tests may monkeypatch this to check
    enumeration-order independence; generate_pd normalizes the order anyway."""
    return [p for p in input_dir.rglob("*") if p.is_file() and p.suffix.lower() in _IMAGE_SUFFIXES]


def _process_one(relpath: str, src_path: Path, output_dir: Path, intensity: float):
    records: list[ItemRecord] = []
    try:
        img = load_image(src_path)
    except Exception as exc:  # decode failures are recorded, not fatal
        return [], {"relpath": relpath, "error": f"{type(exc).__name__}: {exc}"}
    for subset, (orientation, background) in SUBSETS.items():
        params = preset_params(orientation, intensity)
        spec = WarpSpec(background=background, interpolation=Interpolation.BILINEAR)
        warped = warp_image(img, params, spec)
        out_path = output_dir / subset / Path(relpath).with_suffix(".png")
        out_path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(warped.image).save(out_path, format="PNG")
        records.append(ItemRecord(
            relpath=relpath,
            subset=subset,
            params={
                "a": [params.a.real, params.a.imag],
                "b": [params.b.real, params.b.imag],
                "c": [params.c.real, params.c.imag],
                "d": [params.d.real, params.d.imag],
            },
            digest=pixel_digest(warped.image),
        ))
    return records, None


def generate_pd(input_dir: str | Path, output_dir: str | Path, intensity: float = 0.3,
                seed: int = 0, threads: int = 1) -> Manifest:
    """Generate all eight subsets under output_dir and write manifest.json.

    The benchmark intensity is fixed (not sampled) so the dataset is a
    deterministic function of its inputs; 0.3 is the default upper bound of
    the usual augmentation range.
    """
    if intensity <= 0:
        raise ValueError(f"intensity must be > 0, got {intensity}")
    input_dir = Path(input_dir)
    output_dir = Path(output_dir)
    if not input_dir.is_dir():
        raise FileNotFoundError(f"input directory {input_dir} does not exist")

    files = _iter_images(input_dir)
    if not files:
        raise ValueError(f"no images found under {input_dir}")
    work = sorted((p.relative_to(input_dir).as_posix(), p) for p in files)

    output_dir.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(
        tool_version=__version__,
        global_seed=seed,
        frame_policy=FRAME_POLICY,
        intensity=intensity,
    )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda item: _process_one(item[0], item[1], output_dir, intensity), work,
            ))
    else:
        results = [_process_one(rel, path, output_dir, intensity) for rel, path in work]

    for records, failure in results:
        manifest.items.extend(records)
        if failure is not None:
            manifest.failures.append(failure)

    # order-normalized regardless of enumeration or thread completion order
    manifest.items.sort(key=ItemRecord.key)
    manifest.failures.sort(key=lambda f: f["relpath"])
    manifest.write(output_dir / "manifest.json")
    return manifest
