"""Transform point and box annotations consistently with the image warp.

Points travel through exactly the arithmetic the warp's sampling grid uses
(same frame, same fit window, same operation order), so a marker stamped into
the image and its transformed annotation land on the same output pixel.

Bounding boxes are transformed by forward-mapping several samples along each
edge and taking the axis-aligned hull of the images: the map bends box edges,
so corners alone would underestimate the hull.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .mobius import POLE_EPS, CoordFrame, MobiusParams
from .warp import BoundingBox, Fit, WarpSpec, _forward_plane, forward_boundary_probe

__all__ = [
    "PointSet",
    "BoxSet",
    "transform_points",
    "transform_boxes",
    "read_points_jsonl",
    "write_points_jsonl",
    "read_boxes_json",
    "write_boxes_json",
]

_POLE_EPS2 = POLE_EPS * POLE_EPS


@dataclass
class PointSet:
    """Point annotations in pixel coordinates, paired with their canvas."""

    points: np.ndarray  # (N, 2) float64, columns x, y
    frame: CoordFrame

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 2)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must be (N, 2), got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        self.points = pts

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass
class BoxSet:
    """Axis-aligned boxes (x_min, y_min, x_max, y_max) in pixel coordinates."""

    boxes: np.ndarray  # (N, 4) float64
    frame: CoordFrame

    def __post_init__(self):
        bx = np.asarray(self.boxes, dtype=np.float64)
        if bx.size == 0:
            bx = bx.reshape(0, 4)
        if bx.ndim != 2 or bx.shape[1] != 4:
            raise ValueError(f"boxes must be (N, 4), got shape {bx.shape}")
        if not np.all(np.isfinite(bx)):
            raise ValueError("box coordinates must be finite")
        if np.any(bx[:, 0] >= bx[:, 2]) or np.any(bx[:, 1] >= bx[:, 3]):
            raise ValueError("boxes must satisfy x_min < x_max and y_min < y_max")
        self.boxes = bx

    def __len__(self) -> int:
        return self.boxes.shape[0]


def _points_to_plane(frame: CoordFrame, xs: np.ndarray, ys: np.ndarray):
    w, h = frame.width, frame.height
    tx = xs / (w - 1.0) if w > 1 else np.full_like(xs, 0.5)
    ty = ys / (h - 1.0) if h > 1 else np.full_like(ys, 0.5)
    return 2.0 * tx - 1.0, 1.0 - 2.0 * ty


def _plane_to_points(frame: CoordFrame, wre: np.ndarray, wim: np.ndarray,
                     window: BoundingBox | None):
    qx = (wre + 1.0) * 0.5
    qy = (1.0 - wim) * 0.5
    if window is not None:
        qx = (qx - window.x_min) / (window.x_max - window.x_min)
        qy = (qy - window.y_min) / (window.y_max - window.y_min)
    return qx * (frame.width - 1.0), qy * (frame.height - 1.0)


def _resolve_window(p: MobiusParams, frame: CoordFrame, spec: WarpSpec,
                    fit_window: BoundingBox | None) -> BoundingBox | None:
    if spec.fit is Fit.BOUNDING_BOX:
        return fit_window if fit_window is not None else forward_boundary_probe(p, frame)
    if fit_window is not None:
        raise ValueError("fit_window given but spec.fit is not BOUNDING_BOX")
    return None


def transform_points(pts: PointSet, p: MobiusParams, spec: WarpSpec = WarpSpec(),
                     fit_window: BoundingBox | None = None) -> tuple[PointSet, int]:
    """Forward-map each point in the warp's frame and fit window.

    Points whose image leaves the canvas (or that sit in the pole
    neighborhood) are dropped, not fatal; the drop count is returned so
    training pipelines can rebalance.
    """
    frame = pts.frame
    window = _resolve_window(p, frame, spec, fit_window)
    if len(pts) == 0:
        return PointSet(np.empty((0, 2)), frame), 0

    zre, zim = _points_to_plane(frame, pts.points[:, 0], pts.points[:, 1])
    wre, wim, mag2 = _forward_plane(p, zre, zim)
    px, py = _plane_to_points(frame, wre, wim, window)

    with np.errstate(invalid="ignore"):
        keep = (
            (mag2 > _POLE_EPS2)
            & (px >= 0.0) & (px <= frame.width - 1.0)
            & (py >= 0.0) & (py <= frame.height - 1.0)
        )
    kept = np.stack([px[keep], py[keep]], axis=1)
    return PointSet(kept, frame), int((~keep).sum())


def transform_boxes(bx: BoxSet, p: MobiusParams, spec: WarpSpec = WarpSpec(),
                    samples_per_edge: int = 8, min_area_px: float = 1.0,
                    fit_window: BoundingBox | None = None) -> tuple[BoxSet, int]:
    """Edge-sampled hull transform of each box, clipped to the canvas.

    Per box: ``samples_per_edge`` points along each edge (corners included)
    are forward-mapped; the kept box is the axis-aligned min/max of the
    surviving images, clipped to the canvas.  Boxes are dropped when all edge
    samples hit the pole, the clipped box collapses, or its area falls below
    ``min_area_px``.
    """
    if samples_per_edge < 2:
        raise ValueError("samples_per_edge must be >= 2")
    frame = bx.frame
    window = _resolve_window(p, frame, spec, fit_window)

    ts = np.arange(samples_per_edge, dtype=np.float64) / (samples_per_edge - 1.0)
    kept_rows = []
    dropped = 0
    for x0, y0, x1, y1 in bx.boxes:
        ex = np.concatenate([
            x0 + (x1 - x0) * ts, x0 + (x1 - x0) * ts,
            np.full_like(ts, x0), np.full_like(ts, x1),
        ])
        ey = np.concatenate([
            np.full_like(ts, y0), np.full_like(ts, y1),
            y0 + (y1 - y0) * ts, y0 + (y1 - y0) * ts,
        ])
        zre, zim = _points_to_plane(frame, ex, ey)
        wre, wim, mag2 = _forward_plane(p, zre, zim)
        px, py = _plane_to_points(frame, wre, wim, window)
        with np.errstate(invalid="ignore"):
            ok = mag2 > _POLE_EPS2
        if not ok.any():
            dropped += 1
            continue
        nx0 = max(float(px[ok].min()), 0.0)
        ny0 = max(float(py[ok].min()), 0.0)
        nx1 = min(float(px[ok].max()), frame.width - 1.0)
        ny1 = min(float(py[ok].max()), frame.height - 1.0)
        if nx1 <= nx0 or ny1 <= ny0 or (nx1 - nx0) * (ny1 - ny0) < min_area_px:
            dropped += 1
            continue
        kept_rows.append((nx0, ny0, nx1, ny1))

    kept = BoxSet(np.asarray(kept_rows, dtype=np.float64).reshape(len(kept_rows), 4), frame)
    return kept, dropped


# ---------------------------------------------------------------------------
# File formats: JSON-lines point records and a minimal COCO-like box subset.


def read_points_jsonl(path: str | Path, frame: CoordFrame) -> list[tuple[str, PointSet]]:
    """One record per image: {"image": ..., "points": [[x, y], ...]}."""
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        rec = json.loads(line)
        if "image" not in rec or "points" not in rec:
            raise ValueError(f"{path}:{lineno}: expected keys 'image' and 'points'")
        out.append((rec["image"], PointSet(np.asarray(rec["points"], dtype=np.float64).reshape(-1, 2), frame)))
    return out


def write_points_jsonl(path: str | Path, records) -> None:
    """records: iterable of (image, PointSet) or (image, PointSet, extra_fields)."""
    lines = []
    for rec in records:
        image, pts = rec[0], rec[1]
        extra = rec[2] if len(rec) > 2 else None
        body = {"image": image, "points": [[float(x), float(y)] for x, y in pts.points]}
        if extra:
            body.update(extra)
        lines.append(json.dumps(body))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_boxes_json(path: str | Path) -> tuple[dict, dict[int, tuple[str, BoxSet]]]:
    """Minimal COCO-like subset: images[{id, file_name, width, height}] and
    annotations[{image_id, bbox: [x, y, w, h]}].  Converted to corner form."""
    doc = json.loads(Path(path).read_text())
    per_image: dict[int, list[list[float]]] = {}
    for ann in doc.get("annotations", []):
        x, y, w, h = ann["bbox"]
        if w <= 0 or h <= 0:
            raise ValueError(f"degenerate bbox {ann['bbox']} in annotation {ann.get('id')}")
        per_image.setdefault(ann["image_id"], []).append([x, y, x + w, y + h])
    result: dict[int, tuple[str, BoxSet]] = {}
    for img in doc.get("images", []):
        frame = CoordFrame(int(img["width"]), int(img["height"]))
        rows = per_image.get(img["id"], [])
        bx = BoxSet(np.asarray(rows, dtype=np.float64).reshape(len(rows), 4), frame)
        result[img["id"]] = (img.get("file_name", str(img["id"])), bx)
    return doc, result


def write_boxes_json(path: str | Path, doc: dict, transformed: dict[int, BoxSet],
                     dropped: dict[int, int] | None = None) -> None:
    """Re-emit the document with transformed boxes (corner form -> x,y,w,h)."""
    out = {"images": doc.get("images", []), "annotations": []}
    ann_id = 1
    for image_id, bx in transformed.items():
        for x0, y0, x1, y1 in bx.boxes:
            out["annotations"].append({
                "id": ann_id,
                "image_id": image_id,
                "bbox": [float(x0), float(y0), float(x1 - x0), float(y1 - y0)],
            })
            ann_id += 1
    if dropped is not None:
        out["dropped"] = {str(k): int(v) for k, v in dropped.items()}
    Path(path).write_text(json.dumps(out, indent=2) + "\n")
