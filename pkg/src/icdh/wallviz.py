"""Wall segmentation by edge-bounded flood fill and shading-preserving recolor.

The background assumption is baked in: seeds for the flood fill sit in the top
band of the image, and everything the fill reaches (minus furniture boxes) is
treated as wall. When no seed survives, segmentation fails loudly instead of
producing a bogus mask.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from .colors import ColorFamily, rgb_to_hsl
from .detection import BoundingBox
from .errors import SegmentationFailedError, ValidationError
from .validation import check_image

SOBEL_THRESHOLD = 100.0  # gradient-magnitude units on 0..255 luminance
SEED_ROWS = 0.25  # top fraction of the image scanned for fill seeds
BOX_MARGIN = 2  # furniture boxes are dilated by this many pixels
SEED_GRID_STEP = 8  # seed spacing in pixels, both axes


def load_image(path: str | Path) -> np.ndarray:
    return np.asarray(Image.open(path).convert("RGB"))


def load_image_bytes(data: bytes) -> np.ndarray:
    return np.asarray(Image.open(io.BytesIO(data)).convert("RGB"))


def save_png(image: np.ndarray, path: str | Path) -> None:
    Image.fromarray(check_image(image)).save(path, format="PNG")


def encode_png(image: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(check_image(image)).save(buf, format="PNG")
    return buf.getvalue()


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Luminance = round(0.299 r + 0.587 g + 0.114 b), as (H, W) uint8."""
    image = check_image(image)
    lum = image[..., 0] * 0.299 + image[..., 1] * 0.587 + image[..., 2] * 0.114
    return np.clip(np.floor(lum + 0.5), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class EdgeMap:
    edges: np.ndarray  # (H, W) bool
    threshold: float


def sobel_edges(gray: np.ndarray, threshold: float = SOBEL_THRESHOLD) -> EdgeMap:
    """3x3 Sobel gradient magnitude with clamped-edge padding; edge iff magnitude > threshold."""
    gray = np.asarray(gray)
    if gray.ndim != 2:
        raise ValidationError(f"expected a 2-D grayscale image, got shape {gray.shape}")
    if gray.shape[0] < 3 or gray.shape[1] < 3:
        raise ValidationError(f"image {gray.shape} smaller than the 3x3 kernel")
    if threshold < 0:
        raise ValueError(f"threshold must be >= 0, got {threshold}")
    p = np.pad(gray.astype(np.float64), 1, mode="edge")
    gx = (p[:-2, 2:] + 2.0 * p[1:-1, 2:] + p[2:, 2:]) - (p[:-2, :-2] + 2.0 * p[1:-1, :-2] + p[2:, :-2])
    gy = (p[2:, :-2] + 2.0 * p[2:, 1:-1] + p[2:, 2:]) - (p[:-2, :-2] + 2.0 * p[:-2, 1:-1] + p[:-2, 2:])
    magnitude = np.hypot(gx, gy)
    return EdgeMap(magnitude > threshold, float(threshold))


def _boxes_mask(boxes: list[BoundingBox], width: int, height: int, margin: int) -> np.ndarray:
    mask = np.zeros((height, width), dtype=bool)
    for box in boxes:
        d = box.dilated(margin, width, height)
        mask[d.y : d.y + d.h, d.x : d.x + d.w] = True
    return mask


def wall_mask(
    edge_map: EdgeMap,
    furniture: list[BoundingBox],
    seed_rows: float = SEED_ROWS,
    box_margin: int = BOX_MARGIN,
    seed_grid_step: int = SEED_GRID_STEP,
) -> np.ndarray:
    """Flood fill (4-connectivity) over non-edge pixels from a seed grid in the
    top ``seed_rows`` band, minus the dilated furniture boxes.

    Raises SegmentationFailedError when every seed lands on an edge or inside a box.
    """
    edges = edge_map.edges
    height, width = edges.shape
    if not 0.0 < seed_rows <= 1.0:
        raise ValueError(f"seed_rows={seed_rows} outside (0, 1]")
    boxes = _boxes_mask(furniture, width, height, box_margin)

    band = max(1, int(np.floor(height * seed_rows)))
    seed_mask = np.zeros_like(edges)
    seed_mask[0:band:seed_grid_step, 0:width:seed_grid_step] = True
    seed_mask &= ~edges
    seed_mask &= ~boxes
    if not seed_mask.any():
        raise SegmentationFailedError(
            "no usable wall seed: the top band is covered by edges or furniture boxes"
        )

    # Connected components of the non-edge region; keep those holding a seed.
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    labels, _ = ndimage.label(~edges, structure=structure)
    seed_labels = np.unique(labels[seed_mask])
    filled = np.isin(labels, seed_labels[seed_labels > 0])
    return filled & ~boxes


def _target_weights(h_deg: float) -> np.ndarray:
    """Per-channel interpolation weights so that channel = p + (q - p) * weight."""
    weights = []
    for t in ((h_deg / 360.0) + 1 / 3, h_deg / 360.0, (h_deg / 360.0) - 1 / 3):
        t = t % 1.0
        if t < 1 / 6:
            weights.append(6.0 * t)
        elif t < 1 / 2:
            weights.append(1.0)
        elif t < 2 / 3:
            weights.append((2 / 3 - t) * 6.0)
        else:
            weights.append(0.0)
    return np.array(weights)


def recolor(image: np.ndarray, mask: np.ndarray, target: ColorFamily) -> np.ndarray:
    """Repaint masked pixels with the target family's hue and saturation,
    keeping each pixel's own lightness; unmasked pixels are copied bit-exact."""
    image = check_image(image)
    mask = np.asarray(mask)
    if mask.shape != image.shape[:2]:
        raise ValidationError(f"mask shape {mask.shape} does not match image {image.shape[:2]}")
    out = image.copy()
    if not mask.any():
        return out

    pixels = image[mask].astype(np.float64) / 255.0
    lightness = (pixels.max(axis=1) + pixels.min(axis=1)) / 2.0
    target_hsl = rgb_to_hsl(target.representative)
    if target_hsl.s == 0.0:
        channels = np.repeat(lightness[:, None], 3, axis=1)
    else:
        q = np.where(
            lightness < 0.5,
            lightness * (1.0 + target_hsl.s),
            lightness + target_hsl.s - lightness * target_hsl.s,
        )
        p = 2.0 * lightness - q
        weights = _target_weights(target_hsl.h)
        channels = p[:, None] + (q - p)[:, None] * weights[None, :]
    out[mask] = np.clip(np.floor(channels * 255.0 + 0.5), 0, 255).astype(np.uint8)
    return out
