"""Furniture-detection input: bounding boxes + classes from a file or an HTTP detector service.

The detector itself lives outside this package; anything that can emit the
detections document below (file or sidecar endpoint) is a valid provider.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .errors import ParseError, ProviderUnavailableError, ValidationError


class FurnitureClass(enum.Enum):
    """Closed set of indoor-furniture classes, in fixed ordinal order."""

    DESK = "desk"
    TABLE = "table"
    BED = "bed"
    COUCH = "couch"
    CHAIR = "chair"
    FURNITURE_OTHER = "furniture_other"
    CUPBOARD = "cupboard"
    CABINET = "cabinet"
    SHELF = "shelf"

    @property
    def ordinal(self) -> int:
        return list(FurnitureClass).index(self)


# COCO-style labels commonly seen in detector output, mapped onto the closed
# class set. Unmapped labels are errors, never silently dropped.
CLASS_ALIASES = {
    "desk": FurnitureClass.DESK,
    "table": FurnitureClass.TABLE,
    "dining table": FurnitureClass.TABLE,
    "dining_table": FurnitureClass.TABLE,
    "coffee table": FurnitureClass.TABLE,
    "bed": FurnitureClass.BED,
    "couch": FurnitureClass.COUCH,
    "sofa": FurnitureClass.COUCH,
    "chair": FurnitureClass.CHAIR,
    "armchair": FurnitureClass.CHAIR,
    "furniture_other": FurnitureClass.FURNITURE_OTHER,
    "furniture-other": FurnitureClass.FURNITURE_OTHER,
    "cupboard": FurnitureClass.CUPBOARD,
    "cabinet": FurnitureClass.CABINET,
    "shelf": FurnitureClass.SHELF,
    "bookshelf": FurnitureClass.SHELF,
}

DEFAULT_MIN_CONFIDENCE = 0.5


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box: top-left corner plus extent."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValidationError(f"box extent must be positive, got w={self.w}, h={self.h}")

    def clamped(self, image_width: int, image_height: int) -> "BoundingBox":
        """Clamp to image bounds; a box with no area left after clamping is rejected."""
        x0 = max(0, self.x)
        y0 = max(0, self.y)
        x1 = min(image_width, self.x + self.w)
        y1 = min(image_height, self.y + self.h)
        if x1 - x0 <= 0 or y1 - y0 <= 0:
            raise ValidationError(f"box {self} has no area inside a {image_width}x{image_height} image")
        return BoundingBox(x0, y0, x1 - x0, y1 - y0)

    def dilated(self, margin: int, image_width: int, image_height: int) -> "BoundingBox":
        return BoundingBox(self.x - margin, self.y - margin, self.w + 2 * margin, self.h + 2 * margin).clamped(
            image_width, image_height
        )


@dataclass(frozen=True)
class Detection:
    klass: FurnitureClass
    box: BoundingBox
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class DetectionSet:
    image_width: int
    image_height: int
    detections: tuple[Detection, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValidationError(f"image size {self.image_width}x{self.image_height} must be positive")
        for det in self.detections:
            b = det.box
            if b.x < 0 or b.y < 0 or b.x + b.w > self.image_width or b.y + b.h > self.image_height:
                raise ValidationError(f"box {b} outside {self.image_width}x{self.image_height} image")

    def __len__(self) -> int:
        return len(self.detections)


def resolve_class(label: str) -> FurnitureClass:
    key = label.strip().lower()
    if key not in CLASS_ALIASES:
        raise ValidationError(f"unknown furniture class label: {label!r}")
    return CLASS_ALIASES[key]


def parse_detections_document(doc, *, image_width: int | None = None, image_height: int | None = None) -> DetectionSet:
    """Validate a parsed detections document and clamp its boxes to image bounds.

    Explicit ``image_width``/``image_height`` override the document's own image block.
    """
    if not isinstance(doc, dict):
        raise ParseError("detections document must be a JSON object")
    if image_width is None or image_height is None:
        img = doc.get("image")
        if not isinstance(img, dict) or "width" not in img or "height" not in img:
            raise ParseError("detections document missing image {width, height}")
        image_width, image_height = int(img["width"]), int(img["height"])
    entries = doc.get("detections")
    if not isinstance(entries, list):
        raise ParseError("detections document missing 'detections' list")
    dets = []
    for i, entry in enumerate(entries):
        try:
            klass = resolve_class(entry["class"])
            confidence = float(entry["confidence"])
            raw = entry["box"]
            box = BoundingBox(int(raw["x"]), int(raw["y"]), int(raw["w"]), int(raw["h"]))
        except ValidationError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"detections[{i}] malformed: {exc}") from exc
        dets.append(Detection(klass, box.clamped(image_width, image_height), confidence))
    return DetectionSet(image_width, image_height, tuple(dets))


def load_detections_file(path: str | Path, image_width: int, image_height: int) -> DetectionSet:
    """File-based provider: read a detections document and validate it against the image size."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}") from exc
    return parse_detections_document(doc, image_width=image_width, image_height=image_height)


def serialize_detections(dets: DetectionSet) -> dict:
    return {
        "image": {"width": dets.image_width, "height": dets.image_height},
        "detections": [
            {
                "class": d.klass.value,
                "confidence": d.confidence,
                "box": {"x": d.box.x, "y": d.box.y, "w": d.box.w, "h": d.box.h},
            }
            for d in dets.detections
        ],
    }


def fetch_detections_http(
    endpoint: str,
    image_bytes: bytes,
    *,
    content_type: str = "image/png",
    timeout: float = 10.0,
) -> DetectionSet:
    """HTTP provider: POST the image to a detector sidecar and parse its detections document."""
    try:
        resp = httpx.post(endpoint, content=image_bytes, headers={"Content-Type": content_type}, timeout=timeout)
        resp.raise_for_status()
        doc = resp.json()
    except (httpx.TransportError, httpx.TimeoutException, httpx.HTTPStatusError) as exc:
        raise ProviderUnavailableError(f"detection provider at {endpoint} failed: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"detection provider returned invalid JSON: {exc}") from exc
    return parse_detections_document(doc)


def filter_furniture(dets: DetectionSet, min_confidence: float = DEFAULT_MIN_CONFIDENCE) -> DetectionSet:
    """Keep detections with confidence >= min_confidence, preserving order."""
    kept = tuple(d for d in dets.detections if d.confidence >= min_confidence)
    return DetectionSet(dets.image_width, dets.image_height, kept)
