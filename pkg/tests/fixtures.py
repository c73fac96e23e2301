"""Synthetic room fixtures shared across the test suite.

The fixture room is a flat-shaded wall above a darker floor band with two
furniture rectangles, so segmentation and recolor behavior are fully
predictable: the wall/floor boundary and furniture borders are the only edges.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

WIDTH, HEIGHT = 160, 120
FLOOR_Y = 90
COUCH_BOX = {"x": 20, "y": 60, "w": 50, "h": 50}
TABLE_BOX = {"x": 100, "y": 70, "w": 36, "h": 40}
COUCH_COLOR = (190, 60, 55)  # the stock red family representative
TABLE_COLOR = (150, 110, 70)

WALL_BASE = 205  # wall luminance at the top row; shaded slightly darker downwards
FLOOR_GRAY = 110


def make_fixture_room() -> np.ndarray:
    image = np.zeros((HEIGHT, WIDTH, 3), dtype=np.uint8)
    for y in range(FLOOR_Y):
        shade = WALL_BASE - y // 8  # gentle vertical shading, below the edge threshold
        image[y, :, :] = shade
    image[FLOOR_Y:, :, :] = FLOOR_GRAY
    for box, color in ((COUCH_BOX, COUCH_COLOR), (TABLE_BOX, TABLE_COLOR)):
        image[box["y"] : box["y"] + box["h"], box["x"] : box["x"] + box["w"]] = color
    return image


def make_detections_doc() -> dict:
    return {
        "image": {"width": WIDTH, "height": HEIGHT},
        "detections": [
            {"class": "couch", "confidence": 0.93, "box": dict(COUCH_BOX)},
            {"class": "table", "confidence": 0.88, "box": dict(TABLE_BOX)},
        ],
    }


def make_attrs_doc() -> dict:
    return {
        "room_type": "living_room",
        "room_size": "medium",
        "room_style": "modern",
        "room_mood": "warm",
        "room_tone": "light",
        "color_preferences": [],
        "paint_preference": "plain_shades",
    }


def make_blocked_detections_doc() -> dict:
    """A detection covering the whole seed band, forcing segmentation failure."""
    return {
        "image": {"width": WIDTH, "height": HEIGHT},
        "detections": [
            {"class": "shelf", "confidence": 0.95, "box": {"x": 0, "y": 0, "w": WIDTH, "h": 40}},
        ],
    }


def write_fixture_files(out_dir: Path) -> None:
    from icdh.wallviz import save_png

    out_dir.mkdir(parents=True, exist_ok=True)
    save_png(make_fixture_room(), out_dir / "room.png")
    (out_dir / "detections.json").write_text(json.dumps(make_detections_doc(), indent=2))
    (out_dir / "attrs.json").write_text(json.dumps(make_attrs_doc(), indent=2))
    (out_dir / "detections_blocked.json").write_text(json.dumps(make_blocked_detections_doc(), indent=2))


if __name__ == "__main__":
    write_fixture_files(Path(sys.argv[1]) if len(sys.argv) > 1 else Path("fixture_room"))
