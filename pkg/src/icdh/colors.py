"""Color value types, conversions, decimal packing, and the 10-family target palette."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence


@dataclass(frozen=True)
class Rgb8:
    """An 8-bit RGB color. Channels are integers in [0, 255]."""

    r: int
    g: int
    b: int

    def __post_init__(self):
        for name in ("r", "g", "b"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise TypeError(f"channel {name} must be an int, got {v!r}")
            if not 0 <= v <= 255:
                raise ValueError(f"channel {name}={v} outside [0, 255]")

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.r, self.g, self.b)


@dataclass(frozen=True)
class Hsl:
    """Hue in degrees [0, 360), saturation and lightness as fractions in [0, 1].

    Achromatic colors (s == 0) carry the canonical hue 0.
    """

    h: float
    s: float
    l: float

    def __post_init__(self):
        if not 0.0 <= self.h < 360.0:
            raise ValueError(f"hue {self.h} outside [0, 360)")
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"saturation {self.s} outside [0, 1]")
        if not 0.0 <= self.l <= 1.0:
            raise ValueError(f"lightness {self.l} outside [0, 1]")


@dataclass(frozen=True)
class ColorFamily:
    """One of the 10 wall-color target classes."""

    id: int
    name: str
    representative: Rgb8

    def __post_init__(self):
        if not 0 <= self.id <= 9:
            raise ValueError(f"family id {self.id} outside [0, 9]")


class Palette:
    """Ordered set of exactly 10 color families with contiguous ids 0..9."""

    N_FAMILIES = 10

    def __init__(self, families: Sequence[ColorFamily]):
        families = tuple(families)
        if len(families) != self.N_FAMILIES:
            raise ValueError(f"palette needs exactly {self.N_FAMILIES} families, got {len(families)}")
        if [f.id for f in families] != list(range(self.N_FAMILIES)):
            raise ValueError("family ids must be contiguous 0..9 in order")
        names = [f.name for f in families]
        if len(set(names)) != len(names):
            raise ValueError("family names must be unique")
        self.families = families
        self._by_name = {f.name: f for f in families}

    def __iter__(self):
        return iter(self.families)

    def __len__(self) -> int:
        return len(self.families)

    def __getitem__(self, family_id: int) -> ColorFamily:
        return self.families[family_id]

    def by_name(self, name: str) -> ColorFamily:
        return self._by_name[name]

    def __eq__(self, other) -> bool:
        return isinstance(other, Palette) and self.families == other.families


def rgb_to_decimal(c: Rgb8) -> int:
    """Pack a color into one integer: 24-bit big-endian, red most significant."""
    return (c.r << 16) | (c.g << 8) | c.b


def decimal_to_rgb(d: int) -> Rgb8:
    """Inverse of :func:`rgb_to_decimal`."""
    if not 0 <= d <= 0xFFFFFF:
        raise ValueError(f"decimal color {d} outside [0, 16777215]")
    return Rgb8((d >> 16) & 0xFF, (d >> 8) & 0xFF, d & 0xFF)


def hue_saturation(r: float, g: float, b: float) -> tuple[float, float, float]:
    """(h, s, l) for unit-range channels; the shared core of the conversions below."""
    mx = max(r, g, b)
    mn = min(r, g, b)
    l = (mx + mn) / 2.0
    if mx == mn:
        return 0.0, 0.0, l
    d = mx - mn
    s = d / (2.0 - mx - mn) if l > 0.5 else d / (mx + mn)
    if mx == r:
        h = ((g - b) / d) % 6.0
    elif mx == g:
        h = (b - r) / d + 2.0
    else:
        h = (r - g) / d + 4.0
    return (h * 60.0) % 360.0, s, l


def rgb_to_hsl(c: Rgb8) -> Hsl:
    h, s, l = hue_saturation(c.r / 255.0, c.g / 255.0, c.b / 255.0)
    return Hsl(h, s, l)


def _hue_channel(p: float, q: float, t: float) -> float:
    t = t % 1.0
    if t < 1 / 6:
        return p + (q - p) * 6.0 * t
    if t < 1 / 2:
        return q
    if t < 2 / 3:
        return p + (q - p) * (2 / 3 - t) * 6.0
    return p


def _quantize(x: float) -> int:
    # Half-up rounding, shared with the vectorized recolor path.
    return int(x * 255.0 + 0.5)


def hsl_to_rgb(hsl: Hsl) -> Rgb8:
    if hsl.s == 0.0:
        v = _quantize(hsl.l)
        return Rgb8(v, v, v)
    q = hsl.l * (1.0 + hsl.s) if hsl.l < 0.5 else hsl.l + hsl.s - hsl.l * hsl.s
    p = 2.0 * hsl.l - q
    hn = hsl.h / 360.0
    return Rgb8(
        _quantize(_hue_channel(p, q, hn + 1 / 3)),
        _quantize(_hue_channel(p, q, hn)),
        _quantize(_hue_channel(p, q, hn - 1 / 3)),
    )


def nearest_family(c: Rgb8, palette: Palette) -> ColorFamily:
    """Family whose representative is closest in squared RGB distance; ties go to the lower id."""
    best = None
    best_d = None
    for fam in palette:
        rep = fam.representative
        d = (c.r - rep.r) ** 2 + (c.g - rep.g) ** 2 + (c.b - rep.b) ** 2
        if best_d is None or d < best_d:
            best, best_d = fam, d
    return best


# Stand-in palette; the source material never enumerates its families, so these
# representatives are an implementer choice and can be swapped via load_palette().
DEFAULT_PALETTE = Palette([
    ColorFamily(0, "white", Rgb8(245, 245, 240)),
    ColorFamily(1, "gray", Rgb8(128, 128, 128)),
    ColorFamily(2, "beige", Rgb8(222, 202, 166)),
    ColorFamily(3, "yellow", Rgb8(240, 214, 90)),
    ColorFamily(4, "orange", Rgb8(230, 140, 60)),
    ColorFamily(5, "red", Rgb8(190, 60, 55)),
    ColorFamily(6, "pink", Rgb8(230, 160, 180)),
    ColorFamily(7, "green", Rgb8(110, 160, 110)),
    ColorFamily(8, "blue", Rgb8(90, 130, 190)),
    ColorFamily(9, "purple", Rgb8(140, 110, 170)),
])


def load_palette(path: str | Path) -> Palette:
    """Read a palette from a JSON file: a list of ``{id, name, representative: [r, g, b]}``."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, list):
        raise ValueError("palette file must contain a JSON list")
    families = []
    for i, entry in enumerate(doc):
        try:
            rep = entry["representative"]
            families.append(ColorFamily(entry["id"], entry["name"], Rgb8(rep[0], rep[1], rep[2])))
        except (KeyError, TypeError, IndexError) as exc:
            raise ValueError(f"palette entry {i} malformed: {exc}") from exc
    return Palette(families)


def save_palette(palette: Palette, path: str | Path) -> None:
    doc = [
        {"id": f.id, "name": f.name, "representative": list(f.representative.as_tuple())}
        for f in palette
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
