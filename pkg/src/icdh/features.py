"""Room/user attribute schema, feature encoding, the consultant rule oracle,
synthetic dataset generation, and dataset persistence/splitting."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .colors import DEFAULT_PALETTE, Palette, Rgb8, rgb_to_hsl
from .detection import FurnitureClass
from .errors import ParseError, ValidationError

ROOM_TYPES = ("living_room", "bedroom", "kitchen")
ROOM_SIZES = ("small", "medium", "big")
ROOM_STYLES = ("modern", "classic", "elegant", "traditional")
ROOM_MOODS = ("warm", "cool", "active", "casual", "playful")
ROOM_TONES = ("dark", "light", "vibrant")
PAINT_PREFERENCES = ("plain_shades", "texture", "wallpaper")

N_CLASSES = len(FurnitureClass)  # 9 furniture slots
N_FEATURES = 3 + 3 + 4 + 5 + 3 + 10 + 3 + 4 * N_CLASSES  # = 67
_SLOT_BASE = 31  # first index of the furniture block

DATASET_SCHEMA = "icdh_dataset_v1"
FLOAT_DECIMALS = 6  # canonical on-disk feature precision


def _check_member(value: str, allowed: tuple[str, ...], name: str) -> str:
    if value not in allowed:
        raise ValidationError(f"{name}={value!r} not one of {allowed}")
    return value


@dataclass(frozen=True)
class RoomAttributes:
    room_type: str
    room_size: str
    room_style: str
    room_mood: str
    room_tone: str

    def __post_init__(self):
        _check_member(self.room_type, ROOM_TYPES, "room_type")
        _check_member(self.room_size, ROOM_SIZES, "room_size")
        _check_member(self.room_style, ROOM_STYLES, "room_style")
        _check_member(self.room_mood, ROOM_MOODS, "room_mood")
        _check_member(self.room_tone, ROOM_TONES, "room_tone")


@dataclass(frozen=True)
class UserPreferences:
    color_preferences: tuple[int, ...] = ()
    paint_preference: str = "plain_shades"

    def __post_init__(self):
        _check_member(self.paint_preference, PAINT_PREFERENCES, "paint_preference")
        ids = tuple(self.color_preferences)
        if len(set(ids)) != len(ids):
            raise ValidationError(f"duplicate color preferences: {ids}")
        for fid in ids:
            if not 0 <= fid <= 9:
                raise ValidationError(f"color preference id {fid} outside [0, 9]")
        # preferences are a set; store them in canonical ascending order
        object.__setattr__(self, "color_preferences", tuple(sorted(ids)))


@dataclass(frozen=True)
class FurnitureFeature:
    klass: FurnitureClass
    color: Rgb8


@dataclass(eq=False)
class TrainingRecord:
    features: np.ndarray  # (N_FEATURES,) float64
    label: int

    def __eq__(self, other):
        return (
            isinstance(other, TrainingRecord)
            and self.label == other.label
            and np.array_equal(self.features, other.features)
        )


@dataclass(eq=False)
class Dataset:
    records: list[TrainingRecord] = field(default_factory=list)
    schema_version: int = 1

    def __len__(self) -> int:
        return len(self.records)

    def __eq__(self, other):
        return (
            isinstance(other, Dataset)
            and self.schema_version == other.schema_version
            and self.records == other.records
        )

    def X(self) -> np.ndarray:
        return np.array([r.features for r in self.records], dtype=np.float64)

    def y(self) -> np.ndarray:
        return np.array([r.label for r in self.records], dtype=np.int64)


def furniture_slots(furniture: list[FurnitureFeature]) -> tuple[np.ndarray, np.ndarray]:
    """Per-class presence flags and unit-range colors, duplicates channel-averaged."""
    presence = np.zeros(N_CLASSES)
    colors = np.zeros((N_CLASSES, 3))
    grouped: dict[int, list[Rgb8]] = {}
    for item in furniture:
        grouped.setdefault(item.klass.ordinal, []).append(item.color)
    for slot, items in grouped.items():
        presence[slot] = 1.0
        colors[slot] = np.mean([[c.r, c.g, c.b] for c in items], axis=0) / 255.0
    return presence, colors


def encode(attrs: RoomAttributes, prefs: UserPreferences, furniture: list[FurnitureFeature]) -> np.ndarray:
    """Encode one consultation into the fixed 67-value layout.

    Layout: room_type one-hot (3) | room_size (3) | room_style (4) | room_mood (5)
    | room_tone (3) | color preferences multi-hot (10) | paint_preference (3)
    | 9 furniture slots x [presence, r/255, g/255, b/255] in class ordinal order.
    """
    vec = np.zeros(N_FEATURES)
    vec[ROOM_TYPES.index(attrs.room_type)] = 1.0
    vec[3 + ROOM_SIZES.index(attrs.room_size)] = 1.0
    vec[6 + ROOM_STYLES.index(attrs.room_style)] = 1.0
    vec[10 + ROOM_MOODS.index(attrs.room_mood)] = 1.0
    vec[15 + ROOM_TONES.index(attrs.room_tone)] = 1.0
    for fid in prefs.color_preferences:
        vec[18 + fid] = 1.0
    vec[28 + PAINT_PREFERENCES.index(prefs.paint_preference)] = 1.0
    presence, colors = furniture_slots(furniture)
    for slot in range(N_CLASSES):
        base = _SLOT_BASE + 4 * slot
        vec[base] = presence[slot]
        vec[base + 1 : base + 4] = colors[slot]
    return vec


def decode_vector(vec: np.ndarray) -> tuple[RoomAttributes, UserPreferences, np.ndarray, np.ndarray]:
    """Inverse of :func:`encode`: attributes, preferences, and furniture slots."""
    vec = np.asarray(vec, dtype=np.float64)
    if vec.shape != (N_FEATURES,):
        raise ValidationError(f"feature vector must have shape ({N_FEATURES},), got {vec.shape}")
    attrs = RoomAttributes(
        ROOM_TYPES[int(np.argmax(vec[0:3]))],
        ROOM_SIZES[int(np.argmax(vec[3:6]))],
        ROOM_STYLES[int(np.argmax(vec[6:10]))],
        ROOM_MOODS[int(np.argmax(vec[10:15]))],
        ROOM_TONES[int(np.argmax(vec[15:18]))],
    )
    pref_ids = tuple(int(i) for i in np.nonzero(vec[18:28] > 0.5)[0])
    prefs = UserPreferences(pref_ids, PAINT_PREFERENCES[int(np.argmax(vec[28:31]))])
    slots = vec[_SLOT_BASE:].reshape(N_CLASSES, 4)
    return attrs, prefs, slots[:, 0].copy(), slots[:, 1:].copy()


# ---------------------------------------------------------------------------
# Consultant rule oracle
#
# A deterministic stand-in for consultant-labeled data. The rule table below is
# the whole contract; swap in real labels by replacing oracle_label.
#
#   1. Each present furniture slot is snapped to its nearest palette family
#      (squared RGB distance). Neutral families contribute no hue; every other
#      family contributes its representative hue. The slot hues are combined by
#      a presence-weighted circular mean; with no contribution the default
#      hue below is used.
#   2. Candidate hue = combined hue + 180 degrees (complementary).
#   3. Candidate family = non-neutral family with the circularly nearest
#      representative hue (ties to the lower id).
#   4. Dark room tone remaps the candidate to beige when the candidate hue is
#      warm, else to white. Otherwise a cool room mood pulls a candidate from
#      outside the cool set to its circularly nearest cool family.
#   5. A nonempty preference set overrides: the preferred family circularly
#      nearest to the candidate's hue wins (ties to the lower id).
# ---------------------------------------------------------------------------

DEFAULT_ORACLE_HUE = 30.0
NEUTRAL_FAMILY_NAMES = ("white", "gray")
COOL_FAMILY_NAMES = ("green", "blue", "purple")
WARM_HUE_MAX = 90.0  # hues in [300, 360) + [0, 90) count as warm
WARM_HUE_MIN = 300.0


def _circular_distance(a: float, b: float) -> float:
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def _is_warm(hue: float) -> bool:
    return hue < WARM_HUE_MAX or hue >= WARM_HUE_MIN


def _family_hue(rep: Rgb8) -> float:
    return rgb_to_hsl(rep).h


class _OracleTable:
    """Palette-derived lookup tables used by the rule steps."""

    def __init__(self, palette: Palette):
        for name in NEUTRAL_FAMILY_NAMES + COOL_FAMILY_NAMES + ("beige",):
            if name not in {f.name for f in palette}:
                raise ValidationError(f"oracle rule table needs a family named {name!r}")
        self.palette = palette
        self.anchor_hue = {f.id: _family_hue(f.representative) for f in palette}
        self.neutral_ids = {palette.by_name(n).id for n in NEUTRAL_FAMILY_NAMES}
        self.chromatic_ids = [f.id for f in palette if f.id not in self.neutral_ids]
        self.cool_ids = [palette.by_name(n).id for n in COOL_FAMILY_NAMES]
        self.white_id = palette.by_name("white").id
        self.beige_id = palette.by_name("beige").id
        self.reps = np.array([[f.representative.r, f.representative.g, f.representative.b] for f in palette], dtype=np.float64)


_TABLE_CACHE: dict[int, _OracleTable] = {}


def _oracle_table(palette: Palette) -> _OracleTable:
    key = id(palette)
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = _OracleTable(palette)
    return _TABLE_CACHE[key]


def _nearest_family_id(rgb255: np.ndarray, table: _OracleTable) -> int:
    d = np.sum((table.reps - rgb255) ** 2, axis=1)
    return int(np.argmin(d))  # argmin takes the lowest id on ties


def _oracle_from_slots(
    attrs: RoomAttributes,
    prefs: UserPreferences,
    presence: np.ndarray,
    colors01: np.ndarray,
    palette: Palette,
) -> int:
    table = _oracle_table(palette)

    # 1. presence-weighted circular mean of the snapped slot hues
    sin_sum = 0.0
    cos_sum = 0.0
    for slot in range(N_CLASSES):
        if presence[slot] <= 0.0:
            continue
        fid = _nearest_family_id(colors01[slot] * 255.0, table)
        if fid in table.neutral_ids:
            continue
        hue = math.radians(table.anchor_hue[fid])
        sin_sum += presence[slot] * math.sin(hue)
        cos_sum += presence[slot] * math.cos(hue)
    if math.hypot(sin_sum, cos_sum) < 1e-9:
        mean_hue = DEFAULT_ORACLE_HUE
    else:
        mean_hue = math.degrees(math.atan2(sin_sum, cos_sum)) % 360.0

    # 2 + 3. complementary hue, snapped to the nearest non-neutral family
    target_hue = (mean_hue + 180.0) % 360.0
    candidate = min(table.chromatic_ids, key=lambda fid: (_circular_distance(table.anchor_hue[fid], target_hue), fid))

    # 4. room tone / mood adjustments (dark tone takes precedence)
    if attrs.room_tone == "dark":
        candidate = table.beige_id if _is_warm(table.anchor_hue[candidate]) else table.white_id
    elif attrs.room_mood == "cool" and candidate not in table.cool_ids:
        anchor = table.anchor_hue[candidate]
        candidate = min(table.cool_ids, key=lambda fid: (_circular_distance(table.anchor_hue[fid], anchor), fid))

    # 5. explicit preferences override
    if prefs.color_preferences:
        anchor = table.anchor_hue[candidate]
        candidate = min(
            sorted(prefs.color_preferences),
            key=lambda fid: (_circular_distance(table.anchor_hue[fid], anchor), fid),
        )
    return candidate


def oracle_label(
    attrs: RoomAttributes,
    prefs: UserPreferences,
    furniture: list[FurnitureFeature],
    palette: Palette = DEFAULT_PALETTE,
) -> int:
    """Rule-generated target family for one consultation."""
    presence, colors = furniture_slots(furniture)
    return _oracle_from_slots(attrs, prefs, presence, colors, palette)


def oracle_label_from_vector(vec: np.ndarray, palette: Palette = DEFAULT_PALETTE) -> int:
    """Apply the rule oracle to an already-encoded feature vector."""
    attrs, prefs, presence, colors = decode_vector(vec)
    return _oracle_from_slots(attrs, prefs, presence, colors, palette)


# ---------------------------------------------------------------------------
# Synthetic dataset generation
#
# The sampled population models coherent consultations rather than independent
# noise, which is what makes the rule recoverable by the downstream network at
# the fixed training regime:
#   - room attributes are uniform over their vocabularies;
#   - each room's furniture shares one color scheme family (coordinated
#     furnishings), with per-channel jitter around the representative; the
#     family draw is tilted toward the cool/pink families so the complementary
#     rule's minority outcomes are not starved of examples;
#   - furniture lands mostly in the common classes (couch/chair/table);
#   - clients who state color preferences state agreeable ones: the preference
#     list always contains the family the rule would pick for their room, so
#     stated preferences and room harmony agree across the corpus.
# ---------------------------------------------------------------------------

_PREF_COUNT_WEIGHTS = (0.20, 0.65, 0.10, 0.05)  # P(len(color_preferences) == 0..3)
_COLOR_JITTER_STD = 8.0  # channel noise around the scheme family representative
# desk, table, bed, couch, chair, furniture_other, cupboard, cabinet, shelf
_CLASS_WEIGHTS = (0.06, 0.22, 0.08, 0.25, 0.22, 0.05, 0.04, 0.04, 0.04)
# white, gray, beige, yellow, orange, red, pink, green, blue, purple
_SCHEME_FAMILY_WEIGHTS = (0.05, 0.05, 0.075, 0.075, 0.075, 0.075, 0.15, 0.15, 0.15, 0.15)


def _random_record(rng: np.random.Generator, palette: Palette) -> tuple[np.ndarray, int]:
    attrs = RoomAttributes(
        str(rng.choice(ROOM_TYPES)),
        str(rng.choice(ROOM_SIZES)),
        str(rng.choice(ROOM_STYLES)),
        str(rng.choice(ROOM_MOODS)),
        str(rng.choice(ROOM_TONES)),
    )
    n_furniture = int(rng.integers(0, 5))
    classes = rng.choice(N_CLASSES, size=n_furniture, replace=False, p=_CLASS_WEIGHTS)
    scheme = palette[int(rng.choice(10, p=_SCHEME_FAMILY_WEIGHTS))].representative
    furniture = []
    for slot in classes:
        channels = np.array([scheme.r, scheme.g, scheme.b], dtype=np.float64) + rng.normal(
            0.0, _COLOR_JITTER_STD, size=3
        )
        channels = np.clip(np.floor(channels + 0.5), 0, 255).astype(int)
        furniture.append(FurnitureFeature(list(FurnitureClass)[int(slot)], Rgb8(*map(int, channels))))
    n_prefs = int(rng.choice(len(_PREF_COUNT_WEIGHTS), p=_PREF_COUNT_WEIGHTS))
    if n_prefs > 0:
        base = oracle_label(attrs, UserPreferences(), furniture, palette)
        extra = rng.choice([i for i in range(10) if i != base], size=n_prefs - 1, replace=False) if n_prefs > 1 else []
        pref_ids = tuple(sorted([base] + [int(i) for i in extra]))
    else:
        pref_ids = ()
    prefs = UserPreferences(pref_ids, str(rng.choice(PAINT_PREFERENCES)))
    # Labels come from the quantized vector so that re-applying the oracle to a
    # stored record reproduces them exactly.
    vec = np.round(encode(attrs, prefs, furniture), FLOAT_DECIMALS)
    return vec, oracle_label_from_vector(vec, palette)


def synth_generate(n: int, seed: int = 0, noise: float = 0.05, palette: Palette = DEFAULT_PALETTE) -> Dataset:
    """Generate ``n`` records with oracle labels; each label is flipped to a
    uniformly random other family with probability ``noise``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 <= noise < 1.0:
        raise ValueError(f"noise={noise} outside [0, 1)")
    rng = np.random.Generator(np.random.PCG64(seed))
    records = []
    for _ in range(n):
        vec, label = _random_record(rng, palette)
        if rng.random() < noise:
            other = int(rng.integers(9))
            label = other if other < label else other + 1
        records.append(TrainingRecord(vec, label))
    return Dataset(records)


def split_shuffle(dataset: Dataset, train_fraction: float = 0.8, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Seeded shuffle, then split at floor(n * train_fraction)."""
    if len(dataset) == 0:
        raise ValidationError("cannot split an empty dataset")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction={train_fraction} outside (0, 1)")
    rng = np.random.Generator(np.random.PCG64(seed))
    order = rng.permutation(len(dataset))
    cut = int(math.floor(len(dataset) * train_fraction))
    train = Dataset([dataset.records[i] for i in order[:cut]], dataset.schema_version)
    val = Dataset([dataset.records[i] for i in order[cut:]], dataset.schema_version)
    return train, val


# ---------------------------------------------------------------------------
# Dataset persistence: delimited text, version header, f0..f66 + label columns
# ---------------------------------------------------------------------------

_COLUMN_HEADER = ",".join([f"f{i}" for i in range(N_FEATURES)] + ["label"])


def format_record_row(record: TrainingRecord) -> str:
    values = [f"{v:.{FLOAT_DECIMALS}f}" for v in record.features]
    return ",".join(values + [str(record.label)])


def write_dataset(dataset: Dataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(DATASET_SCHEMA + "\n")
        fh.write(_COLUMN_HEADER + "\n")
        for record in dataset.records:
            fh.write(format_record_row(record) + "\n")


def parse_record_row(line: str, row_number: int) -> TrainingRecord:
    fields = line.split(",")
    if len(fields) != N_FEATURES + 1:
        raise ParseError(f"row {row_number}: expected {N_FEATURES + 1} columns, got {len(fields)}")
    try:
        features = np.array([float(v) for v in fields[:-1]])
        label = int(fields[-1])
    except ValueError as exc:
        raise ParseError(f"row {row_number}: {exc}") from exc
    if not 0 <= label <= 9:
        raise ParseError(f"row {row_number}: label {label} outside [0, 9]")
    return TrainingRecord(features, label)


def read_dataset(path: str | Path) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or lines[0] != DATASET_SCHEMA:
        found = lines[0] if lines else "<empty file>"
        raise ParseError(f"{path}: expected schema header {DATASET_SCHEMA!r}, found {found!r}")
    if len(lines) < 2 or lines[1] != _COLUMN_HEADER:
        raise ParseError(f"{path}: missing column header")
    records = [parse_record_row(line, i + 3) for i, line in enumerate(lines[2:]) if line]
    return Dataset(records)


# ---------------------------------------------------------------------------
# Attribute document (shared by the service and the CLI)
# ---------------------------------------------------------------------------


def attributes_from_document(doc: dict) -> tuple[RoomAttributes, UserPreferences]:
    if not isinstance(doc, dict):
        raise ParseError("attribute document must be a JSON object")
    try:
        attrs = RoomAttributes(
            doc["room_type"], doc["room_size"], doc["room_style"], doc["room_mood"], doc["room_tone"]
        )
        prefs = UserPreferences(
            tuple(int(i) for i in doc.get("color_preferences", ())),
            doc.get("paint_preference", "plain_shades"),
        )
    except KeyError as exc:
        raise ParseError(f"attribute document missing {exc}") from exc
    return attrs, prefs


def attributes_to_document(attrs: RoomAttributes, prefs: UserPreferences) -> dict:
    return {
        "room_type": attrs.room_type,
        "room_size": attrs.room_size,
        "room_style": attrs.room_style,
        "room_mood": attrs.room_mood,
        "room_tone": attrs.room_tone,
        "color_preferences": list(prefs.color_preferences),
        "paint_preference": prefs.paint_preference,
    }
