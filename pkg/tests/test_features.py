import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from icdh.colors import DEFAULT_PALETTE, Rgb8, rgb_to_hsl
from icdh.detection import FurnitureClass
from icdh.errors import ParseError, ValidationError
from icdh.features import (
    N_FEATURES,
    PAINT_PREFERENCES,
    ROOM_MOODS,
    ROOM_SIZES,
    ROOM_STYLES,
    ROOM_TONES,
    ROOM_TYPES,
    Dataset,
    FurnitureFeature,
    RoomAttributes,
    TrainingRecord,
    UserPreferences,
    attributes_from_document,
    attributes_to_document,
    decode_vector,
    encode,
    oracle_label,
    oracle_label_from_vector,
    read_dataset,
    split_shuffle,
    synth_generate,
    write_dataset,
)

ATTRS = RoomAttributes("living_room", "medium", "modern", "warm", "light")
NO_PREFS = UserPreferences()


def couch(color):
    return FurnitureFeature(FurnitureClass.COUCH, color)


# -- encoding ----------------------------------------------------------------


def test_encode_length():
    assert encode(ATTRS, NO_PREFS, []).shape == (N_FEATURES,) == (67,)
    assert 3 + 3 + 4 + 5 + 3 + 10 + 3 + 9 * 4 == 67


def test_encode_room_type_block():
    vec = encode(RoomAttributes("bedroom", "small", "classic", "cool", "dark"), NO_PREFS, [])
    assert vec[0:3].tolist() == [0.0, 1.0, 0.0]


def test_encode_same_class_averaging():
    vec = encode(ATTRS, NO_PREFS, [
        FurnitureFeature(FurnitureClass.CHAIR, Rgb8(0, 0, 0)),
        FurnitureFeature(FurnitureClass.CHAIR, Rgb8(255, 255, 255)),
    ])
    slot = 31 + 4 * FurnitureClass.CHAIR.ordinal
    assert vec[slot] == 1.0
    assert vec[slot + 1 : slot + 4].tolist() == [0.5, 0.5, 0.5]


def test_encode_absent_slots_zero():
    vec = encode(ATTRS, NO_PREFS, [couch(Rgb8(10, 20, 30))])
    for slot in range(9):
        base = 31 + 4 * slot
        if slot == FurnitureClass.COUCH.ordinal:
            assert vec[base] == 1.0
        else:
            assert vec[base : base + 4].tolist() == [0.0, 0.0, 0.0, 0.0]


attrs_strategy = st.builds(
    RoomAttributes,
    st.sampled_from(ROOM_TYPES),
    st.sampled_from(ROOM_SIZES),
    st.sampled_from(ROOM_STYLES),
    st.sampled_from(ROOM_MOODS),
    st.sampled_from(ROOM_TONES),
)
prefs_strategy = st.builds(
    UserPreferences,
    st.lists(st.integers(0, 9), max_size=4, unique=True).map(tuple),
    st.sampled_from(PAINT_PREFERENCES),
)
furniture_strategy = st.lists(
    st.builds(
        FurnitureFeature,
        st.sampled_from(list(FurnitureClass)),
        st.builds(Rgb8, st.integers(0, 255), st.integers(0, 255), st.integers(0, 255)),
    ),
    max_size=5,
)


@given(attrs_strategy, prefs_strategy, furniture_strategy)
@settings(max_examples=200, deadline=None)
def test_encode_invariants(attrs, prefs, furniture):
    vec = encode(attrs, prefs, furniture)
    assert vec.shape == (67,)
    for block in (vec[0:3], vec[3:6], vec[6:10], vec[10:15], vec[15:18], vec[28:31]):
        assert block.sum() == 1.0
    assert vec[18:28].sum() == len(prefs.color_preferences)
    present_slots = {item.klass.ordinal for item in furniture}
    for slot in range(9):
        base = 31 + 4 * slot
        if slot in present_slots:
            assert vec[base] == 1.0
        else:
            assert np.all(vec[base : base + 4] == 0.0)


@given(attrs_strategy, prefs_strategy, furniture_strategy)
@settings(max_examples=100, deadline=None)
def test_decode_inverts_encode(attrs, prefs, furniture):
    vec = encode(attrs, prefs, furniture)
    back_attrs, back_prefs, presence, colors = decode_vector(vec)
    assert back_attrs == attrs
    assert back_prefs == prefs
    assert set(np.nonzero(presence)[0]) == {item.klass.ordinal for item in furniture}


def test_attribute_validation():
    with pytest.raises(ValidationError):
        RoomAttributes("garage", "medium", "modern", "warm", "light")
    with pytest.raises(ValidationError):
        UserPreferences((3, 3))
    with pytest.raises(ValidationError):
        UserPreferences((12,))


# -- oracle ------------------------------------------------------------------


def anchor(hue_name):
    return rgb_to_hsl(DEFAULT_PALETTE.by_name(hue_name).representative).h


def circ(a, b):
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def test_oracle_no_furniture_dark_tone_gives_white():
    # default hue 30 -> complement 210 -> candidate blue (216), which is not warm
    attrs = RoomAttributes("living_room", "medium", "modern", "warm", "dark")
    assert oracle_label(attrs, NO_PREFS, []) == DEFAULT_PALETTE.by_name("white").id


def test_oracle_dark_tone_warm_candidate_gives_beige():
    # blue furniture -> anchor 216 -> complement 36 -> beige (38.57), which is warm
    attrs = RoomAttributes("living_room", "medium", "modern", "warm", "dark")
    blue_rep = DEFAULT_PALETTE.by_name("blue").representative
    assert oracle_label(attrs, NO_PREFS, [couch(blue_rep)]) == DEFAULT_PALETTE.by_name("beige").id


def test_oracle_red_couch_complement():
    # red rep anchor 2.2 -> complement 182.2; circular distances over the
    # non-neutral anchors put blue (216) nearest, computed independently here.
    attrs = RoomAttributes("living_room", "medium", "modern", "warm", "vibrant")
    red_rep = DEFAULT_PALETTE.by_name("red").representative
    target = (anchor("red") + 180.0) % 360.0
    chromatic = ["beige", "yellow", "orange", "red", "pink", "green", "blue", "purple"]
    expected = min(chromatic, key=lambda name: (circ(anchor(name), target), DEFAULT_PALETTE.by_name(name).id))
    assert expected == "blue"
    assert oracle_label(attrs, NO_PREFS, [couch(red_rep)]) == DEFAULT_PALETTE.by_name("blue").id


def test_oracle_cool_mood_shifts_to_cool_set():
    # blue furniture -> candidate beige; cool mood pulls it to the nearest cool anchor
    attrs = RoomAttributes("living_room", "medium", "modern", "cool", "light")
    blue_rep = DEFAULT_PALETTE.by_name("blue").representative
    dists = {name: circ(anchor(name), anchor("beige")) for name in ("green", "blue", "purple")}
    assert min(dists, key=dists.get) == "green"
    assert oracle_label(attrs, NO_PREFS, [couch(blue_rep)]) == DEFAULT_PALETTE.by_name("green").id


def test_oracle_singleton_preference_always_wins():
    attrs = RoomAttributes("kitchen", "big", "elegant", "playful", "vibrant")
    for furniture in ([], [couch(Rgb8(200, 30, 40))]):
        assert oracle_label(attrs, UserPreferences((8,)), furniture) == 8


def test_oracle_preference_nearest_to_candidate():
    # no furniture -> candidate blue (216); yellow (49.6) vs purple (270): purple is nearer
    attrs = RoomAttributes("living_room", "medium", "modern", "warm", "light")
    yellow = DEFAULT_PALETTE.by_name("yellow").id
    purple = DEFAULT_PALETTE.by_name("purple").id
    assert circ(anchor("purple"), 216.0) < circ(anchor("yellow"), 216.0)
    assert oracle_label(attrs, UserPreferences((yellow, purple)), []) == purple


def test_oracle_neutral_furniture_contributes_no_hue():
    attrs = RoomAttributes("living_room", "medium", "modern", "warm", "light")
    gray_rep = DEFAULT_PALETTE.by_name("gray").representative
    assert oracle_label(attrs, NO_PREFS, [couch(gray_rep)]) == oracle_label(attrs, NO_PREFS, [])


def test_oracle_total_and_deterministic_over_attribute_space():
    combos = itertools.product(ROOM_TYPES, ROOM_SIZES, ROOM_STYLES, ROOM_MOODS, ROOM_TONES)
    for room_type, size, style, mood, tone in combos:
        attrs = RoomAttributes(room_type, size, style, mood, tone)
        label = oracle_label(attrs, NO_PREFS, [])
        assert 0 <= label <= 9
        assert oracle_label(attrs, NO_PREFS, []) == label


def test_oracle_from_vector_matches_direct():
    rng = np.random.default_rng(7)
    for _ in range(100):
        attrs = RoomAttributes(
            str(rng.choice(ROOM_TYPES)), str(rng.choice(ROOM_SIZES)), str(rng.choice(ROOM_STYLES)),
            str(rng.choice(ROOM_MOODS)), str(rng.choice(ROOM_TONES)),
        )
        prefs = UserPreferences(tuple(sorted(int(i) for i in rng.choice(10, rng.integers(0, 3), replace=False))))
        furniture = [
            FurnitureFeature(list(FurnitureClass)[int(c)], Rgb8(*[int(v) for v in rng.integers(0, 256, 3)]))
            for c in rng.choice(9, rng.integers(0, 4), replace=False)
        ]
        assert oracle_label_from_vector(encode(attrs, prefs, furniture)) == oracle_label(attrs, prefs, furniture)


# -- synthetic generation ----------------------------------------------------


def test_synth_count():
    assert len(synth_generate(1000, seed=7)) == 1000


def test_synth_deterministic():
    a = synth_generate(100, seed=5, noise=0.05)
    b = synth_generate(100, seed=5, noise=0.05)
    assert a == b


def test_synth_noiseless_labels_match_oracle():
    dataset = synth_generate(400, seed=11, noise=0.0)
    for record in dataset.records:
        assert record.label == oracle_label_from_vector(record.features)


def test_synth_noise_flips_expected_fraction():
    dataset = synth_generate(2000, seed=2, noise=0.05)
    flipped = sum(
        1 for record in dataset.records if record.label != oracle_label_from_vector(record.features)
    )
    assert 0.03 <= flipped / 2000 <= 0.07


def test_synth_validates_arguments():
    with pytest.raises(ValueError):
        synth_generate(0)
    with pytest.raises(ValueError):
        synth_generate(10, noise=1.0)


# -- splitting ----------------------------------------------------------------


def test_split_sizes():
    dataset = synth_generate(1000, seed=1)
    train, val = split_shuffle(dataset, 0.8, seed=0)
    assert (len(train), len(val)) == (800, 200)


def test_split_floor_exact():
    dataset = synth_generate(7, seed=1)
    train, val = split_shuffle(dataset, 0.8, seed=0)
    assert (len(train), len(val)) == (5, 2)


def test_split_deterministic_and_partition():
    dataset = synth_generate(50, seed=4)
    t1, v1 = split_shuffle(dataset, 0.8, seed=9)
    t2, v2 = split_shuffle(dataset, 0.8, seed=9)
    assert t1 == t2 and v1 == v2

    def keyset(records):
        return sorted((r.features.tobytes(), r.label) for r in records)

    assert keyset(t1.records + v1.records) == keyset(dataset.records)


def test_split_rejects_bad_inputs():
    with pytest.raises(ValidationError):
        split_shuffle(Dataset([]), 0.8)
    with pytest.raises(ValueError):
        split_shuffle(synth_generate(5, seed=0), 1.0)


# -- dataset persistence -------------------------------------------------------


def test_dataset_round_trip(tmp_path):
    dataset = synth_generate(1000, seed=7, noise=0.05)
    path = tmp_path / "data.csv"
    write_dataset(dataset, path)
    assert read_dataset(path) == dataset


def test_dataset_header_only_round_trip(tmp_path):
    path = tmp_path / "empty.csv"
    write_dataset(Dataset([]), path)
    loaded = read_dataset(path)
    assert len(loaded) == 0


def test_dataset_wrong_column_count_names_row(tmp_path):
    dataset = synth_generate(3, seed=0)
    path = tmp_path / "data.csv"
    write_dataset(dataset, path)
    lines = path.read_text().splitlines()
    lines[3] = lines[3].rsplit(",", 1)[0]  # drop a column from row 4
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError, match="row 4"):
        read_dataset(path)


def test_dataset_bad_header(tmp_path):
    path = tmp_path / "data.csv"
    path.write_text("not_a_header\n")
    with pytest.raises(ParseError, match="schema header"):
        read_dataset(path)
    path.write_text("")
    with pytest.raises(ParseError, match="schema header"):
        read_dataset(path)


def test_dataset_bad_label(tmp_path):
    dataset = synth_generate(2, seed=0)
    path = tmp_path / "data.csv"
    write_dataset(dataset, path)
    lines = path.read_text().splitlines()
    lines[2] = lines[2].rsplit(",", 1)[0] + ",12"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(ParseError, match="label"):
        read_dataset(path)


# -- attribute documents -------------------------------------------------------


def test_attributes_document_round_trip():
    attrs = RoomAttributes("kitchen", "small", "elegant", "casual", "vibrant")
    prefs = UserPreferences((2, 5), "texture")
    doc = attributes_to_document(attrs, prefs)
    back_attrs, back_prefs = attributes_from_document(doc)
    assert back_attrs == attrs and back_prefs == prefs


def test_attributes_document_missing_field():
    with pytest.raises(ParseError, match="room_size"):
        attributes_from_document({"room_type": "kitchen"})
