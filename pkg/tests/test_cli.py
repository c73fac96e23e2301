import json

import pytest

from icdh.cli import main
from icdh.features import read_dataset
from icdh.nn import load_model

from fixtures import write_fixture_files


@pytest.fixture
def fixture_dir(tmp_path):
    write_fixture_files(tmp_path / "fixtures")
    return tmp_path / "fixtures"


def test_generate_data(tmp_path):
    out = tmp_path / "data.csv"
    assert main(["generate-data", "--n", "25", "--seed", "3", "--out", str(out)]) == 0
    dataset = read_dataset(out)
    assert len(dataset) == 25


def test_generate_then_train(tmp_path, capsys):
    data = tmp_path / "data.csv"
    model = tmp_path / "model.bin"
    main(["generate-data", "--n", "40", "--seed", "1", "--out", str(data)])
    assert main([
        "train", "--data", str(data), "--out", str(model),
        "--epochs", "2", "--seed", "1",
    ]) == 0
    loaded = load_model(model)
    assert loaded.dims == (67, 256, 256, 256, 10)
    history = (tmp_path / "model.bin.history.csv").read_text().splitlines()
    assert history[0] == "epoch,train_loss,val_accuracy"
    assert len(history) == 3  # header + 2 epochs
    assert "final val accuracy" in capsys.readouterr().out


def trained_store(tmp_path, fixture_dir):
    data = tmp_path / "data.csv"
    model = tmp_path / "model.bin"
    main(["generate-data", "--n", "40", "--seed", "1", "--out", str(data)])
    main(["train", "--data", str(data), "--out", str(model), "--epochs", "2", "--seed", "1"])
    store = tmp_path / "store"
    out = tmp_path / "out"
    code = main([
        "consult",
        "--image", str(fixture_dir / "room.png"),
        "--detections", str(fixture_dir / "detections.json"),
        "--attrs", str(fixture_dir / "attrs.json"),
        "--model", str(model),
        "--store", str(store),
        "--out", str(out),
    ])
    assert code == 0
    return store, out


def test_consult_writes_renders_and_result(tmp_path, fixture_dir):
    _, out = trained_store(tmp_path, fixture_dir)
    result = json.loads((out / "result.json").read_text())
    assert len(result["recommendations"]) == 3
    renders = sorted(out.glob("render_*.png"))
    assert len(renders) == 3
    assert result["renders"] == [p.name for p in sorted(out.glob("render_*.png"), key=lambda p: p.name)]


def test_feedback_and_retrain_flow(tmp_path, fixture_dir, capsys):
    store, out = trained_store(tmp_path, fixture_dir)
    result = json.loads((out / "result.json").read_text())
    family = result["recommendations"][0]["family_id"]
    capsys.readouterr()  # drop output from the setup commands

    code = main([
        "feedback", "--store", str(store),
        "--consultation", result["consultation_id"],
        "--accept", str(family),
    ])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["dataset_rows"] == 1

    code = main(["retrain", "--store", str(store), "--seed", "4"])
    assert code == 0
    assert "model_version 2" in capsys.readouterr().out


def test_reject_flow(tmp_path, fixture_dir, capsys):
    store, out = trained_store(tmp_path, fixture_dir)
    result = json.loads((out / "result.json").read_text())
    capsys.readouterr()  # drop output from the setup commands
    code = main([
        "feedback", "--store", str(store),
        "--consultation", result["consultation_id"], "--reject",
    ])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["dataset_rows"] == 0


def test_visualize(tmp_path, fixture_dir):
    out = tmp_path / "viz"
    code = main([
        "visualize",
        "--image", str(fixture_dir / "room.png"),
        "--detections", str(fixture_dir / "detections.json"),
        "--family", "8",
        "--out", str(out),
    ])
    assert code == 0
    assert (out / "render_blue.png").exists()


def test_missing_data_file_exit_code(tmp_path):
    code = main(["train", "--data", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "m.bin")])
    assert code == 3


def test_error_exit_code_on_bad_feedback(tmp_path, fixture_dir, capsys):
    store, _ = trained_store(tmp_path, fixture_dir)
    code = main(["feedback", "--store", str(store), "--consultation", "nope", "--reject"])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_unknown_command_exits():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
