"""Command-line entry points for the pipeline stages."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import IcdhError
from .features import (
    attributes_from_document,
    read_dataset,
    split_shuffle,
    synth_generate,
    write_dataset,
)
from .nn import TrainConfig, init_model, load_model, save_model, train
from .service import AppConfig, AppService
from .wallviz import load_image, recolor, save_png, sobel_edges, to_grayscale, wall_mask


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="icdh", description="Interior color design helper")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-data", help="generate a synthetic training dataset")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.05)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("train", help="train a model on a dataset file")
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--history", type=Path, default=None, help="history CSV path (default: <out>.history.csv)")

    p = sub.add_parser("consult", help="run one consultation against a store")
    p.add_argument("--image", type=Path, required=True)
    p.add_argument("--detections", type=Path, required=True)
    p.add_argument("--attrs", type=Path, required=True)
    p.add_argument("--model", type=Path, default=None, help="model file to install into the store first")
    p.add_argument("--store", type=Path, default=Path("store"))
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("visualize", help="recolor the segmented wall with one family")
    p.add_argument("--image", type=Path, required=True)
    p.add_argument("--detections", type=Path, default=None)
    p.add_argument("--family", type=int, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("feedback", help="record feedback for a consultation")
    p.add_argument("--store", type=Path, default=Path("store"))
    p.add_argument("--consultation", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--accept", type=int, default=None, metavar="FAMILY_ID")
    group.add_argument("--reject", action="store_true")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("retrain", help="retrain the store's model from its dataset")
    p.add_argument("--store", type=Path, default=Path("store"))
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--store", type=Path, default=Path("store"))
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--seed", type=int, default=0)

    return parser


def _cmd_generate_data(args) -> int:
    dataset = synth_generate(args.n, seed=args.seed, noise=args.noise)
    write_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} records to {args.out}")
    return 0


def _cmd_train(args) -> int:
    dataset = read_dataset(args.data)
    train_set, val_set = split_shuffle(dataset, args.train_fraction, seed=args.seed)
    config = TrainConfig(
        epochs=args.epochs,
        learning_rate=args.lr,
        dropout_rate=args.dropout,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    model = init_model(args.seed)
    model, history = train(model, train_set, val_set, config)
    save_model(model, args.out)
    history_path = args.history or args.out.with_suffix(args.out.suffix + ".history.csv")
    history.to_csv(history_path)
    print(
        f"trained {config.epochs} epochs on {len(train_set)}/{len(val_set)} records; "
        f"final val accuracy {history.val_accuracy[-1]:.3f}; model {args.out}, history {history_path}"
    )
    return 0


def _service(store: Path, config_path: Path | None = None) -> AppService:
    config = AppConfig.load(config_path)
    config.store_dir = store
    return AppService(config)


def _cmd_consult(args) -> int:
    service = _service(args.store)
    if args.model is not None:
        service.install_model(load_model(args.model))
    image_bytes = args.image.read_bytes()
    detections_doc = json.loads(args.detections.read_text())
    attrs, prefs = attributes_from_document(json.loads(args.attrs.read_text()))
    result = service.consult(image_bytes, attrs, prefs, detections_doc=detections_doc)

    args.out.mkdir(parents=True, exist_ok=True)
    doc = result.to_document(service.palette)
    doc["renders"] = []
    for i, png in enumerate(result.renders):
        name = f"render_{i}_{service.palette[result.recommendation.entries[i][0]].name}.png"
        (args.out / name).write_bytes(png)
        doc["renders"].append(name)
    (args.out / "result.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    print(f"consultation {result.consultation_id}: " + ", ".join(
        f"{service.palette[fid].name} ({prob:.3f})" for fid, prob in result.recommendation.entries
    ))
    if result.warning:
        print(f"warning: {result.warning}")
    return 0


def _cmd_visualize(args) -> int:
    from .colors import DEFAULT_PALETTE
    from .detection import load_detections_file

    image = load_image(args.image)
    height, width = image.shape[:2]
    boxes = []
    if args.detections is not None:
        boxes = [d.box for d in load_detections_file(args.detections, width, height).detections]
    edges = sobel_edges(to_grayscale(image))
    mask = wall_mask(edges, boxes)
    family = DEFAULT_PALETTE[args.family]
    args.out.mkdir(parents=True, exist_ok=True)
    out_path = args.out / f"render_{family.name}.png"
    save_png(recolor(image, mask, family), out_path)
    print(f"wrote {out_path}")
    return 0


def _cmd_feedback(args) -> int:
    service = _service(args.store)
    if args.reject:
        ack = service.record_feedback(args.consultation, "rejected")
    else:
        ack = service.record_feedback(args.consultation, "accepted", args.accept)
    print(json.dumps(ack))
    return 0


def _cmd_retrain(args) -> int:
    service = _service(args.store)
    version = service.retrain(args.seed)
    print(f"model_version {version}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    config = AppConfig.load(args.config)
    config.store_dir = args.store
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    service = AppService(config)
    uvicorn.run(create_app(service), host=config.host, port=config.port, log_level="warning")
    return 0


_COMMANDS = {
    "generate-data": _cmd_generate_data,
    "train": _cmd_train,
    "consult": _cmd_consult,
    "visualize": _cmd_visualize,
    "feedback": _cmd_feedback,
    "retrain": _cmd_retrain,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except IcdhError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
