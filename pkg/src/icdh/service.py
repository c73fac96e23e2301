"""Pipeline orchestration: consultations, feedback persistence, and retraining.

Storage is a directory of append-only delimited files plus model binaries, so
every state transition is inspectable and diff-able. The serving model lives
behind an atomic reference swap: readers see the old or the new model, never a
mix, and retraining happens outside the lock.
"""
from __future__ import annotations

import base64
import hashlib
import json
import os
import threading
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .cluster import KMeansConfig, dominant_color
from .colors import DEFAULT_PALETTE, Palette, load_palette
from .detection import DetectionSet, fetch_detections_http, filter_furniture, parse_detections_document
from .errors import NotFoundError, SegmentationFailedError, ValidationError
from .features import (
    FurnitureFeature,
    RoomAttributes,
    TrainingRecord,
    UserPreferences,
    attributes_to_document,
    encode,
    format_record_row,
    read_dataset,
    split_shuffle,
)
from .nn import MlpModel, Recommendation, TrainConfig, init_model, load_model, predict_top3, save_model, train
from .wallviz import encode_png, load_image_bytes, recolor, sobel_edges, to_grayscale, wall_mask
from . import wallviz

DATASET_FILE = "dataset.csv"
FEEDBACK_FILE = "feedback.csv"
CURRENT_MODEL_FILE = "CURRENT"


@dataclass
class AppConfig:
    store_dir: Path = Path("store")
    host: str = "127.0.0.1"
    port: int = 8008
    min_confidence: float = 0.5
    kmeans_seed: int = 0
    max_samples: int = 4096
    sobel_threshold: float = wallviz.SOBEL_THRESHOLD
    seed_rows: float = wallviz.SEED_ROWS
    box_margin: int = wallviz.BOX_MARGIN
    detection_timeout: float = 10.0
    train_seed: int = 0
    train_fraction: float = 0.8
    palette_path: Path | None = None
    train: TrainConfig = field(default_factory=TrainConfig)

    @classmethod
    def load(cls, path: str | Path | None = None, env=os.environ) -> "AppConfig":
        """Build a config from an optional JSON file plus ICDH_* environment overrides."""
        values: dict = {}
        if path is not None:
            with open(path, "r", encoding="utf-8") as fh:
                values = json.load(fh)
        train_values = values.pop("train", {})
        config = cls(**values)
        if train_values:
            config.train = TrainConfig(**train_values)
        casts = {
            "store_dir": Path,
            "host": str,
            "port": int,
            "min_confidence": float,
            "kmeans_seed": int,
            "max_samples": int,
            "sobel_threshold": float,
            "seed_rows": float,
            "box_margin": int,
            "detection_timeout": float,
            "train_seed": int,
            "train_fraction": float,
            "palette_path": Path,
        }
        for name, cast in casts.items():
            raw = env.get(f"ICDH_{name.upper()}")
            if raw is not None:
                setattr(config, name, cast(raw))
        return config

    def kmeans_config(self) -> KMeansConfig:
        return KMeansConfig(seed=self.kmeans_seed)

    def palette(self) -> Palette:
        return load_palette(self.palette_path) if self.palette_path else DEFAULT_PALETTE


@dataclass
class ConsultationResult:
    consultation_id: str
    model_version: int
    recommendation: Recommendation
    dominant_colors: list[dict]
    renders: list[bytes]
    warning: str | None = None

    def to_document(self, palette: Palette) -> dict:
        return {
            "consultation_id": self.consultation_id,
            "model_version": self.model_version,
            "recommendations": [
                {"family_id": fid, "name": palette[fid].name, "probability": prob}
                for fid, prob in self.recommendation.entries
            ],
            "dominant_colors": self.dominant_colors,
            "warning": self.warning,
            "render_count": len(self.renders),
        }


class Store:
    """Filesystem layout plus the locks guarding appends and model swaps."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "consultations").mkdir(parents=True, exist_ok=True)
        (self.root / "renders").mkdir(exist_ok=True)
        (self.root / "models").mkdir(exist_ok=True)
        self.dataset_path = self.root / DATASET_FILE
        self.feedback_path = self.root / FEEDBACK_FILE
        self._dataset_lock = threading.Lock()

    def model_path(self, version: int) -> Path:
        return self.root / "models" / f"model_v{version}.bin"

    def current_version(self) -> int | None:
        marker = self.root / "models" / CURRENT_MODEL_FILE
        if not marker.exists():
            return None
        return int(marker.read_text().strip())

    def set_current_version(self, version: int) -> None:
        (self.root / "models" / CURRENT_MODEL_FILE).write_text(f"{version}\n")

    def append_training_record(self, record: TrainingRecord) -> int:
        """Append one row (creating the file with headers if needed); returns the new row count."""
        from .features import DATASET_SCHEMA, N_FEATURES

        with self._dataset_lock:
            if not self.dataset_path.exists():
                header = ",".join([f"f{i}" for i in range(N_FEATURES)] + ["label"])
                self.dataset_path.write_text(DATASET_SCHEMA + "\n" + header + "\n")
            with open(self.dataset_path, "a", encoding="utf-8") as fh:
                fh.write(format_record_row(record) + "\n")
            return self.dataset_rows()

    def dataset_rows(self) -> int:
        if not self.dataset_path.exists():
            return 0
        with open(self.dataset_path, "r", encoding="utf-8") as fh:
            return max(0, sum(1 for line in fh if line.strip()) - 2)

    def append_feedback(self, consultation_id: str, outcome: str, family_id: int | None) -> None:
        if not self.feedback_path.exists():
            self.feedback_path.write_text("consultation_id,outcome,family_id,timestamp\n")
        fam = "" if family_id is None else str(family_id)
        with open(self.feedback_path, "a", encoding="utf-8") as fh:
            fh.write(f"{consultation_id},{outcome},{fam},{time.time():.3f}\n")

    def consultation_path(self, consultation_id: str) -> Path:
        return self.root / "consultations" / f"{consultation_id}.json"

    def write_consultation(self, consultation_id: str, doc: dict) -> None:
        payload = json.dumps(doc, sort_keys=True, indent=2) + "\n"
        self.consultation_path(consultation_id).write_text(payload)

    def read_consultation(self, consultation_id: str) -> dict:
        path = self.consultation_path(consultation_id)
        if not path.exists():
            raise NotFoundError(f"unknown consultation id: {consultation_id}")
        return json.loads(path.read_text())

    def render_path(self, consultation_id: str, index: int) -> Path:
        return self.root / "renders" / f"{consultation_id}_{index}.png"


class AppService:
    """Consultation pipeline + feedback loop over one Store."""

    def __init__(self, config: AppConfig):
        self.config = config
        self.palette = config.palette()
        self.store = Store(config.store_dir)
        self._model_lock = threading.Lock()
        self._model: MlpModel | None = None
        version = self.store.current_version()
        if version is not None:
            self._model = load_model(self.store.model_path(version))

    # -- model access -------------------------------------------------------

    @property
    def model(self) -> MlpModel:
        model = self._model
        if model is None:
            raise NotFoundError("no trained model in the store; train or retrain first")
        return model

    def model_version(self) -> int | None:
        model = self._model
        return None if model is None else model.model_version

    def install_model(self, model: MlpModel) -> None:
        """Persist and atomically swap in an externally trained model."""
        with self._model_lock:
            save_model(model, self.store.model_path(model.model_version))
            self.store.set_current_version(model.model_version)
            self._model = model

    # -- pipeline -----------------------------------------------------------

    def consult(
        self,
        image_bytes: bytes,
        attrs: RoomAttributes,
        prefs: UserPreferences,
        detections_doc: dict | None = None,
        detections_endpoint: str | None = None,
        image_content_type: str = "image/png",
    ) -> ConsultationResult:
        if (detections_doc is None) == (detections_endpoint is None):
            raise ValidationError("exactly one detection source required: inline document or endpoint")
        image = load_image_bytes(image_bytes)
        height, width = image.shape[:2]
        if detections_doc is not None:
            detections = parse_detections_document(detections_doc, image_width=width, image_height=height)
        else:
            detections = fetch_detections_http(
                detections_endpoint, image_bytes, content_type=image_content_type, timeout=self.config.detection_timeout
            )
            detections = DetectionSet(
                width, height, tuple(replace(d, box=d.box.clamped(width, height)) for d in detections.detections)
            )
        kept = filter_furniture(detections, self.config.min_confidence)

        kconfig = self.config.kmeans_config()
        furniture = [
            FurnitureFeature(d.klass, dominant_color(image, d.box, kconfig, self.config.max_samples))
            for d in kept.detections
        ]
        features = encode(attrs, prefs, furniture)
        model = self.model
        recommendation = predict_top3(model, features)

        renders: list[bytes] = []
        warning = None
        try:
            edges = sobel_edges(to_grayscale(image), self.config.sobel_threshold)
            mask = wall_mask(
                edges,
                [d.box for d in kept.detections],
                seed_rows=self.config.seed_rows,
                box_margin=self.config.box_margin,
            )
            for fid, _ in recommendation.entries:
                renders.append(encode_png(recolor(image, mask, self.palette[fid])))
        except SegmentationFailedError as exc:
            warning = str(exc)

        consultation_id = self._consultation_id(features, model.model_version, image_bytes)
        result = ConsultationResult(
            consultation_id=consultation_id,
            model_version=model.model_version,
            recommendation=recommendation,
            dominant_colors=[
                {"class": item.klass.value, "color": list(item.color.as_tuple())} for item in furniture
            ],
            renders=renders,
            warning=warning,
        )
        self._persist(result, attrs, prefs, features)
        return result

    @staticmethod
    def _consultation_id(features: np.ndarray, model_version: int, image_bytes: bytes) -> str:
        digest = hashlib.sha256()
        digest.update(features.astype("<f8").tobytes())
        digest.update(str(model_version).encode())
        digest.update(hashlib.sha256(image_bytes).digest())
        return digest.hexdigest()[:16]

    def _persist(self, result: ConsultationResult, attrs, prefs, features: np.ndarray) -> None:
        doc = result.to_document(self.palette)
        doc["attributes"] = attributes_to_document(attrs, prefs)
        doc["features"] = [round(float(v), 6) for v in features]
        doc["renders"] = []
        for i, png in enumerate(result.renders):
            path = self.store.render_path(result.consultation_id, i)
            path.write_bytes(png)
            doc["renders"].append(path.name)
        self.store.write_consultation(result.consultation_id, doc)

    def get_consultation(self, consultation_id: str) -> dict:
        return self.store.read_consultation(consultation_id)

    # -- feedback + retraining ----------------------------------------------

    def record_feedback(self, consultation_id: str, outcome: str, family_id: int | None = None) -> dict:
        doc = self.store.read_consultation(consultation_id)
        if outcome == "accepted":
            recommended = [entry["family_id"] for entry in doc["recommendations"]]
            if family_id not in recommended:
                raise ValidationError(f"accepted family {family_id} not among recommendations {recommended}")
            record = TrainingRecord(np.array(doc["features"], dtype=np.float64), int(family_id))
            rows = self.store.append_training_record(record)
        elif outcome == "rejected":
            family_id = None
            rows = self.store.dataset_rows()
        else:
            raise ValidationError(f"outcome must be 'accepted' or 'rejected', got {outcome!r}")
        self.store.append_feedback(consultation_id, outcome, family_id)
        return {"status": "ok", "outcome": outcome, "dataset_rows": rows}

    def retrain(self, seed: int | None = None) -> int:
        """Retrain from the full stored dataset and swap the new model in atomically."""
        if self.store.dataset_rows() == 0:
            raise ValidationError("cannot retrain: the store has no dataset rows")
        seed = self.config.train_seed if seed is None else seed
        dataset = read_dataset(self.store.dataset_path)
        cut = int(len(dataset) * self.config.train_fraction)
        if 0 < cut < len(dataset):
            train_set, val_set = split_shuffle(dataset, self.config.train_fraction, seed=seed)
        else:
            # too few rows for a split; train and validate on everything
            train_set = val_set = dataset
        new_version = (self.model_version() or 0) + 1
        model = init_model(seed)
        config = replace(self.config.train, seed=seed)
        model, _history = train(model, train_set, val_set, config)
        model.model_version = new_version
        self.install_model(model)
        return new_version

    def describe(self) -> dict:
        return {
            "model_version": self.model_version(),
            "train_config": asdict(self.config.train),
            "palette": [
                {"id": f.id, "name": f.name, "representative": list(f.representative.as_tuple())}
                for f in self.palette
            ],
        }


def consultation_response(result: ConsultationResult, palette: Palette) -> dict:
    """HTTP-facing document: the stored fields plus base64 renders."""
    doc = result.to_document(palette)
    doc["renders_b64"] = [base64.b64encode(png).decode("ascii") for png in result.renders]
    return doc
