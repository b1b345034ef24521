"""Near-duplicate removal between train and test embedding sets.

Per class: take the smallest train-test distance theta, then drop every
training item whose distance to some same-class test item is strictly below
(1 + eta) * theta. With eta = 0 nothing is removed, because the minimizing
pair itself sits exactly at theta.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ConfigurationError, MissingClassError, ParseError, ShapeError

METRICS = ("euclidean", "cosine_distance")
_CDIST_NAME = {"euclidean": "euclidean", "cosine_distance": "cosine"}


@dataclass(frozen=True)
class EmbeddingSet:
    vectors: np.ndarray  # (n, dim)
    labels: np.ndarray  # (n,)
    ids: np.ndarray  # (n,)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        if v.ndim != 2:
            raise ShapeError(f"vectors must be 2-d, got shape {v.shape}")
        if not (len(v) == len(self.labels) == len(self.ids)):
            raise ShapeError("vectors, labels and ids must have equal length")
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=int))
        object.__setattr__(self, "ids", np.asarray(self.ids, dtype=int))

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class DedupConfig:
    eta: float = 0.01
    metric: str = "euclidean"

    def __post_init__(self):
        if self.eta < 0:
            raise ConfigurationError(f"eta must be >= 0, got {self.eta}")
        if self.metric not in METRICS:
            raise ConfigurationError(f"metric must be one of {METRICS}, got {self.metric!r}")


@dataclass(frozen=True)
class DedupReport:
    per_class_theta: dict[int, float]
    removed_ids: tuple[int, ...]
    kept_ids: tuple[int, ...]
    classes_without_test: tuple[int, ...] = ()

    def to_json(self) -> str:
        return json.dumps({
            "per_class_theta": {str(c): t for c, t in sorted(self.per_class_theta.items())},
            "removed_ids": list(self.removed_ids),
            "kept_ids": list(self.kept_ids),
            "classes_without_test": list(self.classes_without_test),
        }, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DedupReport":
        obj = json.loads(text)
        return cls(
            per_class_theta={int(c): float(t) for c, t in obj["per_class_theta"].items()},
            removed_ids=tuple(obj["removed_ids"]),
            kept_ids=tuple(obj["kept_ids"]),
            classes_without_test=tuple(obj["classes_without_test"]),
        )


def _class_vectors(es: EmbeddingSet, cls: int) -> np.ndarray:
    return es.vectors[es.labels == cls]


def pairwise_min_distance(train: EmbeddingSet, test: EmbeddingSet, cls: int, metric: str = "euclidean") -> float:
    """Smallest distance over all same-class train/test pairs (theta)."""
    if metric not in METRICS:
        raise ConfigurationError(f"metric must be one of {METRICS}, got {metric!r}")
    a, b = _class_vectors(train, cls), _class_vectors(test, cls)
    if len(a) == 0 or len(b) == 0:
        raise MissingClassError(f"class {cls} missing from {'train' if len(a) == 0 else 'test'} set")
    return float(cdist(a, b, metric=_CDIST_NAME[metric]).min())


def deduplicate(train: EmbeddingSet, test: EmbeddingSet, cfg: DedupConfig = DedupConfig()) -> DedupReport:
    if train.dim != test.dim:
        raise ShapeError(f"train dim {train.dim} != test dim {test.dim}")
    per_class_theta: dict[int, float] = {}
    no_test: list[int] = []
    removed: list[int] = []
    kept: list[int] = []
    for cls in sorted(set(train.labels.tolist())):
        tr_mask = train.labels == cls
        te = _class_vectors(test, cls)
        ids = train.ids[tr_mask]
        if len(te) == 0:
            no_test.append(cls)
            kept.extend(ids.tolist())
            continue
        dists = cdist(train.vectors[tr_mask], te, metric=_CDIST_NAME[cfg.metric]).min(axis=1)
        theta = float(dists.min())
        per_class_theta[cls] = theta
        drop = dists < (1.0 + cfg.eta) * theta
        removed.extend(ids[drop].tolist())
        kept.extend(ids[~drop].tolist())
    return DedupReport(
        per_class_theta=per_class_theta,
        removed_ids=tuple(sorted(removed)),
        kept_ids=tuple(sorted(kept)),
        classes_without_test=tuple(no_test),
    )


def write_embeddings(es: EmbeddingSet, path) -> None:
    lines = [f"{es.dim},{len(es)}"]
    for i in range(len(es)):
        feats = ",".join(f"{v:.17g}" for v in es.vectors[i])
        lines.append(f"{es.ids[i]},{es.labels[i]},{feats}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_embeddings(path) -> EmbeddingSet:
    text = Path(path).read_text().splitlines()
    if not text:
        raise ParseError("empty embeddings file", line=1)
    try:
        dim, count = (int(v) for v in text[0].split(","))
    except ValueError as e:
        raise ParseError(f"bad header: {e}", line=1) from None
    vectors, labels, ids = [], [], []
    for lineno, row in enumerate(text[1:], start=2):
        if not row.strip():
            continue
        parts = row.split(",")
        if len(parts) != 2 + dim:
            raise ParseError(f"expected {2 + dim} fields, got {len(parts)}", line=lineno)
        try:
            ids.append(int(parts[0]))
            labels.append(int(parts[1]))
            vectors.append([float(v) for v in parts[2:]])
        except ValueError as e:
            raise ParseError(str(e), line=lineno) from None
    if len(ids) != count:
        raise ParseError(f"header promised {count} rows, found {len(ids)}", line=1)
    return EmbeddingSet(vectors=np.array(vectors), labels=np.array(labels), ids=np.array(ids))
