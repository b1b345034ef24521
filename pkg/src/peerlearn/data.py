"""Synthetic noisy datasets: Gaussian class clusters, label-flip noise,
out-of-domain contamination, and long-tailed subsampling.

Every sample keeps its hidden clean label so downstream metrics can score
selections; trainers only ever look at `observed_label`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ParseError

FLIP_MODELS = ("symmetric", "pairwise")


@dataclass(frozen=True)
class Sample:
    features: np.ndarray
    observed_label: int
    clean_label: int
    is_out_of_domain: bool = False
    id: int = 0


@dataclass(frozen=True)
class Dataset:
    samples: tuple[Sample, ...]
    num_classes: int

    def __post_init__(self):
        for s in self.samples:
            if not (0 <= s.observed_label < self.num_classes and 0 <= s.clean_label < self.num_classes):
                raise ConfigurationError(
                    f"sample {s.id}: labels ({s.observed_label}, {s.clean_label}) "
                    f"out of range for {self.num_classes} classes"
                )

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def dim(self) -> int:
        return len(self.samples[0].features) if self.samples else 0

    @property
    def class_counts(self) -> np.ndarray:
        counts = np.zeros(self.num_classes, dtype=int)
        for s in self.samples:
            counts[s.observed_label] += 1
        return counts


@dataclass(frozen=True)
class NoiseSpec:
    cross_category_rate: float = 0.0
    flip_model: str = "symmetric"
    cross_domain_rate: float = 0.0
    imbalance_factor: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.cross_category_rate < 1.0:
            raise ConfigurationError(f"cross_category_rate out of [0, 1): {self.cross_category_rate}")
        if not 0.0 <= self.cross_domain_rate < 1.0:
            raise ConfigurationError(f"cross_domain_rate out of [0, 1): {self.cross_domain_rate}")
        if self.cross_category_rate + self.cross_domain_rate >= 1.0:
            raise ConfigurationError("cross_category_rate + cross_domain_rate must be < 1")
        if self.flip_model not in FLIP_MODELS:
            raise ConfigurationError(f"flip_model must be one of {FLIP_MODELS}, got {self.flip_model!r}")
        if self.imbalance_factor < 1.0:
            raise ConfigurationError(f"imbalance_factor must be >= 1, got {self.imbalance_factor}")


def features_matrix(samples) -> np.ndarray:
    return np.stack([s.features for s in samples])


def observed_labels(samples) -> np.ndarray:
    return np.array([s.observed_label for s in samples], dtype=int)


def clean_labels(samples) -> np.ndarray:
    return np.array([s.clean_label for s in samples], dtype=int)


def in_domain_mask(samples) -> np.ndarray:
    return np.array([not s.is_out_of_domain for s in samples], dtype=bool)


def generate_gaussian_dataset(
    num_classes: int, per_class: int, dim: int, separation: float, seed: int
) -> Dataset:
    """Unit-variance isotropic clusters around per-class centers drawn at
    scale `separation`. Larger separation = easier problem."""
    if num_classes < 2 or per_class < 1 or dim < 2:
        raise ConfigurationError(
            f"need num_classes >= 2, per_class >= 1, dim >= 2; "
            f"got ({num_classes}, {per_class}, {dim})"
        )
    rng = np.random.default_rng(seed)
    # centers on the unit sphere scaled by `separation`, so the knob sets the
    # class-center distance directly (independent of dim)
    centers = rng.standard_normal((num_classes, dim))
    centers *= separation / np.linalg.norm(centers, axis=1, keepdims=True)
    samples = []
    for c in range(num_classes):
        X = centers[c] + rng.standard_normal((per_class, dim))
        for row in X:
            samples.append(Sample(features=row, observed_label=c, clean_label=c, id=len(samples)))
    return Dataset(samples=tuple(samples), num_classes=num_classes)


def inject_cross_category_noise(ds: Dataset, rate: float, flip_model: str, seed: int) -> Dataset:
    """Relabel exactly floor(rate * n) uniformly chosen in-domain samples.

    symmetric: new label uniform over the other C-1 classes.
    pairwise:  new label (c + 1) mod C.
    Clean labels are never touched; OOD samples are never selected.
    """
    if not 0.0 <= rate < 1.0:
        raise ConfigurationError(f"rate out of [0, 1): {rate}")
    if flip_model not in FLIP_MODELS:
        raise ConfigurationError(f"flip_model must be one of {FLIP_MODELS}, got {flip_model!r}")
    n_flip = int(rate * len(ds))
    if n_flip == 0:
        return ds
    eligible = [i for i, s in enumerate(ds.samples) if not s.is_out_of_domain]
    if n_flip > len(eligible):
        raise ConfigurationError(f"cannot flip {n_flip} labels with only {len(eligible)} in-domain samples")
    rng = np.random.default_rng(seed)
    chosen = set(rng.choice(len(eligible), size=n_flip, replace=False).tolist())
    chosen = {eligible[i] for i in chosen}
    C = ds.num_classes
    new_samples = []
    for i, s in enumerate(ds.samples):
        if i not in chosen:
            new_samples.append(s)
            continue
        if flip_model == "pairwise":
            new_label = (s.observed_label + 1) % C
        else:
            offset = int(rng.integers(1, C))
            new_label = (s.observed_label + offset) % C
        new_samples.append(replace(s, observed_label=new_label))
    return Dataset(samples=tuple(new_samples), num_classes=C)


def inject_cross_domain_noise(ds: Dataset, rate: float, seed: int) -> Dataset:
    """Append out-of-domain samples so they form fraction ~rate of the result.

    OOD features are uniform over a box 3x the extent of the existing data;
    each gets a uniformly random observed label and (as bookkeeping) a clean
    label equal to it, flagged is_out_of_domain.
    """
    if not 0.0 <= rate < 1.0:
        raise ConfigurationError(f"rate out of [0, 1): {rate}")
    if rate == 0.0 or len(ds) == 0:
        return ds
    n_new = int(np.ceil(rate * len(ds) / (1.0 - rate)))
    rng = np.random.default_rng(seed)
    X = features_matrix(ds.samples)
    lo, hi = X.min(axis=0), X.max(axis=0)
    center, half = (lo + hi) / 2.0, (hi - lo) / 2.0
    box_lo, box_hi = center - 3.0 * half, center + 3.0 * half
    next_id = max(s.id for s in ds.samples) + 1
    new_samples = list(ds.samples)
    for k in range(n_new):
        feats = rng.uniform(box_lo, box_hi)
        label = int(rng.integers(ds.num_classes))
        new_samples.append(
            Sample(features=feats, observed_label=label, clean_label=label,
                   is_out_of_domain=True, id=next_id + k)
        )
    return Dataset(samples=tuple(new_samples), num_classes=ds.num_classes)


def apply_imbalance(ds: Dataset, factor: float, seed: int) -> Dataset:
    """Subsample classes on an exponential long-tail: class c keeps
    ceil(n_max * factor^(-c / (C-1))) samples."""
    if factor < 1.0:
        raise ConfigurationError(f"imbalance factor must be >= 1, got {factor}")
    if factor == 1.0:
        return ds
    counts = ds.class_counts
    n_max = int(counts.max())
    C = ds.num_classes
    rng = np.random.default_rng(seed)
    keep: set[int] = set()
    for c in range(C):
        idx = [i for i, s in enumerate(ds.samples) if s.observed_label == c]
        target = int(np.ceil(n_max * factor ** (-c / (C - 1))))
        target = min(target, len(idx))
        kept = rng.choice(len(idx), size=target, replace=False)
        keep.update(idx[i] for i in sorted(kept.tolist()))
    new_samples = [s for i, s in enumerate(ds.samples) if i in keep]
    return Dataset(samples=tuple(new_samples), num_classes=C)


def imbalance_ratio(ds: Dataset) -> float:
    counts = ds.class_counts
    if counts.min() == 0:
        raise ConfigurationError("imbalance ratio undefined: some class has no samples")
    return float(counts.max()) / float(counts.min())


def merge_datasets(a: Dataset, b: Dataset) -> Dataset:
    if a.num_classes != b.num_classes:
        raise ConfigurationError(f"cannot merge datasets with {a.num_classes} vs {b.num_classes} classes")
    merged = [replace(s, id=i) for i, s in enumerate(a.samples + b.samples)]
    return Dataset(samples=tuple(merged), num_classes=a.num_classes)


def split_train_test(ds: Dataset, test_per_class: int) -> tuple[Dataset, Dataset]:
    """Hold out the last `test_per_class` samples of each class (clean split:
    test samples keep their clean labels and carry no injected noise)."""
    if test_per_class < 1:
        raise ConfigurationError(f"test_per_class must be >= 1, got {test_per_class}")
    per_class_seen: dict[int, list[int]] = {c: [] for c in range(ds.num_classes)}
    for i, s in enumerate(ds.samples):
        per_class_seen[s.observed_label].append(i)
    test_idx = set()
    for c, idx in per_class_seen.items():
        if len(idx) <= test_per_class:
            raise ConfigurationError(f"class {c} has only {len(idx)} samples, cannot hold out {test_per_class}")
        test_idx.update(idx[-test_per_class:])
    train = [s for i, s in enumerate(ds.samples) if i not in test_idx]
    test = [s for i, s in enumerate(ds.samples) if i in test_idx]
    train = [replace(s, id=i) for i, s in enumerate(train)]
    test = [replace(s, id=i) for i, s in enumerate(test)]
    return (Dataset(samples=tuple(train), num_classes=ds.num_classes),
            Dataset(samples=tuple(test), num_classes=ds.num_classes))


def apply_noise(ds: Dataset, spec: NoiseSpec) -> Dataset:
    """Cross-category flips, then OOD contamination, then the long tail."""
    out = inject_cross_category_noise(ds, spec.cross_category_rate, spec.flip_model, spec.seed)
    out = inject_cross_domain_noise(out, spec.cross_domain_rate, spec.seed + 1)
    out = apply_imbalance(out, spec.imbalance_factor, spec.seed + 2)
    return out


def write_dataset(ds: Dataset, path) -> None:
    """CSV: header `num_classes,dim,count`, one row per sample with features
    at 17 significant digits (lossless for float64)."""
    lines = [f"{ds.num_classes},{ds.dim},{len(ds)}"]
    for s in ds.samples:
        feats = ",".join(f"{v:.17g}" for v in s.features)
        lines.append(f"{s.id},{s.observed_label},{s.clean_label},{int(s.is_out_of_domain)},{feats}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_dataset(path) -> Dataset:
    text = Path(path).read_text().splitlines()
    if not text:
        raise ParseError("empty dataset file", line=1)
    try:
        num_classes, dim, count = (int(v) for v in text[0].split(","))
    except ValueError as e:
        raise ParseError(f"bad header: {e}", line=1) from None
    samples = []
    for lineno, row in enumerate(text[1:], start=2):
        if not row.strip():
            continue
        parts = row.split(",")
        if len(parts) != 4 + dim:
            raise ParseError(f"expected {4 + dim} fields, got {len(parts)}", line=lineno)
        try:
            sid, obs, clean, ood = int(parts[0]), int(parts[1]), int(parts[2]), int(parts[3])
            feats = np.array([float(v) for v in parts[4:]])
        except ValueError as e:
            raise ParseError(str(e), line=lineno) from None
        samples.append(Sample(features=feats, observed_label=obs, clean_label=clean,
                              is_out_of_domain=bool(ood), id=sid))
    if len(samples) != count:
        raise ParseError(f"header promised {count} samples, found {len(samples)}", line=1)
    return Dataset(samples=tuple(samples), num_classes=num_classes)
