"""Shared epoch loop: deterministic shuffling, mini-batching, per-epoch
metrics. All strategies (peer, co-teaching, decoupling, plain) run through
this loop so accuracy comparisons isolate the update rule."""

from __future__ import annotations

import numpy as np

from . import nn
from .data import Dataset, clean_labels, features_matrix, in_domain_mask
from .errors import ConfigurationError
from .records import EpochRow, RunRecord


def accuracy(model: nn.Model, ds: Dataset) -> float:
    """Fraction correct against clean labels, in-domain samples only."""
    mask = in_domain_mask(ds.samples)
    X = features_matrix(ds.samples)[mask]
    y = clean_labels(ds.samples)[mask]
    return float(np.mean(nn.predict(model, X) == y))


def _mean_or_none(values) -> float | None:
    vals = [v for v in values if v is not None]
    return float(np.mean(vals)) if vals else None


def run_training(
    strategy,
    train_ds: Dataset,
    test_ds: Dataset | None,
    epochs: int,
    batch_size: int,
    shuffle_seed: int,
) -> RunRecord:
    if epochs < 1:
        raise ConfigurationError(f"epochs must be >= 1, got {epochs}")
    if batch_size < 2:
        raise ConfigurationError(f"batch_size must be >= 2, got {batch_size}")
    if batch_size > len(train_ds):
        raise ConfigurationError(f"batch_size {batch_size} exceeds dataset size {len(train_ds)}")

    rng = np.random.default_rng(shuffle_seed)
    samples = train_ds.samples
    n = len(samples)
    rows = []
    for T in range(epochs):
        d = strategy.begin_epoch(T)
        perm = rng.permutation(n)
        reports = []
        for start in range(0, n, batch_size):
            batch = [samples[int(i)] for i in perm[start : start + batch_size]]
            reports.append(strategy.step(batch))
        rows.append(_epoch_row(T, d, strategy.models, train_ds, test_ds, reports))

    models = strategy.models
    final = rows[-1]
    if len(models) == 1:
        best_net, best_acc = "h1", final.test_acc_h1 if test_ds is not None else final.train_acc_h1
    else:
        acc1 = final.test_acc_h1 if test_ds is not None else final.train_acc_h1
        acc2 = final.test_acc_h2 if test_ds is not None else final.train_acc_h2
        best_net, best_acc = ("h1", acc1) if acc1 >= acc2 else ("h2", acc2)
    return RunRecord(
        strategy=strategy.name,
        rows=tuple(rows),
        best_test_accuracy=float(best_acc),
        best_network=best_net,
    )


def _epoch_row(T, d, models, train_ds, test_ds, reports) -> EpochRow:
    train_accs = [accuracy(m, train_ds) for m in models]
    test_accs = [accuracy(m, test_ds) for m in models] if test_ds is not None else [None] * len(models)

    n_sel = sum(getattr(r, "n_selected", 0) or 0 for r in reports if r is not None)
    n_clean = sum(getattr(r, "n_selected_clean", 0) or 0 for r in reports if r is not None)
    has_selection = any(getattr(r, "n_selected", None) is not None for r in reports if r is not None)
    precision = (n_clean / n_sel) if (has_selection and n_sel > 0) else None

    gs = _mean_or_none([getattr(r, "n_agree", None) for r in reports if r is not None])
    gd = _mean_or_none([getattr(r, "n_disagree", None) for r in reports if r is not None])
    return EpochRow(
        epoch=T,
        drop_rate=d,
        train_acc_h1=train_accs[0],
        train_acc_h2=train_accs[1] if len(models) > 1 else None,
        test_acc_h1=test_accs[0],
        test_acc_h2=test_accs[1] if len(models) > 1 else None,
        selection_label_precision=precision,
        gs_mean=gs,
        gd_mean=gd,
    )
