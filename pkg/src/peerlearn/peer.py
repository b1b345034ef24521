"""Two-network peer training: agreement split, small-loss selection under a
ramped drop rate, and cross-updates where each network learns from the
disagreement set plus the subset its peer selected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import nn
from .data import Dataset, features_matrix, observed_labels
from .errors import ConfigurationError
from .nn import LossConfig, Model, OptimizerConfig
from .records import RunRecord
from .training import run_training


@dataclass(frozen=True)
class DropSchedule:
    """d(T) = xi * min(T / t_k, 1): no dropping at epoch 0, linear ramp,
    then flat at the maximum drop rate xi from epoch t_k on."""

    xi: float = 0.35
    t_k: int = 10

    def __post_init__(self):
        if not 0.0 <= self.xi < 1.0:
            raise ConfigurationError(f"xi must be in [0, 1), got {self.xi}")
        if self.t_k < 1:
            raise ConfigurationError(f"t_k must be >= 1, got {self.t_k}")


def drop_rate(schedule: DropSchedule, T: int) -> float:
    if T < 0:
        raise ConfigurationError(f"epoch index must be >= 0, got {T}")
    return schedule.xi * min(T / schedule.t_k, 1.0)


def keep_count(n_agree: int, d: float) -> int:
    """Smallest cardinality satisfying the >= (1 - d) * |G_s| constraint."""
    if n_agree == 0:
        return 0
    # guard against fp products like 4.0000000000000004 inflating the ceiling
    return math.ceil((1.0 - d) * n_agree - 1e-9)


@dataclass(frozen=True)
class BatchSplit:
    agree_idx: tuple[int, ...]
    disagree_idx: tuple[int, ...]


@dataclass(frozen=True)
class SelectionResult:
    keep_for_h1: tuple[int, ...]  # selected by h2, consumed by h1
    keep_for_h2: tuple[int, ...]  # selected by h1, consumed by h2


@dataclass(frozen=True)
class StepReport:
    n_agree: int
    n_disagree: int
    selection: SelectionResult
    update_idx_h1: tuple[int, ...]
    update_idx_h2: tuple[int, ...]
    n_selected: int
    n_selected_clean: int
    skipped_h1: bool = False
    skipped_h2: bool = False


@dataclass
class PeerTrainer:
    h1: Model
    h2: Model
    schedule: DropSchedule
    optimizer: OptimizerConfig
    loss_cfg: LossConfig = field(default_factory=LossConfig)
    epoch: int = 0

    def __post_init__(self):
        if self.h1.layer_dims != self.h2.layer_dims:
            raise ConfigurationError("h1 and h2 must share layer_dims")


def make_peer_trainer(
    layer_dims,
    schedule: DropSchedule,
    optimizer: OptimizerConfig,
    loss_cfg: LossConfig = LossConfig(),
    activation: str = "relu",
) -> PeerTrainer:
    h1 = nn.init_model(layer_dims, seed=optimizer.seed, activation=activation)
    h2 = nn.init_model(layer_dims, seed=optimizer.seed + 1, activation=activation)
    return PeerTrainer(h1=h1, h2=h2, schedule=schedule, optimizer=optimizer, loss_cfg=loss_cfg)


def split_batch(h1: Model, h2: Model, batch) -> BatchSplit:
    """Partition by prediction agreement between the two networks."""
    if len(batch) == 0:
        raise ConfigurationError("split_batch requires a non-empty batch")
    X = features_matrix(batch)
    same = nn.predict(h1, X) == nn.predict(h2, X)
    return BatchSplit(
        agree_idx=tuple(int(i) for i in np.flatnonzero(same)),
        disagree_idx=tuple(int(i) for i in np.flatnonzero(~same)),
    )


def select_small_loss(model: Model, batch, agree_idx, d: float, loss_cfg: LossConfig) -> tuple[int, ...]:
    """Indices (into the batch) of the keep_count smallest-loss agreement
    samples under `model`; ties break toward the lower batch index, output
    ordered by ascending loss."""
    agree_idx = tuple(agree_idx)
    if not agree_idx:
        return ()
    sub = [batch[i] for i in agree_idx]
    losses = nn.per_example_losses(model, features_matrix(sub), observed_labels(sub), loss_cfg)
    k = keep_count(len(agree_idx), d)
    order = np.argsort(losses, kind="stable")[:k]
    return tuple(agree_idx[i] for i in order)


def peer_step(trainer: PeerTrainer, batch) -> tuple[PeerTrainer, StepReport]:
    """One cross-update. Both selections and both gradients are computed from
    the pre-step parameters, so the two updates commute."""
    if len(batch) == 0:
        raise ConfigurationError("peer_step requires a non-empty batch")
    d = drop_rate(trainer.schedule, trainer.epoch)
    split = split_batch(trainer.h1, trainer.h2, batch)
    sel_by_h1 = select_small_loss(trainer.h1, batch, split.agree_idx, d, trainer.loss_cfg)
    sel_by_h2 = select_small_loss(trainer.h2, batch, split.agree_idx, d, trainer.loss_cfg)
    selection = SelectionResult(keep_for_h1=sel_by_h2, keep_for_h2=sel_by_h1)

    upd1 = tuple(sorted(set(split.disagree_idx) | set(sel_by_h2)))
    upd2 = tuple(sorted(set(split.disagree_idx) | set(sel_by_h1)))

    h1_new, skipped1 = _updated(trainer.h1, batch, upd1, trainer.loss_cfg, trainer.optimizer)
    h2_new, skipped2 = _updated(trainer.h2, batch, upd2, trainer.loss_cfg, trainer.optimizer)

    selected = set(sel_by_h1) | set(sel_by_h2)
    n_clean = sum(1 for i in selected if batch[i].observed_label == batch[i].clean_label)
    report = StepReport(
        n_agree=len(split.agree_idx),
        n_disagree=len(split.disagree_idx),
        selection=selection,
        update_idx_h1=upd1,
        update_idx_h2=upd2,
        n_selected=len(selected),
        n_selected_clean=n_clean,
        skipped_h1=skipped1,
        skipped_h2=skipped2,
    )
    return replace(trainer, h1=h1_new, h2=h2_new), report


def _updated(model: Model, batch, idx, loss_cfg: LossConfig, opt: OptimizerConfig):
    if not idx:
        return model, True
    sub = [batch[i] for i in idx]
    grad = nn.gradient(model, features_matrix(sub), observed_labels(sub), loss_cfg)
    return nn.sgd_step(model, grad, opt.learning_rate), False


class PeerStrategy:
    """Adapter driving a PeerTrainer through the shared epoch loop."""

    name = "peer_learning"

    def __init__(self, trainer: PeerTrainer):
        self.trainer = trainer

    def begin_epoch(self, T: int) -> float:
        self.trainer = replace(self.trainer, epoch=T)
        return drop_rate(self.trainer.schedule, T)

    def step(self, batch) -> StepReport:
        self.trainer, report = peer_step(self.trainer, batch)
        return report

    @property
    def models(self) -> tuple[Model, ...]:
        return (self.trainer.h1, self.trainer.h2)


def train(
    trainer: PeerTrainer,
    train_ds: Dataset,
    test_ds: Dataset | None,
    epochs: int,
    batch_size: int,
    shuffle_seed: int,
) -> RunRecord:
    strategy = PeerStrategy(trainer)
    record = run_training(strategy, train_ds, test_ds, epochs, batch_size, shuffle_seed)
    return record
