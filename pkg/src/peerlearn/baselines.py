"""Reference strategies for comparison: plain single-network SGD, Decoupling
(update only where the two networks disagree), and Co-teaching (each network
feeds its small-loss picks over the whole batch to its peer).

All three share nn_core math plus the peer module's split/selection rules, so
measured differences come from the update rule, not implementation drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import nn
from .data import features_matrix, observed_labels
from .errors import ConfigurationError
from .nn import LossConfig, Model, OptimizerConfig
from .peer import DropSchedule, drop_rate, select_small_loss, split_batch

STRATEGY_KINDS = ("plain", "decoupling", "co_teaching", "peer_learning")


@dataclass(frozen=True)
class StrategyConfig:
    kind: str
    optimizer: OptimizerConfig
    loss_cfg: LossConfig = field(default_factory=LossConfig)
    schedule: DropSchedule | None = None

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ConfigurationError(f"kind must be one of {STRATEGY_KINDS}, got {self.kind!r}")
        if self.kind in ("co_teaching", "peer_learning") and self.schedule is None:
            raise ConfigurationError(f"{self.kind} requires a drop schedule")


def _step_on(model: Model, batch, idx, cfg: StrategyConfig) -> Model:
    # batch order, so summation order (and hence bit-level results) cannot
    # depend on how the index set was produced
    idx = sorted(idx)
    if not idx:
        return model
    sub = [batch[i] for i in idx]
    grad = nn.gradient(model, features_matrix(sub), observed_labels(sub), cfg.loss_cfg)
    return nn.sgd_step(model, grad, cfg.optimizer.learning_rate)


def plain_step(model: Model, batch, cfg: StrategyConfig) -> Model:
    """One SGD step on the whole batch, noise and all."""
    if len(batch) == 0:
        raise ConfigurationError("plain_step requires a non-empty batch")
    return _step_on(model, batch, range(len(batch)), cfg)


def decoupling_step(h1: Model, h2: Model, batch, cfg: StrategyConfig) -> tuple[Model, Model]:
    """Both networks step only on the disagreement set (the 'hard examples');
    nothing happens on a batch where they fully agree."""
    if len(batch) == 0:
        raise ConfigurationError("decoupling_step requires a non-empty batch")
    split = split_batch(h1, h2, batch)
    return (_step_on(h1, batch, split.disagree_idx, cfg),
            _step_on(h2, batch, split.disagree_idx, cfg))


def co_teaching_step(h1: Model, h2: Model, batch, cfg: StrategyConfig, T: int) -> tuple[Model, Model]:
    """Each network picks its small-loss instances over the whole batch and
    hands them to its peer; same keep-count and tie-break rules as peer
    learning."""
    if len(batch) == 0:
        raise ConfigurationError("co_teaching_step requires a non-empty batch")
    (new_h1, new_h2), _ = _co_teaching_core(h1, h2, batch, cfg, T)
    return new_h1, new_h2


def _co_teaching_core(h1, h2, batch, cfg, T):
    d = drop_rate(cfg.schedule, T)
    all_idx = tuple(range(len(batch)))
    r1 = select_small_loss(h1, batch, all_idx, d, cfg.loss_cfg)
    r2 = select_small_loss(h2, batch, all_idx, d, cfg.loss_cfg)
    # cross-consumption: h1 trains on h2's picks and vice versa
    new_h1 = _step_on(h1, batch, r2, cfg)
    new_h2 = _step_on(h2, batch, r1, cfg)
    return (new_h1, new_h2), (r1, r2)


@dataclass(frozen=True)
class BaselineStepReport:
    n_agree: int | None = None
    n_disagree: int | None = None
    n_selected: int | None = None
    n_selected_clean: int | None = None


class PlainStrategy:
    name = "plain"

    def __init__(self, model: Model, cfg: StrategyConfig):
        self.model = model
        self.cfg = cfg

    def begin_epoch(self, T: int) -> float:
        return 0.0

    def step(self, batch) -> None:
        self.model = plain_step(self.model, batch, self.cfg)
        return None

    @property
    def models(self) -> tuple[Model, ...]:
        return (self.model,)


class DecouplingStrategy:
    name = "decoupling"

    def __init__(self, h1: Model, h2: Model, cfg: StrategyConfig):
        self.h1, self.h2, self.cfg = h1, h2, cfg

    def begin_epoch(self, T: int) -> float:
        return 0.0

    def step(self, batch) -> BaselineStepReport:
        split = split_batch(self.h1, self.h2, batch)
        self.h1, self.h2 = decoupling_step(self.h1, self.h2, batch, self.cfg)
        return BaselineStepReport(n_agree=len(split.agree_idx), n_disagree=len(split.disagree_idx))

    @property
    def models(self) -> tuple[Model, ...]:
        return (self.h1, self.h2)


class CoTeachingStrategy:
    name = "co_teaching"

    def __init__(self, h1: Model, h2: Model, cfg: StrategyConfig):
        self.h1, self.h2, self.cfg = h1, h2, cfg
        self.epoch = 0

    def begin_epoch(self, T: int) -> float:
        self.epoch = T
        return drop_rate(self.cfg.schedule, T)

    def step(self, batch) -> BaselineStepReport:
        (self.h1, self.h2), (r1, r2) = _co_teaching_core(self.h1, self.h2, batch, self.cfg, self.epoch)
        selected = set(r1) | set(r2)
        n_clean = sum(1 for i in selected if batch[i].observed_label == batch[i].clean_label)
        return BaselineStepReport(n_selected=len(selected), n_selected_clean=n_clean)

    @property
    def models(self) -> tuple[Model, ...]:
        return (self.h1, self.h2)
