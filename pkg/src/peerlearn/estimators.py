"""Scikit-learn style wrappers around the training strategies.

Each classifier is a plain estimator: hyperparameters in __init__, fit(X, y),
predict / predict_proba, get_params/set_params via BaseEstimator. Labels may
be arbitrary (classes_ holds the sorted unique values); internally everything
runs on 0..C-1 indices.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import nn
from .baselines import CoTeachingStrategy, DecouplingStrategy, PlainStrategy, StrategyConfig
from .data import Dataset, Sample
from .nn import LossConfig, OptimizerConfig
from .peer import DropSchedule, PeerStrategy, PeerTrainer
from .training import run_training


def _as_dataset(X: np.ndarray, y_idx: np.ndarray, num_classes: int) -> Dataset:
    samples = tuple(
        Sample(features=X[i], observed_label=int(y_idx[i]), clean_label=int(y_idx[i]), id=i)
        for i in range(len(X))
    )
    return Dataset(samples=samples, num_classes=num_classes)


class _SmallLossClassifierBase(BaseEstimator, ClassifierMixin):
    """Shared fit/predict plumbing; subclasses pick the training strategy."""

    def __init__(self, hidden_dims=(32,), epochs=20, batch_size=32, learning_rate=0.05,
                 smoothing=0.0, reduction="mean", activation="relu", random_state=0):
        self.hidden_dims = hidden_dims
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.smoothing = smoothing
        self.reduction = reduction
        self.activation = activation
        self.random_state = random_state

    def _schedule(self) -> DropSchedule | None:
        return None

    def _make_strategy(self, layer_dims):
        raise NotImplementedError

    def _strategy_config(self, kind: str) -> StrategyConfig:
        return StrategyConfig(
            kind=kind,
            optimizer=OptimizerConfig(learning_rate=self.learning_rate, seed=self.random_state),
            loss_cfg=LossConfig(smoothing=self.smoothing, reduction=self.reduction),
            schedule=self._schedule(),
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        if len(self.classes_) < 2:
            raise ValueError("need at least 2 classes to fit")
        self.n_features_in_ = X.shape[1]
        ds = _as_dataset(X, y_idx, len(self.classes_))
        layer_dims = (X.shape[1], *tuple(self.hidden_dims), len(self.classes_))
        strategy = self._make_strategy(layer_dims)
        batch = max(2, min(self.batch_size, len(ds)))
        record = run_training(strategy, ds, None, self.epochs, batch,
                              shuffle_seed=self.random_state)
        models = strategy.models
        self.model_ = models[0 if record.best_network == "h1" else -1]
        self.run_record_ = record
        return self

    def decision_function(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, dtype=np.float64)
        return nn.forward(self.model_, X)

    def predict_proba(self, X):
        return nn.softmax(np.atleast_2d(self.decision_function(X)))

    def predict(self, X):
        logits = np.atleast_2d(self.decision_function(X))
        return self.classes_[np.argmax(logits, axis=1)]


class PlainMLPClassifier(_SmallLossClassifierBase):
    """Single MLP trained by SGD on all labels as given."""

    def _make_strategy(self, layer_dims):
        model = nn.init_model(layer_dims, seed=self.random_state, activation=self.activation)
        return PlainStrategy(model, self._strategy_config("plain"))


class DecouplingClassifier(_SmallLossClassifierBase):
    """Two MLPs that update only on samples where they disagree."""

    def _make_strategy(self, layer_dims):
        h1 = nn.init_model(layer_dims, seed=self.random_state, activation=self.activation)
        h2 = nn.init_model(layer_dims, seed=self.random_state + 1, activation=self.activation)
        return DecouplingStrategy(h1, h2, self._strategy_config("decoupling"))


class _ScheduledBase(_SmallLossClassifierBase):
    def __init__(self, hidden_dims=(32,), epochs=20, batch_size=32, learning_rate=0.05,
                 smoothing=0.0, reduction="mean", activation="relu", random_state=0,
                 max_drop_rate=0.35, ramp_epochs=10):
        super().__init__(hidden_dims=hidden_dims, epochs=epochs, batch_size=batch_size,
                         learning_rate=learning_rate, smoothing=smoothing,
                         reduction=reduction, activation=activation,
                         random_state=random_state)
        self.max_drop_rate = max_drop_rate
        self.ramp_epochs = ramp_epochs

    def _schedule(self) -> DropSchedule:
        return DropSchedule(xi=self.max_drop_rate, t_k=self.ramp_epochs)


class CoTeachingClassifier(_ScheduledBase):
    """Two MLPs exchanging small-loss picks over the whole batch."""

    def _make_strategy(self, layer_dims):
        h1 = nn.init_model(layer_dims, seed=self.random_state, activation=self.activation)
        h2 = nn.init_model(layer_dims, seed=self.random_state + 1, activation=self.activation)
        return CoTeachingStrategy(h1, h2, self._strategy_config("co_teaching"))


class PeerLearningClassifier(_ScheduledBase):
    """Agreement split + small-loss exchange + cross-updates on the
    disagreement set. The robust-training strategy this package is built
    around."""

    def _make_strategy(self, layer_dims):
        cfg = self._strategy_config("peer_learning")
        h1 = nn.init_model(layer_dims, seed=self.random_state, activation=self.activation)
        h2 = nn.init_model(layer_dims, seed=self.random_state + 1, activation=self.activation)
        trainer = PeerTrainer(h1=h1, h2=h2, schedule=cfg.schedule,
                              optimizer=cfg.optimizer, loss_cfg=cfg.loss_cfg)
        return PeerStrategy(trainer)
