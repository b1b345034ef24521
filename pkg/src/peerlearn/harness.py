"""Experiment orchestration: config files, multi-seed runs, strategy
comparison tables, and run-record persistence.

Config files are INI sections; every key is validated and unknown keys are
rejected with their section.key path. Outputs carry no timestamps so repeated
runs of the same config are byte-identical.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import nn
from .baselines import (
    STRATEGY_KINDS,
    CoTeachingStrategy,
    DecouplingStrategy,
    PlainStrategy,
    StrategyConfig,
)
from .data import (
    Dataset,
    NoiseSpec,
    apply_noise,
    generate_gaussian_dataset,
    split_train_test,
)
from .dedup import DedupConfig, DedupReport, deduplicate, read_embeddings
from .errors import ConfigurationError
from .nn import LossConfig, OptimizerConfig
from .peer import DropSchedule, PeerStrategy, PeerTrainer
from .records import RunRecord, write_run_record
from .training import run_training


@dataclass(frozen=True)
class DatasetSpec:
    num_classes: int = 10
    per_class: int = 500
    test_per_class: int = 100
    dim: int = 16
    separation: float = 3.0
    cross_category_rate: float = 0.0
    flip_model: str = "symmetric"
    cross_domain_rate: float = 0.0
    imbalance_factor: float = 1.0

    def __post_init__(self):
        # reuse NoiseSpec validation for the noise knobs
        NoiseSpec(
            cross_category_rate=self.cross_category_rate,
            flip_model=self.flip_model,
            cross_domain_rate=self.cross_domain_rate,
            imbalance_factor=self.imbalance_factor,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSpec
    strategy: StrategyConfig
    hidden_dims: tuple[int, ...] = (64, 64)
    epochs: int = 40
    batch_size: int = 64
    seeds: tuple[int, ...] = (0,)
    output_path: str = "runs"
    compare_kinds: tuple[str, ...] = STRATEGY_KINDS

    def __post_init__(self):
        if not self.seeds:
            raise ConfigurationError("run.seeds: need at least one seed")
        for k in self.compare_kinds:
            if k not in STRATEGY_KINDS:
                raise ConfigurationError(f"compare.kinds: unknown strategy {k!r}")


def canonical_config(output_path="runs", seeds=(0, 1, 2, 3, 4)) -> "ExperimentConfig":
    """The package's standard noisy-regime experiment: 10 well-separated but
    not trivial Gaussian classes, 40% symmetric label flips plus 10%
    out-of-domain contamination, drop schedule xi=0.35 / t_k=10."""
    return ExperimentConfig(
        dataset=DatasetSpec(
            num_classes=10, per_class=500, test_per_class=100, dim=16,
            separation=3.0, cross_category_rate=0.4, flip_model="symmetric",
            cross_domain_rate=0.1, imbalance_factor=1.0,
        ),
        strategy=StrategyConfig(
            kind="peer_learning",
            optimizer=OptimizerConfig(learning_rate=0.05),
            loss_cfg=LossConfig(),
            schedule=DropSchedule(xi=0.35, t_k=10),
        ),
        # wide enough to memorize noisy labels, which is the failure mode the
        # peer strategy exists to avoid
        hidden_dims=(256, 256),
        epochs=40,
        batch_size=64,
        seeds=tuple(seeds),
        output_path=str(output_path),
    )


_SCHEMA = {
    "dataset": {
        "num_classes": int, "per_class": int, "test_per_class": int, "dim": int,
        "separation": float, "cross_category_rate": float, "flip_model": str,
        "cross_domain_rate": float, "imbalance_factor": float,
    },
    "strategy": {
        "kind": str, "xi": float, "t_k": int, "learning_rate": float,
        "smoothing": float, "reduction": str,
    },
    "training": {"hidden_dims": str, "epochs": int, "batch_size": int},
    "run": {"seeds": str, "output_path": str},
    "compare": {"kinds": str},
}


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser()
    read = parser.read(str(path))
    if not read:
        raise ConfigurationError(f"cannot read config file {path}")
    values: dict[str, dict] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigurationError(f"unknown config section [{section}]")
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigurationError(f"unknown config key {section}.{key}")
            caster = _SCHEMA[section][key]
            try:
                values[section][key] = caster(raw)
            except ValueError:
                raise ConfigurationError(
                    f"{section}.{key}: cannot parse {raw!r} as {caster.__name__}"
                ) from None
    return _build_config(values)


def _build_config(values: dict) -> ExperimentConfig:
    ds = DatasetSpec(**values.get("dataset", {}))
    strat = dict(values.get("strategy", {}))
    kind = strat.pop("kind", "peer_learning")
    schedule = DropSchedule(xi=strat.pop("xi", 0.35), t_k=strat.pop("t_k", 10))
    optimizer = OptimizerConfig(learning_rate=strat.pop("learning_rate", 0.05))
    loss_cfg = LossConfig(smoothing=strat.pop("smoothing", 0.0),
                          reduction=strat.pop("reduction", "mean"))
    strategy = StrategyConfig(kind=kind, optimizer=optimizer, loss_cfg=loss_cfg,
                              schedule=schedule)
    training = dict(values.get("training", {}))
    hidden = _parse_int_list(training.pop("hidden_dims", "64,64"), "training.hidden_dims")
    run = dict(values.get("run", {}))
    seeds = _parse_int_list(run.pop("seeds", "0"), "run.seeds")
    compare = dict(values.get("compare", {}))
    kinds = tuple(k.strip() for k in compare.pop("kinds", ",".join(STRATEGY_KINDS)).split(","))
    return ExperimentConfig(
        dataset=ds,
        strategy=strategy,
        hidden_dims=hidden,
        epochs=training.pop("epochs", 40),
        batch_size=training.pop("batch_size", 64),
        seeds=seeds,
        output_path=run.pop("output_path", "runs"),
        compare_kinds=kinds,
    )


def _parse_int_list(raw: str, where: str) -> tuple[int, ...]:
    try:
        return tuple(int(v.strip()) for v in str(raw).split(",") if v.strip())
    except ValueError:
        raise ConfigurationError(f"{where}: cannot parse {raw!r} as a comma list of ints") from None


def make_datasets(spec: DatasetSpec, seed: int) -> tuple[Dataset, Dataset]:
    """Shared clean generation, then train/test split, then noise on the
    train side only: the test split always stays clean and in-domain."""
    full = generate_gaussian_dataset(
        spec.num_classes, spec.per_class + spec.test_per_class, spec.dim,
        spec.separation, seed=seed,
    )
    train, test = split_train_test(full, spec.test_per_class)
    noise = NoiseSpec(
        cross_category_rate=spec.cross_category_rate,
        flip_model=spec.flip_model,
        cross_domain_rate=spec.cross_domain_rate,
        imbalance_factor=spec.imbalance_factor,
        seed=seed * 1000 + 1,
    )
    return apply_noise(train, noise), test


def make_strategy(cfg: ExperimentConfig, seed: int, kind: str | None = None):
    kind = kind or cfg.strategy.kind
    layer_dims = (cfg.dataset.dim, *cfg.hidden_dims, cfg.dataset.num_classes)
    scfg = replace(cfg.strategy, kind=kind,
                   optimizer=replace(cfg.strategy.optimizer, seed=seed))
    model_seed = seed * 1000 + 17
    h1 = nn.init_model(layer_dims, seed=model_seed)
    h2 = nn.init_model(layer_dims, seed=model_seed + 1)
    if kind == "plain":
        return PlainStrategy(h1, scfg)
    if kind == "decoupling":
        return DecouplingStrategy(h1, h2, scfg)
    if kind == "co_teaching":
        return CoTeachingStrategy(h1, h2, scfg)
    trainer = PeerTrainer(h1=h1, h2=h2, schedule=scfg.schedule,
                          optimizer=scfg.optimizer, loss_cfg=scfg.loss_cfg)
    return PeerStrategy(trainer)


def run_experiment(cfg: ExperimentConfig, kind: str | None = None) -> list[RunRecord]:
    """One full run per seed; persists each record plus an aggregate CSV."""
    kind = kind or cfg.strategy.kind
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    records = []
    for seed in cfg.seeds:
        train_ds, test_ds = make_datasets(cfg.dataset, seed)
        strategy = make_strategy(cfg, seed, kind)
        record = run_training(strategy, train_ds, test_ds, cfg.epochs,
                              cfg.batch_size, shuffle_seed=seed * 1000 + 99)
        write_run_record(record, out / f"{kind}_seed{seed}.jsonl")
        records.append(record)
    finals = np.array([r.best_test_accuracy for r in records])
    summary = (
        "strategy,seeds,mean_accuracy,std_accuracy\n"
        f"{kind},{len(records)},{finals.mean():.6f},{finals.std():.6f}\n"
    )
    (out / f"{kind}_summary.csv").write_text(summary)
    return records


@dataclass(frozen=True)
class ComparisonRow:
    strategy: str
    mean_accuracy: float
    std_accuracy: float
    wins: int
    per_seed: tuple[float, ...]


def compare_strategies(cfg: ExperimentConfig) -> list[ComparisonRow]:
    """Run every configured strategy on identical data/seeds and tabulate
    final accuracies; a 'win' is attaining the per-seed maximum."""
    per_kind = {kind: run_experiment(cfg, kind) for kind in cfg.compare_kinds}
    accs = {k: [r.best_test_accuracy for r in recs] for k, recs in per_kind.items()}
    n_seeds = len(cfg.seeds)
    best_per_seed = [max(accs[k][i] for k in accs) for i in range(n_seeds)]
    rows = []
    for k in cfg.compare_kinds:
        a = np.array(accs[k])
        wins = sum(1 for i in range(n_seeds) if accs[k][i] >= best_per_seed[i])
        rows.append(ComparisonRow(strategy=k, mean_accuracy=float(a.mean()),
                                  std_accuracy=float(a.std()), wins=wins,
                                  per_seed=tuple(float(v) for v in a)))
    _write_comparison(rows, Path(cfg.output_path))
    return rows


def _write_comparison(rows: list[ComparisonRow], out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    csv_lines = ["strategy,mean_accuracy,std_accuracy,wins,per_seed"]
    for r in rows:
        per_seed = ";".join(f"{v:.6f}" for v in r.per_seed)
        csv_lines.append(f"{r.strategy},{r.mean_accuracy:.6f},{r.std_accuracy:.6f},{r.wins},{per_seed}")
    (out / "comparison.csv").write_text("\n".join(csv_lines) + "\n")
    txt = ["final test accuracy (mean +/- std over seeds)", ""]
    for r in sorted(rows, key=lambda r: -r.mean_accuracy):
        txt.append(f"  {r.strategy:<14} {100 * r.mean_accuracy:6.2f} +/- {100 * r.std_accuracy:.2f}   wins={r.wins}")
    (out / "comparison.txt").write_text("\n".join(txt) + "\n")


def dedup_command(train_path, test_path, eta: float, metric: str, out_path) -> DedupReport:
    train = read_embeddings(train_path)
    test = read_embeddings(test_path)
    report = deduplicate(train, test, DedupConfig(eta=eta, metric=metric))
    Path(out_path).write_text(report.to_json() + "\n")
    return report
