"""Per-epoch run records and their JSON-lines persistence."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import ParseError


@dataclass(frozen=True)
class EpochRow:
    epoch: int
    drop_rate: float
    train_acc_h1: float
    train_acc_h2: float | None
    test_acc_h1: float | None
    test_acc_h2: float | None
    selection_label_precision: float | None
    gs_mean: float | None
    gd_mean: float | None


@dataclass(frozen=True)
class RunRecord:
    strategy: str
    rows: tuple[EpochRow, ...]
    best_test_accuracy: float
    best_network: str  # "h1" or "h2"

    @property
    def final(self) -> EpochRow:
        return self.rows[-1]


def write_run_record(record: RunRecord, path) -> None:
    """One epoch row per line, then a `summary` line; append-safe and diffable."""
    lines = []
    for row in record.rows:
        lines.append(json.dumps({"kind": "epoch", **asdict(row)}, sort_keys=True))
    lines.append(json.dumps({
        "kind": "summary",
        "strategy": record.strategy,
        "best_test_accuracy": record.best_test_accuracy,
        "best_network": record.best_network,
    }, sort_keys=True))
    Path(path).write_text("\n".join(lines) + "\n")


def read_run_record(path) -> RunRecord:
    rows = []
    summary = None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(str(e), line=lineno) from None
        kind = obj.pop("kind", None)
        if kind == "epoch":
            rows.append(EpochRow(**obj))
        elif kind == "summary":
            summary = obj
        else:
            raise ParseError(f"unknown record kind {kind!r}", line=lineno)
    if summary is None:
        raise ParseError("missing summary line")
    return RunRecord(
        strategy=summary["strategy"],
        rows=tuple(rows),
        best_test_accuracy=summary["best_test_accuracy"],
        best_network=summary["best_network"],
    )
