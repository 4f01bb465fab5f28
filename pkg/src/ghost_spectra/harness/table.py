"""Long-format result table with a deterministic CSV encoding."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

COLUMNS = ("experiment_id", "model", "p", "n", "method", "metric", "value", "reps", "seed")


@dataclass(frozen=True, order=True)
class ResultRow:
    experiment_id: str
    model: str
    p: int
    n: int
    method: str
    metric: str
    value: float
    reps: int
    seed: int

    def key(self) -> tuple:
        return (self.experiment_id, self.model, self.p, self.n, self.method, self.metric)

    def cells(self) -> list:
        return [self.experiment_id, self.model, str(self.p), str(self.n), self.method,
                self.metric, format_value(self.value), str(self.reps), str(self.seed)]


def format_value(value: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(value), ".17g")


@dataclass
class ResultTable:
    rows: list = field(default_factory=list)

    def add(self, experiment_id: str, model: str, p: int, n: int, method: str, metric: str,
            value: float, reps: int, seed: int) -> None:
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"non-finite value for {model}/{method}/{metric}")
        self.rows.append(ResultRow(experiment_id, model, int(p), int(n), method, metric,
                                   value, int(reps), int(seed)))

    def extend(self, other: "ResultTable") -> None:
        self.rows.extend(other.rows)

    def sorted_rows(self) -> list:
        return sorted(self.rows, key=ResultRow.key)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.sorted_rows())

    def select(self, **match) -> list:
        return [r for r in self.sorted_rows()
                if all(getattr(r, k) == v for k, v in match.items())]

    def value(self, **match) -> float:
        hits = self.select(**match)
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} rows match {match}")
        return hits[0].value

    def to_csv(self, path: Optional[Path] = None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(COLUMNS)
        for row in self.sorted_rows():
            writer.writerow(row.cells())
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_text(cls, text: str) -> "ResultTable":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if tuple(header) != COLUMNS:
            raise ValueError(f"unexpected header {header}")
        table = cls()
        for cells in reader:
            eid, model, p, n, method, metric, value, reps, seed = cells
            table.add(eid, model, int(p), int(n), method, metric, float(value), int(reps), int(seed))
        return table

    @classmethod
    def read_csv(cls, path) -> "ResultTable":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def merge(tables: Iterable[ResultTable]) -> ResultTable:
    out = ResultTable()
    for t in tables:
        out.extend(t)
    return out
