"""Dataset ingestion, synthetic data, node partitioning, and trace CSV files.

LIBSVM text format: one sample per line, ``<label> <idx>:<val> ...`` with
1-based strictly increasing indices. Labels are normalized to {-1, +1} at
parse time (value > 0 maps to +1, anything else to -1), which covers both
the +-1 and the {0, 1} labeling conventions.

Trace CSV schema (header order fixed):
    iter,grad_evals,comm_rounds,sq_dist,lyapunov
with floats in shortest round-trip decimal form and an empty lyapunov field
when the value was not computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import IO, Iterable

import numpy as np

__all__ = [
    "Dataset",
    "NodeShards",
    "TraceRecord",
    "Trace",
    "LibsvmFormatError",
    "parse_libsvm",
    "serialize_libsvm",
    "synth_classification",
    "partition",
    "write_trace",
    "read_trace",
]

TRACE_HEADER = "iter,grad_evals,comm_rounds,sq_dist,lyapunov"

LABEL_FLIP_RATE = 0.05


class LibsvmFormatError(ValueError):
    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class Dataset:
    """Sparse classification samples: (label, ((index, value), ...)) per sample."""

    samples: tuple[tuple[int, tuple[tuple[int, float], ...]], ...]
    d: int


@dataclass(frozen=True)
class NodeShards:
    """Dense per-node sample blocks: features[i] is (m_i, d), labels[i] is (m_i,)."""

    features: tuple[np.ndarray, ...]
    labels: tuple[np.ndarray, ...]

    @property
    def n(self) -> int:
        return len(self.features)


def parse_libsvm(source: Iterable[str] | IO[str]) -> Dataset:
    """Parse LIBSVM text; blank lines and lines starting with '#' are skipped."""
    samples = []
    d = 0
    for line_no, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        try:
            label_value = float(tokens[0])
        except ValueError:
            raise LibsvmFormatError(f"non-numeric label {tokens[0]!r}", line_no) from None
        label = 1 if label_value > 0 else -1
        pairs = []
        prev_idx = 0
        for tok in tokens[1:]:
            if ":" not in tok:
                raise LibsvmFormatError(f"missing colon in token {tok!r}", line_no)
            idx_str, val_str = tok.split(":", 1)
            try:
                idx = int(idx_str)
                val = float(val_str)
            except ValueError:
                raise LibsvmFormatError(f"malformed token {tok!r}", line_no) from None
            if idx < 1:
                raise LibsvmFormatError(f"index {idx} is not 1-based", line_no)
            if idx <= prev_idx:
                raise LibsvmFormatError(
                    f"non-increasing index {idx} after {prev_idx}", line_no
                )
            prev_idx = idx
            pairs.append((idx - 1, val))
            d = max(d, idx)
        samples.append((label, tuple(pairs)))
    return Dataset(samples=tuple(samples), d=d)


def serialize_libsvm(ds: Dataset, sink: IO[str]) -> None:
    """Write LIBSVM text that parse_libsvm maps back to the same Dataset."""
    for label, pairs in ds.samples:
        fields = ["+1" if label > 0 else "-1"]
        fields.extend(f"{idx + 1}:{repr(val)}" for idx, val in pairs)
        sink.write(" ".join(fields) + "\n")


def synth_classification(n_samples: int, d: int, seed: int) -> Dataset:
    """Gaussian features with labels from a planted unit-norm hyperplane.

    Labels get an independent sign flip at rate 0.05. Fully determined by
    the seed.
    """
    if n_samples < 1 or d < 1:
        raise ValueError("need n_samples >= 1 and d >= 1")
    rng = np.random.default_rng(seed)
    normal = rng.standard_normal(d)
    normal /= np.linalg.norm(normal)
    x = rng.standard_normal((n_samples, d))
    raw = np.where(x @ normal >= 0.0, 1, -1)
    flips = rng.random(n_samples) < LABEL_FLIP_RATE
    labels = np.where(flips, -raw, raw)
    samples = tuple(
        (int(lab), tuple((j, float(row[j])) for j in range(d)))
        for lab, row in zip(labels, x)
    )
    return Dataset(samples=samples, d=d)


def planted_direction(d: int, seed: int) -> np.ndarray:
    """The hyperplane normal synth_classification(seed) planted."""
    rng = np.random.default_rng(seed)
    normal = rng.standard_normal(d)
    return normal / np.linalg.norm(normal)


def _densify(sample: tuple[int, tuple[tuple[int, float], ...]], d: int) -> np.ndarray:
    row = np.zeros(d)
    for idx, val in sample[1]:
        row[idx] = val
    return row


def partition(ds: Dataset, n: int, seed: int) -> NodeShards:
    """Seeded uniform shuffle, then split into n near-equal contiguous shards.

    Shard sizes differ by at most one (the first ``len % n`` shards take the
    extra sample). Sparse rows are densified to (m_i, d) blocks.
    """
    m_total = len(ds.samples)
    if m_total < n:
        raise ValueError(f"cannot split {m_total} samples across {n} nodes")
    rng = np.random.default_rng(seed)
    order = rng.permutation(m_total)
    base, rem = divmod(m_total, n)
    sizes = [base + 1] * rem + [base] * (n - rem)
    features = []
    labels = []
    pos = 0
    for size in sizes:
        idx = order[pos : pos + size]
        pos += size
        features.append(np.stack([_densify(ds.samples[i], ds.d) for i in idx]))
        labels.append(np.array([float(ds.samples[i][0]) for i in idx]))
    return NodeShards(features=tuple(features), labels=tuple(labels))


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    grad_evals: int
    comm_rounds: int
    sq_dist: float
    lyapunov: float | None = None


@dataclass
class Trace:
    """Per-iteration run records plus run metadata (algorithm, params, seeds)."""

    records: list[TraceRecord] = field(default_factory=list)
    algorithm: str = ""
    meta: dict = field(default_factory=dict)


def write_trace(trace: Trace, sink: IO[str]) -> None:
    sink.write(TRACE_HEADER + "\n")
    for r in trace.records:
        ly = "" if r.lyapunov is None else repr(float(r.lyapunov))
        sink.write(
            f"{r.iteration},{r.grad_evals},{r.comm_rounds},{repr(float(r.sq_dist))},{ly}\n"
        )


def read_trace(source: Iterable[str] | IO[str]) -> Trace:
    lines = iter(source)
    header = next(lines, "").strip()
    if header != TRACE_HEADER:
        raise ValueError(f"unexpected trace header: {header!r}")
    records = []
    for line in lines:
        line = line.strip()
        if not line:
            continue
        it, ge, cr, sq, ly = line.split(",")
        records.append(
            TraceRecord(
                iteration=int(it),
                grad_evals=int(ge),
                comm_rounds=int(cr),
                sq_dist=float(sq),
                lyapunov=None if ly == "" else float(ly),
            )
        )
    return Trace(records=records)
