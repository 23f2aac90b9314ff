"""
Data sources and result files.

- Synthetic generators: power_law, uniform, concentrated
- Token-count histograms on disk (pre-tokenized corpora)
- Benchmark result tables (pandas -> CSV)

Token histogram format (UTF-8):

    # d=<int>
    <token_id>,<count>
    ...

Missing ids count 0; repeated ids are summed.

Author: instance-kl contributors - MIT License
"""

import logging
from dataclasses import astuple, dataclass, fields
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import pandas as pd

from instance_kl import CSV_FLOAT_FORMAT
from instance_kl.core import (
    BadMassError,
    ConfigError,
    EmptyFileError,
    EmptyHistogramError,
    Histogram,
    IdOutOfRangeError,
    ParseError,
    ProbVector,
    ResultsIOError,
    normalize,
    validate_prob_vector,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class SourceKind(Enum):
    SYNTHETIC = "synthetic"
    EMPIRICAL = "empirical"


@dataclass(frozen=True, eq=False)
class DataSource:
    """Either a known distribution (synthetic) or observed token counts (empirical)."""

    kind: SourceKind
    label: str
    probs: Optional[ProbVector] = None
    counts: Optional[Histogram] = None

    @classmethod
    def synthetic(cls, p: ProbVector, label: str) -> "DataSource":
        return cls(SourceKind.SYNTHETIC, label, probs=p)

    @classmethod
    def empirical(cls, counts: Histogram, label: str) -> "DataSource":
        if not counts.total > 0:
            raise EmptyHistogramError(f"{label}: empirical source has no records")
        return cls(SourceKind.EMPIRICAL, label, counts=counts)

    @property
    def d(self) -> int:
        if self.kind is SourceKind.SYNTHETIC:
            return self.probs.d
        return self.counts.d


# =============================================================================
# SYNTHETIC GENERATORS
# =============================================================================


def power_law(d: int, beta: float) -> ProbVector:
    """p_i proportional to i**-beta for i = 1..d."""
    if d < 1:
        raise ConfigError(f"d must be >= 1, got {d}")
    if not beta > 0:
        raise ConfigError(f"beta must be positive, got {beta}")
    ranks = np.arange(1, d + 1, dtype=float)
    return normalize(ranks ** -beta)


def uniform(d: int) -> ProbVector:
    if d < 1:
        raise ConfigError(f"d must be >= 1, got {d}")
    return normalize(np.ones(d))


def concentrated(d: int, masses: Sequence[float]) -> ProbVector:
    """The given masses on the first symbols, zero on the remaining ones."""
    masses = np.asarray(masses, dtype=float).reshape(-1)
    if masses.size == 0 or masses.size > d:
        raise BadMassError(f"need between 1 and d={d} masses, got {masses.size}")
    if np.any(~(masses > 0)):
        raise BadMassError(f"masses must be positive: {masses.tolist()}")
    if abs(masses.sum() - 1.0) > 1e-12:
        raise BadMassError(f"masses sum to {masses.sum()!r}, not 1")
    probs = np.zeros(d)
    probs[:masses.size] = masses
    return validate_prob_vector(probs)


# =============================================================================
# TOKEN HISTOGRAMS
# =============================================================================


def _parse_header(path: Path, line: str) -> int:
    key, sep, value = line.lstrip("#").strip().partition("=")
    if not line.startswith("#") or not sep or key.strip() != "d":
        raise ParseError(path, 1, line, "expected header '# d=<int>'")
    try:
        d = int(value.strip())
    except ValueError:
        raise ParseError(path, 1, line, "dimension is not an integer") from None
    if d < 1:
        raise ParseError(path, 1, line, "dimension must be >= 1")
    return d


def load_token_histogram(path: PathLike) -> DataSource:
    """Read a token-count file into an empirical DataSource labelled by file stem."""
    path = Path(path)
    raw_bytes = path.read_bytes()
    try:
        text = raw_bytes.decode("utf-8")
    except UnicodeDecodeError as exc:
        line_no = raw_bytes.count(b"\n", 0, exc.start) + 1
        bad_line = raw_bytes.splitlines()[line_no - 1].decode("utf-8", errors="replace")
        raise ParseError(path, line_no, bad_line, "not valid UTF-8") from exc
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise EmptyFileError(f"{path}: no header line")
    d = _parse_header(path, lines[0].strip())

    ids, values = [], []
    for line_no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(path, line_no, line, "expected 'token_id,count'")
        try:
            token_id, count = int(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError(path, line_no, line, "non-numeric field") from None
        if not count >= 0:
            raise ParseError(path, line_no, line, "count must be nonnegative")
        if not 0 <= token_id < d:
            raise IdOutOfRangeError(f"{path}:{line_no}: token id {token_id} outside [0, {d})")
        ids.append(token_id)
        values.append(count)

    counts = np.zeros(d)
    np.add.at(counts, np.asarray(ids, dtype=np.int64), np.asarray(values, dtype=float))
    if not counts.sum() > 0:
        raise EmptyFileError(f"{path}: no token counts")
    logger.info("loaded %s: d=%d, %d records, %d distinct tokens",
                path, d, int(counts.sum()), int(np.count_nonzero(counts)))
    return DataSource.empirical(Histogram.from_counts(counts), path.stem)


def write_token_histogram(h: Histogram, path: PathLike) -> None:
    """Inverse of load_token_histogram; only nonzero counts are written."""
    path = Path(path)
    lines = [f"# d={h.d}"]
    for i in np.flatnonzero(h.counts):
        c = h.counts[i]
        lines.append(f"{i},{int(c)}" if float(c).is_integer() else f"{i},{c!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# =============================================================================
# RESULT TABLES
# =============================================================================


@dataclass(frozen=True)
class ResultRow:
    """One benchmark cell."""

    n: float
    d: int
    eps: float
    estimator: str
    loss_kind: str
    mean: float
    std: float
    trials: int
    seed: int


RESULT_COLUMNS = tuple(f.name for f in fields(ResultRow))


def results_frame(rows: Iterable[ResultRow]) -> pd.DataFrame:
    frame = pd.DataFrame([astuple(r) for r in rows], columns=list(RESULT_COLUMNS))
    return frame.astype({"d": "int64", "trials": "int64", "seed": "int64"})


def write_results_csv(rows: Union[Iterable[ResultRow], pd.DataFrame], path: PathLike) -> None:
    """
    Write results with a fixed header, LF line endings and 9 significant digits.

    Identical rows give byte-identical files.
    """
    frame = rows if isinstance(rows, pd.DataFrame) else results_frame(rows)
    try:
        frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    except OSError as exc:
        raise ResultsIOError(f"cannot write results to {path}: {exc}") from exc
    logger.info("wrote %d result rows to %s", len(frame), path)
