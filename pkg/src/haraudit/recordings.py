"""Canonical sensor-recording ingestion and corpus-level label bookkeeping.

The canonical on-disk format is a UTF-8 CSV with header
``subject_id,session_id,label,<channel_0>,...,<channel_{n-1}>`` and one row
per sample at a uniform rate. Empty channel cells mark missing values and
are repaired by forward-fill then backward-fill within each recording.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

REQUIRED_COLUMNS = ("subject_id", "session_id", "label")


class CanonicalFormatError(ValueError):
    """Malformed canonical recording CSV; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass
class SensorRecording:
    """One contiguous multichannel sample stream with per-sample labels.

    ``channels`` is shaped [num_samples, num_channels] and ``labels`` holds one
    non-negative class id per sample. ``subject_id``/``session_id`` identify
    the group the recording belongs to for leave-out splitting.
    """

    channels: np.ndarray
    sample_rate: float
    labels: np.ndarray
    subject_id: str
    session_id: str
    channel_names: list[str]

    def __post_init__(self):
        self.channels = np.asarray(self.channels, dtype=float)
        self.labels = np.asarray(self.labels, dtype=int)
        if self.channels.ndim != 2:
            raise ValueError("channels must be a 2-D [samples x channels] array")
        if self.channels.shape[1] < 1:
            raise ValueError("a recording needs at least one channel")
        if self.labels.shape != (self.num_samples,):
            raise ValueError(
                f"labels length {self.labels.shape} does not match "
                f"{self.num_samples} samples"
            )
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if len(self.channel_names) != self.num_channels:
            raise ValueError("channel_names must name every channel")
        if self.num_samples and int(self.labels.min()) < 0:
            raise ValueError("labels must be non-negative class ids")

    @property
    def num_samples(self) -> int:
        return self.channels.shape[0]

    @property
    def num_channels(self) -> int:
        return self.channels.shape[1]


def _fill_missing(column: np.ndarray) -> tuple[np.ndarray, int]:
    """Forward-fill then backward-fill NaNs in a 1-D array.

    Returns the repaired column and the number of cells filled. A column with
    no finite value at all cannot be repaired and is returned unchanged.
    """
    missing = np.isnan(column)
    n_missing = int(missing.sum())
    if n_missing == 0 or n_missing == len(column):
        return column, 0
    idx = np.where(~missing, np.arange(len(column)), -1)
    np.maximum.accumulate(idx, out=idx)
    filled = np.where(idx >= 0, column[np.maximum(idx, 0)], np.nan)
    # Leading gap: backward-fill from the first observed value.
    still = np.isnan(filled)
    if still.any():
        first = int(np.flatnonzero(~still)[0])
        filled[:first] = filled[first]
    return filled, n_missing


def parse_canonical(
    source, sample_rate: float = 100.0
) -> tuple[list[SensorRecording], int]:
    """Parse a canonical recording CSV into recordings grouped by (subject, session).

    ``source`` may be a path or a text/binary stream. Returns the recordings in
    order of first appearance plus the total count of repaired (filled) cells.

    Raises CanonicalFormatError for an empty file, a malformed header, a
    non-integer label, or a channel cell that is neither numeric nor empty.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return parse_canonical(fh, sample_rate=sample_rate)
    if isinstance(source, (bytes, bytearray)):
        return parse_canonical(io.StringIO(source.decode("utf-8")), sample_rate=sample_rate)
    if hasattr(source, "read") and isinstance(source.read(0), bytes):
        source = io.TextIOWrapper(source, encoding="utf-8")

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise CanonicalFormatError("empty file") from None
    header = [h.strip() for h in header]
    if tuple(header[:3]) != REQUIRED_COLUMNS or len(header) < 4:
        raise CanonicalFormatError(
            "header must be subject_id,session_id,label,<channel...>", line=1
        )
    channel_names = header[3:]
    n_channels = len(channel_names)

    # key -> (labels, rows of channel values)
    groups: dict[tuple[str, str], tuple[list[int], list[list[float]]]] = {}
    n_rows = 0
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise CanonicalFormatError(
                f"expected {len(header)} cells, found {len(row)}", line=lineno
            )
        subject, session, label_cell = row[0], row[1], row[2]
        try:
            label = int(label_cell)
        except ValueError:
            raise CanonicalFormatError(
                f"label {label_cell!r} is not an integer", line=lineno
            ) from None
        if label < 0:
            raise CanonicalFormatError(f"label {label} is negative", line=lineno)
        values = []
        for name, cell in zip(channel_names, row[3:]):
            cell = cell.strip()
            if cell == "":
                values.append(np.nan)
                continue
            try:
                values.append(float(cell))
            except ValueError:
                raise CanonicalFormatError(
                    f"channel {name!r} cell {cell!r} is not numeric", line=lineno
                ) from None
        labels, rows = groups.setdefault((subject, session), ([], []))
        labels.append(label)
        rows.append(values)
        n_rows += 1
    if n_rows == 0:
        raise CanonicalFormatError("file contains a header but no samples")

    recordings = []
    repaired = 0
    for (subject, session), (labels, rows) in groups.items():
        channels = np.asarray(rows, dtype=float)
        for c in range(n_channels):
            channels[:, c], n = _fill_missing(channels[:, c])
            repaired += n
        if np.isnan(channels).any():
            bad = [channel_names[c] for c in np.unique(np.nonzero(np.isnan(channels))[1])]
            raise CanonicalFormatError(
                f"recording ({subject!r}, {session!r}): channel(s) {bad} hold no "
                "numeric value to repair from"
            )
        recordings.append(
            SensorRecording(
                channels=channels,
                sample_rate=sample_rate,
                labels=np.asarray(labels, dtype=int),
                subject_id=subject,
                session_id=session,
                channel_names=list(channel_names),
            )
        )
    return recordings, repaired


def write_canonical(recordings: list[SensorRecording], dest) -> None:
    """Write recordings back to canonical CSV (floats as shortest round-trip text)."""
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            write_canonical(recordings, fh)
            return
    if not recordings:
        raise ValueError("nothing to write")
    names = recordings[0].channel_names
    for rec in recordings:
        if rec.channel_names != names:
            raise ValueError("all recordings must share one channel layout")
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(list(REQUIRED_COLUMNS) + names)
    for rec in recordings:
        for i in range(rec.num_samples):
            writer.writerow(
                [rec.subject_id, rec.session_id, int(rec.labels[i])]
                + [repr(float(v)) for v in rec.channels[i]]
            )


def corpus_num_classes(recordings: list[SensorRecording]) -> int:
    """Number of classes across a corpus; ids must form a contiguous 0..C-1 set."""
    if not recordings:
        raise ValueError("empty corpus")
    seen: set[int] = set()
    for rec in recordings:
        seen.update(int(v) for v in np.unique(rec.labels))
    if not seen:
        raise ValueError("corpus holds no labelled samples")
    c = max(seen) + 1
    missing = sorted(set(range(c)) - seen)
    if missing:
        raise ValueError(f"class ids are not contiguous, missing {missing}")
    return c
