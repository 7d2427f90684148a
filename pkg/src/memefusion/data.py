"""Meme metadata and region-feature ingestion.

Metadata travels as JSON Lines (one object per meme: ``id``, ``img``,
``text``, optional ``label``). Region features travel as MFB1 banks, a small
little-endian binary format so any detector backend can feed the pipeline:

    magic "MFB1" | u32 entry_count | u32 dim
    per entry: u64 id | u32 n_boxes | n_boxes*dim float32, row-major

Loads are pure and the returned containers are safe to share between threads;
nothing mutates them after construction.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .tagging import TagVector

MFB1_MAGIC = b"MFB1"
MAX_BOXES = 120
KNOWN_SPLITS = ("train", "dev_seen", "dev_unseen", "test_seen", "test_unseen")


class DataFormatError(ValueError):
    """A data file violates its documented format."""


@dataclass(frozen=True)
class MemeRecord:
    """One meme: unique id, image path, caption text, optional binary label."""

    id: int
    img: str
    text: str
    label: int | None = None


@dataclass(frozen=True)
class SplitSet:
    """An ordered, duplicate-free list of records under a split name."""

    name: str
    records: tuple[MemeRecord, ...]

    def __post_init__(self):
        seen = set()
        for r in self.records:
            if r.id in seen:
                raise ValueError(f"duplicate id {r.id} in split {self.name!r}")
            seen.add(r.id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[MemeRecord]:
        return iter(self.records)

    def __getitem__(self, i: int) -> MemeRecord:
        return self.records[i]

    def ids(self) -> list[int]:
        return [r.id for r in self.records]

    def labels(self) -> np.ndarray:
        missing = [r.id for r in self.records if r.label is None]
        if missing:
            raise ValueError(f"split {self.name!r} has unlabeled records: ids {missing[:10]}")
        return np.asarray([r.label for r in self.records], dtype=np.int64)


def _parse_record(obj: dict, where: str) -> MemeRecord:
    for field in ("id", "img", "text"):
        if field not in obj:
            raise DataFormatError(f"{where}: missing required field {field!r}")
    meme_id = obj["id"]
    if type(meme_id) is not int or meme_id < 0:
        raise DataFormatError(f"{where}: id must be a non-negative integer, got {meme_id!r}")
    img, text = obj["img"], obj["text"]
    if not isinstance(img, str) or not isinstance(text, str):
        raise DataFormatError(f"{where}: img and text must be strings")
    if not text.strip():
        raise DataFormatError(f"{where}: text is empty")
    label = obj.get("label")
    if label is not None and label not in (0, 1):
        raise DataFormatError(f"{where}: label must be 0 or 1, got {label!r}")
    return MemeRecord(id=meme_id, img=img, text=text, label=label)


def load_jsonl(path, name: str | None = None) -> SplitSet:
    """Load a JSON Lines metadata file, preserving input order.

    The split name defaults to the file stem when it is one of the challenge
    split names, otherwise "custom".
    """
    if name is None:
        import os

        stem = os.path.splitext(os.path.basename(str(path)))[0]
        name = stem if stem in KNOWN_SPLITS else "custom"
    records: list[MemeRecord] = []
    seen: dict[int, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise DataFormatError(f"{path}:{lineno}: expected a JSON object")
            record = _parse_record(obj, f"{path}:{lineno}")
            if record.id in seen:
                raise DataFormatError(
                    f"{path}:{lineno}: duplicate id {record.id} (first seen on line {seen[record.id]})"
                )
            seen[record.id] = lineno
            records.append(record)
    return SplitSet(name=name, records=tuple(records))


def save_jsonl(path, split: SplitSet) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for r in split:
            obj = {"id": r.id, "img": r.img, "text": r.text}
            if r.label is not None:
                obj["label"] = r.label
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


class FeatureBank:
    """Mapping id -> (n_boxes, dim) float32 region-feature matrix.

    Entry order is preserved so that save/load round-trips byte-identically.
    Matrices are marked read-only after construction.
    """

    def __init__(self, entries: Mapping[int, np.ndarray] | Iterable[tuple[int, np.ndarray]]):
        items = entries.items() if isinstance(entries, Mapping) else entries
        self._entries: dict[int, np.ndarray] = {}
        self._dim: int | None = None
        for meme_id, values in items:
            arr = np.ascontiguousarray(values, dtype=np.float32)
            if arr.ndim != 2:
                raise ValueError(f"entry {meme_id}: expected a 2-D matrix, got shape {arr.shape}")
            n_boxes, dim = arr.shape
            if not 1 <= n_boxes <= MAX_BOXES:
                raise ValueError(f"entry {meme_id}: n_boxes must be in [1, {MAX_BOXES}], got {n_boxes}")
            if self._dim is None:
                self._dim = dim
            elif dim != self._dim:
                raise ValueError(f"entry {meme_id}: dim {dim} != bank dim {self._dim}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"entry {meme_id}: non-finite feature value")
            if meme_id in self._entries:
                raise ValueError(f"duplicate feature entry for id {meme_id}")
            arr.flags.writeable = False
            self._entries[int(meme_id)] = arr

    @property
    def dim(self) -> int:
        if self._dim is None:
            raise ValueError("empty feature bank has no dim")
        return self._dim

    def ids(self) -> list[int]:
        return list(self._entries)

    def items(self):
        return self._entries.items()

    def __contains__(self, meme_id: int) -> bool:
        return meme_id in self._entries

    def __getitem__(self, meme_id: int) -> np.ndarray:
        return self._entries[meme_id]

    def __len__(self) -> int:
        return len(self._entries)


def load_features(path) -> FeatureBank:
    """Load an MFB1 feature bank; values round-trip bit-exactly with save_features."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MFB1_MAGIC:
        raise DataFormatError(f"{path}: bad magic {blob[:4]!r}, expected {MFB1_MAGIC!r}")
    if len(blob) < 12:
        raise DataFormatError(f"{path}: truncated header")
    entry_count, dim = struct.unpack_from("<II", blob, 4)
    if dim < 1:
        raise DataFormatError(f"{path}: dim must be >= 1, got {dim}")
    offset = 12
    entries: list[tuple[int, np.ndarray]] = []
    for i in range(entry_count):
        if offset + 12 > len(blob):
            raise DataFormatError(f"{path}: truncated at entry {i}")
        meme_id, n_boxes = struct.unpack_from("<QI", blob, offset)
        offset += 12
        if not 1 <= n_boxes <= MAX_BOXES:
            raise DataFormatError(
                f"{path}: entry id {meme_id} has n_boxes {n_boxes}, expected 1..{MAX_BOXES}"
            )
        nbytes = n_boxes * dim * 4
        if offset + nbytes > len(blob):
            raise DataFormatError(f"{path}: truncated payload for entry id {meme_id}")
        arr = np.frombuffer(blob, dtype="<f4", count=n_boxes * dim, offset=offset)
        offset += nbytes
        matrix = arr.reshape(n_boxes, dim).copy()
        if not np.all(np.isfinite(matrix)):
            raise DataFormatError(f"{path}: non-finite value in entry id {meme_id}")
        entries.append((meme_id, matrix))
    if offset != len(blob):
        raise DataFormatError(f"{path}: {len(blob) - offset} trailing bytes after last entry")
    return FeatureBank(entries)


def save_features(path, bank: FeatureBank) -> None:
    """Write an MFB1 bank (inverse of load_features; exists for testability)."""
    with open(path, "wb") as fh:
        fh.write(MFB1_MAGIC)
        fh.write(struct.pack("<II", len(bank), bank.dim if len(bank) else 0))
        for meme_id, matrix in bank.items():
            fh.write(struct.pack("<QI", meme_id, matrix.shape[0]))
            fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


@dataclass(frozen=True)
class Example:
    """A record joined with its region features and (optionally) its tags."""

    record: MemeRecord
    features: np.ndarray
    tags: TagVector | None = None

    @property
    def id(self) -> int:
        return self.record.id


def join(split: SplitSet, bank: FeatureBank,
         tags: Mapping[int, TagVector] | None = None) -> list[Example]:
    """Pair every record with its feature matrix (and tag row when supplied)."""
    missing = [r.id for r in split if r.id not in bank]
    if missing:
        raise ValueError(f"feature bank is missing entries for ids: {missing}")
    tags = tags or {}
    return [Example(record=r, features=bank[r.id], tags=tags.get(r.id)) for r in split]


def merge_dedup(a: SplitSet, b: SplitSet) -> SplitSet:
    """Union of two splits by id: a's order first, then b's unseen ids in b's order.

    Records sharing an id must agree on text and label; a conflicting
    duplicate is an error rather than a silent overwrite.
    """
    by_id = {r.id: r for r in a}
    merged = list(a.records)
    conflicts = []
    for r in b:
        prev = by_id.get(r.id)
        if prev is None:
            by_id[r.id] = r
            merged.append(r)
        elif prev.text != r.text or prev.label != r.label:
            conflicts.append(r.id)
    if conflicts:
        raise ValueError(f"conflicting duplicate records for ids: {conflicts}")
    return SplitSet(name="custom", records=tuple(merged))


def class_balance(split: SplitSet) -> tuple[int, int]:
    """(hateful, non-hateful) counts; every record must be labeled."""
    labels = split.labels()
    n_pos = int(labels.sum())
    return n_pos, len(labels) - n_pos
