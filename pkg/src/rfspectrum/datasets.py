"""Readers for the two real datasets: MNIST (IDX files) and Bonn EEG (text).

Both readers return vectors already scaled by ``1/sqrt(p)``, matching the
mixture-model normalization, so ``|x| = O(1)``.
"""
from __future__ import annotations

import gzip
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

__all__ = ["RawDataset", "DataFormatError", "read_idx", "read_eeg", "write_idx", "data_dir"]

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
EEG_SEGMENT = 100


class DataFormatError(ValueError):
    """Malformed or inconsistent input file."""


@dataclass(frozen=True)
class RawDataset:
    vectors: np.ndarray   # p x N
    labels: np.ndarray    # N, 1-based
    provenance: str

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=float)
        lab = np.asarray(self.labels, dtype=int)
        if v.ndim != 2 or v.shape[0] == 0 or v.shape[1] == 0:
            raise DataFormatError(f"vectors must be a non-empty p x N matrix, got {v.shape}")
        if lab.shape != (v.shape[1],):
            raise DataFormatError("one label per column required")
        if not np.all(np.isfinite(v)):
            raise DataFormatError("non-finite values in dataset")
        if lab.min() < 1:
            raise DataFormatError("labels must be 1-based")
        v.setflags(write=False)
        lab.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "labels", lab)

    @property
    def p(self) -> int:
        return self.vectors.shape[0]

    @property
    def N(self) -> int:
        return self.vectors.shape[1]

    @property
    def K(self) -> int:
        return int(self.labels.max())


def data_dir() -> Optional[Path]:
    root = os.environ.get("RFSPECTRUM_DATA_DIR")
    return Path(root) if root else None


def _read_bytes(path) -> bytes:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as fh:
        return fh.read()


def _idx_payload(buf: bytes, magic: int, ndims: int, path) -> tuple[tuple, bytes]:
    header = 4 + 4 * ndims
    if len(buf) < header:
        raise DataFormatError(f"{path}: truncated header at offset {len(buf)} (need {header} bytes)")
    found = struct.unpack(">I", buf[:4])[0]
    if found != magic:
        raise DataFormatError(f"{path}: bad magic 0x{found:08x} at offset 0, expected 0x{magic:08x}")
    dims = struct.unpack(f">{ndims}I", buf[4:header])
    need = header + int(np.prod(dims))
    if len(buf) < need:
        raise DataFormatError(f"{path}: truncated data at offset {len(buf)}, expected {need} bytes")
    return dims, buf[header:need]


def _read_idx_pair(images_path, labels_path):
    (n_img, rows, cols), pix = _idx_payload(_read_bytes(images_path), IDX_IMAGES_MAGIC, 3, images_path)
    (n_lab,), lab = _idx_payload(_read_bytes(labels_path), IDX_LABELS_MAGIC, 1, labels_path)
    if n_img != n_lab:
        raise DataFormatError(
            f"{images_path} holds {n_img} images but {labels_path} holds {n_lab} labels (count at offset 4)")
    images = np.frombuffer(pix, dtype=np.uint8).reshape(n_img, rows * cols)
    labels = np.frombuffer(lab, dtype=np.uint8)
    return images, labels


def read_idx(images_path, labels_path, keep_labels: Optional[Iterable[int]] = None,
             extra: Iterable[tuple] = ()) -> RawDataset:
    """Load MNIST-style IDX files.

    Pixels are divided by 255 and each flattened image by ``sqrt(p)``.  Only
    ``keep_labels`` are retained, relabeled ``1..K`` in ascending original
    order.  ``extra`` holds further ``(images, labels)`` path pairs (e.g. the
    test split) concatenated after the first.
    """
    pairs = [(images_path, labels_path), *extra]
    chunks = [_read_idx_pair(i, l) for i, l in pairs]
    images = np.concatenate([c[0] for c in chunks])
    labels = np.concatenate([c[1] for c in chunks])
    keep = sorted(set(int(k) for k in keep_labels)) if keep_labels is not None else sorted(set(labels.tolist()))
    mask = np.isin(labels, keep)
    if not mask.any():
        raise DataFormatError(f"no samples with labels {keep}")
    remap = {orig: i + 1 for i, orig in enumerate(keep)}
    new_labels = np.array([remap[int(v)] for v in labels[mask]], dtype=int)
    X = images[mask].astype(float).T / 255.0
    X /= np.sqrt(X.shape[0])
    recipe = f"idx:{Path(images_path).name}:labels={keep}:scale=/255/sqrt(p)"
    return RawDataset(X, new_labels, recipe)


def write_idx(images_path, labels_path, images, labels) -> None:
    """Write ``N x rows x cols`` uint8 images and labels in IDX format."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols))
        fh.write(images.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, labels.size))
        fh.write(labels.tobytes())


def _read_recording(path: Path, segment_len: int) -> np.ndarray:
    values = []
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(int(text)))
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: non-numeric sample {text!r}") from None
    if len(values) < segment_len:
        raise DataFormatError(f"{path}: only {len(values)} samples, need at least {segment_len}")
    return np.asarray(values)


def read_eeg(dir_set_b, dir_set_e, segment_len: int = EEG_SEGMENT) -> RawDataset:
    """Cut every recording into non-overlapping windows of ``segment_len``.

    The remainder of each recording is dropped.  Windows are divided by
    ``sqrt(p) * s`` with ``s`` the standard deviation of all raw samples of both
    sets.  Label 1 is set B, label 2 is set E.
    """
    recordings, labels = [], []
    for label, folder in ((1, dir_set_b), (2, dir_set_e)):
        files = sorted(p for p in Path(folder).iterdir() if p.is_file() and not p.name.startswith("."))
        if not files:
            raise DataFormatError(f"{folder}: no recordings found")
        for path in files:
            recordings.append(_read_recording(path, segment_len))
            labels.append(label)
    pooled = np.concatenate(recordings)
    s = pooled.std()
    if s == 0:
        raise DataFormatError("all EEG samples are identical; cannot normalize (zero std)")
    windows, window_labels = [], []
    for rec, label in zip(recordings, labels):
        count = rec.size // segment_len
        windows.append(rec[: count * segment_len].reshape(count, segment_len))
        window_labels.extend([label] * count)
    X = np.concatenate(windows).T / (np.sqrt(segment_len) * s)
    recipe = f"eeg:B={Path(dir_set_b).name}:E={Path(dir_set_e).name}:window={segment_len}:scale=/(sqrt(p)*std)"
    return RawDataset(X, np.asarray(window_labels), recipe)
