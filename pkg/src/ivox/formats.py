"""Binary model/file formats.

Every format is little-endian with a 4-byte magic and a u32 version:

  IVFX  features      u32 rows, u32 cols, rows*cols f64 row-major
  IVGM  GMM           u32 L, u32 F, weights L f64, means L*F f64, variances L*F f64
  IVSV  supervector   u32 F, u32 L, F*L f64
  IVTV  TV model      u32 D, u32 c, u8 whiten, m D f64, eigenvalues c f64,
                      basis D*c f64 column-major
  IVTL  target list   u32 count, per entry: u16 id length, UTF-8 id, u32 c, c f64

Writes of the target list go through a temp file and an atomic rename.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .adaptation import Supervector
from .errors import UnsupportedFormatError
from .features import FeatureMatrix
from .gmm import GmmModel
from .targets import TargetList
from .total_variability import TotalVariabilityModel

VERSION = 1

FEATURES_MAGIC = b"IVFX"
GMM_MAGIC = b"IVGM"
SUPERVECTOR_MAGIC = b"IVSV"
TV_MAGIC = b"IVTV"
TARGETS_MAGIC = b"IVTL"


class _Reader:
    def __init__(self, path, magic: bytes):
        self.path = path
        self.data = Path(path).read_bytes()
        self.pos = 0
        got = self.take(4)
        if got != magic:
            raise UnsupportedFormatError(
                f"{path}: magic {got!r} is not {magic.decode()!r}"
            )
        version = self.u32()
        if version != VERSION:
            raise UnsupportedFormatError(
                f"{path}: unsupported version {version} (expected {VERSION})"
            )

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise UnsupportedFormatError(f"{self.path}: truncated file")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u8(self) -> int:
        return self.take(1)[0]

    def f64(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)

    def done(self):
        if self.pos != len(self.data):
            raise UnsupportedFormatError(
                f"{self.path}: {len(self.data) - self.pos} trailing bytes"
            )


def _f64_bytes(arr: np.ndarray) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def _header(magic: bytes) -> bytes:
    return struct.pack("<4sI", magic, VERSION)


def write_features(path, features) -> None:
    rows = features.rows if isinstance(features, FeatureMatrix) else np.asarray(
        features, dtype=np.float64
    )
    if rows.ndim != 2:
        raise ValueError(f"features must be 2-D, got shape {rows.shape}")
    blob = _header(FEATURES_MAGIC)
    blob += struct.pack("<II", rows.shape[0], rows.shape[1])
    blob += _f64_bytes(rows)
    Path(path).write_bytes(blob)


def read_features(path) -> np.ndarray:
    r = _Reader(path, FEATURES_MAGIC)
    n_rows, n_cols = r.u32(), r.u32()
    rows = r.f64(n_rows * n_cols).reshape(n_rows, n_cols)
    r.done()
    return rows


def write_features_csv(path, features) -> None:
    """Plain decimal export, one frame per row, 17 significant digits."""
    rows = features.rows if isinstance(features, FeatureMatrix) else np.asarray(
        features, dtype=np.float64
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def write_gmm(path, model: GmmModel) -> None:
    blob = _header(GMM_MAGIC)
    blob += struct.pack("<II", model.n_components, model.dim)
    blob += _f64_bytes(model.weights)
    blob += _f64_bytes(model.means)
    blob += _f64_bytes(model.variances)
    Path(path).write_bytes(blob)


def read_gmm(path) -> GmmModel:
    r = _Reader(path, GMM_MAGIC)
    n_comp, dim = r.u32(), r.u32()
    weights = r.f64(n_comp)
    means = r.f64(n_comp * dim).reshape(n_comp, dim)
    variances = r.f64(n_comp * dim).reshape(n_comp, dim)
    r.done()
    return GmmModel(weights, means, variances)


def write_supervector(path, sv: Supervector) -> None:
    blob = _header(SUPERVECTOR_MAGIC)
    blob += struct.pack("<II", sv.feature_dim, sv.n_components)
    blob += _f64_bytes(sv.values)
    Path(path).write_bytes(blob)


def read_supervector(path) -> Supervector:
    r = _Reader(path, SUPERVECTOR_MAGIC)
    feature_dim, n_comp = r.u32(), r.u32()
    values = r.f64(feature_dim * n_comp)
    r.done()
    return Supervector(values, feature_dim, n_comp)


def write_tv_model(path, model: TotalVariabilityModel) -> None:
    blob = _header(TV_MAGIC)
    blob += struct.pack(
        "<IIB", model.supervector_dim, model.ivector_dim, int(model.whiten)
    )
    blob += _f64_bytes(model.mean_supervector)
    blob += _f64_bytes(model.eigenvalues)
    blob += _f64_bytes(model.basis.flatten(order="F"))  # column-major
    Path(path).write_bytes(blob)


def read_tv_model(path) -> TotalVariabilityModel:
    r = _Reader(path, TV_MAGIC)
    dim, c = r.u32(), r.u32()
    whiten = bool(r.u8())
    mean = r.f64(dim)
    eigenvalues = r.f64(c)
    basis = r.f64(dim * c).reshape(dim, c, order="F")
    r.done()
    return TotalVariabilityModel(mean, basis, eigenvalues, whiten)


def write_target_list(path, targets: TargetList) -> None:
    """Atomic write: the new list replaces the old file or appears fully."""
    blob = _header(TARGETS_MAGIC)
    blob += struct.pack("<I", len(targets))
    for target_id, vec in targets.entries:
        encoded = target_id.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ValueError(f"target id too long ({len(encoded)} bytes)")
        blob += struct.pack("<H", len(encoded)) + encoded
        blob += struct.pack("<I", vec.size)
        blob += _f64_bytes(vec)

    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_target_list(path) -> TargetList:
    r = _Reader(path, TARGETS_MAGIC)
    count = r.u32()
    entries = []
    for _ in range(count):
        id_len = r.u16()
        target_id = r.take(id_len).decode("utf-8")
        c = r.u32()
        entries.append((target_id, r.f64(c)))
    r.done()
    return TargetList(tuple(entries))
