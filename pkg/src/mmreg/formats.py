"""On-disk formats: binary PGM, raw float grids and dataset manifests.

F64G layout: the 4 bytes ``b"F64G"``, width and height as little-endian uint32,
then ``width * height`` little-endian float64 values in row-major order.

PGM pixels are cast straight to float (no rescaling by maxval), so a 16-bit
image keeps its counts.
"""

from __future__ import annotations

import json
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .grid import Displacement, Grid, GridLike, as_grid

__all__ = [
    "FormatError",
    "read_f64g",
    "write_f64g",
    "read_pgm",
    "write_pgm",
    "read_image",
    "ImageRecord",
    "DatasetManifest",
    "MANIFEST_NAME",
]

F64G_MAGIC = b"F64G"
MANIFEST_NAME = "manifest.json"


class FormatError(ValueError):
    """A file is not a valid PGM/F64G image or manifest."""


def write_f64g(path, grid: GridLike) -> None:
    g = as_grid(grid)
    header = F64G_MAGIC + struct.pack("<II", g.width, g.height)
    Path(path).write_bytes(header + g.values.astype("<f8").tobytes())


def _parse_f64g(data: bytes) -> Grid:
    if len(data) < 12 or data[:4] != F64G_MAGIC:
        raise FormatError("missing F64G header")
    width, height = struct.unpack("<II", data[4:12])
    expected = 12 + 8 * width * height
    if width < 1 or height < 1 or len(data) != expected:
        raise FormatError(f"F64G payload holds {len(data) - 12} bytes, expected {expected - 12}")
    return Grid(np.frombuffer(data, dtype="<f8", offset=12).reshape(height, width))


def read_f64g(path) -> Grid:
    return _parse_f64g(Path(path).read_bytes())


_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*(\S+)")


def _parse_pgm(data: bytes) -> Grid:
    fields, pos = [], 0
    for _ in range(4):
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise FormatError("truncated PGM header")
        fields.append(m.group(1))
        pos = m.end()
    if fields[0] != b"P5":
        raise FormatError(f"only binary PGM (P5) is supported, got {fields[0]!r}")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError as exc:
        raise FormatError("non-integer field in PGM header") from exc
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError("invalid PGM dimensions or maxval")
    # exactly one whitespace byte separates maxval from the raster
    pos += 1
    dtype = np.dtype("u1") if maxval < 256 else np.dtype(">u2")
    n = width * height * dtype.itemsize
    raster = data[pos:pos + n]
    if len(raster) != n:
        raise FormatError(f"PGM raster holds {len(raster)} bytes, expected {n}")
    return Grid(np.frombuffer(raster, dtype=dtype).reshape(height, width).astype(np.float64))


def read_pgm(path) -> Grid:
    return _parse_pgm(Path(path).read_bytes())


def write_pgm(path, grid: GridLike, maxval: int | None = None) -> None:
    """Write a P5 file; values are rounded and clipped to ``[0, maxval]``.

    ``maxval`` defaults to 255 when every value fits in a byte, else 65535.
    """
    v = np.rint(as_grid(grid).values)
    if maxval is None:
        maxval = 255 if v.max() <= 255 else 65535
    if not 0 < maxval < 65536:
        raise ValueError("maxval must be in [1, 65535]")
    dtype = "u1" if maxval < 256 else ">u2"
    pixels = np.clip(v, 0, maxval).astype(dtype)
    h, w = pixels.shape
    Path(path).write_bytes(b"P5\n%d %d\n%d\n" % (w, h, maxval) + pixels.tobytes())


def read_image(path) -> Grid:
    """Read a PGM or F64G file, chosen by its magic bytes."""
    data = Path(path).read_bytes()
    if data[:4] == F64G_MAGIC:
        return _parse_f64g(data)
    if data[:2] == b"P5":
        return _parse_pgm(data)
    raise FormatError(f"{path}: unrecognised image format")


@dataclass
class ImageRecord:
    """One manifest row. ``role`` is ``"reference"`` or ``"target"``."""

    file: str
    dx: float
    dy: float
    psnr_db: float | None
    seed: int | None
    role: str = "target"

    @property
    def truth(self) -> Displacement:
        return Displacement(self.dx, self.dy)


@dataclass
class DatasetManifest:
    """Images of a generated set, their ground truth, and how they were made."""

    kind: str
    images: list[ImageRecord]
    params: dict[str, Any] = field(default_factory=dict)
    run: dict[str, Any] = field(default_factory=dict)

    @property
    def reference(self) -> ImageRecord:
        for rec in self.images:
            if rec.role == "reference":
                return rec
        raise FormatError("manifest has no reference image")

    @property
    def targets(self) -> list[ImageRecord]:
        return [rec for rec in self.images if rec.role != "reference"]

    def to_json(self) -> str:
        doc = {
            "kind": self.kind,
            "params": self.params,
            "run": self.run,
            "images": [vars(rec) for rec in self.images],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def write(self, directory) -> Path:
        path = Path(directory) / MANIFEST_NAME
        path.write_text(self.to_json(), encoding="utf-8", newline="\n")
        return path

    @classmethod
    def read(cls, directory) -> DatasetManifest:
        path = Path(directory) / MANIFEST_NAME
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
            images = [ImageRecord(**rec) for rec in doc["images"]]
            return cls(doc["kind"], images, doc.get("params", {}), doc.get("run", {}))
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise FormatError(f"{path}: malformed manifest") from exc
