"""Deterministic file I/O: PGM images, mean-painted renderings, curve CSV.

PGM (P2 ASCII / P5 binary, maxval up to 65535, 16-bit samples big-endian) is
the only image format; output is canonical so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Partition
from .image import Image


class PgmError(ValueError):
    """Base class for PGM format errors."""


class MalformedHeaderError(PgmError):
    pass


class TruncatedRasterError(PgmError):
    pass


class MaxvalRangeError(PgmError):
    pass


def _tokens(data: bytes):
    """Yield whitespace-separated header tokens, skipping '#' comments."""
    i = 0
    n = len(data)
    while i < n:
        c = data[i : i + 1]
        if c in b" \t\r\n":
            i += 1
        elif c == b"#":
            j = data.find(b"\n", i)
            i = n if j < 0 else j + 1
        else:
            j = i
            while j < n and data[j : j + 1] not in b" \t\r\n#":
                j += 1
            yield data[i:j], j
            i = j


def read_pgm(data: bytes) -> Image:
    """Parse a P2 or P5 PGM byte string into an Image (levels = maxval + 1)."""
    if not isinstance(data, (bytes, bytearray, memoryview)):
        raise TypeError("read_pgm expects bytes")
    data = bytes(data)
    toks = _tokens(data)
    try:
        magic, _ = next(toks)
    except StopIteration:
        raise MalformedHeaderError("empty input") from None
    if magic not in (b"P2", b"P5"):
        raise MalformedHeaderError(f"not a PGM: magic {magic!r}")
    header = []
    end = 0
    for _ in range(3):
        try:
            tok, end = next(toks)
            header.append(int(tok))
        except StopIteration:
            raise MalformedHeaderError("header ended before width/height/maxval") from None
        except ValueError:
            raise MalformedHeaderError(f"non-numeric header token {tok!r}") from None
    width, height, maxval = header
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"bad dimensions {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise MaxvalRangeError(f"maxval {maxval} outside [1, 65535]")
    n = width * height
    if magic == b"P5":
        if end >= len(data) or data[end : end + 1] not in b" \t\r\n":
            raise MalformedHeaderError("missing whitespace between maxval and raster")
        raster = data[end + 1 :]  # single whitespace byte after maxval
        if maxval < 256:
            if len(raster) < n:
                raise TruncatedRasterError(f"raster holds {len(raster)} of {n} samples")
            pix = np.frombuffer(raster[:n], dtype=np.uint8).astype(np.int32)
        else:
            if len(raster) < 2 * n:
                raise TruncatedRasterError(f"raster holds {len(raster) // 2} of {n} samples")
            pix = (
                np.frombuffer(raster[: 2 * n], dtype=">u2").astype(np.int32)
            )
    else:
        vals = []
        for tok, _ in toks:
            try:
                vals.append(int(tok))
            except ValueError:
                raise TruncatedRasterError(f"non-numeric sample {tok!r}") from None
            if len(vals) == n:
                break
        if len(vals) < n:
            raise TruncatedRasterError(f"raster holds {len(vals)} of {n} samples")
        pix = np.array(vals, dtype=np.int32)
    if pix.max() > maxval:
        raise TruncatedRasterError(f"sample {int(pix.max())} exceeds maxval {maxval}")
    return Image(width, height, maxval + 1, pix)


def write_pgm(image: Image) -> bytes:
    """Canonical binary PGM: ``P5\\n<w> <h>\\n<maxval>\\n`` then the raster."""
    maxval = image.levels - 1
    header = f"P5\n{image.width} {image.height}\n{maxval}\n".encode("ascii")
    if maxval < 256:
        raster = image.pixels.astype(np.uint8).tobytes()
    else:
        raster = image.pixels.astype(">u2").tobytes()
    return header + raster


def render_partition(p: Partition, image: Image | None = None) -> Image:
    """Paint every pixel with its cluster's mean, rounded half-up."""
    image = image or p.image
    top = max(p.clusters) + 1
    lut = np.zeros(top, dtype=np.int32)
    for cid, st in p.clusters.items():
        lut[cid] = min(image.levels - 1, math.floor(st.mean + 0.5))
    return Image(image.width, image.height, image.levels, lut[p.labels])


@dataclass(frozen=True)
class CurveRecord:
    """One row of a sigma-vs-g curve file."""

    pipeline: str
    g: int
    e: float
    sigma: float
    segment_count: int | None = None


def write_curve_csv(records: list[CurveRecord]) -> bytes:
    """Serialize curve records; floats carry 12 significant digits."""
    lines = ["pipeline,g,E,sigma,segment_count"]
    for r in records:
        seg = "" if r.segment_count is None else str(r.segment_count)
        lines.append(f"{r.pipeline},{r.g},{r.e:.12g},{r.sigma:.12g},{seg}")
    return ("\n".join(lines) + "\n").encode("ascii")


def read_curve_csv(data: bytes) -> list[CurveRecord]:
    """Inverse of ``write_curve_csv`` (used by tests and downstream tools)."""
    lines = data.decode("ascii").splitlines()
    if not lines or lines[0] != "pipeline,g,E,sigma,segment_count":
        raise ValueError("not a curve CSV")
    out = []
    for line in lines[1:]:
        pipeline, g, e, sigma, seg = line.split(",")
        out.append(
            CurveRecord(pipeline, int(g), float(e), float(sigma), int(seg) if seg else None)
        )
    return out
