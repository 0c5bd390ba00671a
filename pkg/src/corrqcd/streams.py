"""Reading and writing streams of n x p data blocks.

Text: a header line ``"n p"``, then each block as n lines of p
whitespace-separated floats, blocks separated by blank lines.
Binary: two little-endian uint64 dims (n, p), then each block as n*p
little-endian float64 values in row-major order.
"""

import struct
from dataclasses import dataclass

import numpy as np

from corrqcd.errors import CorrQcdError

_HEADER = struct.Struct("<QQ")


class StreamFormatError(CorrQcdError):
    pass


@dataclass(frozen=True)
class StreamHeader:
    n: int
    p: int
    format: str = "text"


def _parse_header(line, lineno):
    parts = line.split()
    try:
        n, p = (int(x) for x in parts)
    except ValueError:
        raise StreamFormatError(f"line {lineno}: expected header 'n p', got {line.strip()!r}") from None
    if n < 1 or p < 1:
        raise StreamFormatError(f"line {lineno}: block dimensions must be positive")
    return StreamHeader(n, p, "text")


def read_text_blocks(lines):
    """Yield (header, block) pairs from an iterable of text lines."""
    it = enumerate(lines, start=1)
    header = None
    for lineno, line in it:
        if line.strip():
            header = _parse_header(line, lineno)
            break
    if header is None:
        return
    n, p = header.n, header.p
    rows = []
    block_no = 1
    for lineno, line in it:
        fields = line.split()
        if not fields:
            if rows:
                raise StreamFormatError(
                    f"block {block_no} (line {lineno}): expected {n} rows, got {len(rows)}"
                )
            continue
        if len(fields) != p:
            raise StreamFormatError(
                f"block {block_no} row {len(rows) + 1} (line {lineno}): expected {p} values, got {len(fields)}"
            )
        try:
            rows.append([float(x) for x in fields])
        except ValueError:
            raise StreamFormatError(
                f"block {block_no} row {len(rows) + 1} (line {lineno}): non-numeric value"
            ) from None
        if len(rows) == n:
            yield header, np.array(rows)
            rows = []
            block_no += 1
    if rows:
        raise StreamFormatError(f"block {block_no}: stream ended after {len(rows)} of {n} rows")


def read_binary_blocks(fh):
    """Yield (header, block) pairs from a binary file object."""
    raw = fh.read(_HEADER.size)
    if not raw:
        return
    if len(raw) < _HEADER.size:
        raise StreamFormatError("binary stream: truncated header")
    n, p = _HEADER.unpack(raw)
    header = StreamHeader(int(n), int(p), "binary")
    size = 8 * header.n * header.p
    block_no = 1
    while True:
        buf = fh.read(size)
        if not buf:
            return
        if len(buf) < size:
            raise StreamFormatError(f"binary stream: block {block_no} truncated ({len(buf)} of {size} bytes)")
        yield header, np.frombuffer(buf, dtype="<f8").reshape(header.n, header.p).astype(float)
        block_no += 1


def write_text_blocks(fh, blocks, fmt="%.17g"):
    blocks = list(blocks)
    if not blocks:
        return
    n, p = blocks[0].shape
    fh.write(f"{n} {p}\n")
    for i, b in enumerate(blocks):
        if i:
            fh.write("\n")
        for row in b:
            fh.write(" ".join(fmt % x for x in row) + "\n")


def write_binary_blocks(fh, blocks):
    blocks = list(blocks)
    if not blocks:
        return
    n, p = blocks[0].shape
    fh.write(_HEADER.pack(n, p))
    for b in blocks:
        fh.write(np.ascontiguousarray(b, dtype="<f8").tobytes())


def read_values(lines):
    """Yield floats from a one-value-per-line text stream (blank lines and '#' comments skipped)."""
    for lineno, line in enumerate(lines, start=1):
        s = line.strip()
        if not s or s.startswith("#"):
            continue
        try:
            yield float(s)
        except ValueError:
            raise StreamFormatError(f"line {lineno}: expected one numeric value, got {s!r}") from None
