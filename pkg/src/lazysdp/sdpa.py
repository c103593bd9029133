"""Reader/writer for a single-block subset of the SDPA sparse text format.

Layout::

    m
    nblocks          (must be 1)
    n                (block size, positive)
    b_1 ... b_m
    matno blockno i j value     (matno 0 is C, 1..m are A_1..A_m; 1-based i, j)

Lines starting with ``"`` or ``*`` are comments. Separators ``{ } ( ) ,`` are
treated as whitespace. Entries with ``i > j`` are read as their mirror ``(j, i)``;
a repeated ``(matno, i, j)`` is an error rather than being summed.
"""
from __future__ import annotations

import io
import math
import os
import re

import numpy as np

from .errors import ParseError
from .model import SdpInstance

_SEP = re.compile(r"[{}(),]")


def _tokens(line: str) -> list[str]:
    return _SEP.sub(" ", line).split()


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        value = float(tok)
    except ValueError:
        raise ParseError(f"{what}: expected an integer, got {tok!r}", lineno) from None
    if not math.isfinite(value) or value != int(value):
        raise ParseError(f"{what}: expected an integer, got {tok!r}", lineno)
    return int(value)


def _float(tok: str, lineno: int, what: str) -> float:
    try:
        value = float(tok)
    except ValueError:
        raise ParseError(f"{what}: expected a number, got {tok!r}", lineno) from None
    if not math.isfinite(value):
        raise ParseError(f"{what}: non-finite value {tok!r}", lineno)
    return value


def parse_sdpa(text: str | bytes) -> SdpInstance:
    """Parse SDPA-sparse text into a dense :class:`SdpInstance`."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8 text ({exc.reason})") from None

    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped[0] in "\"*":
            continue
        lines.append((lineno, stripped))

    def header(idx: int, what: str):
        if idx >= len(lines):
            raise ParseError(f"unexpected end of input: missing {what}", len(text.splitlines()) or 1)
        return lines[idx]

    lineno, line = header(0, "constraint count")
    toks = _tokens(line)
    if not toks:
        raise ParseError("missing constraint count", lineno)
    m = _int(toks[0], lineno, "constraint count")
    if m < 0:
        raise ParseError(f"constraint count must be non-negative, got {m}", lineno)

    lineno, line = header(1, "block count")
    toks = _tokens(line)
    nblocks = _int(toks[0], lineno, "block count") if toks else None
    if nblocks != 1:
        raise ParseError(f"exactly one block is supported, got {nblocks}", lineno)

    lineno, line = header(2, "block size")
    toks = _tokens(line)
    if len(toks) != 1:
        raise ParseError(f"expected one block size, got {len(toks)} values", lineno)
    n = _int(toks[0], lineno, "block size")
    if n <= 0:
        raise ParseError(f"block size must be positive, got {n} (LP blocks unsupported)", lineno)

    idx = 3
    if m > 0:
        lineno, line = header(idx, "objective vector b")
        toks = _tokens(line)
        if len(toks) != m:
            raise ParseError(f"expected {m} values of b, got {len(toks)}", lineno)
        b_vals = [_float(t, lineno, "b entry") for t in toks]
        idx += 1
    else:
        b_vals = []
        if idx < len(lines) and not _tokens(lines[idx][1]):
            idx += 1

    C = np.zeros((n, n))
    A = np.zeros((m, n, n))
    seen: set[tuple[int, int, int]] = set()
    for lineno, line in lines[idx:]:
        toks = _tokens(line)
        if len(toks) != 5:
            raise ParseError(f"entry line needs 5 fields 'matno block i j value', got {len(toks)}", lineno)
        matno = _int(toks[0], lineno, "matrix number")
        block = _int(toks[1], lineno, "block number")
        i = _int(toks[2], lineno, "row index")
        j = _int(toks[3], lineno, "column index")
        value = _float(toks[4], lineno, "entry value")
        if not 0 <= matno <= m:
            raise ParseError(f"matrix number {matno} out of range 0..{m}", lineno)
        if block != 1:
            raise ParseError(f"block number {block} out of range (only block 1 exists)", lineno)
        if not (1 <= i <= n and 1 <= j <= n):
            raise ParseError(f"index ({i}, {j}) out of range 1..{n}", lineno)
        if i > j:
            i, j = j, i
        key = (matno, i, j)
        if key in seen:
            raise ParseError(f"duplicate entry for matrix {matno} at ({i}, {j})", lineno)
        seen.add(key)
        M = C if matno == 0 else A[matno - 1]
        M[i - 1, j - 1] = value
        M[j - 1, i - 1] = value
    return SdpInstance(C, A, np.asarray(b_vals))


def emit_sdpa(inst: SdpInstance) -> str:
    """Serialize the upper triangles of ``C`` and ``A_i``; values use ``repr`` so round-trips are exact."""
    out = io.StringIO()
    out.write(f"{inst.m}\n1\n{inst.n}\n")
    out.write(" ".join(repr(float(v)) for v in inst.b) + "\n")
    iu, ju = np.triu_indices(inst.n)
    for matno, M in enumerate([inst.C, *inst.A]):
        vals = M[iu, ju]
        for i, j, v in zip(iu[vals != 0], ju[vals != 0], vals[vals != 0]):
            out.write(f"{matno} 1 {i + 1} {j + 1} {float(v)!r}\n")
    return out.getvalue()


def read_sdpa(path: str | os.PathLike) -> SdpInstance:
    with open(path, "rb") as fh:
        return parse_sdpa(fh.read())


def write_sdpa(inst: SdpInstance, path: str | os.PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(emit_sdpa(inst))
