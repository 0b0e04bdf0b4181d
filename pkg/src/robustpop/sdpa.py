"""Sparse SDPA file format (``.dat-s``) reader and writer.

Layout::

    * optional comment header (formulation tag, params, offset, labels)
    m                      number of constraint matrices / variables
    nblocks
    s1 s2 ...              signed block sizes, negative = diagonal block
    c1 c2 ... cm
    matno blockno i j value    (1-based, i <= j), matno 0 is F_0

Values are written with 17 significant digits so doubles round-trip.
"""

from __future__ import annotations

import os
import re
from fractions import Fraction

from .relax import Formulation, SdpInstance

__all__ = ["SdpaFormatError", "dumps_sdpa", "export_sdpa", "import_sdpa", "loads_sdpa"]


class SdpaFormatError(ValueError):
    pass


def _fmt(v) -> str:
    return format(float(v), ".17g")


def dumps_sdpa(sdp: SdpInstance) -> str:
    lines = []
    if sdp.tag is not None:
        lines.append(f"* formulation: {sdp.tag.value}")
    if sdp.params:
        lines.append("* params: " + " ".join(f"{k}={v}" for k, v in sdp.params))
    if float(sdp.offset) != 0.0:
        lines.append(f"* offset: {_fmt(sdp.offset)}")
    if sdp.labels:
        lines.append("* labels: " + " ".join(sdp.labels))
    lines.append(str(sdp.m))
    lines.append(str(len(sdp.block_sizes)))
    lines.append(" ".join(str(b) for b in sdp.block_sizes))
    lines.append(" ".join(_fmt(v) for v in sdp.c))
    for i, mat in enumerate(sdp.F):
        for (b, r, c) in sorted(mat):
            v = mat[(b, r, c)]
            if float(v) != 0.0:
                lines.append(f"{i} {b + 1} {r + 1} {c + 1} {_fmt(v)}")
    return "\n".join(lines) + "\n"


def export_sdpa(sdp: SdpInstance, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_sdpa(sdp))


_SPLIT = re.compile(r"[\s,{}()]+")


def _numbers(line: str) -> list[str]:
    return [tok for tok in _SPLIT.split(line) if tok]


def loads_sdpa(text: str) -> SdpInstance:
    tag = None
    params: list[tuple[str, str]] = []
    offset: object = Fraction(0)
    labels: tuple[str, ...] = ()
    body: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line[0] in "*\"":
            meta = line[1:].strip()
            key, sep, value = meta.partition(":")
            if not sep:
                continue
            key, value = key.strip(), value.strip()
            if key == "formulation":
                try:
                    tag = Formulation(value)
                except ValueError as exc:
                    raise SdpaFormatError(f"line {lineno}: unknown formulation {value!r}") from exc
            elif key == "params":
                params = [tuple(tok.split("=", 1)) for tok in value.split()]
            elif key == "offset":
                offset = float(value)
            elif key == "labels":
                labels = tuple(value.split())
            continue
        body.append((lineno, line))

    if len(body) < 4:
        raise SdpaFormatError("truncated file: need m, nblocks, block sizes and c")
    try:
        m = int(_numbers(body[0][1])[0])
        nblocks = int(_numbers(body[1][1])[0])
        sizes = tuple(int(tok) for tok in _numbers(body[2][1])[:nblocks])
    except (ValueError, IndexError) as exc:
        raise SdpaFormatError(f"line {body[0][0]}: malformed header") from exc
    if len(sizes) != nblocks or any(s == 0 for s in sizes):
        raise SdpaFormatError(f"line {body[2][0]}: expected {nblocks} nonzero block sizes")
    # the cost vector may wrap over several lines
    idx = 3
    c_tokens: list[str] = []
    while len(c_tokens) < m and idx < len(body):
        c_tokens += _numbers(body[idx][1])
        idx += 1
    if len(c_tokens) != m:
        raise SdpaFormatError(f"line {body[min(idx, len(body)) - 1][0]}: expected {m} costs")
    try:
        c = tuple(float(tok) for tok in c_tokens)
    except ValueError as exc:
        raise SdpaFormatError("non-numeric cost vector") from exc

    F: list[dict] = [{} for _ in range(m + 1)]
    for lineno, line in body[idx:]:
        toks = _numbers(line)
        if len(toks) != 5:
            raise SdpaFormatError(f"line {lineno}: expected 'matno block i j value'")
        try:
            k, b, i, j = (int(t) for t in toks[:4])
            v = float(toks[4])
        except ValueError as exc:
            raise SdpaFormatError(f"line {lineno}: malformed entry") from exc
        if not 0 <= k <= m:
            raise SdpaFormatError(f"line {lineno}: matrix number {k} out of range")
        if not 1 <= b <= nblocks:
            raise SdpaFormatError(f"line {lineno}: block {b} out of range")
        size = abs(sizes[b - 1])
        if not (1 <= i <= size and 1 <= j <= size):
            raise SdpaFormatError(f"line {lineno}: index ({i},{j}) outside block of size {size}")
        if sizes[b - 1] < 0 and i != j:
            raise SdpaFormatError(f"line {lineno}: off-diagonal entry in diagonal block {b}")
        r, cc = min(i, j) - 1, max(i, j) - 1
        key = (b - 1, r, cc)
        if key in F[k] and F[k][key] != v:
            raise SdpaFormatError(f"line {lineno}: non-symmetric entry ({i},{j}) in matrix {k}")
        F[k][key] = v
    if labels and len(labels) != m:
        labels = ()
    return SdpInstance(sizes, c, tuple(F), offset, tag, tuple(params), labels)


def import_sdpa(path: str | os.PathLike) -> SdpInstance:
    with open(path, encoding="ascii") as fh:
        return loads_sdpa(fh.read())
