"""File formats: atomic JSON/CSV writers, points CSV reader, metadata sidecars."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=True) + "\n"


def write_json(path, doc) -> None:
    _atomic_write(path, dumps(doc))


def config_hash(doc) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


def fmt(x: float) -> str:
    # repr round-trips doubles exactly
    return repr(float(x))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    _atomic_write(path, buf.getvalue())


def write_with_sidecar(path, header, rows, metadata: dict) -> None:
    """CSV at ``path`` plus ``<path>.meta.json`` holding ``metadata``."""
    write_csv(path, header, rows)
    write_json(str(path) + ".meta.json", metadata)


def read_points_csv(path, k=None):
    """Read ``x1..xk,value`` rows.

    The header must name the coordinate columns ``x1``..``xk`` and a
    ``value`` column; column order is free.

    Returns:
        (locations (n, k), values (n,))
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}:1: empty file, expected a header row") from None
        if "value" not in header:
            raise ParseError(f"{path}:1: header has no 'value' column")
        coords = sorted((h for h in header if h.startswith("x") and h[1:].isdigit()), key=lambda h: int(h[1:]))
        if not coords or (k is not None and len(coords) != k):
            raise ParseError(f"{path}:1: expected coordinate columns x1..x{k or 'k'}, got {header}")
        idx = [header.index(c) for c in coords]
        vidx = header.index("value")
        locs, vals = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            point = []
            for name, i in zip(coords + ["value"], idx + [vidx]):
                try:
                    v = float(row[i])
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: field '{name}': not a number: {row[i]!r}") from None
                if not np.isfinite(v):
                    raise ParseError(f"{path}:{lineno}: field '{name}': non-finite value")
                point.append(v)
            locs.append(point[:-1])
            vals.append(point[-1])
    if not locs:
        raise ParseError(f"{path}: no data rows")
    return np.array(locs), np.array(vals)
