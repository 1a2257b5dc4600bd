"""Versioned CSV tables and JSON summaries written by the experiment drivers.

Every CSV starts with a header row ``#brwgibbs-csv,v1,<kind>[,generated=...]``
followed by the column names.  Reals are written with 17 significant
digits so files round-trip bit-exactly.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from typing import Iterable, Optional, Sequence

MAGIC = "#brwgibbs-csv"
VERSION = "v1"

SCHEMAS = {
    "kl-scan": ("beta", "N", "M", "num_seeds", "mean", "std", "p1", "p2", "p4", "error"),
    "runs": ("instance_seed", "algo_seed", "beta", "N", "M", "tau", "kl_exact"),
    "entropy-scan": ("beta", "N", "num_seeds", "mean_H", "std_H", "mean_H_over_N", "rate"),
    "exceptional": ("N", "z", "trials", "successes", "phat", "stderr"),
    "search": ("N", "z", "search_id", "probes", "tau", "found"),
    "max-tail": ("N", "x", "trials", "prob"),
    "leaf-distribution": ("leaf_index", "log_prob"),
    "partition-scan": ("beta", "n", "seed", "logW", "D"),
    "query-trace": ("k", "path", "value"),
}


class SchemaError(ValueError):
    pass


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    return str(value)


def render_csv(kind: str, rows: Iterable[Sequence], deterministic: bool = True,
               timestamp: Optional[str] = None) -> str:
    columns = SCHEMAS[kind]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = [MAGIC, VERSION, kind]
    if not deterministic:
        stamp = timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        header.append(f"generated={stamp}")
    writer.writerow(header)
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise SchemaError(f"{kind} row has {len(row)} fields, expected {len(columns)}")
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def parse_csv(text: str) -> tuple[str, list[str], list[list[str]]]:
    """Return ``(kind, columns, rows)``; rejects unknown versions and kinds."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
        columns = next(reader)
    except StopIteration as exc:
        raise SchemaError("missing header rows") from exc
    if len(header) < 3 or header[0] != MAGIC:
        raise SchemaError(f"not a brwgibbs table: {header!r}")
    if header[1] != VERSION:
        raise SchemaError(f"unsupported table version {header[1]!r}")
    kind = header[2]
    if kind not in SCHEMAS:
        raise SchemaError(f"unknown table kind {kind!r}")
    if tuple(columns) != SCHEMAS[kind]:
        raise SchemaError(f"column mismatch for {kind}: {columns!r}")
    return kind, columns, [row for row in reader]


def read_csv(path) -> tuple[str, list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        return parse_csv(fh.read())


def render_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"
