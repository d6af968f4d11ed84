"""File formats: generator-set JSON and point-cloud CSV.

Generator-set schema::

    {"n": int, "p": int,
     "matrices": [ p arrays of n rows of n [re, im] pairs ],
     "labels": [str, ...]?}

Floats are written with ``repr`` so numeric content round-trips bit for
bit through parse -> serialize -> parse.
"""

from __future__ import annotations

import json

import numpy as np

from .algebra import GeneratorFamily, verify_commuting
from .dynamics import OrbitCloud
from .errors import ParseError


def family_to_dict(family: GeneratorFamily) -> dict:
    out = {
        "n": family.n,
        "p": family.p,
        "matrices": [
            [[[float(v.real), float(v.imag)] for v in row] for row in g]
            for g in family.generators
        ],
    }
    if family.labels:
        out["labels"] = list(family.labels)
    return out


def dump_family(family: GeneratorFamily, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(family_to_dict(family), fh, indent=1)
        fh.write("\n")


def _entry(value, where: str) -> complex:
    if (
        not isinstance(value, (list, tuple))
        or len(value) != 2
        or not all(isinstance(t, (int, float)) for t in value)
    ):
        raise ParseError(f"{where}: entries must be [re, im] number pairs")
    return complex(value[0], value[1])


def family_from_dict(data, tol_comm: float = 1e-10) -> GeneratorFamily:
    if not isinstance(data, dict):
        raise ParseError("top level must be a JSON object")
    for key in ("n", "p", "matrices"):
        if key not in data:
            raise ParseError(f"missing required field '{key}'")
    n, p = data["n"], data["p"]
    if not isinstance(n, int) or n < 1:
        raise ParseError("field 'n' must be a positive integer")
    if not isinstance(p, int) or p < 1:
        raise ParseError("field 'p' must be a positive integer")
    mats_raw = data["matrices"]
    if not isinstance(mats_raw, list) or len(mats_raw) != p:
        raise ParseError(f"field 'matrices' must list exactly p = {p} matrices")
    mats = []
    for mi, rows in enumerate(mats_raw, start=1):
        if not isinstance(rows, list) or len(rows) != n or any(
            not isinstance(r, list) for r in rows
        ):
            shape = (
                f"{len(rows)}x{len(rows[0]) if rows and isinstance(rows[0], list) else '?'}"
                if isinstance(rows, list)
                else "not a list"
            )
            raise ParseError(f"matrix {mi} is {shape}, expected {n}x{n}")
        m = np.empty((n, n), dtype=complex)
        for ri, row in enumerate(rows):
            if len(row) != n:
                raise ParseError(f"matrix {mi} is {len(rows)}x{len(row)}, expected {n}x{n}")
            for ci, v in enumerate(row):
                m[ri, ci] = _entry(v, f"matrix {mi}, row {ri + 1}, column {ci + 1}")
        mats.append(m)
    labels = data.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or len(labels) != p or any(
            not isinstance(s, str) for s in labels
        ):
            raise ParseError("field 'labels' must list p strings")
    return verify_commuting(mats, tol=tol_comm, labels=labels)


def load_family(path: str, tol_comm: float = 1e-10) -> GeneratorFamily:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return family_from_dict(data, tol_comm)


def validate_roundtrip(path: str) -> bool:
    """parse -> serialize -> parse must reproduce identical numeric content."""
    first = load_family(path)
    text = json.dumps(family_to_dict(first))
    second = family_from_dict(json.loads(text))
    if first.n != second.n or first.p != second.p:
        return False
    for g1, g2 in zip(first.generators, second.generators):
        if not np.array_equal(g1, g2):
            return False
    return True


def cloud_to_csv(cloud: OrbitCloud, path: str) -> None:
    """Header k1..kp, re1, im1, ..., ren, imn, saturated; full-precision floats."""
    p, n = cloud.p, cloud.n
    header = (
        [f"k{j + 1}" for j in range(p)]
        + [f"{part}{i + 1}" for i in range(n) for part in ("re", "im")]
        + ["saturated"]
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in range(len(cloud)):
            cells = [str(int(k)) for k in cloud.exponents[row]]
            for i in range(n):
                z = cloud.points[row, i]
                cells.append(repr(float(z.real)))
                cells.append(repr(float(z.imag)))
            cells.append("1" if cloud.saturated[row] else "0")
            fh.write(",".join(cells) + "\n")
