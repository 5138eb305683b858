"""Readers and writers for the on-disk formats.

* ``groups.csv``: header ``node_1,...,node_n``, one 0/1 row per group.
* ``labels.csv``: header ``z``, one external label per line (1..n_L, 0 for
  hubless groups in the null variant).
* ``params.json``: ``{"variant", "n_L", "n", "rho", "A"}``; for the null
  variant ``rho[0]`` is the hubless probability and ``A[0]`` is ``pi``.

All files are UTF-8 with LF line endings.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .model import GroupedData, InvalidInputError, Params, Variant, from_external, make_params, to_external


class FormatError(InvalidInputError):
    pass


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8", newline="\n")


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


def params_to_dict(params: Params) -> dict:
    return {"variant": params.variant.value, "n_L": params.n_L, "n": params.n,
            "rho": params.rho.tolist(), "A": params.A.tolist()}


def params_from_dict(d: dict) -> Params:
    try:
        params = make_params(d["variant"], d["rho"], d["A"])
    except KeyError as exc:
        raise FormatError(f"params missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad params: {exc}") from exc
    for key in ("n_L", "n"):
        if key in d and d[key] != getattr(params, key):
            raise FormatError(f"params field {key}={d[key]} disagrees with A")
    return params


def write_params(path, params: Params):
    write_json(path, params_to_dict(params))


def read_params(path) -> Params:
    return params_from_dict(read_json(path))


def write_groups(path, data: GroupedData):
    header = ",".join(f"node_{j + 1}" for j in range(data.n))
    body = "\n".join(",".join(map(str, row)) for row in data.memberships.tolist())
    Path(path).write_text(header + "\n" + body + "\n", encoding="utf-8", newline="\n")


def read_groups(path) -> GroupedData:
    """Parse groups.csv.  Errors name the offending 1-based data row."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not rows:
        raise FormatError(f"{path}: empty file")
    header, body = rows[0], [r for r in rows[1:] if r]
    n = len(header)
    if header != [f"node_{j + 1}" for j in range(n)]:
        raise FormatError(f"{path}: header must be node_1..node_{n}")
    if not body:
        raise FormatError(f"{path}: no groups")
    G = np.empty((len(body), n), dtype=np.uint8)
    for t, row in enumerate(body, start=1):
        if len(row) != n:
            raise FormatError(f"{path}: row {t} has {len(row)} entries, expected {n}")
        try:
            values = [int(v) for v in row]
        except ValueError:
            raise FormatError(f"{path}: row {t} has a non-binary entry") from None
        if any(v not in (0, 1) for v in values):
            raise FormatError(f"{path}: row {t} has a non-binary entry")
        G[t - 1] = values
    return GroupedData(G)


def write_labels(path, labels, variant):
    ext = to_external(labels, variant)
    Path(path).write_text("z\n" + "".join(f"{v}\n" for v in ext.tolist()),
                          encoding="utf-8", newline="\n")


def read_labels(path, variant) -> np.ndarray:
    """Parse labels.csv into internal row indices."""
    variant = Variant.parse(variant)
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not lines or lines[0].strip() != "z":
        raise FormatError(f"{path}: header must be 'z'")
    values = []
    for t, line in enumerate(lines[1:], start=1):
        if not line.strip():
            continue
        try:
            values.append(int(line))
        except ValueError:
            raise FormatError(f"{path}: row {t} is not an integer label") from None
    ext = np.array(values, dtype=np.int64)
    if variant is Variant.ASYMMETRIC and (ext < 1).any():
        raise FormatError(f"{path}: label 0 is only allowed for the null variant")
    return from_external(ext, variant)
