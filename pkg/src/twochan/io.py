"""File formats: instances, solution blocks, sweep specifications, digests.

Every document is JSON with a schema_version field. Complex entries are
stored as [re, im] pairs in row-major order; Python's float formatting is
shortest-round-trip, so values survive a write/read cycle bit for bit.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InstanceFormatError, TwoChanError
from .model import TwoChannelHamiltonian

SCHEMA_VERSION = 1

INSTANCE_KIND = "two-channel-instance"
SOLUTION_KIND = "channel-solution-block"
EIGENVALUES_KIND = "channel-eigenvalues"
REPORT_KIND = "verification-report"
SWEEP_KIND = "sweep-spec"


def encode_matrix(m) -> list:
    arr = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


def encode_vector(v) -> list:
    arr = np.asarray(v, dtype=np.complex128).ravel()
    return [[float(z.real), float(z.imag)] for z in arr]


def _decode_pair(pair, where: str) -> complex:
    ok = (
        isinstance(pair, list)
        and len(pair) == 2
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
    )
    if not ok:
        raise InstanceFormatError(f"{where}: expected an [re, im] pair of numbers")
    re, im = float(pair[0]), float(pair[1])
    if not (math.isfinite(re) and math.isfinite(im)):
        raise InstanceFormatError(f"{where}: non-finite entry")
    return complex(re, im)


def decode_matrix(obj, name: str, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise InstanceFormatError(f"{name}: expected a non-empty list of rows")
    if rows is not None and len(obj) != rows:
        raise InstanceFormatError(f"{name}: expected {rows} rows, got {len(obj)}")
    width = None
    data = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or not row:
            raise InstanceFormatError(f"{name}[{i}]: expected a non-empty row")
        if width is None:
            width = len(row)
            if cols is not None and width != cols:
                raise InstanceFormatError(f"{name}: expected {cols} columns, got {width}")
        elif len(row) != width:
            raise InstanceFormatError(
                f"{name}[{i}]: row length {len(row)} differs from {width}"
            )
        data.append([_decode_pair(pair, f"{name}[{i}][{j}]") for j, pair in enumerate(row)])
    return np.array(data, dtype=np.complex128)


def decode_vector(obj, name: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise InstanceFormatError(f"{name}: expected a non-empty list of [re, im] pairs")
    return np.array(
        [_decode_pair(pair, f"{name}[{j}]") for j, pair in enumerate(obj)],
        dtype=np.complex128,
    )


def dumps_stable(doc) -> str:
    """Deterministic human-readable JSON; non-finite numbers are refused."""
    return json.dumps(doc, indent=2, allow_nan=False)


def _require_positive_int(doc: dict, key: str, source: str) -> int:
    value = doc.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise InstanceFormatError(f"{source}: field {key}: expected a positive integer, got {value!r}")
    return value


def _check_schema(doc, source: str, kind: str) -> None:
    if not isinstance(doc, dict):
        raise InstanceFormatError(f"{source}: expected a JSON object at top level")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InstanceFormatError(
            f"{source}: unsupported schema_version {version!r} (expected {SCHEMA_VERSION})"
        )
    if doc.get("kind") != kind:
        raise InstanceFormatError(
            f"{source}: field kind: expected {kind!r}, got {doc.get('kind')!r}"
        )


def _load_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InstanceFormatError(f"{path}: cannot read file: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(
            f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}"
        ) from None


def instance_to_dict(h: TwoChannelHamiltonian, metadata: dict | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": INSTANCE_KIND,
        "n1": h.n1,
        "n2": h.n2,
        "a1": encode_matrix(h.a1),
        "a2": encode_matrix(h.a2),
        "b12": encode_matrix(h.b12),
    }
    if metadata:
        doc["metadata"] = metadata
    return doc


def instance_from_dict(doc, source: str = "instance") -> tuple[TwoChannelHamiltonian, dict]:
    _check_schema(doc, source, INSTANCE_KIND)
    n1 = _require_positive_int(doc, "n1", source)
    n2 = _require_positive_int(doc, "n2", source)
    a1 = decode_matrix(doc.get("a1"), f"{source}: field a1", rows=n1, cols=n1)
    a2 = decode_matrix(doc.get("a2"), f"{source}: field a2", rows=n2, cols=n2)
    b12 = decode_matrix(doc.get("b12"), f"{source}: field b12", rows=n1, cols=n2)
    try:
        h = TwoChannelHamiltonian(a1=a1, a2=a2, b12=b12)
    except TwoChanError as exc:
        raise InstanceFormatError(f"{source}: {exc}") from None
    metadata = doc.get("metadata", {})
    if not isinstance(metadata, dict):
        raise InstanceFormatError(f"{source}: field metadata: expected an object")
    return h, metadata


def read_instance(path) -> tuple[TwoChannelHamiltonian, dict]:
    return instance_from_dict(_load_json(path), source=str(path))


def write_instance(h: TwoChannelHamiltonian, path, metadata: dict | None = None) -> None:
    Path(path).write_text(dumps_stable(instance_to_dict(h, metadata)) + "\n", encoding="utf-8")


def instance_digest(h: TwoChannelHamiltonian) -> str:
    """Content hash of the mathematical payload; metadata never contributes."""
    payload = {
        "schema_version": SCHEMA_VERSION,
        "n1": h.n1,
        "n2": h.n2,
        "a1": encode_matrix(h.a1),
        "a2": encode_matrix(h.a2),
        "b12": encode_matrix(h.b12),
    }
    canonical = json.dumps(payload, separators=(",", ":"), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_matrix_document(path, channel: int, name: str, m, extra: dict | None = None) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": SOLUTION_KIND,
        "channel": channel,
        "name": name,
        "matrix": encode_matrix(m),
    }
    if extra:
        doc["diagnostics"] = extra
    Path(path).write_text(dumps_stable(doc) + "\n", encoding="utf-8")


def read_matrix_document(path) -> tuple[np.ndarray, dict]:
    doc = _load_json(path)
    _check_schema(doc, str(path), SOLUTION_KIND)
    matrix = decode_matrix(doc.get("matrix"), f"{path}: field matrix")
    return matrix, doc


def write_eigenvalues_document(path, channel: int, values) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": EIGENVALUES_KIND,
        "channel": channel,
        "eigenvalues": encode_vector(values),
    }
    Path(path).write_text(dumps_stable(doc) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian grid of generator parameters plus solver and tolerance settings."""

    n1_values: tuple[int, ...]
    n2_values: tuple[int, ...]
    gap_values: tuple[float, ...]
    coupling_values: tuple[float, ...]
    seed_values: tuple[int, ...]
    solver: dict
    tolerances: dict
    allow_inadmissible: bool
    independent_solve: bool
    output_dir: str | None

    def points(self) -> list[tuple[int, int, float, float, int]]:
        """Grid points in deterministic row-major order."""
        return list(
            itertools.product(
                self.n1_values,
                self.n2_values,
                self.gap_values,
                self.coupling_values,
                self.seed_values,
            )
        )

    @property
    def size(self) -> int:
        return (
            len(self.n1_values)
            * len(self.n2_values)
            * len(self.gap_values)
            * len(self.coupling_values)
            * len(self.seed_values)
        )


def _grid_axis(grid: dict, key: str, source: str, caster, validator, expectation: str) -> tuple:
    raw = grid.get(key)
    if not isinstance(raw, list) or not raw:
        raise InstanceFormatError(
            f"{source}: field grid.{key}: expected a non-empty list"
        )
    out = []
    for idx, item in enumerate(raw):
        numeric = not isinstance(item, bool) and isinstance(item, (int, float))
        if not numeric or not validator(float(item)):
            raise InstanceFormatError(
                f"{source}: field grid.{key}[{idx}]: expected {expectation}, got {item!r}"
            )
        out.append(caster(item))
    return tuple(out)


def read_sweep_spec(path) -> SweepSpec:
    doc = _load_json(path)
    source = str(path)
    _check_schema(doc, source, SWEEP_KIND)
    grid = doc.get("grid")
    if not isinstance(grid, dict):
        raise InstanceFormatError(f"{source}: field grid: expected an object")
    n1_values = _grid_axis(
        grid, "n1", source, int, lambda v: v.is_integer() and v >= 1, "a positive integer"
    )
    n2_values = _grid_axis(
        grid, "n2", source, int, lambda v: v.is_integer() and v >= 1, "a positive integer"
    )
    gap_values = _grid_axis(
        grid, "gap", source, float, lambda v: math.isfinite(v) and v > 0.0, "a positive number"
    )
    coupling_values = _grid_axis(
        grid,
        "coupling_scale",
        source,
        float,
        lambda v: math.isfinite(v) and 0.0 < v < 1.0,
        "a number strictly between 0 and 1",
    )
    seed_values = _grid_axis(
        grid, "seeds", source, int, lambda v: v.is_integer(), "an integer"
    )
    solver = doc.get("solver", {})
    tolerances = doc.get("tolerances", {})
    for key, value in (("solver", solver), ("tolerances", tolerances)):
        if not isinstance(value, dict):
            raise InstanceFormatError(f"{source}: field {key}: expected an object")
    allow_inadmissible = doc.get("allow_inadmissible", False)
    independent_solve = doc.get("independent_solve", False)
    for key, value in (
        ("allow_inadmissible", allow_inadmissible),
        ("independent_solve", independent_solve),
    ):
        if not isinstance(value, bool):
            raise InstanceFormatError(f"{source}: field {key}: expected true or false")
    output_dir = doc.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        raise InstanceFormatError(f"{source}: field output_dir: expected a string")
    return SweepSpec(
        n1_values=n1_values,
        n2_values=n2_values,
        gap_values=gap_values,
        coupling_values=coupling_values,
        seed_values=seed_values,
        solver=solver,
        tolerances=tolerances,
        allow_inadmissible=allow_inadmissible,
        independent_solve=independent_solve,
        output_dir=output_dir,
    )
