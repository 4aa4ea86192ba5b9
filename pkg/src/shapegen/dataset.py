"""Training-set construction and versioned JSON persistence.

Every file is a single JSON container::

    {"schema_version": 1, "type": "...", "manifest": {...},
     "content_hash": "<sha256>", "payload": {...}}

``content_hash`` is the SHA-256 of the canonical payload bytes (sorted keys,
compact separators, shortest round-trip floats), so it is platform stable and
changes with any edit of the payload. The manifest carries descriptive
metadata, including a ``created`` timestamp that is left out of the hash.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .errors import ConfigError, StorageError, SupportError
from .farfield import AdmissibleSet, QuadratureConfig, ShapeGenerator, farfield
from .geometry import ShapeFamily, check_support
from .learner import CharacteristicGrid, SplineModel, TrainingDataset
from .reconstruct import ReconstructionField

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXTENSIONS = {"generator": ".sgen.json", "dataset": ".sds.json", "model": ".smod.json", "field": ".sfld.json"}


def build_dataset(grid: CharacteristicGrid, family: ShapeFamily, adm: AdmissibleSet,
                  quad: QuadratureConfig, progress: Callable[[int, int], None] | None = None,
                  threads: int = 1) -> TrainingDataset:
    """One far-field computation per grid node, gathered into a complete tensor.

    Nodes may run concurrently (``threads``); each result is stored by its
    node index, so the tensor does not depend on scheduling.
    """
    if len(family.bindings) != grid.M:
        raise ConfigError(f"family binds {len(family.bindings)} axes but the grid has {grid.M}")
    nodes = list(grid.indices())
    shapes = []
    for idx in nodes:
        shape = family.shape(grid.node(idx).values)
        try:
            check_support(shape, adm.a)
        except SupportError as exc:
            raise SupportError(f"grid node {idx}: {exc}") from None
        shapes.append(shape)
    values = np.empty((len(nodes), len(adm)), dtype=complex)
    done = 0

    def work(i):
        values[i] = farfield(shapes[i], adm, quad).values
        return i

    workers = threads if threads > 0 else (os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for _ in pool.map(work, range(len(nodes))):
            done += 1
            if progress is not None:
                progress(done, len(nodes))
    log.info("built %d generators on a %s grid", len(nodes), "x".join(map(str, grid.shape)))
    return TrainingDataset(grid, adm, values.reshape(*grid.shape, len(adm)), family, quad)


# --- encoding ------------------------------------------------------------------

def _complex_list(arr) -> list:
    arr = np.asarray(arr, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in arr]


def _complex_array(obj, shape) -> np.ndarray:
    raw = np.array(obj, dtype=float).reshape(-1, 2)
    return (raw[:, 0] + 1j * raw[:, 1]).reshape(shape)


def _encode(obj):
    if isinstance(obj, ShapeGenerator):
        return "generator", obj.to_json(), obj.adm.to_json()
    if isinstance(obj, TrainingDataset):
        payload = {"grid": obj.grid.to_json(), "adm": obj.adm.to_json(),
                   "values": [_complex_list(obj.values[idx]) for idx in obj.grid.indices()]}
        family, quad = obj.family, obj.quad
        payload["shape_family"] = family.to_json() if family is not None else None
        payload["quad"] = quad.to_json() if quad is not None else None
        manifest = {**obj.adm.to_json(), "grid": obj.grid.to_json(),
                    "shape_family": payload["shape_family"], "quad": payload["quad"]}
        return "dataset", payload, manifest
    if isinstance(obj, SplineModel):
        return "model", obj.to_json(), {**obj.adm.to_json(), "grid": obj.grid.to_json(), "basis": obj.basis}
    if isinstance(obj, ReconstructionField):
        return "field", obj.to_json(), {"d": obj.d, "a": obj.a, "resolution": obj.resolution}
    raise ConfigError(f"cannot serialise {type(obj).__name__}")


def _decode(kind, payload):
    if kind == "generator":
        return ShapeGenerator.from_json(payload)
    if kind == "dataset":
        grid = CharacteristicGrid.from_json(payload["grid"])
        adm = AdmissibleSet.from_json(payload["adm"])
        values = np.array([_complex_array(v, (len(adm),)) for v in payload["values"]])
        fam, quad = payload.get("shape_family"), payload.get("quad")
        return TrainingDataset(grid, adm, values.reshape(*grid.shape, len(adm)),
                               ShapeFamily.from_json(fam) if fam else None,
                               QuadratureConfig.from_json(quad) if quad else None)
    if kind == "model":
        return SplineModel.from_json(payload)
    if kind == "field":
        return ReconstructionField.from_json(payload)
    raise StorageError(f"unknown object type {kind!r}")


def canonical_bytes(payload) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False).encode()


def content_hash(payload) -> str:
    return hashlib.sha256(canonical_bytes(payload)).hexdigest()


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = float(epoch) if epoch else time.time()
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(t))


def save(obj, path) -> None:
    kind, payload, manifest = _encode(obj)
    manifest = {"schema_version": SCHEMA_VERSION, **manifest, "created": _timestamp()}
    container = {"schema_version": SCHEMA_VERSION, "type": kind, "manifest": manifest,
                 "content_hash": content_hash(payload), "payload": payload}
    try:
        with open(path, "w") as fh:
            fh.write(json.dumps(container, sort_keys=True, separators=(",", ":"), allow_nan=False))
            fh.write("\n")
    except OSError as exc:
        raise StorageError(f"cannot write {path}: {exc}") from exc


def load(path):
    try:
        with open(path) as fh:
            container = json.load(fh)
    except OSError as exc:
        raise StorageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise StorageError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(container, dict) or "payload" not in container:
        raise StorageError(f"{path} is not a shapegen container")
    version = container.get("schema_version")
    if version != SCHEMA_VERSION:
        raise StorageError(f"{path} has schema_version {version}; this reader supports {SCHEMA_VERSION}")
    payload = container["payload"]
    if content_hash(payload) != container.get("content_hash"):
        raise StorageError(f"{path}: content hash mismatch, payload was modified")
    try:
        return _decode(container.get("type"), payload)
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, StorageError):
            raise
        raise StorageError(f"{path}: malformed payload ({exc})") from exc
