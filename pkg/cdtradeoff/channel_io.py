"""JSON channel and auxiliary-law documents.

Layout::

    {
      "name": "multiplicative",
      "alphabets": {"X": 2, "Y1": 2, "Y2": 2, "Z": {"size": 4, "labels": [...]}, "S1": 2, "S2": 2},
      "state_law": [p(0,0), p(0,1), ...],            # row-major over (s1, s2)
      "transition": [[[ [pmf over (y1, y2, z)] ]]],   # indexed [s1][s2][x]
      "distortion": {"receiver1": "hamming", "receiver2": [[0, 1], [1, 0]]}
    }
"""
from __future__ import annotations

import json
import logging
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np

from .auxiliary import INNER_NAMES, InnerAuxiliary
from .channels import DistortionMeasure, SdmbcSpec, hamming_matrix
from .config import DEFAULT_NORMALIZATION_TOL
from .errors import SchemaError
from .exports import write_json_atomic
from .logging_utils import channel_log_context, log_with_context
from .prob import Kernel, LabeledJoint, Pmf

REQUIRED_ALPHABETS = ("X", "Y1", "Y2", "Z", "S1", "S2")
OPTIONAL_ALPHABETS = ("Shat1", "Shat2")
HAMMING = "hamming"


def _parse_alphabet(name: str, entry: Any) -> Tuple[int, Optional[Tuple[str, ...]]]:
    labels: Optional[Tuple[str, ...]] = None
    if isinstance(entry, Mapping):
        if "size" not in entry:
            raise SchemaError(f"alphabet {name} is missing 'size'")
        size = entry["size"]
        if entry.get("labels") is not None:
            if not isinstance(entry["labels"], list):
                raise SchemaError(f"labels of alphabet {name} must be a list")
            labels = tuple(str(label) for label in entry["labels"])
    else:
        size = entry
    if isinstance(size, bool) or not isinstance(size, int) or size < 1:
        raise SchemaError(f"alphabet {name} must have a positive integer size, got {size!r}")
    return size, labels


def _as_array(value: Any, what: str) -> np.ndarray:
    try:
        array = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{what} must be an array of numbers") from exc
    if array.dtype == object:
        raise SchemaError(f"{what} must be a rectangular array of numbers")
    return array


def _parse_distortion(entry: Any, state_size: int, shat_size: Optional[int], k: int) -> np.ndarray:
    if entry is None or entry == HAMMING:
        return hamming_matrix(state_size, shat_size)
    matrix = _as_array(entry, f"distortion of receiver {k}")
    if matrix.ndim != 2 or matrix.shape[0] != state_size:
        raise SchemaError(f"distortion of receiver {k} must be a |S{k}| x |Shat{k}| matrix, got shape {matrix.shape}")
    if shat_size is not None and matrix.shape[1] != shat_size:
        raise SchemaError(f"distortion of receiver {k} has {matrix.shape[1]} columns, Shat{k} has {shat_size} symbols")
    return matrix


def load_channel(document: Mapping[str, Any], *, tol: float = DEFAULT_NORMALIZATION_TOL) -> SdmbcSpec:
    if not isinstance(document, Mapping):
        raise SchemaError("channel document must be a JSON object")
    for key in ("alphabets", "state_law", "transition"):
        if key not in document:
            raise SchemaError(f"channel document is missing {key!r}")

    alphabets_doc = document["alphabets"]
    if not isinstance(alphabets_doc, Mapping):
        raise SchemaError("'alphabets' must be an object")
    sizes: Dict[str, int] = {}
    labels: Dict[str, Tuple[str, ...]] = {}
    for name in REQUIRED_ALPHABETS + OPTIONAL_ALPHABETS:
        if name not in alphabets_doc:
            if name in REQUIRED_ALPHABETS:
                raise SchemaError(f"alphabet {name} is missing")
            continue
        size, names = _parse_alphabet(name, alphabets_doc[name])
        sizes[name] = size
        if names is not None:
            labels[name] = names
    unknown = sorted(set(alphabets_doc) - set(REQUIRED_ALPHABETS + OPTIONAL_ALPHABETS))
    if unknown:
        raise SchemaError(f"unknown alphabets {unknown}")

    s1, s2, x = sizes["S1"], sizes["S2"], sizes["X"]
    out_shape = (sizes["Y1"], sizes["Y2"], sizes["Z"])

    state_law = _as_array(document["state_law"], "state_law")
    if state_law.ndim != 1 or state_law.size != s1 * s2:
        raise SchemaError(f"state_law must be a flat array of {s1 * s2} entries")

    transition = _as_array(document["transition"], "transition")
    expected = (s1, s2, x, int(np.prod(out_shape)))
    if transition.shape != expected:
        raise SchemaError(f"transition must be indexed [s1][s2][x] -> pmf; expected shape {expected}, got {transition.shape}")

    distortion_doc = document.get("distortion") or {}
    if not isinstance(distortion_doc, Mapping):
        raise SchemaError("'distortion' must be an object")
    distortion = DistortionMeasure(
        _parse_distortion(distortion_doc.get("receiver1"), s1, sizes.get("Shat1"), 1),
        _parse_distortion(distortion_doc.get("receiver2"), s2, sizes.get("Shat2"), 2),
    )
    labels.pop("Shat1", None)
    labels.pop("Shat2", None)

    spec = SdmbcSpec(
        name=str(document.get("name", "custom")),
        state_law=Pmf(state_law.reshape(s1, s2), tol=tol),
        transition=Kernel((s1, s2, x), out_shape, transition.reshape((s1, s2, x) + out_shape), tol=tol),
        distortion=distortion,
        labels=labels,
    )
    log_with_context(logging.DEBUG, "Loaded channel document", **channel_log_context(spec))
    return spec


def _distortion_entry(matrix: np.ndarray) -> Any:
    if matrix.shape[0] == matrix.shape[1] and np.array_equal(matrix, hamming_matrix(matrix.shape[0])):
        return HAMMING
    return matrix.tolist()


def save_channel(spec: SdmbcSpec) -> Dict[str, Any]:
    assert spec.distortion is not None
    alphabets: Dict[str, Any] = {}
    for name, size in spec.alphabet_sizes.items():
        names = spec.labels.get(name)
        alphabets[name] = {"size": size, "labels": list(names)} if names else size
    return {
        "name": spec.name,
        "alphabets": alphabets,
        "state_law": spec.state_law.flat().tolist(),
        "transition": spec.transition.table.reshape(spec.s1_size, spec.s2_size, spec.x_size, -1).tolist(),
        "distortion": {
            "receiver1": _distortion_entry(spec.distortion.d1),
            "receiver2": _distortion_entry(spec.distortion.d2),
        },
    }


def load_channel_file(path: str, *, tol: float = DEFAULT_NORMALIZATION_TOL) -> SdmbcSpec:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})") from exc
    return load_channel(document, tol=tol)


def save_channel_file(path: str, spec: SdmbcSpec) -> None:
    write_json_atomic(path, save_channel(spec), indent=2)
    log_with_context(logging.INFO, "Saved channel document", path=path, **channel_log_context(spec))


def load_inner_aux(document: Mapping[str, Any], *, tol: float = DEFAULT_NORMALIZATION_TOL) -> InnerAuxiliary:
    """``law`` is indexed [u0][u1][u2][x]; ``v_kernel`` is indexed [u0][u1][u2][z][v0][v1][v2]."""
    if not isinstance(document, Mapping):
        raise SchemaError("auxiliary document must be a JSON object")
    for key in ("law", "v_kernel"):
        if key not in document:
            raise SchemaError(f"auxiliary document is missing {key!r}")
    law = _as_array(document["law"], "law")
    if law.ndim != 4:
        raise SchemaError(f"law must be indexed [u0][u1][u2][x], got {law.ndim} axes")
    v_table = _as_array(document["v_kernel"], "v_kernel")
    if v_table.ndim != 7:
        raise SchemaError(f"v_kernel must be indexed [u0][u1][u2][z][v0][v1][v2], got {v_table.ndim} axes")
    return InnerAuxiliary(
        LabeledJoint(INNER_NAMES, law, tol=tol),
        Kernel(v_table.shape[:4], v_table.shape[4:], v_table, tol=tol),
    )


def save_inner_aux(aux: InnerAuxiliary) -> Dict[str, Any]:
    return {"law": aux.law.probs.tolist(), "v_kernel": aux.v_kernel.table.tolist()}


def load_inner_aux_file(path: str, *, tol: float = DEFAULT_NORMALIZATION_TOL) -> InnerAuxiliary:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})") from exc
    aux = load_inner_aux(document, tol=tol)
    log_with_context(logging.DEBUG, "Loaded auxiliary document", path=path, u_shape=aux.law.probs.shape[:3])
    return aux
