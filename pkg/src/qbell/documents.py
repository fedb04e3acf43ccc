"""JSON state documents.

Top level ``{"kind", "d", "payload", "metadata", "version"}`` where kind is
one of ``circulant``, ``bell``, ``dense`` or ``family``. Complex numbers are
``[re, im]`` pairs; probability matrices are row-major, m then n.

payload shapes::

    circulant  {"blocks": [block_0, ..., block_{d-1}]}   each block d×d of [re, im]
    bell       {"p": [[p_00, ..., p_0,d-1], ...]}
    dense      {"matrix": [[[re, im], ...], ...]}        d²×d²
    family     {"name": "epsilon" | "gamma" | "delta" | "product", "params": {...}}
"""

import json
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from . import __version__, belldiag, circulant, families
from .belldiag import BellProbabilities
from .circulant import CirculantState
from .errors import DimensionError

KINDS = ("circulant", "bell", "dense", "family")


class DocumentError(ValueError):
    """Malformed or inconsistent state document."""


@dataclass
class StateDocument:
    kind: str
    d: int
    payload: Dict[str, Any]
    metadata: Dict[str, Any] = field(default_factory=dict)
    version: str = __version__

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "d": self.d,
            "payload": self.payload,
            "metadata": self.metadata,
            "version": self.version,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def encode_complex_matrix(M) -> list:
    M = np.asarray(M, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def decode_complex_matrix(data, shape=None) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"complex matrix is not a nested list of [re, im] pairs: {exc}") from None
    if arr.ndim < 1 or arr.shape[-1] != 2:
        raise DocumentError("complex entries must be [re, im] pairs")
    M = arr[..., 0] + 1j * arr[..., 1]
    if shape is not None and M.shape != tuple(shape):
        raise DocumentError(f"expected shape {tuple(shape)}, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DocumentError("complex matrix has non-finite entries")
    return M


def bell_document(bp: BellProbabilities, metadata=None) -> StateDocument:
    return StateDocument("bell", bp.d, {"p": bp.p.tolist()}, dict(metadata or {}))


def circulant_document(cs: CirculantState, metadata=None) -> StateDocument:
    return StateDocument(
        "circulant", cs.d, {"blocks": [encode_complex_matrix(b) for b in cs.blocks]}, dict(metadata or {})
    )


def dense_document(M, d: int, metadata=None) -> StateDocument:
    return StateDocument("dense", d, {"matrix": encode_complex_matrix(M)}, dict(metadata or {}))


def family_document(name: str, params: Dict[str, Any], d: int, metadata=None) -> StateDocument:
    return StateDocument("family", d, {"name": name, "params": dict(params)}, dict(metadata or {}))


def parse_document(data: Dict[str, Any]) -> StateDocument:
    if not isinstance(data, dict):
        raise DocumentError("document must be a JSON object")
    missing = [k for k in ("kind", "d", "payload") if k not in data]
    if missing:
        raise DocumentError(f"document lacks field(s) {missing}")
    kind = data["kind"]
    if kind not in KINDS:
        raise DocumentError(f"unknown kind {kind!r}; expected one of {KINDS}")
    d = data["d"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 1:
        raise DocumentError(f"d must be a positive integer, got {d!r}")
    if not isinstance(data["payload"], dict):
        raise DocumentError("payload must be an object")
    return StateDocument(
        kind, d, data["payload"], dict(data.get("metadata") or {}), str(data.get("version", __version__))
    )


def loads(text: str) -> StateDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from None
    return parse_document(data)


def read_document(path: str) -> StateDocument:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def family_probabilities(name: str, params: Dict[str, Any]) -> BellProbabilities:
    try:
        if name == "epsilon":
            return families.rho_epsilon(float(params["eps"]))
        if name == "gamma":
            return families.rho_gamma(int(params["d"]), float(params["gamma"]))
        if name == "delta":
            pi = params["pi"]
            return families.delta_distribution(len(pi), int(params.get("k", 0)), pi)
        if name == "product":
            return families.product_distribution(len(params["p"]), params["q"], params["p"])
    except KeyError as exc:
        raise DocumentError(f"family {name!r} is missing parameter {exc}") from None
    raise DocumentError(f"unknown family {name!r}")


@dataclass
class LoadedState:
    """A document resolved to numerical objects.

    Dense input off the circulant support is rejected while resolving.
    ``bell`` is set when the state is known (or found) to be Bell diagonal.
    """

    doc: StateDocument
    dense: np.ndarray
    circulant: CirculantState
    bell: Optional[BellProbabilities]


def resolve(doc: StateDocument) -> LoadedState:
    d = doc.d
    p = doc.payload
    bell = None
    try:
        if doc.kind == "bell":
            bell = BellProbabilities(np.asarray(p["p"], dtype=float))
            cs = belldiag.to_circulant(bell)
        elif doc.kind == "family":
            bell = family_probabilities(p.get("name"), p.get("params") or {})
            cs = belldiag.to_circulant(bell)
        elif doc.kind == "circulant":
            blocks = [decode_complex_matrix(b, (d, d)) for b in p["blocks"]]
            if len(blocks) != d:
                raise DocumentError(f"expected {d} blocks, got {len(blocks)}")
            cs = CirculantState(np.array(blocks), validate=False)
        else:
            M = decode_complex_matrix(p["matrix"], (d * d, d * d))
            cs = circulant.from_dense(M, d, validate=False)
    except KeyError as exc:
        raise DocumentError(f"payload for kind {doc.kind!r} lacks {exc}") from None
    except DimensionError as exc:
        raise DocumentError(str(exc)) from None
    if bell is not None and bell.d != d:
        raise DocumentError(f"document declares d={d} but payload has d={bell.d}")
    if bell is None:
        try:
            bell = belldiag.from_circulant(cs)
        except ValueError:
            bell = None
    return LoadedState(doc, circulant.assemble_dense(cs), cs, bell)
