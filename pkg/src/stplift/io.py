"""JSON descriptions of systems and automata.

System file::

    {"n": 2, "m": 4, "matrices": [[[...], ...], ...],
     "dfa": {"states": 4, "labels": 4, "edges": [[from, to, label], ...]},   # optional
     "omega": [[0, 1, ...], ...],                                            # optional
     "block": 4,                  # optional: bound with the block norm of this size
     "label_words": [[2, 3], ...]}  # optional, written by the T-product lift

A DFA file is the bare ``{"states", "labels", "edges"}`` object.  All indices
are 1-based.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .automaton import Dfa, DfaError
from .systems import ArbitrarySystem, ConstrainedSystem
from .tensor import Word


class LoadError(ValueError):
    pass


@dataclass
class Document:
    system: Optional[ArbitrarySystem]
    dfa: Optional[Dfa] = None
    omega: Optional[np.ndarray] = None
    block: Optional[int] = None
    label_words: Optional[tuple[Word, ...]] = None

    @property
    def constrained(self) -> Optional[ConstrainedSystem]:
        if self.system is None or self.dfa is None:
            return None
        return ConstrainedSystem(self.system, self.dfa, self.label_words)


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture such as ``"example1.json"``."""
    return Path(str(resources.files("stplift") / "data" / name))


def _read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise LoadError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise LoadError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise LoadError(f"{path}: top-level value must be an object")
    return data


def _int_field(data: dict, key: str, where: str) -> int:
    if key not in data:
        raise LoadError(f"{where}: missing field {key!r}")
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise LoadError(f"{where}: field {key!r} must be a positive integer, got {v!r}")
    return v


def _dfa_from(data, where: str) -> Dfa:
    if not isinstance(data, dict):
        raise LoadError(f"{where}: must be an object")
    try:
        return Dfa.from_dict(data)
    except (DfaError, TypeError) as exc:
        raise LoadError(f"{where}: {exc}") from exc


def parse_document(data: dict, where: str = "<input>") -> Document:
    if "matrices" not in data:
        if "edges" in data:
            return Document(None, dfa=_dfa_from(data, where))
        raise LoadError(f"{where}: missing field 'matrices'")
    n = _int_field(data, "n", where)
    m = _int_field(data, "m", where)
    raw = data["matrices"]
    if not isinstance(raw, list) or len(raw) != m:
        raise LoadError(f"{where}: field 'matrices' must hold m = {m} matrices")
    mats = []
    for i, a in enumerate(raw):
        try:
            arr = np.array(a, dtype=float)
        except (TypeError, ValueError) as exc:
            raise LoadError(f"{where}: matrices[{i}] is not numeric: {exc}") from exc
        if arr.shape != (n, n):
            raise LoadError(f"{where}: matrices[{i}] has shape {arr.shape}, expected ({n}, {n})")
        if not np.all(np.isfinite(arr)):
            raise LoadError(f"{where}: matrices[{i}] has non-finite entries")
        mats.append(arr)
    doc = Document(ArbitrarySystem(tuple(mats)))
    if data.get("dfa") is not None:
        doc.dfa = _dfa_from(data["dfa"], f"{where}: field 'dfa'")
        if doc.dfa.num_labels != m:
            raise LoadError(f"{where}: field 'dfa' has {doc.dfa.num_labels} labels but m = {m}")
    if data.get("omega") is not None:
        om = np.array(data["omega"])
        if om.shape != (m, m) or not np.all((om == 0) | (om == 1)):
            raise LoadError(f"{where}: field 'omega' must be an {m}x{m} 0/1 matrix")
        doc.omega = om.astype(int)
    if data.get("block") is not None:
        doc.block = _int_field(data, "block", where)
        if n % doc.block:
            raise LoadError(f"{where}: field 'block' = {doc.block} does not divide n = {n}")
    if data.get("label_words") is not None:
        words = data["label_words"]
        if not isinstance(words, list) or len(words) != m:
            raise LoadError(f"{where}: field 'label_words' must list one word per label")
        arity = max(max(w) for w in words)
        doc.label_words = tuple(Word(tuple(w), arity) for w in words)
    return doc


def load_document(path) -> Document:
    return parse_document(_read_json(path), str(path))


def load_system(path) -> Union[ConstrainedSystem, ArbitrarySystem]:
    """Matrices plus optional DFA; a file without ``"dfa"`` gives an :class:`ArbitrarySystem`."""
    doc = load_document(path)
    if doc.system is None:
        raise LoadError(f"{path}: file describes a DFA, not a system")
    return doc.constrained or doc.system


def load_dfa(path) -> Dfa:
    doc = load_document(path)
    if doc.dfa is None:
        raise LoadError(f"{path}: no DFA found")
    return doc.dfa


def system_to_dict(
    system: ArbitrarySystem,
    *,
    dfa: Optional[Dfa] = None,
    omega=None,
    block: Optional[int] = None,
    label_words=None,
) -> dict:
    out: dict = {
        "n": system.dim,
        "m": system.arity,
        "matrices": [a.tolist() for a in system.matrices],
    }
    if dfa is not None:
        out["dfa"] = dfa.to_dict()
    if omega is not None:
        out["omega"] = np.asarray(omega).astype(int).tolist()
    if block is not None:
        out["block"] = int(block)
    if label_words is not None:
        out["label_words"] = [list(w.labels) for w in label_words]
    return out


def dumps(data) -> str:
    return json.dumps(data, indent=2) + "\n"
