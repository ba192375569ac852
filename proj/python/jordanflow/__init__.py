"""Jordan decompositions of linear flows and their dynamics on projective and flag manifolds.

The report functions accept a matrix as a nested list, a numpy array or a
``{"n": ..., "rows": ...}`` dict, and return the report as a dict in the same
format the ``jflow`` command writes.
"""

import json

import numpy as np

from . import _core
from ._core import JordanFlowError, ParseError, SCHEMA_VERSION, additive_jordan, multiplicative_jordan

__all__ = [
    "JordanFlowError",
    "ParseError",
    "SCHEMA_VERSION",
    "additive_jordan",
    "multiplicative_jordan",
    "decompose",
    "analyze",
    "chain_oracle",
    "floquet",
    "simulate",
    "classify_flag",
    "error_kind",
    "exit_code",
]


def _matrix_doc(m):
    if isinstance(m, dict):
        return m
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise ParseError("expected a 2-d matrix")
    return {"n": a.shape[0], "rows": a.tolist()}


def _periodic_doc(c):
    def rows(a):
        return np.asarray(a, dtype=float).tolist()

    doc = {"T": float(c.get("T", 1.0)), "A0": rows(c["A0"]), "harmonics": []}
    for h in c.get("harmonics", []):
        entry = {"k": int(h["k"])}
        for key in ("A", "B"):
            if key in h:
                entry[key] = rows(h[key])
        doc["harmonics"].append(entry)
    return doc


def _flag(dims):
    if isinstance(dims, str):
        return dims
    if isinstance(dims, int):
        return str(dims)
    return ",".join(str(int(d)) for d in dims)


def error_kind(err):
    """Kind name carried by a JordanFlowError, e.g. 'GridTooLarge'."""
    return str(err).split(":", 1)[0]


def exit_code(err):
    """Exit code the jflow command would return for this exception."""
    if isinstance(err, ParseError):
        return 2
    if isinstance(err, JordanFlowError):
        return _core.exit_code_for(error_kind(err))
    return 1


def decompose(matrix, **opts):
    return json.loads(_core.decompose(json.dumps(_matrix_doc(matrix)), **opts))


def analyze(matrix, flag=(1,), simulate=0, seed=1, **opts):
    return json.loads(_core.analyze(json.dumps(_matrix_doc(matrix)), _flag(flag), simulate, seed, **opts))


def chain_oracle(matrix, resolution=500, eps=0.01, min_time=1.0, reference_radius=None, **opts):
    text = _core.chain_oracle(json.dumps(_matrix_doc(matrix)), resolution, eps, min_time, reference_radius, **opts)
    return json.loads(text)


def floquet(coefficient, steps=1024, flag=(1,), **opts):
    """``coefficient`` is a dict with T, A0 and harmonics [{k, A, B}], as in the periodic input files."""
    return json.loads(_core.floquet(json.dumps(_periodic_doc(coefficient)), steps, _flag(flag), **opts))


def simulate(matrix, start, times, **opts):
    """Returns (report, csv_text)."""
    text, csv = _core.simulate(json.dumps(_matrix_doc(matrix)), list(map(float, start)), list(map(float, times)), **opts)
    return json.loads(text), csv


def classify_flag(matrix, basis, flag=(1,), **opts):
    b = np.asarray(basis, dtype=float)
    basis_doc = basis if isinstance(basis, dict) else {"n": b.shape[0], "rows": b.tolist()}
    return json.loads(_core.classify_flag(json.dumps(_matrix_doc(matrix)), json.dumps(basis_doc), _flag(flag), **opts))
