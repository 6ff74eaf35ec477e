"""JSON state files, settings files and report documents."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .analysis import DistillCertificate, PptReport, ViolationReport
from .chsh import MeasurementSettings
from .concurrence import (
    concurrence_blocks,
    concurrence_dets,
    concurrence_multipartite,
    concurrence_pure,
    wootters,
)
from .errors import ChshError, FormatError, StateInvariantError
from .states import DensityOperator, PureState, make_pure

PURE_RENORM_TOL = 1e-6

SEMANTICS = {
    "raw": "max over settings of Tr(B_ab rho) on the full state",
    "block": "max two-qubit CHSH value of the normalized 2x2 block state",
}


def dumps(doc) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip float repr."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _num(x: float) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


def matrix_to_dict(m) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def state_to_dict(state: PureState | DensityOperator) -> dict:
    if isinstance(state, PureState):
        return {
            "kind": "pure",
            "dims": list(state.dims),
            "amplitudes": [
                {"idx": list(idx), "re": float(v.real), "im": float(v.imag)}
                for idx, v in state.amplitudes.items()
            ],
        }
    n = state.matrix.shape[0]
    return {
        "kind": "mixed",
        "dims": list(state.dims),
        "matrix": {"side": n, "entries": [[float(z.real), float(z.imag)] for z in state.matrix.reshape(-1)]},
    }


def _int_list(v, what: str) -> list[int]:
    if not isinstance(v, list) or not v or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise FormatError(f"{what} must be a non-empty list of integers")
    return v


def _float(v, what: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise FormatError(f"{what} must be a finite number")
    return float(v)


def state_from_dict(doc) -> PureState | DensityOperator:
    """Parse a state document.

    Structural problems raise :class:`FormatError`; states that parse but
    break normalization, Hermiticity, trace or positivity raise
    :class:`StateInvariantError`.
    """
    if not isinstance(doc, dict):
        raise FormatError("state document must be a JSON object")
    kind = doc.get("kind")
    dims = _int_list(doc.get("dims"), "dims")
    if any(d < 2 for d in dims):
        raise FormatError("every entry of dims must be >= 2")
    if kind == "pure":
        amps = doc.get("amplitudes")
        if not isinstance(amps, list) or not amps:
            raise FormatError("amplitudes must be a non-empty list")
        raw = {}
        for entry in amps:
            if not isinstance(entry, dict):
                raise FormatError("amplitude entries must be objects")
            idx = tuple(_int_list(entry.get("idx"), "idx"))
            if len(idx) != len(dims) or any(not 1 <= i <= d for i, d in zip(idx, dims)):
                raise FormatError(f"idx {list(idx)} out of range for dims {dims}")
            if idx in raw:
                raise FormatError(f"duplicate idx {list(idx)}")
            raw[idx] = complex(_float(entry.get("re", 0.0), "re"), _float(entry.get("im", 0.0), "im"))
        norm = math.sqrt(math.fsum(abs(v) ** 2 for v in raw.values()))
        if abs(norm - 1.0) > PURE_RENORM_TOL:
            raise StateInvariantError(f"pure state norm {norm!r} deviates from 1 by more than {PURE_RENORM_TOL}")
        try:
            return PureState(tuple(dims), raw)
        except StateInvariantError:
            return make_pure(dims, raw)
    if kind == "mixed":
        mat = doc.get("matrix")
        if not isinstance(mat, dict):
            raise FormatError("matrix must be an object")
        side = mat.get("side")
        entries = mat.get("entries")
        if not isinstance(side, int) or side != math.prod(dims):
            raise FormatError(f"matrix side must equal prod(dims) = {math.prod(dims)}")
        if not isinstance(entries, list) or len(entries) != side * side:
            raise FormatError(f"matrix needs {side * side} entries")
        vals = []
        for e in entries:
            if not isinstance(e, list) or len(e) != 2:
                raise FormatError("matrix entries must be [re, im] pairs")
            vals.append(complex(_float(e[0], "re"), _float(e[1], "im")))
        return DensityOperator(tuple(dims), np.array(vals).reshape(side, side))
    raise FormatError(f"unknown state kind {kind!r}")


def load_json(path) -> object:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def load_state(path) -> PureState | DensityOperator:
    return state_from_dict(load_json(path))


def save_state(state: PureState | DensityOperator, path) -> None:
    Path(path).write_text(dumps(state_to_dict(state)), encoding="utf-8")


def settings_from_dict(doc) -> MeasurementSettings:
    if not isinstance(doc, dict) or set(doc) != {"a1", "a2", "b1", "b2"}:
        raise FormatError("settings must have exactly the keys a1, a2, b1, b2")
    vecs = []
    for k in ("a1", "a2", "b1", "b2"):
        v = doc[k]
        if not isinstance(v, list) or len(v) != 3:
            raise FormatError(f"{k} must be a 3-vector")
        vecs.append([_float(x, k) for x in v])
    try:
        return MeasurementSettings(*vecs)
    except ChshError as exc:
        raise FormatError(str(exc)) from exc


def load_settings(path) -> MeasurementSettings:
    return settings_from_dict(load_json(path))


def _p(bip) -> dict | None:
    return None if bip is None else {"left": list(bip.left), "right": list(bip.right)}


def certificate_to_dict(cert: DistillCertificate | None) -> dict | None:
    if cert is None:
        return None
    return {
        "p": _p(cert.bipartition),
        "alpha": cert.alpha0.as_list(),
        "beta": cert.beta0.as_list(),
        "P": matrix_to_dict(cert.P),
        "Q": matrix_to_dict(cert.Q),
        "state": matrix_to_dict(cert.state),
        "concurrence": cert.concurrence,
        "block_concurrence": cert.block_concurrence,
    }


def concurrence_summary(state: PureState | DensityOperator) -> dict:
    """All concurrence evaluations applicable to ``state`` (``None`` where undefined)."""
    out = {"reduced_purity": None, "determinant_sum": None, "block_decomposition": None,
           "block_decomposition_unweighted": None, "multipartite": None, "multipartite_blocks": None,
           "wootters": None}
    if isinstance(state, PureState):
        if state.m == 2:
            rep = concurrence_blocks(state)
            out.update(reduced_purity=concurrence_pure(state), determinant_sum=concurrence_dets(state),
                       block_decomposition=rep.value, block_decomposition_unweighted=rep.unweighted)
        else:
            rep = concurrence_multipartite(state)
            out.update(multipartite=rep.value, multipartite_blocks=rep.block_value,
                       block_decomposition_unweighted=rep.unweighted)
    elif state.dims == (2, 2):
        out["wootters"] = wootters(state.matrix)
    return out


def report_to_dict(report: ViolationReport, state=None, tol: float = 1e-9) -> dict:
    blocks = [
        {
            "p": _p(e.bipartition),
            "alpha": e.alpha.as_list(),
            "beta": e.beta.as_list(),
            "weight": e.weight,
            "raw_value": e.raw_value,
            "block_value": e.block_value,
            "settings": e.settings.to_dict(),
            "block_concurrence": e.block_concurrence,
        }
        for e in report.entries
    ]
    best = report.best
    witness = report.witness_summary(tol)
    if witness is not None:
        witness.update(p=_p(best.bipartition), alpha=best.alpha.as_list(), beta=best.beta.as_list(),
                       settings=best.settings.to_dict())
    doc = {
        "dims": list(report.dims),
        "kind": "pure" if report.pure else "mixed",
        "semantics": {
            "raw": {"meaning": SEMANTICS["raw"], "max": report.max_raw, "violated": report.max_raw > 2.0 + tol},
            "block": {"meaning": SEMANTICS["block"], "max": report.max_block,
                      "violated": report.max_block > 2.0 + tol},
        },
        "blocks": blocks,
        "summary": {
            "entangled": report.entangled,
            "max_raw": report.max_raw,
            "max_block": report.max_block,
            "bipartitions": [_p(p) for p in report.bipartitions],
            "witness": witness,
            "certificate": certificate_to_dict(report.certificate),
        },
    }
    if state is not None:
        doc["concurrence"] = concurrence_summary(state)
    return doc


def ppt_to_dict(rep: PptReport) -> dict:
    return {
        "is_ppt": rep.is_ppt,
        "min_pt_eigenvalue": rep.min_pt_eigenvalue,
        "checked": rep.checked,
        "max_block_value": _num(rep.max_block_value),
        "max_block_concurrence": _num(rep.max_block_concurrence),
        "counterexamples": [
            {"alpha": a.as_list(), "beta": b.as_list(), "block_value": v, "block_concurrence": c}
            for a, b, v, c in rep.counterexamples
        ],
        "passed": rep.passed,
    }
