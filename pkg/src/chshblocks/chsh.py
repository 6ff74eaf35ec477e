"""Block observables, CHSH operators and witnesses.

Each dichotomic observable is a unit Bloch vector ``a`` placed on a 2-level
window: the window carries ``a·σ`` and every other entry is zero.  The
operators entering the CHSH combination are the ``L``-conjugated versions
``Ã = L A L†``; on the window, conjugation maps the Bloch vector
``(x, y, z)`` to ``(−x, y, −z)``.

Two expectation semantics are exposed:

``raw``
    ``Tr(B ρ)`` of the full-space operator against the whole state.
``block``
    ``Tr(B₂ ρ_block)`` of the plain two-qubit CHSH operator against the
    normalized block state.

For blocks built by :func:`chshblocks.pair_ops.project_block` the two are
related by ``raw = weight × block`` with identical settings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import numerics
from .errors import AbsentBlockError, ArityError, NormError, ShapeError, WindowError
from .pair_ops import BlockState, PairIndex, make_L, make_P
from .states import Bipartition, DensityOperator, PureState, as_density, ungroup_operator

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])

SETTINGS_RENORM_TOL = 1e-6
TSIRELSON = 2.0 * math.sqrt(2.0)


def unit_vector(v: Sequence[float]) -> tuple[float, float, float]:
    """Apply the settings policy: renormalize within 1e-6 of unit length, reject otherwise."""
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.shape != (3,) or not np.all(np.isfinite(a)):
        raise NormError(f"setting must be a finite real 3-vector, got {v!r}")
    n = float(np.linalg.norm(a))
    if abs(n - 1.0) > SETTINGS_RENORM_TOL:
        raise NormError(f"setting {tuple(a)} has norm {n}, expected 1")
    a = a / n
    return (float(a[0]), float(a[1]), float(a[2]))


def flip(v: Sequence[float]) -> tuple[float, float, float]:
    """Bloch-vector image under conjugation by a window's ``L``."""
    return (-float(v[0]), float(v[1]), -float(v[2]))


@dataclass(frozen=True)
class MeasurementSettings:
    """Four unit Bloch vectors: ``a1, a2`` for the left side, ``b1, b2`` for the right."""

    a1: tuple[float, float, float]
    a2: tuple[float, float, float]
    b1: tuple[float, float, float]
    b2: tuple[float, float, float]

    def __post_init__(self):
        for name in ("a1", "a2", "b1", "b2"):
            object.__setattr__(self, name, unit_vector(getattr(self, name)))

    @classmethod
    def standard(cls) -> "MeasurementSettings":
        r = 1.0 / math.sqrt(2.0)
        return cls((0, 0, 1), (1, 0, 0), (r, 0, r), (-r, 0, r))

    @classmethod
    def random(cls, rng: np.random.Generator) -> "MeasurementSettings":
        v = rng.standard_normal((4, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return cls(*v)

    @classmethod
    def from_dict(cls, d: dict) -> "MeasurementSettings":
        return cls(d["a1"], d["a2"], d["b1"], d["b2"])

    def to_dict(self) -> dict:
        return {k: list(getattr(self, k)) for k in ("a1", "a2", "b1", "b2")}

    def flipped(self) -> "MeasurementSettings":
        return MeasurementSettings(flip(self.a1), flip(self.a2), flip(self.b1), flip(self.b2))

    def array(self) -> np.ndarray:
        return np.array([self.a1, self.a2, self.b1, self.b2])


def bloch_observable(v: Sequence[float]) -> np.ndarray:
    x, y, z = (float(c) for c in v)
    return np.array([[z, complex(x, -y)], [complex(x, y), -z]], dtype=np.complex128)


def make_A(setting: Sequence[float], pair, dim: int) -> np.ndarray:
    """Observable ``a·σ`` embedded on the window ``pair`` of a ``dim``-level space."""
    pair = PairIndex.coerce(pair)
    pair.check(dim)
    a = unit_vector(setting)
    obs = bloch_observable(a)
    m = np.zeros((dim, dim), dtype=np.complex128)
    idx = [pair.i - 1, pair.j - 1]
    m[np.ix_(idx, idx)] = obs
    return m


def conjugate_by_L(A, pair) -> np.ndarray:
    """``L A L†``; ``A`` must vanish outside the window of ``pair``."""
    A = numerics.as_matrix(A)
    pair = PairIndex.coerce(pair)
    dim = A.shape[0]
    pair.check(dim)
    p = make_P(pair, dim)
    if np.max(np.abs(A - p @ A @ p)) > 0:
        raise WindowError(f"operator is not supported on window ({pair.i}, {pair.j})")
    L = make_L(pair, dim)
    return L @ A @ L.conj().T


@dataclass(frozen=True)
class ChshOperator:
    """``Ã1⊗B̃1 + Ã1⊗B̃2 + Ã2⊗B̃1 − Ã2⊗B̃2`` on the full truncated space."""

    alpha: PairIndex
    beta: PairIndex
    settings: MeasurementSettings
    dims: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)
    bipartition: Bipartition | None = None


def _chsh_matrix(alpha: PairIndex, beta: PairIndex, s: MeasurementSettings, da: int, db: int) -> np.ndarray:
    a1 = conjugate_by_L(make_A(s.a1, alpha, da), alpha)
    a2 = conjugate_by_L(make_A(s.a2, alpha, da), alpha)
    b1 = conjugate_by_L(make_A(s.b1, beta, db), beta)
    b2 = conjugate_by_L(make_A(s.b2, beta, db), beta)
    # A1⊗B1 + A1⊗B2 + A2⊗B1 − A2⊗B2, grouped by the left observable
    return numerics.kron(a1, b1 + b2) + numerics.kron(a2, b1 - b2)


def make_chsh(alpha, beta, settings: MeasurementSettings, dims: Sequence[int]) -> ChshOperator:
    if len(dims) != 2:
        raise ArityError("make_chsh needs bipartite dims; use make_chsh_bipartition")
    alpha, beta = PairIndex.coerce(alpha), PairIndex.coerce(beta)
    da, db = int(dims[0]), int(dims[1])
    return ChshOperator(alpha, beta, settings, (da, db), _chsh_matrix(alpha, beta, settings, da, db))


def make_chsh_bipartition(p: Bipartition, alpha, beta, settings: MeasurementSettings,
                          dims: Sequence[int]) -> ChshOperator:
    """CHSH operator for bipartition ``p``, returned in the original subsystem order.

    ``alpha``/``beta`` are windows over the composite levels of each group.
    """
    dims = tuple(int(d) for d in dims)
    alpha, beta = PairIndex.coerce(alpha), PairIndex.coerce(beta)
    dl, dr = p.side_dims(dims)
    grouped = _chsh_matrix(alpha, beta, settings, dl, dr)
    return ChshOperator(alpha, beta, settings, dims, ungroup_operator(grouped, dims, p), p)


def expectation_raw(B: ChshOperator, rho: DensityOperator | PureState) -> float:
    """``Tr(B ρ)``; the imaginary residue must be below 1e-10."""
    if B.dims != tuple(rho.dims):
        raise ShapeError(f"operator dims {B.dims} do not match state dims {tuple(rho.dims)}")
    if isinstance(rho, PureState):
        v = rho.vector()
        val = np.vdot(v, B.matrix @ v)
    else:
        val = np.einsum("ij,ji->", B.matrix, rho.matrix)
    if abs(val.imag) > 1e-10:
        raise ArithmeticError(f"Tr(B rho) has imaginary part {val.imag!r}")
    return float(val.real)


def two_qubit_chsh(settings: MeasurementSettings) -> np.ndarray:
    """Plain ``A1⊗B1 + A1⊗B2 + A2⊗B1 − A2⊗B2`` on ℂ²⊗ℂ²."""
    a1, a2, b1, b2 = (bloch_observable(v) for v in (settings.a1, settings.a2, settings.b1, settings.b2))
    return np.kron(a1, b1) + np.kron(a1, b2) + np.kron(a2, b1) - np.kron(a2, b2)


def expectation_block(settings: MeasurementSettings, block: BlockState | np.ndarray) -> float:
    """Two-qubit CHSH value of a normalized block state."""
    if isinstance(block, BlockState):
        if block.weight <= 0:
            raise AbsentBlockError("block has zero weight")
        mat = block.matrix
    elif block is None:
        raise AbsentBlockError("no block state")
    else:
        mat = numerics.as_matrix(block)
    if mat.shape != (4, 4):
        raise ShapeError("block state must be 4x4")
    return float(np.einsum("ij,ji->", two_qubit_chsh(settings), mat).real)


@dataclass(frozen=True)
class Witness:
    """``W = 2I − B``; ``nontrivial`` is set when W has a negative eigenvalue."""

    matrix: np.ndarray = field(repr=False)
    source: ChshOperator
    min_eigenvalue: float
    nontrivial: bool


def make_witness(B: ChshOperator, tol: float = 1e-9) -> Witness:
    n = B.matrix.shape[0]
    w = 2.0 * np.eye(n, dtype=np.complex128) - B.matrix
    lo = float(np.linalg.eigvalsh(0.5 * (w + w.conj().T))[0])
    return Witness(w, B, lo, lo < -tol)


def witness_value(W: Witness, rho: DensityOperator | PureState) -> float:
    rho = as_density(rho)
    val = np.einsum("ij,ji->", W.matrix, rho.matrix)
    return float(val.real)
