"""Pair operators ``L = |i⟩⟨j| − |j⟩⟨i|`` and 2⊗2 block projection.

A window ``(i, j)`` (1-based, ``i < j``) selects two levels of one side.
Windows are enumerated by the triangular index
``alpha = (j-1)(j-2)/2 + i``, which reproduces ``L_1 … L_7`` as
``(1,2), (1,3), (2,3), (1,4), (2,4), (3,4), (1,5)``.

Projecting a state onto the windows ``(α, β)`` conjugates it by
``L_α ⊗ L_β``, takes the trace norm as the block *weight*, and compresses
the normalized result onto the basis ``(ik, il, jk, jl)``.  Because ``L``
acts on its window as ``|i⟩ ↦ −|j⟩, |j⟩ ↦ |i⟩`` the block basis is the
post-conjugation one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import numerics
from .errors import ArityError, OrderingError, WindowError
from .states import Bipartition, DensityOperator, PureState, regroup_operator, to_density

ZERO_WEIGHT = 1e-14

# L restricted to its window, in the basis (i, j)
L_WINDOW = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=np.complex128)
L_BLOCK = np.kron(L_WINDOW, L_WINDOW)


def pair_to_linear(i: int, j: int) -> int:
    if not 1 <= i < j:
        raise OrderingError(f"window needs 1 <= i < j, got ({i}, {j})")
    return (j - 1) * (j - 2) // 2 + i


def linear_to_pair(alpha: int) -> tuple[int, int]:
    if alpha < 1:
        raise OrderingError(f"linear window index must be >= 1, got {alpha}")
    # smallest j with j(j-1)/2 >= alpha
    j = (1 + math.isqrt(8 * alpha - 7)) // 2 + 1
    while (j - 1) * (j - 2) // 2 >= alpha:
        j -= 1
    while j * (j - 1) // 2 < alpha:
        j += 1
    return alpha - (j - 1) * (j - 2) // 2, j


@dataclass(frozen=True, order=True)
class PairIndex:
    """A 2-level window ``(i, j)``; sorts by its linear index."""

    alpha: int = field(init=False, repr=False)
    i: int
    j: int

    def __post_init__(self):
        object.__setattr__(self, "i", int(self.i))
        object.__setattr__(self, "j", int(self.j))
        object.__setattr__(self, "alpha", pair_to_linear(self.i, self.j))

    @classmethod
    def from_linear(cls, alpha: int) -> "PairIndex":
        return cls(*linear_to_pair(alpha))

    @classmethod
    def coerce(cls, value) -> "PairIndex":
        if isinstance(value, PairIndex):
            return value
        if isinstance(value, (int, np.integer)):
            return cls.from_linear(int(value))
        i, j = value
        return cls(i, j)

    def check(self, dim: int) -> None:
        if self.j > dim:
            raise WindowError(f"window ({self.i}, {self.j}) exceeds dimension {dim}")

    def as_list(self) -> list[int]:
        return [self.i, self.j]


def windows(dim: int) -> list[PairIndex]:
    """All windows of a ``dim``-level space, in linear-index order."""
    return sorted(PairIndex(i, j) for i, j in combinations(range(1, dim + 1), 2))


def make_L(pair, dim: int) -> np.ndarray:
    pair = PairIndex.coerce(pair)
    pair.check(dim)
    m = np.zeros((dim, dim), dtype=np.complex128)
    m[pair.i - 1, pair.j - 1] = 1.0
    m[pair.j - 1, pair.i - 1] = -1.0
    return m


def make_P(pair, dim: int) -> np.ndarray:
    pair = PairIndex.coerce(pair)
    pair.check(dim)
    m = np.zeros((dim, dim), dtype=np.complex128)
    m[pair.i - 1, pair.i - 1] = 1.0
    m[pair.j - 1, pair.j - 1] = 1.0
    return m


@dataclass(frozen=True)
class BlockState:
    """Normalized two-qubit block with its trace-norm weight."""

    matrix: np.ndarray = field(repr=False)
    weight: float
    alpha: PairIndex
    beta: PairIndex
    bipartition: Bipartition | None = None


def _block_rows(alpha: PairIndex, beta: PairIndex, db: int) -> list[int]:
    """0-based flat indices of ``(ik, il, jk, jl)`` in a ``dA·dB`` space."""
    i, j, k, l = alpha.i - 1, alpha.j - 1, beta.i - 1, beta.j - 1
    return [i * db + k, i * db + l, j * db + k, j * db + l]


def project_block(rho: DensityOperator | PureState, alpha, beta) -> BlockState | None:
    """Conjugate by ``L_α ⊗ L_β``, normalize by the trace norm, compress to 4×4.

    Returns ``None`` when the weight is at most ``1e-14``.
    """
    if isinstance(rho, PureState):
        rho = to_density(rho)
    if rho.m != 2:
        raise ArityError("project_block needs a bipartite state; use project_block_bipartition")
    alpha, beta = PairIndex.coerce(alpha), PairIndex.coerce(beta)
    da, db = rho.dims
    big_l = numerics.kron(make_L(alpha, da), make_L(beta, db))
    m = big_l @ rho.matrix @ big_l.conj().T
    w = numerics.trace_norm(m)
    if w <= ZERO_WEIGHT:
        return None
    rows = _block_rows(alpha, beta, db)
    block = m[np.ix_(rows, rows)] / w
    return BlockState(0.5 * (block + block.conj().T), w, alpha, beta)


def project_block_bipartition(rho: DensityOperator | PureState, p: Bipartition, alpha, beta) -> BlockState | None:
    """As :func:`project_block` after regrouping the subsystems into ``p``.

    ``alpha`` and ``beta`` refer to composite levels: the row-major
    flattening (1-based) of the left and right groups' multi-indices.
    """
    if isinstance(rho, PureState):
        rho = to_density(rho)
    dl, dr = p.side_dims(rho.dims)
    grouped = DensityOperator((dl, dr), regroup_operator(rho.matrix, rho.dims, p))
    block = project_block(grouped, alpha, beta)
    if block is None:
        return None
    return BlockState(block.matrix, block.weight, block.alpha, block.beta, p)


def support_levels(state, bipartition: Bipartition | None = None) -> tuple[list[int], list[int]]:
    """1-based levels carrying weight on each side of the (regrouped) state."""
    if isinstance(state, PureState):
        a = state.matrix(bipartition)
        left = np.abs(a).sum(axis=1) > 0
        right = np.abs(a).sum(axis=0) > 0
    else:
        if bipartition is None:
            if state.m != 2:
                raise ArityError("a bipartition is required for m != 2")
            mat, (dl, dr) = state.matrix, state.dims
        else:
            mat = regroup_operator(state.matrix, state.dims, bipartition)
            dl, dr = bipartition.side_dims(state.dims)
        d = np.abs(np.diag(mat)).reshape(dl, dr)
        left = d.sum(axis=1) > 0
        right = d.sum(axis=0) > 0
    return [int(k) + 1 for k in np.flatnonzero(left)], [int(k) + 1 for k in np.flatnonzero(right)]


def _touching(dim: int, levels: list[int]) -> list[PairIndex]:
    occupied = set(levels)
    return [w for w in windows(dim) if w.i in occupied or w.j in occupied]


def enumerate_blocks(state, bipartition: Bipartition | None = None) -> list[tuple[PairIndex, PairIndex]]:
    """Window pairs that meet the support on both sides, in canonical ``(α, β)`` order."""
    if bipartition is None:
        if state.m != 2:
            raise ArityError("a bipartition is required for m != 2")
        dl, dr = state.dims
    else:
        dl, dr = bipartition.side_dims(state.dims)
    left, right = support_levels(state, bipartition)
    return [(a, b) for a in _touching(dl, left) for b in _touching(dr, right)]


def bipartite_data(state, bipartition: Bipartition | None = None):
    """``(kind, data, dl, dr)`` with ``data`` the coefficient matrix (pure) or regrouped operator."""
    if isinstance(state, PureState):
        a = state.matrix(bipartition)
        return "pure", a, a.shape[0], a.shape[1]
    if bipartition is None:
        if state.m != 2:
            raise ArityError("a bipartition is required for m != 2")
        return "mixed", np.asarray(state.matrix), state.dims[0], state.dims[1]
    dl, dr = bipartition.side_dims(state.dims)
    return "mixed", regroup_operator(state.matrix, state.dims, bipartition), dl, dr


def block_batch(kind: str, data: np.ndarray, db: int, pairs: list[tuple[PairIndex, PairIndex]]):
    """Vectorized projection of many blocks.

    Returns ``(weights, blocks)`` where ``blocks`` has shape ``(N, 4)`` of
    unnormalized conjugated kets for pure input, ``(N, 4, 4)`` of
    unnormalized conjugated operators for mixed input.
    """
    rows = np.array([_block_rows(a, b, db) for a, b in pairs], dtype=np.intp).reshape(-1, 4)
    if kind == "pure":
        flat = data.reshape(-1)
        kets = flat[rows] @ L_BLOCK.T
        weights = np.einsum("nk,nk->n", kets.conj(), kets).real
        return weights, kets
    sub = data[rows[:, :, None], rows[:, None, :]]
    sub = L_BLOCK @ sub @ L_BLOCK.conj().T
    weights = np.linalg.svd(sub, compute_uv=False).sum(axis=1)
    return weights, sub
