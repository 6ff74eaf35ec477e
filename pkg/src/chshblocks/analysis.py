"""Block scans, Cirel'son checks, distillation certificates and PPT consistency.

Every scan projects the state onto all 2⊗2 blocks that meet its support,
evaluates the closed-form CHSH optimum of each normalized block, and
reports both semantics side by side:

* ``block_value`` -- maximum CHSH value of the normalized block;
* ``raw_value`` -- maximum of ``Tr(B_αβ ρ)`` over settings, which equals
  ``weight × block_value`` and is attained by the same settings.

Entanglement decisions use block concurrence (threshold 1e-7), which for
pure states coincides with a block CHSH violation.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .chsh import (
    ChshOperator,
    MeasurementSettings,
    Witness,
    expectation_raw,
    make_chsh,
    make_chsh_bipartition,
    make_witness,
    two_qubit_chsh,
)
from .concurrence import (
    BATCH,
    ENTANGLED,
    concurrence_multipartite,
    concurrence_pure,
    correlation_batch,
    horodecki_batch,
    horodecki_max,
    pure_block_concurrence,
    wootters,
    wootters_batch,
)
from .errors import ArityError, ChshError, SizeError
from .pair_ops import (
    ZERO_WEIGHT,
    PairIndex,
    bipartite_data,
    block_batch,
    enumerate_blocks,
    make_L,
    project_block,
)
from .states import (
    Bipartition,
    DensityOperator,
    PureState,
    all_bipartitions,
    as_density,
    is_product,
    mix,
    random_density,
    random_pure,
    singlet,
    to_density,
)

MAX_PARTS = 8
MAX_SIDE = numerics.MAX_SIDE


def default_workers() -> int:
    """Thread count from ``CHSH_THREADS`` (0 or unset: one per CPU)."""
    raw = os.environ.get("CHSH_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass
class BlockTable:
    """Per-block arrays for one bipartition, in canonical ``(α, β)`` order."""

    bipartition: Bipartition | None
    dims: tuple[int, int]
    pairs: list[tuple[PairIndex, PairIndex]]
    weights: np.ndarray
    block_values: np.ndarray
    settings: np.ndarray
    concurrences: np.ndarray

    @property
    def raw_values(self) -> np.ndarray:
        return self.weights * self.block_values

    def __len__(self) -> int:
        return len(self.pairs)


def _table_chunk(kind, data, db, chunk):
    w, blocks = block_batch(kind, data, db, chunk)
    keep = w > ZERO_WEIGHT
    w = w[keep]
    blocks = blocks[keep]
    if kind == "pure":
        T = correlation_batch(blocks, kets=True) / w[:, None, None]
        conc = pure_block_concurrence(blocks, w)
    else:
        normed = blocks / w[:, None, None]
        T = correlation_batch(normed)
        conc = wootters_batch(normed)
    values, settings = horodecki_batch(T)
    return [p for p, k in zip(chunk, keep) if k], w, values, settings, conc


def block_table(state: PureState | DensityOperator, bipartition: Bipartition | None = None,
                workers: int | None = None) -> BlockTable:
    kind, data, dl, dr = bipartite_data(state, bipartition)
    pairs = enumerate_blocks(state, bipartition)
    chunks = [pairs[k:k + BATCH] for k in range(0, len(pairs), BATCH)] or [[]]
    chunks = [c for c in chunks if c]
    workers = default_workers() if workers is None else max(1, int(workers))
    if len(chunks) > 1 and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: _table_chunk(kind, data, dr, c), chunks))
    else:
        parts = [_table_chunk(kind, data, dr, c) for c in chunks]
    if not parts:
        return BlockTable(bipartition, (dl, dr), [], np.zeros(0), np.zeros(0), np.zeros((0, 4, 3)), np.zeros(0))
    kept = [p for part in parts for p in part[0]]
    return BlockTable(
        bipartition, (dl, dr), kept,
        np.concatenate([p[1] for p in parts]),
        np.concatenate([p[2] for p in parts]),
        np.concatenate([p[3] for p in parts]),
        np.concatenate([p[4] for p in parts]),
    )


@dataclass(frozen=True)
class ViolationEntry:
    bipartition: Bipartition | None
    alpha: PairIndex
    beta: PairIndex
    weight: float
    raw_value: float
    block_value: float
    settings: MeasurementSettings
    block_concurrence: float


@dataclass(frozen=True)
class DistillCertificate:
    """Local filter ``P = A·L_α0``, ``Q = B·L_β0`` and the two-qubit state it produces."""

    alpha0: PairIndex
    beta0: PairIndex
    bipartition: Bipartition | None
    P: np.ndarray = field(repr=False)
    Q: np.ndarray = field(repr=False)
    state: np.ndarray = field(repr=False)
    concurrence: float
    block_concurrence: float


@dataclass(frozen=True)
class ViolationReport:
    dims: tuple[int, ...]
    entries: tuple[ViolationEntry, ...]
    max_raw: float
    max_block: float
    entangled: bool
    best: ViolationEntry | None
    certificate: DistillCertificate | None
    pure: bool

    @property
    def bipartitions(self) -> list[Bipartition | None]:
        seen = []
        for e in self.entries:
            if e.bipartition not in seen:
                seen.append(e.bipartition)
        return seen

    def best_operator(self) -> ChshOperator | None:
        if self.best is None:
            return None
        b = self.best
        if b.bipartition is None:
            return make_chsh(b.alpha, b.beta, b.settings, self.dims)
        return make_chsh_bipartition(b.bipartition, b.alpha, b.beta, b.settings, self.dims)

    def witness(self) -> Witness | None:
        op = self.best_operator()
        return None if op is None else make_witness(op)

    def witness_summary(self, tol: float = 1e-9) -> dict | None:
        """``Tr(Wρ)`` and positivity of ``W = 2I − B`` for the best block, without the full matrix.

        ``B`` acts as the 4×4 block operator on its support and as zero
        elsewhere, so the spectrum of ``W`` is ``2 − spec(B₂)`` plus ``2``.
        """
        if self.best is None:
            return None
        lam = np.linalg.eigvalsh(two_qubit_chsh(self.best.settings))
        lo = min(2.0 - float(lam[-1]), 2.0)
        return {"value": 2.0 - self.best.raw_value, "min_eigenvalue": lo, "nontrivial": lo < -tol}


def _entries(table: BlockTable) -> list[ViolationEntry]:
    return [
        ViolationEntry(table.bipartition, a, b, float(w), float(w * v), float(v), MeasurementSettings(*s), float(c))
        for (a, b), w, v, s, c in zip(table.pairs, table.weights, table.block_values, table.settings,
                                      table.concurrences)
    ]


def _report(state, tables: list[BlockTable]) -> ViolationReport:
    entries = [e for t in tables for e in _entries(t)]
    if entries:
        best = max(entries, key=lambda e: (e.block_value, e.raw_value))
        max_raw = max(e.raw_value for e in entries)
        max_block = best.block_value
        entangled = max(e.block_concurrence for e in entries) > ENTANGLED
    else:
        best, max_raw, max_block, entangled = None, 0.0, 0.0, False
    cert = _certificate(state, tables)
    return ViolationReport(tuple(state.dims), tuple(entries), max_raw, max_block, entangled, best, cert,
                           isinstance(state, PureState))


def scan_bipartite(state: PureState | DensityOperator, workers: int | None = None) -> ViolationReport:
    if state.m != 2:
        raise ArityError("scan_bipartite needs m = 2; use scan_multipartite")
    return _report(state, [block_table(state, None, workers)])


def _guard(state) -> None:
    if state.m > MAX_PARTS:
        raise SizeError(f"refusing to scan {state.m} > {MAX_PARTS} subsystems")
    if math.prod(state.dims) > MAX_SIDE:
        raise SizeError(f"flattened dimension {math.prod(state.dims)} exceeds {MAX_SIDE}")


def scan_multipartite(state: PureState | DensityOperator, workers: int | None = None) -> ViolationReport:
    """Scan every canonical bipartition, then every block within it."""
    if state.m < 3:
        raise ArityError("scan_multipartite needs m >= 3")
    _guard(state)
    tables = [block_table(state, p, workers) for p in all_bipartitions(state.m)]
    return _report(state, tables)


def scan(state: PureState | DensityOperator, workers: int | None = None) -> ViolationReport:
    if state.m == 2:
        _guard(state)
        return scan_bipartite(state, workers)
    return scan_multipartite(state, workers)


def _filter(pair: PairIndex, dim: int) -> np.ndarray:
    """``A·L`` with ``A = |0⟩⟨i| + |1⟩⟨j|``: a 2×dim local filter."""
    a = np.zeros((2, dim), dtype=np.complex128)
    a[0, pair.i - 1] = 1.0
    a[1, pair.j - 1] = 1.0
    return a @ make_L(pair, dim)


def _certificate(state, tables: list[BlockTable]) -> DistillCertificate | None:
    best = None
    for t in tables:
        if len(t) == 0:
            continue
        k = int(np.argmax(t.concurrences))
        c = float(t.concurrences[k])
        if c > ENTANGLED and (best is None or c > best[2]):
            best = (t, k, c)
    if best is None:
        return None
    table, k, c = best
    alpha, beta = table.pairs[k]
    dl, dr = table.dims
    P, Q = _filter(alpha, dl), _filter(beta, dr)
    kind, data, _, _ = bipartite_data(state, table.bipartition)
    if kind == "pure":
        ket = (P @ data @ Q.T).reshape(4)
        proj = np.outer(ket, ket.conj())
    else:
        K = np.kron(P, Q)
        proj = K @ data @ K.conj().T
    proj = proj / np.trace(proj).real
    proj = 0.5 * (proj + proj.conj().T)
    return DistillCertificate(alpha, beta, table.bipartition, P, Q, proj, wootters(proj), c)


def distill_certificate(state: PureState | DensityOperator, workers: int | None = None) -> DistillCertificate | None:
    """Two-qubit filter certificate for the block with the largest concurrence, if any is entangled."""
    if state.m == 2:
        tables = [block_table(state, None, workers)]
    else:
        _guard(state)
        tables = [block_table(state, p, workers) for p in all_bipartitions(state.m)]
    return _certificate(state, tables)


def distillable_pure(psi: PureState) -> bool:
    """A pure state is distillable exactly when it is entangled."""
    if psi.m == 2:
        return concurrence_pure(psi) > ENTANGLED
    return concurrence_multipartite(psi).value > ENTANGLED


def _random_window(rng: np.random.Generator, dim: int) -> PairIndex:
    i, j = sorted(int(x) for x in rng.choice(dim, size=2, replace=False))
    return PairIndex(i + 1, j + 1)


def _random_state(rng: np.random.Generator, dims, k: int):
    seed = int(rng.integers(0, 2 ** 63 - 1))
    if k % 2 == 0:
        return random_pure(dims, seed)
    n = math.prod(dims)
    return random_density(dims, seed, rank=int(rng.integers(1, n + 1)))


def verify_cirelson(dims, samples: int, seed, include_singlet: bool = False) -> float:
    """Largest ``|Tr(B_αβ ρ)|`` over random (state, window pair, settings) triples.

    Sample ``k`` draws from its own generator seeded by ``(seed, k)``.
    With ``include_singlet`` the singlet on windows ``(1,2)⊗(1,2)`` with its
    optimal settings is evaluated as well.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    dims = tuple(int(d) for d in dims)
    best = 0.0
    for k in range(samples):
        rng = np.random.default_rng([int(seed), k])
        rho = _random_state(rng, dims, k)
        B = make_chsh(_random_window(rng, dims[0]), _random_window(rng, dims[1]),
                      MeasurementSettings.random(rng), dims)
        best = max(best, abs(expectation_raw(B, rho)))
    if include_singlet:
        psi = singlet(dims, ((1, 2), (1, 2)))
        block = project_block(psi, (1, 2), (1, 2))
        _, s = horodecki_max(block.matrix)
        best = max(best, abs(expectation_raw(make_chsh((1, 2), (1, 2), s, dims), psi)))
    return best


def separable_mixture_check(components, settings_samples: int, seed) -> float:
    """Largest ``|Tr(B σ)|`` for a finite mixture ``σ`` of product pure states.

    Combines the optimum over settings of every block with
    ``settings_samples`` random (block, settings) draws on the full operator.
    """
    comps = []
    for w, psi in components:
        if not isinstance(psi, PureState) or not is_product(psi):
            raise ChshError("every mixture component must be a product pure state")
        comps.append((w, to_density(psi)))
    sigma = mix(comps)
    report = scan(sigma)
    best = max((abs(e.raw_value) for e in report.entries), default=0.0)
    pairs_by_p = [(p, enumerate_blocks(sigma, p)) for p in ([None] if sigma.m == 2 else all_bipartitions(sigma.m))]
    for k in range(settings_samples):
        rng = np.random.default_rng([int(seed), k])
        p, pairs = pairs_by_p[int(rng.integers(len(pairs_by_p)))]
        if not pairs:
            continue
        a, b = pairs[int(rng.integers(len(pairs)))]
        s = MeasurementSettings.random(rng)
        B = make_chsh(a, b, s, sigma.dims) if p is None else make_chsh_bipartition(p, a, b, s, sigma.dims)
        best = max(best, abs(expectation_raw(B, sigma)))
    return best


@dataclass(frozen=True)
class PptReport:
    is_ppt: bool
    min_pt_eigenvalue: float
    checked: bool
    max_block_value: float
    max_block_concurrence: float
    counterexamples: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.counterexamples


def ppt_consistency(rho: DensityOperator | PureState, tol: float = 1e-9) -> PptReport:
    """For a PPT input, confirm that no block violates CHSH or is entangled."""
    rho = as_density(rho)
    if rho.m != 2:
        raise ArityError("ppt_consistency needs a bipartite state")
    pt = numerics.partial_transpose(rho.matrix, rho.dims, "B")
    lo = float(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))[0])
    is_ppt = lo >= -tol
    if not is_ppt:
        return PptReport(False, lo, False, math.nan, math.nan)
    table = block_table(rho)
    bad = tuple(
        (a, b, float(v), float(c))
        for (a, b), v, c in zip(table.pairs, table.block_values, table.concurrences)
        if v > 2.0 + tol or c > ENTANGLED
    )
    return PptReport(
        True, lo, True,
        float(table.block_values.max(initial=0.0)), float(table.concurrences.max(initial=0.0)), bad,
    )
