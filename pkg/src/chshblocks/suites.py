"""Randomized property suites behind ``chshblocks verify``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import block_table, ppt_consistency, verify_cirelson
from .chsh import TSIRELSON
from .concurrence import (
    ENTANGLED,
    concurrence_blocks,
    concurrence_dets,
    concurrence_multipartite,
    concurrence_pure,
)
from .states import ghz, horodecki_bound_entangled, random_product, random_pure, random_separable, w_state

CIRELSON_DIMS = ((2, 2), (3, 3), (4, 5), (5, 3), (6, 6))
GISIN_DIMS = ((2, 2), (3, 3), (4, 4), (6, 6))
DECOMPOSITION_DIMS = ((2, 2), (3, 3), (4, 5), (6, 6))
MULTIPARTITE_DIMS = ((2, 2, 2), (3, 2, 2))
HORODECKI_PARAMS = (0.25, 0.5, 0.75)


@dataclass
class Check:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)


@dataclass
class SuiteResult:
    suite: str
    samples: int
    seed: int
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "samples": self.samples,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [{"name": c.name, "passed": c.passed, **c.details} for c in self.checks],
        }


def _subseed(seed: int, *keys: int) -> int:
    return int(np.random.SeedSequence([int(seed), *keys]).generate_state(1, dtype=np.uint64)[0])


def cirelson(samples: int, seed: int, tol: float = 1e-9) -> SuiteResult:
    """``|Tr(Bρ)| ≤ 2√2`` on random triples, plus saturation by the singlet."""
    checks = []
    share, extra = divmod(samples, len(CIRELSON_DIMS))
    for k, dims in enumerate(CIRELSON_DIMS):
        n = share + (1 if k < extra else 0)
        if n == 0:
            continue
        top = verify_cirelson(dims, n, _subseed(seed, k))
        checks.append(Check(f"bound dims={dims}", top <= TSIRELSON + tol,
                            {"samples": n, "max": top, "bound": TSIRELSON}))
    top = verify_cirelson((2, 2), 1, _subseed(seed, 99), include_singlet=True)
    checks.append(Check("singlet saturates", abs(top - TSIRELSON) <= tol, {"max": top, "bound": TSIRELSON}))
    return SuiteResult("cirelson", samples, seed, checks)


def gisin(samples: int, seed: int, tol: float = 1e-9) -> SuiteResult:
    """Pure states: entangled iff some normalized block violates CHSH."""
    checks = []
    for k, dims in enumerate(GISIN_DIMS):
        mismatches = 0
        for s in range(samples):
            psi = random_pure(dims, [seed, k, s])
            entangled = concurrence_pure(psi) > ENTANGLED
            violated = bool(np.any(block_table(psi, workers=1).block_values > 2.0 + 1e-12))
            mismatches += entangled != violated
        checks.append(Check(f"iff dims={dims}", mismatches == 0, {"samples": samples, "mismatches": mismatches}))
    top = 0.0
    worst = 0.0
    for s in range(samples):
        dims = GISIN_DIMS[s % len(GISIN_DIMS)]
        vals = block_table(random_product(dims, [seed, 100, s]), workers=1).block_values
        top = max(top, float(vals.max()))
        worst = max(worst, abs(float(vals.max()) - 2.0))
    checks.append(Check("product states reach exactly 2", worst <= tol,
                        {"samples": samples, "max_block": top, "max_deviation": worst}))
    return SuiteResult("gisin", samples, seed, checks)


def decomposition(samples: int, seed: int, tol: float = 1e-10) -> SuiteResult:
    """Reduced-purity, determinant and weighted block forms of the concurrence agree."""
    checks = []
    for k, dims in enumerate(DECOMPOSITION_DIMS):
        worst = 0.0
        for s in range(samples):
            psi = random_pure(dims, [seed, k, s])
            c1, c2, c3 = concurrence_pure(psi), concurrence_dets(psi), concurrence_blocks(psi).value
            worst = max(worst, abs(c1 - c2), abs(c1 - c3))
        checks.append(Check(f"bipartite dims={dims}", worst <= tol, {"samples": samples, "max_deviation": worst}))
    for k, dims in enumerate(MULTIPARTITE_DIMS):
        worst = 0.0
        for s in range(samples):
            rep = concurrence_multipartite(random_pure(dims, [seed, 50 + k, s]))
            worst = max(worst, abs(rep.value - rep.block_value))
        checks.append(Check(f"multipartite dims={dims}", worst <= tol, {"samples": samples, "max_deviation": worst}))
    g = concurrence_multipartite(ghz()).value
    w = concurrence_multipartite(w_state()).value
    checks.append(Check("GHZ", abs(g - 1.0) <= tol, {"value": g, "expected": 1.0}))
    checks.append(Check("W", abs(w - math.sqrt(8 / 9)) <= tol, {"value": w, "expected": math.sqrt(8 / 9)}))
    return SuiteResult("decomposition", samples, seed, checks)


def ppt(samples: int, seed: int, tol: float = 1e-9) -> SuiteResult:
    """PPT inputs never produce an entangled or CHSH-violating block."""
    checks = []
    for a in HORODECKI_PARAMS:
        rep = ppt_consistency(horodecki_bound_entangled(a), tol)
        checks.append(Check(f"horodecki a={a}", rep.is_ppt and rep.passed,
                            {"is_ppt": rep.is_ppt, "max_block_value": rep.max_block_value}))
    failures = 0
    top = 0.0
    for s in range(samples):
        rng = np.random.default_rng([seed, 200, s])
        dims = ((3, 3), (2, 3), (2, 2))[s % 3]
        sigma = random_separable(dims, int(rng.integers(1, 11)), [seed, 201, s])
        rep = ppt_consistency(sigma, tol)
        failures += not (rep.is_ppt and rep.passed)
        if rep.checked:
            top = max(top, rep.max_block_value)
    checks.append(Check("separable mixtures", failures == 0,
                        {"samples": samples, "failures": failures, "max_block_value": top}))
    return SuiteResult("ppt", samples, seed, checks)


SUITES = {"cirelson": cirelson, "gisin": gisin, "decomposition": decomposition, "ppt": ppt}
