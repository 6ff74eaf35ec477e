"""Exit criteria, each checked at its stated tolerance.

Every test records one PASS/FAIL line (shown in the "acceptance criteria"
section of the pytest summary) before asserting.
"""
import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

import oracles
from chshblocks import suites
from chshblocks.analysis import block_table, distill_certificate, ppt_consistency, scan
from chshblocks.chsh import TSIRELSON, expectation_block, witness_value
from chshblocks.concurrence import (
    concurrence_blocks,
    concurrence_dets,
    concurrence_multipartite,
    concurrence_pure,
    horodecki_max,
)
from chshblocks.pair_ops import enumerate_blocks
from chshblocks.states import (
    ghz,
    horodecki_bound_entangled,
    make_pure,
    mix,
    random_density,
    random_product,
    random_pure,
    random_separable,
    to_density,
    w_state,
)

pytestmark = pytest.mark.acceptance

ME3 = make_pure((3, 3), {(1, 1): 1, (2, 2): 1, (3, 3): 1})


def oracle_concurrence(psi):
    return math.sqrt(max(0.0, 2 * (1 - oracles.reduced_purity(psi.vector(), psi.dims))))


def test_c1_cirelson_bound(criterion):
    t0 = time.perf_counter()
    result = suites.cirelson(10_000, seed=2024, tol=1e-9)
    elapsed = time.perf_counter() - t0
    bound = max(c.details["max"] for c in result.checks if c.name.startswith("bound"))
    saturation = next(c for c in result.checks if c.name == "singlet saturates").details["max"]
    ok = bound <= TSIRELSON + 1e-9 and abs(saturation - TSIRELSON) <= 1e-9 and elapsed < 10
    criterion("1 Cirel'son bound", ok,
              f"max |Tr(B rho)| = {bound:.12f} over 10^4 triples, singlet {saturation:.15f}, {elapsed:.1f}s")
    assert ok


def test_c2_gisin_iff_block_semantics(criterion):
    t0 = time.perf_counter()
    mismatches = 0
    for k, dims in enumerate(((2, 2), (3, 3), (4, 4), (6, 6))):
        for s in range(500):
            psi = random_pure(dims, [7, k, s])
            entangled = oracle_concurrence(psi) > 1e-7
            violated = bool(np.any(block_table(psi, workers=1).block_values > 2 + 1e-12))
            mismatches += entangled != violated
    worst = 0.0
    for s in range(200):
        dims = ((2, 2), (3, 3), (4, 4), (6, 6))[s % 4]
        top = float(block_table(random_product(dims, [8, s]), workers=1).block_values.max())
        worst = max(worst, abs(top - 2.0))
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and worst <= 1e-9 and elapsed < 30
    criterion("2 Gisin iff (block semantics)", ok,
              f"{mismatches} mismatches in 2000 pure states, product max deviation {worst:.2e}, {elapsed:.1f}s")
    assert ok


def test_c3_semantics_gap_constant(criterion):
    t0 = time.perf_counter()
    rep = scan(ME3)
    rho = to_density(ME3).matrix
    grid = max(
        oracles.grid_chsh_max(oracles.raw_correlations(rho, (3, 3), a.as_list(), b.as_list()))
        for a, b in enumerate_blocks(ME3)
    )
    elapsed = time.perf_counter() - t0
    target = 4 * math.sqrt(2) / 3
    ok = abs(rep.max_raw - target) <= 1e-6 and abs(grid - target) <= 1e-6 and rep.max_raw < 2 and elapsed < 5
    criterion("3 semantics-gap constant", ok,
              f"max_raw {rep.max_raw:.12f}, grid oracle {grid:.12f}, 4*sqrt(2)/3 = {target:.12f}, {elapsed:.2f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="raw reading of the 'entangled => some violation' direction fails "
                                       "for the maximally entangled 3x3 state (max raw value 4*sqrt(2)/3 < 2)")
def test_c3_raw_reading_of_gisin_direction():
    assert scan(ME3).max_raw > 2


def test_c4_concurrence_identities(criterion):
    t0 = time.perf_counter()
    worst_bi = 0.0
    for k, dims in enumerate(((2, 2), (3, 3), (4, 5), (6, 6))):
        for s in range(500):
            psi = random_pure(dims, [9, k, s])
            c7 = concurrence_pure(psi)
            worst_bi = max(worst_bi, abs(c7 - concurrence_dets(psi)), abs(c7 - concurrence_blocks(psi).value),
                           abs(c7 - oracle_concurrence(psi)))
    worst_multi = 0.0
    for k, dims in enumerate(((2, 2, 2), (3, 2, 2))):
        for s in range(200):
            rep = concurrence_multipartite(random_pure(dims, [10, k, s]))
            worst_multi = max(worst_multi, abs(rep.value - rep.block_value))
    g = concurrence_multipartite(ghz(3)).value
    w = concurrence_multipartite(w_state(3)).value
    elapsed = time.perf_counter() - t0
    ok = (worst_bi <= 1e-10 and worst_multi <= 1e-10 and abs(g - 1) <= 1e-10
          and abs(w - math.sqrt(8 / 9)) <= 1e-10 and elapsed < 30)
    criterion("4 concurrence identities", ok,
              f"bipartite dev {worst_bi:.1e}, multipartite dev {worst_multi:.1e}, GHZ {g:.12f}, W {w:.12f}, "
              f"{elapsed:.1f}s")
    assert ok


def test_c5_witness_contract(criterion):
    rng = np.random.default_rng(11)
    worst = math.inf
    for s in range(200):
        dims = ((2, 2), (3, 3), (2, 3), (3, 2))[s % 4]
        n = int(rng.integers(1, 11))
        weights = rng.dirichlet(np.ones(n))
        comps = [(float(weights[k]), random_product(dims, [12, s, k])) for k in range(n)]
        comps[0] = (1.0 - math.fsum(c[0] for c in comps[1:]), comps[0][1])
        sigma = mix(comps)
        rep = scan(sigma)
        # every block's optimal witness, evaluated through the full operator for the best one
        worst = min(worst, witness_value(rep.witness(), sigma), 2.0 - rep.max_raw)
    singlet_rep = scan(make_pure((2, 2), {(1, 2): 1, (2, 1): -1}))
    singlet_val = witness_value(singlet_rep.witness(), make_pure((2, 2), {(1, 2): 1, (2, 1): -1}))
    ok = worst >= -1e-9 and abs(singlet_val - (2 - TSIRELSON)) <= 1e-9
    criterion("5 witness contract", ok,
              f"min Tr(W sigma) over 200 separable mixtures {worst:.3e}, singlet {singlet_val:.12f}")
    assert ok


def _pure_block_concurrence(psi, alpha, beta):
    a = psi.tensor()
    i, j, k, l = alpha.i - 1, alpha.j - 1, beta.i - 1, beta.j - 1
    sub = np.array([[a[i, k], a[i, l]], [a[j, k], a[j, l]]])
    return 2 * abs(np.linalg.det(sub)) / np.sum(np.abs(sub) ** 2)


def test_c6_distillation_certificate(criterion):
    t0 = time.perf_counter()
    checked, worst, worst_direct, missing = 0, 0.0, 0.0, 0
    s = 0
    while checked < 200:
        psi = random_pure((5, 5), [13, s])
        s += 1
        if concurrence_pure(psi) <= 1e-3:
            continue
        checked += 1
        cert = distill_certificate(psi)
        if cert is None:
            missing += 1
            continue
        worst = max(worst, abs(cert.concurrence - cert.block_concurrence),
                    abs(cert.concurrence - _pure_block_concurrence(psi, cert.alpha0, cert.beta0)))
        worst_direct = max(worst_direct, abs(cert.concurrence - oracles.wootters_direct(cert.state)))
    spurious = sum(distill_certificate(random_product((5, 5), [14, s])) is not None for s in range(50))
    elapsed = time.perf_counter() - t0
    ok = missing == 0 and worst <= 1e-10 and worst_direct <= 1e-6 and spurious == 0 and elapsed < 20
    criterion("6 distillation certificate", ok,
              f"{checked} entangled states, max |C_proj - C_block| {worst:.1e}, {spurious} certificates for "
              f"50 product states, {elapsed:.1f}s")
    assert ok


def test_c7_ppt_consistency(criterion):
    failures = []
    top = 0.0
    for a in (0.25, 0.5, 0.75):
        rep = ppt_consistency(horodecki_bound_entangled(a))
        top = max(top, rep.max_block_value)
        if not (rep.is_ppt and rep.passed):
            failures.append(f"a={a}")
    rng = np.random.default_rng(15)
    for s in range(100):
        dims = ((3, 3), (2, 3), (2, 2), (3, 4))[s % 4]
        sigma = random_separable(dims, int(rng.integers(1, 11)), [15, s])
        rep = ppt_consistency(sigma)
        top = max(top, rep.max_block_value)
        if not (rep.is_ppt and rep.passed):
            failures.append(f"mixture {s}")
    ok = not failures and top <= 2 + 1e-9
    criterion("7 PPT consistency", ok, f"max block value {top:.12f}, failures {failures or 'none'}")
    assert ok


def test_c8_oracle_agreement(criterion):
    worst_grid, worst_cert, above = 0.0, 0.0, 0
    for s in range(100):
        if s % 2:
            rho = random_density((2, 2), [16, s], rank=1 + s % 4).matrix
        else:
            rho = to_density(random_pure((2, 2), [16, s])).matrix
        value, settings = horodecki_max(rho)
        grid = oracles.brute_settings_max(rho, step_deg=5)
        worst_grid = max(worst_grid, abs(value - grid))
        above += grid > value + 1e-12
        worst_cert = max(worst_cert, abs(expectation_block(settings, rho) - value))
    ok = worst_grid <= 1e-3 and worst_cert <= 1e-8 and above == 0
    criterion("8 oracle agreement", ok,
              f"max |closed form - 5 deg grid| {worst_grid:.2e}, settings reproduce value to {worst_cert:.1e}")
    assert ok


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "chshblocks", *args], capture_output=True, check=False)


def test_c9_cli_determinism(criterion, tmp_path):
    problems = []

    def same(*args):
        a, b = _cli(*args), _cli(*args)
        if a.stdout != b.stdout or a.returncode != b.returncode:
            problems.append(f"non-deterministic: {' '.join(args)}")
        return a

    r = same("random", "--dims", "3", "3", "--seed", "5")
    state = tmp_path / "state.json"
    state.write_bytes(r.stdout)
    if r.returncode != 0:
        problems.append("random exit")
    if same("analyze", str(state)).returncode != 0:
        problems.append("analyze exit")
    if same("verify", "--suite", "gisin", "--samples", "10", "--seed", "5").returncode != 0:
        problems.append("verify exit")

    bad = tmp_path / "bad.json"
    bad.write_text("{")
    unnormalized = tmp_path / "unnormalized.json"
    unnormalized.write_text(json.dumps({"kind": "pure", "dims": [2, 2], "amplitudes": [{"idx": [1, 1], "re": 2}]}))
    settings = tmp_path / "settings.json"
    settings.write_text(json.dumps({"a1": [0, 0, 1], "a2": [1, 0, 0], "b1": [0, 0, 1], "b2": [1, 0, 0]}))
    expected = {
        ("analyze", str(bad)): 2,
        ("analyze", str(unnormalized)): 3,
        ("witness", str(state), "--alpha", "1", "4", "--beta", "1", "2", "--settings", str(settings)): 2,
        ("witness", str(state), "--alpha", "1", "3", "--beta", "1", "2", "--settings", str(settings)): 0,
        ("verify", "--suite", "nonexistent"): 2,
        ("distill", str(state)): 0,
    }
    for args, code in expected.items():
        got = _cli(*args).returncode
        if got != code:
            problems.append(f"{args[0]} exit {got} != {code}")
    ok = not problems
    criterion("9 CLI determinism and exit codes", ok, "; ".join(problems) or "byte-identical reruns, codes 0/2/3")
    assert ok
