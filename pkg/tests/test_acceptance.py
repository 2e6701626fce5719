"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""

import dataclasses
import math
import time

import numpy as np
import pytest
from oracles import convolve_exact, det_ratio_mp, empirical_acf, moonshine_bruteforce, random_fraction_dist

from entropy_still.correctors import DistillConfig, moonshine, von_neumann
from entropy_still.entropy import (
    acf_from_samples,
    ar_acf,
    compare_det_ratios,
    det_ratio_levinson,
    renyi_awgn,
    shannon_gaussian,
    shannon_rate,
)
from entropy_still.exceptions import DegenerateDataError, InsufficientDataError
from entropy_still.randtests import BatteryConfig, run_battery, run_test
from entropy_still.simulator import SourceModel, acf_analytic, generate
from entropy_still.sweep import sweep

FREQUENCY_FAMILY = ("frequency", "block_frequency", "cumsum_fwd", "cumsum_rev")


def verdict(number, ok, detail):
    print(f"\nACCEPTANCE {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_01_distiller_oracle():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    mismatches = compared = 0
    for _ in range(5000):
        n = int(rng.integers(1, 65))
        k, m = int(rng.integers(2, 4)), int(rng.integers(0, 3))
        bits = (rng.random(n) < rng.uniform(0.05, 0.95)).astype(np.uint8)
        ref = moonshine_bruteforce(bits, k, m)
        try:
            got = moonshine(bits, DistillConfig(k, m))[0].to01()
        except (DegenerateDataError, InsufficientDataError):
            got = None
        mismatches += got != ref
        compared += ref is not None
    elapsed = time.perf_counter() - t0
    verdict(1, mismatches == 0 and elapsed < 10,
            f"{mismatches} mismatches in 5000 cases ({compared} non-degenerate), {elapsed:.2f} s")


def test_criterion_02_bernoulli_trend(bernoulli07):
    t0 = time.perf_counter()
    raw = run_battery(bernoulli07)
    out, _ = moonshine(bernoulli07, DistillConfig(8, 4))
    ms = run_battery(out)
    vn = von_neumann(bernoulli07)
    vn_res = run_battery(vn)
    elapsed = time.perf_counter() - t0

    ms_ret = out.length / bernoulli07.size
    vn_ret = vn.length / bernoulli07.size
    min_prop = min(o.proportion_passing for o in ms.outcomes)
    checks = {
        "raw <= 4/9": raw.passed_count <= 4,
        "moonshine >= 1e4 bits": out.length >= 10**4,
        "moonshine 9/9": ms.passed_count == 9,
        "moonshine proportion >= 0.96": min_prop >= 0.96,
        "vn frequency family": all(vn_res[t].passed for t in FREQUENCY_FAMILY),
        "vn retention <= 0.22": vn_ret <= 0.22,
        "moonshine retention >= 0.30": ms_ret >= 0.30,
        "runtime < 10 s": elapsed < 10,
    }
    failed = [name for name, ok in checks.items() if not ok]
    verdict(2, not failed,
            f"raw {raw.passed_count}/9, moonshine {ms.passed_count}/9 on {out.length} bits "
            f"(min proportion {min_prop:.2f}, retention {ms_ret:.3f}), "
            f"vn {vn_res.passed_count}/9 retention {vn_ret:.3f}, {elapsed:.1f} s; failed: {failed}")


def test_criterion_03_awgn_entropy_rate():
    t0 = time.perf_counter()
    real = generate(SourceModel(sigma_common=1.0, sigma_device=0.0, seed=3), 10**5, 1)
    h = shannon_rate(acf_from_samples(real.analog[0], 64), "levinson").shannon_rate_bits
    elapsed = time.perf_counter() - t0
    target = math.log2(math.sqrt(2 * math.pi * math.e))
    verdict(3, abs(h - target) <= 0.1 and elapsed < 5,
            f"estimate {h:.4f} vs {target:.4f} bits/sample, {elapsed:.2f} s")


def test_criterion_04_det_ratio_oracle():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(1000):
        order = int(rng.integers(1, 12))
        refl = rng.uniform(-0.9, 0.9, order)
        a = np.zeros(0)
        for kappa in refl:
            a = np.concatenate([a + kappa * a[::-1], [kappa]])
        acf = ar_acf(a, rng.uniform(0.5, 2.0), order)
        ref = det_ratio_mp(acf)
        worst = max(worst, abs(det_ratio_levinson(acf) - ref) / ref)
    cmp = compare_det_ratios([1.0, 0.5])
    verdict(4, worst < 1e-9,
            f"worst relative error {worst:.2e} over 1000 matrices of order <= 12; "
            f"2x2 [[1, .5], [.5, 1]]: levinson {cmp['levinson']:.4f}, qr {cmp['qr_rpp']:.4f}")


def test_criterion_05_renyi_shannon_gap():
    gap = 0.5 * math.log2(math.e / 2)
    worst = max(abs(shannon_gaussian(s) - renyi_awgn(s) - gap) for s in (0.5, 1, 5, 50, 500))
    r = renyi_awgn(409.6)
    verdict(5, worst < 1e-12 and 10 <= r <= 12, f"max gap error {worst:.1e}, renyi_awgn(409.6) = {r:.3f}")


def test_criterion_06_simulator_acf():
    model = SourceModel(coeffs=(1.0, 0.5, 0.25), sigma_common=0.1, sigma_device=0.1, seed=0)
    lags = 40
    ref = acf_analytic(model, lags).lags
    acc = np.zeros(lags + 1)
    early, late = np.zeros(lags + 1), np.zeros(lags + 1)
    for seed in range(200):
        m = dataclasses.replace(model, seed=seed)
        acc += empirical_acf(generate(m, 2000, 1).analog[0], lags)
        early += empirical_acf(generate(m, 1000, 1, start_index=0).analog[0], lags)
        late += empirical_acf(generate(m, 1000, 1, start_index=987_654).analog[0], lags)
    rms = np.sqrt(np.mean((acc / 200 - ref) ** 2)) / ref[0]
    shift = np.sqrt(np.mean((early / 200 - late / 200) ** 2)) / ref[0]
    verdict(6, rms < 0.02 and shift < 0.02, f"RMS vs analytic {rms:.4f}, shifted-window RMS {shift:.4f}")


def test_criterion_07_renyi_lemma():
    rng = np.random.default_rng(7)
    held = 0
    for _ in range(1000):
        d = random_fraction_dist(rng, int(rng.integers(1, 9)))
        z = random_fraction_dist(rng, int(rng.integers(1, 9)))
        held += sum(p * p for p in convolve_exact(d, z)) <= sum(p * p for p in z)
    verdict(7, held == 1000, f"R(D+Z) >= R(Z) in {held}/1000 exact trials")


@pytest.mark.slow
def test_criterion_08_retention_model():
    bits = np.random.default_rng(8).integers(0, 2, 10**7, dtype=np.uint8)
    grid = sweep(bits, [4, 8, 12], [0, 4, 8], run_tests=False)
    worst = 0.0
    for i, m in enumerate(grid.m_values):
        for j, k in enumerate(grid.k_values):
            expected = 0.5 * (k - 1) / (k + m)
            worst = max(worst, abs(grid.cells[i][j].retention_fraction - expected))
    verdict(8, worst <= 0.05, f"max |retention - 0.5(k-1)/(k+m)| = {worst:.4f} over 9 cells")


def test_criterion_09_battery_known_answers(uniform_1e6):
    p = run_test("1011010101", "frequency", BatteryConfig(min_stream_bits=10))
    zeros = run_battery(np.zeros(10**4, dtype=np.uint8)).passed_count
    uni = run_battery(uniform_1e6).passed_count
    ok = abs(p.p_values[0] - 0.5271) <= 1e-4 and zeros == 0 and uni == 9
    verdict(9, ok, f"monobit p {p.p_values[0]:.6f}, zeros {zeros}/9, uniform {uni}/9")


def test_criterion_10_throughput(bernoulli07):
    moonshine(bernoulli07[:1000], DistillConfig(8, 4))  # warm caches
    t0 = time.perf_counter()
    out, _ = moonshine(bernoulli07, DistillConfig(8, 4))
    elapsed = time.perf_counter() - t0
    verdict(10, elapsed < 1.0, f"distilled {bernoulli07.size} bits to {out.length} in {elapsed * 1e3:.1f} ms")
