"""Acceptance criteria.  Each test prints one PASS/FAIL line, then asserts."""

import itertools
import math
import time

import numpy as np
import pytest

from conftest import random_instance
from misskmeans import (
    CenterTuple,
    Dataset,
    MissingPoint,
    SolveParams,
    centroid,
    cost_on,
    exact_k_means,
    idealized_k_means,
    k_means_search,
    partition_by_domains,
    run_trials,
    sq_distance_on,
    voronoi_assign,
)
from misskmeans.harness import complete_graph, cycle_graph, gen_mixture, graph_to_instance
from misskmeans.harness.bench import scaling_sweep
from misskmeans.solver import call_bound_log

REL = 1e-9


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}")
        return ok

    return emit


def close(a, b):
    return abs(a - b) <= REL * max(1.0, abs(a), abs(b))


def test_criterion_1_approximation_against_exact_optimum(report):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    wins = 0
    worst = 0.0
    for idx in range(50):
        n, d, delta = int(rng.integers(6, 11)), int(rng.integers(3, 6)), int(rng.integers(1, 3))
        data = random_instance(rng, n, d, delta)
        opt = exact_k_means(data, 2).opt_cost
        got = run_trials(data, SolveParams(k=2, epsilon=0.5, repeats=20, seed=idx)).cost
        wins += got <= 1.5 * opt + 1e-9
        worst = max(worst, got / opt if opt > 0 else (0.0 if got <= 1e-9 else math.inf))
    elapsed = time.perf_counter() - t0
    ok = wins >= 45 and elapsed < 120
    report(1, ok, f"{wins}/50 within 1.5*OPT (need 45), worst ratio {worst:.3f}, {elapsed:.1f}s")
    assert ok


def test_criterion_2_coloring_witnesses(report):
    t0 = time.perf_counter()
    params = dict(epsilon=1.0, repeats=20, seed=0)
    k3 = run_trials(graph_to_instance(complete_graph(3)), SolveParams(k=3, **params)).cost
    c4 = run_trials(graph_to_instance(cycle_graph(4)), SolveParams(k=2, **params)).cost
    c5_data = graph_to_instance(cycle_graph(5))
    c5_opt = exact_k_means(c5_data, 2).opt_cost
    c5 = run_trials(c5_data, SolveParams(k=2, **params)).cost
    elapsed = time.perf_counter() - t0
    checks = {
        "K3 cost<=1e-9": k3 <= 1e-9,
        "C4 cost<=1e-9": c4 <= 1e-9,
        "C5 cost<=1.5*OPT": c5 <= 1.5 * c5_opt + 1e-9,
        "C5 OPT>0": c5_opt > 0,
        "time<30s": elapsed < 30,
    }
    ok = all(checks.values())
    failed = [name for name, v in checks.items() if not v]
    report(
        2,
        ok,
        f"K3 {k3:.4g}, C4 {c4:.4g}, C5 {c5:.4g} vs OPT {c5_opt:.4g}, {elapsed:.1f}s"
        + (f"; failed: {', '.join(failed)}" if failed else ""),
    )
    assert ok


def test_criterion_3_linear_scaling(report):
    t0 = time.perf_counter()
    rows = scaling_sweep([10_000, 20_000, 40_000], k=2, d=8, Delta=1, epsilon=1.0, runs=5, seed=0)
    elapsed = time.perf_counter() - t0
    times = [t for _, t in rows]
    ratios = [b / a for a, b in zip(times, times[1:])]
    ok = all(1.5 <= r <= 3.0 for r in ratios) and elapsed < 300
    shown = ", ".join(f"n={n}: {t * 1e3:.1f}ms" for n, t in rows)
    report(3, ok, f"{shown}; ratios {', '.join(f'{r:.2f}' for r in ratios)}; {elapsed:.1f}s")
    assert ok


def _fuzz_partition(rng):
    n, d, k = int(rng.integers(1, 15)), int(rng.integers(1, 8)), int(rng.integers(1, 5))
    mask = rng.random((n, d)) < 0.6
    data = Dataset(np.where(mask, rng.normal(size=(n, d)), 0.0), mask)
    cmask = rng.random((k, d)) < 0.5
    centers = CenterTuple(np.zeros((k, d)), cmask)
    inter = cmask.all(axis=0)
    rows = np.flatnonzero(np.any(mask & ~inter, axis=1))
    groups = partition_by_domains(data, centers, rows)
    seen = sorted(int(x) for g in groups.values() for x in g)
    if seen != rows.tolist():
        return False
    full = (1 << k) - 1
    for T, members in groups.items():
        if T == full:
            return False
        for x in members:
            if T != sum(1 << t for t in range(k) if not np.any(mask[x] & ~cmask[t])):
                return False
    return True


def test_criterion_4_structural_invariants(report):
    rng = np.random.default_rng(4)
    partition_bad = sum(not _fuzz_partition(rng) for _ in range(10_000))

    runs = 0
    bad = []
    # (k, Δ, d, searches); k=3, Δ=2 trees run to millions of calls
    for k, delta, d, count in [(1, 1, 3, 40), (2, 1, 4, 40), (2, 2, 5, 40), (2, 3, 6, 20), (3, 1, 4, 40), (3, 2, 4, 2), (2, 0, 3, 40)]:
        for seed in range(count):
            n = int(rng.integers(10, 200))
            data = random_instance(rng, n, d, delta) if delta else Dataset(rng.normal(size=(n, d)))
            res = k_means_search(data, SolveParams(k=k, epsilon=1.0, seed=seed))
            s = res.stats
            runs += 1
            problems = list(s.violations)
            if s.nodes_checked != s.calls:
                problems.append("not every node checked")
            if s.max_sampling_on_path > k * (delta + 1) or (k == 2 and s.max_sampling_on_path > 2 * delta + 2):
                problems.append("too many sampling branches on a path")
            if s.min_prune_margin is not None and s.min_prune_margin < 0:
                problems.append("pruning removed too few points")
            if math.log(s.calls) > call_bound_log(k, k * (delta + 1)) + 1e-12:
                problems.append("call bound exceeded")
            if problems:
                bad.append((k, delta, seed, problems))
    ok = partition_bad == 0 and not bad
    report(
        4,
        ok,
        f"partition fuzz {partition_bad}/10000 violations; {runs} searches with per-node domain, "
        f"sampling-depth, pruning-size and call-bound checks, {len(bad)} with violations",
    )
    assert ok


def _random_point(rng, d, missing):
    mask = rng.random(d) >= missing
    return MissingPoint(np.where(mask, rng.normal(scale=5, size=d), 0.0), mask)


def _core_case(rng):
    d = int(rng.integers(1, 7))
    x, y = _random_point(rng, d, 0.3), _random_point(rng, d, 0.3)
    I = {i for i in range(d) if rng.random() < 0.5}
    J = I | {i for i in range(d) if rng.random() < 0.5}
    if not close(sq_distance_on(x, y, I), sq_distance_on(y, x, I)):
        return "symmetry"
    if sq_distance_on(x, y, I) > sq_distance_on(x, y, J) * (1 + REL) + 1e-300:
        return "monotonicity"

    n = int(rng.integers(1, 7))
    data = Dataset.from_points([_random_point(rng, d, 0.3) for _ in range(n)])
    whole = cost_on(data, y)
    if not close(whole, sum(cost_on(data, y, {i}) for i in range(d))):
        return "additivity"

    c = centroid(data)
    base = cost_on(data, c)
    # rivals are complete points: a center with a ⊗ where the data is defined
    # is not comparable
    filled = MissingPoint(np.where(c.mask, c.values, rng.normal(size=d)), np.ones(d, dtype=bool))
    shifted = MissingPoint(filled.values + rng.normal(scale=0.1, size=d), filled.mask)
    rival = MissingPoint(np.where(y.mask, y.values, rng.normal(size=d)), np.ones(d, dtype=bool))
    if not close(cost_on(data, filled), base):
        return "centroid optimality"
    for other in (shifted, rival):
        if cost_on(data, other) < base - REL * max(1.0, base):
            return "centroid optimality"

    k = int(rng.integers(1, 4))
    centers = np.where(rng.random((k, d)) < 0.2, np.nan, rng.normal(scale=5, size=(k, d)))
    vor = voronoi_assign(data, centers)
    cm = ~np.isnan(centers)
    cv = np.where(cm, centers, 0.0)
    diff = data.values[:, None, :] - cv[None, :, :]
    d2 = np.where(data.mask[:, None, :] & cm[None, :, :], diff * diff, 0.0).sum(axis=2)
    best = min(sum(d2[p, a] for p, a in enumerate(lab)) for lab in itertools.product(range(k), repeat=n))
    if not close(vor.cost, best):
        return "voronoi minimality"
    return None


def test_criterion_5_core_calculus(report):
    rng = np.random.default_rng(5)
    failures = {}
    for _ in range(10_000):
        why = _core_case(rng)
        if why:
            failures[why] = failures.get(why, 0) + 1
    ok = not failures
    report(5, ok, f"10000 fuzz cases, violations: {failures or 'none'}")
    assert ok


def test_criterion_6_idealized_dichotomy(report):
    failures = 0
    unassigned = 0
    max_phases = 0
    for i in range(20):
        k = 2 + i % 2
        delta = 1 + (i // 2) % 2
        data, labels = gen_mixture(k, 2000, 6, delta, separation=20, seed=600 + i)
        c = idealized_k_means(data, labels, SolveParams(k=k, epsilon=1.0), np.random.default_rng(i))
        failures += c.info["dichotomy_failures"]
        unassigned += int((c.assignment < 0).sum())
        max_phases = max(max_phases, len(c.info["phases"]))
    ok = failures == 0 and unassigned == 0
    report(6, ok, f"20 mixtures, {failures} phases with neither condition, {unassigned} unassigned points, "
                  f"at most {max_phases} phases")
    assert ok
