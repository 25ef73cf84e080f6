"""End-to-end acceptance suite.

Each test checks one headline guarantee at desk scale and prints a single
pass/fail line (visible with ``pytest -rA`` or ``-s``).  Monte-Carlo
thresholds use fixed seeds, so runs are reproducible.
"""

import itertools
import math

import numpy as np
import pytest

from conftest import random_graph
from rgres import adversary as A
from rgres import classify as C
from rgres import hamilton as H
from rgres import harness as hz
from rgres import matching as M
from rgres import process as P
from rgres.graph import Graph


def _report(num: int, name: str, ok: bool, detail: str) -> None:
    print(f"criterion {num} ({name}): {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num} ({name}): {detail}"


def test_criterion_01_matching_oracle_equivalence():
    """Blossom matching equals exhaustive brute force, 10^4 instances."""
    rng = np.random.default_rng(101)
    agree = 0
    total = 10_000
    for _ in range(total):
        n = int(rng.integers(2, 9))
        g = random_graph(rng, n, float(rng.uniform(0.05, 0.95)))
        if len(M.max_matching_exact(g)) == M.max_matching_brute(g):
            agree += 1
    _report(1, "matching oracle", agree == total, f"{agree}/{total} agree")


def test_criterion_02_hamiltonicity_no_false_positives():
    """Search vs subset-DP oracle on 500 random graph/deletion instances."""
    rng = np.random.default_rng(202)
    false_pos = 0
    unverified = 0
    found = 0
    ran = 0
    for trial in range(500):
        n = int(rng.integers(6, 15))
        g = random_graph(rng, n, float(rng.uniform(0.25, 0.6)))
        budget = A.make_budget(g, "simple", alpha=float(rng.uniform(0.0, 0.3)))
        plan = A.adversary_random(g, budget, seed=trial)
        core = C.two_core(g.subtract_edges(plan.h)).core
        if core.n_active < 3:
            continue
        ran += 1
        cyc, _ = H.hamilton_search(core, A.empty_plan(core), seed=trial)
        if cyc is None:
            continue
        found += 1
        if not H.verify_hamilton_cycle(core, cyc):
            unverified += 1
        if H.hamilton_exact(core) is None:
            false_pos += 1
    _report(2, "hamiltonicity oracle", false_pos == 0 and unverified == 0,
            f"{ran} instances, {found} cycles, {false_pos} false positives, "
            f"{unverified} unverified")


def test_criterion_03_booster_soundness():
    """Every rotation-derived booster pair is a true booster, 500 instances."""
    rng = np.random.default_rng(303)
    pairs_checked = 0
    unsound = 0
    for trial in range(500):
        n = int(rng.integers(6, 15))
        g = random_graph(rng, n, float(rng.uniform(0.2, 0.5)))
        verts = sorted(g.active)
        p = H.PathState(seq=(verts[int(rng.integers(len(verts)))],))
        while (nxt := H.extend(p, g)) is not None:
            p = nxt
        if len(p) < 3:
            continue
        for a, b in H.rotation_booster_pairs(g, p, exact=True):
            pairs_checked += 1
            if b not in H.boosters_exact(g, a).companions:
                unsound += 1
    _report(3, "booster soundness", unsound == 0 and pairs_checked > 0,
            f"{pairs_checked} pairs checked, {unsound} unsound")


def test_criterion_04_hitting_time_concentration():
    """n = 3000: mean m2 near (n/2)(ln n + ln ln n); m1 <= m2 always."""
    n, trials = 3000, 50
    m1s, m2s = [], []
    ordered = True
    for i in range(trials):
        trace = P.sample_process_until(n, 2, P.derive_seed(404, i))
        m1, m2 = trace.milestones[1], trace.milestones[2]
        m1s.append(m1)
        m2s.append(m2)
        ordered = ordered and m1 <= m2
    baseline = (n / 2) * (math.log(n) + math.log(math.log(n)))
    ratio = (sum(m2s) / trials) / baseline
    ok = 0.85 <= ratio <= 1.15 and ordered
    _report(4, "hitting-time concentration", ok,
            f"mean m2 / baseline = {ratio:.3f}, ordering {'ok' if ordered else 'BROKEN'}")


def test_criterion_05_pm_at_m1():
    """n = 2000: the exact oracle finds a PM at the degree-1 hitting time."""
    n, trials = 2000, 100
    hits = 0
    for i in range(trials):
        trace = P.sample_process_until(n, 1, P.derive_seed(505, i))
        g = P.graph_at(trace, trace.milestones[1])
        if M.has_perfect_matching(g):
            hits += 1
    lo, hi = hz.wilson_interval(hits, trials)
    _report(5, "PM at m1", hits >= 95,
            f"{hits}/{trials} trials (Wilson 95% [{lo:.3f}, {hi:.3f}])")


def test_criterion_06_ham_at_m2():
    """n = 1000: a verified Hamilton cycle at the degree-2 hitting time."""
    n, trials = 1000, 50
    hits = 0
    for i in range(trials):
        seed = P.derive_seed(606, i)
        trace = P.sample_process_until(n, 2, seed)
        g = P.graph_at(trace, trace.milestones[2])
        cyc, _ = H.hamilton_search(g, A.empty_plan(g), seed=P.derive_seed(seed, 1))
        if cyc is not None:
            assert H.verify_hamilton_cycle(g, cyc)
            hits += 1
    lo, hi = hz.wilson_interval(hits, trials)
    _report(6, "HAM at m2", hits / trials >= 0.90,
            f"{hits}/{trials} trials (Wilson 95% [{lo:.3f}, {hi:.3f}])")


def test_criterion_07_pm_resilience_threshold():
    """n = 2000: PM survives a random alpha=0.3 adversary above the
    threshold; below it, cherries certify failure."""
    above = hz.run(hz.ExperimentConfig(
        kind="pm-resilience", n=2000, m_coeff=0.35, trials=50, seed=707,
        adversary="random", alpha=0.3))
    below = hz.run(hz.ExperimentConfig(
        kind="pm-resilience", n=2000, m_coeff=0.20, trials=50, seed=708))
    pm_rate = above["pm_exists"]["rate"]
    cherry_rate = below["cherry_present"]["rate"]
    ok = (pm_rate >= 0.90 and cherry_rate >= 0.90
          and above["pipeline_oracle_agreement"]
          and below["pm_exists"]["rate"] <= 0.10)
    _report(7, "PM resilience", ok,
            f"above-threshold PM rate {pm_rate:.2f}, "
            f"below-threshold cherry rate {cherry_rate:.2f}, "
            f"below-threshold PM rate {below['pm_exists']['rate']:.2f}")


def test_criterion_08_two_core_ham_resilience():
    """n = 1000, m = ceil(n ln n): the 2-core stays Hamiltonian under a
    random alpha=0.3 adversary."""
    summary = hz.run(hz.ExperimentConfig(
        kind="ham-resilience", n=1000, m_coeff=1.0, trials=50, seed=808,
        adversary="random", alpha=0.3))
    rate = summary["ham_found"]["rate"]
    frac = summary["max_deleted_frac"]
    ok = rate >= 0.85 and frac <= 0.3 + 1e-9
    _report(8, "2-core HAM resilience", ok,
            f"success rate {rate:.2f}, worst deleted fraction {frac:.3f}")


def test_criterion_09_bipartition_tightness():
    """n = 500: the uncapped bipartition adversary leaves a bipartite
    graph whose witness validates; unbalanced parts certify no PM by a
    matching-size parity bound."""
    n, trials = 500, 50
    m = math.ceil(n * math.log(n))
    witness_ok = 0
    unbalanced = 0
    certified = 0
    for i in range(trials):
        seed = P.derive_seed(909, i)
        trace = P.sample_process(n, m, seed)
        g = P.graph_at(trace, m)
        wit, plan = A.adversary_bipartition(g, seed=P.derive_seed(seed, 1))
        rem = g.subtract_edges(plan.h)
        cross_only = all((u in wit.v1) != (v in wit.v1) for u, v in rem.edges())
        holds, _ = wit.cross_majority_holds(g)
        if holds and cross_only:
            witness_ok += 1
        if len(wit.v1) != len(wit.v2):
            unbalanced += 1
            # a bipartite graph cannot match beyond its smaller side, so
            # unequal sides of an even-order graph rule out a PM (and a
            # Hamilton cycle, which would alternate sides)
            small = min(len(wit.v1), len(wit.v2))
            matched = len(M.max_matching_exact(rem))
            if matched <= small < rem.n_active / 2:
                certified += 1
    ok = witness_ok == trials and certified == unbalanced
    _report(9, "bipartition tightness", ok,
            f"witness valid {witness_ok}/{trials}, "
            f"parity certificates {certified}/{unbalanced} unbalanced trials")


def test_criterion_10_structural_invariant_suite():
    """Bundle of cheap invariants at volume: peeling order invariance,
    rotation involution and vertex preservation, sandwich nesting, plan
    legality, classification monotonicity."""
    rng = np.random.default_rng(1010)
    problems = []

    # 2-core order-invariance: 10^3 graphs, 100 random peel orders each
    for _ in range(1000):
        n = int(rng.integers(6, 15))
        g = random_graph(rng, n, float(rng.uniform(0.1, 0.4)))
        reference = C.two_core(g).core.active
        verts = sorted(g.active)
        for _ in range(100):
            order = [verts[i] for i in rng.permutation(len(verts))]
            alive = set(g.active)
            changed = True
            while changed:
                changed = False
                for v in order:
                    if v in alive and len(g.neighbors(v) & alive) <= 1:
                        alive.discard(v)
                        changed = True
            if frozenset(alive) != reference:
                problems.append("2-core peel order")
                break

    # rotation involution and vertex preservation, 10^3 cases
    for _ in range(1000):
        n = int(rng.integers(5, 12))
        seq = tuple(int(x) for x in rng.permutation(n))
        p = H.PathState(seq=seq)
        i = int(rng.integers(2, n - 1))
        q = H.rotate(p, i)
        if sorted(q.seq) != sorted(seq) or q.fixed_end != p.fixed_end:
            problems.append("rotation preservation")
            break
        back = H.rotate(q, q.seq.index(seq[i]))
        if back.seq != seq:
            problems.append("rotation involution")
            break

    # sandwich nesting across 10^3 slices
    slices = 0
    while slices < 1000:
        sw = P.sample_sandwich(40, 0.15, 0.1, seed=int(rng.integers(1 << 30)))
        lo = len(sw.g_minus.edge_set())
        hi = len(sw.g_plus.edge_set())
        prev = None
        for m in range(lo, hi + 1):
            cur = P.sandwich_slice(sw, m).edge_set()
            if len(cur) != m or (prev is not None and not prev <= cur):
                problems.append("sandwich nesting")
                break
            prev = cur
            slices += 1
        if problems and problems[-1] == "sandwich nesting":
            break

    # 10^3 adversary plans legal under their budgets
    for trial in range(1000):
        n = int(rng.integers(6, 20))
        g = random_graph(rng, n, 0.4)
        b = A.make_budget(g, "simple", alpha=float(rng.uniform(0.0, 0.8)))
        plan = A.adversary_random(g, b, seed=trial)
        ok, _ = A.validate_plan(g, plan)
        if not ok:
            problems.append("plan validation")
            break

    # classification monotonicity in the thresholds
    g = random_graph(rng, 60, 0.2)
    p = C.density(g)
    tiny_prev: frozenset[int] = frozenset()
    atyp_prev = None
    for d in (0.1, 0.3, 0.5, 0.7, 0.9):
        c = C.classify(g, p, delta_t=d, delta_a=d)
        if not tiny_prev <= c.tiny:
            problems.append("tiny monotonicity")
        if atyp_prev is not None and not c.atyp <= atyp_prev:
            problems.append("atyp monotonicity")
        tiny_prev, atyp_prev = c.tiny, c.atyp

    _report(10, "structural invariants", not problems,
            "all invariant families hold" if not problems
            else f"violations: {sorted(set(problems))}")
