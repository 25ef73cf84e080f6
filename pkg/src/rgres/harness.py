"""Seeded Monte-Carlo experiment harness.

Each trial derives its own seed from the master seed and trial index, so
results are identical regardless of worker count or scheduling.  Workers
receive (config, index) and return an immutable TrialRecord; aggregation
is a deterministic fold in index order.
"""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

from . import adversary as adv
from . import classify as cls_mod
from . import hamilton as ham
from . import matching as mat
from . import process as proc
from .graph import Graph

KINDS = ("hitting", "pm-resilience", "ham-resilience", "threshold-sweep", "classify")

TRIAL_COLUMNS = ["index", "seed", "m", "m1", "m2", "deleted_edges",
                 "max_deleted_frac", "outcome", "stage", "runtime_ms"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n: int
    m: int | None = None
    m_coeff: float | None = None
    coeffs: tuple[float, ...] = ()
    trials: int = 10
    seed: int = 0
    adversary: str | None = None  # random | bipartition | targeted
    alpha: float = 0.0
    budget_mode: str = "simple"  # simple | refined
    delta_t: float = 0.3
    k_t: int = 1
    delta_a: float = 0.75
    k_a: int = 2
    eps: float = 0.2
    K: int = 20
    L: int = 5
    mu: float = 0.25
    workers: int = 1
    out: str | None = None
    fmt: str = "csv"

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.n < 1:
            raise ConfigError("n must be positive")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if not (0.0 <= self.alpha <= 1.0):
            raise ConfigError("alpha must be in [0, 1]")
        if self.adversary not in (None, "random", "bipartition", "targeted"):
            raise ConfigError(f"unknown adversary {self.adversary!r}")
        if self.budget_mode not in ("simple", "refined"):
            raise ConfigError(f"unknown budget mode {self.budget_mode!r}")
        if self.fmt not in ("csv", "json"):
            raise ConfigError(f"unknown format {self.fmt!r}")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if self.kind == "threshold-sweep":
            if not self.coeffs:
                raise ConfigError("threshold-sweep needs a coefficient list")
        elif self.kind != "hitting":
            if self.m is None and self.m_coeff is None:
                raise ConfigError(f"{self.kind} needs --m or --m-coeff")

    def resolved_m(self, coeff: float | None = None) -> int:
        c = coeff if coeff is not None else self.m_coeff
        if self.m is not None and coeff is None:
            return self.m
        if c is None:
            raise ConfigError("no edge count given")
        return math.ceil(c * self.n * math.log(self.n))

    def to_json(self) -> dict:
        d = asdict(self)
        d["coeffs"] = list(self.coeffs)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "coeffs" in d:
            d["coeffs"] = tuple(d["coeffs"])
        cfg = cls(**d)
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class TrialRecord:
    index: int
    seed: int
    m: int
    m1: int | None
    m2: int | None
    deleted_edges: int
    max_deleted_frac: float
    outcome: str  # success | failure
    stage: str
    runtime_ms: float

    def replay_key(self) -> tuple:
        """Everything except the wall-clock field, which is not replayable."""
        return (self.index, self.seed, self.m, self.m1, self.m2,
                self.deleted_edges, self.max_deleted_frac, self.outcome, self.stage)

    def to_row(self) -> list:
        return [self.index, self.seed, self.m,
                "" if self.m1 is None else self.m1,
                "" if self.m2 is None else self.m2,
                self.deleted_edges, f"{self.max_deleted_frac:.6f}",
                self.outcome, self.stage, f"{self.runtime_ms:.1f}"]

    @classmethod
    def from_row(cls, row: list[str]) -> "TrialRecord":
        return cls(index=int(row[0]), seed=int(row[1]), m=int(row[2]),
                   m1=int(row[3]) if row[3] else None,
                   m2=int(row[4]) if row[4] else None,
                   deleted_edges=int(row[5]), max_deleted_frac=float(row[6]),
                   outcome=row[7], stage=row[8], runtime_ms=float(row[9]))


def wilson_interval(successes: int, trials: int, z: float = 1.96,
                    ) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    phat = successes / trials
    denom = 1 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials
                         + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# -- adversary plumbing ---------------------------------------------------


def _apply_adversary(g: Graph, cfg: ExperimentConfig, seed: int,
                     ) -> tuple[adv.DeletionPlan, dict]:
    extra: dict = {}
    if cfg.adversary is None or (cfg.alpha == 0.0 and cfg.adversary != "bipartition"):
        return adv.empty_plan(g), extra
    if cfg.budget_mode == "refined":
        p = cls_mod.density(g)
        classification = cls_mod.classify(g, p, cfg.delta_t, cfg.delta_a)
        budget = adv.make_budget(g, "refined", alpha=cfg.alpha, cls=classification,
                                 k_t=cfg.k_t, k_a=cfg.k_a)
    else:
        budget = adv.make_budget(g, "simple", alpha=cfg.alpha)
    if cfg.adversary == "random":
        plan = adv.adversary_random(g, budget, seed)
    elif cfg.adversary == "targeted":
        # target the edges at the lowest-degree vertices
        verts = sorted(g.active, key=g.degree)[:max(1, g.n_active // 20)]
        target = {e for v in verts for e in
                  ((min(v, u), max(v, u)) for u in g.neighbors(v))}
        plan = adv.adversary_targeted(g, budget, sorted(target), seed)
    elif cfg.adversary == "bipartition":
        witness, plan = adv.adversary_bipartition(
            g, seed, budget=None if cfg.alpha == 0.0 else budget)
        ok, bad = witness.cross_majority_holds(g)
        extra["bipartition_witness_ok"] = ok
        extra["bipartition_balanced"] = witness.balanced
        extra["part_sizes"] = (len(witness.v1), len(witness.v2))
    else:
        raise ConfigError(f"unknown adversary {cfg.adversary!r}")
    legal, bad_v = adv.validate_plan(g, plan)
    if not legal:
        raise AssertionError(f"adversary exceeded budget at vertex {bad_v}")
    extra["deleted"] = len(plan.h)
    return plan, extra


def _max_deleted_frac(g: Graph, plan: adv.DeletionPlan) -> float:
    worst = 0.0
    if not plan.h:
        return 0.0
    per_vertex: dict[int, int] = {}
    for u, v in plan.h:
        per_vertex[u] = per_vertex.get(u, 0) + 1
        per_vertex[v] = per_vertex.get(v, 0) + 1
    for v, k in per_vertex.items():
        d = g.degree(v)
        if d:
            worst = max(worst, k / d)
    return worst


# -- per-trial workers ----------------------------------------------------


def _trial_hitting(cfg: ExperimentConfig, index: int) -> TrialRecord:
    t0 = time.perf_counter()
    seed = proc.derive_seed(cfg.seed, index)
    trace = proc.sample_process_until(cfg.n, 2, seed)
    m1, m2 = trace.milestones[1], trace.milestones[2]
    g1 = cls_mod.remove_isolated(proc.graph_at(trace, m1))
    pm_ok = mat.has_perfect_matching(g1)
    g2 = proc.graph_at(trace, m2)
    cyc, _rep = ham.hamilton_search(
        g2, adv.empty_plan(g2),
        params=ham.HamParams(eps=cfg.eps, K=cfg.K, L=cfg.L, mu=cfg.mu),
        seed=proc.derive_seed(seed, 1))
    ham_ok = cyc is not None
    outcome = "success" if (pm_ok and ham_ok) else "failure"
    stage = "ok" if outcome == "success" else \
        ("pm-at-m1" if not pm_ok else "ham-at-m2")
    return TrialRecord(index=index, seed=seed, m=m2, m1=m1, m2=m2,
                       deleted_edges=0, max_deleted_frac=0.0,
                       outcome=outcome, stage=stage,
                       runtime_ms=(time.perf_counter() - t0) * 1e3)


def _trial_pm(cfg: ExperimentConfig, index: int) -> TrialRecord:
    t0 = time.perf_counter()
    seed = proc.derive_seed(cfg.seed, index)
    m = cfg.resolved_m()
    trace = proc.sample_process(cfg.n, m, seed)
    g = cls_mod.remove_isolated(proc.graph_at(trace, m))
    plan, _extra = _apply_adversary(g, cfg, proc.derive_seed(seed, 1))
    g_minus_h = g.subtract_edges(plan.h)
    pm_ok = mat.has_perfect_matching(g_minus_h)
    cherry = cls_mod.cherry_count(g_minus_h) > 0
    p1 = cls_mod.density(g)
    classification = cls_mod.classify(g, p1, cfg.delta_t, cfg.delta_a)
    pipe = mat.constructive_pm(
        g, plan, classification,
        mat.PMParams(eps=cfg.eps, K=cfg.K, L=cfg.L, p1=p1),
        seed=proc.derive_seed(seed, 2))
    if pipe.success and not pm_ok:
        raise AssertionError("pipeline claims a matching the oracle rejects")
    stage_bits = [f"pipeline={'ok' if pipe.success else pipe.failure_stage}"]
    if cherry:
        stage_bits.append("cherry")
    return TrialRecord(index=index, seed=seed, m=m, m1=None, m2=None,
                       deleted_edges=len(plan.h),
                       max_deleted_frac=_max_deleted_frac(g, plan),
                       outcome="success" if pm_ok else "failure",
                       stage=";".join(stage_bits),
                       runtime_ms=(time.perf_counter() - t0) * 1e3)


def _trial_ham(cfg: ExperimentConfig, index: int) -> TrialRecord:
    t0 = time.perf_counter()
    seed = proc.derive_seed(cfg.seed, index)
    m = cfg.resolved_m()
    trace = proc.sample_process(cfg.n, m, seed)
    g = proc.graph_at(trace, m)
    core = cls_mod.two_core(g).core
    if core.n_active < 3:
        return TrialRecord(index=index, seed=seed, m=m, m1=None, m2=None,
                           deleted_edges=0, max_deleted_frac=0.0,
                           outcome="failure", stage="empty-2-core",
                           runtime_ms=(time.perf_counter() - t0) * 1e3)
    plan, extra = _apply_adversary(core, cfg, proc.derive_seed(seed, 1))
    real = core.subtract_edges(plan.h)
    peeled = cls_mod.two_core(real).core  # adversary may break min degree 2
    stage = ""
    if peeled.n_active == real.n_active:
        cyc, rep = ham.hamilton_search(
            core, plan,
            params=ham.HamParams(eps=cfg.eps, K=cfg.K, L=cfg.L, mu=cfg.mu),
            seed=proc.derive_seed(seed, 2))
        found = cyc is not None
        stage = "ok" if found else f"best={rep.best_path_len}/{core.n_active}"
    else:
        found = False
        stage = "adversary-broke-2-core"
    if found and core.n_active <= 14:
        if ham.hamilton_exact(real) is None:
            raise AssertionError("search reported a cycle the oracle refutes")
    if "bipartition_witness_ok" in extra:
        stage += f";witness={'ok' if extra['bipartition_witness_ok'] else 'BAD'}"
    return TrialRecord(index=index, seed=seed, m=m, m1=None, m2=None,
                       deleted_edges=len(plan.h),
                       max_deleted_frac=_max_deleted_frac(core, plan),
                       outcome="success" if found else "failure", stage=stage,
                       runtime_ms=(time.perf_counter() - t0) * 1e3)


def _trial_sweep(cfg: ExperimentConfig, index: int, coeff: float) -> dict:
    # one independent stream per (coefficient, trial) pair
    coeff_seed = proc.derive_seed(cfg.seed, int(coeff * 10**9) & 0x7FFFFFFF)
    seed = proc.derive_seed(coeff_seed, index)
    m = cfg.resolved_m(coeff)
    trace = proc.sample_process(cfg.n, m, seed)
    g = proc.graph_at(trace, m)
    iso_free = cls_mod.remove_isolated(g)
    pm_ok = mat.has_perfect_matching(iso_free) if iso_free.n_active else False
    cherry = cls_mod.cherry_count(iso_free) > 0
    core = cls_mod.two_core(g).core
    if core.n_active >= 3:
        cyc, _ = ham.hamilton_search(
            core, adv.empty_plan(core),
            params=ham.HamParams(eps=cfg.eps, K=cfg.K, L=cfg.L, mu=cfg.mu),
            seed=proc.derive_seed(seed, 2))
        ham_ok = cyc is not None
    else:
        ham_ok = False
    return {"coeff": coeff, "index": index, "pm": pm_ok, "ham": ham_ok,
            "cherry": cherry, "core_size": core.n_active}


def _trial_classify(cfg: ExperimentConfig, index: int) -> dict:
    seed = proc.derive_seed(cfg.seed, index)
    m = cfg.resolved_m()
    trace = proc.sample_process(cfg.n, m, seed)
    g = proc.graph_at(trace, m)
    p = cls_mod.density(g)
    c = cls_mod.classify(g, p, cfg.delta_t, cfg.delta_a)
    scatter = cls_mod.check_scatter(g, g, cfg.delta_t, k=3, L=cfg.L)
    codeg = cls_mod.check_codegree(g)
    core = cls_mod.two_core(g).core
    return {"index": index, "seed": seed, "m": m, "p": p,
            "tiny": len(c.tiny), "atyp": len(c.atyp),
            "scatter_ok": scatter.ok, "codegree_ok": codeg[0],
            "core_size": core.n_active,
            "cherries": cls_mod.cherry_count(g)}


_TRIAL_FN = {"hitting": _trial_hitting, "pm-resilience": _trial_pm,
             "ham-resilience": _trial_ham}


def _worker(payload: tuple[dict, int]) -> TrialRecord:
    cfg_d, index = payload
    cfg = ExperimentConfig.from_json(cfg_d)
    return _TRIAL_FN[cfg.kind](cfg, index)


def _fan_out(cfg: ExperimentConfig, fn, payloads: list):
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(fn, payloads))
    return [fn(p) for p in payloads]


# -- runners --------------------------------------------------------------


def _rate_block(successes: int, trials: int) -> dict:
    lo, hi = wilson_interval(successes, trials)
    return {"successes": successes, "trials": trials,
            "rate": successes / trials if trials else 0.0,
            "wilson_95": [lo, hi]}


def run_hitting(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    records = _fan_out(cfg, _worker,
                       [(cfg.to_json(), i) for i in range(cfg.trials)])
    records.sort(key=lambda r: r.index)
    m1s = [r.m1 for r in records]
    m2s = [r.m2 for r in records]
    n = cfg.n
    baseline = (n / 2) * (math.log(n) + math.log(math.log(n)))
    pm_fail = sum(1 for r in records if "pm-at-m1" in r.stage)
    ham_fail = sum(1 for r in records if "ham-at-m2" in r.stage)
    summary = {
        "kind": cfg.kind, "config": cfg.to_json(),
        "m1_mean": sum(m1s) / len(m1s), "m2_mean": sum(m2s) / len(m2s),
        "m1_quantiles": _quantiles(m1s), "m2_quantiles": _quantiles(m2s),
        "m2_over_baseline": (sum(m2s) / len(m2s)) / baseline,
        "ordering_ok": all(r.m1 <= r.m2 for r in records),
        "pm_at_m1": _rate_block(cfg.trials - pm_fail, cfg.trials),
        "ham_at_m2": _rate_block(cfg.trials - ham_fail, cfg.trials),
        "overall": _rate_block(
            sum(1 for r in records if r.outcome == "success"), cfg.trials),
    }
    _emit(cfg, records, summary)
    return summary


def _quantiles(xs: list) -> dict:
    s = sorted(xs)
    def q(f: float):
        return s[min(len(s) - 1, int(f * len(s)))]
    return {"q10": q(0.1), "q50": q(0.5), "q90": q(0.9)}


def run_pm_resilience(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    records = _fan_out(cfg, _worker,
                       [(cfg.to_json(), i) for i in range(cfg.trials)])
    records.sort(key=lambda r: r.index)
    pm = sum(1 for r in records if r.outcome == "success")
    pipe = sum(1 for r in records if "pipeline=ok" in r.stage)
    cherry = sum(1 for r in records if "cherry" in r.stage)
    summary = {
        "kind": cfg.kind, "config": cfg.to_json(),
        "pm_exists": _rate_block(pm, cfg.trials),
        "pipeline_success": _rate_block(pipe, cfg.trials),
        "cherry_present": _rate_block(cherry, cfg.trials),
        "pipeline_oracle_agreement": all(
            r.outcome == "success" for r in records if "pipeline=ok" in r.stage),
        "mean_deleted": sum(r.deleted_edges for r in records) / cfg.trials,
    }
    _emit(cfg, records, summary)
    return summary


def run_ham_resilience(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    records = _fan_out(cfg, _worker,
                       [(cfg.to_json(), i) for i in range(cfg.trials)])
    records.sort(key=lambda r: r.index)
    found = sum(1 for r in records if r.outcome == "success")
    wit_checked = [r for r in records if "witness=" in r.stage]
    summary = {
        "kind": cfg.kind, "config": cfg.to_json(),
        "ham_found": _rate_block(found, cfg.trials),
        "mean_deleted": sum(r.deleted_edges for r in records) / cfg.trials,
        "max_deleted_frac": max((r.max_deleted_frac for r in records), default=0.0),
        "witness_valid": all("witness=ok" in r.stage for r in wit_checked)
        if wit_checked else None,
    }
    _emit(cfg, records, summary)
    return summary


def run_sweep(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    rows = []
    for coeff in cfg.coeffs:
        payloads = [(coeff, i) for i in range(cfg.trials)]
        results = _fan_out(cfg, _SweepWorker(cfg), payloads)
        pm = sum(r["pm"] for r in results)
        hm = sum(r["ham"] for r in results)
        ch = sum(r["cherry"] for r in results)
        rows.append({
            "coeff": coeff, "n": cfg.n, "trials": cfg.trials,
            "pm_rate": pm / cfg.trials, "ham_rate": hm / cfg.trials,
            "cherry_rate": ch / cfg.trials,
            "core_size_mean": sum(r["core_size"] for r in results) / cfg.trials,
        })
    summary = {"kind": cfg.kind, "config": cfg.to_json(), "rows": rows}
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "sweep.csv"), "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["coeff", "n", "trials", "pm_rate",
                                               "ham_rate", "cherry_rate",
                                               "core_size_mean"])
            w.writeheader()
            w.writerows(rows)
        with open(os.path.join(cfg.out, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=2)
    return summary


class _SweepWorker:
    """Picklable closure carrying the config to pool workers."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg_d = cfg.to_json()

    def __call__(self, payload: tuple[float, int]) -> dict:
        coeff, index = payload
        return _trial_sweep(ExperimentConfig.from_json(self.cfg_d), index, coeff)


def run_classify(cfg: ExperimentConfig) -> dict:
    cfg.validate()
    results = [_trial_classify(cfg, i) for i in range(cfg.trials)]
    summary = {"kind": cfg.kind, "config": cfg.to_json(), "trials": results}
    if cfg.out:
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "summary.json"), "w") as fh:
            json.dump(summary, fh, indent=2)
    return summary


RUNNERS = {"hitting": run_hitting, "pm-resilience": run_pm_resilience,
           "ham-resilience": run_ham_resilience, "threshold-sweep": run_sweep,
           "classify": run_classify}


def run(cfg: ExperimentConfig) -> dict:
    return RUNNERS[cfg.kind](cfg)


# -- output and replay ----------------------------------------------------


def _emit(cfg: ExperimentConfig, records: list[TrialRecord], summary: dict,
          ) -> None:
    if not cfg.out:
        return
    os.makedirs(cfg.out, exist_ok=True)
    if cfg.fmt == "csv":
        with open(os.path.join(cfg.out, "trials.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(TRIAL_COLUMNS)
            for r in records:
                w.writerow(r.to_row())
    else:
        with open(os.path.join(cfg.out, "trials.json"), "w") as fh:
            json.dump([asdict(r) for r in records], fh, indent=2)
    with open(os.path.join(cfg.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)


def read_trials(path: str) -> list[TrialRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows and rows[0] == TRIAL_COLUMNS:
        rows = rows[1:]
    return [TrialRecord.from_row(r) for r in rows if r]


def replay_trial(cfg: ExperimentConfig, index: int) -> TrialRecord:
    """Regenerate one TrialRecord from (config, index)."""
    if cfg.kind not in _TRIAL_FN:
        raise ConfigError(f"replay is only defined for {sorted(_TRIAL_FN)}")
    return _TRIAL_FN[cfg.kind](cfg, index)


def replay_check(out_dir: str, indices: list[int] | None = None,
                 ) -> tuple[bool, list[int]]:
    """Re-run recorded trials and compare all replayable fields.

    Returns (all_match, mismatched_indices).
    """
    with open(os.path.join(out_dir, "summary.json")) as fh:
        summary = json.load(fh)
    cfg = ExperimentConfig.from_json(summary["config"])
    records = read_trials(os.path.join(out_dir, "trials.csv"))
    by_index = {r.index: r for r in records}
    todo = indices if indices is not None else sorted(by_index)
    bad = []
    for i in todo:
        fresh = replay_trial(cfg, i)
        stored = by_index[i]
        # compare through the CSV round-trip so formatting is identical
        if TrialRecord.from_row([str(x) for x in fresh.to_row()]).replay_key() \
                != stored.replay_key():
            bad.append(i)
    return not bad, bad
