"""Seeded trial batteries over explicit instances, with JSON/CSV reports.

Trial ``t`` of an experiment with base seed ``s`` uses seed ``s + t``; the
p and q sources get the two children of ``SeedSequence(s + t)``. Reports
contain no timestamps or host data and are serialized with sorted keys, so
the same config always yields the same bytes, whatever the worker count.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import generators as G
from .cluster import (clustered_known_budget, clustered_unknown_budget,
                      emd_test_clustered_known, emd_test_clustered_unknown)
from .distributions import distribution_from_json, l1_distance
from .errors import ParamError, ParseError
from .flow import emd_exact, emd_matrix
from .sources import RNG_NAME, SampleSource, spawn_seeds
from .testers import (EmdTestConfig, closeness_budget, emd_closeness_test,
                      emd_closeness_test_known, emd_estimate, estimate_budget,
                      known_closeness_budget)
from .tree import (WeightedTree, hard_line_instance, node_distribution, node_weights,
                   path_tree, tree_emd_estimate, tree_emd_exact, tree_estimate_budget,
                   tree_from_json)

MODES = ("estimate", "test", "test-known", "test-cluster", "tree")
REPORT_VERSION = 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a report.

    ``generator``/``params`` name a built-in instance; otherwise ``inputs``
    lists instance files. ``delta`` is the failure probability used by the
    tree estimator; ``span`` is the side of the domain. ``workers`` only
    changes wall-clock time and is left out of the report.
    """

    mode: str
    generator: str | None = None
    params: dict = field(default_factory=dict)
    inputs: tuple = ()
    eps: float = 0.1
    delta: float = 1 / 3
    d: int = 1
    span: float = 1.0
    trials: int = 1
    seed: int = 0
    c: float = 1.0
    strategy: str = "auto"
    cluster: str = "known"
    k: int | None = None
    centers: tuple | None = None
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ParamError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.generator is None and not self.inputs:
            raise ParamError("give either a generator or input files")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ParamError("trials must be a positive integer")
        if int(self.d) != self.d or self.d < 1:
            raise ParamError("dimension must be a positive integer")
        for name in ("eps", "span", "c"):
            if not getattr(self, name) > 0:
                raise ParamError(f"{name} must be positive")
        if not 0 < self.delta < 1:
            raise ParamError("delta must lie in (0, 1)")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ParamError("seed must be a non-negative integer")
        if self.cluster not in ("known", "unknown"):
            raise ParamError("cluster must be 'known' or 'unknown'")
        if self.workers < 1:
            raise ParamError("workers must be at least 1")
        object.__setattr__(self, "inputs", tuple(self.inputs))
        if self.centers is not None:
            object.__setattr__(self, "centers", tuple(tuple(map(float, c)) for c in self.centers))

    def echo(self) -> dict:
        out = asdict(self)
        del out["workers"]
        out["inputs"] = list(self.inputs)
        out["centers"] = None if self.centers is None else [list(c) for c in self.centers]
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = set(obj) - known
        if extra:
            raise ParseError(f"unknown config keys: {sorted(extra)}")
        return cls(**obj)


@dataclass
class Instance:
    """Explicit p and q (node masses in tree mode) plus side information."""

    p: object
    q: object
    d: int
    span: float
    centers: np.ndarray | None = None
    tree: WeightedTree | None = None
    k: int | None = None


@dataclass
class TrialReport:
    config: dict
    instance: dict
    oracle: dict
    budget: dict
    trials: list
    aggregate: dict
    rng: str = RNG_NAME
    seed_rule: str = "trial t uses base seed + t"
    version: int = REPORT_VERSION

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------- instances

def _param(cfg: ExperimentConfig, name: str, default=None):
    if name in cfg.params:
        return cfg.params[name]
    if default is None:
        raise ParamError(f"generator {cfg.generator!r} needs parameter {name!r}")
    return default


def _gen_hard_pair(cfg):
    if cfg.d != 1:
        raise ParamError("hard-pair lives on the line (d = 1)")
    p, q = G.gen_hard_pair_1d(cfg.span, float(_param(cfg, "gap", cfg.eps)))
    return Instance(p, q, 1, cfg.span)


def _gen_random(cfg):
    n = int(_param(cfg, "points", 8))
    s = int(_param(cfg, "instance_seed", 0))
    p = G.gen_random(n, cfg.d, cfg.span, s)
    q = p if _param(cfg, "same", True) else G.gen_random(n, cfg.d, cfg.span, s + 1)
    return Instance(p, q, cfg.d, cfg.span)


def _gen_uniform(cfg):
    p = G.gen_uniform_grid(int(_param(cfg, "per_axis", 4)), cfg.d, cfg.span)
    return Instance(p, p, cfg.d, cfg.span)


def _gen_point_mass(cfg):
    p = G.gen_point_mass(cfg.d, cfg.span, float(_param(cfg, "where", 0.5)))
    return Instance(p, p, cfg.d, cfg.span)


def _gen_shifted(cfg):
    n = int(_param(cfg, "points", 8))
    p = G.gen_random(n, cfg.d, cfg.span, int(_param(cfg, "instance_seed", 0)))
    return Instance(p, G.gen_shifted(p, float(_param(cfg, "shift", 0.1))), cfg.d, cfg.span)


def _gen_injection(cfg):
    n = int(_param(cfg, "n", 16))
    pa = np.full(n, 1 / n)
    qa = pa.copy()
    if _param(cfg, "far", False):
        qa = np.zeros(n)
        qa[: (n + 1) // 2] = 1 / ((n + 1) // 2)
    p, q = G.gen_grid_injection(pa, qa, n, cfg.d, cfg.span)
    return Instance(p, q, cfg.d, cfg.span)


def _gen_clustered(cfg):
    k = int(_param(cfg, "k", 4))
    b = float(_param(cfg, "b", cfg.eps / 4))
    p, q, centers = G.gen_clustered(k, b, cfg.d, cfg.span, float(_param(cfg, "imbalance", 0.0)))
    return Instance(p, q, cfg.d, cfg.span, centers=centers, k=k)


def _gen_far_clusterable(cfg):
    k = int(_param(cfg, "k", 4))
    p = G.gen_far_from_clusterable(k, float(_param(cfg, "b", cfg.eps / 4)), cfg.d, cfg.span)
    return Instance(p, p, cfg.d, cfg.span, k=k)


def _gen_hard_line(cfg):
    n = int(_param(cfg, "n", 10))
    tree = path_tree(n, float(_param(cfg, "weight", 1.0)))
    p, q = hard_line_instance(n, float(_param(cfg, "gap", cfg.eps)))
    return Instance(p, q, 1, max(n - 1, 1), tree=tree)


def _gen_random_tree(cfg):
    n = int(_param(cfg, "n", 10))
    rng = np.random.default_rng(int(_param(cfg, "instance_seed", 0)))
    edges = tuple((int(rng.integers(v)), v, float(rng.uniform(0.1, 1.0))) for v in range(1, n))
    tree = WeightedTree(n, edges)
    p = rng.dirichlet(np.ones(n))
    q = p if _param(cfg, "same", False) else rng.dirichlet(np.ones(n))
    return Instance(p, q, 1, max(n - 1, 1), tree=tree)


GENERATORS = {
    "hard-pair": _gen_hard_pair,
    "random": _gen_random,
    "uniform": _gen_uniform,
    "point-mass": _gen_point_mass,
    "shifted": _gen_shifted,
    "grid-injection": _gen_injection,
    "clustered": _gen_clustered,
    "far-from-clusterable": _gen_far_clusterable,
    "hard-line": _gen_hard_line,
    "random-tree": _gen_random_tree,
}
TREE_GENERATORS = ("hard-line", "random-tree")


def read_json(path: str):
    """Load a JSON file; OSError propagates, malformed JSON becomes ParseError."""
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from exc


def _load_pair(paths) -> tuple:
    if len(paths) == 1:
        obj = read_json(paths[0])
        if not isinstance(obj, dict) or "p" not in obj or "q" not in obj:
            raise ParseError(f"{paths[0]}: a single input file must hold both 'p' and 'q'")
        return obj["p"], obj["q"], obj
    if len(paths) == 2:
        return read_json(paths[0]), read_json(paths[1]), {}
    raise ParamError("give one instance file or two distribution files")


def load_instance(cfg: ExperimentConfig) -> Instance:
    if cfg.generator is not None:
        if cfg.generator not in GENERATORS:
            raise ParamError(f"unknown generator {cfg.generator!r}; choose from {sorted(GENERATORS)}")
        if (cfg.mode == "tree") != (cfg.generator in TREE_GENERATORS):
            raise ParamError(f"generator {cfg.generator!r} does not fit mode {cfg.mode!r}")
        inst = GENERATORS[cfg.generator](cfg)
    elif cfg.mode == "tree":
        rp, rq, whole = _load_pair(cfg.inputs)
        if "tree" not in whole:
            raise ParseError("tree instances need a single file with 'tree', 'p' and 'q'")
        tree = tree_from_json(whole["tree"])
        p, q = (node_weights(tree, {int(k): v for k, v in r.items()} if isinstance(r, dict) else r)
                for r in (rp, rq))
        inst = Instance(p, q, 1, max(tree.n - 1, 1), tree=tree)
    else:
        rp, rq, whole = _load_pair(cfg.inputs)
        p, q = distribution_from_json(rp), distribution_from_json(rq)
        if not p.same_domain(q):
            raise ParamError("p and q live on different domains")
        centers = whole.get("centers")
        inst = Instance(p, q, p.d, p.delta,
                        centers=None if centers is None else np.asarray(centers, dtype=float))
    if cfg.centers is not None:
        inst.centers = np.asarray(cfg.centers, dtype=float)
    if cfg.k is not None:
        inst.k = cfg.k
    if cfg.mode == "test-cluster":
        if cfg.cluster == "known" and inst.centers is None:
            raise ParamError("known-centers testing needs centers")
        if cfg.cluster == "unknown" and inst.k is None:
            if inst.centers is None:
                raise ParamError("unknown-centers testing needs k")
            inst.k = len(inst.centers)
    return inst


def oracle_of(inst: Instance) -> dict:
    """Exact ground truth for the instance."""
    if inst.tree is not None:
        out = {"emd_exact": tree_emd_exact(inst.tree, inst.p, inst.q),
               "l1": float(np.abs(np.asarray(inst.p) - np.asarray(inst.q)).sum())}
        if inst.tree.n <= 200:
            out["emd_flow"] = emd_matrix(inst.tree.distance_matrix(), inst.p, inst.q)
        return out
    return {"emd_exact": emd_exact(inst.p, inst.q), "l1": l1_distance(inst.p, inst.q)}


def describe(inst: Instance) -> dict:
    out = {"d": inst.d, "span": inst.span}
    if inst.tree is not None:
        out["tree"] = inst.tree.to_json()
        out["p"] = [float(x) for x in inst.p]
        out["q"] = [float(x) for x in inst.q]
    else:
        out["support_p"] = len(inst.p)
        out["support_q"] = len(inst.q)
    if inst.centers is not None:
        out["centers"] = inst.centers.tolist()
    if inst.k is not None:
        out["k"] = inst.k
    return out


# ------------------------------------------------------------------- trials

def _test_config(cfg: ExperimentConfig, inst: Instance) -> EmdTestConfig:
    return EmdTestConfig(inst.d, inst.span, cfg.eps, cfg.strategy, cfg.c)


def budget_of(cfg: ExperimentConfig, inst: Instance) -> dict:
    """Closed-form draws per source for the configured algorithm."""
    if cfg.mode == "test":
        m = closeness_budget(_test_config(cfg, inst))
        return {"p": m, "q": m}
    if cfg.mode == "test-known":
        return {"p": known_closeness_budget(_test_config(cfg, inst)), "q": 0}
    if cfg.mode == "estimate":
        m = estimate_budget(_test_config(cfg, inst))
        return {"p": m, "q": m}
    if cfg.mode == "tree":
        m = tree_estimate_budget(inst.tree, cfg.eps, cfg.delta, cfg.c)
        return {"p": m, "q": m}
    if cfg.cluster == "known":
        m = clustered_known_budget(len(inst.centers), cfg.eps, inst.d, inst.span, cfg.c)
        return {"p": m, "q": m}
    reps, known = clustered_unknown_budget(inst.k, cfg.eps, inst.d, inst.span, cfg.c)
    # a rejection while picking representatives ends the run early
    return {"representatives": reps, "p": (reps + 1) // 2 + known, "q": reps // 2 + known}


def _sources(inst: Instance, seed: int):
    sp, sq = spawn_seeds(seed, 2)
    if inst.tree is not None:
        p, q = node_distribution(inst.tree, inst.p), node_distribution(inst.tree, inst.q)
    else:
        p, q = inst.p, inst.q
    return SampleSource(p, seed=sp), SampleSource(q, seed=sq)


def run_trial(cfg: ExperimentConfig, inst: Instance, t: int, oracle_emd: float) -> dict:
    seed = cfg.seed + t
    src_p, src_q = _sources(inst, seed)
    row = {"trial": t, "seed": seed}
    if cfg.mode in ("estimate", "tree"):
        if cfg.mode == "estimate":
            rep = emd_estimate(src_p, src_q, _test_config(cfg, inst))
        else:
            rep = tree_emd_estimate(src_p, src_q, inst.tree, cfg.eps, cfg.delta, cfg.c)
        err = abs(rep.estimate - oracle_emd)
        row.update(estimate=rep.estimate, abs_error=err, within_eps=bool(err <= cfg.eps),
                   samples_used=rep.samples_used)
        return row
    if cfg.mode == "test":
        v = emd_closeness_test(src_p, src_q, _test_config(cfg, inst))
    elif cfg.mode == "test-known":
        v = emd_closeness_test_known(inst.q, src_p, _test_config(cfg, inst))
    elif cfg.cluster == "known":
        v = emd_test_clustered_known(src_p, src_q, inst.centers, cfg.eps, inst.d, inst.span, cfg.c)
    else:
        v = emd_test_clustered_unknown(src_p, src_q, inst.k, cfg.eps, inst.d, inst.span, cfg.c)
    row.update(decision=v.decision.value, samples_used=v.samples_used)
    if "levels" in v.details:
        row["rejecting_levels"] = [lv["level"] for lv in v.details["levels"] if lv["decision"] == "reject"]
    if "stage" in v.details:
        row["stage"] = v.details["stage"]
    return row


def _trial_job(args):
    return run_trial(*args)


def aggregate(cfg: ExperimentConfig, rows: list) -> dict:
    n = len(rows)
    if cfg.mode in ("estimate", "tree"):
        est = np.array([r["estimate"] for r in rows])
        err = np.array([r["abs_error"] for r in rows])
        within = sum(r["within_eps"] for r in rows)
        return {"trials": n, "mean_estimate": float(est.mean()), "max_abs_error": float(err.max()),
                "within_eps": within, "within_eps_rate": within / n}
    rejects = sum(r["decision"] == "reject" for r in rows)
    return {"trials": n, "accepts": n - rejects, "rejects": rejects,
            "accept_rate": (n - rejects) / n, "reject_rate": rejects / n}


def _budget_ok(cfg, budget: dict, row: dict) -> bool:
    used = row["samples_used"]
    if cfg.mode == "test-cluster" and cfg.cluster == "unknown" and row.get("stage") == "representatives":
        r = budget["representatives"]
        return used == {"p": (r + 1) // 2, "q": r // 2}
    return used == {"p": budget["p"], "q": budget["q"]}


def run_experiment(cfg: ExperimentConfig) -> TrialReport:
    """Run ``cfg.trials`` seeded trials and assemble the report."""
    inst = load_instance(cfg)
    oracle = oracle_of(inst)
    budget = budget_of(cfg, inst)
    jobs = [(cfg, inst, t, oracle["emd_exact"]) for t in range(cfg.trials)]
    if cfg.workers > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(_trial_job, jobs))
    else:
        rows = [_trial_job(j) for j in jobs]
    agg = aggregate(cfg, rows)
    agg["budget_matches"] = all(_budget_ok(cfg, budget, r) for r in rows)
    return TrialReport(cfg.echo(), describe(inst), oracle, budget, rows, agg)


# ------------------------------------------------------------------ output

CSV_COLUMNS = ("trial", "seed", "decision", "estimate", "abs_error", "within_eps",
               "samples_p", "samples_q")


def report_csv(report: TrialReport) -> str:
    """One row per trial; the aggregate rates follow as a trailing summary row."""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in report.trials:
        w.writerow({**r, "samples_p": r["samples_used"]["p"], "samples_q": r["samples_used"]["q"]})
    agg = report.aggregate
    w.writerow({"trial": "all",
                "decision": agg.get("reject_rate", ""),
                "estimate": agg.get("mean_estimate", ""),
                "abs_error": agg.get("max_abs_error", ""),
                "within_eps": agg.get("within_eps_rate", "")})
    return buf.getvalue()


def rows_csv(rows: list, columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def instance_json(inst: Instance, oracle: dict) -> dict:
    """Self-contained instance file, readable back through ``inputs``."""
    if inst.tree is not None:
        out = {"tree": inst.tree.to_json(), "p": [float(x) for x in inst.p],
               "q": [float(x) for x in inst.q]}
    else:
        out = {"p": inst.p.to_json(), "q": inst.q.to_json()}
    if inst.centers is not None:
        out["centers"] = inst.centers.tolist()
    out["oracle"] = oracle
    return out


def calibration_table(cfg: ExperimentConfig, multipliers=(1.0, 4.0, 16.0)) -> list:
    """Success rates and budgets of the same experiment across constant multipliers."""
    rows = []
    for c in multipliers:
        rep = run_experiment(ExperimentConfig(**{**asdict(cfg), "c": c}))
        agg = rep.aggregate
        rows.append({"c": c, "trials": agg["trials"],
                     "accept_rate": agg.get("accept_rate", ""),
                     "reject_rate": agg.get("reject_rate", ""),
                     "within_eps_rate": agg.get("within_eps_rate", ""),
                     "budget_p": rep.budget["p"], "budget_q": rep.budget["q"],
                     "emd_exact": rep.oracle["emd_exact"]})
    return rows

