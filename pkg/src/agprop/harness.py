"""Benchmark harness: dataset ingestion, update-stream generation, error
measurement, and the grid runner behind the CLI.
"""

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import graphs as synth
from .engine import (QuerySpec, exact_converged, query_dynamic,
                     query_static_baseline, query_staticpp)
from .graph import DynGraph
from .sampling import RngStream
from .vectors import CompactVector
from .weights import WeightOracle

ALGORITHMS = ("static", "staticpp", "dynamic")
PATTERNS = ("rr", "dr", "dd")
REPORT_FIELDS = ("algo", "app", "dataset", "seed", "n", "m", "L", "epsilon",
                 "are", "time_ms", "edges_propagated", "variates_drawn",
                 "rebuild_work")


# -- ingestion ---------------------------------------------------------------

def load_edge_list(path):
    """Parse a whitespace-separated edge list ('u v' per line, '#' comments).

    1-based files (SNAP convention: detected by min id > 0) are shifted down
    so ids start at 0. Duplicates and self-loops are counted and dropped.
    Returns (edges, n, stats).
    """
    raw = []
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) < 2:
                raise ValueError(f"{path}:{ln}: expected 'u v', got {s!r}")
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ValueError(f"{path}:{ln}: non-integer vertex id in {s!r}")
            if u < 0 or v < 0:
                raise ValueError(f"{path}:{ln}: negative vertex id in {s!r}")
            raw.append((u, v))
    if not raw:
        raise ValueError(f"{path}: no edges")
    lo = min(min(u, v) for u, v in raw)
    shift = lo if lo > 0 else 0
    seen = set()
    edges = []
    dup = loops = 0
    for u, v in raw:
        u -= shift
        v -= shift
        if u == v:
            loops += 1
            continue
        key = (u, v) if u < v else (v, u)
        if key in seen:
            dup += 1
            continue
        seen.add(key)
        edges.append(key)
    n = max(max(u, v) for u, v in edges) + 1
    return edges, n, {"duplicates": dup, "self_loops": loops, "shift": shift}


def load_update_stream(path):
    """Parse update lines 'I u v' / 'D u v' ('#' comments allowed)."""
    ops = []
    with open(path) as fh:
        for ln, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 3 or parts[0] not in ("I", "D"):
                raise ValueError(f"{path}:{ln}: expected 'I u v' or 'D u v'")
            ops.append((parts[0], int(parts[1]), int(parts[2])))
    return ops


def write_update_stream(ops, path):
    with open(path, "w") as fh:
        for op, u, v in ops:
            fh.write(f"{op} {u} {v}\n")


def load_dataset(spec, seed=0):
    """A file path, or a synthetic spec 'synth:kind:n[:param]'."""
    if spec.startswith("synth:"):
        parts = spec.split(":")
        kind = parts[1]
        n = int(parts[2])
        if kind == "path":
            return synth.path_graph(n)
        if kind == "star":
            return synth.star_graph(n)
        if kind == "complete":
            return synth.complete_graph(n)
        if kind == "gnp":
            return synth.gnp_graph(n, float(parts[3]), seed)
        if kind == "gnm":
            return synth.random_edges_graph(n, int(parts[3]), seed)
        if kind == "powerlaw":
            return synth.powerlaw_graph(n, int(parts[3]), seed)
        raise ValueError(f"unknown synthetic kind {kind!r}")
    edges, n, _ = load_edge_list(spec)
    return edges, n


# -- update streams -----------------------------------------------------------

@dataclass
class UpdateStreamConfig:
    pattern: str = "dr"
    eta: float = 10.0
    count: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ValueError(f"pattern must be one of {PATTERNS}")
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if self.count < 0:
            raise ValueError("count must be non-negative")


@dataclass
class UpdateStream:
    ops: list
    ended_early: bool = False
    inserts: int = 0
    deletes: int = 0
    dd_fallbacks: int = 0


_REJECT_CAP = 1000


class _StreamState:
    """Lightweight evolving graph mirror used only while generating."""

    __slots__ = ("n", "adj", "edges", "eindex")

    def __init__(self, g):
        self.n = g.n
        self.adj = [set(s) for s in g.adj]
        self.edges = []
        self.eindex = {}
        for u in range(g.n):
            for v in g.adj[u]:
                if u < v:
                    self.eindex[(u, v)] = len(self.edges)
                    self.edges.append((u, v))

    def insert(self, u, v):
        key = (u, v) if u < v else (v, u)
        self.adj[u].add(v)
        self.adj[v].add(u)
        self.eindex[key] = len(self.edges)
        self.edges.append(key)

    def delete_at(self, idx):
        key = self.edges[idx]
        last = self.edges.pop()
        if idx < len(self.edges):
            self.edges[idx] = last
            self.eindex[last] = idx
        del self.eindex[key]
        u, v = key
        self.adj[u].discard(v)
        self.adj[v].discard(u)
        return key

    def degree_endpoint(self, rng):
        """Vertex drawn with probability d_u / 2m."""
        e = self.edges[rng.randint(len(self.edges))]
        return e[rng.randint(2)]


def gen_updates(g, cfg, rng=None):
    """Generate cfg.count updates against the evolving state of g (g itself
    is not modified). Insertions pick endpoints per cfg.pattern; deletions
    remove a uniformly random existing edge. Each op is an insertion with
    probability eta/(1+eta). Runs out of deletable edges -> ends early.
    """
    if rng is None:
        rng = RngStream(cfg.seed)
    st = _StreamState(g)
    stream = UpdateStream(ops=[])
    # eta = inf gives a pure-insertion stream; eta = 0 pure deletions
    p_ins = 1.0 if math.isinf(cfg.eta) else cfg.eta / (1.0 + cfg.eta)
    for _ in range(cfg.count):
        if rng.uniform() < p_ins:
            pair = _pick_insertion(st, cfg.pattern, rng, stream)
            if pair is None:
                stream.ended_early = True
                break
            st.insert(*pair)
            stream.ops.append(("I", pair[0], pair[1]))
            stream.inserts += 1
        else:
            if not st.edges:
                stream.ended_early = True
                break
            u, v = st.delete_at(rng.randint(len(st.edges)))
            stream.ops.append(("D", u, v))
            stream.deletes += 1
    return stream


def _pick_insertion(st, pattern, rng, stream):
    n = st.n
    if pattern == "dd" and st.edges:
        # both endpoints degree-proportional; fall back to dr on a stall
        for _ in range(_REJECT_CAP):
            u = st.degree_endpoint(rng)
            v = st.degree_endpoint(rng)
            if u != v and v not in st.adj[u]:
                return u, v
        stream.dd_fallbacks += 1
        pattern = "dr"
    for _ in range(_REJECT_CAP):
        if pattern == "rr" or not st.edges:
            u = rng.randint(n)
        else:  # dr: endpoint of a uniform edge, i.e. prob d_u / 2m
            u = st.degree_endpoint(rng)
        v = rng.randint(n)
        if u != v and v not in st.adj[u]:
            return u, v
    return None


def apply_updates(g, ops):
    """Replay an update stream onto a graph; returns aggregate work stats."""
    rebuilds = 0
    moved = 0
    eager_work = 0
    t0 = time.perf_counter()
    for op, u, v in ops:
        if op == "I":
            rep = g.insert_edge(u, v)
        else:
            rep = g.delete_edge(u, v)
        rebuilds += rep.rebuilds
        moved += rep.entries_moved
        # what an eager scheme pays: reposition both endpoints in all of
        # their neighbors' structures on every update
        eager_work += rep.deg_u + rep.deg_v
    wall = time.perf_counter() - t0
    return {"rebuilds": rebuilds, "entries_moved": moved,
            "eager_work": eager_work, "wall_time": wall, "count": len(ops)}


# -- metrics ------------------------------------------------------------------

def measure_error(pi_hat, truth, delta):
    """Mean relative error over vertices whose ground truth is >= delta.

    pi_hat may be a sparse dict or a dense array. Returns None when no
    vertex qualifies (undefined, distinct from 0).
    """
    truth = np.asarray(truth, dtype=np.float64)
    if isinstance(pi_hat, dict):
        dense = np.zeros_like(truth)
        for v, val in pi_hat.items():
            dense[v] = val
        pi_hat = dense
    else:
        pi_hat = np.asarray(pi_hat, dtype=np.float64)
    mask = truth >= delta
    if not np.any(mask):
        return None
    return float(np.mean(np.abs(truth[mask] - pi_hat[mask]) / truth[mask]))


# -- applications -------------------------------------------------------------

def make_application(app, n, seed, alpha=0.2, t=4.0, hop=2):
    """(a, b, oracle, x) for a named proximity model. One-hot sources and
    graph signals are drawn from the per-seed stream."""
    rng = RngStream(seed ^ 0x5EED)

    def one_hot():
        x = np.zeros(n)
        x[rng.randint(n)] = 1.0
        return x

    def signal():
        vals = np.array([rng.uniform() for _ in range(n)])
        s = vals.sum()
        if s <= 0:
            vals[:] = 1.0
            s = float(n)
        return vals / s

    if app == "pagerank":
        return 0.0, 1.0, WeightOracle.geometric(alpha), CompactVector.uniform(n)
    if app == "ppr":
        return 0.0, 1.0, WeightOracle.geometric(alpha), one_hot()
    if app == "stppr":
        return 1.0, 0.0, WeightOracle.geometric(alpha), one_hot()
    if app == "heat":
        return 0.0, 1.0, WeightOracle.poisson(t), one_hot()
    if app == "lhop":
        return 0.0, 1.0, WeightOracle.lhop(hop), one_hot()
    if app == "sgc":
        return 0.5, 0.5, WeightOracle.lhop(hop), signal()
    if app == "appnp":
        return 0.5, 0.5, WeightOracle.geometric(alpha), signal()
    if app == "gdc":
        return 0.5, 0.5, WeightOracle.poisson(t), signal()
    raise ValueError(f"unknown application {app!r}")


APPLICATIONS = ("pagerank", "ppr", "stppr", "heat", "lhop", "sgc", "appnp",
                "gdc")


# -- benchmark runner ---------------------------------------------------------

@dataclass
class BenchConfig:
    dataset: str = "synth:powerlaw:10000:4"
    algos: tuple = ALGORITHMS
    apps: tuple = ("pagerank",)
    delta: float = 0.0  # 0 -> 1/n
    c: float = 0.1
    eta: float = 10.0
    pattern: str = "dr"
    updates: int = 0
    seeds: tuple = (1,)
    out: str = ""
    alpha: float = 0.2
    t: float = 4.0
    hop: int = 2
    updates_file: str = ""

    @classmethod
    def from_file(cls, path):
        """Flat 'key = value' text config; '#' comments allowed."""
        kv = {}
        with open(path) as fh:
            for ln, line in enumerate(fh, start=1):
                s = line.strip()
                if not s or s.startswith("#"):
                    continue
                if "=" not in s:
                    raise ValueError(f"{path}:{ln}: expected 'key = value'")
                k, _, v = s.partition("=")
                kv[k.strip()] = v.strip()
        return cls().merged(kv)

    def merged(self, kv):
        out = BenchConfig(**{f: getattr(self, f) for f in
                             self.__dataclass_fields__})
        for k, v in kv.items():
            if v is None:
                continue
            if k in ("algos", "apps"):
                setattr(out, k, tuple(x.strip() for x in str(v).split(",")))
            elif k == "seeds":
                setattr(out, k, tuple(int(x) for x in str(v).split(",")))
            elif k in ("delta", "c", "eta", "alpha", "t"):
                setattr(out, k, float(v))
            elif k in ("updates", "hop"):
                setattr(out, k, int(v))
            elif k in ("dataset", "pattern", "out", "updates_file"):
                setattr(out, k, str(v))
            else:
                raise ValueError(f"unknown config key {k!r}")
        return out


@dataclass
class BenchmarkReport:
    rows: list = field(default_factory=list)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=REPORT_FIELDS)
            w.writeheader()
            for row in self.rows:
                w.writerow({k: row[k] for k in REPORT_FIELDS})

    def format_table(self):
        lines = [",".join(REPORT_FIELDS)]
        for row in self.rows:
            lines.append(",".join(str(row[k]) for k in REPORT_FIELDS))
        return "\n".join(lines)


_QUERY_FNS = {"static": query_static_baseline, "staticpp": query_staticpp,
              "dynamic": query_dynamic}


def run_benchmark(cfg):
    """Execute the configured grid {algo x app x seed} on one dataset.

    With updates > 0 (or an updates file), every seed first replays a
    generated stream on a fresh copy of the graph; dynamic queries run on
    the resulting (stale-keyed) structure, while static/staticpp queries run
    after a full reference refresh, which stands in for the eager index
    maintenance those schemes would have paid during the stream. The
    rebuild_work column reports each scheme's own maintenance bill for the
    stream: lazy repositioning work for dynamic, the eager per-update
    repositioning total (sum of endpoint degrees) for the static schemes.
    """
    for algo in cfg.algos:
        if algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {algo!r}")
    for app in cfg.apps:
        if app not in APPLICATIONS:
            raise ValueError(f"unknown application {app!r}")
    edges, n = load_dataset(cfg.dataset, seed=min(cfg.seeds, default=0))
    base = DynGraph.build(edges, n)
    delta = cfg.delta if cfg.delta > 0 else 1.0 / n
    report = BenchmarkReport()
    for seed in cfg.seeds:
        g_dyn, update_stats = _updated_copy(base, cfg, seed)
        g_fresh = None
        truth_cache = {}
        for algo in cfg.algos:
            if algo == "dynamic":
                g = g_dyn
            else:
                if g_fresh is None:
                    g_fresh = g_dyn.copy()
                    g_fresh.refresh_reference_degrees()
                g = g_fresh
            for app in cfg.apps:
                a, b, oracle, x = make_application(
                    app, n, seed, alpha=cfg.alpha, t=cfg.t, hop=cfg.hop)
                q = QuerySpec(a, b, oracle, x, delta, cfg.c)
                if app not in truth_cache:
                    truth_cache[app] = exact_converged(g_dyn, q)
                res = _QUERY_FNS[algo](g, q, RngStream(seed))
                are = measure_error(res.pi_hat, truth_cache[app], delta)
                maintenance = (update_stats["entries_moved"]
                               if algo == "dynamic"
                               else update_stats["eager_work"])
                report.rows.append({
                    "algo": algo, "app": app, "dataset": cfg.dataset,
                    "seed": seed, "n": n, "m": g.edge_count(),
                    "L": res.L_used, "epsilon": res.epsilon_used,
                    "are": float("nan") if are is None else are,
                    "time_ms": res.wall_time * 1e3,
                    "edges_propagated": res.counters.edges_propagated,
                    "variates_drawn": res.counters.variates_drawn,
                    "rebuild_work": maintenance,
                })
    if cfg.out:
        report.to_csv(cfg.out)
    return report


def _updated_copy(base, cfg, seed):
    g = base.copy()
    before = g.rebuild_work_counter
    if cfg.updates_file:
        ops = load_update_stream(cfg.updates_file)
        stats = apply_updates(g, ops)
    elif cfg.updates > 0:
        stream = gen_updates(g, UpdateStreamConfig(
            pattern=cfg.pattern, eta=cfg.eta, count=cfg.updates, seed=seed))
        stats = apply_updates(g, stream.ops)
    else:
        stats = {"rebuilds": 0, "entries_moved": 0, "eager_work": 0,
                 "wall_time": 0.0, "count": 0}
    stats["entries_moved"] = g.rebuild_work_counter - before
    return g, stats
