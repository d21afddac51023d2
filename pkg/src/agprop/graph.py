"""Undirected dynamic graph with per-vertex power-of-two bucket lists.

Each vertex u keeps its neighbors grouped in buckets by the *reference*
degree of the neighbor: neighbor v sits in bucket j of B[u] with
2^j <= ref_degree(v) < 2^(j+1). Reference degrees are refreshed lazily:
whenever a vertex's true degree leaves [ref/2, 2*ref], the vertex is
repositioned in all of its neighbors' bucket lists and the reference degree
snaps to the true degree. This keeps every edge update O(1) amortized while
bounding the staleness of any bucket key to a factor of two.
"""

from dataclasses import dataclass, field


class EdgeExistsError(ValueError):
    """Insertion of an edge that is already present."""


class EdgeAbsentError(ValueError):
    """Deletion of an edge that is not present."""


def bucket_key(ref_degree):
    """Bucket exponent j with 2^j <= ref_degree < 2^(j+1) (0 for ref 0)."""
    return ref_degree.bit_length() - 1 if ref_degree > 0 else 0


class BucketList:
    """Non-empty power-of-two buckets of one neighborhood.

    Fixed-size indexed table of buckets (dynamic arrays) plus a locator map
    neighbor -> (bucket, slot) giving O(1) removal by swap-with-last.
    """

    __slots__ = ("slots", "locator")

    def __init__(self, nbuckets):
        self.slots = [None] * nbuckets
        self.locator = {}

    def __len__(self):
        return len(self.locator)

    def insert(self, v, j):
        b = self.slots[j]
        if b is None:
            b = self.slots[j] = []
        self.locator[v] = (j, len(b))
        b.append(v)

    def remove(self, v):
        j, i = self.locator.pop(v)
        b = self.slots[j]
        last = b.pop()
        if i < len(b):
            b[i] = last
            self.locator[last] = (j, i)
        if not b:
            self.slots[j] = None
        return j

    def move(self, v, j_new):
        j_old, _ = self.locator[v]
        if j_old != j_new:
            self.remove(v)
            self.insert(v, j_new)

    def segments(self):
        """Yield (j, members) for non-empty buckets in increasing j."""
        for j, b in enumerate(self.slots):
            if b:
                yield j, b

    def copy(self):
        out = BucketList.__new__(BucketList)
        out.slots = [list(b) if b else None for b in self.slots]
        out.locator = dict(self.locator)
        return out


@dataclass
class UpdateReport:
    """Outcome of one edge update."""
    rebuilds: int
    entries_moved: int
    deg_u: int
    deg_v: int


class DynGraph:
    """Undirected simple graph over a fixed vertex set [0, n).

    Single-writer: updates require exclusive access. Any number of readers
    may run queries between updates; no reader may overlap a writer.
    """

    __slots__ = ("n", "adj", "deg", "refdeg", "buckets", "epoch",
                 "rebuild_work_counter", "stale_count", "dropped_duplicates",
                 "dropped_self_loops", "_cache")

    def __init__(self, n):
        if n < 1:
            raise ValueError("vertex count must be positive")
        self.n = n
        self.adj = [set() for _ in range(n)]
        self.deg = [0] * n
        self.refdeg = [0] * n
        nb = bucket_key(max(n - 1, 1)) + 2
        self.buckets = [BucketList(nb) for _ in range(n)]
        self.epoch = 0
        self.rebuild_work_counter = 0
        self.stale_count = 0
        self.dropped_duplicates = 0
        self.dropped_self_loops = 0
        self._cache = {}

    # -- construction ------------------------------------------------------

    @classmethod
    def build(cls, edges, n):
        """Build from an edge list; duplicates/self-loops dropped, counted."""
        g = cls(n)
        seen = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise IndexError(f"edge ({u}, {v}) outside vertex range [0, {n})")
            if u == v:
                g.dropped_self_loops += 1
                continue
            key = (u, v) if u < v else (v, u)
            if key in seen:
                g.dropped_duplicates += 1
                continue
            seen.add(key)
            g.adj[u].add(v)
            g.adj[v].add(u)
        for u in range(n):
            d = len(g.adj[u])
            g.deg[u] = d
            g.refdeg[u] = d
        for u in range(n):
            bl = g.buckets[u]
            refdeg = g.refdeg
            for v in g.adj[u]:
                bl.insert(v, bucket_key(refdeg[v]))
        return g

    def copy(self):
        """Deep copy preserving reference degrees and bucket contents."""
        g = DynGraph.__new__(DynGraph)
        g.n = self.n
        g.adj = [set(s) for s in self.adj]
        g.deg = list(self.deg)
        g.refdeg = list(self.refdeg)
        g.buckets = [b.copy() for b in self.buckets]
        g.epoch = self.epoch
        g.rebuild_work_counter = self.rebuild_work_counter
        g.stale_count = self.stale_count
        g.dropped_duplicates = self.dropped_duplicates
        g.dropped_self_loops = self.dropped_self_loops
        g._cache = {}
        return g

    # -- basic queries -----------------------------------------------------

    def degree(self, u):
        return self.deg[u]

    def ref_degree(self, u):
        return self.refdeg[u]

    def has_edge(self, u, v):
        return v in self.adj[u]

    def neighbors(self, u):
        return self.adj[u]

    def edge_count(self):
        return sum(self.deg) // 2

    # -- updates -----------------------------------------------------------

    def insert_edge(self, u, v):
        if u == v:
            raise EdgeExistsError(f"self-loop ({u}, {u}) rejected")
        if not (0 <= u < self.n and 0 <= v < self.n):
            raise IndexError(f"edge ({u}, {v}) outside vertex range")
        if v in self.adj[u]:
            raise EdgeExistsError(f"edge ({u}, {v}) already present")
        self.adj[u].add(v)
        self.adj[v].add(u)
        # place under the current reference keys; a rebuild below re-keys
        self.buckets[v].insert(u, bucket_key(self.refdeg[u]))
        self.buckets[u].insert(v, bucket_key(self.refdeg[v]))
        self._set_degree(u, self.deg[u] + 1)
        self._set_degree(v, self.deg[v] + 1)
        return self._finish_update(u, v)

    def delete_edge(self, u, v):
        if u == v or not (0 <= u < self.n and 0 <= v < self.n):
            raise EdgeAbsentError(f"edge ({u}, {v}) invalid")
        if v not in self.adj[u]:
            raise EdgeAbsentError(f"edge ({u}, {v}) not present")
        self.adj[u].discard(v)
        self.adj[v].discard(u)
        self.buckets[v].remove(u)
        self.buckets[u].remove(v)
        self._set_degree(u, self.deg[u] - 1)
        self._set_degree(v, self.deg[v] - 1)
        return self._finish_update(u, v)

    def refresh_reference_degrees(self):
        """Snap every reference degree to the true degree and re-key all
        bucket lists. O(n + m); not charged to rebuild_work_counter.
        """
        moved = 0
        for u in range(self.n):
            self.refdeg[u] = self.deg[u]
        for u in range(self.n):
            bl = self.buckets[u]
            for v in list(bl.locator):
                bl.move(v, bucket_key(self.refdeg[v]))
                moved += 1
        self.stale_count = 0
        self.epoch += 1
        self._cache.clear()
        return moved

    # -- internals ---------------------------------------------------------

    def _set_degree(self, x, d):
        was_stale = self.deg[x] != self.refdeg[x]
        self.deg[x] = d
        self.stale_count += (d != self.refdeg[x]) - was_stale

    def _maybe_rebuild(self, x):
        d = self.deg[x]
        rd = self.refdeg[x]
        if 2 * d < rd or d > 2 * rd:
            j = bucket_key(d)
            moved = 0
            for w in self.adj[x]:
                self.buckets[w].move(x, j)
                moved += 1
            self.rebuild_work_counter += moved
            self.refdeg[x] = d
            self.stale_count -= 1  # x was stale by the fire condition
            return 1, moved
        return 0, 0

    def _finish_update(self, u, v):
        ru, mu = self._maybe_rebuild(u)
        rv, mv = self._maybe_rebuild(v)
        self.epoch += 1
        self._cache.clear()
        return UpdateReport(rebuilds=ru + rv, entries_moved=mu + mv,
                            deg_u=self.deg[u], deg_v=self.deg[v])


@dataclass
class VerifyReport:
    ok: bool
    violations: list = field(default_factory=list)


def verify_structure(g, max_violations=20):
    """Rebuild-from-scratch oracle: diff the live structure against what a
    fresh build under the current reference degrees would contain, and check
    every structural invariant. Pure read.
    """
    vio = []

    def fail(msg):
        if len(vio) < max_violations:
            vio.append(msg)

    deg, refdeg, adj = g.deg, g.refdeg, g.adj
    for u in range(g.n):
        if deg[u] != len(adj[u]):
            fail(f"degree({u})={deg[u]} but |adj|={len(adj[u])}")
        if u in adj[u]:
            fail(f"self-loop at {u}")
        if 2 * deg[u] < refdeg[u] or deg[u] > 2 * refdeg[u]:
            fail(f"staleness bound violated at {u}: d={deg[u]} ref={refdeg[u]}")
        bl = g.buckets[u]
        if len(bl) != deg[u]:
            fail(f"bucket total at {u} is {len(bl)}, degree {deg[u]}")
        total = 0
        for j, b in bl.segments():
            for i, v in enumerate(b):
                total += 1
                if v not in adj[u]:
                    fail(f"bucket entry {v} in B[{u}] not adjacent")
                elif bucket_key(refdeg[v]) != j:
                    fail(f"B[{u}]: {v} in bucket {j}, ref degree {refdeg[v]}")
                loc = bl.locator.get(v)
                if loc != (j, i):
                    fail(f"B[{u}]: locator for {v} is {loc}, actual ({j}, {i})")
        if total != len(bl.locator):
            fail(f"B[{u}]: {total} stored entries vs {len(bl.locator)} locators")
        for v in adj[u]:
            if u not in adj[v]:
                fail(f"asymmetric edge ({u}, {v})")
            if v not in bl.locator:
                fail(f"neighbor {v} of {u} missing from B[{u}]")
    return VerifyReport(ok=not vio, violations=vio)
