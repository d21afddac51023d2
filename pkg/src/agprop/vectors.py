"""Residue initialization: dense deterministic copies and sub-linear
randomized initialization over compact group representations.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K


@dataclass
class ResidueMap:
    """Sparse vertex -> positive mass map at one propagation level."""
    values: dict = field(default_factory=dict)
    level: int = 0
    variates_drawn: int = 0
    assignments: int = 0

    @property
    def work(self):
        return self.variates_drawn + self.assignments


class CompactVector:
    """A length-n vector as contiguous constant-valued index groups.

    Groups must be disjoint, sorted, and cover [0, n) exactly; entries are
    non-negative and total mass is 1.
    """

    __slots__ = ("n", "lo", "hi", "val")

    def __init__(self, groups, n):
        lo = np.asarray([g[0] for g in groups], dtype=np.int64)
        hi = np.asarray([g[1] for g in groups], dtype=np.int64)
        val = np.asarray([g[2] for g in groups], dtype=np.float64)
        if lo.size == 0:
            raise ValueError("at least one group required")
        if np.any(val < 0.0) or not np.all(np.isfinite(val)):
            raise ValueError("group values must be finite and non-negative")
        if np.any(hi <= lo):
            raise ValueError("groups must be non-empty ranges [lo, hi)")
        if lo[0] != 0 or hi[-1] != n or np.any(lo[1:] != hi[:-1]):
            raise ValueError("groups must be sorted, disjoint, and cover "
                             f"[0, {n}) exactly")
        total = float(np.dot((hi - lo).astype(np.float64), val))
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"group masses must sum to 1, got {total}")
        self.n = n
        self.lo = lo
        self.hi = hi
        self.val = val

    def __len__(self):
        return self.n

    @property
    def group_count(self):
        return self.lo.shape[0]

    def to_dense(self):
        x = np.zeros(self.n, dtype=np.float64)
        for k in range(self.group_count):
            x[self.lo[k]:self.hi[k]] = self.val[k]
        return x

    @classmethod
    def uniform(cls, n):
        """The all-1/n vector as a single group."""
        return cls([(0, n, 1.0 / n)], n)

    @classmethod
    def from_file(cls, path, n=None):
        """Load groups from text lines "lo hi value"."""
        groups = []
        with open(path) as fh:
            for ln, line in enumerate(fh, start=1):
                s = line.strip()
                if not s or s.startswith("#"):
                    continue
                parts = s.split()
                if len(parts) != 3:
                    raise ValueError(f"{path}:{ln}: expected 'lo hi value'")
                groups.append((int(parts[0]), int(parts[1]), float(parts[2])))
        if n is None:
            n = max(hi for _, hi, _ in groups)
        return cls(groups, n)


def init_dense(x, epsilon):
    """Deterministic sparse copy of the nonzero entries of x."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0):
        raise ValueError("input vector entries must be non-negative")
    nz = np.nonzero(x)[0]
    rm = ResidueMap({int(v): float(x[v]) for v in nz})
    rm.assignments = int(nz.shape[0])
    return rm


def init_randomized(x, epsilon, rng):
    """Randomized residue initialization of a compact vector.

    Groups with value >= epsilon are assigned exactly; the rest are
    subset-sampled with probability value/epsilon, selected indices getting
    mass epsilon. Entrywise unbiased; expected work O(1/epsilon + #groups).
    """
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not isinstance(x, CompactVector):
        raise TypeError("init_randomized expects a CompactVector")
    forced_cut = compact_budget_cut(x, epsilon)
    out_idx = np.empty(x.n, dtype=np.int64)
    out_val = np.empty(x.n, dtype=np.float64)
    count, variates, assignments = K.init_randomized_into(
        x.lo, x.hi, x.val, epsilon, forced_cut, rng.state, out_idx, out_val)
    rm = ResidueMap({int(out_idx[k]): float(out_val[k])
                     for k in range(count)})
    rm.variates_drawn = int(variates)
    rm.assignments = int(assignments)
    return rm


def compact_budget_cut(x, epsilon):
    """Group-count budget ceil(1/epsilon); groups past it fall back to exact
    dense assignment (with a warning), since the sub-linear work bound no
    longer applies to them.
    """
    budget = math.ceil(1.0 / epsilon)
    if x.group_count > budget:
        warnings.warn(
            f"compact vector has {x.group_count} groups, over the 1/epsilon "
            f"budget of {budget}; excess groups are initialized exactly",
            stacklevel=3)
        return budget
    return np.iinfo(np.int64).max
