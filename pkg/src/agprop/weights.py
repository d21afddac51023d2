"""Level-weight oracles: per-level weights, tail sums, and tail cut indices.

A weight oracle answers three things about a non-negative weight sequence
w_0, w_1, ... that sums to one: the weight at a level, the tail mass
Y_i = sum_{k>=i} w_k, and the smallest level whose tail mass drops below a
threshold. Built-in models: geometric, Poisson, single-hop, and arbitrary
finite sequences (normalized on construction).
"""

import math

import numpy as np

_TAIL_REL_TRUNC = 1e-18  # backward-summation truncation for cached tails


class WeightOracle:
    """Immutable after construction; safe for concurrent readers.

    Use the classmethods (:meth:`geometric`, :meth:`poisson`, :meth:`lhop`,
    :meth:`custom`, :meth:`from_file`) rather than ``__init__``.
    """

    __slots__ = ("kind", "alpha", "t", "hops", "_weights", "_tails")

    def __init__(self, kind, alpha=None, t=None, hops=None, weights=None,
                 tails=None):
        self.kind = kind
        self.alpha = alpha
        self.t = t
        self.hops = hops
        self._weights = weights
        self._tails = tails

    # -- constructors ------------------------------------------------------

    @classmethod
    def geometric(cls, alpha):
        """w_i = alpha * (1 - alpha)^i; closed-form tails (1 - alpha)^i."""
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {alpha}")
        return cls("geometric", alpha=alpha)

    @classmethod
    def poisson(cls, t):
        """w_i = e^-t t^i / i!; tails cached by backward summation."""
        if not t > 0.0:
            raise ValueError(f"t must be positive, got {t}")
        if t > 700.0:
            raise ValueError("t too large for float64 tail computation")
        # weights in log space; extend until the tail is numerically dead
        cap = int(t + 60.0 * math.sqrt(t) + 60.0)
        ks = np.arange(cap + 1, dtype=np.float64)
        logw = -t + ks * math.log(t) - np.array(
            [math.lgamma(k + 1.0) for k in range(cap + 1)])
        w = np.exp(logw)
        return cls("poisson", t=t, weights=w, tails=_suffix_sums(w))

    @classmethod
    def lhop(cls, hops):
        """All weight at one level: w_i = 1 iff i == hops."""
        if hops < 0 or hops != int(hops):
            raise ValueError(f"hops must be a non-negative integer, got {hops}")
        return cls("lhop", hops=int(hops))

    @classmethod
    def custom(cls, weights):
        """Finite non-negative sequence, normalized to sum 1."""
        w = np.asarray(weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if np.any(w < 0.0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and non-negative")
        total = float(w.sum())
        if total <= 0.0:
            raise ValueError("weights must have positive sum")
        w = w / total
        # w_i <= lambda^i for i >= L_0 holds with lambda = 1, L_0 = 0 after
        # normalization (no single term can exceed the total).
        assert float(w.max()) <= 1.0 + 1e-15
        return cls("custom", weights=w, tails=_suffix_sums(w))

    @classmethod
    def from_file(cls, path):
        """Custom model from a text file, one non-negative real per line."""
        values = []
        with open(path) as fh:
            for ln, line in enumerate(fh, start=1):
                s = line.strip()
                if not s or s.startswith("#"):
                    continue
                try:
                    v = float(s)
                except ValueError:
                    raise ValueError(f"{path}:{ln}: not a number: {s!r}")
                if v < 0.0:
                    raise ValueError(f"{path}:{ln}: negative weight {v}")
                values.append(v)
        return cls.custom(values)

    # -- queries -----------------------------------------------------------

    def weight(self, i):
        """w_i. Total over all non-negative integers i."""
        if i < 0:
            raise ValueError("level must be non-negative")
        if self.kind == "geometric":
            return self.alpha * (1.0 - self.alpha) ** i
        if self.kind == "lhop":
            return 1.0 if i == self.hops else 0.0
        if i >= self._weights.shape[0]:
            return 0.0
        return float(self._weights[i])

    def tail_sum(self, i):
        """Y_i = sum_{k>=i} w_k, in [0, 1]."""
        if i < 0:
            raise ValueError("level must be non-negative")
        if self.kind == "geometric":
            return (1.0 - self.alpha) ** i
        if self.kind == "lhop":
            return 1.0 if i <= self.hops else 0.0
        if i >= self._tails.shape[0]:
            return 0.0
        return float(self._tails[i])

    def tail_ratio(self, i):
        """Y_{i+1} / Y_i; 0 once the tail is exhausted (Y_i = 0)."""
        if self.kind == "geometric":
            return 1.0 - self.alpha
        yi = self.tail_sum(i)
        if yi <= 0.0:
            return 0.0
        return self.tail_sum(i + 1) / yi

    def cut_index(self, delta):
        """Least k with tail_sum(k) <= delta."""
        if delta <= 0.0:
            raise ValueError(f"delta must be positive, got {delta}")
        if delta >= 1.0:
            return 0
        if self.kind == "geometric":
            q = 1.0 - self.alpha
            if q == 0.0:
                return 1
            k = max(0, math.ceil(math.log(delta) / math.log(q)))
            while self.tail_sum(k) > delta:
                k += 1
            while k > 0 and self.tail_sum(k - 1) <= delta:
                k -= 1
            return k
        if self.kind == "lhop":
            return self.hops + 1
        # cached tails are non-increasing: binary search
        tails = self._tails
        idx = int(np.searchsorted(-tails, -delta, side="left"))
        return idx

    def level_tables(self, levels):
        """(ratios, reserve factors) for a propagation of `levels` rounds.

        ratios[i] = Y_{i+1}/Y_i for i < levels; wy[i] = w_i/Y_i for
        i <= levels, with 0 where Y_i = 0 (dead tail contributes nothing).
        """
        ratios = np.empty(levels, dtype=np.float64)
        wy = np.empty(levels + 1, dtype=np.float64)
        for i in range(levels):
            ratios[i] = self.tail_ratio(i)
        for i in range(levels + 1):
            yi = self.tail_sum(i)
            wy[i] = self.weight(i) / yi if yi > 0.0 else 0.0
        return ratios, wy

    def __repr__(self):
        if self.kind == "geometric":
            return f"WeightOracle.geometric({self.alpha})"
        if self.kind == "poisson":
            return f"WeightOracle.poisson({self.t})"
        if self.kind == "lhop":
            return f"WeightOracle.lhop({self.hops})"
        return f"WeightOracle.custom(<{self._weights.shape[0]} weights>)"


def _suffix_sums(w):
    """Backward-summed tails; entry i is sum_{k>=i} w_k, last entry ~0."""
    tails = np.cumsum(w[::-1])[::-1].copy()
    # normalize drift: Y_0 must be exactly the full mass
    total = tails[0]
    if total > 0.0:
        tails /= total
    tails[tails < _TAIL_REL_TRUNC * tails[0]] = 0.0
    return tails
