"""Randomness kernel surface: seeded streams, bounded geometric variates,
and the per-bucket subset samplers used by the propagation engines.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K


class StalenessError(RuntimeError):
    """Raised when a sampler or query that assumes fresh bucket keys runs on
    a graph whose reference degrees have drifted; use the dynamic mode."""


class RngStream:
    """Counter-based deterministic generator (splitmix64).

    Identical seed plus identical call sequence reproduces identical outputs;
    independent streams should use different seeds or :meth:`spawn`.
    """

    __slots__ = ("seed", "state")

    def __init__(self, seed):
        self.seed = int(seed)
        self.state = np.empty(1, dtype=np.uint64)
        self.state[0] = np.uint64(self.seed & 0xFFFFFFFFFFFFFFFF)

    def uniform(self):
        """One double in [0, 1)."""
        return K.rng_uniform(self.state)

    def randint(self, n):
        """Uniform integer in [0, n)."""
        return int(K.rng_next(self.state) % np.uint64(n))

    def next_seed(self):
        """Derive a fresh 64-bit stream key, advancing this stream."""
        return int(K.rng_next(self.state))

    def spawn(self):
        return RngStream(self.next_seed())


@dataclass
class SampleOutcome:
    """Result of subset-sampling one neighborhood.

    accepted holds (vertex, raw inclusion weight s_u / d_v^a); the caller
    converts weights into propagated masses. candidates_examined counts
    pre-acceptance candidates; variates_drawn counts bounded-geometric draws.
    """
    accepted: list = field(default_factory=list)
    candidates_examined: int = 0
    variates_drawn: int = 0
    max_acceptance: float = 0.0


def bounded_geometric(p, n, rng):
    """Index of the first success among n Bernoulli(p) trials, n+1 if none.

    O(1) expected work per draw via inverse transform.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if n < 1:
        raise ValueError("n must be a positive integer")
    return int(K.bounded_geometric(p, n, rng.state))


def sample_bucket_geometric(bucket, p_star, rng):
    """Keep each bucket element independently with probability p_star,
    walking the bucket by cumulative geometric skips. Returns kept elements
    in slot order.
    """
    if not 0.0 <= p_star <= 1.0:
        raise ValueError(f"p_star must be in [0, 1], got {p_star}")
    b = np.asarray(bucket, dtype=np.int64)
    out = np.empty(max(b.shape[0], 1), dtype=np.int64)
    kept, _ = K.bucket_geometric_into(b, p_star, rng.state, out)
    return out[:kept].copy()


def sample_bucket_binomial(bucket, p_star, rng):
    """Baseline bucket sampler: X ~ Bin(|bucket|, p_star) then X distinct
    slots by partial Fisher-Yates. Marginals match the geometric sampler.
    """
    if not 0.0 <= p_star <= 1.0:
        raise ValueError(f"p_star must be in [0, 1], got {p_star}")
    b = np.asarray(bucket, dtype=np.int64)
    out = np.empty(max(b.shape[0], 1), dtype=np.int64)
    scratch = np.empty(max(b.shape[0], 1), dtype=np.int64)
    kept = K.bucket_binomial_into(b, p_star, rng.state, out, scratch)
    return out[:kept].copy()


def neighborhood_arrays(g, u):
    """Flatten B[u] into (seg_j, seg_ptr, nbr) kernel arrays."""
    seg_j = []
    seg_ptr = [0]
    flat = []
    for j, b in g.buckets[u].segments():
        seg_j.append(j)
        flat.extend(b)
        seg_ptr.append(len(flat))
    return (np.asarray(seg_j, dtype=np.int64),
            np.asarray(seg_ptr, dtype=np.int64),
            np.asarray(flat, dtype=np.int64))


def subset_sample_neighborhood(g, u, s_u, a, mode, rng):
    """Sample each neighbor v of u independently with probability
    min(1, s_u / d_v^a), using the per-bucket overestimate-and-reject scheme.

    mode "staticpp" requires fresh bucket keys (reference degrees equal to
    true degrees everywhere); mode "dynamic" inflates the bucket probability
    by 2^a and tolerates the factor-two staleness the update rule maintains.
    """
    if s_u < 0.0:
        raise ValueError("shifting factor must be non-negative")
    if mode == "staticpp":
        boost = 1.0
        if g.stale_count > 0:
            raise StalenessError(
                "graph has stale reference degrees; use mode='dynamic'")
    elif mode == "dynamic":
        boost = 2.0 ** a
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if g.deg[u] < 1:
        raise ValueError(f"vertex {u} has no neighbors to sample")
    seg_j, seg_ptr, nbr = neighborhood_arrays(g, u)
    da = np.asarray(g.deg, dtype=np.float64) ** a
    da[da == 0.0] = 1.0
    pow2ja = 2.0 ** (np.arange(64, dtype=np.float64) * a)
    out_v = np.empty(max(g.deg[u], 1), dtype=np.int64)
    out_w = np.empty(max(g.deg[u], 1), dtype=np.float64)
    acc, cand, var, maxr = K.subset_sample_into(
        seg_j, seg_ptr, nbr, float(s_u), pow2ja, boost, da, rng.state,
        out_v, out_w)
    return SampleOutcome(
        accepted=[(int(out_v[k]), float(out_w[k])) for k in range(acc)],
        candidates_examined=int(cand),
        variates_drawn=int(var),
        max_acceptance=float(maxr),
    )
