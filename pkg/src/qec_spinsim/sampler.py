"""Direct and error-subset Monte Carlo estimation of logical failure rates.

The sampler partitions fault configurations by their per-category error
counts w = (w_1..w_8).  Each subset's occurrence probability

    A_w = prod_i C(n_i, w_i) p_i^w_i (1 - p_i)^(n_i - w_i)

is exact, so sampling within the most likely subsets yields certified
bounds: lower = sum A_w p_w, upper = lower + (1 - sum A_w).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .frames import FrameRunner
from .noise import N_CATEGORIES

DEFAULT_THRESHOLD = 1e-6


@dataclass(frozen=True)
class WeightVector:
    w: tuple[int, ...]

    def __post_init__(self):
        if len(self.w) != N_CATEGORIES:
            raise ValueError(f"weight vector needs {N_CATEGORIES} entries")
        if any(x < 0 for x in self.w):
            raise ValueError("weights must be nonnegative")

    @property
    def total(self) -> int:
        return sum(self.w)


@dataclass(frozen=True)
class SubsetEstimate:
    w: WeightVector
    a_w: float
    shots: int
    failures: int

    def __post_init__(self):
        if not 0 <= self.a_w <= 1:
            raise ValueError("A_w must be a probability")
        if self.failures > self.shots:
            raise ValueError("more failures than shots")

    @property
    def p_l_w(self) -> float:
        return self.failures / self.shots

    @property
    def std_err(self) -> float:
        p = self.p_l_w
        return math.sqrt(p * (1 - p) / self.shots)


@dataclass(frozen=True)
class BoundPair:
    lower: float
    upper: float
    sampled_mass: float
    std_err: float

    def __post_init__(self):
        if self.lower > self.upper + 1e-15:
            raise ValueError("lower bound exceeds upper bound")

    def overlaps(self, lo: float, hi: float, n_sigma: float = 3.0) -> bool:
        slack = n_sigma * self.std_err
        return self.lower - slack <= hi and self.upper + slack >= lo


def subset_weight(w, counts, probs) -> float:
    """Occurrence probability A_w, evaluated in log space."""
    w = w.w if isinstance(w, WeightVector) else tuple(w)
    log_a = 0.0
    for wi, ni, pi in zip(w, counts, probs, strict=True):
        if wi > ni:
            raise ValueError(f"weight {wi} exceeds location count {ni}")
        if not 0 <= pi <= 1:
            raise ValueError("fault probabilities must lie in [0, 1]")
        if wi == 0 and pi == 0.0:
            continue
        if pi == 0.0:
            return 0.0
        if pi == 1.0:
            if wi != ni:
                return 0.0
            continue
        log_a += (math.lgamma(ni + 1) - math.lgamma(wi + 1) - math.lgamma(ni - wi + 1)
                  + wi * math.log(pi) + (ni - wi) * math.log1p(-pi))
    return math.exp(log_a)


def enumerate_subsets(counts, probs, threshold: float = DEFAULT_THRESHOLD):
    """Every weight vector with A_w > threshold, in decreasing-A_w order.

    Depth-first over categories with a certified envelope: a partial product
    times the remaining categories' maximal factors bounds every completion,
    so no qualifying vector is pruned.
    """
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if threshold >= 1:
        return []  # A_w < 1 whenever any p_i is strictly between 0 and 1
    tables = []
    for ni, pi in zip(counts, probs, strict=True):
        tables.append([subset_weight((w,), (ni,), (pi,)) for w in range(ni + 1)])
    maxima = [max(t) for t in tables]
    suffix_max = [1.0] * (len(tables) + 1)
    for i in range(len(tables) - 1, -1, -1):
        suffix_max[i] = suffix_max[i + 1] * maxima[i]
    found: list[tuple[WeightVector, float]] = []

    def rec(i, prefix, a):
        if i == len(tables):
            if a > threshold:
                found.append((WeightVector(tuple(prefix)), a))
            return
        for wi, f in enumerate(tables[i]):
            if f * a * suffix_max[i + 1] > threshold:
                prefix.append(wi)
                rec(i + 1, prefix, a * f)
                prefix.pop()

    rec(0, [], 1.0)
    found.sort(key=lambda item: (-item[1], item[0].w))
    return found


def sample_subset(protocol, w, shots: int, rng: np.random.Generator,
                  runner: FrameRunner | None = None) -> SubsetEstimate:
    """Estimate p_L within one subset: w_i faults placed uniformly per category."""
    w = w if isinstance(w, WeightVector) else WeightVector(tuple(w))
    if shots < 1:
        raise ValueError("shots must be positive")
    counts = protocol.counts
    for wi, ni in zip(w.w, counts):
        if wi > ni:
            raise ValueError(f"weight {wi} exceeds count {ni}")
    runner = runner or FrameRunner(protocol)
    a_w = subset_weight(w, counts, protocol.probabilities)
    failures = 0
    for start in range(0, shots, _BLOCK):
        block = min(_BLOCK, shots - start)
        acts = _subset_activations(w.w, counts, block, rng)
        failures += int(runner.run(acts).sum())
    return SubsetEstimate(w, a_w, shots, failures)


_BLOCK = 16384


def _subset_activations(w, counts, shots, rng):
    n_loc = sum(counts)
    acts = np.zeros((shots, n_loc), dtype=bool)
    offset = 0
    for wi, ni in zip(w, counts):
        if wi > 0:
            keys = rng.random((shots, ni))
            pick = np.argpartition(keys, wi - 1, axis=1)[:, :wi]
            rows = np.repeat(np.arange(shots), wi)
            acts[rows, offset + pick.ravel()] = True
        offset += ni
    return acts


def direct_sample(protocol, shots: int, rng: np.random.Generator,
                  runner: FrameRunner | None = None) -> tuple[float, float]:
    """Plain Monte Carlo over independent per-location faults."""
    if shots < 1:
        raise ValueError("shots must be positive")
    runner = runner or FrameRunner(protocol)
    p_loc = np.array([protocol.probabilities[loc.category - 1]
                      for loc in protocol.locations])
    failures = 0
    for start in range(0, shots, _BLOCK):
        block = min(_BLOCK, shots - start)
        acts = rng.random((block, p_loc.size)) < p_loc
        failures += int(runner.run(acts).sum())
    p = failures / shots
    return p, math.sqrt(p * (1 - p) / shots)


def combine_bounds(estimates) -> BoundPair:
    """Certified bounds from a set of distinct-subset estimates."""
    seen = set()
    for est in estimates:
        if est.w.w in seen:
            raise ValueError(f"duplicate subset {est.w.w}")
        seen.add(est.w.w)
    mass = math.fsum(est.a_w for est in estimates)
    lower = math.fsum(est.a_w * est.p_l_w for est in estimates)
    var = math.fsum((est.a_w * est.std_err) ** 2 for est in estimates)
    return BoundPair(lower, lower + (1.0 - mass), mass, math.sqrt(var))


@dataclass(frozen=True)
class ShotPolicy:
    """Adaptive budget: double shots until the A_w-weighted error contribution
    drops below `fraction` of the running lower bound, capped per subset.
    `time_budget_s` bounds one whole estimation; on expiry the remaining
    subsets stay unsampled and simply widen the upper bound."""

    base: int = 10_000
    cap: int = 1_000_000
    fraction: float = 0.05
    mode: str = "adaptive"   # or "fixed"
    time_budget_s: float | None = None

    @classmethod
    def parse(cls, text: str) -> "ShotPolicy":
        text = text.strip()
        if text in ("default", "adaptive", ""):
            return cls()
        if text.startswith("fixed:"):
            return cls(base=int(float(text.split(":", 1)[1])), mode="fixed")
        if text.startswith("adaptive:"):
            kv = dict(part.split("=", 1) for part in text.split(":", 1)[1].split(","))
            budget = kv.get("budget")
            return cls(base=int(float(kv.get("base", 10_000))),
                       cap=int(float(kv.get("cap", 1_000_000))),
                       fraction=float(kv.get("frac", 0.05)),
                       time_budget_s=float(budget) if budget else None)
        raise ValueError(f"bad shot policy {text!r}")


@dataclass(frozen=True)
class SamplingResult:
    """Bounds plus the per-subset ledger; iterable as (bounds, estimates)."""

    bounds: BoundPair
    estimates: tuple[SubsetEstimate, ...]
    complete: bool

    def __iter__(self):
        return iter((self.bounds, self.estimates))


def estimate_logical_error(protocol, seed, threshold: float = DEFAULT_THRESHOLD,
                           policy: ShotPolicy = ShotPolicy()) -> SamplingResult:
    """Subset-sample a protocol: enumerate, sample each subset, combine.

    Per-subset streams are split off (seed, subset index, block index), so
    results are bit-identical no matter how work is scheduled.  An expired
    time budget leaves the remaining (least likely) subsets unsampled; the
    result is then a valid but wider bound pair, flagged as incomplete.
    """
    deadline = None
    if policy.time_budget_s is not None:
        deadline = time.monotonic() + policy.time_budget_s
    subsets = enumerate_subsets(protocol.counts, protocol.probabilities, threshold)
    runner = FrameRunner(protocol)
    estimates: list[SubsetEstimate] = []
    running_lower = 0.0
    complete = True
    for index, (w, a_w) in enumerate(subsets):
        if deadline is not None and time.monotonic() > deadline and estimates:
            complete = False
            break
        shots = policy.base
        est = _sample_keyed(protocol, runner, w, shots, seed, index, 0)
        if policy.mode == "adaptive":
            while shots < policy.cap:
                running = max(running_lower + est.a_w * est.p_l_w, 1e-12)
                if a_w * est.std_err <= policy.fraction * running:
                    break
                if deadline is not None and time.monotonic() > deadline:
                    break
                extra = _sample_keyed(protocol, runner, w, shots, seed, index, shots)
                shots *= 2
                est = SubsetEstimate(w, a_w, shots, est.failures + extra.failures)
        estimates.append(est)
        running_lower += est.a_w * est.p_l_w
    return SamplingResult(combine_bounds(estimates), tuple(estimates), complete)


def _sample_keyed(protocol, runner, w, shots, seed, subset_index, shot_offset):
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(subset_index, shot_offset)))
    return sample_subset(protocol, w, shots, rng, runner)


def write_subset_ledger(path, estimates):
    """Per-subset CSV: w_1..w_8, A_w, shots, failures, p_L_w, std_err."""
    lines = [",".join([f"w_{i}" for i in range(1, 9)]
                      + ["A_w", "shots", "failures", "p_L_w", "std_err"])]
    for est in estimates:
        cells = [str(x) for x in est.w.w]
        cells += [repr(est.a_w), str(est.shots), str(est.failures),
                  repr(est.p_l_w), repr(est.std_err)]
        lines.append(",".join(cells))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
