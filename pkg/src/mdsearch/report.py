"""Trial harness and the simulation report shared by both simulators.

Every trial draws from its own generator keyed by ``(master seed, trial
index, ...)`` so results do not depend on how trials are split across
workers; per-worker tallies are merged by plain addition.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

Z95 = 1.959963984540054


class ResourceGuardError(RuntimeError):
    """A run would exceed a configured size limit."""


def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    p = k / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    # the limits are exactly 0 and 1 at the ends; rounding can miss them
    lo = 0.0 if k == 0 else max(0.0, centre - half)
    hi = 1.0 if k == n else min(1.0, centre + half)
    return (lo, hi)


@dataclass
class TrialResult:
    error: bool
    tau: int
    blocks: int = 1
    erased_blocks: int = 0
    first_erased: bool = False
    counts: dict = field(default_factory=dict)
    maxima: dict = field(default_factory=dict)


@dataclass
class Tally:
    trials: int = 0
    errors: int = 0
    blocks: int = 0
    erased_blocks: int = 0
    first_erased: int = 0
    tau_sum: float = 0.0
    tau_sq: float = 0.0
    counts: dict = field(default_factory=dict)
    maxima: dict = field(default_factory=dict)

    def add(self, r: TrialResult) -> None:
        self.trials += 1
        self.errors += int(r.error)
        self.blocks += r.blocks
        self.erased_blocks += r.erased_blocks
        self.first_erased += int(r.first_erased)
        self.tau_sum += r.tau
        self.tau_sq += r.tau * r.tau
        for k, v in r.counts.items():
            self.counts[k] = self.counts.get(k, 0) + v
        for k, v in r.maxima.items():
            self.maxima[k] = max(self.maxima.get(k, v), v)

    def merge(self, other: "Tally") -> "Tally":
        out = Tally(
            self.trials + other.trials,
            self.errors + other.errors,
            self.blocks + other.blocks,
            self.erased_blocks + other.erased_blocks,
            self.first_erased + other.first_erased,
            self.tau_sum + other.tau_sum,
            self.tau_sq + other.tau_sq,
            dict(self.counts),
            dict(self.maxima),
        )
        for k, v in other.counts.items():
            out.counts[k] = out.counts.get(k, 0) + v
        for k, v in other.maxima.items():
            out.maxima[k] = max(out.maxima.get(k, v), v)
        return out


@dataclass
class SimReport:
    """Aggregated Monte Carlo statistics for one scheme.

    ``erasure_rate`` is the per-block erasure frequency, so for restart
    schemes ``mean_stopping_time * (1 - erasure_rate)`` estimates the block
    length. ``first_block_erasure_rate`` uses only each trial's first block
    and is independent of the stopping-time sample.
    """

    scheme_tag: str
    trials: int
    error_rate: float
    error_ci: tuple
    erasure_rate: float
    erasure_ci: tuple
    mean_stopping_time: float
    stopping_time_ci: tuple
    block_length: int
    first_block_erasure_rate: float
    config: dict
    extra: dict = field(default_factory=dict)

    @property
    def stopping_time_halfwidth(self) -> float:
        return 0.5 * (self.stopping_time_ci[1] - self.stopping_time_ci[0])

    def to_json(self) -> str:
        d = asdict(self)
        d["error_ci"] = list(self.error_ci)
        d["erasure_ci"] = list(self.erasure_ci)
        d["stopping_time_ci"] = list(self.stopping_time_ci)
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SimReport":
        d = json.loads(text)
        for k in ("error_ci", "erasure_ci", "stopping_time_ci"):
            d[k] = tuple(d[k])
        return cls(**d)

    @classmethod
    def from_tally(cls, tally: Tally, scheme: str, block_length: int, config: dict) -> "SimReport":
        n = tally.trials
        mean = tally.tau_sum / n
        var = max(tally.tau_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
        half = Z95 * math.sqrt(var / n)
        extra = {k: v / n for k, v in sorted(tally.counts.items())}
        extra.update({f"max_{k}": v for k, v in sorted(tally.maxima.items())})
        return cls(
            scheme_tag=scheme,
            trials=n,
            error_rate=tally.errors / n,
            error_ci=wilson_interval(tally.errors, n),
            erasure_rate=tally.erased_blocks / tally.blocks,
            erasure_ci=wilson_interval(tally.erased_blocks, tally.blocks),
            mean_stopping_time=mean,
            stopping_time_ci=(mean - half, mean + half),
            block_length=block_length,
            first_block_erasure_rate=tally.first_erased / n,
            config=config,
            extra=extra,
        )


def _run_chunk(trial_fn, ctx, start, stop):
    tally = Tally()
    for t in range(start, stop):
        tally.add(trial_fn(ctx, t))
    return tally


def run_trials(trial_fn, ctx, trials: int, threads: int = 1, chunk: int = 2000) -> Tally:
    """Run ``trial_fn(ctx, t)`` for ``t < trials`` and merge the tallies.

    ``trial_fn`` and ``ctx`` must be picklable when ``threads > 1``.
    """
    bounds = [(s, min(s + chunk, trials)) for s in range(0, trials, chunk)]
    total = Tally()
    if threads <= 1 or len(bounds) == 1:
        for s, e in bounds:
            total = total.merge(_run_chunk(trial_fn, ctx, s, e))
        return total
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_run_chunk, trial_fn, ctx, s, e) for s, e in bounds]
        # merge in submission order; addition is commutative anyway
        for f in futures:
            total = total.merge(f.result())
    return total
