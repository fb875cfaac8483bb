"""Non-adaptive search for a target moving at an unknown constant velocity.

The circle is cut into ``M = N/delta`` sensors of width ``delta/N``. A
trajectory starting at the centre of sensor ``s`` with velocity ``v`` visits
``floor(M * (c + v n) mod M)`` for ``n = 0..N-1``; its codeword is the
codebook bits read along that path.

For a centred start the path only changes where ``v = (k + 1/2)/(M n)``, so
the default enumeration takes one velocity per cell between consecutive
critical values. A uniform velocity grid is available as the alternative.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import codebook as cbk
from .channels import ChannelModel, log_likelihood, sample_output
from .infotheory import moving_rate_bounds, random_coding_exponent
from .optimize import optimal_query_size
from .report import ResourceGuardError, SimReport, TrialResult, run_trials
from .sim_stationary import TIE_RTOL, ConfigError, SWEEP_POINTS

DEFAULT_CAP = 5_000_000
_CODEBOOK, _NOISE, _TARGET = 0, 1, 2


@dataclass(frozen=True)
class QuantizedTrajectory:
    start_sensor: int
    velocity: float
    path: tuple

    @property
    def N(self) -> int:
        return len(self.path)


@dataclass(frozen=True)
class MovingConfig:
    """Moving-target simulation settings.

    ``v_max = 0`` is accepted as a degenerate stationary mode. ``method`` is
    ``"exact"`` (critical-velocity cells) or ``"grid"`` (uniform step
    ``delta / (2 N**2) / density``). ``max_trajectories`` caps the
    pre-deduplication candidate count.
    """

    model: ChannelModel
    delta: float
    N: int
    v_max: float = 0.1
    prior: float | None = None
    trials: int = 1000
    seed: int = 0
    w_policy: str | float = "sweep"
    method: str = "exact"
    density: int = 1
    max_trajectories: int = DEFAULT_CAP
    threads: int = 1

    def __post_init__(self):
        if self.N < 1:
            raise ConfigError("N must be positive")
        if not 0 < self.delta <= self.N:
            raise ConfigError("delta must lie in (0, N]")
        m = self.N / self.delta
        if abs(m - round(m)) > 1e-9 * max(1.0, m) or round(m) < 2:
            raise ConfigError(f"N/delta = {m:g} must be an integer >= 2")
        if not 0 <= self.v_max <= 0.5:
            raise ConfigError("v_max must lie in [0, 1/2]")
        if self.prior is not None and not 0 < self.prior < 1:
            raise ConfigError("prior must lie in (0, 1)")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if self.method not in ("exact", "grid"):
            raise ConfigError(f"unknown enumeration method {self.method!r}")
        if self.density < 1:
            raise ConfigError("density must be a positive integer")
        if isinstance(self.w_policy, str) and self.w_policy not in ("uniform", "sweep"):
            raise ConfigError(f"unknown w_policy {self.w_policy!r}")
        if not isinstance(self.w_policy, str) and not 0 <= float(self.w_policy) < 1:
            raise ConfigError("fixed start position must lie in [0, 1)")

    @property
    def M(self) -> int:
        return int(round(self.N / self.delta))

    @property
    def q(self) -> float:
        return optimal_query_size(self.model).q_star if self.prior is None else self.prior

    @property
    def rate(self) -> float:
        return math.log2(1 / self.delta) / self.N

    def echo(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.to_dict()
        d["M"] = self.M
        d["q"] = self.q
        return d


def cyclic_distance(w: float, w2: float) -> float:
    d = abs(w - w2) % 1.0
    return min(d, 1.0 - d)


def _cyclic(d):
    d = np.abs(d) % 1.0
    return np.minimum(d, 1.0 - d)


def centre(s: int, M: int) -> float:
    return (s + 0.5) / M


def quantize(w0: float, v: float, N: int, M: int) -> np.ndarray:
    """Sensor indices of ``w0 + v n mod 1`` for ``n = 0..N-1``."""
    pos = np.mod(w0 + v * np.arange(N), 1.0)
    return np.minimum(np.floor(pos * M).astype(np.int64), M - 1)


def trajectory(start_sensor: int, v: float, N: int, M: int) -> QuantizedTrajectory:
    path = quantize(centre(start_sensor, M), v, N, M)
    return QuantizedTrajectory(int(start_sensor), float(v), tuple(int(p) for p in path))


@dataclass(frozen=True, eq=False)
class TrajectorySet:
    """Distinct quantized trajectories in ``(start_sensor, velocity)`` order.

    Every start sensor shares the same velocity representatives, so
    ``paths[s*K + j] = (base[j] + s) mod M``. ``v_lo`` and ``v_hi`` bound
    the velocities (from a sensor centre) that produce each path; with
    ``v_max = 1/2`` the two ends wrap onto one path and the bounds are its hull.
    """

    M: int
    N: int
    v_max: float
    velocities: np.ndarray  # (K,) representatives for one start sensor
    base: np.ndarray  # (K, N) paths starting from sensor 0
    candidates: int
    v_lo: np.ndarray  # (K,) smallest velocity giving each path
    v_hi: np.ndarray  # (K,) largest velocity giving each path

    @property
    def K(self) -> int:
        return len(self.velocities)

    def __len__(self) -> int:
        return self.M * self.K

    def start_sensors(self) -> np.ndarray:
        return np.repeat(np.arange(self.M), self.K)

    def all_velocities(self) -> np.ndarray:
        return np.tile(self.velocities, self.M)

    def paths(self) -> np.ndarray:
        shift = np.arange(self.M)[:, None, None]
        return ((self.base[None] + shift) % self.M).reshape(-1, self.N)

    def __getitem__(self, i: int) -> QuantizedTrajectory:
        if not -len(self) <= i < len(self):
            raise IndexError(i)
        i %= len(self)
        s, j = divmod(i, self.K)
        path = (self.base[j] + s) % self.M
        return QuantizedTrajectory(int(s), float(self.velocities[j]), tuple(int(p) for p in path))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def to_csv(self) -> str:
        """One row per trajectory: start sensor, velocity, SHA-1 of the path."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["start_sensor", "velocity", "path_hash"])
        for s, v, p in zip(self.start_sensors(), self.all_velocities(), self.paths()):
            h = hashlib.sha1(np.ascontiguousarray(p, dtype=np.int64).tobytes()).hexdigest()
            w.writerow([int(s), f"{v:.12g}", h])
        return buf.getvalue()


def _exact_cells(M: int, N: int, v_max: float):
    """Velocity cells ``[lo, hi]`` of ``[-v_max, v_max]`` on which a centred path is constant.

    Critical values are deduplicated as exact rationals. Representatives
    are cell midpoints, which sit well away from any sensor boundary and so
    are safe in floating point. The caller adds ``v_max`` itself, which is
    its own degenerate cell when it is critical.
    """
    if v_max == 0 or N == 1:
        return np.array([-v_max]), np.array([v_max]), np.zeros(1)
    crit = set()
    for n in range(1, N):
        kmax = int(math.floor(v_max * M * n + 0.5)) + 1
        for k in range(-kmax - 1, kmax + 1):
            v = Fraction(2 * k + 1, 2 * M * n)
            if abs(v) < v_max:
                crit.add(v)
    crit = np.array([float(v) for v in sorted(crit)])
    edges = np.concatenate([[-v_max], crit, [v_max]])
    keep = edges[1:] > edges[:-1]
    lo, hi = edges[:-1][keep], edges[1:][keep]
    return lo, hi, 0.5 * (lo + hi)


def _exact_path(v: Fraction, N: int, M: int) -> np.ndarray:
    # floor(M * (1/2M + v n)) = floor(1/2 + M v n), exactly
    return np.array([math.floor(Fraction(1, 2) + M * v * n) % M for n in range(N)], dtype=np.int64)


def _grid_paths(M: int, N: int, v_max: float, density: int):
    # v = j / (2 M N density); position in sensors is 1/2 + j n / (2 N density)
    den = 2 * N * density
    jmax = int(math.floor(v_max * M * den + 1e-9))
    j = np.arange(-jmax, jmax + 1, dtype=np.int64)
    n = np.arange(N, dtype=np.int64)
    paths = np.floor_divide(N * density + j[:, None] * n[None, :], den) % M
    return j / (M * den), paths


def enumerate_trajectories(cfg: MovingConfig | None = None, *, M=None, N=None, v_max=None,
                           method=None, density=None, cap=None) -> TrajectorySet:
    """Distinct quantized trajectories from every sensor centre.

    Raises :class:`ResourceGuardError` when the candidate count (start
    sensors times velocities, before deduplication) exceeds the cap.
    """
    if cfg is not None:
        M, N, v_max = cfg.M, cfg.N, cfg.v_max
        method = method or cfg.method
        density = density or cfg.density
        cap = cap or cfg.max_trajectories
    method = method or "exact"
    density = density or 1
    cap = cap or DEFAULT_CAP
    if method == "exact":
        lo, hi, vels = _exact_cells(M, N, v_max)
        n_cand = M * (len(vels) + 1)
        if n_cand > cap:
            raise ResourceGuardError(f"{n_cand} candidate trajectories exceed the cap {cap}")
        paths = np.stack([quantize(centre(0, M), v, N, M) for v in vels])
        if v_max > 0 and N > 1:
            paths = np.vstack([paths, _exact_path(Fraction(str(v_max)), N, M)])
            lo, hi, vels = (np.append(x, v_max) for x in (lo, hi, vels))
    elif method == "grid":
        den = 2 * N * density
        n_cand = M * (2 * int(math.floor(v_max * M * den + 1e-9)) + 1)
        if n_cand > cap:
            raise ResourceGuardError(f"{n_cand} candidate trajectories exceed the cap {cap}")
        vels, paths = _grid_paths(M, N, v_max, density)
        lo = hi = vels
    else:
        raise ValueError(f"unknown method {method!r}")
    _, first, inv = np.unique(paths, axis=0, return_index=True, return_inverse=True)
    inv = inv.reshape(-1)
    v_lo = np.full(len(first), np.inf)
    v_hi = np.full(len(first), -np.inf)
    np.minimum.at(v_lo, inv, lo)
    np.maximum.at(v_hi, inv, hi)
    # order by the first (slowest) velocity producing each path
    order = np.argsort(first, kind="stable")
    first = first[order]
    return TrajectorySet(M, N, float(v_max), vels[first], paths[first], int(n_cand),
                         v_lo[order], v_hi[order])


def trajectory_count_bound(N: int, M: int, v_max: float) -> float:
    """Upper bound ``(2 N v_max + 3) N^2 M^2`` on the number of distinct quantized paths."""
    return (2 * N * v_max + 3) * N * N * M * M


def far_intersection_bound(N: int, v_max: float) -> int:
    """Claimed cap ``ceil(2 N v_max)`` on shared sensors between far trajectories."""
    return int(math.ceil(2 * N * v_max - 1e-12))


def are_close(t1, t2, delta: float, N: int) -> bool:
    """Close iff start positions are within ``delta`` (cyclic) and velocities within ``delta/N``.

    Accepts :class:`QuantizedTrajectory` objects, whose start is the centre
    of their start sensor with ``M = N/delta``, or raw ``(w0, v)`` pairs.
    """
    M = int(round(N / delta))
    w1, v1 = _params(t1, M)
    w2, v2 = _params(t2, M)
    tol = 1e-12
    return cyclic_distance(w1, w2) <= delta + tol and abs(v1 - v2) <= delta / N + tol


def _params(t, M):
    if isinstance(t, QuantizedTrajectory):
        return centre(t.start_sensor, M), t.velocity
    return float(t[0]), float(t[1])


def count_intersections(t1, t2) -> int:
    p1 = np.asarray(t1.path if isinstance(t1, QuantizedTrajectory) else t1)
    p2 = np.asarray(t2.path if isinstance(t2, QuantizedTrajectory) else t2)
    if p1.shape != p2.shape:
        raise ValueError("trajectories must have the same length")
    return int(np.sum(p1 == p2))


@dataclass
class AuditReport:
    """Exhaustive trajectory-count and intersection audit for one ``(N, M, v_max)``.

    A quantized trajectory stands for a whole cell of velocities, so a
    pair is ``far`` here only when no velocities producing the two paths
    are close. ``*_representative`` counts repeat the check using only each
    path's stored representative velocity.
    """

    N: int
    M: int
    v_max: float
    count: int
    count_bound: float
    intersection_bound: int
    far_pairs: int
    max_far_intersections: int
    violations: int
    far_pairs_representative: int
    max_far_intersections_representative: int
    violations_representative: int

    @property
    def ok(self) -> bool:
        return self.count <= self.count_bound and self.violations == 0


def audit(N: int, M: int, v_max: float) -> AuditReport:
    """Check both combinatorial bounds over every ordered pair of distinct paths.

    Intersections are invariant under shifting both starts, so pairs are
    visited as (sensor 0, path i) against (sensor d, path j).
    """
    ts = enumerate_trajectories(M=M, N=N, v_max=v_max, method="exact")
    delta = N / M
    bound = far_intersection_bound(N, v_max)
    K = ts.K
    tol = 1e-12
    gap = np.maximum(ts.v_lo[:, None] - ts.v_hi[None, :], ts.v_lo[None, :] - ts.v_hi[:, None])
    v_close = gap <= delta / N + tol
    v_close_rep = np.abs(ts.velocities[:, None] - ts.velocities[None, :]) <= delta / N + tol
    stats = np.zeros((2, 3), dtype=np.int64)  # (cells, representative) x (pairs, worst, violations)
    for d in range(M):
        hits = (ts.base[:, None, :] == ((ts.base + d) % M)[None, :, :]).sum(axis=2)
        w_close = cyclic_distance(0.0, d / M) <= delta + tol
        for row, vc in enumerate((v_close, v_close_rep)):
            far = ~(vc & w_close)
            if d == 0:
                far &= ~np.eye(K, dtype=bool)
            h = hits[far]
            if h.size:
                stats[row, 0] += h.size
                stats[row, 1] = max(stats[row, 1], int(h.max()))
                stats[row, 2] += int(np.sum(h > bound))
    # each start sensor contributes the same ordered pairs
    stats[:, [0, 2]] *= M
    return AuditReport(
        N, M, float(v_max), len(ts), trajectory_count_bound(N, M, v_max), bound,
        int(stats[0, 0]), int(stats[0, 1]), int(stats[0, 2]),
        int(stats[1, 0]), int(stats[1, 1]), int(stats[1, 2]),
    )


def trajectory_scores(bits, y, model: ChannelModel, q_decode: float, ts: TrajectorySet) -> np.ndarray:
    """Log2-likelihood of ``y`` along every trajectory of ``ts``."""
    bits = np.asarray(bits)
    l1 = np.asarray(log_likelihood(model, y, 1, q_decode), dtype=float)
    l0 = np.asarray(log_likelihood(model, y, 0, q_decode), dtype=float)
    with np.errstate(invalid="ignore"):
        L = np.where(bits == 1, l1[None, :], l0[None, :])  # (M, N)
    cols = np.arange(ts.N)
    out = np.empty(len(ts))
    for s in range(ts.M):
        out[s * ts.K:(s + 1) * ts.K] = L[(ts.base + s) % ts.M, cols].sum(axis=1)
    return out


def _argmax_first(scores):
    best = np.max(scores)
    if np.isneginf(best):
        return 0
    tol = TIE_RTOL * max(1.0, abs(best))
    return int(np.flatnonzero(scores >= best - tol)[0])


def ml_decode_trajectory(bits, y, model: ChannelModel, q_decode: float, ts: TrajectorySet) -> QuantizedTrajectory:
    """Most likely trajectory; near-ties go to the smallest ``(start_sensor, velocity)``."""
    return ts[_argmax_first(trajectory_scores(bits, y, model, q_decode, ts))]


def start_position(cfg: MovingConfig, t: int) -> float:
    if cfg.w_policy == "uniform":
        return float(cbk.make_rng(cfg.seed, t, _TARGET).random())
    if cfg.w_policy == "sweep":
        return (t % SWEEP_POINTS) / SWEEP_POINTS
    return float(cfg.w_policy)


def _trial_moving(ctx, t: int) -> TrialResult:
    cfg, ts, q = ctx
    M, N = cfg.M, cfg.N
    rng = cbk.make_rng(cfg.seed, t, _NOISE)
    w0 = start_position(cfg, t)
    v = float(rng.uniform(-cfg.v_max, cfg.v_max)) if cfg.v_max > 0 else 0.0
    cb_rng = cbk.make_rng(cfg.seed, t, _CODEBOOK)
    bits = (cb_rng.random((M, N)) < q).astype(np.int8)
    qs = bits.sum(axis=0) / M
    path = quantize(w0, v, N, M)
    y = sample_output(cfg.model, bits[path, np.arange(N)], qs, rng)
    got = ml_decode_trajectory(bits, y, cfg.model, q, ts)
    far = not are_close(got, (w0, v), cfg.delta, N)
    w_end = (w0 + v * (N - 1)) % 1.0
    w_hat = (centre(got.start_sensor, M) + got.velocity * (N - 1)) % 1.0
    end_err = max(cyclic_distance(w_hat, w_end), abs(got.velocity - v)) > cfg.delta
    counts = {
        "endpoint_error_rate": int(end_err),
        "path_error_rate": int(got.path != tuple(int(p) for p in path)),
        "start_sensor_error_rate": int(got.start_sensor != path[0]),
    }
    return TrialResult(error=far, tau=N, counts=counts)


def run_moving_sim(cfg: MovingConfig) -> SimReport:
    """Random-codebook trajectory search; error iff the decoded trajectory is far from the truth.

    ``extra`` carries the endpoint criterion (position at the last query and
    velocity, both within ``delta``), exact-path and start-sensor error
    rates, and the rate bounds at ``q*``.
    """
    ts = enumerate_trajectories(cfg)
    q = cfg.q
    tally = run_trials(_trial_moving, (cfg, ts, q), cfg.trials, cfg.threads)
    rep = SimReport.from_tally(tally, "moving", cfg.N, cfg.echo())
    opt = optimal_query_size(cfg.model)
    ach, conv = moving_rate_bounds(opt.q_star, cfg.v_max, cfg.model) if cfg.v_max > 0 else (
        0.5 * opt.value, 0.5 * opt.value)
    rep.extra.update(
        {
            "trajectories": len(ts),
            "candidates": ts.candidates,
            "rate": cfg.rate,
            "achievable_rate": ach,
            "converse_rate": conv,
            "reliability": moving_reliability(cfg.rate, cfg.v_max, cfg.model),
        }
    )
    return rep


def moving_reliability(R: float, v_max: float, model: ChannelModel) -> float:
    """``E(R(1-2v)) / (1-2v)`` with the random-coding exponent at ``(q*, model)``."""
    if v_max >= 0.5:
        return 0.0
    s = 1.0 - 2.0 * v_max
    q = optimal_query_size(model).q_star
    return random_coding_exponent(R * s, q, q, model) / s
