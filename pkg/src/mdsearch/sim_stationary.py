"""Monte Carlo search for a stationary target.

Schemes: plain non-adaptive ML search, Forney decision-feedback erasures,
Yamamoto-Itoh validation, and the coarse/zoom/validate two-phase search.
Restart schemes discard everything on an erasure and begin a fresh block
with fresh codebooks.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import cached_property

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from . import codebook as cbk
from .channels import LINEAR_BSC, ChannelModel, divergence_c1, gaussian_params, log_likelihood, sample_output
from .optimize import optimal_query_size, phase2_functional
from .report import SimReport, TrialResult, run_trials

SCHEMES = ("nonadaptive", "forney", "yamamoto-itoh", "two-phase")
TIE_RTOL = 1e-9
SWEEP_POINTS = 50

# stream tags, so codebooks and noise never share a generator
_CODEBOOK, _NOISE, _TARGET = 0, 1, 2


class ConfigError(ValueError):
    """Inconsistent or infeasible search configuration."""


@dataclass(frozen=True)
class SearchConfig:
    """Everything a stationary-target simulation needs.

    ``N`` wins over ``rate``; if neither is given the rate defaults to half
    of ``I_XY(q*, q*)``. ``prior`` defaults to ``q*``. ``w_policy`` is
    ``"uniform"``, ``"sweep"`` (cycle through 50 grid points plus both edges
    of a bin) or a fixed position in ``[0, 1)``.
    """

    model: ChannelModel
    delta: float = 1 / 64
    rate: float | None = None
    N: int | None = None
    prior: float | None = None
    forney_T: float = 0.05
    yi_lambda: float = 0.2
    yi_threshold: float | None = None
    false_erase: float = 1e-2
    alpha: float = 0.1
    N1: int | None = None
    N2: int | None = None
    N3: int | None = None
    trials: int = 1000
    seed: int = 0
    w_policy: str | float = "uniform"
    max_rounds: int = 10_000
    threads: int = 1

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ConfigError("delta must lie in (0, 1)")
        if self.M < 2:
            raise ConfigError("round(1/delta) must be at least 2")
        if not 0 < self.yi_lambda < 1:
            raise ConfigError("yi_lambda must lie in (0, 1)")
        if not 0 < self.alpha < 0.5:
            raise ConfigError("alpha must lie in (0, 1/2)")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if self.prior is not None and not 0 < self.prior < 1:
            raise ConfigError("prior must lie in (0, 1)")
        if self.rate is not None and self.rate <= 0:
            raise ConfigError("rate must be positive")
        if not isinstance(self.w_policy, str) and not 0 <= float(self.w_policy) < 1:
            raise ConfigError("fixed target position must lie in [0, 1)")
        if isinstance(self.w_policy, str) and self.w_policy not in ("uniform", "sweep"):
            raise ConfigError(f"unknown w_policy {self.w_policy!r}")

    @property
    def M(self) -> int:
        return int(round(1 / self.delta))

    @cached_property
    def optimum(self):
        return optimal_query_size(self.model)

    @property
    def q(self) -> float:
        return self.optimum.q_star if self.prior is None else self.prior

    @property
    def block_N(self) -> int:
        if self.N is not None:
            return int(self.N)
        rate = self.rate if self.rate is not None else 0.5 * self.optimum.value
        return int(math.ceil(math.log2(self.M) / rate - 1e-9))

    def echo(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.to_dict()
        d["M"] = self.M
        d["block_N"] = self.block_N
        d["q"] = self.q
        return d


def sweep_positions(M: int) -> list[float]:
    """50 evenly spaced targets plus the left and right edge of bin 0."""
    pts = [i / SWEEP_POINTS for i in range(SWEEP_POINTS)]
    pts += [1.0 / M, math.nextafter(1.0 / M, 0.0)]
    return pts


def target_position(cfg: SearchConfig, t: int) -> float:
    if cfg.w_policy == "uniform":
        return float(cbk.make_rng(cfg.seed, t, _TARGET).random())
    if cfg.w_policy == "sweep":
        pts = sweep_positions(cfg.M)
        return pts[t % len(pts)]
    return float(cfg.w_policy)


def codeword_scores(bits, y, model: ChannelModel, q_decode: float) -> np.ndarray:
    """``sum_n log2 P(y_n | bits[k, n])`` for every row ``k``."""
    l1 = np.asarray(log_likelihood(model, y, 1, q_decode), dtype=float)
    l0 = np.asarray(log_likelihood(model, y, 0, q_decode), dtype=float)
    if np.all(np.isfinite(l1)) and np.all(np.isfinite(l0)):
        return bits @ (l1 - l0) + l0.sum()
    return np.where(bits == 1, l1, l0).sum(axis=1)


def argmax_first(scores: np.ndarray) -> int:
    """Index of the maximum; near-ties (relative 1e-9) go to the smallest index."""
    best = scores.max()
    if not np.isfinite(best):
        return int(np.argmax(scores))
    return int(np.flatnonzero(scores >= best - TIE_RTOL * max(1.0, abs(best)))[0])


def _bits(cb):
    return cb.bits if isinstance(cb, cbk.Codebook) else np.asarray(cb)


def ml_decode(cb, y, model: ChannelModel, q_decode: float) -> int:
    """Maximum-likelihood row, decoding as if every query had size ``q_decode``."""
    bits = _bits(cb)
    if len(y) != bits.shape[1]:
        raise ValueError("observation length does not match the codebook")
    return argmax_first(codeword_scores(bits, y, model, q_decode))


def forney_decision(cb, y, model: ChannelModel, T: float, q_decode: float):
    """Decision-feedback rule: the ML row if it beats all others by ``2**(N*T)``.

    Returns the row index, or ``None`` for an erasure. The comparison is
    ``log2 P(y|x_m) - log2 sum_{m' != m} P(y|x_m') >= N*T``, evaluated with
    log-sum-exp.
    """
    if T < 0:
        raise ValueError("threshold T must be non-negative")
    bits = _bits(cb)
    scores = codeword_scores(bits, y, model, q_decode)
    m = argmax_first(scores)
    others = np.delete(scores, m) * math.log(2)
    rest = logsumexp(others) / math.log(2) if others.size else -np.inf
    with np.errstate(invalid="ignore"):
        margin = scores[m] - rest
    if np.isnan(margin):
        return None
    return m if margin >= bits.shape[1] * T else None


def llr_sum(y_val, model: ChannelModel, delta: float) -> float:
    y_val = np.asarray(y_val)
    with np.errstate(invalid="ignore"):
        return float(np.sum(log_likelihood(model, y_val, 1, delta) - log_likelihood(model, y_val, 0, delta)))


def validation_test(y_val, model: ChannelModel, delta: float, threshold: float) -> bool:
    """Accept (True) iff the summed log2 likelihood ratio hit/miss reaches ``threshold``."""
    if len(y_val) < 1:
        raise ValueError("validation needs at least one observation")
    s = llr_sum(y_val, model, delta)
    return bool(s >= threshold) if not math.isnan(s) else False


def np_threshold(model: ChannelModel, delta: float, L: int, false_erase: float = 1e-2) -> float:
    """Largest threshold whose false-erase probability under a hit is at most ``false_erase``.

    Exact (binomial) for the BSC. For the Gaussian pair the log-likelihood
    ratio is a quadratic form, approximated here by a normal with its exact
    mean ``L*C1`` and variance.
    """
    if model.variant == LINEAR_BSC:
        p = model.a * delta + model.b
        if p == 0:
            return 0.0
        c = math.log2((1 - p) / p)
        ks = np.arange(L + 1)
        # P(fewer than k ones | hit)
        below = stats.binom.cdf(ks - 1, L, 1 - p)
        k0 = int(ks[below <= false_erase].max())
        return (2 * k0 - L) * c - 1e-9 * max(1, L) * c
    m1, v1 = (float(v) for v in gaussian_params(model, 1, delta))
    _, v0 = (float(v) for v in gaussian_params(model, 0, delta))
    A = 0.5 / v0 - 0.5 / v1
    B = m1 / v0
    var = (2 * A * A * v1 * v1 + B * B * v1) / math.log(2) ** 2
    mean = divergence_c1(model, delta)
    return L * mean - stats.norm.ppf(1 - false_erase) * math.sqrt(L * var)


# --- building blocks -------------------------------------------------------


def _seed(cfg_seed: int, t: int, rnd: int, tag: int, sub: int = 0) -> int:
    ss = np.random.SeedSequence([cfg_seed & 0xFFFFFFFF, t, rnd, tag, sub])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def search_block(model, M, N, prior, q_decode, u, cb_seed, noise_rng, scale=1.0, present=True):
    """One non-adaptive search over ``M`` bins for a target at local position ``u``.

    ``scale`` shrinks every query (zoomed phases see size ``scale * weight/M``);
    with ``present=False`` the target lies outside the searched interval and
    every clean output is 0. Returns ``(decoded_bin, true_bin, query_sizes)``.
    """
    cb = cbk.generate(M, N, prior, cb_seed)
    qs = scale * cb.query_sizes()
    if present:
        row = cbk.encode_target(u, cb)
        x = cb.bits[row]
    else:
        x = np.zeros(N, dtype=np.int8)
    y = sample_output(model, x, qs, noise_rng)
    m = ml_decode(cb, y, model, q_decode)
    return (m + cb.shift) % M, cbk.sensor_of(u, M), qs


def _forney_block(model, M, N, prior, q_decode, u, cb_seed, noise_rng, T):
    cb = cbk.generate(M, N, prior, cb_seed)
    x = cb.bits[cbk.encode_target(u, cb)]
    y = sample_output(model, x, cb.query_sizes(), noise_rng)
    m = forney_decision(cb, y, model, T, q_decode)
    if m is None:
        return None, cbk.sensor_of(u, M)
    return (m + cb.shift) % M, cbk.sensor_of(u, M)


# --- trial functions (module level so they pickle) ---------------------------


def _trial_nonadaptive(cfg: SearchConfig, t: int) -> TrialResult:
    w = target_position(cfg, t)
    noise = cbk.make_rng(cfg.seed, t, 0, _NOISE)
    got, true, _ = search_block(
        cfg.model, cfg.M, cfg.block_N, cfg.q, cfg.q, w, _seed(cfg.seed, t, 0, _CODEBOOK), noise
    )
    return TrialResult(error=got != true, tau=cfg.block_N)


def _trial_forney(cfg: SearchConfig, t: int) -> TrialResult:
    w = target_position(cfg, t)
    N = cfg.block_N
    erased = 0
    first = False
    for rnd in range(cfg.max_rounds):
        noise = cbk.make_rng(cfg.seed, t, rnd, _NOISE)
        got, true = _forney_block(
            cfg.model, cfg.M, N, cfg.q, cfg.q, w, _seed(cfg.seed, t, rnd, _CODEBOOK), noise, cfg.forney_T
        )
        if got is None:
            erased += 1
            first = first or rnd == 0
            continue
        return TrialResult(got != true, N * (rnd + 1), rnd + 1, erased, first)
    # gave up: counted as a failed search
    return TrialResult(True, N * cfg.max_rounds, cfg.max_rounds, erased, first, {"gave_up": 1})


def yi_split(cfg: SearchConfig) -> tuple[int, int]:
    """(search length, validation length) of one Yamamoto-Itoh block."""
    N = cfg.block_N
    L = int(round(cfg.yi_lambda * N))
    return N - L, L


def _trial_yi(cfg: SearchConfig, t: int) -> TrialResult:
    w = target_position(cfg, t)
    N1, L = yi_split(cfg)
    N = N1 + L
    thr = cfg.yi_threshold
    if thr is None and L > 0:
        thr = np_threshold(cfg.model, 1 / cfg.M, L, cfg.false_erase)
    erased = 0
    first = False
    for rnd in range(cfg.max_rounds):
        noise = cbk.make_rng(cfg.seed, t, rnd, _NOISE)
        got, true, _ = search_block(
            cfg.model, cfg.M, N1, cfg.q, cfg.q, w, _seed(cfg.seed, t, rnd, _CODEBOOK), noise
        )
        if L > 0:
            x = np.full(L, int(got == true), dtype=np.int8)
            y_val = sample_output(cfg.model, x, 1 / cfg.M, noise)
            if not validation_test(y_val, cfg.model, 1 / cfg.M, thr):
                erased += 1
                first = first or rnd == 0
                continue
        return TrialResult(got != true, N * (rnd + 1), rnd + 1, erased, first)
    return TrialResult(True, N * cfg.max_rounds, cfg.max_rounds, erased, first, {"gave_up": 1})


@dataclass(frozen=True)
class TwoPhasePlan:
    M1: int
    M2: int
    N1: int
    N2: int
    N3: int
    q1: float
    q2: float
    threshold: float
    phase2_max_rate: float

    @property
    def block_length(self) -> int:
        return self.N1 + self.N2 + self.N3


def two_phase_plan(cfg: SearchConfig) -> TwoPhasePlan:
    """Resolve phase sizes, priors and the validation threshold.

    The coarse phase uses ``q*``; the zoom phase uses the maximiser of
    ``I_XY(q, alpha*q)``. Missing lengths default to twice the rate-limit
    lengths (and to the Stein length for a 1e-3 false accept).
    """
    M1 = int(round(1 / cfg.alpha))
    M2 = int(round(cfg.M / M1))
    if M1 * M2 != cfg.M:
        raise ConfigError(f"1/delta={cfg.M} is not a multiple of 1/alpha={M1}")
    if M2 < 2:
        raise ConfigError("zoom phase needs at least two sub-bins")
    alpha = 1 / M1
    q1 = cfg.optimum.q_star if cfg.prior is None else cfg.prior
    q2, i2 = phase2_functional(cfg.model, alpha)
    i1 = cfg.optimum.value
    N1 = cfg.N1 or int(math.ceil(2 * math.log2(M1) / i1))
    N2 = cfg.N2 or int(math.ceil(2 * math.log2(M2) / i2))
    N3 = cfg.N3 or max(1, int(math.ceil(math.log2(1e3) / divergence_c1(cfg.model, 1 / cfg.M))))
    if math.log2(M2) / N2 > i2:
        raise ConfigError(
            f"zoom-phase rate {math.log2(M2) / N2:.6g} exceeds max_q I(q, alpha q) = {i2:.6g}"
        )
    thr = cfg.yi_threshold
    if thr is None:
        thr = np_threshold(cfg.model, 1 / cfg.M, N3, cfg.false_erase)
    return TwoPhasePlan(M1, M2, N1, N2, N3, q1, q2, thr, i2)


def _trial_two_phase(ctx, t: int) -> TrialResult:
    cfg, plan = ctx
    w = target_position(cfg, t)
    alpha = 1 / plan.M1
    delta = 1 / cfg.M
    true_bin = cbk.sensor_of(w, cfg.M)
    erased = 0
    first = False
    worst_q = 0.0
    for rnd in range(cfg.max_rounds):
        noise = cbk.make_rng(cfg.seed, t, rnd, _NOISE)
        # positions are handed down as bin centres so coarse and fine bins agree exactly
        coarse = true_bin // plan.M2
        a_hat, _, _ = search_block(
            cfg.model, plan.M1, plan.N1, plan.q1, plan.q1, (coarse + 0.5) / plan.M1,
            _seed(cfg.seed, t, rnd, _CODEBOOK, 1), noise,
        )
        present = a_hat == coarse
        local = true_bin - coarse * plan.M2 if present else 0
        sub, _, qs = search_block(
            cfg.model, plan.M2, plan.N2, plan.q2, alpha * plan.q2, (local + 0.5) / plan.M2,
            _seed(cfg.seed, t, rnd, _CODEBOOK, 2), noise, scale=alpha, present=present,
        )
        worst_q = max(worst_q, float(qs.max()))
        got = a_hat * plan.M2 + sub
        x = np.full(plan.N3, int(got == true_bin), dtype=np.int8)
        y_val = sample_output(cfg.model, x, delta, noise)
        if not validation_test(y_val, cfg.model, delta, plan.threshold):
            erased += 1
            first = first or rnd == 0
            continue
        return TrialResult(
            got != true_bin, plan.block_length * (rnd + 1), rnd + 1, erased, first,
            maxima={"phase2_query_size": worst_q},
        )
    return TrialResult(
        True, plan.block_length * cfg.max_rounds, cfg.max_rounds, erased, first,
        {"gave_up": 1}, {"phase2_query_size": worst_q},
    )


# --- public runners -----------------------------------------------------------


def _check_rate(cfg: SearchConfig, N: int, limit: float, what: str):
    rate = math.log2(cfg.M) / N
    if rate >= limit:
        raise ConfigError(f"{what} rate {rate:.6g} is not below the scheme maximum {limit:.6g}")


def run_nonadaptive(cfg: SearchConfig, check_rate: bool = False) -> SimReport:
    """Fresh random codebook per trial, ML decoding at ``P_q``, error iff wrong bin."""
    if check_rate:
        _check_rate(cfg, cfg.block_N, cfg.optimum.value, "search")
    tally = run_trials(_trial_nonadaptive, cfg, cfg.trials, cfg.threads)
    return SimReport.from_tally(tally, "nonadaptive", cfg.block_N, cfg.echo())


def run_forney(cfg: SearchConfig, check_rate: bool = False) -> SimReport:
    """Decision-feedback blocks repeated until one is not erased."""
    if check_rate:
        _check_rate(cfg, cfg.block_N, cfg.optimum.value, "search")
    tally = run_trials(_trial_forney, cfg, cfg.trials, cfg.threads)
    return SimReport.from_tally(tally, "forney", cfg.block_N, cfg.echo())


def run_yamamoto_itoh(cfg: SearchConfig, check_rate: bool = False) -> SimReport:
    """Search for ``(1-lambda)N`` queries, validate the decoded bin for ``lambda N``."""
    N1, L = yi_split(cfg)
    if N1 < 1:
        raise ConfigError("Yamamoto-Itoh search phase is empty")
    if check_rate:
        _check_rate(cfg, N1, cfg.optimum.value, "search-phase")
    tally = run_trials(_trial_yi, cfg, cfg.trials, cfg.threads)
    rep = SimReport.from_tally(tally, "yamamoto-itoh", N1 + L, cfg.echo())
    rep.extra["search_length"] = N1
    rep.extra["validation_length"] = L
    return rep


def run_two_phase(cfg: SearchConfig) -> SimReport:
    """Coarse search to ``alpha``, zoomed search to ``delta``, validation, restart on erase."""
    plan = two_phase_plan(cfg)
    tally = run_trials(_trial_two_phase, (cfg, plan), cfg.trials, cfg.threads)
    rep = SimReport.from_tally(tally, "two-phase", plan.block_length, cfg.echo())
    rep.extra.update(
        {
            "N1": plan.N1, "N2": plan.N2, "N3": plan.N3,
            "q1": plan.q1, "q2": plan.q2, "threshold": plan.threshold,
            "phase2_max_rate": plan.phase2_max_rate,
            "targeting_rate": math.log2(cfg.M) / rep.mean_stopping_time,
        }
    )
    return rep


RUNNERS = {
    "nonadaptive": run_nonadaptive,
    "forney": run_forney,
    "yamamoto-itoh": run_yamamoto_itoh,
    "two-phase": run_two_phase,
}
