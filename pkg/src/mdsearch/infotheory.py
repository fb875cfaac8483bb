"""Entropies, mutual information, Gallager functions and error exponents.

Everything is in bits. Functions that maximise over the Gallager parameter
``rho`` evaluate a uniform grid first and then polish the best grid cell
with golden-section search; grids for a given (channel, q, prior) are
cached because exponent curves re-use them for every rate.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _quad
from .channels import LINEAR_BSC, ChannelModel, divergence_c1, gaussian_params

_LN2 = math.log(2.0)
QUAD_TOL = 1e-8
SCHEMES = ("random_coding", "forney", "yamamoto_itoh", "two_phase_burnashev")


class RhoBoundaryWarning(UserWarning):
    """The Forney maximiser sits on the ``rho_max`` cap."""


def binary_entropy(p):
    """``h2(p)`` in bits with ``0 log 0 = 0``."""
    p = np.asarray(p, dtype=float)
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("binary_entropy needs p in [0, 1]")
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -p * np.log2(p) - (1 - p) * np.log2(1 - p)
    h = np.where((p == 0) | (p == 1), 0.0, h)
    return float(h) if h.ndim == 0 else h


def binary_convolution(p, eps):
    return p * (1 - eps) + (1 - p) * eps


def _gauss_log_pdf(y, mean, var):
    # natural log
    return -0.5 * np.log(2 * np.pi * var) - (y - mean) ** 2 / (2 * var)


def _gauss_range(model: ChannelModel, q):
    """Integration window: +-10 of the widest component's std around both means."""
    q = np.asarray(q, dtype=float)
    _, v1 = gaussian_params(model, 1, q)
    _, v0 = gaussian_params(model, 0, q)
    sd = np.sqrt(np.maximum(v1, v0))
    lo = min(0.0, model.mu) - 10 * sd
    hi = max(0.0, model.mu) + 10 * sd
    return lo, hi


def _gauss_entropy(var):
    return 0.5 * np.log2(2 * np.pi * math.e * var)


def _mixture_entropy(p, q, model: ChannelModel, tol=QUAD_TOL):
    p, q = np.broadcast_arrays(np.asarray(p, float), np.asarray(q, float))
    m1, v1 = gaussian_params(model, 1, q)
    m0, v0 = gaussian_params(model, 0, q)
    lo, hi = _gauss_range(model, q)

    def integrand(y):
        with np.errstate(divide="ignore"):
            l1 = np.log(p)[..., None] + _gauss_log_pdf(y, m1[..., None], v1[..., None])
            l0 = np.log1p(-p)[..., None] + _gauss_log_pdf(y, m0[..., None], v0[..., None])
        lf = np.logaddexp(l1, l0)
        return -np.exp(lf) * lf / _LN2

    return _quad.integrate(integrand, lo, hi, tol=tol)


def mi_batch(p, q, model: ChannelModel, tol=QUAD_TOL):
    """Vectorised ``I_XY(p, q)``; broadcasts ``p`` against ``q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any((p < 0) | (p > 1)) or np.any((q < 0) | (q > 1)):
        raise ValueError("mutual_information needs p, q in [0, 1]")
    if model.variant == LINEAR_BSC:
        eps = model.a * q + model.b
        out = binary_entropy(binary_convolution(p, eps)) - binary_entropy(eps)
    else:
        p, q = np.broadcast_arrays(p, q)
        _, v1 = gaussian_params(model, 1, q)
        _, v0 = gaussian_params(model, 0, q)
        h_y = _mixture_entropy(p, q, model, tol=tol)
        out = h_y - p * _gauss_entropy(v1) - (1 - p) * _gauss_entropy(v0)
    out = np.where((p == 0) | (p == 1), 0.0, np.maximum(out, 0.0))
    return out


def mutual_information(p_input: float, q_size: float, model: ChannelModel) -> float:
    """``I(X;Y)`` for ``X ~ Bern(p_input)`` through ``P_{q_size}``.

    Closed form for the BSC; the Gaussian pair integrates the mixture
    output entropy numerically and raises
    :class:`~mdsearch._quad.QuadratureError` if that fails to converge.
    """
    return float(mi_batch(p_input, q_size, model))


def _bsc_e0(rho, eps, prior):
    s = 1.0 / (1.0 + rho)
    with np.errstate(divide="ignore"):
        good = (1 - eps) ** s
        bad = np.where(eps > 0, eps**s, 0.0)
    y1 = (prior * good + (1 - prior) * bad) ** (1 + rho)
    y0 = (prior * bad + (1 - prior) * good) ** (1 + rho)
    return -np.log2(y1 + y0)


def _gauss_e0(rho, q, prior, model, tol=QUAD_TOL):
    rho = np.asarray(rho, dtype=float)
    m1, v1 = gaussian_params(model, 1, q)
    m0, v0 = gaussian_params(model, 0, q)
    lo, hi = _gauss_range(model, q)
    lo = np.broadcast_to(lo, rho.shape)
    hi = np.broadcast_to(hi, rho.shape)
    s = (1.0 / (1.0 + rho))[..., None]
    with np.errstate(divide="ignore"):
        lp1, lp0 = math.log(prior) if prior > 0 else -np.inf, math.log1p(-prior) if prior < 1 else -np.inf

    def integrand(y):
        l1 = lp1 + s * _gauss_log_pdf(y, m1, v1)
        l0 = lp0 + s * _gauss_log_pdf(y, m0, v0)
        return np.exp((1 + rho[..., None]) * np.logaddexp(l1, l0))

    return -np.log2(_quad.integrate(integrand, lo, hi, tol=tol))


def e0_batch(rho, q: float, prior: float, model: ChannelModel, tol=QUAD_TOL):
    """Vectorised Gallager function over an array of ``rho``."""
    rho = np.asarray(rho, dtype=float)
    if model.variant == LINEAR_BSC:
        return _bsc_e0(rho, model.a * q + model.b, prior)
    out = np.empty(rho.shape)
    flat = rho.ravel()
    res = out.ravel()
    chunk = 512
    for i in range(0, flat.size, chunk):
        res[i : i + chunk] = _gauss_e0(flat[i : i + chunk], q, prior, model, tol=tol)
    return res.reshape(rho.shape)


def gallager_e0(rho: float, q: float, prior: float, model: ChannelModel) -> float:
    """Gallager's ``E0(rho)`` for input ``Bern(prior)`` through ``P_q``."""
    if not 0 <= rho <= 1:
        raise ValueError("gallager_e0 needs rho in [0, 1]")
    if not 0 <= prior <= 1:
        raise ValueError("prior must lie in [0, 1]")
    return float(e0_batch(np.array([rho]), q, prior, model)[0])


def golden_section_max(f, lo, hi, tol=1e-10, max_iter=200):
    """Maximise a unimodal scalar function on ``[lo, hi]``; returns (x, f(x))."""
    invphi = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _grid_then_golden(grid, values, f):
    """Best grid point, polished by golden section on its neighbouring cells."""
    i = int(np.argmax(values))
    best_x, best_v = float(grid[i]), float(values[i])
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        x, v = golden_section_max(f, float(lo), float(hi))
        if v > best_v:
            best_x, best_v = x, v
    return best_x, best_v


@lru_cache(maxsize=64)
def _e0_grid(q, prior, model, step):
    grid = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    return grid, e0_batch(grid, q, prior, model)


def random_coding_exponent(
    R: float, q: float, prior: float, model: ChannelModel, grid_step: float = 1e-4
) -> float:
    """``max_{0<=rho<=1} E0(rho) - rho*R``, clamped at zero."""
    if R < 0:
        raise ValueError("rate must be non-negative")
    grid, e0 = _e0_grid(float(q), float(prior), model, grid_step)
    f = lambda r: float(e0_batch(np.array([r]), q, prior, model)[0]) - r * R
    _, best = _grid_then_golden(grid, e0 - grid * R, f)
    return max(best, 0.0)


def _cond_entropy(q, prior, model):
    """``H(Y|X)`` for the channel at ``q`` (differential for the Gaussian pair)."""
    if model.variant == LINEAR_BSC:
        return binary_entropy(model.a * q + model.b)
    _, v1 = gaussian_params(model, 1, q)
    _, v0 = gaussian_params(model, 0, q)
    return prior * _gauss_entropy(v1) + (1 - prior) * _gauss_entropy(v0)


def _forney_e0_bsc(rho, eps, prior):
    s = 1.0 / rho
    py1 = binary_convolution(prior, eps)
    with np.errstate(divide="ignore"):
        bad = np.where(eps > 0, eps**s, 0.0)
    inner1 = prior * (1 - eps) ** s + (1 - prior) * bad
    inner0 = prior * bad + (1 - prior) * (1 - eps) ** s
    return -binary_entropy(eps) - rho * (py1 * np.log2(inner1) + (1 - py1) * np.log2(inner0))


def _forney_e0_gauss(rho, q, prior, model, tol=QUAD_TOL):
    rho = np.asarray(rho, dtype=float)
    m1, v1 = gaussian_params(model, 1, q)
    m0, v0 = gaussian_params(model, 0, q)
    lo, hi = _gauss_range(model, q)
    lo = np.broadcast_to(lo, rho.shape)
    hi = np.broadcast_to(hi, rho.shape)
    s = (1.0 / rho)[..., None]
    with np.errstate(divide="ignore"):
        lp1, lp0 = math.log(prior) if prior > 0 else -np.inf, math.log1p(-prior) if prior < 1 else -np.inf

    def integrand(y):
        f1 = _gauss_log_pdf(y, m1, v1)
        f0 = _gauss_log_pdf(y, m0, v0)
        py = np.exp(np.logaddexp(lp1 + f1, lp0 + f0))
        inner = np.logaddexp(lp1 + s * f1, lp0 + s * f0) / _LN2
        return py * inner

    return -_cond_entropy(q, prior, model) - rho * _quad.integrate(integrand, lo, hi, tol=tol)


def forney_e0_batch(rho, q: float, prior: float, model: ChannelModel):
    """The decision-feedback ``E0(rho)`` used by :func:`forney_exponent`.

    ``sum_x Q(x) int P(y|x) [log P(y|x) - rho log sum_x' Q(x') P(y|x')^(1/rho)] dy``
    for ``rho >= 1``. At ``rho = 1`` this equals the mutual information.
    """
    rho = np.asarray(rho, dtype=float)
    if model.variant == LINEAR_BSC:
        return _forney_e0_bsc(rho, model.a * q + model.b, prior)
    out = np.empty(rho.shape)
    flat, res = rho.ravel(), out.ravel()
    for i in range(0, flat.size, 512):
        res[i : i + 512] = _forney_e0_gauss(flat[i : i + 512], q, prior, model)
    return res.reshape(rho.shape)


@lru_cache(maxsize=64)
def _forney_grid(q, model, rho_max, step):
    grid = np.linspace(1.0, rho_max, int(round((rho_max - 1.0) / step)) + 1)
    return grid, forney_e0_batch(grid, q, q, model)


def forney_exponent(
    R: float,
    q_star: float,
    model: ChannelModel,
    rho_max: float = 20.0,
    grid_step: float = 1e-4,
    return_rho: bool = False,
):
    """Decision-feedback (erasure) exponent ``max_{rho>=1} E0(rho) - rho*R``.

    Input prior and channel are both taken at ``q_star``. The search runs
    over ``[1, rho_max]``; a :class:`RhoBoundaryWarning` is issued when
    the maximiser lands on the cap (always the case at ``R = 0``, where
    the objective keeps increasing). Clamped at zero for rates at or above
    ``I_XY(q_star, q_star)``.
    """
    if R < 0:
        raise ValueError("rate must be non-negative")
    grid, e0 = _forney_grid(float(q_star), model, float(rho_max), grid_step)
    f = lambda r: float(forney_e0_batch(np.array([r]), q_star, q_star, model)[0]) - r * R
    rho, best = _grid_then_golden(grid, e0 - grid * R, f)
    if rho >= rho_max - grid_step:
        warnings.warn(
            f"forney maximiser hit rho_max={rho_max:g} at R={R:g}", RhoBoundaryWarning, stacklevel=2
        )
    best = max(best, 0.0)
    return (best, rho) if return_rho else best


def yi_exponent(R: float, q_star: float, validation_q: float, model: ChannelModel) -> float:
    """Yamamoto-Itoh validation exponent ``C1(validation_q) * (1 - R / I(q*, q*))``.

    ``validation_q = 0`` validates over the best channel; ``validation_q =
    q_star`` over the search channel. Zero for ``R >= I(q*, q*)``.
    """
    if R < 0:
        raise ValueError("rate must be non-negative")
    i_star = mutual_information(q_star, q_star, model)
    return max(divergence_c1(model, validation_q) * (1 - R / i_star), 0.0)


def burnashev_line(R: float, q: float, model: ChannelModel) -> float:
    """``C1(q) * (1 - R / C(q))``: the feedback exponent of the fixed channel ``P_q``."""
    from .optimize import capacity

    if R < 0:
        raise ValueError("rate must be non-negative")
    return max(divergence_c1(model, q) * (1 - R / capacity(model, q)), 0.0)


def two_phase_tradeoff(R: float, model: ChannelModel) -> float:
    """Adaptive rate-reliability tradeoff ``C1(0) * (1 - R / C(0))``."""
    return burnashev_line(R, 0.0, model)


def moving_rate_bounds(q: float, v_max: float, model: ChannelModel) -> tuple[float, float]:
    """(achievable, converse) targeting rates for a target of unknown velocity."""
    if not 0 < v_max <= 0.5:
        raise ValueError("v_max must lie in (0, 1/2]")
    half = 0.5 * mutual_information(q, q, model)
    return half * (1 - 2 * v_max), half


def kl_bernoulli(a, b):
    """``D(Bern(a) || Bern(b))`` in bits."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(a > 0, a * np.log2(a / b), 0.0)
        t0 = np.where(a < 1, (1 - a) * np.log2((1 - a) / (1 - b)), 0.0)
    out = t1 + t0
    return float(out) if out.ndim == 0 else out


@dataclass
class ExponentCurve:
    """Exponent values over a rate grid for one scheme."""

    rate_grid: list[float]
    exponent_values: list[float]
    scheme_tag: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scheme_tag not in SCHEMES:
            raise ValueError(f"unknown scheme tag {self.scheme_tag!r}")
        if len(self.rate_grid) != len(self.exponent_values):
            raise ValueError("rate and exponent grids differ in length")
        if any(v < 0 for v in self.exponent_values):
            raise ValueError("exponents must be non-negative")
        # the zero clamp can leave -0.0 behind
        self.exponent_values = [float(v) + 0.0 for v in self.exponent_values]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rate", "exponent", "scheme_tag"])
        for r, e in zip(self.rate_grid, self.exponent_values):
            w.writerow([f"{r:.12g}", f"{e:.12g}", self.scheme_tag])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ExponentCurve":
        rows = list(csv.DictReader(io.StringIO(text)))
        tags = {r["scheme_tag"] for r in rows}
        if len(tags) != 1:
            raise ValueError("CSV holds more than one scheme")
        return cls(
            [float(r["rate"]) for r in rows], [float(r["exponent"]) for r in rows], tags.pop()
        )


def exponent_curve(scheme: str, rates, model: ChannelModel, q_star: float, **kw) -> ExponentCurve:
    """Evaluate one scheme's exponent on ``rates``."""
    rates = [float(r) for r in rates]
    if scheme == "random_coding":
        vals = [random_coding_exponent(r, q_star, q_star, model) for r in rates]
    elif scheme == "forney":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RhoBoundaryWarning)
            vals = [forney_exponent(r, q_star, model, rho_max=kw.get("rho_max", 20.0)) for r in rates]
    elif scheme == "yamamoto_itoh":
        vq = kw.get("validation_q", 0.0)
        vals = [yi_exponent(r, q_star, vq, model) for r in rates]
    elif scheme == "two_phase_burnashev":
        # channel_q = 0 is the adaptive tradeoff; channel_q = q* the fixed-channel bound
        cq = kw.get("channel_q", 0.0)
        vals = [burnashev_line(r, cq, model) for r in rates]
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return ExponentCurve(rates, vals, scheme, meta=dict(kw))
