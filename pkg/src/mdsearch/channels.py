"""Measurement-dependent observation channels.

Two families are supported, both binary-input and indexed by the query
size ``q`` (the measure of the probed region):

* ``linear_bsc``: the hit/miss bit is flipped with probability ``a*q + b``.
* ``gaussian_pair``: a hit gives ``N(mu, 1 + a_var*q)``, a miss gives
  ``N(0, 2 + b_var*q)`` (second argument is the variance).

All logarithms are base 2. The linear BSC is validated on the search
domain ``q in [0, 1/2]``; larger query sizes can still be sampled.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

LINEAR_BSC = "linear_bsc"
GAUSSIAN_PAIR = "gaussian_pair"
VARIANTS = (LINEAR_BSC, GAUSSIAN_PAIR)

_LN2 = math.log(2.0)
MONOTONE_GRID = np.linspace(0.0, 1.0, 100)


class ChannelError(ValueError):
    """Invalid channel parameterisation."""


class MonotonicityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ChannelModel:
    """Immutable description of a query-size dependent channel.

    Use :meth:`linear_bsc` or :meth:`gaussian_pair` rather than the raw
    constructor. With ``require_monotone`` (the default) the model is
    rejected unless both the capacity and the hit/miss divergence are
    non-increasing in ``q`` on a 100-point grid; switching it off keeps the
    model but emits a :class:`MonotonicityWarning` and sets ``monotone``
    to False.
    """

    variant: str
    a: float = 0.0
    b: float = 0.0
    mu: float = 0.0
    a_var: float = 0.0
    b_var: float = 0.0
    require_monotone: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ChannelError(f"unknown channel variant {self.variant!r}")
        if self.variant == LINEAR_BSC:
            if self.a < 0 or self.b < 0:
                raise ChannelError("linear_bsc needs a >= 0 and b >= 0")
            # p is affine in q, so the endpoints bound it. Searches only need
            # q <= 1/2 (a larger query is its complement's mirror); past 1/2
            # the law only has to remain a probability.
            if self.b + 0.5 * self.a >= 0.5:
                raise ChannelError(
                    f"crossover a*q+b reaches {self.b + 0.5 * self.a:g} >= 1/2 on [0, 1/2]"
                )
            if self.b + self.a > 1:
                raise ChannelError("crossover a*q+b exceeds 1 on [0, 1]")
        else:
            if self.a_var > self.b_var:
                raise ChannelError("gaussian_pair needs a_var <= b_var")
            if min(1.0, 1.0 + self.a_var) <= 0 or min(2.0, 2.0 + self.b_var) <= 0:
                raise ChannelError("gaussian_pair variances must stay positive on [0, 1]")
        object.__setattr__(self, "monotone", _check_monotone(self))
        if not self.monotone:
            msg = f"{self.label()} gets better as the query grows (capacity or C1 increases in q)"
            if self.require_monotone:
                raise ChannelError(msg)
            warnings.warn(msg, MonotonicityWarning, stacklevel=3)

    @classmethod
    def linear_bsc(cls, a: float, b: float, require_monotone: bool = True) -> "ChannelModel":
        return cls(LINEAR_BSC, a=float(a), b=float(b), require_monotone=require_monotone)

    @classmethod
    def gaussian_pair(
        cls, mu: float, a_var: float = 0.0, b_var: float = 0.0, require_monotone: bool = True
    ) -> "ChannelModel":
        return cls(
            GAUSSIAN_PAIR,
            mu=float(mu),
            a_var=float(a_var),
            b_var=float(b_var),
            require_monotone=require_monotone,
        )

    @property
    def is_discrete(self) -> bool:
        return self.variant == LINEAR_BSC

    def label(self) -> str:
        if self.variant == LINEAR_BSC:
            return f"linear_bsc(a={self.a:g}, b={self.b:g})"
        return f"gaussian_pair(mu={self.mu:g}, a_var={self.a_var:g}, b_var={self.b_var:g})"

    def to_dict(self) -> dict:
        d = asdict(self)
        keep = ("a", "b") if self.variant == LINEAR_BSC else ("mu", "a_var", "b_var")
        out = {"variant": self.variant}
        out.update({k: d[k] for k in keep})
        if not self.require_monotone:
            out["require_monotone"] = False
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelModel":
        d = dict(d)
        variant = d.pop("variant", None)
        if variant not in VARIANTS:
            raise ChannelError(f"unknown channel variant {variant!r}")
        allowed = {"a", "b"} if variant == LINEAR_BSC else {"mu", "a_var", "b_var"}
        allowed.add("require_monotone")
        extra = set(d) - allowed
        if extra:
            raise ChannelError(f"unexpected keys for {variant}: {sorted(extra)}")
        return cls(variant, **d)


def _check_monotone(model: ChannelModel) -> bool:
    if model.variant == LINEAR_BSC:
        # p(q) is non-decreasing and below 1/2, so both C and C1 degrade
        return True
    from .optimize import capacity_batch

    c1 = divergence_c1(model, MONOTONE_GRID)
    cap = capacity_batch(model, MONOTONE_GRID)
    tol = 1e-7
    return bool(np.all(np.diff(c1) <= tol) and np.all(np.diff(cap) <= tol))


def _check_q(q):
    q = np.asarray(q, dtype=float)
    if np.any((q < 0) | (q > 1)):
        raise ValueError("query size must lie in [0, 1]")
    return q


def crossover_prob(model: ChannelModel, q):
    """Flip probability ``a*q + b`` of a linear BSC at query size ``q``.

    Raises :class:`ChannelError` when the result is not in ``[0, 1/2)``.
    """
    if model.variant != LINEAR_BSC:
        raise ChannelError("crossover_prob needs a linear_bsc model")
    q = _check_q(q)
    p = model.a * q + model.b
    if np.any((p < 0) | (p >= 0.5)):
        raise ChannelError("crossover probability outside [0, 1/2)")
    return float(p) if p.ndim == 0 else p


def gaussian_params(model: ChannelModel, x, q):
    """Mean and variance of the output given input bit(s) ``x``."""
    x = np.asarray(x)
    q = np.asarray(q, dtype=float)
    hit = x == 1
    mean = np.where(hit, model.mu, 0.0)
    var = np.where(hit, 1.0 + model.a_var * q, 2.0 + model.b_var * q)
    return mean, var


def sample_output(model: ChannelModel, x, q, rng: np.random.Generator):
    """Draw observations for input bit(s) ``x`` probed with query size(s) ``q``.

    Broadcasts over ``x`` and ``q``. Returns int8 bits for the BSC and
    floats for the Gaussian pair.
    """
    q = _check_q(q)
    x = np.asarray(x)
    shape = np.broadcast_shapes(x.shape, q.shape)
    if model.variant == LINEAR_BSC:
        p = model.a * q + model.b
        flips = rng.random(shape) < p
        y = np.bitwise_xor(np.broadcast_to(x, shape).astype(np.int8), flips.astype(np.int8))
    else:
        mean, var = gaussian_params(model, x, q)
        y = mean + np.sqrt(var) * rng.standard_normal(shape)
    return y[()] if y.ndim == 0 else y


def log_likelihood(model: ChannelModel, y, x, q):
    """``log2 P_q(y|x)``; a log-density for the Gaussian pair.

    Broadcasts over all three arguments. A clean BSC (p = 0) yields
    ``-inf`` for mismatched outputs.
    """
    q = np.asarray(q, dtype=float)
    x = np.asarray(x)
    y = np.asarray(y)
    if model.variant == LINEAR_BSC:
        p = model.a * q + model.b
        with np.errstate(divide="ignore"):
            out = np.where(y == x, np.log2(1.0 - p), np.log2(p))
    else:
        mean, var = gaussian_params(model, x, q)
        out = (-0.5 * np.log(2 * np.pi * var) - (y - mean) ** 2 / (2 * var)) / _LN2
    return float(out) if out.ndim == 0 else out


def divergence_c1(model: ChannelModel, q):
    """``C1(q) = D(P_q(.|1) || P_q(.|0))`` in bits, closed form.

    Infinite for a clean BSC.
    """
    q = _check_q(q)
    if model.variant == LINEAR_BSC:
        p = model.a * q + model.b
        with np.errstate(divide="ignore"):
            out = (1.0 - 2.0 * p) * (np.log2(1.0 - p) - np.log2(p))
    else:
        m1, v1 = gaussian_params(model, 1, q)
        m0, v0 = gaussian_params(model, 0, q)
        out = 0.5 * (np.log(v0 / v1) + (v1 + (m1 - m0) ** 2) / v0 - 1.0) / _LN2
    return float(out) if np.ndim(out) == 0 else out
