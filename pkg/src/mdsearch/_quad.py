"""Composite Gauss-Legendre quadrature with panel doubling.

Vectorised over a batch of integrals sharing the same number of panels, so
a whole grid of (p, q, rho) points costs one call.
"""

from __future__ import annotations

import numpy as np

_ORDER = 24
_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(_ORDER)


class QuadratureError(RuntimeError):
    """Raised when panel doubling stops before reaching the tolerance."""

    def __init__(self, achieved: float, tol: float):
        super().__init__(f"quadrature did not converge: achieved {achieved:.3e}, target {tol:.3e}")
        self.achieved = achieved
        self.tol = tol


def _composite(f, lo, hi, panels):
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    width = (hi - lo) / panels
    left = lo + width * np.arange(panels)
    x = left[..., None] + 0.5 * width[..., None] * (_NODES + 1.0)
    x = x.reshape(x.shape[:-2] + (-1,))
    vals = f(x)
    w = np.tile(_WEIGHTS, panels)
    return 0.5 * width[..., 0] * np.sum(vals * w, axis=-1)


def integrate(f, lo, hi, tol=1e-8, min_panels=4, max_panels=1024):
    """Integrate ``f`` over ``[lo, hi]`` elementwise.

    ``f`` receives an array of abscissae with a trailing node axis appended
    to the broadcast shape of ``lo``/``hi`` and must return values of the
    same shape. Panels double until successive estimates agree to ``tol``
    (absolute, worst case over the batch).
    """
    panels = min_panels
    prev = _composite(f, lo, hi, panels)
    while panels < max_panels:
        panels *= 2
        cur = _composite(f, lo, hi, panels)
        err = float(np.max(np.abs(cur - prev))) if np.size(cur) else 0.0
        if err <= tol:
            return cur
        prev = cur
    raise QuadratureError(err, tol)
