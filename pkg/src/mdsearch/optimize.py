"""Query-size optimisation of the targeting-rate functional.

``I_XY(q, q)`` is not concave in ``q`` once the noise depends on the query
size, so the optimiser grids the whole of ``(0, 1/2]`` before polishing the
best cell.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .channels import LINEAR_BSC, ChannelModel
from .infotheory import binary_entropy, golden_section_max, mi_batch, mutual_information

Q_MAX = 0.5


@dataclass(frozen=True)
class OptimumReport:
    q_star: float
    value: float
    grid_resolution: float
    refined: bool
    boundary_hit: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "OptimumReport":
        return cls(**json.loads(text))


def _query_grid(grid_step: float, q_max: float = Q_MAX):
    n = int(math.floor(q_max / grid_step + 1e-9))
    grid = grid_step * np.arange(1, n + 1)
    if q_max - grid[-1] > 1e-12:
        grid = np.append(grid, q_max)
    return grid


def optimal_query_size(model: ChannelModel, grid_step: float = 1e-3) -> OptimumReport:
    """Maximise ``I_XY(q, q)`` over ``(0, 1/2]``.

    Exhaustive grid at ``grid_step`` (ties go to the smaller ``q``), then
    golden-section search over the two cells around the grid winner. The
    refined point replaces the grid point only if strictly better, so a
    maximum on the right edge stays exactly at 1/2.
    """
    if not 0 < grid_step <= 1e-2:
        raise ValueError("grid_step must lie in (0, 1e-2]")
    grid = _query_grid(grid_step)
    vals = mi_batch(grid, grid, model)
    i = int(np.argmax(vals))
    q_best, v_best = float(grid[i]), float(vals[i])
    boundary = i == len(grid) - 1
    lo = float(grid[i - 1]) if i > 0 else 0.5 * float(grid[0])
    hi = float(grid[min(i + 1, len(grid) - 1)])
    refined = False
    if hi > lo:
        x, v = golden_section_max(lambda t: mutual_information(t, t, model), lo, hi, tol=1e-12)
        if v > v_best:
            q_best, v_best, refined = x, v, True
    return OptimumReport(q_best, v_best, grid_step, refined, boundary_hit=boundary)


def capacity_batch(model: ChannelModel, qs, iters: int = 64):
    """Capacity ``C(q) = max_p I_XY(p, q)`` for an array of query sizes."""
    return _capacity_batch(model, np.asarray(qs, dtype=float), iters)[0]


def _capacity_batch(model, qs, iters=64):
    if model.variant == LINEAR_BSC:
        eps = model.a * qs + model.b
        return 1.0 - binary_entropy(eps), np.full(qs.shape, 0.5)
    # golden section in p, run in lock-step for every q; I is concave in p
    invphi = (math.sqrt(5) - 1) / 2
    a = np.zeros_like(qs)
    b = np.ones_like(qs)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = mi_batch(c, qs, model)
    fd = mi_batch(d, qs, model)
    for _ in range(iters):
        left = fc >= fd
        a, b = np.where(left, a, c), np.where(left, d, b)
        c_new = b - invphi * (b - a)
        d_new = a + invphi * (b - a)
        c, d = np.where(left, c_new, d), np.where(left, c, d_new)
        fc, fd = (
            np.where(left, mi_batch(c_new, qs, model), fd),
            np.where(left, fc, mi_batch(d_new, qs, model)),
        )
    p = 0.5 * (a + b)
    return mi_batch(p, qs, model), p


def capacity(model: ChannelModel, q: float, return_p: bool = False):
    """``C(q)``; closed form ``1 - h2(p(q))`` for the BSC."""
    if not 0 <= q <= 1:
        raise ValueError("query size must lie in [0, 1]")
    cap, p = _capacity_batch(model, np.array([float(q)]))
    return (float(cap[0]), float(p[0])) if return_p else float(cap[0])


def mi_curve(model: ChannelModel, grid_step: float = 1e-3, q_max: float = Q_MAX):
    """``[(q, I_XY(q, q))]`` on ``0, grid_step, ..., q_max``."""
    n = int(round(q_max / grid_step))
    qs = np.linspace(0.0, q_max, n + 1)
    vals = mi_batch(qs, qs, model)
    return [(float(q), float(v)) for q, v in zip(qs, vals)]


def curve_to_csv(curve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["q", "mi_bits"])
    for q, v in curve:
        w.writerow([f"{q:.12g}", f"{v:.12g}"])
    return buf.getvalue()


def phase2_functional(model: ChannelModel, alpha: float, grid_step: float = 1e-3):
    """``max_q I_XY(q, alpha*q)`` over ``q in (0, 1]`` with its maximiser.

    This is the zoomed-in phase's rate limit: queries restricted to an
    ``alpha``-interval see the channel at ``alpha*q`` while the input
    prior stays ``q``.
    """
    grid = _query_grid(grid_step, 1.0)
    vals = mi_batch(grid, alpha * grid, model)
    i = int(np.argmax(vals))
    lo = float(grid[i - 1]) if i > 0 else 0.0
    hi = float(grid[min(i + 1, len(grid) - 1)])
    x, v = golden_section_max(lambda t: float(mi_batch(t, alpha * t, model)), lo, hi, tol=1e-12)
    if v > vals[i]:
        return x, v
    return float(grid[i]), float(vals[i])
