"""Independent reference implementations used by the tests.

Nothing here imports the package's numerical code: entropies come from
explicit joint distributions, Gaussian integrals from scipy's adaptive
quadrature, and decoders from brute-force products of probabilities.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
from scipy import integrate


def h2(p):
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def bsc_mi(p_in, eps):
    """I(X;Y) from the joint table of a BSC(eps) with Bern(p_in) input."""
    joint = {
        (1, 1): p_in * (1 - eps), (1, 0): p_in * eps,
        (0, 1): (1 - p_in) * eps, (0, 0): (1 - p_in) * (1 - eps),
    }
    py = {y: joint[(1, y)] + joint[(0, y)] for y in (0, 1)}
    px = {1: p_in, 0: 1 - p_in}
    total = 0.0
    for (x, y), pj in joint.items():
        if pj > 0:
            total += pj * (math.log2(pj) - math.log2(px[x]) - math.log2(py[y]))
    return total


def bsc_e0(rho, eps, prior):
    """Gallager E0 by direct summation over the two outputs."""
    s = 1 / (1 + rho)
    P = {(0, 0): 1 - eps, (0, 1): eps, (1, 0): eps, (1, 1): 1 - eps}
    Q = {0: 1 - prior, 1: prior}
    tot = 0.0
    for y in (0, 1):
        inner = sum(Q[x] * P[(x, y)] ** s for x in (0, 1))
        tot += inner ** (1 + rho)
    return -math.log2(tot)


def npdf(y, mean, var):
    return math.exp(-((y - mean) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)


def gauss_params(mu, a_var, b_var, q):
    return (mu, 1 + a_var * q), (0.0, 2 + b_var * q)


def gauss_mi(p_in, q, mu, a_var=0.0, b_var=0.0):
    """I(X;Y) for the Gaussian pair via scipy.integrate.quad on the mixture."""
    (m1, v1), (m0, v0) = gauss_params(mu, a_var, b_var, q)

    def f(y):
        py = p_in * npdf(y, m1, v1) + (1 - p_in) * npdf(y, m0, v0)
        return -py * math.log2(py) if py > 0 else 0.0

    hy = integrate.quad(f, -60, 60, limit=400, epsabs=1e-12)[0]
    hyx = p_in * 0.5 * math.log2(2 * math.pi * math.e * v1) + (1 - p_in) * 0.5 * math.log2(
        2 * math.pi * math.e * v0
    )
    return hy - hyx


def gauss_e0(rho, q, prior, mu, a_var=0.0, b_var=0.0):
    (m1, v1), (m0, v0) = gauss_params(mu, a_var, b_var, q)
    s = 1 / (1 + rho)

    def f(y):
        return (prior * npdf(y, m1, v1) ** s + (1 - prior) * npdf(y, m0, v0) ** s) ** (1 + rho)

    return -math.log2(integrate.quad(f, -60, 60, limit=400, epsabs=1e-13)[0])


def bsc_rc_exponent_dense(R, eps, prior, points=10_001):
    """Random-coding exponent on a dense rho grid (no refinement)."""
    return max(0.0, max(bsc_e0(r, eps, prior) - r * R for r in np.linspace(0, 1, points)))


def bsc_forney_e0(rho, eps, prior):
    """Decision-feedback E0 written out term by term for a BSC."""
    P = {(0, 0): 1 - eps, (0, 1): eps, (1, 0): eps, (1, 1): 1 - eps}
    Q = {0: 1 - prior, 1: prior}
    tot = 0.0
    for x in (0, 1):
        for y in (0, 1):
            pxy = P[(x, y)]
            if pxy == 0:
                continue
            inner = sum(Q[x2] * P[(x2, y)] ** (1 / rho) for x2 in (0, 1))
            tot += Q[x] * pxy * (math.log2(pxy) - rho * math.log2(inner))
    return tot


def posterior_argmax(bits, y, eps):
    """Row maximising prod_n P(y_n | bits[m, n]) with a uniform row prior.

    Works with plain probabilities; first row wins ties up to 1e-12 relative.
    """
    best, best_m = -1.0, None
    for m, row in enumerate(bits):
        like = 1.0
        for b, yy in zip(row, y):
            like *= (1 - eps) if b == yy else eps
        if best_m is None or like > best * (1 + 1e-12):
            best, best_m = like, m
    return best_m


def all_outputs(N):
    return [np.array(t, dtype=np.int8) for t in itertools.product((0, 1), repeat=N)]


def oracle_paths(M, N, v_max):
    """Distinct start-0 paths keyed to the smallest velocity producing them.

    Every sensor crossing from a centred start happens at a multiple of
    ``1/(2 M L)`` with ``L = lcm(1..N-1)``, so probing the midpoints of
    that lattice (plus both ends) visits every path exactly.
    """
    L = math.lcm(*range(1, N)) if N > 1 else 1
    vs = [Fraction(-1) * Fraction(str(v_max)), Fraction(str(v_max))]
    jmax = math.floor(Fraction(str(v_max)) * 2 * M * L)
    vs += [Fraction(2 * j + 1, 4 * M * L) for j in range(-jmax - 1, jmax + 1)]
    out = {}
    for v in sorted(v for v in vs if abs(v) <= Fraction(str(v_max))):
        path = tuple(math.floor(Fraction(1, 2) + M * v * n) % M for n in range(N))
        out.setdefault(path, v)
    return out


def trajectory_posterior_argmax(bits, y, eps, paths):
    """Brute-force ML over explicit ``paths`` (list of index tuples)."""
    best, best_i = -1.0, None
    for i, path in enumerate(paths):
        like = 1.0
        for n, m in enumerate(path):
            like *= (1 - eps) if bits[m][n] == y[n] else eps
        if best_i is None or like > best * (1 + 1e-12):
            best, best_i = like, i
    return best_i
