"""Random query codebooks.

Row ``m`` of an ``M x N`` codebook is the codeword of sensor ``m`` (the
``m``-th of ``M`` equal subintervals of the unit circle); column ``n`` is the
``n``-th query. The dither is stored as a real number in ``[0, 1)`` but is
applied as a cyclic shift by ``floor(dither * M)`` whole sensors, so query
sets stay unions of sensors. Indices are 0-based throughout.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .infotheory import kl_bernoulli


def make_rng(*key: int) -> np.random.Generator:
    """Counter-based generator addressed by an integer key tuple."""
    seq = np.random.SeedSequence([int(k) & 0xFFFFFFFFFFFFFFFF for k in key])
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True, eq=False)
class Codebook:
    M: int
    N: int
    prior: float
    seed: int
    dither: float
    bits: np.ndarray = field(repr=False)

    @property
    def shift(self) -> int:
        return int(math.floor(self.dither * self.M)) % self.M

    def column_weights(self) -> np.ndarray:
        return self.bits.sum(axis=0, dtype=np.int64)

    def query_sizes(self) -> np.ndarray:
        return self.column_weights() / self.M

    def descriptor(self) -> dict:
        return {"M": self.M, "N": self.N, "prior": self.prior, "seed": self.seed, "dither": self.dither}

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Codebook":
        d = json.loads(text)
        cb = generate(d["M"], d["N"], d["prior"], d["seed"])
        if cb.dither != d["dither"]:
            raise ValueError("descriptor dither does not match the regenerated codebook")
        return cb


def generate(M: int, N: int, q: float, seed: int) -> Codebook:
    """Draw an ``M x N`` Bern(q) codebook and its dither from one seeded stream.

    The same ``(M, N, q, seed)`` always reproduces the same bits and dither.
    """
    if M < 2 or N < 1:
        raise ValueError("need M >= 2 and N >= 1")
    if not 0 < q < 1:
        raise ValueError("codebook prior must lie in (0, 1)")
    rng = make_rng(seed)
    bits = (rng.random((M, N)) < q).astype(np.int8)
    dither = float(rng.random())
    bits.flags.writeable = False
    return Codebook(M, N, float(q), int(seed), dither, bits)


def from_bits(bits, prior: float = 0.5, dither: float = 0.0, seed: int = -1) -> Codebook:
    """Wrap an explicit bit matrix (tests and exhaustive checks)."""
    bits = np.array(bits, dtype=np.int8)
    if bits.ndim != 2:
        raise ValueError("bits must be a 2-D matrix")
    bits.flags.writeable = False
    M, N = bits.shape
    return Codebook(M, N, float(prior), int(seed), float(dither), bits)


def query_set(cb: Codebook, n: int) -> tuple[np.ndarray, float]:
    """Sensors probed by query ``n`` (0-based) and the query size ``q_n``."""
    if not 0 <= n < cb.N:
        raise IndexError(f"query index {n} outside [0, {cb.N})")
    rows = np.flatnonzero(cb.bits[:, n])
    sensors = np.sort((rows + cb.shift) % cb.M)
    return sensors, len(rows) / cb.M


def sensor_of(w: float, M: int) -> int:
    """Index of the sensor (one of ``M`` equal bins) containing ``w``."""
    return min(int(math.floor(w * M)), M - 1)


def encode_target(w: float, cb: Codebook) -> int:
    """Codebook row whose dithered sensor contains position ``w``."""
    if not 0 <= w < 1:
        raise ValueError("target position must lie in [0, 1)")
    return (sensor_of(w, cb.M) - cb.shift) % cb.M


def decode_position(row: int, cb: Codebook) -> float:
    """Centre of the sensor that codebook row ``row`` is mapped to."""
    return (((row + cb.shift) % cb.M) + 0.5) / cb.M


def concentration_event(cb: Codebook, eps: float) -> tuple[bool, float]:
    """Whether every column's weight fraction is within ``eps`` of the prior.

    Returns the flag and the worst deviation.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    dev = float(np.max(np.abs(cb.query_sizes() - cb.prior)))
    return dev <= eps, dev


def concentration_bound(M: int, N: int, q: float, eps: float) -> float:
    """Union-plus-Chernoff bound on a column leaving the ``eps``-band.

    ``N * 2**(-M * D(q + eps || q))``; a probability bound, so capped at 1.
    Returns 0 when ``q + eps >= 1`` (the upper tail is empty).
    """
    if q + eps >= 1:
        return 0.0
    return min(1.0, N * 2.0 ** (-M * kl_bernoulli(q + eps, q)))
