"""Bit strings, the seeded random source, and the variation operators."""

from __future__ import annotations

import copy

import numpy as np

from . import _kernels as K


class BitString:
    """Immutable fixed-length bit string.

    Positions are numbered 1..n in traces and serialized text; Python indexing
    is 0-based like any other sequence.
    """

    __slots__ = ("_bits",)

    def __init__(self, bits) -> None:
        arr = np.array(bits, dtype=np.uint8, copy=True).reshape(-1)
        if arr.size == 0:
            raise ValueError("a BitString needs at least one bit")
        if np.any(arr > 1):
            raise ValueError("bits must be 0 or 1")
        arr.setflags(write=False)
        self._bits = arr

    @classmethod
    def from_str(cls, text: str) -> BitString:
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls(np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0"))

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> BitString:
        # trusted constructor for kernel output: no copy, no validation
        obj = cls.__new__(cls)
        arr.setflags(write=False)
        obj._bits = arr
        return obj

    @property
    def bits(self) -> np.ndarray:
        """Read-only ``uint8`` view of the bits."""
        return self._bits

    def __len__(self) -> int:
        return self._bits.shape[0]

    def __getitem__(self, i: int) -> int:
        return int(self._bits[i])

    def __iter__(self):
        return (int(b) for b in self._bits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return len(self) == len(other) and bool(np.array_equal(self._bits, other._bits))

    def __hash__(self) -> int:
        return hash(self._bits.tobytes())

    def __str__(self) -> str:
        return (self._bits + ord("0")).tobytes().decode("ascii")

    def __repr__(self) -> str:
        s = str(self)
        if len(s) > 40:
            s = s[:37] + "..."
        return f"BitString('{s}')"

    def count_ones(self) -> int:
        return int(self._bits.sum())


class RandomSource:
    """Deterministic random source backed by numpy's PCG64.

    The same seed gives the same draw sequence on every platform.  A source
    belongs to one run at a time; use :meth:`clone` to fork an identical copy.
    """

    def __init__(self, seed: int) -> None:
        if not 0 <= int(seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = int(seed)
        self.generator = np.random.Generator(np.random.PCG64(self.seed))

    def clone(self) -> RandomSource:
        other = RandomSource(self.seed)
        other.generator.bit_generator.state = copy.deepcopy(self.generator.bit_generator.state)
        return other

    def bit(self) -> int:
        return 1 if self.generator.random() < 0.5 else 0

    def random(self) -> float:
        return float(self.generator.random())

    def integer(self, low: int, high: int) -> int:
        """Uniform integer in ``[low, high)``."""
        return int(self.generator.integers(low, high))

    def bernoulli(self, p: float) -> bool:
        return bool(self.generator.random() < p)


def _check_same_length(x: BitString, y: BitString) -> None:
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")


def uniform_random(n: int, rng: RandomSource) -> BitString:
    if n < 1:
        raise ValueError("n must be positive")
    return BitString._wrap(K.uniform_bits(rng.generator, int(n)))


def complement(x: BitString) -> BitString:
    return BitString._wrap(1 - x.bits)


def hamming(x: BitString, y: BitString) -> int:
    _check_same_length(x, y)
    return int(np.count_nonzero(x.bits != y.bits))


def xor_mask(x: BitString, m: BitString) -> BitString:
    _check_same_length(x, m)
    return BitString._wrap(x.bits ^ m.bits)


def _flipped(x: BitString, flips: np.ndarray, nf: int) -> BitString:
    out = x.bits.copy()
    K.apply_flips(out, flips, nf)
    return BitString._wrap(out)


def standard_mutate(x: BitString, rate: float, rng: RandomSource) -> BitString:
    """Flip every bit independently with probability ``rate``."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"mutation rate must lie in (0, 1], got {rate}")
    flips = np.empty(len(x), dtype=np.int64)
    nf = K.mutation_flips(rng.generator, len(x), float(rate), flips)
    return _flipped(x, flips, nf)


def biased_crossover(x1: BitString, x2: BitString, p: float, rng: RandomSource) -> BitString:
    """Take each bit from ``x2`` with probability ``p``, otherwise from ``x1``.

    Only positions where the parents differ consume randomness.
    """
    _check_same_length(x1, x2)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"crossover bias must lie in [0, 1], got {p}")
    diff = np.flatnonzero(x1.bits != x2.bits).astype(np.int64)
    flips = np.empty(diff.shape[0], dtype=np.int64)
    nf = K.bernoulli_subset(rng.generator, diff, diff.shape[0], float(p), flips)
    return _flipped(x1, flips, nf)


def uniform_crossover(x1: BitString, x2: BitString, rng: RandomSource) -> BitString:
    return biased_crossover(x1, x2, 0.5, rng)
