"""Square-QAM constellations as a pair of Gray-coded PAM alphabets.

An M-QAM symbol is two independent real PAM symbols (in-phase and
quadrature), each drawn from the odd-integer alphabet
{-(sqrt(M)-1), ..., -1, 1, ..., sqrt(M)-1}. All detection in this
package runs on the stacked real model, so the constellation API is
expressed entirely in terms of the real PAM alphabet.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

SUPPORTED_ORDERS = (4, 16, 64)

MODULATION_NAMES = {"qpsk": 4, "16qam": 16, "64qam": 64}


@dataclass(frozen=True)
class Constellation:
    """A square-QAM constellation viewed per real dimension.

    Attributes
    ----------
    order : int
        QAM constellation size M (4, 16 or 64).
    alphabet : np.ndarray
        The sqrt(M) PAM levels, strictly increasing odd integers
        symmetric about zero.
    bits_per_pam : int
        log2(sqrt(M)) bits carried by one real dimension.
    symbol_energy : float
        Average complex-symbol energy, 2 * mean(alphabet**2).
    """

    order: int
    alphabet: np.ndarray
    bits_per_pam: int
    symbol_energy: float
    # Gray codeword carried by level i is _codewords[i]; _level_of[codeword]
    # inverts it. Adjacent levels differ in exactly one bit.
    _codewords: np.ndarray = field(repr=False, default=None)
    _level_of: np.ndarray = field(repr=False, default=None)

    @property
    def m(self):
        """Number of PAM levels per real dimension, sqrt(order)."""
        return len(self.alphabet)

    def map_bits(self, bits):
        """Map a bit vector to real PAM symbols, Gray-coded per dimension.

        ``bits`` must have length divisible by ``bits_per_pam``; each
        consecutive group of ``bits_per_pam`` bits (MSB first) selects one
        alphabet level.
        """
        bits = np.asarray(bits, dtype=np.int64).ravel()
        if bits.size % self.bits_per_pam:
            raise ValueError(
                f"bit vector length {bits.size} not divisible by {self.bits_per_pam}"
            )
        if bits.size and (bits.min() < 0 or bits.max() > 1):
            raise ValueError("bit vector entries must be 0 or 1")
        groups = bits.reshape(-1, self.bits_per_pam)
        weights = 1 << np.arange(self.bits_per_pam - 1, -1, -1)
        codes = groups @ weights
        return self.alphabet[self._level_of[codes]]

    def demap_symbols(self, symbols):
        """Exact inverse of :meth:`map_bits`; every symbol must be in the alphabet."""
        symbols = np.asarray(symbols, dtype=float).ravel()
        levels = np.searchsorted(self.alphabet, symbols)
        if levels.max(initial=0) >= self.m or not np.all(
            self.alphabet[np.clip(levels, 0, self.m - 1)] == symbols
        ):
            raise ValueError("symbol vector contains values outside the alphabet")
        codes = self._codewords[levels]
        shifts = np.arange(self.bits_per_pam - 1, -1, -1)
        return ((codes[:, None] >> shifts[None, :]) & 1).ravel()

    def quantize(self, values):
        """Round values to the nearest alphabet level, ties toward the smaller level.

        Accepts a scalar or an array; returns the same shape.
        """
        values = np.asarray(values, dtype=float)
        if not np.isfinite(values).all():
            raise ValueError("cannot quantize non-finite values")
        # argmin returns the first (smaller) level on exact midpoint ties
        idx = np.argmin(np.abs(values[..., None] - self.alphabet), axis=-1)
        out = self.alphabet[idx]
        return out if values.ndim else float(out)


@lru_cache(maxsize=None)
def make_constellation(order):
    """Build the :class:`Constellation` for M-QAM with ``order`` in {4, 16, 64}.

    Instances are cached and immutable (their arrays are read-only), so
    repeated calls share one object.
    """
    if order not in SUPPORTED_ORDERS:
        raise ValueError(
            f"unsupported modulation order {order!r}; expected one of {SUPPORTED_ORDERS}"
        )
    m = int(round(np.sqrt(order)))
    alphabet = np.arange(-(m - 1), m, 2, dtype=float)
    levels = np.arange(m)
    codewords = levels ^ (levels >> 1)  # binary-reflected Gray code
    level_of = np.argsort(codewords)
    for arr in (alphabet, codewords, level_of):
        arr.setflags(write=False)
    return Constellation(
        order=order,
        alphabet=alphabet,
        bits_per_pam=int(np.log2(m)),
        symbol_energy=float(2.0 * np.mean(alphabet**2)),
        _codewords=codewords,
        _level_of=level_of,
    )
