"""Sortable array encodings of Pauli strings for vectorised closure.

Two layouts share one contract: a *store* array is 1-D, sorts in
``(x_mask, z_mask)`` order and supports ``np.unique``/``np.searchsorted``;
a *bits* array exposes the masks for XOR and popcount work.

* ``PackedCodec`` (L <= 32): store == bits == ``uint64`` key ``x << L | z``.
* ``WideCodec`` (L > 32): bits are ``(N, 2W)`` uint64 rows
  ``[x words (MS first), z words (MS first)]``; the store is a big-endian
  void view of those rows so byte order equals numeric order.
"""

from __future__ import annotations

import numpy as np

from .pauli import PauliString

_WORD = 64


def _popcount(a: np.ndarray) -> np.ndarray:
    c = np.bitwise_count(a)
    return c.sum(axis=1, dtype=np.int64) if c.ndim == 2 else c.astype(np.int64)


class PackedCodec:
    def __init__(self, num_sites: int):
        if num_sites > 32:
            raise ValueError("packed layout holds at most 32 sites")
        self.num_sites = num_sites
        self._shift = np.uint64(num_sites)
        self._low = np.uint64((1 << num_sites) - 1)

    def empty(self) -> np.ndarray:
        return np.empty(0, dtype=np.uint64)

    def encode(self, strings) -> np.ndarray:
        L = self.num_sites
        return np.array([(p.x_mask << L) | p.z_mask for p in strings], dtype=np.uint64)

    def decode(self, store: np.ndarray) -> list[PauliString]:
        L, low = self.num_sites, (1 << self.num_sites) - 1
        return [PauliString(L, k >> L, k & low) for k in map(int, store)]

    def to_bits(self, store: np.ndarray) -> np.ndarray:
        return store

    def from_bits(self, bits: np.ndarray) -> np.ndarray:
        return bits

    def split(self, bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return bits >> self._shift, bits & self._low

    def term(self, p: PauliString) -> tuple[np.uint64, np.uint64]:
        """XOR key of ``p`` and its symplectic partner (x and z halves swapped)."""
        L = self.num_sites
        return np.uint64((p.x_mask << L) | p.z_mask), np.uint64((p.z_mask << L) | p.x_mask)

    def anticommutes(self, bits: np.ndarray, partner) -> np.ndarray:
        return (np.bitwise_count(bits & partner) & 1).astype(bool)


class WideCodec:
    def __init__(self, num_sites: int):
        self.num_sites = num_sites
        self.words = -(-num_sites // _WORD)
        self._void = np.dtype(f"V{16 * self.words}")

    def empty(self) -> np.ndarray:
        return np.empty(0, dtype=self._void)

    def _mask_words(self, m: int) -> list[int]:
        W = self.words
        return [(m >> (_WORD * (W - 1 - w))) & 0xFFFFFFFFFFFFFFFF for w in range(W)]

    def _row(self, x: int, z: int) -> list[int]:
        return self._mask_words(x) + self._mask_words(z)

    def encode(self, strings) -> np.ndarray:
        rows = [self._row(p.x_mask, p.z_mask) for p in strings]
        bits = np.array(rows, dtype=np.uint64).reshape(len(rows), 2 * self.words)
        return self.from_bits(bits)

    def decode(self, store: np.ndarray) -> list[PauliString]:
        bits = self.to_bits(store)
        W, out = self.words, []
        for row in bits.tolist():
            x = z = 0
            for w in range(W):
                x = (x << _WORD) | row[w]
                z = (z << _WORD) | row[W + w]
            out.append(PauliString(self.num_sites, x, z))
        return out

    def to_bits(self, store: np.ndarray) -> np.ndarray:
        be = np.frombuffer(np.ascontiguousarray(store).tobytes(), dtype=">u8")
        return be.reshape(-1, 2 * self.words).astype(np.uint64)

    def from_bits(self, bits: np.ndarray) -> np.ndarray:
        return np.ascontiguousarray(bits.astype(">u8")).view(self._void).ravel()

    def split(self, bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return bits[:, : self.words], bits[:, self.words:]

    def term(self, p: PauliString) -> tuple[np.ndarray, np.ndarray]:
        return (np.array(self._row(p.x_mask, p.z_mask), dtype=np.uint64),
                np.array(self._row(p.z_mask, p.x_mask), dtype=np.uint64))

    def anticommutes(self, bits: np.ndarray, partner) -> np.ndarray:
        t = bits & partner
        # parity of a popcount sum == parity of the popcount of the XOR fold
        fold = t[:, 0].copy()
        for w in range(1, t.shape[1]):
            fold ^= t[:, w]
        return (np.bitwise_count(fold) & 1).astype(bool)


def codec_for(num_sites: int):
    return PackedCodec(num_sites) if num_sites <= 32 else WideCodec(num_sites)


def isin_sorted(query: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Membership of ``query`` items in the sorted 1-D store ``ref``."""
    if ref.size == 0 or query.size == 0:
        return np.zeros(query.shape[0], dtype=bool)
    idx = np.searchsorted(ref, query)
    np.minimum(idx, ref.size - 1, out=idx)
    return ref[idx] == query


def product_phases(codec, h: PauliString, bits: np.ndarray) -> np.ndarray:
    """Exponents ``k`` with ``h P = i**k R`` for every row ``P`` of ``bits``."""
    hx, hz = codec.split(codec.term(h)[0].reshape(1, -1) if bits.ndim == 2 else np.array([codec.term(h)[0]]))
    x, z = codec.split(bits)
    rx, rz = x ^ hx, z ^ hz
    k = (_popcount(hx & hz) + _popcount(x & z) + 2 * _popcount(hz & x) - _popcount(rx & rz))
    return k % 4
