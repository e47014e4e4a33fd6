"""Phase-exact Pauli string algebra on ``L`` qubits.

A Pauli string is stored as a pair of integer bit masks.  Site ``i`` (0-based
internally, 1-based in text) carries

* ``I`` if neither bit ``i`` of ``x_mask`` nor of ``z_mask`` is set,
* ``X`` if only the x bit is set,
* ``Z`` if only the z bit is set,
* ``Y`` if both are set.

No phase is stored on :class:`PauliString`; products and commutators return a
:class:`ScaledPauli` carrying ``i**phase_power`` and a magnitude.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = [
    "DimensionError",
    "PauliParseError",
    "PauliString",
    "ScaledPauli",
    "commutator",
    "commutes_with",
    "format_pauli",
    "identity",
    "multiply",
    "parse",
    "single",
]

_SYMBOLS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_TOKEN = re.compile(r"^([XYZ])(\d+)$")
_WORD = re.compile(r"^[IXYZ]+$")


class DimensionError(ValueError):
    """Operands live on different numbers of sites."""


class PauliParseError(ValueError):
    """Text does not describe a Pauli string."""


@dataclass(frozen=True, slots=True)
class PauliString:
    num_sites: int
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        if self.num_sites < 1:
            raise ValueError(f"num_sites must be positive, got {self.num_sites}")
        full = (1 << self.num_sites) - 1
        if self.x_mask < 0 or self.z_mask < 0 or (self.x_mask | self.z_mask) & ~full:
            raise ValueError("mask has bits beyond num_sites")

    def symbol(self, site: int) -> str:
        """Single-site factor at 0-based ``site``."""
        return _SYMBOLS[((self.x_mask >> site) & 1, (self.z_mask >> site) & 1)]

    @property
    def support(self) -> tuple[int, ...]:
        """0-based sites carrying a non-identity factor."""
        m = self.x_mask | self.z_mask
        return tuple(i for i in range(self.num_sites) if (m >> i) & 1)

    @property
    def weight(self) -> int:
        return (self.x_mask | self.z_mask).bit_count()

    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    def word(self) -> str:
        """Compact form, e.g. ``ZZXI``."""
        return "".join(self.symbol(i) for i in range(self.num_sites))

    def __str__(self) -> str:
        return format_pauli(self)


@dataclass(frozen=True, slots=True)
class ScaledPauli:
    """``magnitude * i**phase_power * string``; magnitude 0 is the zero operator."""

    phase_power: int
    magnitude: float
    string: PauliString

    @property
    def is_zero(self) -> bool:
        return self.magnitude == 0

    @property
    def coefficient(self) -> complex:
        if self.is_zero:
            return 0j
        return self.magnitude * (1, 1j, -1, -1j)[self.phase_power % 4]

    def __neg__(self) -> ScaledPauli:
        return ScaledPauli((self.phase_power + 2) % 4, self.magnitude, self.string)


def identity(num_sites: int) -> PauliString:
    return PauliString(num_sites)


def single(symbol: str, site: int, num_sites: int) -> PauliString:
    """``symbol`` on 1-based ``site`` of an ``num_sites`` chain."""
    if not 1 <= site <= num_sites:
        raise PauliParseError(f"site {site} out of range 1..{num_sites}")
    x, z = _BITS[symbol]
    return PauliString(num_sites, x << (site - 1), z << (site - 1))


def _check(p: PauliString, q: PauliString) -> None:
    if p.num_sites != q.num_sites:
        raise DimensionError(f"size mismatch: {p.num_sites} vs {q.num_sites}")


def product_phase(px: int, pz: int, qx: int, qz: int) -> int:
    """Exponent ``k`` with ``P Q = i**k R`` for masks of ``P``, ``Q``.

    Uses ``P = i**(x.z) X**x Z**z``; commuting ``Z**pz`` past ``X**qx``
    contributes ``(-1)**(pz.qx)``.
    """
    rx, rz = px ^ qx, pz ^ qz
    k = (px & pz).bit_count() + (qx & qz).bit_count() + 2 * (pz & qx).bit_count()
    return (k - (rx & rz).bit_count()) % 4


def multiply(p: PauliString, q: PauliString) -> ScaledPauli:
    _check(p, q)
    k = product_phase(p.x_mask, p.z_mask, q.x_mask, q.z_mask)
    return ScaledPauli(k, 1, PauliString(p.num_sites, p.x_mask ^ q.x_mask, p.z_mask ^ q.z_mask))


def _symplectic(p: PauliString, q: PauliString) -> int:
    return ((p.x_mask & q.z_mask).bit_count() + (p.z_mask & q.x_mask).bit_count()) & 1


def commutes_with(p: PauliString, q: PauliString) -> bool:
    _check(p, q)
    return _symplectic(p, q) == 0


def commutator(p: PauliString, q: PauliString) -> ScaledPauli:
    """``[p, q]``: zero if the strings commute, else ``2 p q``."""
    _check(p, q)
    r = PauliString(p.num_sites, p.x_mask ^ q.x_mask, p.z_mask ^ q.z_mask)
    if _symplectic(p, q) == 0:
        return ScaledPauli(0, 0, r)
    return ScaledPauli(product_phase(p.x_mask, p.z_mask, q.x_mask, q.z_mask), 2, r)


def parse(text: str, num_sites: int) -> PauliString:
    """Parse ``"Z1 Z2 X3"`` (tokens, 1-based) or ``"ZZX"`` (compact word).

    An empty string or a lone ``"I"`` is the identity.
    """
    tokens = text.split()
    if tokens == ["I"]:
        return PauliString(num_sites)
    if len(tokens) == 1 and _WORD.match(tokens[0]) and not _TOKEN.match(tokens[0]):
        word = tokens[0]
        if len(word) != num_sites:
            raise PauliParseError(f"word {word!r} has length {len(word)}, expected {num_sites}")
        x = z = 0
        for i, c in enumerate(word):
            bx, bz = _BITS[c]
            x |= bx << i
            z |= bz << i
        return PauliString(num_sites, x, z)
    x = z = 0
    seen = set()
    for tok in tokens:
        m = _TOKEN.match(tok)
        if m is None:
            raise PauliParseError(f"bad token {tok!r}")
        site = int(m.group(2))
        if not 1 <= site <= num_sites:
            raise PauliParseError(f"index {site} out of range 1..{num_sites}")
        if site in seen:
            raise PauliParseError(f"duplicate site index {site}")
        seen.add(site)
        bx, bz = _BITS[m.group(1)]
        x |= bx << (site - 1)
        z |= bz << (site - 1)
    return PauliString(num_sites, x, z)


def format_pauli(p: PauliString) -> str:
    """Token form, ``"Z1 Z2 X3"``; the identity formats as ``"I"``."""
    toks = [f"{p.symbol(i)}{i + 1}" for i in p.support]
    return " ".join(toks) if toks else "I"
