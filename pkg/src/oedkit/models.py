"""Spin-1/2 Hamiltonians as weighted lists of Pauli strings.

Builders for the disordered XY chain, Kitaev models on 3-edge-coloured graphs
and the XY-ZZ chain, plus the JSON/CSV config readers used by the CLI.
Sites and graph vertices are 1-based at this API, matching the text format.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .pauli import PauliString, format_pauli

__all__ = [
    "ConfigError",
    "Edge",
    "GraphError",
    "Hamiltonian",
    "InteractionGraph",
    "XYCouplings",
    "XYZZCouplings",
    "add_loops",
    "build_kitaev",
    "build_xy",
    "build_xyzz",
    "from_config",
    "kitaev_chain",
    "loop_chords",
    "read_edges_csv",
]


class ConfigError(ValueError):
    """Malformed model description."""


class GraphError(ConfigError):
    """Interaction graph violates the degree or colouring rules."""


@dataclass(frozen=True)
class Hamiltonian:
    num_sites: int
    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        terms = tuple((float(c), p) for c, p in self.terms)
        object.__setattr__(self, "terms", terms)
        seen = set()
        for c, p in terms:
            if p.num_sites != self.num_sites:
                raise ConfigError(f"term {format_pauli(p)} has {p.num_sites} sites, expected {self.num_sites}")
            if not math.isfinite(c):
                raise ConfigError(f"non-finite coefficient on {format_pauli(p)}")
            if c == 0:
                raise ConfigError(f"zero coefficient on {format_pauli(p)}")
            if p.is_identity():
                raise ConfigError("identity string in Hamiltonian")
            if p in seen:
                raise ConfigError(f"duplicate term {format_pauli(p)}")
            seen.add(p)

    @classmethod
    def from_terms(cls, num_sites: int, terms: Iterable[tuple[float, PauliString]]) -> Hamiltonian:
        """Build while dropping zero coefficients."""
        return cls(num_sites, tuple((c, p) for c, p in terms if c != 0))

    @property
    def strings(self) -> tuple[PauliString, ...]:
        return tuple(p for _, p in self.terms)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for c, _ in self.terms], dtype=float)

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    def norm1(self) -> float:
        return float(sum(abs(c) for c, _ in self.terms))

    def with_coefficients(self, coeffs: Sequence[float]) -> Hamiltonian:
        """Same strings, new weights (a parameter quench)."""
        if len(coeffs) != len(self.terms):
            raise ConfigError("coefficient count mismatch")
        return Hamiltonian.from_terms(self.num_sites, zip(coeffs, self.strings))

    def __str__(self) -> str:
        return " + ".join(f"{c:g}*[{format_pauli(p)}]" for c, p in self.terms)


def _two_site(L: int, a: str, i: int, b: str, j: int) -> PauliString:
    bits = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
    (xa, za), (xb, zb) = bits[a], bits[b]
    return PauliString(L, (xa << (i - 1)) | (xb << (j - 1)), (za << (i - 1)) | (zb << (j - 1)))


def _draw(rng: np.random.Generator, n: int, lo: float, hi: float) -> list[float]:
    return [float(v) for v in rng.uniform(lo, hi, size=n)]


@dataclass(frozen=True)
class XYCouplings:
    jxx: tuple[float, ...]
    jyy: tuple[float, ...]
    jxy: tuple[float, ...]
    jyx: tuple[float, ...]
    hz: tuple[float, ...]
    boundary: str = "open"

    def __post_init__(self):
        for name in ("jxx", "jyy", "jxy", "jyx", "hz"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if self.boundary not in ("open", "periodic"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        L = len(self.hz)
        if L < 1:
            raise ConfigError("XY chain needs at least one site")
        if self.boundary == "periodic" and L < 3:
            raise ConfigError("periodic XY chain needs L >= 3")
        nb = self.num_bonds
        for name in ("jxx", "jyy", "jxy", "jyx"):
            if len(getattr(self, name)) != nb:
                raise ConfigError(f"{name} has length {len(getattr(self, name))}, expected {nb}")

    @property
    def num_sites(self) -> int:
        return len(self.hz)

    @property
    def num_bonds(self) -> int:
        L = len(self.hz)
        return L if self.boundary == "periodic" else L - 1

    @classmethod
    def uniform(cls, L: int, j: float = 1.0, h: float = 1.0, boundary: str = "open",
                cross: float | None = None) -> XYCouplings:
        """All bond couplings ``j`` (cross terms ``cross``, default ``j``), all fields ``h``."""
        nb = L if boundary == "periodic" else L - 1
        c = j if cross is None else cross
        return cls((j,) * nb, (j,) * nb, (c,) * nb, (c,) * nb, (h,) * L, boundary)

    @classmethod
    def random(cls, L: int, lo: float = 0.5, hi: float = 1.5, seed: int = 0,
               boundary: str = "open") -> XYCouplings:
        rng = np.random.default_rng(seed)
        nb = L if boundary == "periodic" else L - 1
        return cls(*(_draw(rng, nb, lo, hi) for _ in range(4)), _draw(rng, L, lo, hi), boundary)


def build_xy(c: XYCouplings) -> Hamiltonian:
    L = c.num_sites
    terms = []
    for b in range(c.num_bonds):
        i, j = b + 1, (b + 1) % L + 1
        terms += [
            (c.jxx[b], _two_site(L, "X", i, "X", j)),
            (c.jyy[b], _two_site(L, "Y", i, "Y", j)),
            (c.jxy[b], _two_site(L, "X", i, "Y", j)),
            (c.jyx[b], _two_site(L, "Y", i, "X", j)),
        ]
    terms += [(h, PauliString(L, 0, 1 << s)) for s, h in enumerate(c.hz)]
    return Hamiltonian.from_terms(L, terms)


@dataclass(frozen=True)
class Edge:
    i: int
    j: int
    color: str
    coupling: float = 1.0


@dataclass(frozen=True)
class InteractionGraph:
    """Graph with a proper 3-edge colouring; each colour is an XX, YY or ZZ bond."""

    num_vertices: int
    edges: tuple[Edge, ...]
    added_cycles: int = field(default=0, compare=False)

    def __post_init__(self):
        edges = tuple(e if isinstance(e, Edge) else Edge(*e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        n = self.num_vertices
        if n < 1:
            raise GraphError("graph needs at least one vertex")
        pairs = set()
        colors: dict[int, list[str]] = {}
        for e in edges:
            if e.color not in ("x", "y", "z"):
                raise GraphError(f"unknown colour {e.color!r}")
            if e.i == e.j:
                raise GraphError(f"self-loop at vertex {e.i}")
            if not (1 <= e.i <= n and 1 <= e.j <= n):
                raise GraphError(f"edge ({e.i}, {e.j}) out of range 1..{n}")
            if not math.isfinite(e.coupling) or e.coupling == 0:
                raise GraphError(f"edge ({e.i}, {e.j}) needs a finite nonzero coupling")
            key = (min(e.i, e.j), max(e.i, e.j))
            if key in pairs:
                raise GraphError(f"multi-edge between {key[0]} and {key[1]}")
            pairs.add(key)
            for v in (e.i, e.j):
                colors.setdefault(v, []).append(e.color)
        for v, cs in sorted(colors.items()):
            if len(cs) > 3:
                raise GraphError(f"vertex {v} has degree {len(cs)} > 3")
            if len(set(cs)) != len(cs):
                raise GraphError(f"improper coloring at vertex {v}")

    def free_colors(self, v: int) -> list[str]:
        used = {e.color for e in self.edges if v in (e.i, e.j)}
        return [c for c in "xyz" if c not in used]

    @property
    def num_cycles(self) -> int:
        """Cyclomatic number ``E - V + components``."""
        parent = list(range(self.num_vertices + 1))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        comps = self.num_vertices
        for e in self.edges:
            ra, rb = find(e.i), find(e.j)
            if ra != rb:
                parent[ra] = rb
                comps -= 1
        return len(self.edges) - self.num_vertices + comps


def kitaev_chain(L: int, couplings: float | Sequence[float] = 1.0,
                 colors: Sequence[str] | None = None) -> InteractionGraph:
    """Open chain 1-2-...-L; default colours repeat x, y, z along the path."""
    nb = L - 1
    if colors is None:
        colors = ["xyz"[b % 3] for b in range(nb)]
    if isinstance(couplings, (int, float)):
        couplings = [float(couplings)] * nb
    if len(colors) != nb or len(couplings) != nb:
        raise ConfigError(f"chain of {L} sites needs {nb} colours and couplings")
    return InteractionGraph(L, tuple(Edge(b + 1, b + 2, colors[b], couplings[b]) for b in range(nb)))


def build_kitaev(g: InteractionGraph) -> Hamiltonian:
    sym = {"x": "X", "y": "Y", "z": "Z"}
    L = g.num_vertices
    return Hamiltonian(L, tuple(
        (e.coupling, _two_site(L, sym[e.color], e.i, sym[e.color], e.j)) for e in g.edges
    ))


def add_loops(g: InteractionGraph, extra_edges: Iterable[Edge | tuple]) -> InteractionGraph:
    """Append chords; the result records how many independent cycles they close."""
    extra = tuple(e if isinstance(e, Edge) else Edge(*e) for e in extra_edges)
    out = InteractionGraph(g.num_vertices, g.edges + extra)
    return InteractionGraph(out.num_vertices, out.edges,
                            added_cycles=g.added_cycles + out.num_cycles - g.num_cycles)


def loop_chords(g: InteractionGraph, start: int, m: int, span: int = 3,
                coupling: float = 1.0) -> list[Edge]:
    """Greedy choice of ``m`` vertex-disjoint chords ``(s, s+span)`` with ``s >= start``.

    Each chord gets the colour that is free at both endpoints, so adding them
    keeps the colouring proper.
    """
    chords: list[Edge] = []
    used: set[int] = set()
    s = start
    while len(chords) < m and s + span <= g.num_vertices:
        a, b = s, s + span
        common = [c for c in g.free_colors(a) if c in g.free_colors(b)]
        if common and not used & set(range(a, b + 1)):
            chords.append(Edge(a, b, common[0], coupling))
            used |= set(range(a, b + 1))
            s = b + 1
        else:
            s += 1
    if len(chords) < m:
        raise GraphError(f"cannot place {m} disjoint loops from vertex {start}")
    return chords


@dataclass(frozen=True)
class XYZZCouplings:
    """XX+YY on bonds (2i-1, 2i), ZZ on bonds (2i, 2i+1), truncated at site ``num_sites``."""

    num_sites: int
    jx: tuple[float, ...]
    jy: tuple[float, ...]
    jz: tuple[float, ...]

    def __post_init__(self):
        for name in ("jx", "jy", "jz"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        n = self.num_sites
        if n < 2:
            raise ConfigError("XY-ZZ chain needs at least two sites")
        if len(self.jx) != n // 2 or len(self.jy) != n // 2:
            raise ConfigError(f"XY bonds: expected {n // 2} couplings")
        if len(self.jz) != (n - 1) // 2:
            raise ConfigError(f"ZZ bonds: expected {(n - 1) // 2} couplings")

    @classmethod
    def uniform(cls, n: int, j: float = 1.0) -> XYZZCouplings:
        return cls(n, (j,) * (n // 2), (j,) * (n // 2), (j,) * ((n - 1) // 2))

    @classmethod
    def random(cls, n: int, lo: float = 0.5, hi: float = 1.5, seed: int = 0) -> XYZZCouplings:
        rng = np.random.default_rng(seed)
        return cls(n, _draw(rng, n // 2, lo, hi), _draw(rng, n // 2, lo, hi), _draw(rng, (n - 1) // 2, lo, hi))


def build_xyzz(c: XYZZCouplings) -> Hamiltonian:
    n = c.num_sites
    terms = []
    for i in range(1, n // 2 + 1):
        a = 2 * i - 1
        terms.append((c.jx[i - 1], _two_site(n, "X", a, "X", a + 1)))
        terms.append((c.jy[i - 1], _two_site(n, "Y", a, "Y", a + 1)))
        if i - 1 < len(c.jz):
            terms.append((c.jz[i - 1], _two_site(n, "Z", a + 1, "Z", a + 2)))
    return Hamiltonian.from_terms(n, terms)


def read_edges_csv(path) -> list[Edge]:
    """Rows ``i,j,color,J``; a header row and ``#`` comments are skipped."""
    edges = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                i, j, color, J = (s.strip() for s in row[:4])
                edges.append(Edge(int(i), int(j), color.lower(), float(J)))
            except ValueError:
                if edges:
                    raise ConfigError(f"bad edge row {row!r}") from None
    return edges


def _per(value, n: int, name: str) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),) * n
    if len(value) != n:
        raise ConfigError(f"{name}: expected {n} values, got {len(value)}")
    return tuple(float(v) for v in value)


def from_config(cfg: Mapping) -> Hamiltonian:
    """Build a Hamiltonian from the JSON model config used by the CLI.

    ``{"model": "xy"|"kitaev"|"xyzz", "L": int, "boundary": "open"|"periodic",
    "couplings": {...} | "uniform": v | "random": {"lo", "hi", "seed"},
    "graph": {"edges": [[i, j, "x", J], ...]}, "loops": [[i, j, "z", J], ...]}``.
    ``"n"`` is accepted as an alias of ``"L"``.
    """
    try:
        model = cfg["model"]
        L = int(cfg.get("L", cfg.get("n")))
    except (KeyError, TypeError, ValueError):
        raise ConfigError("config needs 'model' and 'L'") from None
    boundary = cfg.get("boundary", "open")
    rnd = cfg.get("random")
    uni = cfg.get("uniform")
    cpl = cfg.get("couplings") or {}

    if model == "xy":
        if rnd is not None:
            c = XYCouplings.random(L, rnd.get("lo", 0.5), rnd.get("hi", 1.5), rnd.get("seed", 0), boundary)
        else:
            base = 1.0 if uni is None else float(uni)
            nb = L if boundary == "periodic" else L - 1
            c = XYCouplings(
                _per(cpl.get("jxx", base), nb, "jxx"), _per(cpl.get("jyy", base), nb, "jyy"),
                _per(cpl.get("jxy", base), nb, "jxy"), _per(cpl.get("jyx", base), nb, "jyx"),
                _per(cpl.get("hz", base), L, "hz"), boundary,
            )
        return build_xy(c)

    if model == "kitaev":
        if "graph" in cfg:
            g = InteractionGraph(L, tuple(Edge(int(i), int(j), str(c), float(J)) for i, j, c, J in cfg["graph"]["edges"]))
        elif "edges_csv" in cfg:
            g = InteractionGraph(L, tuple(read_edges_csv(cfg["edges_csv"])))
        else:
            if rnd is not None:
                vals = _draw(np.random.default_rng(rnd.get("seed", 0)), L - 1, rnd.get("lo", 0.5), rnd.get("hi", 1.5))
            else:
                vals = 1.0 if uni is None else float(uni)
            g = kitaev_chain(L, vals, cfg.get("colors"))
        if cfg.get("loops"):
            g = add_loops(g, [Edge(int(i), int(j), str(c), float(J)) for i, j, c, J in cfg["loops"]])
        return build_kitaev(g)

    if model == "xyzz":
        if rnd is not None:
            c = XYZZCouplings.random(L, rnd.get("lo", 0.5), rnd.get("hi", 1.5), rnd.get("seed", 0))
        else:
            base = 1.0 if uni is None else float(uni)
            c = XYZZCouplings(L, _per(cpl.get("jx", base), L // 2, "jx"), _per(cpl.get("jy", base), L // 2, "jy"),
                              _per(cpl.get("jz", base), (L - 1) // 2, "jz"))
        return build_xyzz(c)

    raise ConfigError(f"unknown model {model!r}")
