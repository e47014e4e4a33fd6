"""Gate quenches interleaved with Hamiltonian evolution.

A quench gate ``W`` acts on observables as ``A -> W^dag A W``.  Two closures
are offered:

* :func:`extended_class` closes under commutation *and* every gate, each
  usable any number of times;
* :func:`scheduled_class` applies each gate of a schedule exactly once, in
  order, closing under commutation between gates.  This is the operator
  space a fixed quench protocol actually explores.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from ._keys import codec_for, isin_sorted
from .closure import DEFAULT_BUDGET, EquivalenceClass, IncompleteClassError, closure, generate_class
from .dimpoly import DimensionPolynomial, detect_degree
from .dynamics import InitialState, build_generator, evolve, expectation_weights
from .models import Hamiltonian, XYCouplings, build_xy
from .pauli import DimensionError, PauliString, single

__all__ = [
    "ConjugationImage",
    "QuenchGate",
    "QuenchResult",
    "conjugate",
    "extended_class",
    "gate_matrix",
    "parse_schedule",
    "quenched_evolution",
    "scheduled_class",
    "swap_growth_counts",
    "swap_growth_study",
]

_KINDS = ("swap", "x", "y", "z", "s", "axisw")
_ZERO = 1e-12


@dataclass(frozen=True)
class QuenchGate:
    kind: str
    sites: tuple[int, ...]
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown gate {self.kind!r}")
        sites = tuple(int(s) for s in self.sites)
        object.__setattr__(self, "sites", sites)
        need = 2 if self.kind == "swap" else 1
        if len(sites) != need:
            raise ValueError(f"{self.kind} gate takes {need} site(s)")
        if min(sites) < 1:
            raise ValueError("sites are 1-based")
        if self.kind == "swap" and sites[0] == sites[1]:
            raise ValueError("SWAP sites must differ")

    @classmethod
    def swap(cls, i: int, j: int) -> QuenchGate:
        return cls("swap", (i, j))

    @classmethod
    def pauli(cls, axis: str, site: int) -> QuenchGate:
        return cls(axis.lower(), (site,))

    @classmethod
    def phase_s(cls, site: int) -> QuenchGate:
        return cls("s", (site,))

    @classmethod
    def axis_w(cls, site: int, alpha: float) -> QuenchGate:
        """``W = X cos(alpha) + Y sin(alpha)`` on ``site``."""
        return cls("axisw", (site,), float(alpha))

    def check(self, num_sites: int) -> None:
        if max(self.sites) > num_sites:
            raise DimensionError(f"gate sites {self.sites} outside chain of {num_sites}")


@dataclass(frozen=True)
class ConjugationImage:
    input: PauliString
    outputs: tuple[tuple[float, PauliString], ...]


def _onsite(gate: QuenchGate, sym: str) -> list[tuple[float, str]]:
    """``W^dag sym W`` for the single-site factor under a one-site gate."""
    if sym == "I":
        return [(1.0, "I")]
    k = gate.kind
    if k in ("x", "y", "z"):
        return [(1.0 if sym.lower() == k else -1.0, sym)]
    if k == "s":
        return {"X": [(-1.0, "Y")], "Y": [(1.0, "X")], "Z": [(1.0, "Z")]}[sym]
    c, s = math.cos(2 * gate.alpha), math.sin(2 * gate.alpha)
    table = {"X": [(c, "X"), (s, "Y")], "Y": [(s, "X"), (-c, "Y")], "Z": [(-1.0, "Z")]}
    return [(v, t) for v, t in table[sym] if abs(v) > _ZERO]


_SYM_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}


def conjugate(gate: QuenchGate, p: PauliString) -> ConjugationImage:
    """Expansion of ``W^dag P W`` in Pauli strings with real coefficients."""
    gate.check(p.num_sites)
    if gate.kind == "swap":
        i, j = (s - 1 for s in gate.sites)

        def sw(m):
            bi, bj = (m >> i) & 1, (m >> j) & 1
            return m ^ ((bi ^ bj) << i) ^ ((bi ^ bj) << j)

        return ConjugationImage(p, ((1.0, PauliString(p.num_sites, sw(p.x_mask), sw(p.z_mask))),))
    s = gate.sites[0] - 1
    clear = ~(1 << s)
    outs = []
    for v, sym in _onsite(gate, p.symbol(s)):
        bx, bz = _SYM_BITS[sym]
        outs.append((v, PauliString(p.num_sites, (p.x_mask & clear) | (bx << s), (p.z_mask & clear) | (bz << s))))
    return ConjugationImage(p, tuple(outs))


# -- vectorised gate action on key arrays ------------------------------------

def _get(codec, half: np.ndarray, s: int) -> np.ndarray:
    if half.ndim == 1:
        return (half >> np.uint64(s)) & np.uint64(1)
    w = codec.words - 1 - s // 64
    return (half[:, w] >> np.uint64(s % 64)) & np.uint64(1)


def _xor(codec, half: np.ndarray, s: int, flag: np.ndarray) -> np.ndarray:
    out = half.copy()
    if half.ndim == 1:
        out ^= flag << np.uint64(s)
    else:
        out[:, codec.words - 1 - s // 64] ^= flag << np.uint64(s % 64)
    return out


def _join(codec, x: np.ndarray, z: np.ndarray) -> np.ndarray:
    if x.ndim == 1:
        return (x << np.uint64(codec.num_sites)) | z
    return np.hstack([x, z])


def _action(codec, gate: QuenchGate, bits: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """``[(coefficients, image bits), ...]`` covering ``W^dag P W`` for every row."""
    x, z = codec.split(bits)
    n = bits.shape[0]
    if gate.kind == "swap":
        i, j = (s - 1 for s in gate.sites)
        out = []
        for half in (x, z):
            d = _get(codec, half, i) ^ _get(codec, half, j)
            out.append(_xor(codec, _xor(codec, half, i, d), j, d))
        return [(np.ones(n), _join(codec, *out))]
    s = gate.sites[0] - 1
    bx, bz = _get(codec, x, s).astype(bool), _get(codec, z, s).astype(bool)
    k = gate.kind
    if k in ("x", "y", "z"):
        anti = {"x": bz, "z": bx, "y": bx ^ bz}[k]
        return [(np.where(anti, -1.0, 1.0), bits)]
    flipped = _join(codec, x, _xor(codec, z, s, bx.astype(np.uint64)))
    if k == "s":
        # X -> -Y, Y -> X, Z and I unchanged
        return [(np.where(bx & ~bz, -1.0, 1.0), flipped)]
    c, sn = math.cos(2 * gate.alpha), math.sin(2 * gate.alpha)
    # X -> cX + sY, Y -> sX - cY, Z -> -Z, I -> I
    self_coef = np.where(bx, np.where(bz, -c, c), np.where(bz, -1.0, 1.0))
    flip_coef = np.where(bx, sn, 0.0)
    return [(self_coef, bits), (flip_coef, flipped)]


def _support_fn(codec, gate: QuenchGate):
    def fn(bits):
        out = []
        for coef, img in _action(codec, gate, bits):
            keep = np.abs(coef) > _ZERO
            if keep.any():
                out.append(img[keep])
        return out
    return fn


def extended_class(h: Hamiltonian, gates: Sequence[QuenchGate], seed: PauliString,
                   budget: int = DEFAULT_BUDGET) -> EquivalenceClass:
    """Closure under commutation and under every gate, each applied any number of times."""
    for g in gates:
        g.check(h.num_sites)
    codec = codec_for(h.num_sites)
    fns = [_support_fn(codec, g) for g in gates]
    return closure(h, [seed], budget, fns, seed=seed, codec=codec)


def scheduled_class(h: Hamiltonian, gates: Sequence[QuenchGate], seed: PauliString,
                    budget: int = DEFAULT_BUDGET) -> EquivalenceClass:
    """Union of the stages ``C_0 = class(seed)``, ``C_k = class(support(W_k^dag C_{k-1} W_k))``.

    ``gates`` are listed in the order they act on the operator.
    """
    for g in gates:
        g.check(h.num_sites)
    stage = generate_class(h, seed, budget)
    codec = stage.codec
    union = stage.keys
    complete = stage.complete
    depth = stage.depth
    for g in gates:
        if not complete:
            break
        imgs = _support_fn(codec, g)(codec.to_bits(stage.keys))
        srcs = np.unique(codec.from_bits(np.concatenate(imgs))) if imgs else codec.empty()
        stage = closure(h, codec.decode(srcs), budget, seed=seed, codec=codec)
        union = np.union1d(union, stage.keys)
        complete = stage.complete and union.shape[0] <= budget
        depth = max(depth, stage.depth)
    return EquivalenceClass(h.num_sites, union, seed, complete, depth, codec)


def gate_matrix(cls: EquivalenceClass, gate: QuenchGate) -> sp.csr_matrix:
    """``M[a, b]`` = coefficient of member ``a`` in ``W^dag P_b W``; images outside the class are dropped."""
    codec = cls.codec
    bits = codec.to_bits(cls.keys)
    rows, cols, vals = [], [], []
    cols_all = np.arange(cls.size)
    for coef, img in _action(codec, gate, bits):
        keys = codec.from_bits(img)
        keep = (np.abs(coef) > _ZERO) & isin_sorted(keys, cls.keys)
        rows.append(np.searchsorted(cls.keys, keys[keep]))
        cols.append(cols_all[keep])
        vals.append(coef[keep])
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(cls.size, cls.size))


@dataclass
class QuenchResult:
    times: np.ndarray
    values: np.ndarray
    norm_drift: float
    basis: EquivalenceClass


def parse_schedule(items: Sequence[Mapping]) -> list[tuple[float, QuenchGate]]:
    """``[{"t": 1.0, "gate": "swap", "sites": [2, 3]}, {"t": 2.0, "gate": "axisw", "site": 1, "alpha": 0.39}]``."""
    out = []
    for it in items:
        kind = str(it["gate"]).lower()
        sites = it.get("sites", [it["site"]] if "site" in it else [])
        out.append((float(it["t"]), QuenchGate(kind, tuple(sites), float(it.get("alpha", 0.0)))))
    return out


def quenched_evolution(h: Hamiltonian, schedule: Sequence[tuple[float, QuenchGate]], seed: PauliString,
                       init: InitialState, times: Sequence[float], method: str = "auto",
                       budget: int = DEFAULT_BUDGET) -> QuenchResult:
    """``tr(rho_init A_H(t))`` for a gate schedule, gates acting at their times as ``rho -> W rho W^dag``.

    The expectation functional ``r_m = tr(rho(t) P_m)`` is propagated forward:
    it follows the transposed generator between gates and ``M^T`` at each
    gate, and ``<A>(t)`` is its component on ``A``.  Gates at the same instant
    act in list order; an output time equal to a gate time sees the gate.
    """
    times = np.asarray(times, dtype=float)
    sched = sorted(enumerate(schedule), key=lambda e: (e[1][0], e[0]))
    sched = [s for _, s in sched]
    if sched and (sched[0][0] < 0 or (times.size and sched[-1][0] > times[-1])):
        raise ValueError("gate times must lie within [0, t_max]")
    # the observable meets the latest gate first
    basis = scheduled_class(h, [g for _, g in reversed(sched)], seed, budget)
    if not basis.complete:
        raise IncompleteClassError("quench basis exceeds budget")
    gen = build_generator(h, basis).reversed()
    r = np.zeros(basis.size)
    for idx, w in expectation_weights(basis, init).items():
        r[idx] = w
    a_idx = basis.index_of(seed)
    mats = {g: gate_matrix(basis, g).T.tocsr() for _, g in sched}
    values = np.empty(times.shape[0])
    drift = 0.0
    t0 = 0.0
    done = np.zeros(times.shape[0], dtype=bool)
    pending = list(sched)
    while True:
        t_next = pending[0][0] if pending else np.inf
        sel = np.flatnonzero(~done & (times < t_next))
        seg_end = t_next if pending else (times[sel[-1]] if sel.size else t0)
        grid = np.concatenate([[0.0], times[sel] - t0, [max(seg_end - t0, 0.0)]])
        if np.linalg.norm(r) > 0:
            traj = evolve(gen, r, grid, method=method)
            values[sel] = traj.coefficients[1:-1, a_idx]
            drift = max(drift, traj.norm_drift)
            r = traj.coefficients[-1]
        else:
            values[sel] = 0.0
        done[sel] = True
        if not pending:
            break
        while pending and pending[0][0] == t_next:
            r = mats[pending.pop(0)[1]] @ r
        t0 = t_next
    return QuenchResult(times, values, drift, basis)


def _swap_bonds(m: int, first: int = 2) -> list[QuenchGate]:
    """Distinct adjacent bonds ``(first, first+1), (first+2, first+3), ...``."""
    return [QuenchGate.swap(first + 2 * k, first + 2 * k + 1) for k in range(m)]


def swap_growth_counts(sizes: Sequence[int], m: int, seed_site: int = 1, first_bond: int = 2,
                       couplings_seed: int = 0, budget: int = DEFAULT_BUDGET) -> list[int]:
    """Scheduled-class sizes of ``Z_seed`` in open XY chains with ``m`` single SWAP quenches."""
    counts = []
    for L in sizes:
        h = build_xy(XYCouplings.random(L, seed=couplings_seed))
        c = scheduled_class(h, _swap_bonds(m, first_bond), single("Z", seed_site, L), budget)
        if not c.complete:
            raise IncompleteClassError(f"budget exhausted at L={L}")
        counts.append(c.size)
    return counts


def swap_growth_study(sizes: Sequence[int], m: int, **kw) -> DimensionPolynomial:
    """Detected polynomial degree of the quenched class size; expected ``2 + 2m``."""
    return detect_degree(list(sizes), swap_growth_counts(sizes, m, **kw))
