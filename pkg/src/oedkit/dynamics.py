"""Heisenberg evolution restricted to an equivalence class.

Writing ``A(t) = sum_m f_m(t) P_m`` over the class members, ``dA/dt = i[H, A]``
becomes ``df/dt = G f`` with a real antisymmetric ``G``; the flow is
orthogonal, so ``|f(t)|`` is conserved and doubles as an accuracy monitor.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from ._keys import isin_sorted, product_phases
from .closure import DEFAULT_BUDGET, EquivalenceClass, IncompleteClassError, generate_class
from .models import Hamiltonian
from .pauli import PauliString, single

__all__ = [
    "DENSE_LIMIT",
    "AdjointGenerator",
    "ConsistencyError",
    "InitialState",
    "IntegrationError",
    "Trajectory",
    "build_generator",
    "evolve",
    "expectation_weights",
    "observable",
    "run_relaxation_experiment",
]

DENSE_LIMIT = 2000
DRIFT_PER_TIME = 1e-9


class ConsistencyError(RuntimeError):
    """A structural invariant failed; results cannot be trusted."""


class IntegrationError(RuntimeError):
    """Integration produced non-finite values or drifted beyond tolerance."""


_STATES = {
    "0": (0.0, 0.0, 1.0), "1": (0.0, 0.0, -1.0),
    "+": (1.0, 0.0, 0.0), "-": (-1.0, 0.0, 0.0),
    "+i": (0.0, 1.0, 0.0), "-i": (0.0, -1.0, 0.0),
}


@dataclass(frozen=True)
class InitialState:
    """Pure qubit state on ``site`` (1-based), infinite temperature elsewhere."""

    site: int
    bloch: tuple[float, float, float]

    def __post_init__(self):
        if self.site < 1:
            raise ValueError("site is 1-based")
        b = tuple(float(v) for v in self.bloch)
        if abs(math.sqrt(sum(v * v for v in b)) - 1) > 1e-12:
            raise ValueError(f"Bloch vector {b} is not a pure state")
        object.__setattr__(self, "bloch", b)

    @classmethod
    def from_label(cls, site: int, label: str) -> InitialState:
        """``label`` is one of ``0 1 + - +i -i``."""
        try:
            return cls(site, _STATES[label])
        except KeyError:
            raise ValueError(f"unknown state label {label!r}") from None


@dataclass
class AdjointGenerator:
    cls: EquivalenceClass
    matrix: sp.csr_matrix
    norm1: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def reversed(self) -> AdjointGenerator:
        """Generator of the backward (transposed) flow, ``-G``."""
        return AdjointGenerator(self.cls, (-self.matrix).tocsr(), self.norm1)


def build_generator(h: Hamiltonian, cls: EquivalenceClass) -> AdjointGenerator:
    if not cls.complete:
        raise IncompleteClassError("generator needs a complete class")
    if cls.num_sites != h.num_sites:
        raise ConsistencyError("class and Hamiltonian sizes differ")
    codec = cls.codec
    bits = codec.to_bits(cls.keys)
    D = cls.size
    rows, cols, vals = [], [], []
    for c, hs in h.terms:
        hkey, partner = codec.term(hs)
        m = np.flatnonzero(codec.anticommutes(bits, partner))
        if m.size == 0:
            continue
        targets = codec.from_bits(bits[m] ^ hkey)
        n = np.searchsorted(cls.keys, targets)
        if not isin_sorted(targets, cls.keys).all():
            raise ConsistencyError("commutator leaves the class")
        k = product_phases(codec, hs, bits[m])
        if np.any(k % 2 == 0):
            raise ConsistencyError("imaginary generator entry")
        # i c [H, P] = 2 c i**(k+1) R, and k odd makes i**(k+1) = -1 or +1
        rows.append(n)
        cols.append(m)
        vals.append(np.where(k == 1, -2.0 * c, 2.0 * c))
    if rows:
        G = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(D, D))
    else:
        G = sp.csr_matrix((D, D))
    if (G + G.T).count_nonzero():
        asym = abs(G + G.T).max()
        if asym != 0:
            raise ConsistencyError(f"generator not antisymmetric (max residue {asym})")
    return AdjointGenerator(cls, G, h.norm1())


@dataclass
class Trajectory:
    times: np.ndarray
    coefficients: np.ndarray
    recorded: np.ndarray | None
    norm_drift: float
    method: str

    def column(self, index: int) -> np.ndarray:
        if self.recorded is None:
            return self.coefficients[:, index]
        pos = np.flatnonzero(self.recorded == index)
        if pos.size == 0:
            raise KeyError(f"component {index} was not recorded")
        return self.coefficients[:, pos[0]]


def _rk4(G, f0, times, step):
    out = np.empty((len(times), f0.shape[0]))
    f = f0.copy()
    t = 0.0
    for n, tn in enumerate(times):
        span = tn - t
        if span > 0:
            k = math.ceil(span / step - 1e-12)
            h = span / k
            for _ in range(k):
                k1 = G @ f
                k2 = G @ (f + 0.5 * h * k1)
                k3 = G @ (f + 0.5 * h * k2)
                k4 = G @ (f + h * k3)
                f = f + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            t = tn
        out[n] = f
    return out


def _eig(G, f0, times):
    Gd = G.toarray() if sp.issparse(G) else np.asarray(G)
    w, V = np.linalg.eigh(1j * Gd)
    c = V.conj().T @ f0
    # G = -i V diag(w) V^dag, so exp(G t) f0 = V exp(-i w t) V^dag f0
    phases = np.exp(-1j * np.outer(times, w))
    out = np.real((phases * c) @ V.T)
    out[times == 0] = f0
    return out


def _expm(G, f0, times):
    times = np.asarray(times)
    if len(times) > 2 and np.allclose(np.diff(times), times[1] - times[0], rtol=0, atol=1e-12) and times[0] == 0:
        return np.asarray(expm_multiply(G, f0, start=0.0, stop=float(times[-1]), num=len(times), endpoint=True))
    out = np.empty((len(times), f0.shape[0]))
    f, t = f0, 0.0
    for n, tn in enumerate(times):
        if tn > t:
            f = expm_multiply(G * (tn - t), f)
            t = tn
        out[n] = f
    return out


def evolve(g: AdjointGenerator, f0, times: Sequence[float], method: str = "auto",
           step: float | None = None, record: Sequence[int] | None = None,
           drift_tol: float = DRIFT_PER_TIME) -> Trajectory:
    """Integrate ``df/dt = G f`` from ``t = 0`` and sample at ``times``.

    ``method`` is ``"rk4"`` (fixed step, default ``min(0.01, 0.1/|h|_1)``),
    ``"eig"`` (dense exact, for small classes), ``"expm"`` (sparse
    Taylor exponential) or ``"auto"`` (``eig`` up to ``DENSE_LIMIT`` members,
    ``expm`` above).
    """
    f0 = np.asarray(f0, dtype=float)
    times = np.asarray(times, dtype=float)
    if f0.shape != (g.dim,):
        raise ValueError(f"f0 has shape {f0.shape}, expected ({g.dim},)")
    n0 = float(np.linalg.norm(f0))
    if not n0 > 0 or not np.isfinite(n0):
        raise ValueError("f0 must be finite and nonzero")
    if times.size == 0 or times[0] < 0 or np.any(np.diff(times) < 0):
        raise ValueError("times must be nondecreasing and start at t >= 0")
    if method == "auto":
        method = "eig" if g.dim <= DENSE_LIMIT else "expm"
    if method == "rk4":
        if step is None:
            step = min(0.01, 0.1 / g.norm1) if g.norm1 > 0 else 0.01
        F = _rk4(g.matrix, f0, times, step)
    elif method == "eig":
        F = _eig(g.matrix, f0, times)
    elif method == "expm":
        F = _expm(g.matrix.tocsc(), f0, times)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(F)):
        raise IntegrationError("non-finite coefficients")
    drift = float(np.max(np.abs(np.linalg.norm(F, axis=1) - n0)))
    allowed = drift_tol * max(1.0, float(times[-1])) * n0
    if drift > allowed:
        raise IntegrationError(f"norm drift {drift:.3e} exceeds {allowed:.3e} ({method})")
    rec = None
    if record is not None:
        rec = np.asarray(record, dtype=np.int64)
        F = F[:, rec]
    return Trajectory(times, F, rec, drift, method)


def expectation_weights(cls: EquivalenceClass, init: InitialState) -> dict[int, float]:
    """Nonzero ``tr(rho_init P_m)`` keyed by member index."""
    L = cls.num_sites
    if init.site > L:
        raise ValueError(f"site {init.site} outside chain of {L}")
    out = {}
    for sym, b in zip("XYZ", init.bloch):
        p = single(sym, init.site, L)
        if b != 0 and p in cls:
            out[cls.index_of(p)] = b
    ident = PauliString(L)
    if ident in cls:
        out[cls.index_of(ident)] = 1.0
    return out


def observable(cls: EquivalenceClass, traj: Trajectory, init: InitialState) -> np.ndarray:
    """``<A(t)> = sum_m f_m(t) tr(rho_init P_m)``."""
    out = np.zeros(traj.times.shape[0])
    for idx, w in expectation_weights(cls, init).items():
        out += w * traj.column(idx)
    return out


def run_relaxation_experiment(h: Hamiltonian, sites: Sequence[int], states: Sequence[str], t_max: float,
                              dt: float, observables: Sequence[str] = ("X",), method: str = "auto",
                              budget: int = DEFAULT_BUDGET) -> list[tuple]:
    """Rows ``(t, site, observable, value, norm_drift)`` for each (site, state, observable)."""
    if len(states) == 1:
        states = list(states) * len(sites)
    if len(states) != len(sites):
        raise ValueError("need one state per site")
    n = int(round(t_max / dt)) if t_max > 0 else 0
    times = np.linspace(0.0, n * dt, n + 1)
    rows = []
    for site, label in zip(sites, states):
        init = InitialState.from_label(site, label)
        for sym in observables:
            seed = single(sym, site, h.num_sites)
            cls = generate_class(h, seed, budget)
            if not cls.complete:
                raise IncompleteClassError(
                    f"class of {sym}{site} exceeds budget {budget}; use the dense oracle instead")
            gen = build_generator(h, cls)
            f0 = np.zeros(cls.size)
            f0[cls.index_of(seed)] = 1.0
            weights = expectation_weights(cls, init)
            traj = evolve(gen, f0, times, method=method, record=sorted(weights))
            vals = observable(cls, traj, init)
            rows.extend((float(t), site, f"{sym}{site}", float(v), traj.norm_drift) for t, v in zip(times, vals))
    return rows
