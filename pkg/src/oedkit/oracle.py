"""Dense exact-diagonalisation ground truth for small chains.

Everything here is built from explicit 2x2 matrices and Kronecker products;
nothing reuses the bit-mask algebra, so agreement with the restricted
machinery is a genuine cross-check.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from functools import lru_cache

import numpy as np

from .models import Hamiltonian
from .pauli import PauliString, parse

__all__ = [
    "DENSE_CAP",
    "CapExceededError",
    "dense_generator",
    "exact_class_projection",
    "exact_heisenberg",
    "gate_unitary",
    "initial_density",
    "pauli_decompose",
    "to_dense",
]

DENSE_CAP = 10
PROJECTION_CAP = 6
_OVERLAP_TOL = 1e-10

_I2 = np.eye(2, dtype=complex)
_MATS = {
    "I": _I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class CapExceededError(ValueError):
    """System too large for dense treatment."""


def _check_cap(L: int, cap: int) -> None:
    if L > cap:
        raise CapExceededError(f"dense oracle limited to L <= {cap}, got {L}")


def _kron_word(word: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for c in word:  # site 1 is the most significant tensor factor
        out = np.kron(out, _MATS[c])
    return out


def to_dense(op, cap: int = DENSE_CAP) -> np.ndarray:
    """Dense matrix of a :class:`PauliString` or :class:`Hamiltonian`."""
    if isinstance(op, PauliString):
        _check_cap(op.num_sites, cap)
        return _kron_word(op.word())
    if isinstance(op, Hamiltonian):
        _check_cap(op.num_sites, cap)
        d = 2**op.num_sites
        out = np.zeros((d, d), dtype=complex)
        for c, p in op.terms:
            out += c * _kron_word(p.word())
        if np.abs(out - out.conj().T).max() > 1e-12:
            raise ValueError("Hamiltonian is not Hermitian")
        return out
    raise TypeError(f"cannot densify {type(op).__name__}")


def initial_density(init, L: int) -> np.ndarray:
    """``|psi><psi|`` on ``init.site`` times the maximally mixed rest."""
    bx, by, bz = init.bloch
    rho1 = 0.5 * (_I2 + bx * _MATS["X"] + by * _MATS["Y"] + bz * _MATS["Z"])
    left = np.eye(2 ** (init.site - 1)) / 2 ** (init.site - 1)
    right = np.eye(2 ** (L - init.site)) / 2 ** (L - init.site)
    return np.kron(np.kron(left, rho1), right)


def gate_unitary(gate, L: int) -> np.ndarray:
    """Dense unitary of a quench gate, built from its 2x2 or 4x4 block."""
    _check_cap(L, DENSE_CAP)
    if gate.kind == "swap":
        i, j = gate.sites
        d = 2**L
        U = np.zeros((d, d), dtype=complex)
        for b in range(d):
            bits = [(b >> (L - 1 - s)) & 1 for s in range(L)]
            bits[i - 1], bits[j - 1] = bits[j - 1], bits[i - 1]
            U[sum(v << (L - 1 - s) for s, v in enumerate(bits)), b] = 1
        return U
    one = {
        "x": _MATS["X"], "y": _MATS["Y"], "z": _MATS["Z"],
        "s": np.diag([1, 1j]),
        "axisw": np.cos(gate.alpha) * _MATS["X"] + np.sin(gate.alpha) * _MATS["Y"],
    }[gate.kind]
    (s,) = gate.sites
    return np.kron(np.kron(np.eye(2 ** (s - 1)), one), np.eye(2 ** (L - s)))


def _expectations(E, Q, rho, A, ts) -> np.ndarray:
    """``tr(U(t) rho U(t)^dag A)`` for every ``t`` in ``ts``."""
    rt = Q.conj().T @ rho @ Q
    at = Q.conj().T @ A @ Q
    # tr(e^{-iEt} rt e^{iEt} at) = sum_jk rt_jk e^{-i(E_j-E_k)t} at_kj
    M = rt * at.T
    out = np.empty(len(ts))
    for n, t in enumerate(ts):
        ph = np.exp(-1j * E * t)
        out[n] = np.real(ph @ M @ ph.conj())
    return out


def exact_heisenberg(h: Hamiltonian, a: PauliString, times: Sequence[float], init,
                     gates: Sequence[tuple[float, object]] = (), cap: int = DENSE_CAP) -> np.ndarray:
    """``tr(rho_init A(t))`` with gates ``(t_k, W)`` acting as ``rho -> W rho W^dag``.

    Gates sharing a time are applied in list order.
    """
    L = h.num_sites
    _check_cap(L, cap)
    H = to_dense(h, cap)
    E, Q = np.linalg.eigh(H)
    if np.abs(Q.conj().T @ Q - np.eye(len(E))).max() > 1e-10:
        raise ArithmeticError("eigenvectors not unitary")
    A = to_dense(a, cap)
    rho = initial_density(init, L)
    times = np.asarray(times, dtype=float)
    sched = sorted(((float(t), k, g) for k, (t, g) in enumerate(gates)), key=lambda x: (x[0], x[1]))
    out = np.empty(times.shape[0])
    t0 = 0.0
    pending = list(sched)
    idx = np.arange(times.shape[0])
    done = np.zeros(times.shape[0], dtype=bool)
    while True:
        t_next = pending[0][0] if pending else np.inf
        # outputs strictly before the next gate, or at it when no gate fires there yet
        sel = idx[~done & (times < t_next)]
        if sel.size:
            out[sel] = _expectations(E, Q, rho, A, times[sel] - t0)
            done[sel] = True
        if not pending:
            break
        Us = np.exp(-1j * E * (t_next - t0))
        U = (Q * Us) @ Q.conj().T
        rho = U @ rho @ U.conj().T
        while pending and pending[0][0] == t_next:
            W = gate_unitary(pending.pop(0)[2], L)
            rho = W @ rho @ W.conj().T
        t0 = t_next
    return out


@lru_cache(maxsize=8)
def _basis(L: int):
    """All ``4**L`` words with the column index and value of each row's nonzero."""
    words = ["".join(w) for w in itertools.product("IXYZ", repeat=L)]
    d = 2**L
    cols = np.empty((len(words), d), dtype=np.int64)
    vals = np.empty((len(words), d), dtype=complex)
    rows = np.arange(d)
    for n, w in enumerate(words):
        M = _kron_word(w)
        cols[n] = np.argmax(np.abs(M), axis=1)
        vals[n] = M[rows, cols[n]]
    return words, cols, vals


def pauli_decompose(M: np.ndarray, L: int) -> dict[str, complex]:
    """Hilbert-Schmidt coefficients ``tr(P^dag M) / 2**L`` above the overlap threshold."""
    words, cols, vals = _basis(L)
    coeffs = (vals.conj() * M[np.arange(2**L)[None, :], cols]).sum(axis=1) / 2**L
    return {words[n]: complex(coeffs[n]) for n in np.flatnonzero(np.abs(coeffs) > _OVERLAP_TOL)}


def exact_class_projection(h: Hamiltonian, seed: PauliString, cap: int = PROJECTION_CAP) -> set[PauliString]:
    """Closure by dense commutators and projection onto every Pauli string."""
    L = h.num_sites
    _check_cap(L, cap)
    Hs = [_kron_word(p.word()) for p in h.strings]
    found = {seed.word()}
    frontier = [seed.word()]
    while frontier:
        nxt = []
        for w in frontier:
            P = _kron_word(w)
            for Hk in Hs:
                C = Hk @ P - P @ Hk
                for q in pauli_decompose(C, L):
                    if q not in found:
                        found.add(q)
                        nxt.append(q)
        frontier = nxt
    return {parse(w, L) for w in found}


def dense_generator(h: Hamiltonian, strings: Sequence[PauliString], cap: int = DENSE_CAP) -> np.ndarray:
    """``G[n, m] = tr(P_n i[H, P_m]) / 2**L`` over ``strings``."""
    L = h.num_sites
    _check_cap(L, cap)
    H = to_dense(h, cap)
    mats = [to_dense(p, cap) for p in strings]
    G = np.empty((len(mats), len(mats)))
    for m, Pm in enumerate(mats):
        C = 1j * (H @ Pm - Pm @ H)
        for n, Pn in enumerate(mats):
            v = np.trace(Pn @ C) / 2**L
            if abs(v.imag) > 1e-12:
                raise ArithmeticError("imaginary generator entry")
            G[n, m] = v.real
    return G
