"""Interaction-picture propagator, the C/D shift operators and full-state evolution."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .operator_core import (
    BlockOperator,
    CouplingConfig,
    EnergyLadder,
    coupling_amplitudes,
    h_int_operator,
    rung_system,
    sqrt_shift_down,
)
from .spectrum import TwoChannelState

__all__ = [
    "InteractionFrequencies",
    "PropagatorMatrix",
    "interaction_frequencies",
    "c_operator",
    "d_operator",
    "propagator",
    "propagator_derivative",
    "evolve_state",
    "evolution_series",
    "schrodinger_residual",
    "second_derivative_residual",
]


@dataclass(frozen=True)
class InteractionFrequencies:
    """omega1 over upper indices (uses E[m+1]) and omega2 over lower indices (uses E[n]); both length N."""

    omega1: np.ndarray
    omega2: np.ndarray

    def upper_rows(self, n_upper: int) -> np.ndarray:
        """Frequencies of the retained upper rows."""
        return self.omega1[:n_upper]


def interaction_frequencies(ladder: EnergyLadder, coupling: CouplingConfig) -> InteractionFrequencies:
    g = coupling_amplitudes(ladder.energies, coupling.mode)
    # one array over E_0..E_N so that omega2[m+1] and omega1[m] are the same float
    w = np.hypot(coupling.alpha * g, coupling.detuning_energy) / coupling.hbar
    n = ladder.dim
    return InteractionFrequencies(w[1 : n + 1].copy(), w[:n].copy())


def c_operator(ladder: EnergyLadder) -> np.ndarray:
    """Upper-lower block of C: lower m+1 -> upper m with amplitude i.

    Built as ``i * H2^(-1/4) * sqrt(T B_-)`` so the quarter powers cancel.
    """
    h2 = ladder.h2
    bad = h2[h2 <= 0]
    if bad.size:
        raise DomainError(f"H2^(-1/4) undefined at eigenvalue {bad[0]!r}")
    return 1j * (h2 ** -0.25)[:, None] * sqrt_shift_down(ladder)


def d_operator(ladder: EnergyLadder) -> np.ndarray:
    """Lower-upper block of D = -C^dagger."""
    return -c_operator(ladder).conj().T


@dataclass(frozen=True)
class PropagatorMatrix:
    op: BlockOperator
    t: float

    def dense(self) -> np.ndarray:
        return self.op.dense()

    def unitarity_defect(self) -> float:
        n = self.op.n_upper + self.op.n_lower
        u = self.dense()
        return float(max(np.linalg.norm(u.conj().T @ u - np.eye(n), 2), np.linalg.norm(u @ u.conj().T - np.eye(n), 2)))

    def rung_block(self, m: int) -> np.ndarray:
        """2x2 restriction to (upper m, lower m+1)."""
        o = self.op
        return np.array([[o.uu[m, m], o.ul[m, m + 1]], [o.lu[m + 1, m], o.ll[m + 1, m + 1]]])


def _singleton(coupling: CouplingConfig, t: float, literal: bool) -> complex:
    if literal:
        return complex(np.cos(abs(coupling.delta) * t))
    # exact interaction phase of the uncoupled state (eigenvalue -hbar Delta)
    return complex(np.exp(1j * coupling.delta * t))


def propagator(ladder: EnergyLadder, coupling: CouplingConfig, t: float, literal_singleton: bool = False) -> PropagatorMatrix:
    """``U11 = cos(w1 t)``, ``U22 = cos(w2 t)``, ``U12 = sin(w1 t) C``, ``U21 = -sin(w2 t) C^dagger``.

    The uncoupled lower index 0 evolves as ``exp(i Delta t)``; pass
    ``literal_singleton=True`` for the non-unitary ``cos(|Delta| t)`` entry.
    """
    t = float(t)
    freq = interaction_frequencies(ladder, coupling)
    nu = ladder.n_upper
    w1 = freq.upper_rows(nu)
    c = c_operator(ladder)
    uu = np.diag(np.cos(w1 * t)).astype(complex)
    ll = np.diag(np.cos(freq.omega2 * t)).astype(complex)
    ll[0, 0] = _singleton(coupling, t, literal_singleton)
    ul = np.sin(w1 * t)[:, None] * c
    lu = -np.sin(freq.omega2 * t)[:, None] * c.conj().T
    return PropagatorMatrix(BlockOperator(uu, ul, lu, ll), t)


def propagator_derivative(ladder: EnergyLadder, coupling: CouplingConfig, t: float, order: int = 1,
                          literal_singleton: bool = False) -> BlockOperator:
    """Analytic ``d^k U / dt^k`` for k = 1 or 2."""
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    freq = interaction_frequencies(ladder, coupling)
    w1 = freq.upper_rows(ladder.n_upper)
    w2 = freq.omega2
    c = c_operator(ladder)
    if order == 1:
        duu, dll = -w1 * np.sin(w1 * t), -w2 * np.sin(w2 * t)
        dul, dlu = w1 * np.cos(w1 * t), -w2 * np.cos(w2 * t)
    else:
        duu, dll = -w1 ** 2 * np.cos(w1 * t), -w2 ** 2 * np.cos(w2 * t)
        dul, dlu = -w1 ** 2 * np.sin(w1 * t), w2 ** 2 * np.sin(w2 * t)
    ll = np.diag(dll).astype(complex)
    if literal_singleton:
        ll[0, 0] = dll[0]
    else:
        ll[0, 0] = (1j * coupling.delta) ** order * np.exp(1j * coupling.delta * t)
    return BlockOperator(np.diag(duu), dul[:, None] * c, dlu[:, None] * c.conj().T, ll)


def evolve_state(state: TwoChannelState, ladder: EnergyLadder, coupling: CouplingConfig, t: float,
                 literal_singleton: bool = False) -> TwoChannelState:
    """``exp(-i H_o t / hbar) U(t) |state>``."""
    if state.upper.size != ladder.n_upper or state.lower.size != ladder.n_lower:
        raise ValueError(
            f"state has ({state.upper.size}, {state.lower.size}) amplitudes; "
            f"ladder needs ({ladder.n_upper}, {ladder.n_lower})"
        )
    u = propagator(ladder, coupling, t, literal_singleton).op
    psi = u @ state.vector()
    hb = coupling.hbar
    phase = np.exp(-1j * np.concatenate([ladder.h2, ladder.h1]) * t / hb)
    return TwoChannelState.from_vector(phase * psi, ladder.n_upper)


CSV_COLUMNS = ("t", "channel", "index", "re", "im", "prob")


def evolution_series(state: TwoChannelState, ladder: EnergyLadder, coupling: CouplingConfig, times) -> str:
    """CSV text with one row per (t, channel, index)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for t in times:
        psi = evolve_state(state, ladder, coupling, float(t))
        for channel, amps in (("upper", psi.upper), ("lower", psi.lower)):
            for i, a in enumerate(amps):
                writer.writerow([repr(float(t)), channel, i, repr(float(a.real)), repr(float(a.imag)), repr(float(abs(a) ** 2))])
    return buf.getvalue()


def _block_diag_norm(op: BlockOperator) -> float:
    # operators here are block diagonal over rungs plus the singleton
    nu = op.n_upper
    worst = abs(op.ll[0, 0])
    for m in range(nu):
        blk = np.array([[op.uu[m, m], op.ul[m, m + 1]], [op.lu[m + 1, m], op.ll[m + 1, m + 1]]])
        worst = max(worst, float(np.linalg.norm(blk, 2)))
    return float(worst)


def schrodinger_residual(ladder: EnergyLadder, coupling: CouplingConfig, t: float,
                         conjugate_offdiagonal: bool = False, literal_singleton: bool = False) -> float:
    """Operator norm of ``i hbar dU/dt - H_int U`` using the analytic derivative.

    ``conjugate_offdiagonal`` flips the sign of the off-diagonal blocks of
    U first, which maps the +i convention onto the matrix-exponential one.
    """
    u = propagator(ladder, coupling, t, literal_singleton).op
    du = propagator_derivative(ladder, coupling, t, 1, literal_singleton)
    if conjugate_offdiagonal:
        u = u.conj_offdiagonal()
        du = du.conj_offdiagonal()
    h = h_int_operator(rung_system(ladder, coupling))
    res = (1j * coupling.hbar) * du - h @ u
    return _block_diag_norm(res)


def second_derivative_residual(ladder: EnergyLadder, coupling: CouplingConfig, t: float, h: float | None = None,
                               literal_singleton: bool = False) -> float:
    """Operator norm of ``d^2U/dt^2 + W^2 U``, with W the row frequencies.

    ``h=None`` uses the analytic second derivative; otherwise a centred
    second difference with step ``h``.
    """
    freq = interaction_frequencies(ladder, coupling)
    w_rows = np.concatenate([freq.upper_rows(ladder.n_upper), freq.omega2])
    u = propagator(ladder, coupling, t, literal_singleton).dense()
    if h is None:
        d2 = propagator_derivative(ladder, coupling, t, 2, literal_singleton).dense()
    else:
        up = propagator(ladder, coupling, t + h, literal_singleton).dense()
        dn = propagator(ladder, coupling, t - h, literal_singleton).dense()
        d2 = (up - 2.0 * u + dn) / (h * h)
    return float(np.linalg.norm(d2 + (w_rows ** 2)[:, None] * u, 2))
