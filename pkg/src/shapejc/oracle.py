"""Brute-force reference implementations.

Nothing here reuses the closed-form code paths: spectra come from LAPACK on
the assembled Hamiltonian, propagators from the 2x2 exponential, integrals
from adaptive quadrature.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, quad_vec

from .errors import QuadratureError
from .operator_core import (
    BlockOperator,
    CouplingConfig,
    EnergyLadder,
    RungSystem,
    hamiltonian,
    h_int_operator,
    rung_system,
    sigma3_operator,
)
from .spectrum import TwoChannelState

__all__ = [
    "DenseSpectrum",
    "brute_spectrum",
    "dense_spectrum",
    "rung_block",
    "exact_rung_propagator",
    "exact_propagator",
    "quad_f",
    "heisenberg_sigma3",
    "green_particular",
]

QUAD_EPSABS = 1e-11


@dataclass(frozen=True)
class DenseSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: tuple[TwoChannelState, ...]
    rung_labels: np.ndarray  # rung index per eigenpair, -1 for the singleton

    def rung_eigenvalues(self, m: int) -> np.ndarray:
        return np.sort(self.eigenvalues[self.rung_labels == m])


def rung_block(mat: np.ndarray, n_upper: int, m: int) -> np.ndarray:
    """Extract the 2x2 (upper m, lower m+1) block of a dense two-channel matrix."""
    idx = [m, n_upper + m + 1]
    return mat[np.ix_(idx, idx)]


def brute_spectrum(rungs: RungSystem) -> DenseSpectrum:
    """Diagonalize each rung block of the assembled dense Hamiltonian with LAPACK, plus the singleton."""
    ladder = rungs.ladder
    nu, nl = ladder.n_upper, ladder.n_lower
    h = hamiltonian(rungs).dense()
    vals, vecs, labels = [], [], []
    for m in range(rungs.n_rungs):
        w, v = np.linalg.eigh(rung_block(h, nu, m))
        for k in range(2):
            up = np.zeros(nu, dtype=complex)
            lo = np.zeros(nl, dtype=complex)
            up[m], lo[m + 1] = v[0, k], v[1, k]
            vals.append(w[k])
            vecs.append(TwoChannelState(up, lo))
            labels.append(m)
    up = np.zeros(nu, dtype=complex)
    lo = np.zeros(nl, dtype=complex)
    lo[0] = 1.0
    vals.append(h[nu, nu].real)
    vecs.append(TwoChannelState(up, lo))
    labels.append(-1)
    order = np.argsort(vals, kind="stable")
    return DenseSpectrum(
        np.asarray(vals)[order],
        tuple(vecs[i] for i in order),
        np.asarray(labels)[order],
    )


def dense_spectrum(ladder: EnergyLadder, coupling: CouplingConfig) -> np.ndarray:
    """Sorted eigenvalues of the full assembled Hamiltonian."""
    return np.linalg.eigvalsh(hamiltonian(rung_system(ladder, coupling)).dense())


def exact_rung_propagator(rung: np.ndarray, t: float, hbar: float = 1.0) -> np.ndarray:
    """``exp(-i H t / hbar)`` for a real symmetric traceless 2x2 block."""
    rung = np.asarray(rung, dtype=float)
    a, b = rung[0, 0], rung[0, 1]
    w = np.hypot(a, b) / hbar
    if w == 0.0:
        return np.eye(2, dtype=complex)
    return np.cos(w * t) * np.eye(2) - 1j * np.sin(w * t) * rung / (hbar * w)


def exact_propagator(ladder: EnergyLadder, coupling: CouplingConfig, t: float) -> BlockOperator:
    """Block-wise exact interaction propagator over all rungs and the singleton."""
    rs = rung_system(ladder, coupling)
    nu = ladder.n_upper
    h = h_int_operator(rs).dense().real
    u = np.zeros_like(h, dtype=complex)
    for m in range(rs.n_rungs):
        idx = [m, nu + m + 1]
        u[np.ix_(idx, idx)] = exact_rung_propagator(h[np.ix_(idx, idx)], t, coupling.hbar)
    u[nu, nu] = np.exp(-1j * h[nu, nu] * t / coupling.hbar)
    return BlockOperator.from_dense(u, nu)


_TRIG = {"C": np.cos, "S": np.sin}


def quad_f(kind: str, x: float, w: float, t: float, epsabs: float = QUAD_EPSABS) -> float:
    """Adaptive quadrature of ``int_0^t X(x s) Y(w s) ds``."""
    if len(kind) != 2 or kind[0] not in _TRIG or kind[1] not in _TRIG:
        raise ValueError(f"unknown kind {kind!r}")
    fx, fw = _TRIG[kind[0]], _TRIG[kind[1]]
    val, err, info = quad(lambda s: fx(x * s) * fw(w * s), 0.0, t, epsabs=epsabs, epsrel=0.0, limit=200,
                          full_output=True)[:3]
    if err > epsabs:
        raise QuadratureError(f"quadrature reached only {err:.3g} (requested {epsabs:.3g}) for {kind}({x}, {w}, {t})")
    return float(val)


def heisenberg_sigma3(ladder: EnergyLadder, coupling: CouplingConfig, t: float, convention: str = "plus_i") -> BlockOperator:
    """``U^dagger sigma3 U`` by dense multiplication.

    ``convention="plus_i"`` uses the +i interaction propagator of the
    evolution module; ``'schrodinger'`` uses the exact ``exp(-i H_int t/hbar)``.
    """
    if convention == "plus_i":
        from .evolution import propagator  # the propagator under study, not a closed form for sigma3
        u = propagator(ladder, coupling, t).dense()
    elif convention == "schrodinger":
        u = exact_propagator(ladder, coupling, t).dense()
    else:
        raise ValueError(f"unknown convention {convention!r}")
    s3 = sigma3_operator(ladder).dense()
    return BlockOperator.from_dense(u.conj().T @ s3 @ u, ladder.n_upper)


def green_particular(ladder: EnergyLadder, coupling: CouplingConfig, t: float, epsabs: float = 1e-12) -> BlockOperator:
    """Particular solution by quadrature of ``int_0^t sin(nu_i (t-s))/nu_i F_ij(s) ds``.

    ``F`` is built here as ``gamma U^dagger S U`` from dense products.
    """
    from .evolution import propagator
    from .operator_core import coupling_amplitudes, coupling_operator

    nu_up = ladder.n_upper
    g = coupling_amplitudes(ladder.energies, coupling.mode)
    nu = 2.0 * coupling.alpha * g / coupling.hbar
    rows = np.concatenate([nu[1 : nu_up + 1], nu[: ladder.n_lower]])
    gam = 4.0 * coupling.alpha * coupling.delta / coupling.hbar
    s = coupling_operator(ladder, coupling.mode).dense()

    def integrand(x):
        u = propagator(ladder, coupling, x).dense()
        f = gam * (u.conj().T @ s @ u)
        k = np.where(rows == 0, t - x, np.sin(rows * (t - x)) / np.where(rows == 0, 1.0, rows))
        m = k[:, None] * f
        return np.concatenate([m.real.ravel(), m.imag.ravel()])

    n = rows.size
    val, err = quad_vec(integrand, 0.0, t, epsabs=epsabs, epsrel=0.0, limit=500)
    if err > 10 * epsabs:
        raise QuadratureError(f"Green-function quadrature reached only {err:.3g}")
    out = val[: n * n].reshape(n, n) + 1j * val[n * n :].reshape(n, n)
    return BlockOperator.from_dense(out, nu_up)
