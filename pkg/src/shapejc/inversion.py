"""Population-inversion matrix sigma_3(t): homogeneous part, particular part and helpers.

The particular solution is assembled per rung from the truncated double
series ``F_XY`` (any ladder) or from the closed ``K`` forms (harmonic
ladder).  Both assemblies act on channel-labelled frequency arrays.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from ._backend import get_kernels
from .errors import PreconditionError, SeriesRangeError
from .evolution import interaction_frequencies
from .operator_core import (
    BlockOperator,
    CouplingConfig,
    EnergyLadder,
    coupling_amplitudes,
    coupling_operator,
    hamiltonian,
    rung_system,
    sigma3_operator,
)

__all__ = [
    "RabiFrequencies",
    "InversionSolution",
    "SERIES_GUARD",
    "KINDS",
    "rabi_frequencies",
    "gamma_constant",
    "f_series",
    "g_combination",
    "k_closed",
    "f_matrix",
    "particular_solution",
    "sigma3_of_t",
    "resonant_inversion",
    "theta_squared",
    "commutator",
    "commutator_defects",
    "inversion_series",
]

SERIES_GUARD = 25.0
DEFAULT_ORDER = 40
KINDS = ("CC", "CS", "SC", "SS")
_PARITY = {"C": 0, "S": 1}


@dataclass(frozen=True)
class RabiFrequencies:
    nu1: np.ndarray
    nu2: np.ndarray


def rabi_frequencies(ladder: EnergyLadder, coupling: CouplingConfig) -> RabiFrequencies:
    """``hbar nu = 2 alpha g(E)``: nu1 over E[1..N], nu2 over E[0..N-1]."""
    nu = 2.0 * coupling.alpha * coupling_amplitudes(ladder.energies, coupling.mode) / coupling.hbar
    n = ladder.dim
    return RabiFrequencies(nu[1 : n + 1].copy(), nu[:n].copy())


def gamma_constant(coupling: CouplingConfig) -> float:
    """``4 alpha^2 beta / hbar^2``, written as ``4 alpha Delta / hbar`` so alpha = 0 is allowed."""
    return 4.0 * coupling.alpha * coupling.delta / coupling.hbar


def _parse_kind(kind: str) -> tuple[int, int]:
    if kind not in KINDS:
        raise ValueError(f"unknown series kind {kind!r}; expected one of {KINDS}")
    return _PARITY[kind[0]], _PARITY[kind[1]]


def _check_guard(x, w, t):
    zx = np.max(np.abs(np.asarray(x, dtype=float))) * abs(t) if np.size(x) else 0.0
    zw = np.max(np.abs(np.asarray(w, dtype=float))) * abs(t) if np.size(w) else 0.0
    if zx > SERIES_GUARD or zw > SERIES_GUARD:
        raise SeriesRangeError(
            f"series arguments |x|t={zx:.6g}, |w|t={zw:.6g} exceed the guard {SERIES_GUARD}; "
            "use oracle.quad_f for this range"
        )


def f_series(kind: str, x: float, w: float, t: float, order: int = DEFAULT_ORDER, backend: str | None = None) -> float:
    """Truncated double series of ``int_0^t X(x s) Y(w s) ds`` with all index pairs m+n <= order."""
    px, pw = _parse_kind(kind)
    if order < 1:
        raise ValueError(f"series order must be >= 1, got {order}")
    _check_guard(x, w, t)
    return float(get_kernels(backend).f_series(px, pw, float(x), float(w), float(t), int(order)))


def _f_many(kind, x, w, t, order, backend=None) -> np.ndarray:
    px, pw = _parse_kind(kind)
    x = np.ascontiguousarray(x, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    _check_guard(x, w, t)
    return np.asarray(get_kernels(backend).f_series_many(px, pw, x, w, float(t), int(order)))


def g_combination(kind: str, sign: int, p, q, r, t: float, order: int = DEFAULT_ORDER, backend: str | None = None):
    """``F(t; p-q, r) + sign * F(t; p+q, r)``; accepts scalars or equal-length arrays."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    scalar = np.ndim(p) == 0 and np.ndim(q) == 0 and np.ndim(r) == 0
    p, q, r = np.broadcast_arrays(*(np.atleast_1d(np.asarray(v, dtype=float)) for v in (p, q, r)))
    out = _f_many(kind, p - q, r, t, order, backend) + sign * _f_many(kind, p + q, r, t, order, backend)
    return float(out[0]) if scalar else out


def _sinc(x):
    return np.sinc(np.asarray(x) / np.pi)


def k_closed(kind: str, p, q, r, t: float, eps_deg: float = 1e-8):
    """Closed forms ``K_S`` and ``K_C`` with ``s = p + q``.

    Where ``|r^2 - s^2| < eps_deg`` an equivalent product form without the
    vanishing denominator is used.
    """
    if kind not in ("S", "C"):
        raise ValueError(f"unknown K kind {kind!r}; expected 'S' or 'C'")
    scalar = np.ndim(p) == 0 and np.ndim(q) == 0 and np.ndim(r) == 0
    p, q, r = np.broadcast_arrays(*(np.atleast_1d(np.asarray(v, dtype=float)) for v in (p, q, r)))
    s = p + q
    den = r * r - s * s
    degenerate = np.abs(den) < eps_deg
    safe = np.where(degenerate, 1.0, den)
    a = 0.5 * (s + r) * t
    b = 0.5 * (s - r) * t
    if kind == "S":
        direct = (r * np.sin(s * t) - s * np.sin(r * t)) / safe
        smooth = 0.5 * t * (np.cos(b) * _sinc(a) - np.cos(a) * _sinc(b))
    else:
        direct = r * (np.cos(s * t) - np.cos(r * t)) / safe
        smooth = r * 0.5 * t * t * _sinc(a) * _sinc(b)
    out = np.where(degenerate, smooth, direct)
    return float(out[0]) if scalar else out


def _rung_data(ladder: EnergyLadder, coupling: CouplingConfig):
    """Channel-labelled per-rung arrays: frequencies on the upper row m and the lower row m+1."""
    nu_up = ladder.n_upper
    rabi = rabi_frequencies(ladder, coupling)
    freq = interaction_frequencies(ladder, coupling)
    e = ladder.h2
    q_left = e ** 0.25
    q_right = e ** 0.25 if coupling.mode == "linear" else e ** 0.75
    return {
        "nu1": rabi.nu1[:nu_up],
        "nu2": rabi.nu2[1:],
        "om1": freq.omega1[:nu_up],
        "om2": freq.omega2[1:],
        "amp": q_left * q_right,
    }


def _assemble(n_upper: int, n_lower: int, p11, p12, p21, p22) -> BlockOperator:
    idx = np.arange(n_upper)
    uu = np.zeros((n_upper, n_upper), dtype=complex)
    ul = np.zeros((n_upper, n_lower), dtype=complex)
    lu = np.zeros((n_lower, n_upper), dtype=complex)
    ll = np.zeros((n_lower, n_lower), dtype=complex)
    uu[idx, idx] = p11
    ul[idx, idx + 1] = p12
    lu[idx + 1, idx] = p21
    ll[idx + 1, idx + 1] = p22
    return BlockOperator(uu, ul, lu, ll)


def f_matrix(ladder: EnergyLadder, coupling: CouplingConfig, t: float) -> BlockOperator:
    """Driving term ``gamma U^dagger S U`` assembled from its trig factors and quarter-power amplitudes."""
    d = _rung_data(ladder, coupling)
    gam = gamma_constant(coupling)
    c1, s1 = np.cos(d["om1"] * t), np.sin(d["om1"] * t)
    c2, s2 = np.cos(d["om2"] * t), np.sin(d["om2"] * t)
    a = d["amp"]
    f11 = 1j * gam * (a * c2 * s1 - a * s1 * c2)
    f12 = gam * (a * c2 * c1 + a * s1 * s2)
    f21 = gam * (a * c1 * c2 + a * s2 * s1)
    f22 = 1j * gam * (a * c1 * s2 - a * s2 * c1)
    return _assemble(ladder.n_upper, ladder.n_lower, f11, f12, f21, f22)


def _particular_series(d, gam, t, order, backend):
    nu1, nu2, om1, om2, a = d["nu1"], d["nu2"], d["om1"], d["om2"], d["amp"]
    y1, z1 = np.cos(nu1 * t), np.sin(nu1 * t)
    y2, z2 = np.cos(nu2 * t), np.sin(nu2 * t)

    def G(kind, sign, p, q, r):
        return g_combination(kind, sign, p, q, r, t, order, backend)

    h1 = 0.5 * gam / nu1
    h2 = 0.5 * gam / nu2
    p11 = 1j * h1 * (
        a * (z2 * G("CS", 1, nu2, om2, om1) - y2 * G("SS", 1, nu2, om2, om1))
        + a * (z1 * G("SC", -1, nu1, om1, om2) + y1 * G("CC", -1, nu1, om1, om2))
    )
    p12 = h1 * (
        a * (z2 * G("CC", 1, nu2, om2, om1) - y2 * G("SC", 1, nu2, om2, om1))
        - a * (z1 * G("SS", -1, nu1, om1, om2) + y1 * G("CS", -1, nu1, om1, om2))
    )
    p21 = h2 * (
        a * (z1 * G("CC", 1, nu1, om1, om2) - y1 * G("SC", 1, nu1, om1, om2))
        - a * (z2 * G("SS", -1, nu2, om2, om1) + y2 * G("CS", -1, nu2, om2, om1))
    )
    p22 = 1j * h2 * (
        a * (z1 * G("CS", 1, nu1, om1, om2) - y1 * G("SS", 1, nu1, om1, om2))
        + a * (z2 * G("SC", -1, nu2, om2, om1) + y2 * G("CC", -1, nu2, om2, om1))
    )
    return p11, p12, p21, p22


def _particular_closed(d, gam, t):
    nu1, nu2, om1, om2, a = d["nu1"], d["nu2"], d["om1"], d["om2"], d["amp"]

    def pair(kind, r):
        return k_closed(kind, om2, om1, r, t), k_closed(kind, om2, -om1, r, t)

    h1 = 0.5 * gam / nu1
    h2 = 0.5 * gam / nu2
    ks2p, ks2m = pair("S", nu2)
    ks1p, ks1m = pair("S", nu1)
    kc2p, kc2m = pair("C", nu2)
    kc1p, kc1m = pair("C", nu1)
    p11 = 1j * h1 * (a * (ks2p - ks2m) - a * (ks1p - ks1m))
    p12 = h1 * (a * (kc2p + kc2m) - a * (kc1p - kc1m))
    p21 = h2 * (a * (kc1p + kc1m) - a * (kc2p - kc2m))
    p22 = 1j * h2 * (a * (ks1p + ks1m) - a * (ks2p + ks2m))
    return p11, p12, p21, p22


def particular_solution(ladder: EnergyLadder, coupling: CouplingConfig, t: float, order: int = DEFAULT_ORDER,
                        form: str = "series", backend: str | None = None) -> BlockOperator:
    """Particular solution of the driven inversion equation with zero value and slope at t = 0.

    ``form='series'`` uses the F/G double series, ``form='closed'`` the K
    closed forms.
    """
    if form not in ("series", "closed"):
        raise ValueError(f"unknown form {form!r}; expected 'series' or 'closed'")
    t = float(t)
    gam = gamma_constant(coupling)
    if gam == 0.0 or t == 0.0:
        return BlockOperator.zeros(ladder.n_upper, ladder.n_lower)
    d = _rung_data(ladder, coupling)
    if form == "series":
        parts = _particular_series(d, gam, t, order, backend)
    else:
        parts = _particular_closed(d, gam, t)
    return _assemble(ladder.n_upper, ladder.n_lower, *parts)


@dataclass(frozen=True)
class InversionSolution:
    op: BlockOperator
    t: float
    series_order: int
    gamma_const: float
    homogeneous: BlockOperator
    particular: BlockOperator

    def dense(self) -> np.ndarray:
        return self.op.dense()

    def hermiticity_defect(self) -> float:
        return (self.op - self.op.adjoint()).max_abs()


def _row_frequencies(ladder: EnergyLadder, coupling: CouplingConfig) -> np.ndarray:
    rabi = rabi_frequencies(ladder, coupling)
    return np.concatenate([rabi.nu1[: ladder.n_upper], rabi.nu2])


def sigma3_of_t(ladder: EnergyLadder, coupling: CouplingConfig, t: float, sigma3_init: BlockOperator | None = None,
                order: int = DEFAULT_ORDER, form: str = "series", backend: str | None = None,
                atol: float = 1e-12) -> InversionSolution:
    """``cos(nu_i t) s0 + (2 i alpha / hbar) sin(nu_i t)/nu_i [S s0] + sigma^P`` with row frequency nu_i."""
    s0 = sigma3_operator(ladder) if sigma3_init is None else sigma3_init
    if (s0.n_upper, s0.n_lower) != (ladder.n_upper, ladder.n_lower):
        raise ValueError(
            f"initializer has ({s0.n_upper}, {s0.n_lower}) channel sizes; ladder needs ({ladder.n_upper}, {ladder.n_lower})"
        )
    if not s0.is_hermitian(atol):
        raise PreconditionError(f"sigma3 initializer is not Hermitian (defect {(s0 - s0.adjoint()).max_abs():.3g})")
    t = float(t)
    nu = _row_frequencies(ladder, coupling)
    # sin(nu t)/nu -> t where nu = 0
    sinc_t = t * _sinc(nu * t)
    s = coupling_operator(ladder, coupling.mode)
    dense0 = s0.dense()
    hom = np.cos(nu * t)[:, None] * dense0 + (2j * coupling.alpha / coupling.hbar) * sinc_t[:, None] * (s @ s0).dense()
    hom_op = BlockOperator.from_dense(hom, ladder.n_upper)
    part = particular_solution(ladder, coupling, t, order, form, backend)
    return InversionSolution(hom_op + part, t, order, gamma_constant(coupling), hom_op, part)


def resonant_inversion(ladder: EnergyLadder, coupling: CouplingConfig, t: float,
                       sigma3_init: BlockOperator | None = None) -> InversionSolution:
    """Zero-detuning inversion, where the particular part vanishes identically."""
    if coupling.delta != 0:
        raise PreconditionError(f"resonant inversion needs delta = 0, got {coupling.delta!r}")
    return sigma3_of_t(ladder, coupling, t, sigma3_init)


def theta_squared(ladder: EnergyLadder, coupling: CouplingConfig) -> BlockOperator:
    """``Theta^2 = 4 alpha^2 S^2 / hbar^2``, a constant of the motion."""
    s = coupling_operator(ladder, coupling.mode)
    return (4.0 * coupling.alpha ** 2 / coupling.hbar ** 2) * (s @ s)


def commutator(a: BlockOperator, b: BlockOperator) -> BlockOperator:
    return a @ b - b @ a


def commutator_defects(ladder: EnergyLadder, coupling: CouplingConfig) -> dict[str, float]:
    """Max-abs deviations of the inversion commutator identities.

    ``sigma3_H``: [sigma3, H] + 2 alpha S sigma3; ``S_H``: [S, H] - 2 hbar Delta S sigma3;
    ``theta2_H``: [Theta^2, H].
    """
    h = hamiltonian(rung_system(ladder, coupling))
    s = coupling_operator(ladder, coupling.mode)
    s3 = sigma3_operator(ladder)
    a = coupling.alpha
    hd = coupling.detuning_energy  # alpha * beta
    return {
        "sigma3_H": (commutator(s3, h) + (2.0 * a) * (s @ s3)).max_abs(),
        "S_H": (commutator(s, h) - (2.0 * hd) * (s @ s3)).max_abs(),
        "theta2_H": commutator(theta_squared(ladder, coupling), h).max_abs(),
    }


CSV_COLUMNS = ("t", "i", "j", "rung", "re", "im", "source")


def _support(ladder: EnergyLadder, s0: BlockOperator, coupling: CouplingConfig) -> list[tuple[int, int]]:
    nu_up = ladder.n_upper
    mask = np.zeros((nu_up + ladder.n_lower,) * 2, dtype=bool)
    for m in range(nu_up):
        i, j = m, nu_up + m + 1
        mask[i, i] = mask[i, j] = mask[j, i] = mask[j, j] = True
    mask[nu_up, nu_up] = True
    s = coupling_operator(ladder, coupling.mode)
    mask |= s0.dense() != 0
    mask |= (s @ s0).dense() != 0
    return [tuple(ij) for ij in np.argwhere(mask)]


def _rung_of(index: int, n_upper: int) -> int:
    # upper m belongs to rung m, lower n to rung n-1; the lower ground state is -1
    return index if index < n_upper else index - n_upper - 1


def inversion_series(ladder: EnergyLadder, coupling: CouplingConfig, times, sigma3_init: BlockOperator | None = None,
                     order: int = DEFAULT_ORDER) -> str:
    """CSV text: homogeneous, particular and total rows per (t, i, j) over the rung support."""
    s0 = sigma3_operator(ladder) if sigma3_init is None else sigma3_init
    support = _support(ladder, s0, coupling)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for t in times:
        sol = sigma3_of_t(ladder, coupling, float(t), s0, order)
        mats = (("homogeneous", sol.homogeneous.dense()), ("particular", sol.particular.dense()), ("total", sol.dense()))
        for i, j in support:
            rung = _rung_of(int(i), ladder.n_upper)
            for source, mat in mats:
                v = mat[i, j]
                writer.writerow([repr(float(t)), int(i), int(j), rung, repr(float(v.real)), repr(float(v.imag)), source])
    return buf.getvalue()


def series_term_bound(x: float, t: float, order: int) -> float:
    """Magnitude of the first omitted single-series term, a cheap truncation estimate."""
    z = abs(x * t)
    k = 2 * (order + 1)
    return math.exp(k * math.log(z) - math.lgamma(k + 1)) if z > 0 else 0.0
