"""Dressed energies, mixing coefficients and dressed eigenstates."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCouplingError, OutOfRangeError
from .operator_core import CouplingConfig, EnergyLadder, coupling_amplitudes

__all__ = [
    "DressedPair",
    "TwoChannelState",
    "SpectrumTable",
    "dressed_energies",
    "mixing_coefficients",
    "dressed_state",
    "spectrum_table",
]


@dataclass(frozen=True)
class DressedPair:
    """Dressed energies and mixing data of one rung.

    For the uncoupled singleton row ``m = -1``, both energies equal the
    singleton energy and the coefficient fields are NaN.
    """

    m: int
    energy_plus: float
    energy_minus: float
    lambda_plus: float
    lambda_minus: float
    c_plus: float
    c_minus: float
    gamma_plus: float
    gamma_minus: float
    delta_m: float
    uncoupled: bool = False

    @property
    def flag(self) -> str:
        return "uncoupled" if self.uncoupled else "dressed"


@dataclass(frozen=True)
class TwoChannelState:
    """Upper (length N-1) and lower (length N) complex amplitudes."""

    upper: np.ndarray
    lower: np.ndarray

    def __post_init__(self):
        for name in ("upper", "lower"):
            arr = np.array(getattr(self, name), dtype=complex, copy=True)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.upper, self.upper).real + np.vdot(self.lower, self.lower).real))

    def vector(self) -> np.ndarray:
        """Concatenated (upper, lower) amplitudes."""
        return np.concatenate([self.upper, self.lower])

    @classmethod
    def from_vector(cls, vec, n_upper: int) -> "TwoChannelState":
        vec = np.asarray(vec)
        return cls(vec[:n_upper], vec[n_upper:])

    def normalized(self) -> "TwoChannelState":
        n = self.norm
        return TwoChannelState(self.upper / n, self.lower / n)

    def overlap(self, other: "TwoChannelState") -> complex:
        """<self|other>."""
        return complex(np.vdot(self.vector(), other.vector()))

    def probabilities(self) -> tuple[np.ndarray, np.ndarray]:
        return np.abs(self.upper) ** 2, np.abs(self.lower) ** 2


def _check_closed_form_index(ladder: EnergyLadder, m: int) -> None:
    if not 0 <= m <= ladder.dim - 1:
        raise OutOfRangeError(f"rung index m={m} outside 0..{ladder.dim - 1}")


def _rung_radius(ladder: EnergyLadder, coupling: CouplingConfig, m: int) -> float:
    g = float(coupling_amplitudes(ladder.energies[m + 1], coupling.mode))
    return math.hypot(coupling.alpha * g, coupling.detuning_energy)


def dressed_energies(ladder: EnergyLadder, coupling: CouplingConfig, m: int) -> tuple[float, float]:
    """Return ``(E_plus, E_minus) = E_{m+1} +/- sqrt((alpha g)^2 + (hbar Delta)^2)``."""
    _check_closed_form_index(ladder, m)
    e = float(ladder.energies[m + 1])
    r = _rung_radius(ladder, coupling, m)
    return e + r, e - r


def mixing_coefficients(ladder: EnergyLadder, coupling: CouplingConfig, m: int) -> DressedPair:
    """Closed-form delta, gamma and C coefficients of rung ``m``."""
    _check_closed_form_index(ladder, m)
    beta = coupling.beta  # raises for alpha = 0
    e = float(ladder.energies[m + 1])
    g = float(coupling_amplitudes(e, coupling.mode))
    delta_m = beta / g
    root = math.hypot(1.0, delta_m)
    # the smaller of the two gammas is computed as a reciprocal to avoid cancellation
    small = 1.0 / (root + abs(delta_m))
    big = root + abs(delta_m)
    gamma_plus, gamma_minus = (small, big) if delta_m >= 0 else (big, small)
    c_plus = 1.0 / math.hypot(1.0, gamma_plus)
    c_minus = 1.0 / math.hypot(1.0, gamma_minus)
    e_plus, e_minus = dressed_energies(ladder, coupling, m)
    lam = _rung_radius(ladder, coupling, m)
    return DressedPair(
        m=m,
        energy_plus=e_plus,
        energy_minus=e_minus,
        lambda_plus=lam,
        lambda_minus=-lam,
        c_plus=c_plus,
        c_minus=c_minus,
        gamma_plus=gamma_plus,
        gamma_minus=gamma_minus,
        delta_m=delta_m,
    )


def dressed_state(ladder: EnergyLadder, coupling: CouplingConfig, m: int, sign: int) -> TwoChannelState:
    """Rung-``m`` eigenstate: ``C_pm`` at upper m and ``pm C_mp`` at lower m+1."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    if not 0 <= m <= ladder.dim - 2:
        raise OutOfRangeError(
            f"rung index m={m} outside 0..{ladder.dim - 2}; lower component index {m + 1} is not retained"
        )
    pair = mixing_coefficients(ladder, coupling, m)
    upper = np.zeros(ladder.n_upper, dtype=complex)
    lower = np.zeros(ladder.n_lower, dtype=complex)
    if sign == 1:
        upper[m], lower[m + 1] = pair.c_plus, pair.c_minus
    else:
        upper[m], lower[m + 1] = pair.c_minus, -pair.c_plus
    return TwoChannelState(upper, lower)


CSV_COLUMNS = ("m", "E_plus", "E_minus", "lambda_plus", "C_plus", "C_minus", "gamma_plus", "delta_m", "flag")


@dataclass(frozen=True)
class SpectrumTable:
    pairs: tuple[DressedPair, ...]

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, i):
        return self.pairs[i]

    @property
    def dressed(self) -> list[DressedPair]:
        return [p for p in self.pairs if not p.uncoupled]

    @property
    def singleton(self) -> DressedPair:
        return next(p for p in self.pairs if p.uncoupled)

    def rows(self) -> list[list[str]]:
        out = []
        for p in self.pairs:
            vals = (p.energy_plus, p.energy_minus, p.lambda_plus, p.c_plus, p.c_minus, p.gamma_plus, p.delta_m)
            out.append([str(p.m)] + [repr(float(v)) for v in vals] + [p.flag])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(self.rows())
        return buf.getvalue()


def spectrum_table(ladder: EnergyLadder, coupling: CouplingConfig, m_max: int) -> SpectrumTable:
    """Dressed pairs for ``m = 0..m_max`` followed by the uncoupled singleton row."""
    if not 0 <= m_max <= ladder.dim - 2:
        raise OutOfRangeError(f"m_max={m_max} outside 0..{ladder.dim - 2}")
    pairs = []
    for m in range(m_max + 1):
        try:
            pairs.append(mixing_coefficients(ladder, coupling, m))
        except DegenerateCouplingError:
            # alpha = 0: levels are uncoupled, report energies without mixing data
            e_plus, e_minus = dressed_energies(ladder, coupling, m)
            lam = e_plus - float(ladder.energies[m + 1])
            nan = float("nan")
            pairs.append(DressedPair(m, e_plus, e_minus, lam, -lam, nan, nan, nan, nan, nan))
    e0 = -coupling.detuning_energy + 0.0
    nan = float("nan")
    pairs.append(DressedPair(-1, e0, e0, e0, e0, nan, nan, nan, nan, nan, uncoupled=True))
    return SpectrumTable(tuple(pairs))
