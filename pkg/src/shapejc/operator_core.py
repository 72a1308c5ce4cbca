"""Shape-invariant energy ladders and their two-channel operator representation.

Every operator lives in the energy-index basis.  The upper channel carries
indices ``m = 0 .. N-2`` (the partner Hamiltonian H2 has eigenvalue
``E[m+1]`` there) and the lower channel carries ``n = 0 .. N-1`` (H1 has
eigenvalue ``E[n]``).  Upper index ``m`` and lower index ``m+1`` form rung
``m``; lower index 0 is the uncoupled singleton.  With this layout the
interaction is exactly block diagonal and no truncation edge exists.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DegenerateCouplingError, DomainError, ModelValidityError, OutOfRangeError

__all__ = [
    "ShapeInvariantModel",
    "EnergyLadder",
    "CouplingConfig",
    "RungSystem",
    "BlockOperator",
    "remainder_sequence",
    "energy_ladder",
    "rung_system",
    "diag_function",
    "coupling_amplitudes",
    "s_operator",
    "coupling_operator",
    "sigma3_operator",
    "h0_operator",
    "h_int_operator",
    "hamiltonian",
    "sqrt_shift_down",
    "partner_power",
]

MODEL_KINDS = ("harmonic", "scaling", "explicit")
COUPLING_MODES = ("linear", "intensity")


def _frozen(a) -> np.ndarray:
    arr = np.array(a, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ShapeInvariantModel:
    """Remainder sequence R(a_1), R(a_2), ... of a shape-invariant potential.

    Use the :meth:`harmonic`, :meth:`scaling` and :meth:`explicit`
    constructors rather than filling the fields by hand.
    """

    kind: str
    omega: float | None = None
    q: float | None = None
    r1: float | None = None
    remainders: tuple[float, ...] | None = None
    hbar: float = 1.0

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ModelValidityError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ModelValidityError(f"hbar must be a positive finite number, got {self.hbar!r}")
        if self.kind == "harmonic":
            if self.omega is None or not (self.omega > 0 and math.isfinite(self.omega)):
                raise ModelValidityError(f"harmonic model needs omega > 0, got {self.omega!r}")
        elif self.kind == "scaling":
            if self.q is None or not (0 < self.q <= 1):
                raise ModelValidityError(f"scaling model needs q in (0, 1], got {self.q!r}")
            if self.r1 is None or not (self.r1 > 0 and math.isfinite(self.r1)):
                raise ModelValidityError(f"scaling model needs r1 > 0, got {self.r1!r}")
        else:
            if not self.remainders:
                raise ModelValidityError("explicit model needs a non-empty remainder list")
            object.__setattr__(self, "remainders", tuple(float(r) for r in self.remainders))
            for k, r in enumerate(self.remainders, start=1):
                if not (r > 0 and math.isfinite(r)):
                    raise ModelValidityError(f"remainder R_{k} = {r!r} is not strictly positive")

    @classmethod
    def harmonic(cls, omega: float = 1.0, hbar: float = 1.0) -> "ShapeInvariantModel":
        return cls("harmonic", omega=float(omega), hbar=float(hbar))

    @classmethod
    def scaling(cls, q: float, r1: float, hbar: float = 1.0) -> "ShapeInvariantModel":
        return cls("scaling", q=float(q), r1=float(r1), hbar=float(hbar))

    @classmethod
    def explicit(cls, remainders: Iterable[float], hbar: float = 1.0) -> "ShapeInvariantModel":
        return cls("explicit", remainders=tuple(remainders), hbar=float(hbar))

    @classmethod
    def from_dict(cls, cfg: dict) -> "ShapeInvariantModel":
        kind = cfg.get("kind")
        hbar = float(cfg.get("hbar", 1.0))
        if kind == "harmonic":
            return cls.harmonic(cfg.get("omega", 1.0), hbar)
        if kind == "scaling":
            if "q" not in cfg or "r1" not in cfg:
                raise ModelValidityError("scaling model config needs 'q' and 'r1'")
            return cls.scaling(cfg["q"], cfg["r1"], hbar)
        if kind == "explicit":
            if "remainders" not in cfg:
                raise ModelValidityError("explicit model config needs 'remainders'")
            return cls.explicit(cfg["remainders"], hbar)
        raise ModelValidityError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")

    def to_dict(self) -> dict:
        out: dict = {"kind": self.kind, "hbar": self.hbar}
        if self.kind == "harmonic":
            out["omega"] = self.omega
        elif self.kind == "scaling":
            out.update(q=self.q, r1=self.r1)
        else:
            out["remainders"] = list(self.remainders)
        return out


def remainder_sequence(model: ShapeInvariantModel, n: int) -> np.ndarray:
    """Return ``[R(a_1), ..., R(a_n)]``.

    Harmonic models give the constant ``hbar*omega``; scaling models give
    ``r1 * q**(k-1)``; explicit models return their stored list.
    """
    n = int(n)
    if n < 1:
        raise OutOfRangeError(f"need at least one remainder, got n={n}")
    if model.kind == "harmonic":
        seq = np.full(n, model.hbar * model.omega)
    elif model.kind == "scaling":
        seq = model.r1 * model.q ** np.arange(n, dtype=float)
    else:
        if n > len(model.remainders):
            raise OutOfRangeError(
                f"explicit model holds {len(model.remainders)} remainders; "
                f"requested n={n} exceeds the maximum {len(model.remainders)}"
            )
        seq = np.array(model.remainders[:n], dtype=float)
    bad = np.flatnonzero(~(seq > 0))
    if bad.size:
        k = int(bad[0]) + 1
        raise ModelValidityError(f"remainder R_{k} = {seq[k - 1]!r} is not strictly positive")
    return seq


@dataclass(frozen=True)
class EnergyLadder:
    """Truncated eigenvalue ladder ``E_0 .. E_N`` with ``E_0 = 0``."""

    energies: np.ndarray
    hbar: float = 1.0

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        if e.ndim != 1 or e.size < 3:
            raise ModelValidityError("an energy ladder needs E_0..E_N with N >= 2")
        if e[0] != 0.0:
            raise ModelValidityError(f"ground energy must be exactly 0, got {e[0]!r}")
        # remainders far below E_n round away, so only a decrease is invalid
        if e[1] <= 0.0 or np.any(np.diff(e) < 0):
            raise ModelValidityError("ladder energies must increase from E_0 = 0")
        object.__setattr__(self, "energies", _frozen(e))

    @property
    def dim(self) -> int:
        """Truncation size N (number of lower-channel levels)."""
        return self.energies.size - 1

    @property
    def n_upper(self) -> int:
        return self.dim - 1

    @property
    def n_lower(self) -> int:
        return self.dim

    @property
    def h1(self) -> np.ndarray:
        """Eigenvalues of H1 on lower indices 0..N-1."""
        return self.energies[: self.dim]

    @property
    def h2(self) -> np.ndarray:
        """Eigenvalues of H2 on upper indices 0..N-2 (``E[m+1]``)."""
        return self.energies[1 : self.dim]

    def remainders(self) -> np.ndarray:
        return np.diff(self.energies)


def energy_ladder(model: ShapeInvariantModel, dim: int) -> EnergyLadder:
    """Build ``E_n = sum_{k<=n} R(a_k)`` for ``n = 0 .. dim``."""
    dim = int(dim)
    if dim < 2:
        raise OutOfRangeError(f"ladder dimension must be >= 2, got {dim}")
    rem = remainder_sequence(model, dim)
    energies = np.zeros(dim + 1)
    # fsum keeps each partial sum correctly rounded
    acc: list[float] = []
    for k, r in enumerate(rem, start=1):
        acc.append(float(r))
        energies[k] = math.fsum(acc)
    return EnergyLadder(energies, model.hbar)


@dataclass(frozen=True)
class CouplingConfig:
    """Coupling strength, detuning and coupling mode.

    ``alpha`` carries sqrt(energy) units in linear mode and is dimensionless
    in intensity mode.  ``alpha = 0`` is allowed (uncoupled levels) but then
    ``beta`` is undefined.
    """

    alpha: float
    delta: float
    mode: str = "linear"
    hbar: float = 1.0

    def __post_init__(self):
        if self.mode not in COUPLING_MODES:
            raise ModelValidityError(f"unknown coupling mode {self.mode!r}; expected one of {COUPLING_MODES}")
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise ModelValidityError(f"alpha must be a non-negative finite number, got {self.alpha!r}")
        if not math.isfinite(self.delta):
            raise ModelValidityError(f"delta must be finite, got {self.delta!r}")
        if not (self.hbar > 0 and math.isfinite(self.hbar)):
            raise ModelValidityError(f"hbar must be positive, got {self.hbar!r}")

    @property
    def beta(self) -> float:
        if self.alpha == 0:
            raise DegenerateCouplingError("beta = hbar*delta/alpha is undefined for alpha = 0")
        return self.hbar * self.delta / self.alpha

    @property
    def detuning_energy(self) -> float:
        return self.hbar * self.delta

    def replace(self, **changes) -> "CouplingConfig":
        data = {"alpha": self.alpha, "delta": self.delta, "mode": self.mode, "hbar": self.hbar}
        data.update(changes)
        return CouplingConfig(**data)

    @classmethod
    def from_dict(cls, cfg: dict, hbar: float = 1.0) -> "CouplingConfig":
        missing = [k for k in ("alpha", "delta") if k not in cfg]
        if missing:
            raise ModelValidityError(f"coupling config is missing {missing}")
        return cls(float(cfg["alpha"]), float(cfg["delta"]), cfg.get("mode", "linear"), float(hbar))

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "delta": self.delta, "mode": self.mode}


def coupling_amplitudes(energies, mode: str) -> np.ndarray:
    """Rung amplitude g(E): sqrt(E) for linear coupling, E for intensity coupling."""
    e = np.asarray(energies, dtype=float)
    if mode == "linear":
        return np.sqrt(e)
    if mode == "intensity":
        return e.copy()
    raise ModelValidityError(f"unknown coupling mode {mode!r}")


@dataclass(frozen=True)
class RungSystem:
    """Block decomposition of the interaction into 2x2 rungs plus a singleton."""

    ladder: EnergyLadder
    coupling: CouplingConfig
    rung_amplitudes: np.ndarray = field(init=False)

    def __post_init__(self):
        if not math.isclose(self.ladder.hbar, self.coupling.hbar, rel_tol=0, abs_tol=0):
            raise ModelValidityError(
                f"ladder hbar {self.ladder.hbar!r} differs from coupling hbar {self.coupling.hbar!r}"
            )
        g = coupling_amplitudes(self.ladder.energies[1:], self.coupling.mode)
        object.__setattr__(self, "rung_amplitudes", _frozen(g))

    @property
    def dim(self) -> int:
        return self.ladder.dim

    @property
    def n_rungs(self) -> int:
        """Rungs retained in the operator representation (m = 0..N-2)."""
        return self.ladder.dim - 1

    def rung_energy(self, m: int) -> float:
        return float(self.ladder.energies[m + 1])

    def rung_matrix(self, m: int) -> np.ndarray:
        """2x2 interaction ``alpha*[[beta, g], [g, -beta]]`` acting on (upper m, lower m+1)."""
        if not 0 <= m < self.n_rungs:
            raise OutOfRangeError(f"rung index {m} outside 0..{self.n_rungs - 1}")
        hd = self.coupling.detuning_energy
        ag = self.coupling.alpha * self.rung_amplitudes[m]
        return np.array([[hd, ag], [ag, -hd]])

    @property
    def singleton_energy(self) -> float:
        """Interaction eigenvalue of the uncoupled lower ground state."""
        return -self.coupling.detuning_energy


def rung_system(ladder: EnergyLadder, coupling: CouplingConfig) -> RungSystem:
    return RungSystem(ladder, coupling)


@dataclass(frozen=True)
class BlockOperator:
    """2x2 arrangement of channel blocks (upper-upper, upper-lower, lower-upper, lower-lower)."""

    uu: np.ndarray
    ul: np.ndarray
    lu: np.ndarray
    ll: np.ndarray

    def __post_init__(self):
        nu, nl = self.uu.shape[0], self.ll.shape[0]
        shapes = {"uu": (nu, nu), "ul": (nu, nl), "lu": (nl, nu), "ll": (nl, nl)}
        for name, shape in shapes.items():
            block = np.asarray(getattr(self, name), dtype=complex)
            if block.shape != shape:
                raise ValueError(f"block {name} has shape {block.shape}, expected {shape}")
            object.__setattr__(self, name, _frozen(block))

    @property
    def n_upper(self) -> int:
        return self.uu.shape[0]

    @property
    def n_lower(self) -> int:
        return self.ll.shape[0]

    @classmethod
    def zeros(cls, n_upper: int, n_lower: int) -> "BlockOperator":
        return cls(
            np.zeros((n_upper, n_upper)),
            np.zeros((n_upper, n_lower)),
            np.zeros((n_lower, n_upper)),
            np.zeros((n_lower, n_lower)),
        )

    @classmethod
    def identity(cls, n_upper: int, n_lower: int) -> "BlockOperator":
        return cls.diagonal(np.ones(n_upper), np.ones(n_lower))

    @classmethod
    def diagonal(cls, upper, lower) -> "BlockOperator":
        upper, lower = np.asarray(upper), np.asarray(lower)
        nu, nl = upper.size, lower.size
        return cls(np.diag(upper), np.zeros((nu, nl)), np.zeros((nl, nu)), np.diag(lower))

    @classmethod
    def from_dense(cls, mat, n_upper: int) -> "BlockOperator":
        mat = np.asarray(mat)
        k = n_upper
        return cls(mat[:k, :k], mat[:k, k:], mat[k:, :k], mat[k:, k:])

    def dense(self) -> np.ndarray:
        return np.block([[self.uu, self.ul], [self.lu, self.ll]])

    def adjoint(self) -> "BlockOperator":
        return BlockOperator(self.uu.conj().T, self.lu.conj().T, self.ul.conj().T, self.ll.conj().T)

    def conj_offdiagonal(self) -> "BlockOperator":
        """Complex-conjugate the two off-diagonal blocks."""
        return BlockOperator(self.uu, self.ul.conj(), self.lu.conj(), self.ll)

    def norm(self) -> float:
        """Spectral (operator 2-) norm."""
        return float(np.linalg.norm(self.dense(), 2))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.dense())))

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return (self - self.adjoint()).max_abs() <= atol

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        return BlockOperator(self.uu + other.uu, self.ul + other.ul, self.lu + other.lu, self.ll + other.ll)

    def __sub__(self, other: "BlockOperator") -> "BlockOperator":
        return BlockOperator(self.uu - other.uu, self.ul - other.ul, self.lu - other.lu, self.ll - other.ll)

    def __neg__(self) -> "BlockOperator":
        return BlockOperator(-self.uu, -self.ul, -self.lu, -self.ll)

    def __mul__(self, scalar) -> "BlockOperator":
        return BlockOperator(self.uu * scalar, self.ul * scalar, self.lu * scalar, self.ll * scalar)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, BlockOperator):
            return BlockOperator(
                self.uu @ other.uu + self.ul @ other.lu,
                self.uu @ other.ul + self.ul @ other.ll,
                self.lu @ other.uu + self.ll @ other.lu,
                self.lu @ other.ul + self.ll @ other.ll,
            )
        return self.dense() @ np.asarray(other)


def diag_function(values: Sequence[float], f: Callable[[float], float]) -> np.ndarray:
    """Apply ``f`` to each eigenvalue, giving the diagonal of ``f(H)``.

    Raises :class:`DomainError` naming the first eigenvalue where ``f`` is
    undefined (exception or non-finite result).
    """
    out = []
    for v in np.asarray(values, dtype=float).ravel():
        try:
            with np.errstate(all="raise"):
                r = f(float(v))
        except (ValueError, ZeroDivisionError, FloatingPointError, OverflowError) as exc:
            raise DomainError(f"function undefined at eigenvalue {v!r}: {exc}") from exc
        if isinstance(r, complex) or not math.isfinite(r):
            raise DomainError(f"function undefined at eigenvalue {v!r} (got {r!r})")
        out.append(float(r))
    return np.array(out)


def _shift_down(amplitudes: np.ndarray) -> np.ndarray:
    """Upper-lower block mapping lower m+1 -> upper m with the given amplitudes."""
    n_up = amplitudes.size
    block = np.zeros((n_up, n_up + 1))
    block[np.arange(n_up), np.arange(1, n_up + 1)] = amplitudes
    return block


def _off_diagonal(ul: np.ndarray) -> BlockOperator:
    nu, nl = ul.shape
    return BlockOperator(np.zeros((nu, nu)), ul, ul.conj().T, np.zeros((nl, nl)))


def s_operator(ladder: EnergyLadder) -> BlockOperator:
    """``S = sigma_+ A + sigma_- A^dagger``: upper-lower block ``T B_-`` with amplitude sqrt(E_{m+1})."""
    return _off_diagonal(_shift_down(np.sqrt(ladder.h2)))


def coupling_operator(ladder: EnergyLadder, mode: str) -> BlockOperator:
    """``S`` in linear mode, ``S_i`` (amplitude E_{m+1}) in intensity mode."""
    return _off_diagonal(_shift_down(coupling_amplitudes(ladder.h2, mode)))


def sqrt_shift_down(ladder: EnergyLadder) -> np.ndarray:
    """Square root of ``T B_-``: shift lower m+1 -> upper m with amplitude E_{m+1}**(1/4)."""
    return _shift_down(ladder.h2 ** 0.25)


def partner_power(ladder: EnergyLadder, channel: str, power: float) -> np.ndarray:
    """Diagonal of H2**power (channel 'upper') or H1**power (channel 'lower')."""
    values = ladder.h2 if channel == "upper" else ladder.h1
    if power < 0 and np.any(values <= 0):
        bad = values[values <= 0][0]
        raise DomainError(f"negative power {power} undefined at eigenvalue {bad!r}")
    return values ** power


def sigma3_operator(ladder: EnergyLadder) -> BlockOperator:
    return BlockOperator.diagonal(np.ones(ladder.n_upper), -np.ones(ladder.n_lower))


def h0_operator(ladder: EnergyLadder) -> BlockOperator:
    """``H_o = S^2 = diag(H2, H1)``."""
    return BlockOperator.diagonal(ladder.h2, ladder.h1)


def h_int_operator(rungs: RungSystem) -> BlockOperator:
    """``alpha * S_mode + hbar * Delta * sigma_3``."""
    c = rungs.coupling
    return c.alpha * coupling_operator(rungs.ladder, c.mode) + c.detuning_energy * sigma3_operator(rungs.ladder)


def hamiltonian(rungs: RungSystem) -> BlockOperator:
    return h0_operator(rungs.ladder) + h_int_operator(rungs)
