"""Command-line front end: spectrum tables, state evolution, inversion series and verification."""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import evolution, inversion, oracle, spectrum
from .errors import ModelValidityError, OutOfRangeError, PreconditionError, SeriesRangeError, ShapeJCError
from .operator_core import (
    BlockOperator,
    CouplingConfig,
    EnergyLadder,
    ShapeInvariantModel,
    energy_ladder,
    rung_system,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
SUITES = ("spectrum", "evolution", "inversion", "series", "all")


class ConfigError(Exception):
    """Invalid configuration; message names the offending field."""


DEFAULT_CONFIG = {
    "model": {"kind": "harmonic", "omega": 1.0, "hbar": 1.0},
    "coupling": {"alpha": 0.2, "delta": 0.3, "mode": "linear"},
    "dim": 16,
    "time": {"t_max": 10.0, "dt": 0.1},
    "series_order": 40,
    "output": None,
}


@dataclass
class RunConfig:
    model: ShapeInvariantModel
    coupling: CouplingConfig
    dim: int
    t_max: float
    dt: float
    series_order: int
    output: str | None = None
    raw: dict = field(default_factory=dict)

    def ladder(self) -> EnergyLadder:
        return energy_ladder(self.model, self.dim)

    def times(self) -> np.ndarray:
        n = int(math.floor(self.t_max / self.dt + 1e-9)) + 1
        return np.arange(n) * self.dt


def _number(value, name, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field '{name}' must be a number, got {value!r}")
    if kind is int:
        if float(value) != int(value):
            raise ConfigError(f"field '{name}' must be an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ConfigError(f"field '{name}' must be finite, got {value!r}")
    return float(value)


def build_config(raw: dict) -> RunConfig:
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))
    for key, val in raw.items():
        if key not in cfg:
            raise ConfigError(f"unknown config field '{key}'")
        if isinstance(cfg[key], dict) and isinstance(val, dict) and key != "model":
            cfg[key].update(val)
        else:
            cfg[key] = val
    if not isinstance(cfg["model"], dict):
        raise ConfigError("field 'model' must be an object")
    try:
        model = ShapeInvariantModel.from_dict(cfg["model"])
    except (ModelValidityError, TypeError, ValueError) as exc:
        raise ConfigError(f"field 'model': {exc}") from exc
    cp = cfg["coupling"]
    if cp.get("mode") not in ("linear", "intensity"):
        raise ConfigError(f"field 'coupling.mode' must be 'linear' or 'intensity', got {cp.get('mode')!r}")
    alpha = _number(cp.get("alpha"), "coupling.alpha")
    delta = _number(cp.get("delta"), "coupling.delta")
    if alpha < 0:
        raise ConfigError(f"field 'coupling.alpha' must be >= 0, got {alpha!r}")
    coupling = CouplingConfig(alpha, delta, cp["mode"], model.hbar)
    dim = _number(cfg["dim"], "dim", int)
    if dim < 2:
        raise ConfigError(f"field 'dim' must be >= 2, got {dim}")
    t_max = _number(cfg["time"].get("t_max"), "time.t_max")
    dt = _number(cfg["time"].get("dt"), "time.dt")
    if t_max < 0:
        raise ConfigError(f"field 'time.t_max' must be >= 0, got {t_max!r}")
    if dt <= 0:
        raise ConfigError(f"field 'time.dt' must be > 0, got {dt!r}")
    order = _number(cfg["series_order"], "series_order", int)
    if order < 1:
        raise ConfigError(f"field 'series_order' must be >= 1, got {order}")
    rc = RunConfig(model, coupling, dim, t_max, dt, order, cfg.get("output"), cfg)
    try:
        rc.ladder()
    except (ModelValidityError, OutOfRangeError) as exc:
        raise ConfigError(f"field 'dim'/'model': {exc}") from exc
    return rc


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError:
        raise
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def load_config(args) -> RunConfig:
    raw = _read_json(args.config) if args.config else {}
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    raw = json.loads(json.dumps(raw))
    cp = raw.setdefault("coupling", {})
    if args.alpha is not None:
        cp["alpha"] = args.alpha
    if args.delta is not None:
        cp["delta"] = args.delta
    if args.mode is not None:
        cp["mode"] = args.mode
    if args.dim is not None:
        raw["dim"] = args.dim
    tm = raw.setdefault("time", {})
    if args.t_max is not None:
        tm["t_max"] = args.t_max
    if args.dt is not None:
        tm["dt"] = args.dt
    if args.order is not None:
        raw["series_order"] = args.order
    if args.out is not None:
        raw["output"] = args.out
    return build_config(raw)


def _complex_list(values, name) -> np.ndarray:
    out = []
    for v in values:
        if isinstance(v, (list, tuple)) and len(v) == 2:
            out.append(complex(_number(v[0], name), _number(v[1], name)))
        else:
            out.append(complex(_number(v, name)))
    return np.array(out, dtype=complex)


def _read_state(path: str | None, ladder: EnergyLadder) -> spectrum.TwoChannelState:
    upper = np.zeros(ladder.n_upper, dtype=complex)
    lower = np.zeros(ladder.n_lower, dtype=complex)
    if path is None:
        upper[0] = 1.0
        return spectrum.TwoChannelState(upper, lower)
    data = _read_json(path)
    if not isinstance(data, dict):
        raise ConfigError("state file must hold an object with 'upper' and/or 'lower'")
    for name, arr in (("upper", upper), ("lower", lower)):
        vals = _complex_list(data.get(name, []), f"state.{name}")
        if vals.size > arr.size:
            raise ConfigError(f"field 'state.{name}' has {vals.size} entries; at most {arr.size} allowed")
        arr[: vals.size] = vals
    state = spectrum.TwoChannelState(upper, lower)
    if not state.norm > 0 or not math.isfinite(state.norm):
        raise ConfigError("initial state cannot be normalized (zero or non-finite norm)")
    return state.normalized()


def _read_sigma3(path: str | None, ladder: EnergyLadder) -> BlockOperator | None:
    if path is None:
        return None
    data = _read_json(path)
    rows = data.get("matrix") if isinstance(data, dict) else data
    n = ladder.n_upper + ladder.n_lower
    if not isinstance(rows, list) or len(rows) != n:
        raise ConfigError(f"field 'matrix' must be a {n}x{n} array")
    mat = np.array([_complex_list(r, "matrix") for r in rows])
    if mat.shape != (n, n):
        raise ConfigError(f"field 'matrix' must be a {n}x{n} array")
    op = BlockOperator.from_dense(mat, ladder.n_upper)
    if not op.is_hermitian(1e-12):
        raise ConfigError("field 'matrix': sigma3 initializer is not Hermitian")
    return op


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", newline="") as fh:
        fh.write(text)


def run_spectrum(cfg: RunConfig, m_max: int | None) -> str:
    ladder = cfg.ladder()
    m_max = ladder.dim - 2 if m_max is None else m_max
    if not 0 <= m_max <= ladder.dim - 2:
        raise ConfigError(f"field 'm_max' must lie in 0..{ladder.dim - 2} (N-2), got {m_max}")
    return spectrum.spectrum_table(ladder, cfg.coupling, m_max).to_csv()


def run_evolve(cfg: RunConfig, state_path: str | None) -> str:
    ladder = cfg.ladder()
    state = _read_state(state_path, ladder)
    return evolution.evolution_series(state, ladder, cfg.coupling, cfg.times())


def run_inversion(cfg: RunConfig, sigma3_path: str | None) -> str:
    ladder = cfg.ladder()
    s0 = _read_sigma3(sigma3_path, ladder)
    return inversion.inversion_series(ladder, cfg.coupling, cfg.times(), s0, cfg.series_order)


# ---- verification -------------------------------------------------------


class Report:
    def __init__(self):
        self.lines: list[str] = []
        self.failed: list[str] = []

    def check(self, name: str, measured: float, tol: float, ok: bool | None = None) -> None:
        ok = (measured <= tol) if ok is None else ok
        self.lines.append(f"CHECK {name} {measured:.6e} {tol:.1e} {'PASS' if ok else 'FAIL'}")
        if not ok:
            self.failed.append(name)

    def info(self, name: str, value: float) -> None:
        self.lines.append(f"INFO {name} {value:.6e}")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def _random_couplings(rng, n, mode, hbar=1.0):
    return [CouplingConfig(float(rng.uniform(0.05, 1.0)), float(rng.uniform(-1.0, 1.0)), mode, hbar) for _ in range(n)]


def _spectrum_checks(ladder: EnergyLadder, coupling: CouplingConfig, tag: str, rep: Report, per_rung: bool) -> None:
    dense = oracle.brute_spectrum(rung_system(ladder, coupling))
    worst_e = worst_v = 0.0
    for m in range(ladder.dim - 1):
        ep, em = spectrum.dressed_energies(ladder, coupling, m)
        ref = dense.rung_eigenvalues(m)
        dev_e = max(abs(em - ref[0]) / abs(ref[0]) if ref[0] else abs(em), abs(ep - ref[1]) / abs(ref[1]))
        dev_v = 0.0
        if coupling.alpha > 0:
            idx = np.flatnonzero(dense.rung_labels == m)
            vecs = sorted(((dense.eigenvalues[i], dense.eigenvectors[i]) for i in idx), key=lambda p: p[0])
            for sign, (_, ref_vec) in ((-1, vecs[0]), (1, vecs[1])):
                mine = spectrum.dressed_state(ladder, coupling, m, sign)
                dev_v = max(dev_v, 1.0 - abs(mine.overlap(ref_vec)))
        if per_rung:
            rep.check(f"spectrum.{tag}.energy.m={m}", dev_e, 1e-10)
            rep.check(f"spectrum.{tag}.state.m={m}", dev_v, 1e-9)
        worst_e, worst_v = max(worst_e, dev_e), max(worst_v, dev_v)
    if not per_rung:
        rep.check(f"spectrum.{tag}.energy", worst_e, 1e-10)
        rep.check(f"spectrum.{tag}.state", worst_v, 1e-9)
    single = dense.eigenvalues[dense.rung_labels == -1][0]
    rep.check(f"spectrum.{tag}.singleton", abs(single + coupling.detuning_energy), 1e-14)


def suite_spectrum(cfg: RunConfig, rng, rep: Report) -> None:
    ladder = cfg.ladder()
    _spectrum_checks(ladder, cfg.coupling, "config", rep, per_rung=True)
    for mode in ("linear", "intensity"):
        for k, c in enumerate(_random_couplings(rng, 5, mode, cfg.model.hbar)):
            _spectrum_checks(ladder, c, f"random{k}.{mode}", rep, per_rung=False)
    # resonant limit: C = 1/sqrt(2)
    worst = 0.0
    for m in range(ladder.dim):
        p = spectrum.mixing_coefficients(ladder, cfg.coupling.replace(delta=0.0, alpha=max(cfg.coupling.alpha, 1e-3)), m)
        worst = max(worst, abs(p.c_plus - math.sqrt(0.5)), abs(p.c_minus - math.sqrt(0.5)))
    rep.check("spectrum.resonant.C", worst, 1e-14)


def suite_evolution(cfg: RunConfig, rng, rep: Report) -> None:
    ladder = cfg.ladder()
    times = np.linspace(0.0, 20.0, 50)
    for mode in ("linear", "intensity"):
        for delta in (0.0, cfg.coupling.delta):
            c = cfg.coupling.replace(mode=mode, delta=delta)
            dev = max(evolution.propagator(ladder, c, t).unitarity_defect() for t in times)
            rep.check(f"evolution.unitarity.{mode}.delta={delta:g}", dev, 1e-10)
            dev = max(evolution.second_derivative_residual(ladder, c, t) for t in times[::5])
            rep.check(f"evolution.second_order.{mode}.delta={delta:g}", dev, 1e-10)
    # finite-difference order on a stiff configuration
    big = energy_ladder(cfg.model, max(cfg.dim, 64))
    for mode in ("linear", "intensity"):
        c = CouplingConfig(0.5, cfg.coupling.delta, mode, cfg.model.hbar)
        ratios = [
            evolution.second_derivative_residual(big, c, t, 1e-3) / evolution.second_derivative_residual(big, c, t, 5e-4)
            for t in (0.3, 1.1, 2.5, 4.0, 7.7)
        ]
        worst = max(abs(r - 4.0) for r in ratios)
        rep.check(f"evolution.fd_ratio.{mode}", worst, 0.4)
    for mode in ("linear", "intensity"):
        c = cfg.coupling.replace(mode=mode, delta=0.0)
        mag = res = 0.0
        for t in times:
            u = evolution.propagator(ladder, c, t)
            ref = oracle.exact_propagator(ladder, c, t).dense()
            mag = max(mag, float(np.max(np.abs(np.abs(u.dense()) - np.abs(ref)))))
            res = max(res, evolution.schrodinger_residual(ladder, c, t, conjugate_offdiagonal=True))
        rep.check(f"evolution.resonant_magnitudes.{mode}", mag, 1e-10)
        rep.check(f"evolution.resonant_conjugated_residual.{mode}", res, 1e-12)
        if cfg.coupling.delta != 0:
            rep.info(f"evolution.schrodinger_residual.{mode}.t=1",
                     evolution.schrodinger_residual(ladder, cfg.coupling.replace(mode=mode), 1.0))


def suite_inversion(cfg: RunConfig, rng, rep: Report) -> None:
    ladder = cfg.ladder()
    small = energy_ladder(cfg.model, min(cfg.dim, 8))
    order = cfg.series_order
    for mode in ("linear", "intensity"):
        c = cfg.coupling.replace(mode=mode)
        rep.check(f"inversion.particular_zero.{mode}", inversion.particular_solution(ladder, c, 0.0, order).max_abs(), 0.0)
        h = 1e-4
        slope = (inversion.particular_solution(ladder, c, h, order) - inversion.particular_solution(ladder, c, -h, order)) * (0.5 / h)
        rep.check(f"inversion.particular_slope.{mode}", slope.max_abs(), 1e-8)
        worst = 0.0
        for t in (0.3, 0.7, 1.2):
            worst = max(worst, (inversion.particular_solution(small, c, t, order)
                                - oracle.green_particular(small, c, t)).max_abs())
        rep.check(f"inversion.green.{mode}", worst, 1e-8)
        if cfg.model.kind == "harmonic":
            worst = 0.0
            for t in np.linspace(0.15, 1.5, 10):
                try:
                    a = inversion.particular_solution(ladder, c, t, order)
                except SeriesRangeError:
                    continue
                worst = max(worst, (a - inversion.particular_solution(ladder, c, t, form="closed")).max_abs())
            rep.check(f"inversion.closed_vs_series.{mode}", worst, 1e-8)
        c0 = c.replace(delta=0.0)
        worst = plus_i = 0.0
        for t in np.linspace(0.0, 10.0, 20):
            sol = inversion.sigma3_of_t(ladder, c0, t, order=order).op
            worst = max(worst, (sol - oracle.heisenberg_sigma3(ladder, c0, t, "schrodinger")).max_abs())
            plus_i = max(plus_i, (sol - oracle.heisenberg_sigma3(ladder, c0, t, "plus_i")).max_abs())
        rep.check(f"inversion.resonant_heisenberg.{mode}", worst, 1e-9)
        rep.info(f"inversion.resonant_vs_plus_i_propagator.{mode}", plus_i)
        defects = inversion.commutator_defects(ladder, c)
        for name, val in defects.items():
            rep.check(f"inversion.commutator.{name}.{mode}", val, 1e-12)


def suite_series(cfg: RunConfig, rng, rep: Report) -> None:
    worst = {k: 0.0 for k in inversion.KINDS}
    for i in range(200):
        kind = inversion.KINDS[i % 4]
        x, w = rng.uniform(-3.0, 3.0, 2)
        t = rng.uniform(0.0, 2.0)
        dev = abs(inversion.f_series(kind, x, w, t, 40) - oracle.quad_f(kind, x, w, t))
        worst[kind] = max(worst[kind], dev)
    for kind, dev in worst.items():
        rep.check(f"series.{kind}.n=50", dev, 1e-8)
    rep.check("series.spot.CC_pi_1_1", abs(inversion.f_series("CC", 1.0, 1.0, math.pi) - math.pi / 2), 1e-10)
    rep.check("series.spot.CC_1_1_2", abs(inversion.f_series("CC", 1.0, 2.0, 1.0) - oracle.quad_f("CC", 1.0, 2.0, 1.0)), 1e-10)


def run_verify(cfg: RunConfig, suite: str, seed: int) -> Report:
    rep = Report()
    rng = np.random.default_rng(seed)
    suites = {
        "spectrum": suite_spectrum,
        "evolution": suite_evolution,
        "inversion": suite_inversion,
        "series": suite_series,
    }
    names = list(suites) if suite == "all" else [suite]
    for name in names:
        suites[name](cfg, rng, rep)
    return rep


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--alpha", type=float)
    common.add_argument("--delta", type=float)
    common.add_argument("--mode", choices=("linear", "intensity"))
    common.add_argument("--dim", type=int, help="truncation size N")
    common.add_argument("--t-max", dest="t_max", type=float)
    common.add_argument("--dt", type=float)
    common.add_argument("--order", type=int, help="series order M")
    common.add_argument("--out", help="output path (default stdout)")

    parser = argparse.ArgumentParser(prog="shapejc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("spectrum", parents=[common], help="dressed spectrum table as CSV")
    p.add_argument("--m-max", dest="m_max", type=int)
    p = sub.add_parser("evolve", parents=[common], help="state evolution time series as CSV")
    p.add_argument("--state", help="JSON initial state {'upper': [...], 'lower': [...]}")
    p = sub.add_parser("inversion", parents=[common], help="population inversion time series as CSV")
    p.add_argument("--sigma3-init", dest="sigma3_init", help="JSON Hermitian initializer {'matrix': [[...]]}")
    p = sub.add_parser("verify", parents=[common], help="oracle comparison report")
    p.add_argument("--suite", default="all")
    p.add_argument("--seed", type=int, default=42)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = load_config(args)
        if args.command == "spectrum":
            text = run_spectrum(cfg, args.m_max)
        elif args.command == "evolve":
            text = run_evolve(cfg, args.state)
        elif args.command == "inversion":
            text = run_inversion(cfg, args.sigma3_init)
        else:
            if args.suite not in SUITES:
                raise ConfigError(f"field 'suite' must be one of {SUITES}, got {args.suite!r}")
            rep = run_verify(cfg, args.suite, args.seed)
            _emit(rep.text(), cfg.output)
            if rep.failed:
                print(f"verification failed: {', '.join(rep.failed)}", file=sys.stderr)
                return EXIT_FAIL
            return EXIT_OK
        _emit(text, cfg.output)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, PreconditionError, SeriesRangeError, ShapeJCError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
