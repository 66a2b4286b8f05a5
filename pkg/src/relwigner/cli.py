"""Batch scenario runner.

    relwigner build-state --config scenario.yaml --out results/
    relwigner evolve      --config scenario.yaml --out results/
    relwigner invariants  --config scenario.yaml --out results/
    relwigner compare-nw  --config scenario.yaml --out results/

Exit codes: 0 all checks passed, 1 a check failed, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import observables as obs
from . import wigner_free as wf
from . import wigner_magnetic as wm
from .grid import PhaseSpaceGrid
from .kinematics import PhysicalParams
from .states import (
    ChargeMixture,
    EnergyBasisState,
    gaussian_packet,
    hermite_basis,
    oscillator_grid,
    superpose,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

DEFAULT_TOLERANCES = {
    "normality_even": 1e-6,
    "normality_odd": 1e-8,
    "marginal_p": 1e-8,
    "marginal_q_norm": 1e-6,
    "reality_even": 1e-10,
    "odd_conjugation": 1e-10,
    "product_constraint": 1e-7,
    "log_derivative": 1e-4,
    "overlap_pure": 1e-4,
    "overlap_mixed_margin": 0.05,
    "ratio_relation": 1e-8,
    "symbol_round_trip": 1e-8,
    "oracle_deviation": 1e-8,
    "first_moment": 1e-8,
    "magnetic_constraint": 1e-6,
    "energy_ratio": 1e-8,
}

# relation checked by each named check
RELATIONS = {
    "normality_even": "even components integrate to one",
    "normality_odd": "odd components integrate to zero",
    "marginal_p": "momentum marginal equals |psi(p)|^2",
    "marginal_q_norm": "position marginal integrates to one",
    "reality_even": "even components are real",
    "odd_conjugation": "conj(W_+-) = -W_-+",
    "product_constraint": "(E1-E2)^2 T_++ T_-- = (E1+E2)^2 T_+- T_-+",
    "log_derivative": "mixed log-derivative of the even transform equals that of epsilon",
    "overlap_pure": "epsilon^-2 weighted overlap equals 1/(2 pi hbar)",
    "overlap_mixed_margin": "epsilon^-2 weighted overlap below 1/(2 pi hbar)",
    "ratio_relation": "odd kernel = (E1-E2)/(E1+E2) even kernel",
    "symbol_round_trip": "symbol -> kernel -> symbol identity",
    "oracle_deviation": "spectral propagator equals wavefunction evolution",
    "first_moment": "first q-moment equals the Newton-Wigner value",
    "second_moment_increasing": "|<q^2> FV - NW| increases with sigma_p",
    "magnetic_constraint": "kernel-filtered product constraint in the oscillator basis",
    "magnetic_log_derivative": "filtered even transform factorises",
    "energy_ratio": "odd/even energy-representation ratio relation",
    "beat_frequency": "even-part beat at the level spacing",
}


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


# configuration


@dataclass(frozen=True)
class PacketSpec:
    p0: float
    q0: float
    sigma_p: float
    charge: int = 1
    amplitude: complex = 1.0


@dataclass(frozen=True)
class StateSpec:
    kind: str
    packets: tuple[PacketSpec, ...] = ()
    weights: tuple[float, ...] = ()
    levels: tuple[tuple[int, int, complex], ...] = ()
    n_max: int = 64


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: PhysicalParams
    grid_n: int
    dp: float | None
    state: StateSpec
    times: tuple[float, ...] = (0.0,)
    sweep_sigma: tuple[float, ...] = (0.05, 0.1, 0.2, 0.4)
    tolerances: dict = field(default_factory=dict)

    def tolerance(self, name: str, scale: float = 1.0) -> float:
        return self.tolerances.get(name, DEFAULT_TOLERANCES.get(name, 0.0)) * scale


def _number(value, name, positive=False, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(name, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(name, "must be finite")
    if integer and int(value) != value:
        raise ConfigError(name, f"expected an integer, got {value!r}")
    if positive and value <= 0:
        raise ConfigError(name, f"must be positive, got {value!r}")
    return int(value) if integer else float(value)


def _amplitude(value, name) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(name, "complex amplitude must be [real, imag]")
        return complex(_number(value[0], name), _number(value[1], name))
    return complex(_number(value, name))


def _charge(value, name) -> int:
    if value not in (1, -1):
        raise ConfigError(name, f"charge must be +1 or -1, got {value!r}")
    return int(value)


def _mapping(raw, name):
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(name, "expected a mapping")
    return raw


def _packet(raw, name) -> PacketSpec:
    raw = _mapping(raw, name)
    for key in ("p0", "q0", "sigma_p"):
        if key not in raw:
            raise ConfigError(f"{name}.{key}", "missing")
    return PacketSpec(
        _number(raw["p0"], f"{name}.p0"),
        _number(raw["q0"], f"{name}.q0"),
        _number(raw["sigma_p"], f"{name}.sigma_p", positive=True),
        _charge(raw.get("charge", 1), f"{name}.charge"),
        _amplitude(raw.get("amplitude", 1.0), f"{name}.amplitude"),
    )


def parse_config(raw: dict) -> ScenarioConfig:
    """Validate a decoded YAML document; every error names the offending field."""
    raw = _mapping(raw, "config")
    scenario = raw.get("scenario", "free")
    if scenario not in ("free", "magnetic"):
        raise ConfigError("scenario", f"expected 'free' or 'magnetic', got {scenario!r}")
    p = _mapping(raw.get("params"), "params")
    values = {k: _number(p.get(k, 1.0), f"params.{k}", positive=True) for k in ("m", "c", "hbar", "omega")}
    params = PhysicalParams(**values)
    g = _mapping(raw.get("grid"), "grid")
    grid_n = _number(g.get("n", 256 if scenario == "free" else 512), "grid.n", positive=True, integer=True)
    if grid_n < 4 or grid_n & (grid_n - 1):
        raise ConfigError("grid.n", f"must be a power of two >= 4, got {grid_n}")
    dp = g.get("dp", 0.05 if scenario == "free" else None)
    if dp is not None:
        dp = _number(dp, "grid.dp", positive=True)

    s = _mapping(raw.get("state"), "state")
    kind = s.get("type")
    kinds = ("gaussian", "superposition", "mixture") if scenario == "free" else ("levels", "mixture")
    if kind not in kinds:
        raise ConfigError("state.type", f"expected one of {kinds} for scenario {scenario!r}, got {kind!r}")
    packets, weights, levels = (), (), ()
    n_max = _number(s.get("n_max", 64), "state.n_max", positive=True, integer=True)
    if scenario == "free":
        if kind == "gaussian":
            packets = (_packet(s, "state"),)
        else:
            plist = s.get("packets")
            if not isinstance(plist, list) or not plist:
                raise ConfigError("state.packets", "expected a non-empty list of packets")
            packets = tuple(_packet(x, f"state.packets[{i}]") for i, x in enumerate(plist))
    else:
        llist = s.get("levels")
        if not isinstance(llist, list) or not llist:
            raise ConfigError("state.levels", "expected a non-empty list of {charge, n, amplitude}")
        out = []
        for i, lv in enumerate(llist):
            lv = _mapping(lv, f"state.levels[{i}]")
            n = _number(lv.get("n"), f"state.levels[{i}].n", integer=True)
            if not 0 <= n < n_max:
                raise ConfigError(f"state.levels[{i}].n", f"must lie in [0, {n_max})")
            out.append((_charge(lv.get("charge", 1), f"state.levels[{i}].charge"), n,
                        _amplitude(lv.get("amplitude", 1.0), f"state.levels[{i}].amplitude")))
        levels = tuple(out)
    if kind == "mixture":
        members = packets if scenario == "free" else levels
        wl = s.get("weights")
        if not isinstance(wl, list) or len(wl) != len(members):
            raise ConfigError("state.weights", f"expected {len(members)} weights, one per member")
        weights = tuple(_number(w, f"state.weights[{i}]") for i, w in enumerate(wl))
        if any(w < 0 for w in weights) or abs(sum(weights) - 1) > 1e-12:
            raise ConfigError("state.weights", "must be non-negative and sum to 1")

    times = raw.get("times", [0.0])
    if not isinstance(times, list) or not times:
        raise ConfigError("times", "expected a non-empty list of numbers")
    times = tuple(_number(t, f"times[{i}]") for i, t in enumerate(times))
    sweep = _mapping(raw.get("sweep"), "sweep")
    sig = sweep.get("sigma_p", [0.05, 0.1, 0.2, 0.4])
    if not isinstance(sig, list) or not sig:
        raise ConfigError("sweep.sigma_p", "expected a non-empty list")
    sig = tuple(_number(x, f"sweep.sigma_p[{i}]", positive=True) for i, x in enumerate(sig))
    tol = _mapping(raw.get("tolerances"), "tolerances")
    for k, v in tol.items():
        if k not in DEFAULT_TOLERANCES:
            raise ConfigError(f"tolerances.{k}", "unknown check name")
        _number(v, f"tolerances.{k}", positive=True)
    return ScenarioConfig(scenario, params, grid_n, dp, StateSpec(kind, packets, weights, levels, n_max),
                          times, sig, {k: float(v) for k, v in tol.items()})


def _read_raw(path: str | Path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("--config", f"invalid YAML: {exc}") from None
    if raw is not None and not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a mapping")
    return raw


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config(_read_raw(path))


# scenario construction


@dataclass
class Scenario:
    config: ScenarioConfig
    grid: PhaseSpaceGrid
    pure: object | None = None
    mixture: ChargeMixture | None = None
    energy_state: EnergyBasisState | None = None
    energy_members: tuple = ()
    basis: object | None = None
    wigner_basis: object | None = None


def _packet_state(grid, spec: PacketSpec):
    try:
        return gaussian_packet(grid, spec.p0, spec.q0, spec.sigma_p, spec.charge)
    except ValueError as exc:
        raise ConfigError("state", str(exc)) from None


def build_scenario(cfg: ScenarioConfig) -> Scenario:
    p = cfg.params
    if cfg.scenario == "free":
        grid = PhaseSpaceGrid(cfg.grid_n, cfg.dp, p.hbar)
        states = [_packet_state(grid, spec) for spec in cfg.state.packets]
        if cfg.state.kind == "mixture":
            return Scenario(cfg, grid, mixture=ChargeMixture(cfg.state.weights, tuple(states)))
        if cfg.state.kind == "superposition":
            return Scenario(cfg, grid, pure=superpose(states, [x.amplitude for x in cfg.state.packets]))
        return Scenario(cfg, grid, pure=states[0])
    grid = oscillator_grid(cfg.grid_n, p) if cfg.dp is None else PhaseSpaceGrid(cfg.grid_n, cfg.dp, p.hbar)
    try:
        basis = hermite_basis(grid, cfg.state.n_max, p)
    except ValueError as exc:
        raise ConfigError("state.n_max", str(exc)) from None
    Wb = wm.wigner_basis(basis)
    n = cfg.state.n_max
    if cfg.state.kind == "mixture":
        members = tuple(EnergyBasisState.from_levels(n, {(c, k): a}) for c, k, a in cfg.state.levels)
        return Scenario(cfg, grid, energy_members=members, basis=basis, wigner_basis=Wb)
    state = EnergyBasisState.from_levels(n, {(c, k): a for c, k, a in cfg.state.levels})
    return Scenario(cfg, grid, energy_state=state, basis=basis, wigner_basis=Wb)


def scenario_components(sc: Scenario, t: float = 0.0) -> wf.WignerComponents:
    p = sc.config.params
    if sc.config.scenario == "free":
        if sc.pure is not None:
            return wf.evolve_spectral(wf.build_components(sc.pure, p), t, p)
        total = None
        for w, st in zip(sc.mixture.weights, sc.mixture.states):
            comp = wf.evolve_spectral(wf.build_components(st, p), t, p).map(lambda x, w=w: w * x)
            total = comp if total is None else total.combine(comp)
        return total
    if sc.energy_state is not None:
        return wm.build_components_magnetic(wm.evolve_energy_basis(sc.energy_state, t, p), sc.wigner_basis, p)
    total = None
    for w, st in zip(sc.config.state.weights, sc.energy_members):
        comp = wm.build_components_magnetic(wm.evolve_energy_basis(st, t, p), sc.wigner_basis, p)
        comp = comp.map(lambda x, w=w: w * x)
        total = comp if total is None else total.combine(comp)
    return total


# reports and output


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    relation: str
    wall_time: float = 0.0


@dataclass
class RunReport:
    command: str
    checks: list[CheckResult] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, name, value, tolerance, passed=None, started=None):
        if any(c.name == name for c in self.checks):
            raise ValueError(f"check {name} recorded twice")
        value = float(value)
        ok = bool(value <= tolerance) if passed is None else bool(passed)
        elapsed = 0.0 if started is None else time.perf_counter() - started
        self.checks.append(CheckResult(name, value, float(tolerance), ok, RELATIONS.get(name, name), elapsed))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        # wall times vary run to run and are kept out of the files
        rows = [{k: v for k, v in asdict(c).items() if k != "wall_time"} for c in self.checks]
        return {"command": self.command, "passed": self.passed, "checks": rows, "metadata": self.metadata}

    def print(self, stream=None):
        stream = sys.stdout if stream is None else stream
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            print(f"{flag}  {c.name:26s} {c.value:.3e} (tol {c.tolerance:.1e}, {c.wall_time:.2f}s)  {c.relation}",
                  file=stream)
        print(f"{self.command}: {'all checks passed' if self.passed else 'FAILED'}", file=stream)


def write_csv(path: Path, arr: np.ndarray) -> None:
    np.savetxt(path, np.asarray(arr), fmt="%.17g", delimiter=",")


def write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_components(out: Path, W: wf.WignerComponents) -> list[str]:
    """CSV grids with rows indexed by position and columns by momentum."""
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for name in ("pp", "mm"):
        F = W.get(name)
        if np.any(F):
            write_csv(out / f"W_{name}.csv", F.real.T)
            files.append(f"W_{name}.csv")
    for name in ("pm", "mp"):
        F = W.get(name)
        if np.any(F):
            write_csv(out / f"W_{name}_re.csv", F.real.T)
            write_csv(out / f"W_{name}_im.csv", F.imag.T)
            files += [f"W_{name}_re.csv", f"W_{name}_im.csv"]
    g = W.grid
    write_csv(out / "marginal_p.csv", np.column_stack([g.p, wf.marginal_p(W)]))
    write_csv(out / "marginal_q.csv", np.column_stack([g.q, wf.marginal_q(W)]))
    return files + ["marginal_p.csv", "marginal_q.csv"]


def grid_metadata(sc: Scenario) -> dict:
    g = sc.grid
    meta = {
        "scenario": sc.config.scenario,
        "n_points": g.n_points,
        "dp": g.dp,
        "dq": g.dq,
        "hbar": g.hbar,
        "p_min": g.p_min,
        "q_min": float(g.q[0]),
        "layout": "rows = position index, columns = momentum index",
        "params": asdict(sc.config.params),
    }
    if sc.config.scenario == "magnetic":
        meta["n_max"] = sc.config.state.n_max
    return meta


# commands


def cmd_build_state(cfg: ScenarioConfig, out: Path, scale: float) -> int:
    sc = build_scenario(cfg)
    W = scenario_components(sc)
    even, odd = W.even_integral(), abs(W.odd_integral())
    files = write_components(out, W)
    write_json(out / "summary.json", {"grid": grid_metadata(sc), "files": files,
                                      "even_integral": even, "odd_integral_abs": odd})
    print(f"normalisation: even integral {even:.12f}, |odd integral| {odd:.3e}")
    return EXIT_OK


def cmd_evolve(cfg: ScenarioConfig, out: Path, scale: float) -> int:
    sc = build_scenario(cfg)
    p = cfg.params
    report = RunReport("evolve", metadata=grid_metadata(sc))
    series = []
    worst = 0.0
    for i, t in enumerate(cfg.times):
        W = scenario_components(sc, t)
        if cfg.scenario == "free":
            members = [sc.pure] if sc.pure is not None else list(sc.mixture.states)
            weights = [1.0] if sc.pure is not None else list(sc.mixture.weights)
            oracle = None
            for w, st in zip(weights, members):
                o = wf.evolve_oracle(st, t, p).map(lambda x, w=w: w * x)
                oracle = o if oracle is None else oracle.combine(o)
            dev = W.max_abs_difference(oracle)
        else:
            # per-term phase bookkeeping is exact; the check is against the rebuilt components
            dev = 0.0 if sc.energy_state is None else W.max_abs_difference(
                wm.build_components_magnetic(wm.evolve_energy_basis(sc.energy_state, t, p),
                                             sc.wigner_basis, p, max_explicit_terms=0))
        worst = max(worst, dev)
        series.append({"t": t, "deviation": dev, "even_integral": W.even_integral(),
                       "odd_integral_abs": abs(W.odd_integral())})
        write_components(out / f"t{i:03d}", W)
    start = time.perf_counter()
    report.add("oracle_deviation", worst, cfg.tolerance("oracle_deviation", scale), started=start)
    if cfg.scenario == "magnetic" and sc.energy_state is not None:
        freq, width = wm.beat_frequency(sc.energy_state, sc.wigner_basis, p)
        levels = sorted({n for c, n, a in cfg.state.levels if c == 1})
        if len(levels) >= 2:
            E = wm.level_energies(levels[1] + 1, p)
            spacing = (E[levels[1]] - E[levels[0]]) / p.hbar
            report.add("beat_frequency", abs(freq - spacing), width)
        report.metadata["beat_frequency"] = freq
    report.metadata["series"] = series
    write_json(out / "evolution.json", report.to_json())
    report.print()
    return EXIT_OK if report.passed else EXIT_FAIL


def _is_charge_definite(W: wf.WignerComponents) -> bool:
    return not (np.any(W.pp) and np.any(W.mm))


def free_test_symbol(grid: PhaseSpaceGrid) -> np.ndarray:
    """Smooth localized symbol used for the kernel round-trip and ratio checks."""
    P, Q = grid.mesh()
    w_p = 0.1 * grid.p_max
    w_q = 0.1 * grid.q_max
    return (1 + P + Q + P * Q) * np.exp(-((P / w_p) ** 2 + (Q / w_q) ** 2) / 2)


def cmd_invariants(cfg: ScenarioConfig, out: Path, scale: float, corrupt: str | None = None) -> int:
    sc = build_scenario(cfg)
    p = cfg.params
    W = scenario_components(sc)
    if corrupt:
        bad = {n: W.get(n) for n in wf.COMPONENTS}
        bad[corrupt] = bad[corrupt] * (1 + 1e-3)
        W = wf.WignerComponents(W.grid, **bad)
    tol = lambda name: cfg.tolerance(name, scale)  # noqa: E731
    report = RunReport("invariants", metadata=grid_metadata(sc))
    if corrupt:
        report.metadata["corrupted_component"] = corrupt

    t0 = time.perf_counter()
    report.add("normality_even", abs(W.even_integral() - 1), tol("normality_even"), started=t0)
    t0 = time.perf_counter()
    report.add("normality_odd", abs(W.odd_integral()), tol("normality_odd"), started=t0)
    t0 = time.perf_counter()
    report.add("marginal_q_norm", abs(np.sum(wf.marginal_q(W)) * W.grid.dq - 1), tol("marginal_q_norm"), started=t0)
    t0 = time.perf_counter()
    report.add("reality_even", max(np.max(np.abs(W.pp.imag)), np.max(np.abs(W.mm.imag))), tol("reality_even"), started=t0)
    t0 = time.perf_counter()
    report.add("odd_conjugation", np.max(np.abs(np.conj(W.pm) + W.mp)), tol("odd_conjugation"), started=t0)

    pure = sc.pure is not None or sc.energy_state is not None
    if cfg.scenario == "free":
        g = sc.grid
        members = [sc.pure] if sc.pure is not None else list(sc.mixture.states)
        weights = [1.0] if sc.pure is not None else list(sc.mixture.weights)
        expected = sum(w * (np.abs(g.coarse(s.psi_plus)) ** 2 + np.abs(g.coarse(s.psi_minus)) ** 2)
                       for w, s in zip(weights, members))
        t0 = time.perf_counter()
        report.add("marginal_p", np.max(np.abs(wf.marginal_p(W) - expected)), tol("marginal_p"), started=t0)
        if pure:
            t0 = time.perf_counter()
            c = wf.check_constraints(W, p)
            value = c.product_relative if c.product_lhs_max > 0 or c.product_rhs_max > 0 else 0.0
            report.add("product_constraint", value, tol("product_constraint"), started=t0)
        if _is_charge_definite(W):
            t0 = time.perf_counter()
            pr = wf.purity_criteria(W, p)
            report.metadata["classification"] = pr.classification
            report.metadata["overlap_ratio"] = pr.overlap_ratio
            if pure:
                report.add("log_derivative", pr.even_residual, tol("log_derivative"), started=t0)
                report.add("overlap_pure", abs(pr.overlap_ratio - 1), tol("overlap_pure"))
            else:
                margin = tol("overlap_mixed_margin")
                report.add("overlap_mixed_margin", 1 - pr.overlap_ratio, margin,
                           passed=1 - pr.overlap_ratio >= margin)
        t0 = time.perf_counter()
        A = free_test_symbol(g)
        K = obs.symbol_to_kernel(A, g, p)
        report.add("ratio_relation", obs.check_ratio_relation(K, p).relative, tol("ratio_relation"), started=t0)
        t0 = time.perf_counter()
        rt = max(np.max(np.abs(obs.kernel_to_symbol(K, p, path) - A)) for path in ("full", "even"))
        report.add("symbol_round_trip", rt / np.max(np.abs(A)), tol("symbol_round_trip"), started=t0)
    else:
        b = sc.basis
        if pure:
            t0 = time.perf_counter()
            mc = wm.check_constraint_magnetic(W, b, p)
            report.add("magnetic_constraint", mc.relative, tol("magnetic_constraint"), started=t0)
            t0 = time.perf_counter()
            pr = wm.purity_magnetic(W, b, p)
            report.add("magnetic_log_derivative", pr.even_residual, tol("log_derivative"), started=t0)
            report.metadata["odd_purity_channel"] = pr.odd_status
        t0 = time.perf_counter()
        P, Q = sc.grid.mesh()
        A = (1 + P + Q) * np.exp(-(P**2 + Q**2) / (4 * p.p_osc**2))
        rep = obs.symbol_to_energy_rep(A, b, p)
        report.add("energy_ratio", obs.energy_ratio_residual(rep, p), tol("energy_ratio"), started=t0)

    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "invariants.json", report.to_json())
    report.print()
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_compare_nw(cfg: ScenarioConfig, out: Path, scale: float) -> int:
    if cfg.scenario != "free":
        raise ConfigError("scenario", "compare-nw needs the free scenario")
    if cfg.state.kind != "gaussian":
        raise ConfigError("state.type", "compare-nw needs a single charge-definite gaussian")
    p = cfg.params
    spec = cfg.state.packets[0]
    grid = PhaseSpaceGrid(cfg.grid_n, cfg.dp, p.hbar)
    rows = []
    for sigma in cfg.sweep_sigma:
        try:
            st = gaussian_packet(grid, spec.p0, spec.q0, sigma, spec.charge)
        except ValueError as exc:
            raise ConfigError("sweep.sigma_p", str(exc)) from None
        W_fv = wf.build_components(st, p)
        W_nw = wf.newton_wigner_components(st, p)
        q1_fv, q1_nw = wf.moment_q(st, 1, p), wf.moment_q(st, 1, p, relativistic=False)
        q2_fv, q2_nw = wf.moment_q(st, 2, p), wf.moment_q(st, 2, p, relativistic=False)
        dist = float(np.max(np.abs(wf.marginal_q(W_fv) - wf.marginal_q(W_nw))))
        rows.append([sigma, q1_fv, q1_nw, abs(q1_fv - q1_nw), q2_fv, q2_nw, abs(q2_fv - q2_nw), dist])
    table = np.array(rows)
    out.mkdir(parents=True, exist_ok=True)
    header = "sigma_p,q_fv,q_nw,first_moment_diff,q2_fv,q2_nw,second_moment_dev,marginal_q_distance"
    np.savetxt(out / "compare_nw.csv", table, fmt="%.17g", delimiter=",", header=header, comments="")
    report = RunReport("compare-nw", metadata={"grid": {"n_points": grid.n_points, "dp": grid.dp},
                                               "columns": header.split(",")})
    report.add("first_moment", float(table[:, 3].max()), cfg.tolerance("first_moment", scale))
    order = np.argsort(table[:, 0])
    dev = table[order, 6]
    increasing = bool(np.all(np.diff(dev) > 0))
    report.add("second_moment_increasing", 0.0 if increasing else 1.0, 0.0, passed=increasing)
    write_json(out / "compare_nw.json", report.to_json())
    print(header)
    for r in rows:
        print(",".join(f"{x:.6g}" for x in r))
    report.print()
    return EXIT_OK if report.passed else EXIT_FAIL


COMMANDS = {
    "build-state": cmd_build_state,
    "evolve": cmd_evolve,
    "invariants": cmd_invariants,
    "compare-nw": cmd_compare_nw,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relwigner", description="Relativistic Wigner function scenarios")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="YAML scenario file")
        sp.add_argument("--out", default="results", help="output directory")
        sp.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply every tolerance")
        sp.add_argument("--n-max", type=int, default=None, help="override the oscillator truncation")
        sp.add_argument("--grid-n", type=int, default=None, help="override the grid size")
        if name == "invariants":
            sp.add_argument("--corrupt", choices=wf.COMPONENTS, default=None,
                            help="perturb one component before checking (negative control)")
    return parser


def _apply_overrides(raw: dict, args) -> dict:
    raw = dict(raw or {})
    if args.grid_n is not None:
        raw["grid"] = dict(_mapping(raw.get("grid"), "grid"), n=args.grid_n)
    if args.n_max is not None:
        raw["state"] = dict(_mapping(raw.get("state"), "state"), n_max=args.n_max)
    return raw


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if not args.tolerance_scale > 0:
            raise ConfigError("--tolerance-scale", "must be positive")
        cfg = parse_config(_apply_overrides(_read_raw(args.config), args))
        out = Path(args.out)
        if args.command == "invariants":
            return cmd_invariants(cfg, out, args.tolerance_scale, args.corrupt)
        return COMMANDS[args.command](cfg, out, args.tolerance_scale)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
