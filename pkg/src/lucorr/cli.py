"""``lucorr`` command: sweeps, ledgers, encoding searches, crossings, tomography, figure data.

Every command validates its JSON config before computing anything, builds
all outputs in memory, and only then writes them, so a failed run leaves
no files behind. Exit codes: 0 success, 2 validation error, 3 numerical
contract violation.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import __version__, channels, circuits, dynamics, encoder, measures, qmath, states
from .qmath import LinAlgContractError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONTRACT = 3

CONVENTIONS = {
    "log_base": 2,
    "negativity": "(||rho^T_A||_1 - 1)/2, Bell state = 0.5",
    "doubled_negativity": "||rho^T_A||_1 - 1, Bell state = 1",
    "qubit_order": "qubit 0 is the most significant bit; bitstrings print qubit 0 first",
    "csv_number_format": ".12g",
}

FIG5_THETA = 0.7 * np.pi / 4


class ConfigError(ValueError):
    pass


# -- config models --------------------------------------------------------------


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class FamilyState(_Strict):
    family: Literal["psi_theta", "phi_theta", "phi_gamma", "bell_phi_plus", "bell_psi_plus", "graph", "ghz"]
    param: float | None = None
    n: int | None = Field(default=None, ge=2, le=6)

    @model_validator(mode="after")
    def _needs(self):
        if self.family in ("psi_theta", "phi_theta", "phi_gamma") and self.param is None:
            raise ValueError(f"family {self.family} needs 'param'")
        if self.family == "ghz" and self.n is None:
            raise ValueError("family ghz needs 'n'")
        if self.param is not None and not math.isfinite(self.param):
            raise ValueError("param must be finite")
        return self

    def build(self) -> np.ndarray:
        f = self.family
        if f == "psi_theta":
            return states.make_psi_theta(self.param)
        if f == "phi_theta":
            return states.make_phi_theta(self.param)
        if f == "phi_gamma":
            return states.make_phi_gamma(self.param)
        if f == "ghz":
            return states.ghz(self.n)
        return {"bell_phi_plus": states.bell_phi_plus, "bell_psi_plus": states.bell_psi_plus, "graph": states.graph_state}[f]()


class RawState(_Strict):
    amplitudes: list[tuple[float, float]]

    @field_validator("amplitudes")
    @classmethod
    def _power_of_two(cls, v):
        if len(v) < 2 or len(v) & (len(v) - 1):
            raise ValueError("amplitude count must be a power of two, at least 2")
        return v

    def build(self) -> np.ndarray:
        n = len(self.amplitudes).bit_length() - 1
        return states.state_from_json({"n_qubits": n, "amplitudes": self.amplitudes})


StateSpec = Union[FamilyState, RawState]


class GridSpec(_Strict):
    start: float = 0.0
    stop: float = 1.0
    num: int = Field(default=101, ge=1, le=100_001)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


def _check_p_values(v: np.ndarray) -> np.ndarray:
    if v.size == 0 or np.any(~np.isfinite(v)) or np.any(v < 0) or np.any(v > 1):
        raise ValueError("noise strengths must lie in [0, 1]")
    if np.any(np.diff(v) < 0):
        raise ValueError("p grid must be nondecreasing")
    return v


class _NoisyRun(_Strict):
    initial: StateSpec
    encoding: list[tuple[float, float, float]] | None = None
    channel: str
    p_grid: list[float] | GridSpec = GridSpec()
    seed: int | None = Field(default=None, ge=0)

    @field_validator("channel")
    @classmethod
    def _known_channel(cls, v):
        channels.canonical_kind(v)
        return v

    @model_validator(mode="after")
    def _grid_ok(self):
        _check_p_values(self.grid())
        n = states.n_qubits(self.state())
        if self.encoding is not None and len(self.encoding) != n:
            raise ValueError(f"encoding has {len(self.encoding)} triples for a {n}-qubit state")
        return self

    def grid(self) -> np.ndarray:
        g = self.p_grid
        return g.values() if isinstance(g, GridSpec) else np.asarray(g, dtype=float)

    def state(self) -> np.ndarray:
        return self.initial.build()

    def enc(self) -> states.Encoding | None:
        return None if self.encoding is None else states.Encoding(tuple(self.encoding))


class SweepConfig(_NoisyRun):
    with_singlet: bool = True


class LedgerConfig(_NoisyRun):
    tol: float = Field(default=dynamics.LEDGER_TOL, gt=0)


class MeasureAtPModel(_Strict):
    type: Literal["measure_at_p"]
    measure: str
    p: float = Field(ge=0, le=1)


class AreaModel(_Strict):
    type: Literal["area_under_curve"]
    measure: str
    p_grid: list[float] | GridSpec = GridSpec()

    @model_validator(mode="after")
    def _grid_ok(self):
        g = self.p_grid
        _check_p_values(g.values() if isinstance(g, GridSpec) else np.asarray(g, dtype=float))
        return self


class ThresholdModel(_Strict):
    type: Literal["threshold_p"]
    measure: str
    level: float = Field(gt=0)


ObjectiveModel = Annotated[Union[MeasureAtPModel, AreaModel, ThresholdModel], Field(discriminator="type")]


class OptimizeConfig(_Strict):
    initial: StateSpec
    channel: str
    objective: ObjectiveModel
    grid_points: int = Field(default=encoder.GRID_POINTS, ge=2, le=24)
    n_refine: int = Field(default=encoder.N_REFINE, ge=0, le=64)
    seed: int | None = Field(default=None, ge=0)

    @field_validator("channel")
    @classmethod
    def _known_channel(cls, v):
        channels.canonical_kind(v)
        return v

    @model_validator(mode="after")
    def _objective_ok(self):
        if states.n_qubits(self.initial.build()) != 2:
            raise ValueError("encoding search needs a two-qubit initial state")
        encoder.validate_objective(self.to_objective())
        return self

    def to_objective(self) -> encoder.Objective:
        o = self.objective
        if isinstance(o, AreaModel):
            g = o.p_grid
            grid = g.values() if isinstance(g, GridSpec) else np.asarray(g, dtype=float)
            return encoder.AreaUnderCurve(o.measure, tuple(float(x) for x in grid))
        return encoder.objective_from_json(o.model_dump())


class CrossingConfig(_Strict):
    state_a: StateSpec
    state_b: StateSpec
    channel: str
    measure: str = "doubled_negativity"
    n_grid: int = Field(default=101, ge=3)
    tol: float = Field(default=dynamics.CROSSING_TOL, gt=0)
    require: bool = False
    seed: int | None = Field(default=None, ge=0)

    @field_validator("channel")
    @classmethod
    def _known_channel(cls, v):
        channels.canonical_kind(v)
        return v

    @field_validator("measure")
    @classmethod
    def _known_measure(cls, v):
        if v not in measures.SYSTEM_MEASURES:
            raise ValueError(f"measure must be one of {sorted(measures.SYSTEM_MEASURES)}")
        return v


class TomoConfig(_Strict):
    initial: Literal["Phi0", "PhiPi2"]
    theta: float | None = None
    p: float | None = Field(default=None, ge=0, le=1)
    shots: int | None = Field(default=None, ge=1)
    repetitions: int = Field(default=1, ge=1, le=1000)
    readout_flip: float = Field(default=0.0, ge=0, lt=0.5)
    mitigate: bool = True
    seed: int | None = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _one_angle(self):
        if (self.theta is None) == (self.p is None):
            raise ValueError("give exactly one of 'theta' or 'p'")
        if self.theta is not None and not math.isfinite(self.theta):
            raise ValueError("theta must be finite")
        return self

    def angle(self) -> float:
        return self.theta if self.theta is not None else circuits.theta_for_p(self.p)


CONFIG_MODELS = {
    "sweep": SweepConfig,
    "ledger": LedgerConfig,
    "optimize": OptimizeConfig,
    "crossing": CrossingConfig,
    "tomo": TomoConfig,
}


# -- output helpers ----------------------------------------------------------------


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if x == 0.0:
        return "0"  # folds -0.0
    return format(x, ".12g")


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    return buf.getvalue()


def to_json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _num(x):
    x = float(x)
    return None if math.isnan(x) else x


def trajectory_csv(points) -> str:
    cols = dynamics.CSV_COLUMNS
    return to_csv(cols, ([getattr(pt, c) for c in cols] for pt in points))


def _matrix_json(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def manifest(command: str, seed: int, config, files, extra=None) -> str:
    doc = {
        "tool": "lucorr",
        "version": __version__,
        "command": command,
        "seed": seed,
        "conventions": CONVENTIONS,
        "config": config,
        "files": sorted(files),
    }
    if extra:
        doc.update(extra)
    return to_json_text(doc)


def _ledger_check(psi, enc, points, tol=dynamics.LEDGER_TOL) -> float:
    if enc is not None:
        psi = states.apply_encoding(psi, enc)
    t0 = measures.total_correlations(qmath.ket_to_dm(psi))
    worst = max(abs(pt.T_S - t0 + pt.I_SE - pt.I_local + pt.T_E) for pt in points)
    if worst > tol:
        raise dynamics.ContractViolation(f"ledger residual {worst:.3e} exceeds {tol:.1e}")
    return worst


# -- commands ---------------------------------------------------------------
# each returns {filename: text}; the caller writes them


def cmd_sweep(cfg: SweepConfig, seed: int):
    psi, enc = cfg.state(), cfg.enc()
    pts = dynamics.sweep(psi, enc, cfg.channel, cfg.grid(), with_singlet=cfg.with_singlet)
    worst = _ledger_check(psi, enc, pts)
    files = {"trajectory.csv": trajectory_csv(pts)}
    files["manifest.json"] = manifest("sweep", seed, cfg.model_dump(mode="json"), files, {"max_ledger_residual": worst})
    return files


def cmd_ledger(cfg: LedgerConfig, seed: int):
    led = dynamics.ledger(cfg.state(), cfg.enc(), cfg.channel, cfg.grid())
    if led.max_residual > cfg.tol:
        raise dynamics.ContractViolation(f"ledger residual {led.max_residual:.3e} exceeds {cfg.tol:.1e}")
    cols = ("p", "dT_S", "dT_E", "I_SE", "I_local", "residual")
    files = {"ledger.csv": to_csv(cols, ([r[c] for c in cols] for r in led.rows()))}
    files["manifest.json"] = manifest(
        "ledger", seed, cfg.model_dump(mode="json"), files, {"max_ledger_residual": led.max_residual}
    )
    return files


def cmd_optimize(cfg: OptimizeConfig, seed: int):
    psi = cfg.initial.build()
    obj = cfg.to_objective()
    res = encoder.optimize(psi, cfg.channel, obj, grid_points=cfg.grid_points, n_refine=cfg.n_refine)
    baseline = encoder.evaluate(psi, states.Encoding.identity(2), cfg.channel, obj)
    doc = res.to_json()
    doc["identity_value"] = baseline
    files = {"optimize.json": to_json_text(doc)}
    files["manifest.json"] = manifest("optimize", seed, cfg.model_dump(mode="json"), files)
    return files


def _crossing_doc(c: dynamics.Crossing, labels) -> dict:
    return {"states": list(labels), "measure": c.measure, "channel": c.channel, "p_star": c.p_star, "others": c.others}


def cmd_crossing(cfg: CrossingConfig, seed: int):
    c = dynamics.find_crossing(cfg.state_a.build(), cfg.state_b.build(), cfg.channel, cfg.measure, cfg.n_grid, cfg.tol)
    if cfg.require and c.p_star is None:
        raise dynamics.ContractViolation("no crossing found in (0, 1)")
    files = {"crossing.json": to_json_text(_crossing_doc(c, ["state_a", "state_b"]))}
    files["manifest.json"] = manifest("crossing", seed, cfg.model_dump(mode="json"), files)
    return files


TOMO_COLUMNS = ("repetition", "fidelity", "concurrence", "negativity", "doubled_negativity", "T_S", "singlet_fraction")


def _tomo_row(rho, ideal):
    return [
        measures.state_fidelity(rho, ideal),
        measures.concurrence(rho),
        measures.negativity(rho),
        measures.doubled_negativity(rho),
        measures.total_correlations(rho),
        measures.singlet_fraction(rho).fraction,
    ]


def cmd_tomo(cfg: TomoConfig, seed: int, shots: int):
    theta = cfg.angle()
    circ = circuits.build_ad_circuit(cfg.initial, theta)
    psi = circuits.simulate(circ)
    ideal = qmath.partial_trace(qmath.ket_to_dm(psi), [0, 1], 4)
    readout = circuits.ReadoutModel.symmetric_flip(2, cfg.readout_flip) if cfg.readout_flip > 0 else None
    recs = circuits.averaged_tomography(circ, cfg.repetitions, shots, readout, seed, mitigate_readout=cfg.mitigate)
    rows = [[str(k)] + _tomo_row(rho, ideal) for k, rho in enumerate(recs)]
    mean = np.mean(np.array([r[1:] for r in rows], dtype=float), axis=0)
    rows.append(["mean"] + mean.tolist())
    rows.append(["exact"] + _tomo_row(ideal, ideal))
    files = {"measures.csv": to_csv(TOMO_COLUMNS, rows)}
    for k, rho in enumerate(recs):
        files[f"rep_{k:03d}.json"] = to_json_text({"repetition": k, "density_matrix": _matrix_json(rho)})
    extra = {"theta": theta, "p": float(np.sin(theta / 2) ** 2), "shots": shots}
    files["manifest.json"] = manifest("tomo", seed, cfg.model_dump(mode="json"), files, extra)
    return files


# -- figures ----------------------------------------------------------------------

FIGURES = {
    "fig2": ("amplitude_damping", [("psi_plus", states.bell_psi_plus()), ("phi_plus", states.bell_phi_plus())]),
    "fig3": ("dephasing", [("psi_plus", states.bell_psi_plus()), ("graph", states.graph_state())]),
    "fig4": ("amplitude_damping", [("phi_gamma_0", states.make_phi_gamma(0.0)), ("phi_gamma_pi2", states.make_phi_gamma(np.pi / 2))]),
    "fig5": (
        "amplitude_damping",
        [
            ("phi_gamma_0", states.make_phi_gamma(0.0)),
            ("psi_theta_0.7pi4", states.make_psi_theta(FIG5_THETA)),
            ("phi_theta_0.7pi4", states.make_phi_theta(FIG5_THETA)),
        ],
    ),
}


def cmd_figure(name: str, seed: int):
    if name not in FIGURES:
        raise ConfigError(f"unknown figure {name!r}; choose from {sorted(FIGURES)}")
    kind, pairs = FIGURES[name]
    grid = dynamics.DEFAULT_P_GRID
    files = {}
    extra = {"figure": name, "channel": kind, "p_points": int(grid.size), "states": {}}
    for label, psi in pairs:
        pts = dynamics.sweep(psi, None, kind, grid)
        _ledger_check(psi, None, pts)
        files[f"{name}_{label}.csv"] = trajectory_csv(pts)
        extra["states"][label] = states.state_to_json(psi)
    if name == "fig5":
        base = pairs[0][1]
        crossings = []
        for label, psi in pairs[1:]:
            c = dynamics.find_crossing(base, psi, kind, "doubled_negativity")
            crossings.append(_crossing_doc(c, [pairs[0][0], label]))
        extra["crossings"] = crossings
        files["fig5_crossing.json"] = to_json_text({"crossings": crossings})
    files["manifest.json"] = manifest("figure", seed, {"name": name}, files, extra)
    return files


# -- entry point ------------------------------------------------------------------


def _add_global_flags(p: argparse.ArgumentParser, default) -> None:
    # subcommands use SUPPRESS so a flag given before the subcommand survives
    p.add_argument("--config", type=Path, default=default, help="JSON config file")
    p.add_argument("--out", type=Path, default=default, help="output directory (default: out)")
    p.add_argument("--seed", type=int, default=default, help="RNG seed (default: config seed or 0)")
    p.add_argument("--shots", type=int, default=default, help="shots per tomography setting (default 8192)")


COMMAND_HELP = {
    "sweep": "measures along a noise-strength grid",
    "ledger": "correlation ledger and its residual along a grid",
    "optimize": "search for the most robust local-unitary encoding",
    "crossing": "where a measure of two states changes order",
    "tomo": "simulated tomography of the damping circuit",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lucorr", description=__doc__.splitlines()[0].replace("``", ""))
    _add_global_flags(parser, None)
    parser.add_argument("--version", action="version", version=f"lucorr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = [sub.add_parser(name, help=COMMAND_HELP[name]) for name in CONFIG_MODELS]
    fig = sub.add_parser("figure", help="emit the data behind one figure")
    fig.add_argument("name", choices=sorted(FIGURES))
    for p in subs + [fig]:
        _add_global_flags(p, argparse.SUPPRESS)
    return parser


def _load_config(command, path):
    if path is None:
        raise ConfigError(f"{command} needs --config")
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return CONFIG_MODELS[command].model_validate(raw)


def _write(out: Path, files: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8", newline="\n")


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.shots is not None and args.shots < 1:
            raise ConfigError("--shots must be at least 1")
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be nonnegative")
        if args.command == "figure":
            seed = 0 if args.seed is None else args.seed
            files = cmd_figure(args.name, seed)
        else:
            cfg = _load_config(args.command, args.config)
            seed = args.seed if args.seed is not None else (cfg.seed if cfg.seed is not None else 0)
            if args.command == "tomo":
                shots = args.shots or cfg.shots or circuits.DEFAULT_SHOTS
                files = cmd_tomo(cfg, seed, shots)
            else:
                files = globals()[f"cmd_{args.command}"](cfg, seed)
    except (ValidationError, ConfigError, ValueError) as exc:
        if isinstance(exc, LinAlgContractError):
            print(f"numerical contract violated: {exc}", file=sys.stderr)
            return EXIT_CONTRACT
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (dynamics.ContractViolation, FloatingPointError) as exc:
        print(f"numerical contract violated: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    out = args.out if args.out is not None else Path("out")
    try:
        _write(out, files)
    except OSError as exc:
        print(f"cannot write to {out}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"wrote {len(files)} files to {out}")
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
