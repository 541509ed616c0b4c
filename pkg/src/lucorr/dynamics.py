"""Noise sweeps, the system/environment correlation ledger, and figure-level checks."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import channels, measures, qmath, states
from .states import Encoding

LEDGER_TOL = 1e-9
CONSERVATION_TOL = 1e-9
ORDERING_TOL = 1e-10
CROSSING_TOL = 1e-8
MARGINAL_TOL = 1e-10

DEFAULT_P_GRID = np.linspace(0.0, 1.0, 101)

CSV_COLUMNS = (
    "p",
    "T_S",
    "T_E",
    "I_SE",
    "I_local",
    "concurrence",
    "negativity",
    "doubled_negativity",
    "E_SE",
    "singlet_fraction",
    "telep_fidelity",
)


class ContractViolation(RuntimeError):
    """A numerical identity that must hold did not."""


@dataclass(frozen=True)
class TrajectoryPoint:
    p: float
    T_S: float
    T_E: float
    I_SE: float
    I_local: float
    concurrence: float
    negativity: float
    doubled_negativity: float
    E_SE: float
    singlet_fraction: float
    telep_fidelity: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def _check_grid(p_grid) -> np.ndarray:
    p = np.asarray(p_grid, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError("p grid must be a nonempty 1-D sequence")
    if np.any(p < 0) or np.any(p > 1) or np.any(np.diff(p) < 0):
        raise ValueError("p grid must be sorted and inside [0, 1]")
    return p


def evolve(initial, enc: Encoding | None, channel_kind: str, p: float) -> np.ndarray:
    """Encode the pure initial state, then evolve system plus environments at strength ``p``."""
    psi = states.validate_pure(initial)
    n = states.n_qubits(psi)
    if enc is not None:
        psi = states.apply_encoding(psi, enc)
    return channels.evolve_joint(psi, [channels.channel_at(channel_kind, p)] * n)


def _joint_quantities(joint: np.ndarray, n: int) -> dict[str, float]:
    rho = qmath.ket_to_dm(joint)
    sys_q = list(range(n))
    env_q = list(range(n, 2 * n))
    rho_s = qmath.partial_trace(rho, sys_q, 2 * n)
    rho_e = qmath.partial_trace(rho, env_q, 2 * n)
    i_local = sum(
        measures.mutual_information(qmath.partial_trace(rho, [i, n + i], 2 * n), [0]) for i in range(n)
    )
    return {
        "rho_s": rho_s,
        "T_S": measures.total_correlations(rho_s),
        "T_E": measures.total_correlations(rho_e),
        "I_SE": measures.mutual_information(rho, sys_q),
        "I_local": i_local,
    }


def sweep(
    initial,
    enc: Encoding | None,
    channel_kind: str,
    p_grid=DEFAULT_P_GRID,
    with_singlet: bool = True,
) -> list[TrajectoryPoint]:
    """Record every quantifier along a noise sweep.

    Two-qubit-only quantities (concurrence, singlet fraction) are NaN for
    other register sizes; negativity is taken across qubit 0 versus the rest.
    """
    p_grid = _check_grid(p_grid)
    n = states.n_qubits(initial)
    out = []
    for p in p_grid:
        joint = evolve(initial, enc, channel_kind, p)
        q = _joint_quantities(joint, n)
        rho_s = q["rho_s"]
        neg = measures.negativity(rho_s, [0])
        if n == 2:
            conc = measures.concurrence(rho_s)
            if with_singlet:
                sf = measures.singlet_fraction(rho_s)
                f, fid = sf.fraction, sf.fidelity
            else:
                f = fid = float("nan")
        else:
            conc = f = fid = float("nan")
        out.append(
            TrajectoryPoint(
                p=float(p),
                T_S=q["T_S"],
                T_E=q["T_E"],
                I_SE=q["I_SE"],
                I_local=q["I_local"],
                concurrence=conc,
                negativity=neg,
                doubled_negativity=2 * neg,
                E_SE=measures.entropy(rho_s),
                singlet_fraction=f,
                telep_fidelity=fid,
            )
        )
    return out


@dataclass
class CorrelationLedger:
    p: np.ndarray
    dT_S: np.ndarray
    dT_E: np.ndarray
    I_SE: np.ndarray
    I_local: np.ndarray
    residual: np.ndarray = field(init=False)

    def __post_init__(self):
        self.residual = self.dT_S + self.I_SE - self.I_local + self.dT_E

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residual)))

    def rows(self):
        for i in range(self.p.size):
            yield {f.name: float(getattr(self, f.name)[i]) for f in fields(self)}


def ledger(initial, enc: Encoding | None, channel_kind: str, p_grid=DEFAULT_P_GRID) -> CorrelationLedger:
    """Change in system/environment total correlations against the mutual informations.

    The residual ``dT_S + I_SE - I_local + dT_E`` vanishes identically for
    a unitary system-environment evolution from a product state.
    """
    p_grid = _check_grid(p_grid)
    psi = states.validate_pure(initial)
    n = states.n_qubits(psi)
    if enc is not None:
        psi = states.apply_encoding(psi, enc)
    t_s0 = measures.total_correlations(qmath.ket_to_dm(psi))
    env0 = np.zeros(2**n)
    env0[0] = 1.0
    t_e0 = measures.total_correlations(qmath.ket_to_dm(env0))
    rows = []
    for p in p_grid:
        joint = channels.evolve_joint(psi, [channels.channel_at(channel_kind, p)] * n)
        q = _joint_quantities(joint, n)
        rows.append((q["T_S"] - t_s0, q["T_E"] - t_e0, q["I_SE"], q["I_local"]))
    arr = np.array(rows, dtype=float).reshape(-1, 4)
    return CorrelationLedger(p_grid.copy(), arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])


def _flow_triple(psi: np.ndarray, channel_kind: str, p: float) -> float:
    led = ledger(psi, None, channel_kind, [p])
    return float(led.dT_S[0] + led.I_SE[0] + led.dT_E[0])


def conservation_check(initial, enc_a: Encoding, enc_b: Encoding, channel_kind: str, p: float) -> float:
    """|(dT_S + I_SE + dT_E) under enc_a - the same under enc_b|.

    Only meaningful for inputs whose single-qubit marginals are maximally
    mixed; anything else is rejected.
    """
    psi = states.validate_pure(initial)
    n = states.n_qubits(psi)
    rho = qmath.ket_to_dm(psi)
    half = np.eye(2) / 2
    for q in range(n):
        if np.max(np.abs(qmath.partial_trace(rho, [q], n) - half)) > MARGINAL_TOL:
            raise ValueError(f"marginal of qubit {q} is not maximally mixed")
    if enc_a == enc_b:
        return 0.0
    a = _flow_triple(states.apply_encoding(psi, enc_a), channel_kind, p)
    b = _flow_triple(states.apply_encoding(psi, enc_b), channel_kind, p)
    return abs(a - b)


# -- orderings --------------------------------------------------------------


@dataclass
class OrderingCheck:
    name: str
    passed: bool
    worst_margin: float
    failures: list[tuple[float, float]] = field(default_factory=list)


@dataclass
class OrderingReport:
    channel: str
    gammas: np.ndarray
    p_grid: np.ndarray
    checks: list[OrderingCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def violations(self) -> list[str]:
        return [f"{c.name}: worst margin {c.worst_margin:.3e}" for c in self.checks if not c.passed]


def family_measures(channel_kind: str, gammas, p_grid, tags=("concurrence", "doubled_negativity", "E_SE")):
    """``{tag: array (len(p_grid), len(gammas))}`` for the Phi_gamma family under symmetric noise."""
    out = {t: np.empty((len(p_grid), len(gammas))) for t in tags}
    for i, p in enumerate(p_grid):
        chans = [channels.channel_at(channel_kind, p)] * 2
        for j, g in enumerate(gammas):
            rho = channels.apply_product_channel(qmath.ket_to_dm(states.make_phi_gamma(g)), chans)
            for t in tags:
                out[t][i, j] = measures.measure(rho, t)
    return out


def _extremum_check(name, values, p_grid, col, kind, interior=False):
    # margin >= -tol means column `col` is the max (or min) of each row
    if kind == "max":
        margin = values[:, col] - values.max(axis=1)
    else:
        margin = values.min(axis=1) - values[:, col]
    mask = np.ones(len(p_grid), bool)
    if interior:
        mask = (p_grid > 0) & (p_grid < 1)
    bad = [(float(p), float(m)) for p, m, ok in zip(p_grid, margin, mask) if ok and m < -ORDERING_TOL]
    return OrderingCheck(name, not bad, float(margin[mask].min()) if mask.any() else 0.0, bad)


def verify_orderings(channel_kind: str, n_gamma: int = 51, n_p: int = 21) -> OrderingReport:
    """Check which Phi_gamma are most and least robust along a (gamma, p) grid."""
    kind = channels.canonical_kind(channel_kind)
    gammas = np.linspace(0.0, np.pi / 2, n_gamma)
    p_grid = np.linspace(0.0, 1.0, n_p)
    vals = family_measures(kind, gammas, p_grid)
    c, n2, ese = vals["concurrence"], vals["doubled_negativity"], vals["E_SE"]
    last = n_gamma - 1
    checks = []
    if kind == "amplitude_damping":
        checks += [
            _extremum_check("concurrence max at gamma=pi/2", c, p_grid, last, "max"),
            _extremum_check("concurrence min at gamma=0", c, p_grid, 0, "min"),
            _extremum_check("negativity max at gamma=0", n2, p_grid, 0, "max"),
            _extremum_check("negativity min at gamma=pi/2", n2, p_grid, last, "min"),
        ]
        margin = ese[:, 0] - ese[:, last]
        interior = (p_grid > 0) & (p_grid < 1)
        bad = [(float(p), float(m)) for p, m, ok in zip(p_grid, margin, interior) if ok and m < -ORDERING_TOL]
        checks.append(OrderingCheck("E_SE(gamma=0) >= E_SE(gamma=pi/2)", not bad, float(margin[interior].min()), bad))
    elif kind == "dephasing":
        if (n_gamma - 1) % 2:
            raise ValueError("dephasing check needs gamma=pi/4 on the grid (odd n_gamma)")
        mid = (n_gamma - 1) // 2
        for tag, v in (("concurrence", c), ("negativity", n2)):
            checks += [
                _extremum_check(f"{tag} max at gamma=0", v, p_grid, 0, "max"),
                _extremum_check(f"{tag} max at gamma=pi/2", v, p_grid, last, "max"),
                _extremum_check(f"{tag} min at gamma=pi/4", v, p_grid, mid, "min"),
            ]
    else:
        raise ValueError(f"no ordering claims for channel {channel_kind!r}")
    return OrderingReport(kind, gammas, p_grid, checks)


# -- crossings ----------------------------------------------------------------


@dataclass
class Crossing:
    p_star: float | None
    others: list[float]
    measure: str
    channel: str


def measure_under_noise(psi, channel_kind: str, p: float, tag: str) -> float:
    n = states.n_qubits(psi)
    rho = channels.apply_product_channel(states.as_density(psi), [channels.channel_at(channel_kind, p)] * n)
    return measures.measure(rho, tag)


def find_crossing(
    state_a, state_b, channel_kind: str, measure_tag: str, n_grid: int = 101, tol: float = CROSSING_TOL
) -> Crossing:
    """Smallest p in (0, 1) where measure(a) - measure(b) changes sign.

    A coarse sign scan brackets every flip; each bracket is bisected to
    width ``tol``. Grid points where the difference is below 1e-13 carry no
    sign and are skipped.
    """

    def diff(p):
        return measure_under_noise(state_a, channel_kind, p, measure_tag) - measure_under_noise(
            state_b, channel_kind, p, measure_tag
        )

    grid = np.linspace(0.0, 1.0, n_grid)
    signed = [(p, np.sign(d)) for p in grid if abs(d := diff(p)) > 1e-13]
    roots = []
    for (p0, s0), (p1, s1) in zip(signed, signed[1:]):
        if s0 == s1:
            continue
        lo, hi = p0, p1
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if np.sign(diff(mid)) == s0:
                lo = mid
            else:
                hi = mid
        roots.append(0.5 * (lo + hi))
    roots = [r for r in roots if 0.0 < r < 1.0]
    kind = channels.canonical_kind(channel_kind)
    if not roots:
        return Crossing(None, [], measure_tag, kind)
    return Crossing(roots[0], roots[1:], measure_tag, kind)
