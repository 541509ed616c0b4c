"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed
straight to the terminal) or as a script, ``python3 tests/test_acceptance.py``,
which prints the twelve lines and exits nonzero if any failed.

Criteria 7 and 8 are stated for Psi_theta = cos(t)|01> + sin(t)|10> and are
run literally. For that family there is no negativity crossing with Phi+
under symmetric amplitude damping and the singlet fraction does not reach
(1 + 2N)/2, so both report FAIL. The failure lines carry the numbers.
"""
from __future__ import annotations

import contextlib
import io
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from lucorr import channels, circuits, cli, dynamics, measures, qmath, states

FIG5_THETA = 0.7 * np.pi / 4
SEED = 20240611


def dm(psi):
    return np.outer(psi, np.conj(psi))


def crit_1():
    thetas = np.linspace(0.1, np.pi / 2 - 0.1, 9)
    ps = [0, 0.25, 0.5, 0.75, 1]
    worst = 0.0
    for t in thetas:
        rho = dm(states.make_psi_theta(t))
        for p1 in ps:
            for p2 in ps:
                out = channels.apply_product_channel(rho, [channels.dephasing(p1), channels.dephasing(p2)])
                worst = max(worst, abs(measures.concurrence(out) - (1 - p1) * (1 - p2) * np.sin(2 * t)))
    return worst <= 1e-9, f"max |C - (1-p1)(1-p2)sin2t| = {worst:.2e} over 225 points"


def crit_2():
    worst_d = worst_n = 0.0
    rho = dm(states.make_phi_gamma(0.0))
    for p in np.linspace(0, 1, 11):
        out = channels.apply_product_channel(rho, [channels.amplitude_damping(p)] * 2)
        worst_d = max(worst_d, abs(measures.doubled_negativity(out) - (1 - p) ** 2))
        worst_n = max(worst_n, abs(measures.negativity(out) - (1 - p) ** 2 / 2))
    ok = worst_d <= 1e-9 and worst_n <= 1e-9
    return ok, f"doubled convention err {worst_d:.2e}, half convention err {worst_n:.2e}"


def crit_3():
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    env0 = np.diag([1.0, 0.0])
    for _ in range(100):
        rho = states.random_density_matrix(1, rng)
        p = rng.uniform()
        for kind in ("D", "AD"):
            c = channels.channel_at(kind, p)
            v = channels.dilation(c)
            joint = v @ np.kron(rho, env0) @ v.conj().T
            worst = max(worst, np.max(np.abs(qmath.partial_trace(joint, [0], 2) - c(rho))))
    return worst <= 1e-12, f"max dilation-Kraus deviation {worst:.2e}"


def crit_4():
    rng = np.random.default_rng(SEED + 4)
    inputs = [states.random_pure_state(2, rng) for _ in range(50)]
    inputs += [states.random_pure_state(3, rng) for _ in range(10)]
    grid = np.linspace(0, 1, 10)
    worst = 0.0
    for psi in inputs:
        for kind in ("D", "AD"):
            worst = max(worst, dynamics.ledger(psi, None, kind, grid).max_residual)
    return worst <= 1e-9, f"max ledger residual {worst:.2e} over 120 runs x 10 p"


def crit_5():
    rng = np.random.default_rng(SEED + 5)
    worst = 0.0
    for psi in (states.bell_phi_plus(), states.ghz(3)):
        n = states.n_qubits(psi)
        for _ in range(10):
            a = states.Encoding.from_flat(rng.uniform(0, 2 * np.pi, 3 * n))
            b = states.Encoding.from_flat(rng.uniform(0, 2 * np.pi, 3 * n))
            for kind in ("D", "AD"):
                for p in np.linspace(0.1, 0.9, 5):
                    worst = max(worst, dynamics.conservation_check(psi, a, b, kind, p))
    return worst <= 1e-9, f"max triple disagreement {worst:.2e}"


def crit_6():
    notes = []
    ok = True
    for kind in ("D", "AD"):
        rep = dynamics.verify_orderings(kind, n_gamma=51, n_p=21)
        ok &= rep.passed
        notes.append(f"{kind}: {len(rep.checks)} checks" + ("" if rep.passed else f" FAILED {rep.violations()}"))
    return ok, "; ".join(notes)


def crit_7():
    c = dynamics.find_crossing(
        states.make_phi_gamma(0.0), states.make_psi_theta(FIG5_THETA), "AD", "doubled_negativity"
    )
    if c.p_star is not None and 0 < c.p_star < 1:
        return True, f"p* = {c.p_star:.10f}"
    companion = dynamics.find_crossing(
        states.make_phi_gamma(0.0), states.make_phi_theta(FIG5_THETA), "AD", "doubled_negativity"
    )
    return False, (
        "no sign change for cos|01>+sin|10> "
        f"(cos|00>+sin|11> crosses at p* = {companion.p_star:.10f})"
    )


def crit_8():
    worst = 0.0
    for t in np.linspace(0.1, np.pi / 2 - 0.1, 9):
        rho0 = dm(states.make_psi_theta(t))
        for p in np.linspace(0, 1, 11):
            rho = channels.apply_product_channel(rho0, [channels.amplitude_damping(p)] * 2)
            f = measures.singlet_fraction(rho).fraction
            worst = max(worst, abs(f - (1 + measures.doubled_negativity(rho)) / 2))
    return worst <= 1e-8, f"max |F - (1+2N)/2| = {worst:.3e} over 99 points"


def crit_9():
    rng = np.random.default_rng(SEED + 9)
    phi = dm(states.bell_phi_plus())
    worst = -np.inf
    for k in range(200):
        rho = dm(states.random_pure_state(2, rng)) if k % 2 == 0 else states.random_density_matrix(2, rng)
        c0 = measures.concurrence(rho)
        p1, p2 = rng.uniform(size=2)
        for kind in ("D", "AD"):
            l1, l2 = channels.channel_at(kind, p1), channels.channel_at(kind, p2)
            lhs = measures.concurrence(channels.apply_product_channel(rho, [l1, l2]))
            c1 = measures.concurrence(channels.apply_product_channel(phi, [l1, None]))
            c2 = measures.concurrence(channels.apply_product_channel(phi, [None, l2]))
            worst = max(worst, lhs - c1 * c2 * c0)
    return worst <= 1e-9, f"max excess over bound {worst:.2e} (negative means slack)"


def crit_10():
    pts = dynamics.sweep(states.graph_state(), None, "D", dynamics.DEFAULT_P_GRID, with_singlet=False)
    worst = max(abs(pt.T_E) for pt in pts)
    return worst <= 1e-10, f"max |T_E| = {worst:.2e} over {len(pts)} p values"


def crit_11():
    bell = circuits.Circuit(2).add("H", 0).add("CNOT", 1, controls=(0,))
    target = dm(states.bell_phi_plus())
    noisy = circuits.ReadoutModel.symmetric_flip(2, 0.03)
    good = better = 0
    for seed in range(20):
        ideal = circuits.averaged_tomography(bell, 1, 8192, None, seed)[0]
        good += measures.state_fidelity(ideal, target) >= 0.99
        raw = circuits.averaged_tomography(bell, 1, 8192, noisy, seed, mitigate_readout=False)[0]
        fixed = circuits.averaged_tomography(bell, 1, 8192, noisy, seed, mitigate_readout=True)[0]
        better += measures.state_fidelity(fixed, target) > measures.state_fidelity(raw, target)
    return good == 20 and better >= 18, f"ideal fidelity >= 0.99 in {good}/20; mitigation helps in {better}/20"


def crit_12():
    diffs = []
    with tempfile.TemporaryDirectory() as tmp:
        for name in sorted(cli.FIGURES):
            a, b = Path(tmp, name, "a"), Path(tmp, name, "b")
            for out in (a, b):
                with contextlib.redirect_stdout(io.StringIO()):
                    code = cli.run(["figure", name, "--seed", "7", "--out", str(out)])
                if code != cli.EXIT_OK:
                    return False, f"figure {name} did not exit 0"
            for f in sorted(a.iterdir()):
                if f.read_bytes() != (b / f.name).read_bytes():
                    diffs.append(f"{name}/{f.name}")
    return not diffs, "all figure outputs byte-identical" if not diffs else f"differs: {diffs}"


CRITERIA = {
    1: ("dephasing concurrence law", crit_1),
    2: ("amplitude-damping negativity law", crit_2),
    3: ("Kraus-dilation equivalence", crit_3),
    4: ("correlation ledger residual", crit_4),
    5: ("conservation across encodings", crit_5),
    6: ("Phi_gamma robustness orderings", crit_6),
    7: ("negativity crossing for Psi_theta", crit_7),
    8: ("singlet fraction saturates negativity bound", crit_8),
    9: ("two-sided factorization bound", crit_9),
    10: ("graph state leaves environment uncorrelated", crit_10),
    11: ("tomography statistics", crit_11),
    12: ("figure output determinism", crit_12),
}


def evaluate(number):
    title, fn = CRITERIA[number]
    t0 = time.perf_counter()
    ok, detail = fn()
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail} [{time.perf_counter() - t0:.1f}s]"
    return bool(ok), line


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, line = evaluate(number)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
