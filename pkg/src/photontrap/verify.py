"""Analytic-versus-numeric consistency checks run by ``photontrap verify``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import closed_form as cf
from .conditional import completeness_defect, conditional_operator, eigen_residual, spectrum
from .protocol import initialize_two_photon, rabi_amplitudes, run_conditional, two_quanta_frequency_check
from .sector import canonical_state
from .trajectories import run_trajectories


@dataclass(frozen=True)
class Check:
    name: str
    observed: float
    expected: float
    tol: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = (f"{status}  {self.name}: observed={self.observed:.6g} "
                f"expected={self.expected:.6g} tol={self.tol:.1e}")
        return text + (f"  ({self.detail})" if self.detail else "")


def _max_dev(name, observed, expected, tol, detail=""):
    dev = float(np.max(np.abs(np.asarray(observed) - np.asarray(expected))))
    return Check(name, dev, 0.0, tol, dev <= tol, detail or "max |numeric - analytic|")


def _start(n):
    return canonical_state("computational", n, mask=1)


def _generic_thetas(rng, count, n):
    """Random theta in (0, pi) kept >= 0.05 away from the unit-modulus nodes."""
    freqs = [np.sqrt(4 * n - 2), np.sqrt(n), np.sqrt(max(n - 2, 0))]
    out = []
    while len(out) < count:
        t = rng.uniform(0.05, np.pi)
        if all(f == 0 or abs(f * t / np.pi - round(f * t / np.pi)) * np.pi / f >= 0.05 for f in freqs):
            out.append(t)
    return out


def run_checks(quick: bool = False, seed: int = 2024, mc_samples: int = 100_000) -> list[Check]:
    rng = np.random.default_rng(seed)
    n_thetas = 5 if quick else 20
    checks = []

    th = np.pi / (4 * np.sqrt(6))
    N = np.arange(21)
    tr = run_conditional(_start(2), 2, th, 20, 1, canonical_state("singlet", 2, i=0, j=1))
    checks.append(_max_dev("bell P_N = (1+2^-N)/2", tr.P, 0.5 * (1 + 2.0 ** -N), 1e-9))
    checks.append(_max_dev("bell F_N = 1/(1+2^-N)", tr.F, 1 / (1 + 2.0 ** -N), 1e-9))

    th3 = np.pi / np.sqrt(10)
    tr = run_conditional(_start(3), 3, th3, 20, 1, canonical_state("W1", 3))
    P, F = cf.p_and_f(3, th3, N)
    checks.append(_max_dev("n=3 P_N vs closed form", tr.P, P, 1e-9))
    checks.append(_max_dev("n=3 F_N vs closed form", tr.F, F, 1e-9))
    checks.append(Check("n=3 F_20 >= 0.999999", tr.F[-1], 0.999999, 0.0, tr.F[-1] >= 0.999999))

    th6 = np.pi / np.sqrt(22)
    tr = run_conditional(_start(6), 6, th6, 1, 1, canonical_state("W1", 6))
    P6, F6 = cf.p_and_f(6, th6, 1)
    checks.append(_max_dev("n=6 P_1 vs closed form", tr.P[1], P6, 1e-9))
    checks.append(_max_dev("n=6 F_1 vs closed form", tr.F[1], F6, 1e-9))
    checks.append(_max_dev("n=6 P_1 = 0.2104294", tr.P[1], 0.210429364177, 1e-6))
    checks.append(_max_dev("n=6 F_1 = 0.7920314", tr.F[1], 0.792031413098, 1e-6))

    for n in range(2, 11):
        devP = devF = 0.0
        for t in rng.uniform(0, np.pi, n_thetas):
            tr = run_conditional(_start(n), n, t, 10, 1, canonical_state("W1", n), keep_states=False)
            P, F = cf.p_and_f(n, t, tr.N)
            devP = max(devP, np.max(np.abs(tr.P - P)))
            devF = max(devF, np.max(np.abs(tr.F - F)))
        checks.append(Check(f"general law n={n}", max(devP, devF), 0.0, 1e-9,
                            max(devP, devF) <= 1e-9, "max over P and F"))

    for n in range(2, 11):
        res, eig = 0.0, 0.0
        for t in _generic_thetas(rng, n_thetas, n):
            K = conditional_operator(n, 1, 1, t)
            for kind in ("W1", "W2"):
                lam, r = eigen_residual(K, canonical_state(kind, n))
                res = max(res, r)
                if kind == "W1":
                    eig = max(eig, abs(lam - cf.superop_eigenvalue("w1", n, t)))
        checks.append(Check(f"W1/W2 eigenvector residual n={n}", res, 0.0, 1e-9, res <= 1e-9))
        checks.append(Check(f"W1 eigenvalue n={n}", eig, 0.0, 1e-9, eig <= 1e-9))

    for n in range(2, 11):
        t = _generic_thetas(rng, 1, n)[0]
        rep = spectrum(conditional_operator(n, 0, 0, t))
        mult = rep.unit_multiplicity(k=1)
        checks.append(Check(f"vacuum-monitor dark multiplicity n={n}", mult, n - 1, 0, mult == n - 1))
    t = _generic_thetas(rng, 1, 3)[0]
    mult = spectrum(conditional_operator(3, 0, 0, t)).unit_multiplicity()
    checks.append(Check("vacuum-monitor total unit multiplicity n=3", mult, 3, 0, mult == 3))

    dev = 0.0
    for n in range(2, 11):
        for t in rng.uniform(0, np.pi, n_thetas):
            lam, _ = eigen_residual(conditional_operator(n, 2, 2, t), canonical_state("computational", n, mask=0))
            dev = max(dev, abs(lam - cf.superop_eigenvalue("vacuum_2photon", n, t)))
    checks.append(Check("<2|U|2> vacuum eigenvalue", dev, 0.0, 1e-9, dev <= 1e-9))

    dev = 0.0
    for n in range(1, 7):
        for p_in in range(3):
            for t in rng.uniform(0, np.pi, 3 if quick else 10):
                dev = max(dev, completeness_defect(n, p_in, t))
    checks.append(Check("measurement completeness", dev, 0.0, 1e-10, dev <= 1e-10))

    expected = float(cf.p_and_f(3, th3, 5)[0])
    a = run_trajectories(_start(3), 3, th3, 5, 1, mc_samples, 42)
    b = run_trajectories(_start(3), 3, th3, 5, 1, mc_samples, 42)
    z = abs(a.rate - expected) / max(a.stderr, 1e-300)
    checks.append(Check("Monte Carlo rate within 4 sigma", a.rate, expected, 4 * a.stderr, z <= 4,
                        f"{z:.2f} sigma, {mc_samples} samples"))
    same = a.dumps() == b.dumps()
    checks.append(Check("Monte Carlo determinism", float(same), 1.0, 0.0, same))

    dev = 0.0
    for n in range(2, 9):
        for t in rng.uniform(0, 3, n_thetas):
            amp = rabi_amplitudes(n, 1, t)
            dev = max(dev, abs(amp[("W1", 0)] - np.cos(np.sqrt(n) * t)),
                      abs(amp[("vacuum", 1)] + 1j * np.sin(np.sqrt(n) * t)))
    checks.append(Check("one-quantum Rabi amplitudes", dev, 0.0, 1e-10, dev <= 1e-10))
    dev, printed_min = 0.0, np.inf
    for n in range(2, 9):
        rep = two_quanta_frequency_check(n, 0.5)
        dev = max(dev, rep["deviation"]["sqrt(4n-2)"])
        printed_min = min(printed_min, rep["deviation"]["sqrt(3n-2)"])
    checks.append(Check("two-quanta chain matches sqrt(4n-2)", dev, 0.0, 1e-10, dev <= 1e-10))
    checks.append(Check("two-quanta chain rejects sqrt(3n-2)", printed_min, 0.0, 1e-10,
                        printed_min > 1e-10, "min deviation must exceed tol"))

    def first_reaching(n, theta, level):
        tr = run_conditional(_start(n), n, theta, 10, 1, canonical_state("W1", n), keep_states=False)
        hits = np.flatnonzero(tr.F >= level)
        return int(hits[0]) if hits.size else 99
    n3 = first_reaching(3, th3, 0.99)
    n6 = first_reaching(6, th6, 0.99)
    checks.append(Check("F_{N,3} >= 0.99 by N=5", n3, 5, 0, n3 <= 5))
    checks.append(Check("F_{N,6} >= 0.99 by N=3", n6, 3, 0, n6 <= 3))

    P5 = [float(cf.p_and_f(n, cf.node_times(n, 1), 5)[0]) for n in range(3, 10)]
    steps = np.diff(P5)
    checks.append(Check("P_5 strictly decreasing in n at nodes", float(steps.max()), 0.0, 0.0,
                        bool(np.all(steps < 0)), "largest successive difference"))

    tr = initialize_two_photon(3, 2 * np.pi / np.sqrt(10), 10)
    mono = bool(np.all(np.diff(tr.F) >= -1e-12))
    checks.append(Check("two-photon initialization: vacuum fidelity non-decreasing", tr.F[-1],
                        1.0, 0.0, mono, f"F_10 = {tr.F[-1]:.6f}"))
    return checks
