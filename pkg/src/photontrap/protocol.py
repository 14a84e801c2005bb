"""Deterministic repeated inject-evolve-measure protocol and free Rabi dynamics."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .closed_form import chain_amplitudes
from .conditional import conditional_operator, sandwich_blocks
from .errors import ParameterError
from .hamiltonian import embed, evolve, hamiltonian, propagator
from .sector import (
    DensityMatrix,
    PureState,
    QubitSpace,
    canonical_state,
    excitation_masks,
    fidelity_to,
    maximally_mixed,
    vacuum,
)

EXTINCTION_FLOOR = 1e-300


@dataclass(frozen=True)
class StepRecord:
    index: int
    state: DensityMatrix | None = field(repr=False)
    P: float
    F: float
    Y: float


@dataclass(frozen=True)
class ProtocolTrace:
    steps: list
    config: dict
    # first repetition whose cumulative probability fell below EXTINCTION_FLOOR
    extinct_at: int | None = None

    @property
    def N(self) -> np.ndarray:
        return np.array([s.index for s in self.steps])

    @property
    def P(self) -> np.ndarray:
        return np.array([s.P for s in self.steps])

    @property
    def F(self) -> np.ndarray:
        return np.array([s.F for s in self.steps])

    @property
    def Y(self) -> np.ndarray:
        return np.array([s.Y for s in self.steps])

    @property
    def final(self) -> StepRecord:
        return self.steps[-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "P", "F", "Y"])
        for s in self.steps:
            w.writerow([s.index, f"{s.P:.12f}", f"{s.F:.12f}", f"{s.Y:.12f}"])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "extinct_at": self.extinct_at,
            "steps": [
                {"N": s.index, "P": _sig(s.P), "F": _sig(s.F), "Y": _sig(s.Y)}
                for s in self.steps
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _sig(x: float) -> float:
    return float(f"{x:.12g}")


def _as_density(initial, n: int) -> DensityMatrix:
    if isinstance(initial, PureState):
        initial = initial.density()
    if not isinstance(initial, DensityMatrix):
        raise ParameterError(f"initial state must be a PureState or DensityMatrix, got {type(initial).__name__}")
    if initial.basis.key != QubitSpace(n).key:
        raise ParameterError(f"initial state basis {initial.basis.key} is not the n={n} emitter space")
    return initial.validate()


def run_conditional(initial, n: int, theta: float, N: int, monitor_p: int, target: PureState,
                    per_step_yield: bool = False, keep_states: bool = True,
                    descriptor: dict | None = None) -> ProtocolTrace:
    """Exact conditioned states after ``0..N`` successful rounds monitoring ``monitor_p`` photons.

    ``P_i`` is the probability that the first ``i`` rounds all succeed, ``F_i``
    the fidelity of the conditioned state with ``target``, and ``Y_i`` the
    product ``P_0 ... P_i`` (or ``P_i`` itself with ``per_step_yield``).
    """
    if N < 0:
        raise ParameterError("N must be >= 0")
    if monitor_p < 0:
        raise ParameterError("monitored photon count must be >= 0")
    rho0 = _as_density(initial, n)
    if fidelity_to(rho0, vacuum(n)) >= 1 - 1e-12:
        raise ParameterError("initial state is the emitter vacuum")
    if target.basis.key != rho0.basis.key:
        raise ParameterError("target and initial state live in different spaces")

    K = conditional_operator(n, monitor_p, monitor_p, theta)
    config = {
        "n": n, "theta": float(theta), "N": N, "monitor": monitor_p,
        "yield": "per_step" if per_step_yield else "product",
    }
    if descriptor:
        config.update(descriptor)

    rho = rho0.matrix
    P, Y = 1.0, 1.0
    steps = [StepRecord(0, rho0 if keep_states else None, P, fidelity_to(rho0, target), Y)]
    extinct = None
    for i in range(1, N + 1):
        sigma = sandwich_blocks(K, rho)
        p_round = float(np.trace(sigma).real)
        P *= p_round
        if not P > EXTINCTION_FLOOR:
            extinct = i
            break
        rho = sigma / p_round
        dm = DensityMatrix(rho0.basis, rho)
        Y = P if per_step_yield else Y * P
        steps.append(StepRecord(i, dm if keep_states else None, P, fidelity_to(dm, target), Y))
    return ProtocolTrace(steps, config, extinct)


def initialize_two_photon(n: int, theta: float, N: int, initial=None, **kwargs) -> ProtocolTrace:
    """Monitor two cavity photons each round, targeting the emitter vacuum.

    At ``cos(sqrt(4n-2) theta) = 1`` the vacuum is a unit-eigenvalue eigenvector
    of the conditional operator, so it is enriched round after round.
    """
    label = "maximally_mixed" if initial is None else "given"
    if initial is None:
        initial = maximally_mixed(n)
    return run_conditional(initial, n, theta, N, 2, vacuum(n),
                           descriptor={"initial": label, "target": "vacuum"}, **kwargs)


def rabi_amplitudes(n: int, q: int, t: float) -> dict:
    """Free evolution of ``|W1>|q-1>`` projected onto the symmetric chain states.

    ``q = 1``: keys ``("W1", 0)`` and ``("vacuum", 1)``.
    ``q = 2``: keys ``("W1", 1)``, ``("vacuum", 2)`` and ``("phi", 0)``.
    """
    if q not in (1, 2):
        raise ParameterError("rabi_amplitudes supports q in {1, 2}")
    if n < 2:
        raise ParameterError("rabi_amplitudes needs n >= 2")
    w1 = canonical_state("W1", n).amplitudes
    start = {(int(m), q - 1): w1[m] for m in excitation_masks(n, 1)}
    psi = evolve(embed(n, q, start), propagator(hamiltonian(n, q), t))
    basis = psi.basis

    def overlap(k: int, p: int, emitters: np.ndarray) -> complex:
        vec = np.zeros(basis.size, dtype=np.complex128)
        for m in excitation_masks(n, k):
            vec[basis.index(int(m), p)] = emitters[m]
        return complex(np.vdot(vec, psi.amplitudes))

    vac = np.zeros(1 << n)
    vac[0] = 1.0
    out = {("W1", q - 1): overlap(1, q - 1, w1), ("vacuum", q): overlap(0, q, vac)}
    if q == 2:
        out[("phi", 0)] = overlap(2, 0, canonical_state("phi", n).amplitudes)
    return out


def two_quanta_frequency_check(n: int, t: float) -> dict:
    """Compare the numerically exact two-quanta chain against both closed forms.

    Returns the max amplitude deviation for the ``sqrt(4n-2)`` form and for the
    ``sqrt(3n-2)`` form, and the name of the one that matches within 1e-10.
    """
    amps = rabi_amplitudes(n, 2, t)
    numeric = np.array([amps[("W1", 1)], amps[("vacuum", 2)], amps[("phi", 0)]])
    dev = {
        "sqrt(4n-2)": float(np.max(np.abs(numeric - np.array(chain_amplitudes(n, t))))),
        "sqrt(3n-2)": float(np.max(np.abs(numeric - np.array(chain_amplitudes(n, t, as_printed=True))))),
    }
    matches = [k for k, v in dev.items() if v <= 1e-10]
    return {"deviation": dev, "matches": matches}
