"""Tavis-Cummings interaction Hamiltonian on a total-quanta sector and its propagator.

Units: hbar = 1 and times are the dimensionless ``theta = coupling * tau``.
The propagator is ``exp(-i H tau)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .errors import NumericalError, ParameterError
from .sector import DensityMatrix, PureState, SectorBasis, enumerate_sector


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    basis: SectorBasis
    matrix: np.ndarray = field(repr=False)
    coupling: float = 1.0

    @cached_property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        """``(eigenvalues, eigenvectors)`` from a Hermitian eigensolver."""
        try:
            w, v = np.linalg.eigh(self.matrix)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"eigh failed for sector n={self.basis.n} q={self.basis.q} "
                f"(dim {self.basis.size}): {exc}"
            ) from exc
        w.setflags(write=False)
        v.setflags(write=False)
        return w, v

    def to_json(self) -> dict:
        return operator_json(self.basis, self.matrix)


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    basis: SectorBasis
    matrix: np.ndarray = field(repr=False)
    theta: float = 0.0

    def to_json(self) -> dict:
        doc = operator_json(self.basis, self.matrix)
        doc["theta"] = self.theta
        return doc


def operator_json(basis, matrix: np.ndarray) -> dict:
    return {
        "basis": basis.to_json(),
        "entries": [[float(z.real), float(z.imag)] for z in np.asarray(matrix).ravel()],
    }


@lru_cache(maxsize=256)
def hamiltonian(n: int, q: int, coupling: float = 1.0) -> HermitianOperator:
    """Sector matrix of ``sum_m g (a s_m^+ + a^+ s_m^-)``.

    Connects ``(mask, p)`` to ``(mask | 1<<m, p-1)`` with weight ``g*sqrt(p)``
    for each unexcited emitter ``m``.
    """
    basis = enumerate_sector(n, q)
    dim = basis.size
    if dim > 20000:
        raise ParameterError(f"sector n={n} q={q} has {dim} states; too large for a dense matrix")
    mat = np.zeros((dim, dim))
    masks, photons = basis.masks, basis.photons
    rows = np.arange(dim)
    for m in range(n):
        bit = 1 << m
        src = rows[(photons >= 1) & ((masks & bit) == 0)]
        if src.size == 0:
            continue
        dst = np.searchsorted(masks, masks[src] | bit)
        vals = coupling * np.sqrt(photons[src])
        mat[dst, src] = vals
        mat[src, dst] = vals
    mat.setflags(write=False)
    return HermitianOperator(basis, mat, float(coupling))


def phase_factors(w: np.ndarray, theta: float, coupling: float = 1.0) -> np.ndarray:
    return np.exp(-1j * w * (theta / coupling))


def propagator(H: HermitianOperator, theta: float) -> UnitaryOperator:
    """``exp(-i H theta / g)`` via the cached Hermitian eigendecomposition."""
    w, v = H.eig
    u = (v * phase_factors(w, theta, H.coupling)) @ v.conj().T
    return UnitaryOperator(H.basis, u, float(theta))


def evolve(state, U: UnitaryOperator):
    """``U psi`` for pure states, ``U rho U^+`` for density matrices."""
    if state.basis.key != U.basis.key:
        raise ParameterError(f"basis mismatch: state {state.basis.key} vs operator {U.basis.key}")
    u = U.matrix
    if isinstance(state, PureState):
        return PureState(state.basis, u @ state.amplitudes, normalized=state.normalized)
    if isinstance(state, DensityMatrix):
        return DensityMatrix(state.basis, u @ state.matrix @ u.conj().T)
    raise ParameterError(f"cannot evolve {type(state).__name__}")


def embed(n: int, q: int, amplitudes: dict[tuple[int, int], complex]) -> PureState:
    """Sector state from ``{(mask, p): amplitude}``; normalization is not enforced."""
    basis = enumerate_sector(n, q)
    vec = np.zeros(basis.size, dtype=np.complex128)
    for (mask, p), a in amplitudes.items():
        vec[basis.index(mask, p)] = a
    return PureState(basis, vec, normalized=abs(np.vdot(vec, vec).real - 1) <= 1e-12)


def product_state(emitters: PureState, p: int) -> PureState:
    """Emitter state tensored with the Fock state ``|p>``.

    All emitter components must share one excitation number so the result
    lives in a single sector.
    """
    n = emitters.basis.n
    support = np.flatnonzero(np.abs(emitters.amplitudes) > 0)
    ks = {int(m).bit_count() for m in support}
    if len(ks) != 1:
        raise ParameterError("emitter state spans several excitation numbers")
    q = ks.pop() + p
    return embed(n, q, {(int(m), p): emitters.amplitudes[m] for m in support})
