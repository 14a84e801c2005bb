"""Conditional photon-count operators ``<p_out| U(theta) |p_in>`` on the emitter space.

An operator is stored block-wise: ``blocks[k]`` maps the ``k``-excitation
emitter subspace to the ``k + p_in - p_out`` subspace, each ordered by
ascending occupation mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ParameterError
from .hamiltonian import hamiltonian, phase_factors
from .sector import (
    MAX_DENSE_EMITTERS,
    DensityMatrix,
    PureState,
    QubitSpace,
    _check_n,
    excitation_masks,
)

CLUSTER_TOL = 1e-8
UNIT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ConditionalOperator:
    n: int
    p_in: int
    p_out: int
    theta: float
    blocks: dict = field(repr=False)

    @property
    def shift(self) -> int:
        """Change in emitter excitation number."""
        return self.p_in - self.p_out

    @property
    def square(self) -> bool:
        return self.p_in == self.p_out

    def dense(self) -> np.ndarray:
        """Full ``2**n x 2**n`` matrix in mask order."""
        if self.n > MAX_DENSE_EMITTERS:
            raise ParameterError(f"dense emitter matrix limited to n <= {MAX_DENSE_EMITTERS}")
        out = np.zeros((1 << self.n, 1 << self.n), dtype=np.complex128)
        for k, blk in self.blocks.items():
            out[np.ix_(excitation_masks(self.n, k + self.shift), excitation_masks(self.n, k))] = blk
        return out

    def apply(self, state: PureState) -> PureState:
        """Unnormalized ``K psi``."""
        _require_qubit_space(state, self.n)
        psi = state.amplitudes
        out = np.zeros_like(psi)
        for k, blk in self.blocks.items():
            out[excitation_masks(self.n, k + self.shift)] += blk @ psi[excitation_masks(self.n, k)]
        return PureState(state.basis, out, normalized=False)

    def sandwich(self, rho: DensityMatrix) -> DensityMatrix:
        """Unnormalized ``K rho K^+``; zero blocks of ``rho`` are skipped."""
        _require_qubit_space(rho, self.n)
        return DensityMatrix(rho.basis, sandwich_blocks(self, rho.matrix))

    def to_json(self) -> dict:
        return {
            "n": self.n, "p_in": self.p_in, "p_out": self.p_out, "theta": self.theta,
            "blocks": {
                str(k): [[[float(z.real), float(z.imag)] for z in row] for row in blk]
                for k, blk in self.blocks.items()
            },
        }


def sandwich_blocks(K: ConditionalOperator, rho: np.ndarray) -> np.ndarray:
    n, s = K.n, K.shift
    out = np.zeros_like(rho)
    ks = [k for k in K.blocks if np.any(rho[np.ix_(excitation_masks(n, k), excitation_masks(n, k))])]
    for k in ks:
        ik, ok = excitation_masks(n, k), excitation_masks(n, k + s)
        for l in ks:
            il, ol = excitation_masks(n, l), excitation_masks(n, l + s)
            sub = rho[np.ix_(ik, il)]
            if not sub.any():
                continue
            out[np.ix_(ok, ol)] = K.blocks[k] @ sub @ K.blocks[l].conj().T
    return out


def _require_qubit_space(state, n):
    if not isinstance(state.basis, QubitSpace) or state.basis.n != n:
        raise ParameterError(f"expected an emitter-only state of n={n}, got {state.basis.key}")


def conditional_operator(n: int, p_in: int, p_out: int, theta: float,
                         coupling: float = 1.0) -> ConditionalOperator:
    """Emitter-space operator for: start with ``p_in`` photons, evolve, find ``p_out``."""
    n = _check_n(n)
    if p_in < 0 or p_out < 0:
        raise ParameterError("photon counts must be non-negative")
    blocks = {}
    for k in range(n + 1):
        k_out = k + p_in - p_out
        if not 0 <= k_out <= n:
            continue
        H = hamiltonian(n, k + p_in, coupling)
        w, v = H.eig
        photons = H.basis.photons
        cols = v[photons == p_in]
        rows = v[photons == p_out]
        blk = (rows * phase_factors(w, theta, coupling)) @ cols.conj().T
        blk.setflags(write=False)
        blocks[k] = blk
    return ConditionalOperator(n, int(p_in), int(p_out), float(theta), blocks)


def outcome_operators(n: int, p_in: int, theta: float) -> dict[int, ConditionalOperator]:
    """Every conditional operator reachable from ``p_in`` photons, keyed by ``p_out``."""
    return {p: conditional_operator(n, p_in, p, theta) for p in range(p_in + n + 1)}


def completeness_defect(n: int, p_in: int, theta: float) -> float:
    """Max-norm of ``sum_p K_p^+ K_p - I`` over the emitter space."""
    n = _check_n(n)
    acc = {k: np.zeros((len(excitation_masks(n, k)),) * 2, dtype=np.complex128) for k in range(n + 1)}
    for K in outcome_operators(n, p_in, theta).values():
        for k, blk in K.blocks.items():
            acc[k] += blk.conj().T @ blk
    return float(max(np.max(np.abs(a - np.eye(len(a)))) for a in acc.values()))


@dataclass(frozen=True, eq=False)
class SpectralReport:
    eigenvalues: np.ndarray
    eigenvectors: list = field(repr=False)
    clusters: list
    unit_norm_indices: list
    excitations: np.ndarray = field(repr=False)

    def multiplicity(self, value: complex, tol: float = CLUSTER_TOL, k: int | None = None) -> int:
        sel = np.abs(self.eigenvalues - value) <= tol
        if k is not None:
            sel &= self.excitations == k
        return int(sel.sum())

    def unit_multiplicity(self, k: int | None = None) -> int:
        idx = np.asarray(self.unit_norm_indices, dtype=int)
        if k is None:
            return len(idx)
        return int(np.sum(self.excitations[idx] == k))

    def to_json(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "clusters": [list(map(int, c)) for c in self.clusters],
            "unit_norm_indices": [int(i) for i in self.unit_norm_indices],
            "excitations": [int(k) for k in self.excitations],
        }


def _cluster(values: np.ndarray, tol: float) -> list[list[int]]:
    """Connected components of the ``|a - b| <= tol`` relation."""
    parent = list(range(len(values)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    close = np.abs(values[:, None] - values[None, :]) <= tol
    for i, j in zip(*np.nonzero(np.triu(close, 1))):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(len(values)):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values())


def spectrum(K: ConditionalOperator, cluster_tol: float = CLUSTER_TOL,
             unit_tol: float = UNIT_TOL) -> SpectralReport:
    """Eigen-analysis of a square conditional operator, sorted by descending ``|lambda|``."""
    if not K.square:
        raise ParameterError(f"spectrum needs p_in == p_out, got {K.p_in} -> {K.p_out}")
    if K.n > MAX_DENSE_EMITTERS:
        raise ParameterError(f"spectrum limited to n <= {MAX_DENSE_EMITTERS}")
    dim = 1 << K.n
    vals, vecs, exc = [], [], []
    for k in sorted(K.blocks):
        blk = K.blocks[k]
        try:
            w, v = np.linalg.eig(blk)
        except np.linalg.LinAlgError as exc_:
            raise NumericalError(f"eig failed on block k={k} (dim {len(blk)}): {exc_}") from exc_
        full = np.zeros((dim, len(w)), dtype=np.complex128)
        full[excitation_masks(K.n, k)] = v
        vals.append(w)
        vecs.append(full)
        exc.append(np.full(len(w), k))
    w = np.concatenate(vals)
    v = np.concatenate(vecs, axis=1)
    exc = np.concatenate(exc)
    order = np.argsort(-np.abs(w), kind="stable")
    w, v, exc = w[order], v[:, order], exc[order]

    clusters = _cluster(w, cluster_tol)
    for c in clusters:
        if len(c) > 1:
            q, _ = np.linalg.qr(v[:, c])
            v[:, c] = q
    v /= np.linalg.norm(v, axis=0)
    unit = [int(i) for i in np.flatnonzero(np.abs(w) >= 1 - unit_tol)]
    space = QubitSpace(K.n)
    states = [PureState(space, v[:, i]) for i in range(len(w))]
    w.setflags(write=False)
    return SpectralReport(w, states, clusters, unit, exc)


def eigen_residual(K: ConditionalOperator, state: PureState) -> tuple[complex, float]:
    """Rayleigh quotient ``lambda`` and residual ``||K v - lambda v||`` for a candidate eigenvector."""
    v = state.amplitudes / state.norm
    kv = K.apply(PureState(state.basis, v)).amplitudes
    lam = complex(np.vdot(v, kv))
    return lam, float(np.linalg.norm(kv - lam * v))
