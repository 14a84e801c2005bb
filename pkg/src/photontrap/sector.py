"""Excitation-number bases, emitter states and canonical entangled states.

Conventions used throughout the package:

* Emitter ``m`` (0-based) is bit ``m`` of an occupation mask. When a mask is
  written as a ket string the leftmost symbol is emitter 0, so ``|100>`` is
  mask ``0b001``.
* A sector ``(n, q)`` holds every ``(mask, p)`` with ``popcount(mask) + p == q``,
  ordered by ascending mask. The photon count is implied by the mask.
* The emitter-only ("qubit-only") space of ``n`` emitters has dimension
  ``2**n`` and is indexed directly by the mask.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, sqrt
from typing import Iterator, Union

import numpy as np

from .errors import ParameterError

MAX_EMITTERS = 24
# full 2**n emitter-space matrices are only built up to this size
MAX_DENSE_EMITTERS = 12

NORM_TOL = 1e-12


def popcount(masks):
    """Number of set bits, elementwise."""
    return np.bitwise_count(np.asarray(masks, dtype=np.int64)).astype(np.int64)


def _check_n(n: int, lo: int = 1, hi: int = MAX_EMITTERS) -> int:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ParameterError(f"emitter count must be an integer, got {n!r}")
    n = int(n)
    if not lo <= n <= hi:
        raise ParameterError(f"emitter count n={n} outside [{lo}, {hi}]")
    return n


@lru_cache(maxsize=None)
def excitation_masks(n: int, k: int) -> np.ndarray:
    """Ascending occupation masks of ``n`` emitters with exactly ``k`` excitations."""
    n = _check_n(n)
    if k < 0 or k > n:
        out = np.zeros(0, dtype=np.int64)
    else:
        out = np.array(
            sorted(sum(1 << b for b in c) for c in itertools.combinations(range(n), k)),
            dtype=np.int64,
        )
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class QubitConfig:
    occupations: int
    n: int

    def __post_init__(self):
        _check_n(self.n)
        if self.occupations < 0 or self.occupations >> self.n:
            raise ParameterError(
                f"mask {self.occupations:#b} has bits outside {self.n} emitters"
            )

    @property
    def excitations(self) -> int:
        return int(self.occupations).bit_count()

    def ket(self) -> str:
        return "".join(str((self.occupations >> m) & 1) for m in range(self.n))


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Joint emitter/photon basis of one conserved total-quanta sector."""

    n: int
    q: int
    masks: np.ndarray = field(repr=False)
    photons: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.masks)

    @property
    def key(self):
        return ("sector", self.n, self.q)

    def __eq__(self, other):
        return isinstance(other, SectorBasis) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __len__(self):
        return self.size

    def __iter__(self) -> Iterator[tuple[QubitConfig, int]]:
        for m, p in zip(self.masks, self.photons):
            yield QubitConfig(int(m), self.n), int(p)

    @property
    def elements(self) -> list[tuple[QubitConfig, int]]:
        return list(self)

    def index(self, mask: int, p: int) -> int:
        """Position of ``(mask, p)``; raises ParameterError if absent."""
        if int(mask).bit_count() + p != self.q:
            raise ParameterError(f"({mask:#b}, p={p}) not in sector q={self.q}")
        pos = int(np.searchsorted(self.masks, mask))
        if pos >= self.size or self.masks[pos] != mask:
            raise ParameterError(f"mask {mask:#b} not in sector")
        return pos

    def to_json(self) -> dict:
        return {"n": self.n, "q": self.q}


@dataclass(frozen=True)
class QubitSpace:
    """The ``2**n`` dimensional emitter-only space."""

    n: int

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def key(self):
        return ("qubit-only", self.n)

    def __len__(self):
        return self.size

    def to_json(self) -> dict:
        return {"n": self.n, "q": "qubit-only"}


Basis = Union[SectorBasis, QubitSpace]


def enumerate_sector(n: int, q: int) -> SectorBasis:
    """All ``(mask, p)`` with ``popcount(mask) + p == q``, ascending by mask."""
    n = _check_n(n)
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)) or q < 0:
        raise ParameterError(f"total quanta must be a non-negative integer, got {q!r}")
    q = int(q)
    kmax = min(n, q)
    if kmax == n:
        masks = np.arange(1 << n, dtype=np.int64)
    else:
        masks = np.sort(np.concatenate([excitation_masks(n, k) for k in range(kmax + 1)]))
    photons = q - popcount(masks)
    masks.setflags(write=False)
    photons.setflags(write=False)
    return SectorBasis(n, q, masks, photons)


def sector_size(n: int, q: int) -> int:
    return sum(comb(n, k) for k in range(min(n, q) + 1))


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    basis: Basis
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        amps = _freeze(self.amplitudes)
        if amps.ndim != 1 or len(amps) != self.basis.size:
            raise ParameterError(
                f"amplitude vector of shape {amps.shape} does not match basis size {self.basis.size}"
            )
        object.__setattr__(self, "amplitudes", amps)
        if self.normalized and abs(np.vdot(amps, amps).real - 1.0) > NORM_TOL:
            raise ParameterError("state flagged normalized but norm differs from 1")

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.basis, np.outer(self.amplitudes, self.amplitudes.conj()))

    def to_json(self) -> dict:
        return {
            "basis": self.basis.to_json(),
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    basis: Basis
    matrix: np.ndarray

    def __post_init__(self):
        mat = _freeze(self.matrix)
        d = self.basis.size
        if mat.shape != (d, d):
            raise ParameterError(f"matrix shape {mat.shape} does not match basis size {d}")
        object.__setattr__(self, "matrix", mat)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def validate(self, normalized: bool = True) -> "DensityMatrix":
        """Check Hermiticity, positivity and (optionally) unit trace."""
        m = self.matrix
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-12:
            raise ParameterError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(m).min(initial=0.0) < -1e-10:
            raise ParameterError("density matrix has negative eigenvalues")
        if normalized and abs(self.trace - 1.0) > 1e-12:
            raise ParameterError(f"density matrix trace {self.trace} != 1")
        return self


def _qubit_state(n: int, amps: dict[int, float]) -> PureState:
    vec = np.zeros(1 << n, dtype=np.complex128)
    for mask, a in amps.items():
        vec[mask] = a
    return PureState(QubitSpace(n), vec)


def canonical_state(kind: str, n: int, i: int | None = None, j: int | None = None,
                    mask: int | None = None) -> PureState:
    """Named emitter-only states.

    ``kind`` is one of ``"W1"`` (uniform over single excitations), ``"W2"``
    (uniform over ``n-1`` excitations), ``"phi"`` (uniform over pairs),
    ``"singlet"`` (``(|1_i> - |1_j>)/sqrt(2)``) or ``"computational"``
    (the basis state ``mask``).
    """
    n = _check_n(n, hi=MAX_DENSE_EMITTERS)
    kind_l = kind.lower()
    if kind_l == "computational":
        if mask is None or not 0 <= mask < (1 << n):
            raise ParameterError(f"computational state needs mask in [0, 2**{n})")
        return _qubit_state(n, {int(mask): 1.0})
    if n < 2:
        raise ParameterError(f"{kind} requires n >= 2")
    if kind_l in ("w1", "w2", "phi"):
        k = {"w1": 1, "w2": n - 1, "phi": 2}[kind_l]
        masks = excitation_masks(n, k)
        amp = 1.0 / sqrt(len(masks))
        return _qubit_state(n, {int(m): amp for m in masks})
    if kind_l == "singlet":
        if i is None or j is None or i == j or not (0 <= i < n and 0 <= j < n):
            raise ParameterError(f"singlet needs distinct indices in [0, {n}), got {i}, {j}")
        a = 1.0 / sqrt(2.0)
        return _qubit_state(n, {1 << i: a, 1 << j: -a})
    raise ParameterError(f"unknown canonical state kind {kind!r}")


def vacuum(n: int) -> PureState:
    return canonical_state("computational", n, mask=0)


def maximally_mixed(n: int) -> DensityMatrix:
    d = 1 << n
    return DensityMatrix(QubitSpace(n), np.eye(d) / d)


def parse_ket(ket: str) -> int:
    """``"100"`` -> mask with emitter 0 excited."""
    if not ket or set(ket) - {"0", "1"}:
        raise ParameterError(f"invalid ket string {ket!r}")
    return sum(1 << m for m, c in enumerate(ket) if c == "1")


def fidelity_to(state: PureState | DensityMatrix, target: PureState) -> float:
    """``<t|rho|t>`` for mixed input, ``|<t|psi>|^2`` for pure input."""
    if state.basis.key != target.basis.key:
        raise ParameterError(
            f"basis mismatch: {state.basis.key} vs target {target.basis.key}"
        )
    t = target.amplitudes
    if isinstance(state, PureState):
        f = abs(np.vdot(t, state.amplitudes)) ** 2
    else:
        f = np.vdot(t, state.matrix @ t).real
    return float(min(max(f, 0.0), 1.0))


def state_from_json(doc: dict | str) -> PureState:
    if isinstance(doc, str):
        doc = json.loads(doc)
    b = doc["basis"]
    basis = QubitSpace(b["n"]) if b["q"] == "qubit-only" else enumerate_sector(b["n"], b["q"])
    amps = np.array([complex(re, im) for re, im in doc["amplitudes"]])
    norm_ok = abs(np.vdot(amps, amps).real - 1.0) <= NORM_TOL
    return PureState(basis, amps, normalized=norm_ok)
