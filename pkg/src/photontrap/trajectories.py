"""Monte Carlo trajectories of the measure-or-restart protocol.

Each trajectory repeats attempts of ``N`` rounds. A round samples the photon
count after evolution; the monitored count continues the attempt, any other
count restarts it from the initial state. A trajectory counts as a success
when its first attempt survives all ``N`` rounds, so the success rate
estimates the cumulative probability ``P_N``.

Random numbers come from a counter-based SplitMix64 stream keyed by
``(seed, trajectory index)``, so results do not depend on scheduling or on
how trajectories are split across threads.

Two interchangeable kernels are provided: a numba kernel looping over
trajectories in parallel, and a numpy kernel that advances all live
trajectories in lockstep.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from ._accel import HAVE_NUMBA, default_backend, njit, prange
from .conditional import outcome_operators
from .errors import ParameterError
from .protocol import _as_density
from .sector import excitation_masks, fidelity_to, vacuum

MAX_RESTARTS = 10_000

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = np.uint64(30), np.uint64(27), np.uint64(31), np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True)
def _stream_key(seed, index):
    return _mix(_mix(seed + _GOLDEN) ^ index)


@njit(cache=True)
def _uniform(key, counter):
    return np.float64(_mix(key + (counter + np.uint64(1)) * _GOLDEN) >> _S11) * _INV53


def stream_key(seed: int, index) -> np.ndarray:
    """Per-trajectory key; accepts an index array (numpy path)."""
    with np.errstate(over="ignore"):
        return _mix_array(_mix_array(np.uint64(seed) + _GOLDEN) ^ np.asarray(index, dtype=np.uint64))


def uniforms(keys: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Uniform doubles in ``[0, 1)`` for ``(key, counter)`` pairs."""
    with np.errstate(over="ignore"):
        z = _mix_array(keys + (counters + np.uint64(1)) * _GOLDEN)
    return (z >> _S11).astype(np.float64) * _INV53


def _mix_array(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _M1
        z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@dataclass(frozen=True)
class TrajectoryStats:
    samples: int
    successes: int
    rate: float
    stderr: float
    seed: int
    injections: dict
    restarts: dict
    outcome_labels: list
    # outcome_histogram[i, j]: round i ended with photon count outcome_labels[j]
    outcome_histogram: np.ndarray = field(repr=False)
    abandoned: int = 0
    max_branch_defect: float = 0.0
    backend: str = "numpy"
    config: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "samples": self.samples,
            "successes": self.successes,
            "rate": _sig(self.rate),
            "stderr": _sig(self.stderr),
            "seed": self.seed,
            "abandoned": self.abandoned,
            "injections": {str(k): v for k, v in sorted(self.injections.items())},
            "restarts": {str(k): v for k, v in sorted(self.restarts.items())},
            "outcome_labels": list(self.outcome_labels),
            "outcome_histogram": self.outcome_histogram.tolist(),
            "max_branch_defect": float(f"{self.max_branch_defect:.3e}"),
            "config": self.config,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step"] + [f"p{p}" for p in self.outcome_labels])
        for i, row in enumerate(self.outcome_histogram, start=1):
            w.writerow([i] + [int(c) for c in row])
        return buf.getvalue()


def _sig(x: float) -> float:
    return float(f"{x:.12g}")


@dataclass(frozen=True)
class _Problem:
    """Operators restricted to the excitation subspaces the initial state touches."""

    components: np.ndarray  # (c, d) pure components of the initial state
    weights_cum: np.ndarray  # (c,)
    k_monitor: np.ndarray  # (d, d)
    grams: np.ndarray  # (o, d, d): K_o^+ K_o
    labels: list
    monitor_index: int


def prepare(initial, n: int, theta: float, monitor_p: int) -> _Problem:
    rho = _as_density(initial, n).matrix
    diag = np.abs(np.diag(rho))
    ks = sorted({int(m).bit_count() for m in np.flatnonzero(diag > 0)})
    support = np.concatenate([excitation_masks(n, k) for k in ks])
    sub = rho[np.ix_(support, support)]
    w, v = np.linalg.eigh(sub)
    keep = w > 1e-14
    w, v = w[keep], v[:, keep]
    comps = np.ascontiguousarray(v.T)
    wcum = np.cumsum(w / w.sum())

    ops = outcome_operators(n, monitor_p, theta)
    grams, labels = [], []
    k_mon = None
    for p_out, K in ops.items():
        full = np.zeros((len(support), len(support)), dtype=np.complex128)
        offsets = np.cumsum([0] + [len(excitation_masks(n, k)) for k in ks])
        for a, k in enumerate(ks):
            if k not in K.blocks:
                continue
            blk = K.blocks[k]
            sl = slice(offsets[a], offsets[a + 1])
            full[sl, sl] = blk.conj().T @ blk
            if p_out == monitor_p:
                if k_mon is None:
                    k_mon = np.zeros_like(full)
                k_mon[sl, sl] = blk
        if np.any(np.abs(full) > 0):
            grams.append(full)
            labels.append(p_out)
    if monitor_p not in labels:
        raise ParameterError(f"photon count {monitor_p} is unreachable from this initial state")
    return _Problem(comps, wcum, np.ascontiguousarray(k_mon), np.ascontiguousarray(grams),
                    labels, labels.index(monitor_p))


@njit(cache=True)
def _pick(u, cum):
    for i in range(cum.shape[0]):
        if u < cum[i]:
            return i
    return cum.shape[0] - 1


@njit(cache=True)
def _last_positive(probs):
    for i in range(probs.shape[0] - 1, -1, -1):
        if probs[i] > 0.0:
            return i
    return probs.shape[0] - 1


@njit(parallel=True, cache=True)
def _kernel_numba(comps, wcum, k_mon, grams, mon_idx, N, monitor_p, samples, seed, max_restarts):
    n_out = grams.shape[0]
    d = comps.shape[1]
    success = np.zeros(samples, np.bool_)
    abandoned = np.zeros(samples, np.bool_)
    restarts = np.zeros(samples, np.int64)
    injections = np.zeros(samples, np.int64)
    hist = np.zeros((samples, max(N, 1), n_out), np.int32)
    defect = np.zeros(samples)
    seed64 = np.uint64(seed)
    multi = wcum.shape[0] > 1
    for t in prange(samples):
        key = _stream_key(seed64, np.uint64(t))
        counter = np.uint64(0)
        psi = np.empty(d, np.complex128)
        tmp = np.empty(d, np.complex128)
        probs = np.empty(n_out)
        cum = np.empty(n_out)
        comp = 0
        if multi:
            comp = _pick(_uniform(key, counter), wcum)
            counter += np.uint64(1)
        psi[:] = comps[comp]
        step = 0
        while step < N:
            injections[t] += monitor_p
            u = _uniform(key, counter)
            counter += np.uint64(1)
            acc = 0.0
            for o in range(n_out):
                g = grams[o]
                s = 0.0
                for i in range(d):
                    z = 0j
                    for j in range(d):
                        z += g[i, j] * psi[j]
                    s += (psi[i].conjugate() * z).real
                probs[o] = s
                acc += s
                cum[o] = acc
            dev = abs(acc - 1.0)
            if dev > defect[t]:
                defect[t] = dev
            o = _pick(u, cum)
            if u >= cum[n_out - 1]:
                o = _last_positive(probs)
            hist[t, step, o] += 1
            if o == mon_idx:
                norm = np.sqrt(probs[o])
                for i in range(d):
                    z = 0j
                    for j in range(d):
                        z += k_mon[i, j] * psi[j]
                    tmp[i] = z / norm
                psi[:] = tmp
                step += 1
            else:
                restarts[t] += 1
                if restarts[t] > max_restarts:
                    abandoned[t] = True
                    break
                if multi:
                    comp = _pick(_uniform(key, counter), wcum)
                    counter += np.uint64(1)
                psi[:] = comps[comp]
                step = 0
        success[t] = (not abandoned[t]) and restarts[t] == 0
    return success, abandoned, restarts, injections, hist, defect


def _kernel_numpy(comps, wcum, k_mon, grams, mon_idx, N, monitor_p, samples, seed, max_restarts):
    n_out = grams.shape[0]
    keys = stream_key(seed, np.arange(samples))
    counters = np.zeros(samples, dtype=np.uint64)
    restarts = np.zeros(samples, np.int64)
    injections = np.zeros(samples, np.int64)
    abandoned = np.zeros(samples, bool)
    hist = np.zeros((samples, max(N, 1), n_out), np.int32)
    defect = np.zeros(samples)
    multi = len(wcum) > 1

    def draw_components(idx):
        if not multi:
            return np.zeros(len(idx), dtype=np.int64)
        u = uniforms(keys[idx], counters[idx])
        counters[idx] += np.uint64(1)
        comp = np.argmax(u[:, None] < wcum[None, :], axis=1)
        comp[u >= wcum[-1]] = len(wcum) - 1
        return comp

    all_idx = np.arange(samples)
    psi = comps[draw_components(all_idx)].copy()
    step = np.zeros(samples, np.int64)
    active = np.ones(samples, bool) if N > 0 else np.zeros(samples, bool)
    while active.any():
        idx = np.flatnonzero(active)
        injections[idx] += monitor_p
        u = uniforms(keys[idx], counters[idx])
        counters[idx] += np.uint64(1)
        p = psi[idx]
        probs = np.einsum("sd,ode,se->so", p.conj(), grams, p).real
        cum = np.cumsum(probs, axis=1)
        defect[idx] = np.maximum(defect[idx], np.abs(cum[:, -1] - 1.0))
        hit = u[:, None] < cum
        o = np.where(hit.any(axis=1), np.argmax(hit, axis=1), -1)
        overflow = o < 0
        if overflow.any():
            pos = probs[overflow] > 0
            last = n_out - 1 - np.argmax(pos[:, ::-1], axis=1)
            last[~pos.any(axis=1)] = n_out - 1
            o[overflow] = last
        hist[idx, step[idx], o] += 1

        ok = o == mon_idx
        good = idx[ok]
        if good.size:
            nxt = p[ok] @ k_mon.T
            psi[good] = nxt / np.sqrt(probs[ok, mon_idx])[:, None]
            step[good] += 1
            active[good[step[good] >= N]] = False

        bad = idx[~ok]
        if bad.size:
            restarts[bad] += 1
            over = restarts[bad] > max_restarts
            abandoned[bad[over]] = True
            active[bad[over]] = False
            bad = bad[~over]
            psi[bad] = comps[draw_components(bad)]
            step[bad] = 0
    success = ~abandoned & (restarts == 0)
    return success, abandoned, restarts, injections, hist, defect


def _histogram(values: np.ndarray) -> dict:
    vals, counts = np.unique(values, return_counts=True)
    return {int(v): int(c) for v, c in zip(vals, counts)}


def run_trajectories(initial, n: int, theta: float, N: int, monitor_p: int, samples: int,
                     seed: int, max_restarts: int = MAX_RESTARTS,
                     backend: str | None = None) -> TrajectoryStats:
    """Sample ``samples`` measure-or-restart trajectories.

    ``backend`` is ``"numba"`` or ``"numpy"``; by default numba when available.
    """
    if samples < 1:
        raise ParameterError("samples must be >= 1")
    if N < 0:
        raise ParameterError("N must be >= 0")
    if not 0 <= seed < 2**64:
        raise ParameterError("seed must fit in 64 unsigned bits")
    backend = backend or default_backend()
    if backend == "numba" and not HAVE_NUMBA:
        raise ParameterError("numba backend requested but numba is unavailable or disabled")
    if backend not in ("numba", "numpy"):
        raise ParameterError(f"unknown backend {backend!r}")
    if fidelity_to(_as_density(initial, n), vacuum(n)) >= 1 - 1e-12:
        raise ParameterError("initial state is the emitter vacuum")

    prob = prepare(initial, n, theta, monitor_p)
    kernel = _kernel_numba if backend == "numba" else _kernel_numpy
    success, abandoned, restarts, injections, hist, defect = kernel(
        prob.components, prob.weights_cum, prob.k_monitor, prob.grams, prob.monitor_index,
        int(N), int(monitor_p), int(samples), int(seed), int(max_restarts),
    )
    successes = int(success.sum())
    rate = successes / samples
    return TrajectoryStats(
        samples=int(samples),
        successes=successes,
        rate=rate,
        stderr=float(np.sqrt(rate * (1 - rate) / samples)),
        seed=int(seed),
        injections=_histogram(injections),
        restarts=_histogram(restarts),
        outcome_labels=list(prob.labels),
        outcome_histogram=hist.sum(axis=0)[:N],
        abandoned=int(abandoned.sum()),
        max_branch_defect=float(defect.max()),
        backend=backend,
        config={"n": n, "theta": float(theta), "N": N, "monitor": monitor_p,
                "max_restarts": max_restarts},
    )
