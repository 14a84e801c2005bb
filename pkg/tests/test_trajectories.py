import json
import os
import subprocess
import sys

import numpy as np
import pytest

from photontrap import ParameterError, canonical_state, maximally_mixed, run_conditional, run_trajectories
from photontrap._accel import HAVE_NUMBA
from photontrap.sector import vacuum
from photontrap.trajectories import stream_key, uniforms

TAU3 = np.pi / np.sqrt(10)
BACKENDS = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable")


def start(n):
    return canonical_state("computational", n, mask=1)


def within(stats, expected, sigmas=4):
    se = np.sqrt(expected * (1 - expected) / stats.samples)
    return abs(stats.rate - expected) <= sigmas * se


@pytest.mark.parametrize("backend", BACKENDS)
def test_three_emitter_rate(backend):
    s = run_trajectories(start(3), 3, TAU3, 5, 1, 20_000, seed=7, backend=backend)
    assert within(s, 0.334897213944838)


def test_two_emitter_rate():
    s = run_trajectories(start(2), 2, np.pi / (4 * np.sqrt(6)), 3, 1, 20_000, seed=3)
    assert within(s, 0.5 * (1 + 2.0 ** -3))


@pytest.mark.parametrize("backend", BACKENDS)
def test_zero_angle_always_succeeds(backend):
    s = run_trajectories(start(3), 3, 0.0, 4, 1, 1000, seed=1, backend=backend)
    assert s.rate == 1.0 and s.stderr == 0.0
    assert s.restarts == {0: 1000}
    assert s.injections == {4: 1000}


@pytest.mark.parametrize("backend", BACKENDS)
def test_same_seed_same_output(backend):
    a = run_trajectories(start(3), 3, TAU3, 5, 1, 5000, seed=11, backend=backend)
    b = run_trajectories(start(3), 3, TAU3, 5, 1, 5000, seed=11, backend=backend)
    assert a.dumps() == b.dumps()
    c = run_trajectories(start(3), 3, TAU3, 5, 1, 5000, seed=12, backend=backend)
    assert c.dumps() != a.dumps()


@needs_numba
@pytest.mark.parametrize("initial", ["pure", "mixed"])
def test_backends_agree_exactly(initial):
    rho = start(3) if initial == "pure" else maximally_mixed(3)
    a = run_trajectories(rho, 3, 0.9, 4, 1, 3000, seed=5, backend="numba")
    b = run_trajectories(rho, 3, 0.9, 4, 1, 3000, seed=5, backend="numpy")
    ja, jb = a.to_json(), b.to_json()
    ja.pop("max_branch_defect"), jb.pop("max_branch_defect")
    assert ja == jb


def test_env_flag_forces_numpy():
    code = "from photontrap._accel import default_backend, HAVE_NUMBA; print(default_backend(), HAVE_NUMBA)"
    env = dict(os.environ, PHOTONTRAP_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "False"]


def test_branch_probabilities_complete():
    s = run_trajectories(maximally_mixed(3), 3, 0.7, 6, 1, 2000, seed=2)
    assert s.max_branch_defect <= 1e-10


def test_uniforms_range_and_determinism():
    keys = stream_key(99, np.arange(1000, dtype=np.uint64))
    u = uniforms(keys, np.full(1000, 3, dtype=np.uint64))
    assert np.all((u >= 0) & (u < 1))
    np.testing.assert_array_equal(u, uniforms(keys, np.full(1000, 3, dtype=np.uint64)))
    assert abs(u.mean() - 0.5) < 0.05


@pytest.mark.parametrize("n,theta,N,monitor,initial", [
    (2, 0.4, 3, 1, "one"),
    (3, TAU3, 2, 1, "mixed"),
    (3, 1.1, 4, 0, "one"),
    (3, 2 * TAU3, 3, 2, "mixed"),
    (4, 0.8, 2, 1, "w2"),
])
def test_rate_matches_exact_probability(n, theta, N, monitor, initial):
    rho = {"one": start(n), "mixed": maximally_mixed(n), "w2": canonical_state("W2", n)}[initial]
    exact = run_conditional(rho, n, theta, N, monitor, canonical_state("W1", n), keep_states=False).final.P
    s = run_trajectories(rho, n, theta, N, monitor, 20_000, seed=2024)
    assert within(s, exact)


def test_outcome_histogram_counts_every_round():
    s = run_trajectories(start(3), 3, TAU3, 5, 1, 4000, seed=9)
    assert s.outcome_histogram.shape == (5, len(s.outcome_labels))
    # every attempt passes round 1
    total_attempts = sum((r + 1) * c for r, c in s.restarts.items())
    assert s.outcome_histogram[0].sum() == total_attempts
    # injections count monitor_p photons per round actually run
    assert sum(k * v for k, v in s.injections.items()) == s.outcome_histogram.sum()


def test_restart_cap_abandons():
    # p_round = 1e-6: the first attempt almost never survives two rounds
    e = canonical_state("computational", 1, mask=1)
    s = run_trajectories(e, 1, np.arccos(1e-3) / np.sqrt(2), 2, 1, 50, seed=0, max_restarts=3)
    assert s.abandoned == 50
    assert s.successes == 0


def test_json_and_csv():
    s = run_trajectories(start(3), 3, TAU3, 3, 1, 500, seed=42)
    doc = json.loads(s.dumps())
    assert {"samples", "successes", "rate", "stderr", "seed"} <= set(doc)
    assert doc["samples"] == 500 and doc["seed"] == 42
    lines = s.to_csv().splitlines()
    assert lines[0] == "step," + ",".join(f"p{p}" for p in s.outcome_labels)
    assert len(lines) == 4


@pytest.mark.parametrize("kwargs", [
    dict(samples=0), dict(N=-1), dict(seed=-1), dict(backend="gpu"),
])
def test_bad_arguments(kwargs):
    args = dict(initial=start(3), n=3, theta=0.3, N=2, monitor_p=1, samples=10, seed=0)
    args.update(kwargs)
    with pytest.raises(ParameterError):
        run_trajectories(**args)


def test_vacuum_rejected():
    with pytest.raises(ParameterError):
        run_trajectories(vacuum(3), 3, 0.3, 2, 1, 10, seed=0)
