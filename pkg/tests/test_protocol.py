import json

import numpy as np
import pytest
from conftest import oracle_protocol
from hypothesis import given, settings
from hypothesis import strategies as st

from photontrap import (
    DensityMatrix,
    ParameterError,
    QubitSpace,
    canonical_state,
    initialize_two_photon,
    maximally_mixed,
    rabi_amplitudes,
    run_conditional,
    two_quanta_frequency_check,
)
from photontrap.sector import vacuum

TAU3 = np.pi / np.sqrt(10)


def start(n):
    return canonical_state("computational", n, mask=1)


def test_bell_limit():
    singlet = canonical_state("singlet", 2, i=0, j=1)
    tr = run_conditional(start(2), 2, np.pi / (4 * np.sqrt(6)), 20, 1, singlet)
    N = tr.N
    np.testing.assert_allclose(tr.P, 0.5 * (1 + 2.0 ** -N), atol=1e-12)
    np.testing.assert_allclose(tr.F, 1 / (1 + 2.0 ** -N), atol=1e-12)


def test_three_emitter_first_round():
    tr = run_conditional(start(3), 3, TAU3, 1, 1, canonical_state("W1", 3))
    assert tr.final.P == pytest.approx(0.531928, abs=1e-6)
    assert tr.final.F == pytest.approx(0.626651, abs=1e-6)
    assert tr.steps[0].F == pytest.approx(1 / 3, abs=1e-15)


def test_zero_angle_is_identity():
    tr = run_conditional(start(3), 3, 0.0, 5, 1, canonical_state("W1", 3))
    np.testing.assert_allclose(tr.P, 1, atol=1e-12)
    np.testing.assert_allclose(tr.F, 1 / 3, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 5), theta=st.floats(0.01, 3.1), N=st.integers(0, 8))
def test_trace_invariants(n, theta, N):
    tr = run_conditional(maximally_mixed(n), n, theta, N, 1, canonical_state("W1", n))
    assert np.all(np.diff(tr.P) <= 1e-12)
    assert np.all((tr.F >= 0) & (tr.F <= 1))
    np.testing.assert_allclose(tr.Y, np.cumprod(tr.P), rtol=1e-12)
    for s in tr.steps[1:]:
        assert s.state.trace == pytest.approx(1, abs=1e-10)


def test_per_step_yield():
    tr = run_conditional(start(3), 3, TAU3, 6, 1, canonical_state("W1", 3), per_step_yield=True)
    np.testing.assert_array_equal(tr.Y, tr.P)
    assert tr.config["yield"] == "per_step"


@pytest.mark.parametrize("n", [2, 3, 4])
def test_matches_dense_oracle(n, rng):
    m = rng.normal(size=(1 << n, 1 << n)) + 1j * rng.normal(size=(1 << n, 1 << n))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    target = canonical_state("W2", n)
    for monitor in (0, 1, 2):
        theta = rng.uniform(0.1, 3)
        tr = run_conditional(DensityMatrix(QubitSpace(n), rho), n, theta, 6, monitor, target)
        P_o, F_o = oracle_protocol(n, theta, 6, rho, target.amplitudes, monitor=monitor)
        np.testing.assert_allclose(tr.P, P_o, atol=1e-10)
        np.testing.assert_allclose(tr.F, F_o, atol=1e-10)


def test_vacuum_rejected():
    with pytest.raises(ParameterError):
        run_conditional(vacuum(3), 3, 0.3, 2, 1, canonical_state("W1", 3))


def test_bad_arguments():
    w1 = canonical_state("W1", 3)
    with pytest.raises(ParameterError):
        run_conditional(start(3), 3, 0.3, -1, 1, w1)
    with pytest.raises(ParameterError):
        run_conditional(start(3), 3, 0.3, 1, -1, w1)
    with pytest.raises(ParameterError):
        run_conditional(start(3), 3, 0.3, 1, 1, canonical_state("W1", 4))
    with pytest.raises(ParameterError):
        run_conditional("100", 3, 0.3, 1, 1, w1)


def test_extinction_stops_early():
    # one emitter, 1x1 block: every round succeeds with probability 1e-6
    e = canonical_state("computational", 1, mask=1)
    tr = run_conditional(e, 1, np.arccos(1e-3) / np.sqrt(2), 80, 1, e)
    assert tr.extinct_at == 50
    assert len(tr.steps) == 50
    assert tr.final.P == pytest.approx(1e-294, rel=1e-9)


def test_serialization():
    tr = run_conditional(start(3), 3, TAU3, 2, 1, canonical_state("W1", 3))
    lines = tr.to_csv().splitlines()
    assert lines[0] == "N,P,F,Y"
    assert lines[1] == f"0,1.000000000000,{1 / 3:.12f},1.000000000000"
    assert lines[2].startswith("1,0.531928")
    doc = json.loads(tr.dumps())
    assert [s["N"] for s in doc["steps"]] == [0, 1, 2]
    assert doc["config"]["n"] == 3


def test_initialization_vacuum_eigenvalue():
    # the vacuum itself is rejected, so mix in a little of it and read off P_1
    rho = 0.5 * vacuum(3).density().matrix + 0.5 * canonical_state("W1", 3).density().matrix
    tr = initialize_two_photon(3, TAU3, 1, initial=DensityMatrix(QubitSpace(3), rho))
    # excitation sectors do not mix, so P_1 is linear in the two components
    w1_round = initialize_two_photon(3, TAU3, 1, initial=canonical_state("W1", 3)).final.P
    assert tr.final.P == pytest.approx(0.5 * 0.04 + 0.5 * w1_round, abs=1e-12)


def test_initialization_enriches_vacuum():
    tr = initialize_two_photon(3, 2 * np.pi / np.sqrt(10), 200, keep_states=False)
    assert tr.steps[0].F == pytest.approx(1 / 8)
    assert np.all(np.diff(tr.F) >= -1e-12)
    assert tr.final.F > 0.999
    assert tr.config["initial"] == "maximally_mixed"


def test_initialization_two_emitter_node():
    rho = maximally_mixed(2).matrix
    tr = initialize_two_photon(2, 2 * np.pi / np.sqrt(6), 30, initial=DensityMatrix(QubitSpace(2), rho))
    # the vacuum weight 1/4 survives every round intact
    np.testing.assert_allclose(tr.P * tr.F, 0.25, atol=1e-12)


@pytest.mark.parametrize("n", range(2, 9))
def test_rabi_one_quantum(n, rng):
    for t in rng.uniform(0, 4, 5):
        amps = rabi_amplitudes(n, 1, t)
        assert amps[("W1", 0)] == pytest.approx(np.cos(np.sqrt(n) * t), abs=1e-10)
        assert amps[("vacuum", 1)] == pytest.approx(-1j * np.sin(np.sqrt(n) * t), abs=1e-10)


@pytest.mark.parametrize("n", range(2, 9))
def test_rabi_two_quanta_normalized(n, rng):
    for t in rng.uniform(0, 4, 5):
        assert sum(abs(a) ** 2 for a in rabi_amplitudes(n, 2, t).values()) == pytest.approx(1, abs=1e-10)


def test_rabi_full_transfer():
    amps = rabi_amplitudes(4, 1, np.pi / 4)
    assert abs(amps[("vacuum", 1)]) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("n", range(2, 9))
def test_two_quanta_frequency(n):
    res = two_quanta_frequency_check(n, 0.5)
    assert res["matches"] == ["sqrt(4n-2)"]
    assert res["deviation"]["sqrt(3n-2)"] > 1e-3


def test_rabi_errors():
    with pytest.raises(ParameterError):
        rabi_amplitudes(3, 3, 0.1)
    with pytest.raises(ParameterError):
        rabi_amplitudes(1, 1, 0.1)
