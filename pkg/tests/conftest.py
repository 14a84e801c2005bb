import numpy as np
import pytest
import scipy.linalg


def full_space_hamiltonian(n, cutoff, g=1.0):
    """Dense H on (emitters) x (photons 0..cutoff-1), index = mask * cutoff + p.

    Built from explicit lowering operators, independent of the sector code.
    """
    d = 1 << n
    a = np.diag(np.sqrt(np.arange(1, cutoff)), 1)
    H = np.zeros((d * cutoff, d * cutoff))
    for m in range(n):
        lower = np.zeros((d, d))
        for mask in range(d):
            if mask >> m & 1:
                lower[mask ^ (1 << m), mask] = 1.0
        H += g * (np.kron(lower.T, a) + np.kron(lower, a.T))
    return H


def oracle_conditional(n, p_in, p_out, theta):
    """``<p_out| expm(-i H theta) |p_in>`` as a 2**n matrix via scipy.linalg.expm."""
    cutoff = n + p_in + 2
    U = scipy.linalg.expm(-1j * theta * full_space_hamiltonian(n, cutoff))
    d = 1 << n
    rows = np.arange(d) * cutoff + p_out
    cols = np.arange(d) * cutoff + p_in
    return U[np.ix_(rows, cols)]


def oracle_protocol(n, theta, N, rho0, target, monitor=1):
    """Brute-force P_i and F_i by repeated dense sandwiching."""
    K = oracle_conditional(n, monitor, monitor, theta)
    P, F = [], []
    sigma = rho0.astype(complex)
    for _ in range(N + 1):
        p = np.trace(sigma).real
        P.append(p)
        F.append((target.conj() @ sigma @ target).real / p)
        sigma = K @ sigma @ K.conj().T
    return np.array(P), np.array(F)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
