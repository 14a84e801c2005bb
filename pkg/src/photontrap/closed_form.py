"""Analytic success probabilities, fidelities and conditional eigenvalues.

All functions accept numpy arrays for ``theta`` and ``N`` and broadcast.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


def _cos2n(freq, theta, N):
    return np.cos(freq * np.asarray(theta, dtype=float)) ** (2 * np.asarray(N))


def w1_frequency(n: int) -> float:
    return float(np.sqrt(4 * n - 2))


def p_and_f(n: int, theta, N):
    """Success probability after ``N`` monitored one-photon rounds from ``|10...0>``,
    and fidelity of the conditioned state with W1.

    Valid for ``n >= 2``; at ``n = 2`` the second term is ``cos(0) = 1``.
    """
    if n < 2:
        raise ParameterError("p_and_f needs n >= 2")
    bright = _cos2n(w1_frequency(n), theta, N)
    rest = (n - 1) * _cos2n(np.sqrt(n - 2), theta, N)
    P = (bright + rest) / n
    with np.errstate(invalid="ignore", divide="ignore"):
        F = bright / (bright + rest)
    return P, F


def p_and_f_two_qw(m: int, theta, N, as_printed: bool = False):
    """Two-emitter Bell protocol monitoring ``m`` photons, target the singlet.

    The fidelity defaults to ``1 / (1 + c**(2N))``; ``as_printed=True`` returns
    ``1 / (2 c**(2N))`` instead, which exceeds 1 and is kept only for comparison.
    """
    if m < 1:
        raise ParameterError("monitored photon number must be >= 1")
    c2n = _cos2n(np.sqrt(2 * (2 * m + 1)), theta, N)
    P = 0.5 * (1 + c2n)
    with np.errstate(divide="ignore"):
        F = 1 / (2 * c2n) if as_printed else 1 / (1 + c2n)
    return P, F


def superop_eigenvalue(kind: str, n: int, theta):
    """Named eigenvalue of a conditional operator.

    ``w1``: W1 under one-photon monitoring. ``bright_t``: the ``n-1`` states of
    the one-excitation sector orthogonal to W1, same monitoring.
    ``vacuum_2photon``: the emitter vacuum under two-photon monitoring.
    """
    theta = np.asarray(theta, dtype=float)
    if n < 2:
        raise ParameterError("n must be >= 2")
    c = np.cos(w1_frequency(n) * theta)
    if kind == "w1":
        return c
    if kind == "bright_t":
        if n < 3:
            raise ParameterError("bright_t needs n >= 3")
        return np.cos(np.sqrt(n - 2) * theta)
    if kind == "vacuum_2photon":
        return (n * (c + 1) - 1) / (2 * n - 1)
    raise ParameterError(f"unknown eigenvalue kind {kind!r}")


def chain_amplitudes(n: int, t, as_printed: bool = False):
    """Amplitudes on ``|W1,1>``, ``|0..0,2>``, ``|phi,0>`` after time ``t`` from ``|W1,1>``.

    The chain couplings are ``sqrt(2n)`` (up) and ``sqrt(2(n-1))`` (down), so the
    frequency is ``sqrt(4n-2)``. ``as_printed=True`` uses frequency ``sqrt(3n-2)``
    with weights ``n/(3n-2)`` and ``(2n-2)/(3n-2)`` for comparison.
    """
    if n < 2:
        raise ParameterError("chain needs n >= 2")
    t = np.asarray(t, dtype=float)
    if as_printed:
        omega = np.sqrt(3 * n - 2)
        up, down = np.sqrt(n / (3 * n - 2)), np.sqrt((2 * n - 2) / (3 * n - 2))
    else:
        omega = w1_frequency(n)
        up, down = np.sqrt(2 * n) / omega, np.sqrt(2 * (n - 1)) / omega
    s = -1j * np.sin(omega * t)
    return np.cos(omega * t) + 0j, s * up, s * down


def purification_yield(n: int, theta, N: int, per_step: bool = False) -> float:
    """Product of cumulative success probabilities ``P_0 * ... * P_N``.

    ``per_step=True`` multiplies the conditional round probabilities
    ``P_i / P_{i-1}`` instead, which telescopes to ``P_N``.
    """
    if N < 0:
        raise ParameterError("N must be >= 0")
    P, _ = p_and_f(n, theta, np.arange(N + 1))
    if per_step:
        return float(P[-1])
    return float(np.prod(P))


def node_times(n: int, k: int = 1) -> float:
    """``k pi / sqrt(4n-2)``: where the W1 eigenvalue has unit modulus."""
    if k < 1:
        raise ParameterError("node index must be >= 1")
    return k * np.pi / np.sqrt(4 * n - 2)
