"""Shared oracles written independently of the simulator under test."""
from __future__ import annotations

import itertools

import numpy as np
import pytest


def embed_gate(gate: np.ndarray, targets, n: int) -> np.ndarray:
    """Full 2^n matrix of ``gate`` on ``targets`` by explicit index mapping.

    Qubit ``q`` is bit ``q`` of the basis index; ``targets[0]`` is the
    least significant bit of the gate's own index.
    """
    dim = 2**n
    k = len(targets)
    full = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        sub_in = sum(((col >> t) & 1) << pos for pos, t in enumerate(targets))
        rest = col
        for t in targets:
            rest &= ~(1 << t)
        for sub_out in range(2**k):
            row = rest
            for pos, t in enumerate(targets):
                row |= ((sub_out >> pos) & 1) << t
            full[row, col] += gate[sub_out, sub_in]
    return full


def reduced_by_sum(state: np.ndarray, keep, n: int) -> np.ndarray:
    """Reduced density matrix via an explicit sum over traced-out bits."""
    keep = sorted(keep)
    traced = [q for q in range(n) if q not in keep]
    d = 2 ** len(keep)
    rho = np.zeros((d, d), dtype=complex)
    for a, b in itertools.product(range(d), repeat=2):
        total = 0.0
        for r in range(2 ** len(traced)):
            ia = ib = 0
            for pos, q in enumerate(keep):
                ia |= ((a >> pos) & 1) << q
                ib |= ((b >> pos) & 1) << q
            for pos, q in enumerate(traced):
                bit = ((r >> pos) & 1) << q
                ia |= bit
                ib |= bit
            total += state[ia] * np.conj(state[ib])
        rho[a, b] = total
    return rho


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[num])
