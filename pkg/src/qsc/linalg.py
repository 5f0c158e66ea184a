"""Dense statevector primitives.

Basis convention used throughout the package: for an n-qubit state the
basis index is ``b = sum_i q_i * 2**i``, i.e. qubit 0 is the least
significant bit.  A k-qubit gate applied on ``targets`` maps ``targets[0]``
onto the gate's least significant qubit.
"""
from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np

MAX_QUBITS = 8
NORM_TOL = 1e-10
HERMITIAN_TOL = 1e-10
NEGATIVE_EIG_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def num_qubits_for(dim: int) -> int:
    """Return n such that ``dim == 2**n``; raise ValueError otherwise."""
    n = int(dim).bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two >= 2")
    return n


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


def basis_state(index: int, n: int) -> np.ndarray:
    """Computational basis state ``|index>`` on n qubits."""
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"num_qubits must be in [1, {MAX_QUBITS}], got {n}")
    if not 0 <= index < 2**n:
        raise ValueError(f"basis index {index} out of range for {n} qubits")
    psi = np.zeros(2**n, dtype=complex)
    psi[index] = 1.0
    return psi


def zero_state(n: int) -> np.ndarray:
    return basis_state(0, n)


def check_state(state, tol: float = NORM_TOL) -> np.ndarray:
    """Validate a normalized statevector and return it as a complex array."""
    psi = np.asarray(state, dtype=complex)
    if psi.ndim != 1:
        raise ValueError(f"statevector must be 1-D, got shape {psi.shape}")
    n = num_qubits_for(psi.size)
    if n > MAX_QUBITS:
        raise ValueError(f"at most {MAX_QUBITS} qubits supported, got {n}")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise ValueError(f"statevector not normalized: |psi|^2 = {norm2!r}")
    return psi


def _check_targets(targets: Sequence[int], n: int) -> tuple[int, ...]:
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate target qubits {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise ValueError(f"target qubit {t} out of range for {n} qubits")
    return targets


def apply_gate(state: np.ndarray, gate: np.ndarray, targets: Sequence[int]) -> np.ndarray:
    """Return ``gate`` (on ``targets``, identity elsewhere) applied to ``state``.

    ``state`` may carry leading batch axes: shape ``(..., 2**n)``.  The last
    axis is the amplitude axis.
    """
    psi = np.asarray(state, dtype=complex)
    gate = np.asarray(gate, dtype=complex)
    n = num_qubits_for(psi.shape[-1])
    k = len(targets)
    if k not in (1, 2, 3):
        raise ValueError(f"gates act on 1 to 3 qubits, got {k} targets")
    if gate.shape != (2**k, 2**k):
        raise ValueError(f"gate shape {gate.shape} does not match {k} target(s)")
    targets = _check_targets(targets, n)

    batch = psi.shape[:-1]
    nb = len(batch)
    tensor = psi.reshape(batch + (2,) * n)
    # qubit q lives on tensor axis nb + n - 1 - q; gate axes run MSB first
    axes = [nb + n - 1 - t for t in reversed(targets)]
    g = gate.reshape((2,) * (2 * k))
    out = np.tensordot(tensor, g, axes=(axes, list(range(k, 2 * k))))
    out = np.moveaxis(out, list(range(out.ndim - k, out.ndim)), axes)
    return out.reshape(psi.shape)


def is_hermitian(matrix: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(matrix)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.allclose(m, m.conj().T, rtol=0, atol=tol)


def expectation(state: np.ndarray, observable: np.ndarray) -> float:
    """``<psi|O|psi>`` for a Hermitian observable."""
    psi = check_state(state)
    obs = np.asarray(observable, dtype=complex)
    if obs.shape != (psi.size, psi.size):
        raise ValueError(f"observable shape {obs.shape} does not match state dimension {psi.size}")
    if not is_hermitian(obs):
        raise ValueError("observable is not Hermitian")
    return float(np.vdot(psi, obs @ psi).real)


def partial_trace(state: np.ndarray, keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix of the qubits in ``keep``.

    The returned matrix follows the package convention restricted to the kept
    qubits: the smallest kept qubit index is the least significant bit.
    """
    psi = check_state(state)
    n = num_qubits_for(psi.size)
    keep = sorted(set(int(q) for q in keep))
    if not keep or len(keep) == n:
        raise ValueError("keep must be a non-empty proper subset of the qubits")
    _check_targets(keep, n)
    tensor = psi.reshape((2,) * n)
    kept_axes = [n - 1 - q for q in reversed(keep)]
    traced_axes = [a for a in range(n) if a not in kept_axes]
    m = np.transpose(tensor, kept_axes + traced_axes).reshape(2 ** len(keep), -1)
    rho = m @ m.conj().T
    return 0.5 * (rho + rho.conj().T)


def _eigvalsh_2x2(rho: np.ndarray) -> np.ndarray:
    a = rho[0, 0].real
    d = rho[1, 1].real
    b = abs(rho[0, 1])
    mean = 0.5 * (a + d)
    gap = np.hypot(0.5 * (a - d), b)
    return np.array([mean - gap, mean + gap])


def density_eigenvalues(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if not is_hermitian(rho):
        raise ValueError("density matrix is not Hermitian")
    if rho.shape == (2, 2):
        return _eigvalsh_2x2(rho)
    return np.linalg.eigvalsh(rho)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy ``-sum(l * log2(l))`` in bits, with ``0 log 0 = 0``."""
    evals = density_eigenvalues(rho)
    if evals.min() < -NEGATIVE_EIG_TOL:
        raise ValueError(f"density matrix has negative eigenvalue {evals.min()!r}")
    evals = np.clip(evals, 0.0, 1.0)
    nz = evals[evals > 0.0]
    s = float(-np.sum(nz * np.log2(nz)))
    return s if s > 0.0 else 0.0  # also maps -0.0 to 0.0


def kron(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor is the most significant."""
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out
