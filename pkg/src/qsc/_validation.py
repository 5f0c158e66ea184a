"""Input checks for the estimator API (statevector feature matrices)."""
from __future__ import annotations

import numpy as np

from .linalg import MAX_QUBITS, NORM_TOL, num_qubits_for


def check_states(X, num_qubits: int | None = None) -> np.ndarray:
    """Validate a 2-D array of normalized statevectors, one per row."""
    X = np.asarray(X)
    if X.dtype == object:
        raise TypeError("states must be numeric; encode samples with PrepStateEncoder first")
    X = X.astype(complex, copy=False)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array of statevectors, got shape {X.shape}")
    if X.shape[0] == 0:
        raise ValueError("found array with 0 samples")
    n = num_qubits_for(X.shape[1])
    if n > MAX_QUBITS:
        raise ValueError(f"at most {MAX_QUBITS} qubits supported")
    if num_qubits is not None and n != num_qubits:
        raise ValueError(f"states have {n} qubits, expected {num_qubits}")
    if not np.all(np.isfinite(X)):
        raise ValueError("states contain NaN or infinity")
    norms = np.einsum("ij,ij->i", X.conj(), X).real
    bad = np.flatnonzero(np.abs(norms - 1.0) > NORM_TOL)
    if bad.size:
        raise ValueError(f"row {bad[0]} is not normalized (|psi|^2 = {norms[bad[0]]!r})")
    return X


def check_labels(y, n_samples: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != n_samples:
        raise ValueError(f"y must be 1-D with {n_samples} entries, got shape {y.shape}")
    return y
