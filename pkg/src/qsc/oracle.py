"""Ground-truth entanglement classes from single-qubit reduced entropies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import check_state, num_qubits_for, partial_trace, von_neumann_entropy

DEFAULT_EPS = 1e-6


class GrayZoneError(ValueError):
    """Entropy pattern impossible for an exact pure state; resample."""


@dataclass(frozen=True)
class EntropySignature:
    entropies: tuple[float, ...]
    eps: float = DEFAULT_EPS

    def entangled(self) -> tuple[bool, ...]:
        return tuple(s > self.eps for s in self.entropies)


def cut_entropies(state: np.ndarray) -> np.ndarray:
    """Entropy in bits of every single-qubit marginal, indexed by qubit."""
    psi = check_state(state)
    n = num_qubits_for(psi.size)
    return np.array([von_neumann_entropy(partial_trace(psi, [q])) for q in range(n)])


def classify(state: np.ndarray, eps: float = DEFAULT_EPS) -> tuple[int, EntropySignature]:
    """Class code of a 2- or 3-qubit pure state.

    Two qubits: 0 = SEP, 1 = ENT.  Three qubits (A = qubit 0, B = 1, C = 2):
    0 = A-B-C, 1 = AB-C, 2 = AC-B, 3 = BC-A, 4 = ABC.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    s = cut_entropies(state)
    sig = EntropySignature(tuple(float(v) for v in s), eps)
    ent = sig.entangled()
    if len(ent) == 2:
        return int(ent[0]), sig
    if len(ent) != 3:
        raise ValueError(f"classification defined for 2 or 3 qubits, got {len(ent)}")
    count = sum(ent)
    if count == 0:
        return 0, sig
    if count == 3:
        return 4, sig
    if count == 2:
        # the unentangled qubit names the class: C -> AB-C, B -> AC-B, A -> BC-A
        free = ent.index(False)
        return {2: 1, 1: 2, 0: 3}[free], sig
    raise GrayZoneError(f"single entangled marginal in signature {sig.entropies}")
