"""Parameterized circuits, ansatz builders and state-preparation templates."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .channels import channel_unitary
from .labels import ClassTopology

CX_MATRIX = np.eye(4, dtype=complex)[[0, 3, 2, 1]]
CCX_MATRIX = np.eye(8, dtype=complex)[[0, 1, 2, 7, 4, 5, 6, 3]]

CHANNEL_ARITY = {"AD": 2, "RTN": 3}
_ARITY = {"RY": 1, "RZ": 1, "H": 1, "CX": 2, "CCX": 3, "UNITARY2": 2, "UNITARY2_PARAM": 2}


class AnsatzFamily(str, Enum):
    REAL_AMPLITUDES = "real_amplitudes"
    EFFICIENT_SU2 = "efficient_su2"
    PROPOSED_TOFFOLI = "proposed"


@dataclass(frozen=True)
class GateOp:
    kind: str
    targets: tuple[int, ...]
    slots: tuple[int, ...] = ()
    matrix: Optional[np.ndarray] = field(default=None, compare=False)
    family: Optional[str] = None
    which: Optional[str] = None

    def __post_init__(self):
        if self.kind not in _ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {_ARITY[self.kind]} target(s), got {self.targets}")
        if self.kind in ("RY", "RZ"):
            expected = 1
        elif self.kind == "UNITARY2_PARAM":
            if self.family not in CHANNEL_ARITY or self.which not in ("U0", "U1"):
                raise ValueError(f"bad channel spec family={self.family!r} which={self.which!r}")
            expected = CHANNEL_ARITY[self.family]
        else:
            expected = 0
        if len(self.slots) != expected:
            raise ValueError(f"{self.kind} takes {expected} parameter slot(s), got {self.slots}")
        if self.kind == "UNITARY2" and (self.matrix is None or np.shape(self.matrix) != (4, 4)):
            raise ValueError("UNITARY2 requires a 4x4 matrix")


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    ops: tuple[GateOp, ...] = ()
    num_params: int = 0

    def __post_init__(self):
        if not 1 <= self.num_qubits <= linalg.MAX_QUBITS:
            raise ValueError(f"num_qubits out of range: {self.num_qubits}")
        for op in self.ops:
            if any(not 0 <= t < self.num_qubits for t in op.targets):
                raise ValueError(f"{op.kind} targets {op.targets} outside {self.num_qubits} qubits")
            if len(set(op.targets)) != len(op.targets):
                raise ValueError(f"{op.kind} has duplicate targets {op.targets}")
            if any(not 0 <= s < self.num_params for s in op.slots):
                raise ValueError(f"{op.kind} slots {op.slots} outside {self.num_params} params")

    def to_dict(self) -> dict:
        ops = []
        for op in self.ops:
            d = {"kind": op.kind, "targets": list(op.targets), "slots": list(op.slots)}
            if op.kind == "UNITARY2_PARAM":
                d["family"], d["which"] = op.family, op.which
            if op.kind == "UNITARY2":
                m = np.asarray(op.matrix, dtype=complex)
                d["matrix"] = [[[z.real, z.imag] for z in row] for row in m]
            ops.append(d)
        return {"num_qubits": self.num_qubits, "num_params": self.num_params, "ops": ops}

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        ops = []
        for o in d["ops"]:
            matrix = None
            if "matrix" in o:
                matrix = np.array([[complex(re, im) for re, im in row] for row in o["matrix"]])
            ops.append(GateOp(o["kind"], tuple(o["targets"]), tuple(o["slots"]),
                              matrix, o.get("family"), o.get("which")))
        return cls(int(d["num_qubits"]), tuple(ops), int(d["num_params"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class BoundCircuit:
    """A circuit with every gate resolved to a concrete matrix."""

    num_qubits: int
    gates: tuple[tuple[np.ndarray, tuple[int, ...]], ...]


def _fixed_matrix(op: GateOp) -> np.ndarray:
    if op.kind == "H":
        return linalg.H
    if op.kind == "CX":
        return CX_MATRIX
    if op.kind == "CCX":
        return CCX_MATRIX
    return np.asarray(op.matrix, dtype=complex)


def bind(circuit: Circuit, params: Sequence[float]) -> BoundCircuit:
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.size != circuit.num_params:
        raise ValueError(f"expected {circuit.num_params} parameters, got {params.size}")
    gates = []
    for op in circuit.ops:
        if op.kind == "RY":
            m = linalg.ry(params[op.slots[0]])
        elif op.kind == "RZ":
            m = linalg.rz(params[op.slots[0]])
        elif op.kind == "UNITARY2_PARAM":
            m = channel_unitary(op.family, op.which, params[list(op.slots)]).matrix
        else:
            m = _fixed_matrix(op)
        gates.append((m, op.targets))
    return BoundCircuit(circuit.num_qubits, tuple(gates))


def run(bound: BoundCircuit, state: np.ndarray) -> np.ndarray:
    """Apply the bound circuit to ``state`` (batched states allowed)."""
    psi = np.asarray(state, dtype=complex)
    if psi.shape[-1] != 2**bound.num_qubits:
        raise ValueError(f"state dimension {psi.shape[-1]} does not match {bound.num_qubits} qubits")
    for matrix, targets in bound.gates:
        psi = linalg.apply_gate(psi, matrix, targets)
    return psi


def unitary(bound: BoundCircuit) -> np.ndarray:
    """Dense matrix of the bound circuit."""
    dim = 2**bound.num_qubits
    # rows of the batch are the images of basis states
    return run(bound, np.eye(dim, dtype=complex)).T


@dataclass(frozen=True)
class AnsatzSpec:
    family: AnsatzFamily
    num_qubits: int
    reps: int = 3

    def __post_init__(self):
        object.__setattr__(self, "family", AnsatzFamily(self.family))
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.family is AnsatzFamily.PROPOSED_TOFFOLI and self.num_qubits != 3:
            raise ValueError("the Toffoli ansatz requires exactly 3 qubits")
        if not 1 <= self.num_qubits <= linalg.MAX_QUBITS:
            raise ValueError(f"num_qubits out of range: {self.num_qubits}")

    @property
    def num_params(self) -> int:
        per_layer = 2 * self.num_qubits if self.family is AnsatzFamily.EFFICIENT_SU2 else self.num_qubits
        return per_layer * (self.reps + 1)

    def to_dict(self) -> dict:
        return {"family": self.family.value, "num_qubits": self.num_qubits, "reps": self.reps}

    @classmethod
    def from_dict(cls, d: dict) -> "AnsatzSpec":
        return cls(AnsatzFamily(d["family"]), int(d["num_qubits"]), int(d["reps"]))


TOFFOLI_CYCLE = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def build_ansatz(spec: AnsatzSpec) -> Circuit:
    n = spec.num_qubits
    ops: list[GateOp] = []
    slot = 0

    def rotation_layer():
        nonlocal slot
        kinds = ("RY", "RZ") if spec.family is AnsatzFamily.EFFICIENT_SU2 else ("RY",)
        for kind in kinds:
            for q in range(n):
                ops.append(GateOp(kind, (q,), (slot,)))
                slot += 1

    def entangling_layer():
        if spec.family is AnsatzFamily.PROPOSED_TOFFOLI:
            ops.extend(GateOp("CCX", t) for t in TOFFOLI_CYCLE)
        else:
            ops.extend(GateOp("CX", (i, j)) for i in range(n) for j in range(i + 1, n))

    rotation_layer()
    for _ in range(spec.reps):
        entangling_layer()
        rotation_layer()
    return Circuit(n, tuple(ops), slot)


def build_prep_circuit(topology: ClassTopology, noise: str, which: str) -> Circuit:
    """RY diversity layer, then one dilated channel unitary per entangling pair.

    Parameter layout: RY angles for qubits 0..n-1, then the channel
    parameters of each pair in declaration order.
    """
    noise = noise.upper()
    if noise not in CHANNEL_ARITY:
        raise ValueError(f"unknown noise family {noise!r}")
    n = topology.num_qubits
    ops = [GateOp("RY", (q,), (q,)) for q in range(n)]
    slot = n
    arity = CHANNEL_ARITY[noise]
    for pair in topology.entangling_pairs:
        slots = tuple(range(slot, slot + arity))
        ops.append(GateOp("UNITARY2_PARAM", tuple(pair), slots, family=noise, which=which.upper()))
        slot += arity
    return Circuit(n, tuple(ops), slot)
