"""Class codes and the circuit topologies that realize each class."""
from __future__ import annotations

from dataclasses import dataclass

CLASS_NAMES = {
    2: ("SEP", "ENT"),
    3: ("A-B-C", "AB-C", "AC-B", "BC-A", "ABC"),
}


def class_names(num_qubits: int) -> tuple[str, ...]:
    try:
        return CLASS_NAMES[num_qubits]
    except KeyError:
        raise ValueError(f"classification defined for 2 or 3 qubits, got {num_qubits}") from None


def class_code(name: str, num_qubits: int) -> int:
    names = class_names(num_qubits)
    if name not in names:
        raise ValueError(f"unknown class {name!r} for {num_qubits} qubits")
    return names.index(name)


def class_name(code: int, num_qubits: int) -> str:
    return class_names(num_qubits)[code]


@dataclass(frozen=True)
class ClassTopology:
    """Entangling pairs of the preparation circuit that target one class.

    Each pair is ``(system, dilation)``: qubit order in which the dilated
    two-qubit unitary is placed.
    """

    num_qubits: int
    entangling_pairs: tuple[tuple[int, int], ...]
    intended_label: int

    @property
    def name(self) -> str:
        return class_name(self.intended_label, self.num_qubits)

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "entangling_pairs": [list(p) for p in self.entangling_pairs],
            "intended_label": self.intended_label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ClassTopology":
        topo = cls(
            int(d["num_qubits"]),
            tuple((int(a), int(b)) for a, b in d["entangling_pairs"]),
            int(d["intended_label"]),
        )
        if topo not in TOPOLOGIES.get(topo.num_qubits, ()):
            raise ValueError(f"invalid topology {d!r}")
        return topo


TOPOLOGIES = {
    2: (
        ClassTopology(2, (), 0),
        ClassTopology(2, ((0, 1),), 1),
    ),
    3: (
        ClassTopology(3, (), 0),
        ClassTopology(3, ((0, 1),), 1),
        ClassTopology(3, ((0, 2),), 2),
        ClassTopology(3, ((1, 2),), 3),
        ClassTopology(3, ((0, 1), (1, 2)), 4),
    ),
}


def topology(name: str, num_qubits: int) -> ClassTopology:
    return TOPOLOGIES[num_qubits][class_code(name, num_qubits)]
