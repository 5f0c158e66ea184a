"""Labeled datasets of prepared states, stored as generation parameters.

A sample never stores amplitudes: the state is re-created by running the
preparation circuit of its topology with the stored parameters.
"""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from ._jsonio import dumps
from .circuits import bind, build_prep_circuit, run
from .labels import TOPOLOGIES, ClassTopology, class_names
from .linalg import zero_state
from .oracle import DEFAULT_EPS, GrayZoneError, classify

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
MIN_PER_CLASS = 10
DEFAULT_PER_CLASS = {2: 200, 3: 150}
MAX_ATTEMPTS = 100
TRAIN_FRACTION = (7, 10)
SPLIT_RULE = "stratified 70/30 per class, train count rounded up"
SPLIT_STREAM = 2**31 - 1
AUDIT_TOL = 1e-8

# (low, high, open_side): open_side names the excluded endpoint
RY_RANGE = (0.0, math.pi, None)
CHANNEL_RANGES = {
    "AD": {"alpha": (0.1, 2.0, "low"), "beta": (-2.0, -0.1, "high")},
    "RTN": {"gamma": (0.1, 2.0, "low"), "omega": (0.5, 4.0, "low"), "t": (0.1, 3.0, "low")},
}
DEFAULT_WHICH = {"AD": "U0", "RTN": "U1"}


class DatasetFormatError(ValueError):
    pass


class ResampleBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class DataSample:
    topology: ClassTopology
    noise_family: str
    which_unitary: str
    params: tuple[float, ...]
    label: int
    entropies: tuple[float, ...]
    seed_trace: int

    def to_dict(self) -> dict:
        return {
            "topology": self.topology.to_dict(),
            "noise_family": self.noise_family,
            "which_unitary": self.which_unitary,
            "params": list(self.params),
            "label": self.label,
            "entropies": list(self.entropies),
            "seed_trace": self.seed_trace,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DataSample":
        topo = ClassTopology.from_dict(d["topology"])
        sample = cls(
            topo,
            str(d["noise_family"]),
            str(d["which_unitary"]),
            tuple(float(v) for v in d["params"]),
            int(d["label"]),
            tuple(float(v) for v in d["entropies"]),
            int(d["seed_trace"]),
        )
        circuit = build_prep_circuit(topo, sample.noise_family, sample.which_unitary)
        if len(sample.params) != circuit.num_params:
            raise ValueError(f"expected {circuit.num_params} params, got {len(sample.params)}")
        if not 0 <= sample.label < len(class_names(topo.num_qubits)):
            raise ValueError(f"label {sample.label} out of range")
        if len(sample.entropies) != topo.num_qubits:
            raise ValueError("one entropy per qubit expected")
        return sample

    @property
    def num_qubits(self) -> int:
        return self.topology.num_qubits


def prepare_state(sample: DataSample) -> np.ndarray:
    """Re-create the statevector of ``sample`` from its parameters."""
    circuit = build_prep_circuit(sample.topology, sample.noise_family, sample.which_unitary)
    return run(bind(circuit, sample.params), zero_state(sample.num_qubits))


def prepare_states(samples) -> np.ndarray:
    return np.array([prepare_state(s) for s in samples])


def _uniform(rng: np.random.Generator, low: float, high: float, open_side) -> float:
    u = rng.random()
    if open_side == "low":
        return high - u * (high - low)
    return low + u * (high - low)


def _draw_params(topology: ClassTopology, noise: str, rng: np.random.Generator) -> list[float]:
    params = [_uniform(rng, *RY_RANGE) for _ in range(topology.num_qubits)]
    for _ in topology.entangling_pairs:
        params.extend(_uniform(rng, *r) for r in CHANNEL_RANGES[noise].values())
    return params


def sample_class(
    topology: ClassTopology,
    noise_family: str,
    which_unitary: str,
    rng: np.random.Generator,
    *,
    eps: float = DEFAULT_EPS,
    seed_trace: int = 0,
    max_attempts: int = MAX_ATTEMPTS,
) -> DataSample:
    """Draw parameters until the oracle confirms the intended class."""
    noise = noise_family.upper()
    which = which_unitary.upper()
    if noise not in CHANNEL_RANGES:
        raise ValueError(f"unknown noise family {noise_family!r}")
    circuit = build_prep_circuit(topology, noise, which)
    psi0 = zero_state(topology.num_qubits)
    for attempt in range(max_attempts):
        params = _draw_params(topology, noise, rng)
        state = run(bind(circuit, params), psi0)
        try:
            label, sig = classify(state, eps)
        except GrayZoneError:
            logger.debug("gray-zone resample for %s (attempt %d)", topology.name, attempt)
            continue
        if label == topology.intended_label:
            return DataSample(topology, noise, which, tuple(params), label, sig.entropies, seed_trace)
    raise ResampleBudgetExceeded(
        f"no {topology.name} sample after {max_attempts} attempts ({noise}, {which})"
    )


@dataclass(frozen=True)
class GenerationConfig:
    num_qubits: int
    noise: str
    per_class: int
    seed: int
    which_unitary: Optional[str] = None
    eps: float = DEFAULT_EPS

    def __post_init__(self):
        object.__setattr__(self, "noise", self.noise.upper())
        if self.noise not in CHANNEL_RANGES:
            raise ValueError(f"unknown noise family {self.noise!r}")
        if self.which_unitary is None:
            object.__setattr__(self, "which_unitary", DEFAULT_WHICH[self.noise])
        object.__setattr__(self, "which_unitary", self.which_unitary.upper())
        if self.num_qubits not in TOPOLOGIES:
            raise ValueError(f"system must have 2 or 3 qubits, got {self.num_qubits}")
        if self.per_class < MIN_PER_CLASS:
            raise ValueError(f"per_class must be >= {MIN_PER_CLASS}, got {self.per_class}")


@dataclass
class Dataset:
    samples: list[DataSample]
    num_qubits: int
    train: list[int]
    test: list[int]
    header: dict = field(default_factory=dict)

    @property
    def num_classes(self) -> int:
        return len(class_names(self.num_qubits))

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=int)

    def subset(self, indices) -> list[DataSample]:
        return [self.samples[i] for i in indices]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.samples == other.samples and self.num_qubits == other.num_qubits
                and self.train == other.train and self.test == other.test
                and self.header == other.header)


def stratified_split(labels, seed: int) -> tuple[list[int], list[int]]:
    """Per-class 70/30 split, train share rounded up; indices sorted."""
    labels = np.asarray(labels)
    rng = np.random.default_rng([seed, SPLIT_STREAM])
    train, test = [], []
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        num, den = TRAIN_FRACTION
        n_train = (num * idx.size + den - 1) // den
        train.extend(int(i) for i in idx[:n_train])
        test.extend(int(i) for i in idx[n_train:])
    return sorted(train), sorted(test)


def _header(config: GenerationConfig, n_samples: int, train, test) -> dict:
    return {
        "version": FORMAT_VERSION,
        "tool_version": __version__,
        "system": f"{config.num_qubits}q",
        "noise": config.noise.lower(),
        "which_unitary": config.which_unitary,
        "per_class": config.per_class,
        "seed": config.seed,
        "eps": config.eps,
        "split_rule": SPLIT_RULE,
        "ranges": {"ry": list(RY_RANGE[:2]),
                   **{k: list(v[:2]) for k, v in CHANNEL_RANGES[config.noise].items()}},
        "num_samples": n_samples,
        "train": list(train),
        "test": list(test),
    }


def generate(config: GenerationConfig, workers: int = 1) -> Dataset:
    """Balanced dataset; sample ``i`` draws from the stream ``(seed, i)``."""
    topologies = TOPOLOGIES[config.num_qubits]
    jobs = [(topo, c * config.per_class + i)
            for c, topo in enumerate(topologies) for i in range(config.per_class)]

    def work(job):
        topo, index = job
        rng = np.random.default_rng([config.seed, index])
        return sample_class(topo, config.noise, config.which_unitary, rng,
                            eps=config.eps, seed_trace=index)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(work, jobs))
    else:
        samples = [work(j) for j in jobs]
    train, test = stratified_split([s.label for s in samples], config.seed)
    return Dataset(samples, config.num_qubits, train, test,
                   _header(config, len(samples), train, test))


def dumps_dataset(dataset: Dataset) -> str:
    lines = [dumps(dataset.header)]
    lines.extend(dumps(s.to_dict()) for s in dataset.samples)
    return "\n".join(lines) + "\n"


def save(dataset: Dataset, path) -> None:
    Path(path).write_text(dumps_dataset(dataset), encoding="utf-8")


def loads_dataset(data: bytes) -> Dataset:
    if isinstance(data, str):
        data = data.encode("utf-8")
    records = []
    offset = 0
    for raw in data.splitlines(keepends=True):
        if raw.strip():
            try:
                records.append((offset, json.loads(raw)))
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(
                    f"malformed JSON at byte offset {offset + exc.pos}: {exc.msg}"
                ) from None
        offset += len(raw)
    if not records:
        raise DatasetFormatError("empty dataset file (no header at byte offset 0)")
    _, header = records[0]
    if not isinstance(header, dict) or "version" not in header:
        raise DatasetFormatError("first line must be a header object with a version")
    if header["version"] != FORMAT_VERSION:
        raise DatasetFormatError(
            f"unsupported dataset version {header['version']!r} (expected {FORMAT_VERSION})"
        )
    try:
        num_qubits = int(str(header["system"]).rstrip("q"))
        class_names(num_qubits)
        expected = int(header["num_samples"])
        train = [int(i) for i in header["train"]]
        test = [int(i) for i in header["test"]]
    except (KeyError, ValueError, TypeError) as exc:
        raise DatasetFormatError(f"bad header at byte offset 0: {exc}") from None
    samples = []
    for off, rec in records[1:]:
        try:
            sample = DataSample.from_dict(rec)
        except (KeyError, ValueError, TypeError) as exc:
            raise DatasetFormatError(f"bad sample at byte offset {off}: {exc}") from None
        if sample.num_qubits != num_qubits:
            raise DatasetFormatError(f"sample at byte offset {off} has wrong qubit count")
        samples.append(sample)
    if len(samples) != expected:
        raise DatasetFormatError(
            f"expected {expected} samples, file ends at byte offset {len(data)} after {len(samples)}"
        )
    if set(train) & set(test):
        raise DatasetFormatError("train and test indices overlap")
    if any(not 0 <= i < expected for i in train + test):
        raise DatasetFormatError("split index out of range")
    return Dataset(samples, num_qubits, train, test, header)


def load(path) -> Dataset:
    return loads_dataset(Path(path).read_bytes())


def audit(dataset: Dataset, tol: float = AUDIT_TOL) -> list[tuple[int, str]]:
    """Re-simulate every sample; return ``(index, reason)`` for each mismatch."""
    eps = float(dataset.header.get("eps", DEFAULT_EPS))
    problems = []
    for i, sample in enumerate(dataset.samples):
        try:
            label, sig = classify(prepare_state(sample), eps)
        except (ValueError, GrayZoneError) as exc:
            problems.append((i, f"re-simulation failed: {exc}"))
            continue
        if label != sample.label:
            problems.append((i, f"stored label {sample.label} but oracle gives {label}"))
        elif np.max(np.abs(np.array(sig.entropies) - np.array(sample.entropies))) > tol:
            problems.append((i, "stored entropies differ from re-simulation"))
    return problems
