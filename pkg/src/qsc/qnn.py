"""Quantum neural network classifier: preparation circuit + trainable ansatz.

Class probabilities come from the exact outcome distribution of the output
state.  Two read-outs are available:

* ``"mod"``: outcome index ``j`` counts towards class ``j % k``;
* ``"observable"`` (two classes only): ``p_1 = <O>`` with
  ``O = I - |0..0><0..0|`` and ``p_0 = 1 - p_1``.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import __version__
from ._jsonio import dumps
from ._validation import check_labels, check_states
from .circuits import AnsatzFamily, AnsatzSpec, BoundCircuit, bind, build_ansatz, run, unitary
from .cobyla import OptimizerConfig, minimize
from .dataset import DataSample, Dataset, prepare_state, prepare_states
from .linalg import zero_state

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-12
READOUTS = ("mod", "observable")


def observable_matrix(num_qubits: int) -> np.ndarray:
    """``I - |0..0><0..0|`` on ``num_qubits`` qubits."""
    dim = 2**num_qubits
    obs = np.eye(dim, dtype=complex)
    obs[0, 0] = 0.0
    return obs


def interpret_matrix(num_outcomes: int, num_classes: int) -> np.ndarray:
    """0/1 matrix mapping outcome ``j`` to class ``j % num_classes``."""
    if not 1 <= num_classes <= num_outcomes:
        raise ValueError(f"cannot bin {num_outcomes} outcomes into {num_classes} classes")
    m = np.zeros((num_outcomes, num_classes))
    m[np.arange(num_outcomes), np.arange(num_outcomes) % num_classes] = 1.0
    return m


def outcome_probabilities(states: np.ndarray, num_classes: int, readout: str = "mod") -> np.ndarray:
    """Class probabilities of output states (rows), per the chosen read-out."""
    amps2 = np.abs(states) ** 2
    if readout == "mod":
        return amps2 @ interpret_matrix(states.shape[-1], num_classes)
    if readout == "observable":
        if num_classes != 2:
            raise ValueError("observable read-out is binary only")
        p0 = amps2[..., 0]
        return np.stack([p0, 1.0 - p0], axis=-1)
    raise ValueError(f"unknown readout {readout!r}; choose from {READOUTS}")


def forward(sample: DataSample, ansatz: BoundCircuit, num_classes: int, readout: str = "mod") -> np.ndarray:
    """Class probabilities for one sample: prep circuit, then the ansatz."""
    if ansatz.num_qubits != sample.num_qubits:
        raise ValueError("ansatz and sample qubit counts differ")
    out = run(ansatz, prepare_state(sample))
    return outcome_probabilities(out, num_classes, readout)


def binary_expectation(sample: DataSample, ansatz: BoundCircuit, observable: np.ndarray | None = None) -> float:
    """``<psi|O|psi>`` of the output state for ``O = I - |0..0><0..0|``."""
    n = sample.num_qubits
    expected = observable_matrix(n)
    if observable is not None and not np.allclose(observable, expected, rtol=0, atol=1e-12):
        raise ValueError("only the projector complement I - |0..0><0..0| is supported")
    out = run(ansatz, prepare_state(sample))
    return float(1.0 - abs(out[0]) ** 2)


def cross_entropy(p: Sequence[float], label: int) -> float:
    """``-ln(max(p[label], 1e-12))``."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("p must be a probability vector")
    if not 0 <= label < p.size:
        raise ValueError(f"label {label} out of range for {p.size} classes")
    return float(-np.log(max(p[label], PROB_FLOOR)))


class _BatchLoss:
    """Mean cross-entropy over fixed prepared states, for any theta."""

    def __init__(self, states, labels, spec: AnsatzSpec, num_classes: int, readout: str):
        self.states = np.asarray(states, dtype=complex)
        self.labels = np.asarray(labels, dtype=int)
        if self.states.shape[0] == 0:
            raise ValueError("empty partition")
        self.circuit = build_ansatz(spec)
        self.num_classes = num_classes
        self.readout = readout
        self._rows = np.arange(self.labels.size)

    def probabilities(self, theta) -> np.ndarray:
        u = unitary(bind(self.circuit, theta))
        return outcome_probabilities(self.states @ u.T, self.num_classes, self.readout)

    def __call__(self, theta) -> float:
        p = self.probabilities(theta)[self._rows, self.labels]
        losses = -np.log(np.maximum(p, PROB_FLOOR))
        total = 0.0
        for v in losses:  # fixed left-to-right reduction order
            total += v
        return float(total / losses.size)


def dataset_loss(theta, samples: Sequence[DataSample], spec: AnsatzSpec,
                 num_classes: Optional[int] = None, readout: str = "mod") -> float:
    """Mean cross-entropy over ``samples`` in the given order."""
    samples = list(samples)
    if not samples:
        raise ValueError("empty partition")
    if num_classes is None:
        num_classes = 2 if spec.num_qubits == 2 else 5
    states = prepare_states(samples)
    return _BatchLoss(states, [s.label for s in samples], spec, num_classes, readout)(theta)


@dataclass(frozen=True)
class TrainConfig:
    maxiter: int = 100
    rhobeg: float = 1.0
    rhoend: float = 1e-4
    maxfun: Optional[int] = None
    readout: str = "mod"

    def __post_init__(self):
        if self.maxiter < 0:
            raise ValueError("maxiter must be >= 0")
        if self.readout not in READOUTS:
            raise ValueError(f"unknown readout {self.readout!r}")

    def optimizer(self, num_params: int) -> OptimizerConfig:
        maxfun = self.maxfun if self.maxfun is not None else max(10 * self.maxiter, num_params + 2)
        return OptimizerConfig(self.rhobeg, self.rhoend, maxfun)

    def to_dict(self) -> dict:
        return {"maxiter": self.maxiter, "rhobeg": self.rhobeg, "rhoend": self.rhoend,
                "maxfun": self.maxfun, "readout": self.readout}


@dataclass
class TrainedModel:
    spec: AnsatzSpec
    theta: np.ndarray
    loss_trace: list[float]
    num_classes: int
    config: dict = field(default_factory=dict)
    seed: int = 0
    termination: str = ""
    inputs: dict = field(default_factory=dict)

    @property
    def readout(self) -> str:
        return self.config.get("readout", "mod")

    def to_dict(self) -> dict:
        return {
            "tool_version": __version__,
            "ansatz": self.spec.to_dict(),
            "num_classes": self.num_classes,
            "theta": [float(t) for t in self.theta],
            "loss_trace": [float(v) for v in self.loss_trace],
            "termination": self.termination,
            "seed": self.seed,
            "config": self.config,
            "inputs": self.inputs,
        }

    def to_json(self) -> str:
        return dumps(self.to_dict()) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "TrainedModel":
        spec = AnsatzSpec.from_dict(d["ansatz"])
        theta = np.array(d["theta"], dtype=float)
        if theta.size != spec.num_params:
            raise ValueError(f"theta has {theta.size} entries, ansatz needs {spec.num_params}")
        return cls(spec, theta, [float(v) for v in d["loss_trace"]], int(d["num_classes"]),
                   dict(d.get("config", {})), int(d.get("seed", 0)), d.get("termination", ""),
                   dict(d.get("inputs", {})))

    @classmethod
    def from_json(cls, text: str) -> "TrainedModel":
        return cls.from_dict(json.loads(text))

    def loss_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["iteration", "loss"])
        for i, v in enumerate(self.loss_trace):
            writer.writerow([i, format(v, ".17g")])
        return buf.getvalue()


def fit_parameters(states, labels, spec: AnsatzSpec, num_classes: int,
                   config: TrainConfig = TrainConfig(), seed: int = 0):
    """Optimize ansatz parameters on prepared ``states``.

    Returns ``(theta, loss_trace, termination)``.  ``loss_trace[0]`` is the
    loss at the random start; entry ``i`` is the loss of the iterate after
    iteration ``i``.
    """
    objective = _BatchLoss(states, labels, spec, num_classes, config.readout)
    theta0 = np.random.default_rng(seed).uniform(-np.pi, np.pi, spec.num_params)
    trace: list[float] = []

    def record(nit, x, f):
        trace.append(f)

    res = minimize(objective, theta0, config.optimizer(spec.num_params),
                   maxiter=config.maxiter, callback=record)
    trace.insert(0, res.history[0][1])
    logger.info("trained %s: loss %.6g -> %.6g (%s, %d evals)",
                spec.family.value, trace[0], res.fun, res.reason, res.nfev)
    return res.x, trace, res.reason


def train(dataset: Dataset, spec: AnsatzSpec, config: TrainConfig = TrainConfig(), seed: int = 0) -> TrainedModel:
    """Fit the ansatz on the training split of ``dataset``."""
    if not dataset.train:
        raise ValueError("dataset has no training split")
    if set(dataset.train) & set(dataset.test):
        raise ValueError("train and test splits overlap")
    if spec.num_qubits != dataset.num_qubits:
        raise ValueError(f"ansatz has {spec.num_qubits} qubits, dataset {dataset.num_qubits}")
    samples = dataset.subset(dataset.train)
    states = prepare_states(samples)
    theta, trace, reason = fit_parameters(states, [s.label for s in samples], spec,
                                          dataset.num_classes, config, seed)
    return TrainedModel(spec, theta, trace, dataset.num_classes, config.to_dict(), seed, reason)


def predict_proba_states(model: TrainedModel, states) -> np.ndarray:
    u = unitary(bind(build_ansatz(model.spec), model.theta))
    return outcome_probabilities(np.asarray(states) @ u.T, model.num_classes, model.readout)


def predict(model: TrainedModel, sample: DataSample) -> tuple[int, np.ndarray]:
    """Most probable class; ties go to the lower class code."""
    bound = bind(build_ansatz(model.spec), model.theta)
    p = forward(sample, bound, model.num_classes, model.readout)
    return int(np.argmax(p)), p


def predict_dataset(model: TrainedModel, samples: Sequence[DataSample]) -> np.ndarray:
    return np.argmax(predict_proba_states(model, prepare_states(samples)), axis=1)


class PrepStateEncoder(TransformerMixin, BaseEstimator):
    """Turn a sequence of ``DataSample`` into a matrix of statevectors."""

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        samples = list(X)
        if not samples:
            raise ValueError("found 0 samples")
        if not all(isinstance(s, DataSample) for s in samples):
            raise TypeError("PrepStateEncoder expects DataSample objects")
        return prepare_states(samples)


class QNNClassifier(ClassifierMixin, BaseEstimator):
    """Variational classifier over statevector inputs.

    ``X`` holds one normalized statevector per row (use ``PrepStateEncoder``
    to build it from dataset samples).  Labels are encoded in sorted order;
    the i-th class of ``classes_`` is read out as class index i.
    """

    def __init__(self, ansatz="real_amplitudes", reps=3, maxiter=100, rhobeg=1.0,
                 rhoend=1e-4, maxfun=None, readout="mod", random_state=0):
        self.ansatz = ansatz
        self.reps = reps
        self.maxiter = maxiter
        self.rhobeg = rhobeg
        self.rhoend = rhoend
        self.maxfun = maxfun
        self.readout = readout
        self.random_state = random_state

    def fit(self, X, y):
        X = check_states(X)
        y = check_labels(y, X.shape[0])
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        self.n_qubits_ = int(np.log2(X.shape[1]))
        spec = AnsatzSpec(AnsatzFamily(self.ansatz), self.n_qubits_, self.reps)
        config = TrainConfig(self.maxiter, self.rhobeg, self.rhoend, self.maxfun, self.readout)
        k = max(len(self.classes_), 2)
        theta, trace, reason = fit_parameters(X, y_idx, spec, k, config, self.random_state)
        self.model_ = TrainedModel(spec, theta, trace, k, config.to_dict(),
                                   self.random_state, reason)
        self.theta_ = theta
        self.loss_curve_ = list(trace)
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        X = check_states(X, self.n_qubits_)
        return predict_proba_states(self.model_, X)[:, : len(self.classes_)]

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]
