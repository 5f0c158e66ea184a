"""Two-parameter loss landscapes and finite-difference flatness statistics.

The landscape loss at ``theta`` is the sample-mean of
``Tr[O rho_out] = 1 - |<0..0|U_theta psi_x>|^2``.
"""
from __future__ import annotations

import csv
import hashlib
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from ._jsonio import dumps
from .circuits import AnsatzSpec, bind, build_ansatz, unitary
from .dataset import DataSample, Dataset, prepare_states


def landscape_loss(theta, states: np.ndarray, spec: AnsatzSpec) -> float:
    """Mean projector-complement expectation over ``states`` at ``theta``."""
    u = unitary(bind(build_ansatz(spec), theta))
    first_row = u[0]  # <0..0| U
    overlaps = np.asarray(states) @ first_row
    return float(np.mean(1.0 - np.abs(overlaps) ** 2))


def representative_samples(dataset: Dataset, count: int = 8, seed: int = 0) -> list[int]:
    """Indices of ``count`` samples, cycling through classes in code order."""
    rng = np.random.default_rng([seed, 1])
    labels = dataset.labels
    pools = {c: list(rng.permutation(np.flatnonzero(labels == c)))
             for c in range(dataset.num_classes)}
    chosen = []
    i = 0
    while len(chosen) < count:
        c = i % dataset.num_classes
        if pools[c]:
            chosen.append(int(pools[c].pop()))
        elif not any(pools.values()):
            break
        i += 1
    return chosen


def sample_set_hash(samples: Sequence[DataSample]) -> str:
    text = "\n".join(dumps(s.to_dict()) for s in samples)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass
class LandscapeGrid:
    spec: AnsatzSpec
    indices: tuple[int, int]
    axis: np.ndarray
    losses: np.ndarray  # losses[r, c]: theta_i = axis[r], theta_j = axis[c]
    theta: np.ndarray  # values of the parameters that are not scanned
    seed: int
    meta: dict = field(default_factory=dict)

    def point(self, r: int, c: int) -> np.ndarray:
        t = self.theta.copy()
        t[self.indices[0]] = self.axis[r]
        t[self.indices[1]] = self.axis[c]
        return t

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# tool_version: {__version__}\n")
        buf.write(f"# ansatz: {self.spec.family.value} num_qubits={self.spec.num_qubits} reps={self.spec.reps}\n")
        buf.write(f"# indices: {self.indices[0]},{self.indices[1]}\n")
        buf.write(f"# grid: {self.axis.size} axis=[-pi,pi]\n")
        buf.write(f"# seed: {self.seed}\n")
        for key in sorted(self.meta):
            buf.write(f"# {key}: {self.meta[key]}\n")
        buf.write("# theta: " + " ".join(format(v, ".17g") for v in self.theta) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        for row in self.losses:
            writer.writerow([format(v, ".17g") for v in row])
        return buf.getvalue()

    def axis_csv(self) -> str:
        return "".join(format(v, ".17g") + "\n" for v in self.axis)


def scan(spec: AnsatzSpec, samples: Sequence[DataSample], indices: tuple[int, int],
         grid_size: int = 41, seed: int = 0, workers: int = 1,
         meta: Optional[dict] = None) -> LandscapeGrid:
    """Loss on a ``grid_size``-square grid over ``[-pi, pi]`` in two parameters.

    Parameters other than ``indices`` are fixed at values drawn once from
    ``Uniform[-pi, pi]`` with ``seed``.
    """
    i, j = (int(v) for v in indices)
    p = spec.num_params
    if i == j or not (0 <= i < p and 0 <= j < p):
        raise ValueError(f"need two distinct parameter indices below {p}, got {indices}")
    if grid_size < 3:
        raise ValueError("grid_size must be >= 3")
    samples = list(samples)
    if not samples:
        raise ValueError("empty sample set")
    states = prepare_states(samples)
    theta = np.random.default_rng(seed).uniform(-np.pi, np.pi, p)
    axis = np.linspace(-np.pi, np.pi, grid_size)
    grid = LandscapeGrid(spec, (i, j), axis, np.zeros((grid_size, grid_size)), theta, seed,
                         {"samples": len(samples), "sample_hash": sample_set_hash(samples),
                          **(meta or {})})
    cells = [(r, c) for r in range(grid_size) for c in range(grid_size)]

    def cell(rc):
        return landscape_loss(grid.point(*rc), states, spec)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(cell, cells))
    else:
        values = [cell(rc) for rc in cells]
    grid.losses = np.array(values).reshape(grid_size, grid_size)
    return grid


@dataclass(frozen=True)
class FlatnessReport:
    loss_variance: float
    gradient_variance: float
    gradient_mean: float
    num_points: int
    step: float
    param_index: int = 0


def flatness(spec: AnsatzSpec, samples: Sequence[DataSample], num_points: int = 200,
             step: float = 1e-4, seed: int = 0, param_index: int = 0,
             grid: Optional[LandscapeGrid] = None) -> FlatnessReport:
    """Variance of the central-difference derivative in ``theta[param_index]``
    over ``num_points`` uniform random parameter vectors.

    ``loss_variance`` is the variance over ``grid`` when one is given, and
    otherwise over the random points.
    """
    if num_points < 10:
        raise ValueError("num_points must be >= 10")
    states = prepare_states(list(samples))
    rng = np.random.default_rng(seed)
    e = np.zeros(spec.num_params)
    e[param_index] = step
    grads, losses = [], []
    for _ in range(num_points):
        theta = rng.uniform(-np.pi, np.pi, spec.num_params)
        losses.append(landscape_loss(theta, states, spec))
        up = landscape_loss(theta + e, states, spec)
        down = landscape_loss(theta - e, states, spec)
        grads.append((up - down) / (2 * step))
    loss_var = float(np.var(grid.losses)) if grid is not None else float(np.var(losses))
    return FlatnessReport(loss_var, float(np.var(grads)), float(np.mean(grads)),
                          num_points, step, param_index)
