"""Derivative-free trust-region minimization with linear simplex models.

An unconstrained implementation of Powell's COBYLA: a linear model of the
objective is interpolated on ``m + 1`` simplex vertices, a step of length
``rho`` is taken towards the model minimizer, the step replaces a simplex
vertex chosen to keep the simplex well shaped, and ``rho`` shrinks once the
model stops predicting progress.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

logger = logging.getLogger(__name__)

# Powell's simplex acceptability constants
ALPHA = 0.25  # minimum vertex-to-face distance, in units of rho
BETA = 2.1  # maximum vertex-to-pole distance, in units of rho
GAMMA = 0.5  # length of a geometry-improving step, in units of rho
DELTA = 1.1  # edge-length threshold used when choosing the vertex to drop
COND_LIMIT = 1e10
TIE_RTOL = 1e-10  # lengths this close count as equal; the lower index wins


class NonFiniteObjective(FloatingPointError):
    """The objective returned NaN or an infinity."""


@dataclass(frozen=True)
class OptimizerConfig:
    rhobeg: float = 1.0
    rhoend: float = 1e-4
    maxfun: Optional[int] = None
    shrink: float = 0.5

    def __post_init__(self):
        if not 0 < self.rhoend < self.rhobeg:
            raise ValueError("need 0 < rhoend < rhobeg")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    nfev: int
    nit: int
    reason: str
    rho: float
    history: list = field(default_factory=list, repr=False)

    @property
    def success(self) -> bool:
        return self.reason == "rhoend"


def minimize(
    fun: Callable[[np.ndarray], float],
    x0,
    config: OptimizerConfig = OptimizerConfig(),
    *,
    maxiter: Optional[int] = None,
    callback: Optional[Callable[[int, np.ndarray, float], None]] = None,
) -> OptimizeResult:
    """Minimize ``fun`` starting from ``x0``.

    ``maxfun`` (from ``config``) bounds objective evaluations, ``maxiter``
    bounds iterations after the initial simplex; an iteration evaluates the
    objective at most once.  ``callback(nit, x, f)`` is called after each
    evaluating iteration with the current iterate, which is always the best
    point evaluated so far.

    The returned point is the best point ever evaluated.  ``history`` holds
    ``(x, f)`` for every evaluation, in order.
    """
    x0 = np.array(x0, dtype=float).reshape(-1)
    m = x0.size
    if m == 0:
        raise ValueError("x0 must have at least one coordinate")
    maxfun = config.maxfun if config.maxfun is not None else max(500 * m, m + 2)
    if maxfun < m + 2:
        raise ValueError(f"maxfun must be at least m + 2 = {m + 2}")
    maxiter = math.inf if maxiter is None else int(maxiter)
    if maxiter < 0:
        raise ValueError("maxiter must be non-negative")

    history: list[tuple[np.ndarray, float]] = []
    best = {"x": x0.copy(), "f": math.inf}

    def evaluate(x):
        f = float(fun(x.copy()))
        if not math.isfinite(f):
            raise NonFiniteObjective(f"objective returned {f!r} at x = {x.tolist()}")
        history.append((x.copy(), f))
        if f < best["f"]:
            best["x"], best["f"] = x.copy(), f
        return f

    rho = float(config.rhobeg)

    def result(reason, nit):
        logger.debug("cobyla stop: %s after %d evaluations, f=%g", reason, len(history), best["f"])
        return OptimizeResult(best["x"].copy(), best["f"], len(history), nit, reason, rho, history)

    fpole = evaluate(x0)
    if maxiter == 0:
        return result("maxiter", 0)

    pole = x0.copy()
    sim = rho * np.eye(m)  # column j: vertex j minus the pole
    fv = np.empty(m)
    for j in range(m):
        fv[j] = evaluate(pole + sim[:, j])
    simi = np.linalg.inv(sim)

    nit = 0
    skip_geometry = False
    while True:
        j = int(np.argmin(fv))
        if fv[j] < fpole:
            shift = sim[:, j].copy()
            pole = pole + shift
            sim = sim - shift[:, None]
            sim[:, j] = -shift
            fv[j], fpole = fpole, fv[j]
            simi = np.linalg.inv(sim)

        if nit >= maxiter:
            return result("maxiter", nit)
        if len(history) >= maxfun:
            return result("maxfun", nit)

        if np.linalg.cond(sim) > COND_LIMIT:
            k = _repair(sim, rho)
            fv[k] = evaluate(pole + sim[:, k])
            simi = np.linalg.inv(sim)
            nit += 1
            _notify(callback, nit, best)
            continue

        vsig = 1.0 / np.sqrt(np.sum(simi**2, axis=1))
        veta = np.sqrt(np.sum(sim**2, axis=0))
        acceptable = bool(np.all(vsig >= ALPHA * rho) and np.all(veta <= BETA * rho))
        grad = simi.T @ (fv - fpole)

        if not acceptable and not skip_geometry:
            if np.any(veta > BETA * rho):
                jdrop = _first_max(veta)
            else:
                jdrop = _first_max(-vsig)
            step = GAMMA * rho * vsig[jdrop] * simi[jdrop]
            if grad @ step > 0:
                step = -step
            fnew = evaluate(pole + step)
            sim[:, jdrop], fv[jdrop] = step, fnew
            simi = np.linalg.inv(sim)
            nit += 1
            _notify(callback, nit, best)
            continue

        skip_geometry = True
        gnorm = float(np.linalg.norm(grad))
        improved = False
        if gnorm > 0.0:
            step = -rho / gnorm * grad
            prerem = rho * gnorm
            fnew = evaluate(pole + step)
            nit += 1
            actrem = fpole - fnew

            sigma = np.abs(simi @ step)
            threshold = 1.0 if actrem <= 0 else 0.0
            jdrop = _first_max(sigma) if sigma.max() > threshold else None
            sigbar = sigma * vsig
            edgmax = DELTA * rho
            for k in range(m):
                if sigbar[k] >= ALPHA * rho or sigbar[k] >= vsig[k]:
                    dist = veta[k] if actrem <= 0 else float(np.linalg.norm(step - sim[:, k]))
                    if dist > edgmax * (1.0 + TIE_RTOL):
                        jdrop, edgmax = k, dist
            if jdrop is not None:
                sim[:, jdrop], fv[jdrop] = step, fnew
                simi = np.linalg.inv(sim)
            _notify(callback, nit, best)
            improved = actrem > 0 and actrem >= 0.1 * prerem
        if improved:
            continue
        if not acceptable:
            skip_geometry = False
            continue
        if rho <= config.rhoend:
            return result("rhoend", nit)
        rho *= config.shrink
        if rho <= 1.5 * config.rhoend:
            rho = config.rhoend


def _first_max(values) -> int:
    """Lowest index whose value is within TIE_RTOL of the maximum."""
    top = float(np.max(values))
    return int(np.flatnonzero(values >= top - TIE_RTOL * abs(top))[0])


def _notify(callback, nit, best):
    if callback is not None:
        callback(nit, best["x"].copy(), best["f"])


def _repair(sim, rho) -> int:
    """Move the vertex farthest from the pole onto the least-spanned direction."""
    u, _, _ = np.linalg.svd(sim)
    k = int(np.argmax(np.sum(sim**2, axis=0)))
    sim[:, k] = rho * u[:, -1]
    return k
