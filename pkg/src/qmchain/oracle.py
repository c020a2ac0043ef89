"""Closed-form outcome statistics of a measurement chain.

Nothing in this module touches the wavefunction simulator. Everything is
built from the preparation amplitudes and the transition matrices
``|U[x_old, x_new]|^2`` so that a disagreement with the simulator points at
one side or the other instead of at shared code.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainSpec, DensityMatrix, detector

SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ClosedFormDistribution:
    """Probabilities over outcome tuples.

    ``values`` has one axis per index in ``indices``. For ``p_boundary`` the
    doubly-stochastic transition kernel between the two boundary ancillae
    is kept alongside the joint law in ``kernel``.
    """

    kind: str
    indices: tuple
    values: np.ndarray
    kernel: np.ndarray | None = None

    def total(self) -> float:
        return float(np.sum(self.values))

    def is_valid(self, tol: float = SUM_TOL) -> bool:
        if np.any(self.values < -tol):
            return False
        return abs(self.total() - 1.0) <= tol

    def to_dict(self) -> dict:
        """Flat probabilities keyed by comma-joined outcome tuples."""
        flat = {}
        for idx in itertools.product(*(range(n) for n in self.values.shape)):
            flat[",".join(map(str, idx))] = float(self.values[idx])
        out = {"kind": self.kind, "indices": list(self.indices), "values": flat}
        if self.kernel is not None:
            out["kernel"] = self.kernel.tolist()
        return out


def transition(u) -> np.ndarray:
    """Stochastic matrix ``T[x_old, x_new] = |U[x_old, x_new]|^2``."""
    return np.abs(np.asarray(u)) ** 2


def first_distribution(spec: ChainSpec) -> np.ndarray:
    """Law of the first outcome: ``|α U1|^2`` if prepared, uniform otherwise."""
    d = spec.d
    if not spec.prepared:
        return np.full(d, 1.0 / d)
    if spec.n_steps == 0:
        raise ValueError("chain has no measurement steps")
    alpha = np.asarray(spec.preparation.amplitudes, dtype=np.complex128)
    u1 = np.asarray(spec.steps[0].unitary, dtype=np.complex128)
    return np.abs(alpha @ u1) ** 2


def _check_step(spec: ChainSpec, i: int) -> None:
    if not 1 <= i <= spec.n_steps:
        raise ValueError(f"step index {i} outside 1..{spec.n_steps}")


def _check_window(spec: ChainSpec, i: int, j: int, strict: bool) -> None:
    _check_step(spec, i)
    _check_step(spec, j)
    if (strict and i >= j) or i > j:
        raise ValueError(f"invalid window ({i}, {j})")


def _q_vector(spec: ChainSpec, i: int) -> np.ndarray:
    q = first_distribution(spec)
    for k in range(2, i + 1):
        q = q @ transition(spec.steps[k - 1].unitary)
    return q


def q_dist(spec: ChainSpec, i: int) -> ClosedFormDistribution:
    """Marginal law of outcome ``i`` with every earlier step collapsed."""
    _check_step(spec, i)
    return ClosedFormDistribution("q_i", (i,), _q_vector(spec, i))


def markov_kernel(spec: ChainSpec, i: int, j: int) -> np.ndarray:
    """Product ``T_{i+1} ... T_j`` of transition matrices (identity if i == j)."""
    k = np.eye(spec.d)
    for step in range(i + 1, j + 1):
        k = k @ transition(spec.steps[step - 1].unitary)
    return k


def p_boundary(spec: ChainSpec, i: int, j: int) -> ClosedFormDistribution:
    """Joint law of the two boundary outcomes ``x_i, x_j`` of a window.

    ``kernel`` is the doubly-stochastic ``p(x_i, x_j)`` with unit row and
    column sums; ``values`` is ``q_i(x_i) * kernel``, which for an
    unprepared chain is ``kernel / d``.
    """
    _check_window(spec, i, j, strict=True)
    kern = markov_kernel(spec, i, j)
    joint = _q_vector(spec, i)[:, None] * kern
    return ClosedFormDistribution("p_boundary", (i, j), joint, kern)


def detector_distribution(spec: ChainSpec, i: int, j: int) -> ClosedFormDistribution:
    """Joint law of the outcomes ``x_i ... x_j`` of amplified detectors."""
    _check_window(spec, i, j, strict=False)
    p = _q_vector(spec, i)
    for k in range(i + 1, j + 1):
        p = p[..., None] * transition(spec.steps[k - 1].unitary)[(None,) * (p.ndim - 1)]
    return ClosedFormDistribution("detector_joint", tuple(range(i, j + 1)), p)


def detector_joint(spec: ChainSpec, i: int, j: int) -> DensityMatrix:
    """Diagonal density matrix of detectors ``D_i ... D_j``."""
    p = detector_distribution(spec, i, j).values
    labels = tuple(detector(k) for k in range(i, j + 1))
    return DensityMatrix.uniform(labels, np.diag(p.reshape(-1)).astype(np.complex128), spec.d)


def _h(p, base) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log(p)) / math.log(base))


def detector_chain_entropy(spec: ChainSpec, i: int, j: int) -> float:
    """``H[q_i] + Σ_k Σ_x q_{k-1}(x) H[|U_k[x, :]|^2]`` in dits."""
    _check_window(spec, i, j, strict=False)
    d = spec.d
    q = _q_vector(spec, i)
    total = _h(q, d)
    for k in range(i + 1, j + 1):
        t = transition(spec.steps[k - 1].unitary)
        total += sum(q[x] * _h(t[x], d) for x in range(d))
        q = q @ t
    return total


def _collapse_initial(spec: ChainSpec) -> np.ndarray:
    d = spec.d
    if spec.prepared:
        a = np.asarray(spec.preparation.amplitudes, dtype=np.complex128)
        return np.outer(a, a.conj())
    return np.eye(d, dtype=np.complex128) / d


def _rotate(rho: np.ndarray, u) -> np.ndarray:
    # coordinates change as ψ' = U^T ψ
    v = np.asarray(u, dtype=np.complex128).T
    return v @ rho @ v.conj().T


def collapse_rho(spec: ChainSpec, i: int, j: int) -> DensityMatrix:
    """Detector matrix ``ρ(D_i ... D_j)`` in the textbook collapse picture.

    The system's density matrix is rotated into each step's basis,
    projected onto every outcome, and the collapsed post-measurement state
    is carried to the next step. No transition matrix is formed directly.
    """
    _check_window(spec, i, j, strict=True)
    d = spec.d
    rho = _collapse_initial(spec)
    for k in range(1, i):
        rho = _rotate(rho, spec.steps[k - 1].unitary)
        rho = np.diag(np.diag(rho))
    rho = _rotate(rho, spec.steps[i - 1].unitary)

    m = j - i + 1
    probs = np.zeros((d,) * m)

    def branch(prefix, weight, state, k):
        if len(prefix) == m:
            probs[tuple(prefix)] = weight
            return
        for x in range(d):
            p = float(np.real(state[x, x]))
            if p <= 0.0:
                continue
            post = np.zeros((d, d), dtype=np.complex128)
            post[x, x] = 1.0
            nxt = _rotate(post, spec.steps[k].unitary) if len(prefix) + 1 < m else post
            branch(prefix + [x], weight * p, nxt, k + 1)

    branch([], 1.0, rho, i)
    labels = tuple(detector(k) for k in range(i, j + 1))
    return DensityMatrix.uniform(labels, np.diag(probs.reshape(-1)).astype(np.complex128), d)


def coherent_dist(spec: ChainSpec, i: int) -> np.ndarray:
    """Law of outcome ``i`` if steps ``2 .. i-1`` were never measured.

    This is ``|α U1 U2 ... Ui|^2``; comparing it with :func:`q_dist` exposes
    the interference terms removed by the intermediate measurements.
    """
    _check_step(spec, i)
    if not spec.prepared:
        return np.full(spec.d, 1.0 / spec.d)
    amp = np.asarray(spec.preparation.amplitudes, dtype=np.complex128)
    for k in range(1, i + 1):
        amp = amp @ np.asarray(spec.steps[k - 1].unitary, dtype=np.complex128)
    return np.abs(amp) ** 2


__all__ = [
    "ClosedFormDistribution",
    "coherent_dist",
    "collapse_rho",
    "detector_chain_entropy",
    "detector_distribution",
    "detector_joint",
    "first_distribution",
    "markov_kernel",
    "p_boundary",
    "q_dist",
    "transition",
]
