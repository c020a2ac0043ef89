"""Pure-state simulation of a chain of consecutive measurements.

Subsystems are registered in the order they join the wavefunction and the
first-registered one is the most significant tensor factor (big-endian).
The quantum system ``Q`` is always stored in the basis of the most recent
measurement, so a step only has to rotate ``Q`` and copy its index onto
fresh pointer qudits.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from .linalg import (
    NumericError,
    check_dim,
    eigvalsh,
    is_hermitian,
    is_unitary,
    random_state_vector,
    random_unitary,
)

NORM_TOL = 1e-10
ZERO_PROB = 1e-14

_KIND_ORDER = {"Q": 0, "R": 1, "A": 2, "D": 3}
_LABEL_RE = re.compile(r"^(Q|R|A|D)(?:(\d+)(?:\.(\d+))?)?$")


class SpecError(ValueError):
    """Malformed chain description."""


@dataclass(frozen=True)
class SubsystemLabel:
    """One d-dimensional tensor factor.

    ``kind`` is ``"Q"`` (system), ``"R"`` (reference), ``"A"`` (ancilla
    qudit) or ``"D"`` (detector qudit). Ancilla qudits with ``copy > 1`` are
    the extra pointer copies of a multi-qudit ancilla.
    """

    kind: str
    step: int | None = None
    copy: int = 1

    def __post_init__(self):
        if self.kind not in _KIND_ORDER:
            raise ValueError(f"unknown subsystem kind {self.kind!r}")
        if self.kind in ("Q", "R"):
            if self.step is not None or self.copy != 1:
                raise ValueError(f"{self.kind} takes no step or copy index")
        elif self.step is None or self.step < 1 or self.copy < 1:
            raise ValueError("ancilla/detector labels need step >= 1 and copy >= 1")

    @property
    def is_pointer_copy(self) -> bool:
        return self.kind == "A" and self.copy > 1

    @property
    def device(self) -> str:
        """Name of the whole device this qudit belongs to, e.g. ``"A2"``."""
        return self.kind if self.step is None else f"{self.kind}{self.step}"

    def sort_key(self):
        return (_KIND_ORDER[self.kind], self.step or 0, self.copy)

    def __str__(self) -> str:
        if self.step is None:
            return self.kind
        if self.copy == 1:
            return f"{self.kind}{self.step}"
        return f"{self.kind}{self.step}.{self.copy}"

    @classmethod
    def parse(cls, text: str) -> "SubsystemLabel":
        m = _LABEL_RE.match(text.strip())
        if not m:
            raise ValueError(f"cannot parse subsystem label {text!r}")
        kind, step, copy = m.groups()
        if kind in ("Q", "R"):
            if step is not None:
                raise ValueError(f"{kind} takes no index: {text!r}")
            return cls(kind)
        if step is None:
            raise ValueError(f"{kind} needs a step index: {text!r}")
        return cls(kind, int(step), int(copy) if copy else 1)


Q = SubsystemLabel("Q")
R = SubsystemLabel("R")


def ancilla(step: int, copy: int = 1) -> SubsystemLabel:
    return SubsystemLabel("A", step, copy)


def detector(step: int, copy: int = 1) -> SubsystemLabel:
    return SubsystemLabel("D", step, copy)


def label_set_key(labels: Iterable[SubsystemLabel]) -> str:
    """Canonical string for a set of labels, e.g. ``"A1,A3"``."""
    return ",".join(str(lab) for lab in sorted(set(labels), key=SubsystemLabel.sort_key))


LabelLike = Union[SubsystemLabel, str]


# ---------------------------------------------------------------- specs


@dataclass(frozen=True)
class PreparationSpec:
    """``mode="pure"`` with amplitudes in the preparation basis, or ``"unprepared"``."""

    mode: str = "unprepared"
    amplitudes: tuple = ()

    def validate(self, d: int) -> None:
        if self.mode == "unprepared":
            return
        if self.mode != "pure":
            raise SpecError(f"unknown preparation mode {self.mode!r}")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (d,):
            raise SpecError(f"pure preparation needs {d} amplitudes, got {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise SpecError("preparation amplitudes must be finite")
        if abs(np.linalg.norm(amps) - 1.0) > 1e-12:
            raise SpecError(f"preparation amplitudes have norm {np.linalg.norm(amps)!r}, expected 1")

    @classmethod
    def pure(cls, amplitudes) -> "PreparationSpec":
        return cls("pure", tuple(complex(a) for a in amplitudes))


@dataclass(frozen=True, eq=False)
class StepSpec:
    """One measurement: the basis change into this step's basis, plus pointer sizes."""

    unitary: np.ndarray
    ancilla_copies: int = 1
    amplify: bool = False
    detector_copies: int = 1

    def validate(self, d: int) -> None:
        u = np.asarray(self.unitary)
        if u.shape != (d, d):
            raise SpecError(f"step unitary must be {d}x{d}, got {u.shape}")
        if not np.all(np.isfinite(u)):
            raise SpecError("step unitary must be finite")
        if not is_unitary(u, 1e-10):
            raise SpecError("step matrix is not unitary within 1e-10")
        if int(self.ancilla_copies) < 1 or int(self.detector_copies) < 1:
            raise SpecError("ancilla_copies and detector_copies must be >= 1")


@dataclass(frozen=True, eq=False)
class ChainSpec:
    d: int
    preparation: PreparationSpec = field(default_factory=PreparationSpec)
    steps: tuple = ()

    @property
    def prepared(self) -> bool:
        return self.preparation.mode == "pure"

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    def unitaries(self) -> list[np.ndarray]:
        return [np.asarray(s.unitary, dtype=np.complex128) for s in self.steps]

    def subsystem_count(self) -> int:
        n = 1 if self.prepared else 2
        for s in self.steps:
            n += s.ancilla_copies + (s.detector_copies if s.amplify else 0)
        return n

    def validate(self) -> None:
        if not isinstance(self.d, (int, np.integer)) or self.d < 2:
            raise SpecError(f"local dimension must be an integer >= 2, got {self.d!r}")
        self.preparation.validate(self.d)
        for s in self.steps:
            s.validate(self.d)
        check_dim(self.d ** self.subsystem_count(), "chain state")

    def with_amplification(self, amplify: bool) -> "ChainSpec":
        steps = tuple(
            StepSpec(s.unitary, s.ancilla_copies, amplify, s.detector_copies) for s in self.steps
        )
        return ChainSpec(self.d, self.preparation, steps)

    # JSON wire format -------------------------------------------------

    def to_dict(self) -> dict:
        prep: dict = {"mode": self.preparation.mode}
        if self.prepared:
            prep["amplitudes"] = [[float(a.real), float(a.imag)] for a in self.preparation.amplitudes]
        steps = []
        for s in self.steps:
            u = np.asarray(s.unitary, dtype=np.complex128)
            steps.append(
                {
                    "unitary": {"matrix": [[[float(z.real), float(z.imag)] for z in row] for row in u]},
                    "ancilla_copies": int(s.ancilla_copies),
                    "amplify": bool(s.amplify),
                    "detector_copies": int(s.detector_copies),
                }
            )
        return {"d": int(self.d), "preparation": prep, "steps": steps}

    @classmethod
    def from_dict(cls, data: dict) -> "ChainSpec":
        try:
            d = data["d"]
            if isinstance(d, bool) or not isinstance(d, int):
                raise SpecError(f"'d' must be an integer, got {d!r}")
            prep_raw = data.get("preparation", {"mode": "unprepared"})
            mode = prep_raw.get("mode")
            if mode == "pure":
                prep = PreparationSpec.pure(_parse_complex_list(prep_raw["amplitudes"]))
            elif mode == "unprepared":
                prep = PreparationSpec()
            else:
                raise SpecError(f"unknown preparation mode {mode!r}")
            steps = []
            for raw in data.get("steps", []):
                steps.append(
                    StepSpec(
                        _parse_unitary(raw.get("unitary"), d),
                        int(raw.get("ancilla_copies", 1)),
                        bool(raw.get("amplify", False)),
                        int(raw.get("detector_copies", 1)),
                    )
                )
        except SpecError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise SpecError(f"malformed chain spec: {exc}") from exc
        spec = cls(d, prep, tuple(steps))
        spec.validate()
        return spec

    @classmethod
    def from_json(cls, text: str) -> "ChainSpec":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise SpecError("chain spec must be a JSON object")
        return cls.from_dict(data)


def _parse_complex_list(raw) -> list[complex]:
    out = []
    for z in raw:
        if isinstance(z, (int, float)) and not isinstance(z, bool):
            out.append(complex(z))
        else:
            re_, im_ = z
            out.append(complex(float(re_), float(im_)))
    return out


def _parse_unitary(raw, d: int) -> np.ndarray:
    if raw is None:
        return np.eye(d, dtype=np.complex128)
    if "qubit_angle" in raw:
        if d != 2:
            raise SpecError("'qubit_angle' is only valid for d = 2")
        return rotation_qubit(float(raw["qubit_angle"]))
    if "matrix" in raw:
        rows = [_parse_complex_list(row) for row in raw["matrix"]]
        return np.array(rows, dtype=np.complex128)
    raise SpecError("step unitary needs 'qubit_angle' or 'matrix'")


def rotation_qubit(theta: float) -> np.ndarray:
    """Real qubit rotation ``[[cos, -sin], [sin, cos]]``."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def qubit_chain(angles: Sequence[float], *, prepared=None, amplify=False,
                ancilla_copies=1, detector_copies=1) -> ChainSpec:
    """Convenience builder for qubit chains given per-step rotation angles.

    ``prepared`` is ``None`` for an unprepared system or a pair of amplitudes.
    ``amplify`` may be a bool or a per-step sequence; copies likewise.
    """
    n = len(angles)
    amp = _per_step(amplify, n)
    acp = _per_step(ancilla_copies, n)
    dcp = _per_step(detector_copies, n)
    steps = tuple(
        StepSpec(rotation_qubit(t), int(acp[i]), bool(amp[i]), int(dcp[i])) for i, t in enumerate(angles)
    )
    prep = PreparationSpec() if prepared is None else PreparationSpec.pure(prepared)
    spec = ChainSpec(2, prep, steps)
    spec.validate()
    return spec


def _per_step(value, n):
    if isinstance(value, (list, tuple)):
        if len(value) != n:
            raise SpecError("per-step sequence length must match the number of steps")
        return list(value)
    return [value] * n


# ---------------------------------------------------------------- states


@dataclass(frozen=True, eq=False)
class PureState:
    """Wavefunction over an ordered registry of d-dimensional subsystems."""

    labels: tuple
    amplitudes: np.ndarray
    d: int

    def __post_init__(self):
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("duplicate subsystem labels")
        if self.amplitudes.shape != (self.d ** len(self.labels),):
            raise ValueError("amplitude vector length does not match the registry")
        self.amplitudes.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.labels)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.d,) * self.n)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def purity(self) -> float:
        """Tr ρ² of the global density matrix ``|ψ⟩⟨ψ|``."""
        return self.norm() ** 4

    def index(self, label: SubsystemLabel) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown subsystem {label}") from None

    def has(self, label: SubsystemLabel) -> bool:
        return label in self.labels

    def resolve(self, spec) -> list[SubsystemLabel]:
        return resolve_labels(self.labels, spec)

    def ancilla_steps(self) -> list[int]:
        return sorted({lab.step for lab in self.labels if lab.kind == "A"})

    def device_labels(self) -> list[SubsystemLabel]:
        return [lab for lab in self.labels if lab.kind in ("A", "D")]


def resolve_labels(registry: Sequence[SubsystemLabel], spec) -> list[SubsystemLabel]:
    """Turn labels, label strings or device names into registry labels.

    A bare device name such as ``"A2"`` or ``"D2"`` expands to every qudit of
    that device; ``"A2.1"`` names a single qudit.
    """
    if isinstance(spec, SubsystemLabel):
        tokens: list = [spec]
    elif isinstance(spec, str):
        tokens = [t for t in spec.replace(" ", "").split(",") if t]
    else:
        tokens = list(spec)
    out: list[SubsystemLabel] = []
    for tok in tokens:
        if isinstance(tok, SubsystemLabel):
            if tok not in registry:
                raise KeyError(f"unknown subsystem {tok}")
            found = [tok]
        else:
            tok = tok.strip()
            exact = "." in tok
            lab = SubsystemLabel.parse(tok)
            if exact or lab.kind in ("Q", "R"):
                if lab not in registry:
                    raise KeyError(f"unknown subsystem {tok}")
                found = [lab]
            else:
                found = [x for x in registry if x.kind == lab.kind and x.step == lab.step]
                if not found:
                    raise KeyError(f"unknown subsystem {tok}")
        for lab in found:
            if lab not in out:
                out.append(lab)
    return out


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density operator over an ordered list of labelled subsystems."""

    labels: tuple
    matrix: np.ndarray
    dims: tuple

    def __post_init__(self):
        if len(self.labels) != len(self.dims):
            raise ValueError("labels and dims must have equal length")
        side = int(np.prod(self.dims)) if self.dims else 1
        if self.matrix.shape != (side, side):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match dims {self.dims}")
        self.matrix.setflags(write=False)

    @classmethod
    def uniform(cls, labels, matrix, d: int) -> "DensityMatrix":
        return cls(tuple(labels), np.asarray(matrix, dtype=np.complex128), (d,) * len(labels))

    @property
    def n(self) -> int:
        return len(self.labels)

    def tensor(self) -> np.ndarray:
        return self.matrix.reshape(self.dims + self.dims)

    def index(self, label: SubsystemLabel) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown subsystem {label}") from None

    def resolve(self, spec) -> list[SubsystemLabel]:
        return resolve_labels(self.labels, spec)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).reshape(self.dims)

    def max_offdiag(self) -> float:
        m = self.matrix
        return float(np.max(np.abs(m - np.diag(np.diag(m))), initial=0.0))

    def is_valid(self, tol: float = 1e-10) -> bool:
        if not is_hermitian(self.matrix, tol):
            return False
        if abs(self.trace() - 1.0) > tol:
            return False
        return bool(eigvalsh(self.matrix)[-1] >= -tol)

    def partial_trace(self, keep) -> "DensityMatrix":
        """Reduce to ``keep`` (in the given order), tracing out the rest."""
        keep = self.resolve(keep)
        if not keep:
            raise ValueError("keep must name at least one subsystem")
        kidx = [self.index(lab) for lab in keep]
        n = self.n
        letters = _letters(2 * n)
        row = letters[:n]
        col = list(letters[n:])
        traced = [i for i in range(n) if i not in kidx]
        for i in traced:
            col[i] = row[i]
        out = "".join(row[i] for i in kidx) + "".join(col[i] for i in kidx)
        t = np.einsum(f"{''.join(row)}{''.join(col)}->{out}", self.tensor())
        kd = tuple(self.dims[i] for i in kidx)
        side = int(np.prod(kd))
        return DensityMatrix(tuple(keep), t.reshape(side, side).copy(), kd)

    def permuted(self, order) -> "DensityMatrix":
        order = self.resolve(order)
        if sorted(map(self.index, order)) != list(range(self.n)):
            raise ValueError("permutation must name every subsystem once")
        return self.partial_trace(order)


def _letters(k: int) -> str:
    alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if k > len(alphabet):
        raise ValueError("too many subsystems for einsum")
    return alphabet[:k]


# ------------------------------------------------------------ operations


def prepare(spec: ChainSpec) -> PureState:
    """Initial state: ``Q`` alone (pure) or ``Q`` maximally entangled with ``R``."""
    spec.preparation.validate(spec.d)
    d = spec.d
    if spec.prepared:
        amps = np.array(spec.preparation.amplitudes, dtype=np.complex128)
        return PureState((Q,), amps, d)
    check_dim(d * d, "chain state")
    amps = np.eye(d, dtype=np.complex128).reshape(-1) / math.sqrt(d)
    return PureState((Q, R), amps, d)


def _copy_axis(t: np.ndarray, axis: int, d: int) -> np.ndarray:
    """Append a new last axis perfectly correlated with ``axis``."""
    out = np.zeros(t.shape + (d,), dtype=np.complex128)
    for x in range(d):
        src = [slice(None)] * t.ndim
        src[axis] = x
        dst = src + [x]
        out[tuple(dst)] = t[tuple(src)]
    return out


def _check_norm(state: PureState) -> PureState:
    if abs(state.norm() - 1.0) > NORM_TOL:
        raise NumericError(f"state norm drifted to {state.norm()!r}")
    return state


def apply_measurement(state: PureState, step: StepSpec, step_index: int) -> PureState:
    """Rotate ``Q`` into the step's basis and entangle a fresh ancilla with it.

    With ``U[x_old, x_new] = ⟨x̃_new|x̃_old⟩`` the new amplitude for
    ``Q = x_new`` is ``Σ_old ψ[x_old] U[x_old, x_new]``; the ancilla (and its
    pointer copies) then copies ``x_new``.
    """
    d = state.d
    step.validate(d)
    existing = state.ancilla_steps()
    expected = (existing[-1] + 1) if existing else 1
    if step_index != expected:
        raise ValueError(f"measurement steps must be consecutive: expected {expected}, got {step_index}")
    copies = int(step.ancilla_copies)
    check_dim(d ** (state.n + copies), "chain state")
    t = state.tensor()
    qa = state.index(Q)
    t = np.moveaxis(np.tensordot(t, np.asarray(step.unitary, dtype=np.complex128), axes=([qa], [0])), -1, qa)
    labels = list(state.labels)
    for k in range(1, copies + 1):
        t = _copy_axis(t, qa, d)
        labels.append(ancilla(step_index, k))
    return _check_norm(PureState(tuple(labels), t.reshape(-1), d))


def amplify_step(state: PureState, step_index: int, detector_copies: int = 1) -> PureState:
    """Record ancilla ``A_step_index`` onto detector qudits in its own basis."""
    d = state.d
    a = ancilla(step_index)
    if not state.has(a):
        raise KeyError(f"no ancilla {a} to amplify")
    if state.has(detector(step_index)):
        raise ValueError(f"step {step_index} is already amplified")
    if detector_copies < 1:
        raise ValueError("detector_copies must be >= 1")
    check_dim(d ** (state.n + detector_copies), "chain state")
    t = state.tensor()
    ax = state.index(a)
    labels = list(state.labels)
    for k in range(1, detector_copies + 1):
        t = _copy_axis(t, ax, d)
        labels.append(detector(step_index, k))
    return _check_norm(PureState(tuple(labels), t.reshape(-1), d))


def evolve(spec: ChainSpec) -> Iterator[PureState]:
    """Yield the prepared state and the state after every measurement/amplification."""
    spec.validate()
    state = prepare(spec)
    yield state
    for i, step in enumerate(spec.steps, start=1):
        state = apply_measurement(state, step, i)
        yield state
        if step.amplify:
            state = amplify_step(state, i, int(step.detector_copies))
            yield state


def run_chain(spec: ChainSpec) -> PureState:
    state = None
    for state in evolve(spec):
        pass
    return state


def _schmidt_matrix(state: PureState, keep: Sequence[SubsystemLabel]) -> np.ndarray:
    kidx = [state.index(lab) for lab in keep]
    rest = [i for i in range(state.n) if i not in kidx]
    t = np.transpose(state.tensor(), kidx + rest)
    return t.reshape(state.d ** len(kidx), -1)


def reduced_density(state: PureState, keep) -> DensityMatrix:
    """Partial trace of ``|ψ⟩⟨ψ|`` onto ``keep`` (kept in the given order)."""
    keep = state.resolve(keep)
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    check_dim(state.d ** len(keep), "reduced density matrix")
    m = _schmidt_matrix(state, keep)
    rho = m @ m.conj().T
    return DensityMatrix.uniform(keep, rho, state.d)


def dephase(rho: DensityMatrix, target) -> DensityMatrix:
    """Completely dephasing channel ``Σ_x P_x ρ P_x`` on ``target``'s qudits."""
    targets = rho.resolve(target)
    t = rho.tensor().copy()
    n = rho.n
    for lab in targets:
        i = rho.index(lab)
        dim = rho.dims[i]
        mask_shape = [1] * (2 * n)
        mask_shape[i] = dim
        mask_shape[n + i] = dim
        mask = np.eye(dim, dtype=bool).reshape(mask_shape)
        t = np.where(mask, t, 0.0)
    return DensityMatrix(rho.labels, t.reshape(rho.matrix.shape), rho.dims)


def condition_on_outcome(rho: DensityMatrix, target, outcome: int):
    """Post-select ``target = outcome``; returns ``(state of the rest, probability)``."""
    targets = rho.resolve(target)
    if len(targets) != 1:
        raise ValueError("condition on exactly one qudit")
    lab = targets[0]
    i = rho.index(lab)
    dim = rho.dims[i]
    if not 0 <= outcome < dim:
        raise ValueError(f"outcome {outcome} out of range for dimension {dim}")
    if rho.n == 1:
        raise ValueError("nothing left after conditioning")
    t = rho.tensor()
    n = rho.n
    sl = [slice(None)] * (2 * n)
    sl[i] = outcome
    sl[n + i] = outcome
    block = t[tuple(sl)]
    dims = rho.dims[:i] + rho.dims[i + 1:]
    side = int(np.prod(dims))
    block = block.reshape(side, side)
    p = float(np.real(np.trace(block)))
    if p <= ZERO_PROB:
        raise ValueError(f"outcome {outcome} of {lab} has probability {p:.3e}")
    labels = rho.labels[:i] + rho.labels[i + 1:]
    return DensityMatrix(labels, block / p, dims), p


def trace_pointer_components(state: PureState, drop, keep=None) -> DensityMatrix:
    """Lose some pointer/detector qudits and look at what remains.

    ``keep`` defaults to every ancilla and detector qudit not dropped, so the
    unobserved ``Q`` and ``R`` are traced as well.
    """
    drop = state.resolve(drop)
    for lab in drop:
        if lab.kind not in ("A", "D"):
            raise ValueError(f"{lab} is not a pointer or detector qudit")
    if keep is None:
        keep = [lab for lab in state.device_labels() if lab not in drop]
    else:
        keep = [lab for lab in state.resolve(keep) if lab not in drop]
    return reduced_density(state, keep)


def schmidt_spectrum(state: PureState, keep) -> np.ndarray:
    """Eigenvalues of the reduced state on ``keep``, via the smaller Gram matrix."""
    keep = state.resolve(keep)
    m = _schmidt_matrix(state, keep)
    g = m @ m.conj().T if m.shape[0] <= m.shape[1] else m.T @ m.conj()
    return eigvalsh(g)


def purify(rho: DensityMatrix, label: SubsystemLabel | None = None) -> PureState:
    """Purify a diagonal single-qudit state as ``Σ √p_x |x̃⟩|x⟩``."""
    if rho.n != 1:
        raise ValueError("purify expects a single-qudit density matrix")
    if rho.max_offdiag() > 1e-12:
        raise ValueError("purify expects a state diagonal in its basis")
    d = rho.dims[0]
    p = np.clip(rho.diagonal(), 0.0, None)
    amps = np.zeros((d, d), dtype=np.complex128)
    amps[np.arange(d), np.arange(d)] = np.sqrt(p)
    return PureState((Q, label or ancilla(1)), amps.reshape(-1), d)


def random_chain(d: int, n_steps: int, *, prepared: bool, amplify: bool = False, seed=None) -> ChainSpec:
    """Chain with Haar-random step unitaries and (if prepared) a Haar-random start.

    ``seed`` may be an integer, a ``SeedSequence`` or a ``Generator``.
    """
    rng = np.random.default_rng(seed)
    prep = PreparationSpec.pure(random_state_vector(d, rng)) if prepared else PreparationSpec()
    steps = tuple(StepSpec(random_unitary(d, rng), 1, amplify, 1) for _ in range(n_steps))
    spec = ChainSpec(d, prep, steps)
    spec.validate()
    return spec


def random_corpus(trials: int, seed: int = 42, d_values=(2, 3), min_steps: int = 1, max_steps: int = 4,
                  prepared: bool | None = None, amplify: bool = False) -> list[ChainSpec]:
    """Deterministic list of random chains.

    Chain ``k`` draws from child ``k`` of ``SeedSequence(seed)``, so the list
    does not depend on evaluation order. Dimensions cycle through
    ``d_values``; with ``prepared=None`` preparations alternate starting
    with a prepared chain.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 1 <= min_steps <= max_steps:
        raise ValueError("need 1 <= min_steps <= max_steps")
    out = []
    for k, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        rng = np.random.default_rng(child)
        d = int(d_values[k % len(d_values)])
        n = int(rng.integers(min_steps, max_steps + 1))
        prep = (k % 2 == 0) if prepared is None else prepared
        out.append(random_chain(d, n, prepared=prep, amplify=amplify, seed=rng))
    return out
