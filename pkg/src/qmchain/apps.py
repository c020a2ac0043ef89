"""Runnable experiments built on the chain simulator.

Quantum Zeno and anti-Zeno curves for a qubit, the polarization-tagged
double slit with a rotated polarization measurement (quantum eraser), and
state preparation by conditioning on a detector outcome.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chain import (
    ZERO_PROB,
    ChainSpec,
    DensityMatrix,
    PreparationSpec,
    PureState,
    Q,
    StepSpec,
    ancilla,
    condition_on_outcome,
    detector,
    purify,
    qubit_chain,
    reduced_density,
    rotation_qubit,
    run_chain,
)
from .entropy import joint_entropy, shannon

ZENO_MODES = ("deterministic_rotation", "random_angles")
MC_CHUNK = 8192


# ------------------------------------------------------------------ Zeno


@dataclass(frozen=True)
class ZenoConfig:
    """``p`` is the initial probability of ``|0>``; ``n`` the number of measurements."""

    p: float
    n: int
    mode: str = "deterministic_rotation"
    seed: int = 0
    trials: int = 10_000

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0) or math.isnan(self.p):
            raise ValueError(f"p must lie in [0, 1], got {self.p!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")
        if self.mode not in ZENO_MODES:
            raise ValueError(f"mode must be one of {ZENO_MODES}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def zeno_angle(n: int) -> float:
    """Rotation per step so that ``n`` steps add up to a quarter turn of the basis pair."""
    return math.pi / (4 * n)


def zeno_prob(p: float, n: int) -> float:
    """Probability of ``|0>`` after ``n`` measurements each rotated by ``π/(4n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 0.5 + (p - 0.5) * math.cos(math.pi / (2 * n)) ** n


def zeno_chain(p: float, n: int, angle: float | None = None, amplify: bool = True) -> ChainSpec:
    """Qubit chain for the Zeno setup.

    Step 1 is the preparing detector in the initial basis, applied to the
    amplitudes ``(√p, √(1-p))``, which leaves ``Q`` in the mixture
    ``p|0><0| + (1-p)|1><1|``. Steps ``2 .. n+1`` are each rotated by
    ``angle`` (default ``π/(4n)``) relative to the previous one.
    """
    theta = zeno_angle(n) if angle is None else angle
    return qubit_chain([0.0] + [theta] * n, prepared=(math.sqrt(p), math.sqrt(1.0 - p)),
                       amplify=amplify)


def zeno_simulated(p: float, n: int, angle: float | None = None) -> float:
    """Probability of ``|0>`` at the last of ``n`` rotated detectors, from the wavefunction."""
    state = run_chain(zeno_chain(p, n, angle))
    return float(np.real(reduced_density(state, f"D{n + 1}").matrix[0, 0]))


def anti_zeno_expectation(n: int) -> float:
    """``E[Π cos 2θ_k] = (2/π)^n`` for independent ``θ_k ~ U[0, π/4]``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (2.0 / math.pi) ** n


@dataclass(frozen=True)
class MonteCarloResult:
    n: int
    trials: int
    mean: float
    stderr: float
    analytic: float

    def z_score(self) -> float:
        return (self.mean - self.analytic) / self.stderr if self.stderr > 0 else 0.0


def _angle_streams(trials: int, n: int, seed: int):
    """Yield ``(chunk, n)`` angle blocks from counter-based substreams.

    Trials are cut into fixed chunks and each chunk gets its own Philox
    stream spawned from the seed, so any partition of the work over
    workers reproduces the same numbers.
    """
    n_chunks = -(-trials // MC_CHUNK)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    for k, child in enumerate(children):
        size = min(MC_CHUNK, trials - k * MC_CHUNK)
        gen = np.random.Generator(np.random.Philox(child))
        yield gen.uniform(0.0, math.pi / 4, size=(size, n))


def random_angles(trials: int, n: int, seed: int) -> np.ndarray:
    return np.concatenate(list(_angle_streams(trials, n, seed)), axis=0)


def anti_zeno_monte_carlo(n: int, trials: int = 100_000, seed: int = 0) -> MonteCarloResult:
    """Sample mean and standard error of ``Π_k cos 2θ_k``."""
    if n < 1 or trials < 2:
        raise ValueError("need n >= 1 and trials >= 2")
    samples = np.prod(np.cos(2.0 * random_angles(trials, n, seed)), axis=1)
    mean = float(np.mean(samples))
    stderr = float(np.std(samples, ddof=1) / math.sqrt(trials))
    return MonteCarloResult(n, trials, mean, stderr, anti_zeno_expectation(n))


@dataclass(frozen=True)
class ZenoRow:
    step: int
    q: float
    entropy: float  # dits (bits for a qubit)


def zeno_curve(config: ZenoConfig) -> list[ZenoRow]:
    """``q`` and detector entropy ``H[q]`` after each of the ``n`` measurements.

    Row 0 is the preparation. In random mode ``q`` is averaged over
    ``trials`` angle draws and the entropy is that of the averaged law.
    """
    p, n = config.p, int(config.n)
    rows = [ZenoRow(0, p, shannon([p, 1 - p], 2))]
    if config.mode == "deterministic_rotation":
        c = math.cos(2 * zeno_angle(n))
        for k in range(1, n + 1):
            q = 0.5 + (p - 0.5) * c**k
            rows.append(ZenoRow(k, q, shannon([q, 1 - q], 2)))
        return rows
    factors = np.cumprod(np.cos(2.0 * random_angles(config.trials, n, config.seed)), axis=1)
    for k in range(1, n + 1):
        q = 0.5 + (p - 0.5) * float(np.mean(factors[:, k - 1]))
        rows.append(ZenoRow(k, q, shannon([q, 1 - q], 2)))
    return rows


def zeno_detector_entropies(p_grid, angle: float = math.pi / 8, n_detectors: int = 3) -> np.ndarray:
    """Simulated ``S(D_1) ... S(D_k)`` over a grid of ``p``.

    ``D_1`` is the preparing detector (no rotation); each later detector is
    rotated by ``angle`` relative to its predecessor. Returns shape
    ``(len(p_grid), n_detectors)``.
    """
    out = []
    for p in p_grid:
        spec = qubit_chain([0.0] + [angle] * (n_detectors - 1),
                           prepared=(math.sqrt(p), math.sqrt(1.0 - p)), amplify=True)
        st = run_chain(spec)
        out.append([joint_entropy(st, f"D{k}") for k in range(1, n_detectors + 1)])
    return np.array(out)


# ---------------------------------------------------------------- eraser


@dataclass(frozen=True, eq=False)
class ScreenPattern:
    """Normalized screen intensity.

    ``reference`` is the unconditioned pattern of the same setup and is
    what :func:`visibility` divides by to strip the slit envelope.
    """

    positions: np.ndarray
    intensity: np.ndarray
    conditioned_on: tuple | None = None
    probability: float = 1.0
    reference: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if np.any(self.intensity < -1e-15):
            raise ValueError("intensity must be non-negative")
        if abs(float(np.sum(self.intensity)) - 1.0) > 1e-12:
            raise ValueError("intensity must sum to 1")


def slit_amplitudes(n_x: int, period: float = 2.0, separation: float = 0.0):
    """Screen amplitudes ``ψ_1, ψ_2`` of the two slits.

    Each is a Gaussian envelope (FWHM ``n_x/4``) times ``exp(±iκx)`` with
    ``κ = π/period`` on integer positions centred on the screen, so the
    cross term varies as ``cos(2πx/period)``. With the default period of 2
    pixels every pixel sits on a bright or dark fringe centre. A positive
    ``separation`` shifts the envelopes apart by that many pixels.
    """
    if n_x < 8:
        raise ValueError("n_x must be >= 8")
    if period <= 0:
        raise ValueError("period must be positive")
    x = np.arange(n_x) - n_x // 2
    sigma = (n_x / 4) / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    kappa = math.pi / period
    env1 = np.exp(-((x + separation / 2) ** 2) / (4 * sigma**2))
    env2 = np.exp(-((x - separation / 2) ** 2) / (4 * sigma**2))
    psi1 = env1 * np.exp(1j * kappa * x)
    psi2 = env2 * np.exp(-1j * kappa * x)
    return x, psi1 / np.linalg.norm(psi1), psi2 / np.linalg.norm(psi2)


def _eraser_weights(n_x, theta, period, separation):
    x, psi1, psi2 = slit_amplitudes(n_x, period, separation)
    u = rotation_qubit(theta)
    # w_i(x) = |U_1i ψ1(x) + U_0i ψ2(x)|^2 / 2, unnormalized joint with outcome i
    w = [np.abs(u[1, i] * psi1 + u[0, i] * psi2) ** 2 / 2.0 for i in (0, 1)]
    return x, w


def eraser_pattern(n_x: int, theta: float, outcome: int | None = None, *,
                   period: float = 2.0, separation: float = 0.0) -> ScreenPattern:
    """Screen pattern with the polarization measured at angle ``theta``.

    Without ``outcome`` this is the unconditioned pattern ``(|ψ1|²+|ψ2|²)/2``;
    with it, the pattern given that the polarization detector reported
    ``outcome``.
    """
    x, w = _eraser_weights(n_x, theta, period, separation)
    total = w[0] + w[1]
    ref = total / np.sum(total)
    if outcome is None:
        return ScreenPattern(x, ref, None, 1.0, ref)
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    p = float(np.sum(w[outcome]))
    if p <= ZERO_PROB:
        raise ValueError(f"polarization outcome {outcome} has probability {p:.3e}")
    return ScreenPattern(x, w[outcome] / p, ("D_P", outcome), p, ref)


def eraser_state(n_x: int, theta: float, *, period: float = 2.0, separation: float = 0.0) -> DensityMatrix:
    """Joint screen/polarization density matrix after the rotated measurement.

    Built from the tagged state ``(|h>ψ1 + |v>ψ2)/√2`` by changing the
    polarization coordinates with the same rule the chain simulator uses
    (``ψ'[new] = Σ_old ψ[old] U[old, new]``, with ``v`` as row 0 and ``h``
    as row 1). The screen is labelled ``Q`` and the polarization detector
    ``D1``.
    """
    _, psi1, psi2 = slit_amplitudes(n_x, period, separation)
    tagged = np.zeros((n_x, 2), dtype=np.complex128)
    tagged[:, 1] = psi1 / math.sqrt(2.0)  # h
    tagged[:, 0] = psi2 / math.sqrt(2.0)  # v
    rotated = tagged @ rotation_qubit(theta)
    vec = rotated.reshape(-1)
    return DensityMatrix((Q, detector(1)), np.outer(vec, vec.conj()), (n_x, 2))


def eraser_pattern_from_state(n_x: int, theta: float, outcome: int | None = None, **kw) -> np.ndarray:
    """Same pattern as :func:`eraser_pattern`, via partial trace / conditioning."""
    rho = eraser_state(n_x, theta, **kw)
    if outcome is None:
        return np.real(np.diag(rho.partial_trace("Q").matrix)).copy()
    cond, _ = condition_on_outcome(rho, "D1", outcome)
    return np.real(np.diag(cond.matrix)).copy()


def visibility(pattern: ScreenPattern, region: float = 0.5) -> float:
    """``(I_max - I_min) / (I_max + I_min)`` over the central part of the screen.

    The intensity is first divided by the unconditioned reference pattern
    (when present) so the slit envelope does not bias the extrema.
    ``region`` is the fraction of the screen width kept around the centre.
    """
    i = np.asarray(pattern.intensity, dtype=float)
    if not np.any(i > 0):
        raise ValueError("pattern is identically zero")
    n_x = len(i)
    half = max(1, int(round(region * n_x / 2)))
    centre = n_x // 2
    sl = slice(max(0, centre - half), min(n_x, centre + half))
    seg = i[sl]
    if pattern.reference is not None:
        ref = np.asarray(pattern.reference, dtype=float)[sl]
        keep = ref > 1e-300
        seg = seg[keep] / ref[keep]
    hi, lo = float(np.max(seg)), float(np.min(seg))
    if hi + lo <= 0:
        raise ValueError("pattern is identically zero in the visibility region")
    return (hi - lo) / (hi + lo)


def fringe_overlap(a: ScreenPattern, b: ScreenPattern) -> float:
    """Integrated pointwise minimum of two normalized patterns (0 = disjoint, 1 = equal)."""
    return float(np.sum(np.minimum(a.intensity, b.intensity)))


# ----------------------------------------------------------- preparation


def preparation_chain(basis, d: int | None = None) -> ChainSpec:
    """Unprepared system measured and amplified twice, the second time in ``basis``."""
    u = np.asarray(basis, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("basis must be a square matrix")
    d = d or u.shape[0]
    steps = (StepSpec(np.eye(d, dtype=np.complex128), 1, True, 1), StepSpec(u, 1, True, 1))
    spec = ChainSpec(d, PreparationSpec(), steps)
    spec.validate()
    return spec


def conditional_blocks(rho: DensityMatrix, given) -> dict[int, tuple[DensityMatrix, float]]:
    """Blocks of the conditional operator ``ρ(X|G) = ρ(XG)(ρ(G)^{-1} ⊗ 1)``.

    ``rho`` must be block-diagonal in ``given`` (as for a detector). Each
    outcome ``g`` with probability above the zero floor maps to the
    normalized block ``ρ^g_X`` and its probability; no matrix is inverted.
    """
    target = rho.resolve(given)
    if len(target) != 1:
        raise ValueError("condition on exactly one subsystem")
    g = target[0]
    rest = [lab for lab in rho.labels if lab != g]
    ordered = rho.permuted([g] + rest)
    dg = ordered.dims[0]
    side = ordered.matrix.shape[0] // dg
    blocks = ordered.matrix.reshape(dg, side, dg, side)
    out = {}
    for x in range(dg):
        block = blocks[x, :, x, :]
        p = float(np.real(np.trace(block)))
        if p <= ZERO_PROB:
            continue
        out[x] = (DensityMatrix(tuple(rest), block / p, ordered.dims[1:]), p)
    return out


def conditional_operator(rho: DensityMatrix, given) -> np.ndarray:
    """``Σ_g ρ^g_X ⊗ |g><g|`` as a matrix over ``(rest..., given)``."""
    blocks = conditional_blocks(rho, given)
    g = rho.resolve(given)[0]
    dg = rho.dims[rho.index(g)]
    rest_dims = [rho.dims[i] for i, lab in enumerate(rho.labels) if lab != g]
    side = int(np.prod(rest_dims))
    op = np.zeros((side * dg, side * dg), dtype=np.complex128)
    for x, (block, _) in blocks.items():
        proj = np.zeros((dg, dg))
        proj[x, x] = 1.0
        op += np.kron(block.matrix, proj)
    return op


def prepare_via_measurement(basis, outcome: int) -> DensityMatrix:
    """State of ``Q`` given that the first detector read ``outcome``.

    Simulates the unprepared two-step amplified chain whose second step is
    ``basis`` and reads the ``outcome`` block of the conditional operator on
    ``ρ(Q D_1)``. The result is expressed in the second step's basis.
    """
    spec = preparation_chain(basis)
    if not 0 <= outcome < spec.d:
        raise ValueError(f"outcome must lie in 0..{spec.d - 1}")
    state = run_chain(spec)
    rho = reduced_density(state, "Q,D1")
    blocks = conditional_blocks(rho, "D1")
    if outcome not in blocks:
        raise ValueError(f"outcome {outcome} has zero probability")
    return blocks[outcome][0]


def prepare_via_projection(basis, outcome: int) -> DensityMatrix:
    """Same state as :func:`prepare_via_measurement`, via ``condition_on_outcome``."""
    state = run_chain(preparation_chain(basis))
    cond, _ = condition_on_outcome(reduced_density(state, "Q,D1"), "D1", outcome)
    return cond


def purified_preparation(rho: DensityMatrix) -> PureState:
    """``Σ √p_x |x̃>|x>`` with the second factor labelled as ancilla ``A2``."""
    return purify(rho, ancilla(2))


__all__ = [
    "MC_CHUNK",
    "MonteCarloResult",
    "ScreenPattern",
    "ZENO_MODES",
    "ZenoConfig",
    "ZenoRow",
    "anti_zeno_expectation",
    "anti_zeno_monte_carlo",
    "conditional_blocks",
    "conditional_operator",
    "eraser_pattern",
    "eraser_pattern_from_state",
    "eraser_state",
    "fringe_overlap",
    "prepare_via_measurement",
    "prepare_via_projection",
    "preparation_chain",
    "purified_preparation",
    "random_angles",
    "slit_amplitudes",
    "visibility",
    "zeno_angle",
    "zeno_chain",
    "zeno_curve",
    "zeno_detector_entropies",
    "zeno_prob",
    "zeno_simulated",
]
