"""Von Neumann entropies and their Venn-diagram combinations, in dits.

Every function accepts either a :class:`PureState` or a
:class:`DensityMatrix` together with label sets (labels, label strings, or
device names such as ``"A2"``). Logarithms are taken to base ``d``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chain import (
    DensityMatrix,
    PureState,
    SubsystemLabel,
    label_set_key,
    random_corpus,
    run_chain,
    schmidt_spectrum,
)
from .linalg import eigvalsh

EIG_CLIP = 1e-12


def shannon(p, base: float) -> float:
    """Shannon entropy of a probability array; entries below the clip count as zero."""
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > EIG_CLIP]
    return float(-np.sum(p * np.log(p)) / math.log(base))


def spectrum_entropy(eigenvalues, base: float) -> float:
    return max(shannon(eigenvalues, base), 0.0) if len(eigenvalues) else 0.0


def entropy(rho, d: int | None = None) -> float:
    """S(ρ) = -Tr ρ log_d ρ for a density matrix (DensityMatrix or ndarray)."""
    if isinstance(rho, DensityMatrix):
        base = d or rho.dims[0]
        m = rho.matrix
    else:
        m = np.asarray(rho, dtype=np.complex128)
        if d is None:
            raise ValueError("entropy of a bare matrix needs the base d")
        base = d
    return spectrum_entropy(eigvalsh(m), base)


def _resolve(obj, labels) -> list[SubsystemLabel]:
    if labels is None:
        return list(obj.labels)
    return obj.resolve(labels)


def _base(obj) -> int:
    return obj.d if isinstance(obj, PureState) else obj.dims[0]


def joint_entropy(obj, *groups, base: int | None = None) -> float:
    """S of the union of the label groups; the empty set has entropy 0."""
    labels: list[SubsystemLabel] = []
    for g in groups:
        for lab in _resolve(obj, g):
            if lab not in labels:
                labels.append(lab)
    if not labels:
        return 0.0
    base = base or _base(obj)
    if isinstance(obj, PureState):
        if len(labels) == obj.n:
            return 0.0
        return spectrum_entropy(schmidt_spectrum(obj, labels), base)
    if len(labels) == obj.n:
        return entropy(obj, base)
    return entropy(obj.partial_trace(labels), base)


def _disjoint(obj, *groups) -> list[list[SubsystemLabel]]:
    resolved = [_resolve(obj, g) for g in groups]
    seen: set = set()
    for g in resolved:
        if seen & set(g):
            raise ValueError("label sets must be disjoint")
        seen |= set(g)
    return resolved


def conditional_entropy(obj, x, y, base: int | None = None) -> float:
    """S(X|Y) = S(XY) - S(Y). Negative values signal entanglement."""
    x, y = _disjoint(obj, x, y)
    return joint_entropy(obj, x, y, base=base) - joint_entropy(obj, y, base=base)


def mutual_entropy(obj, x, y, base: int | None = None) -> float:
    """S(X:Y) = S(X) + S(Y) - S(XY)."""
    x, y = _disjoint(obj, x, y)
    return (joint_entropy(obj, x, base=base) + joint_entropy(obj, y, base=base)
            - joint_entropy(obj, x, y, base=base))


def conditional_mutual(obj, x, y, z, base: int | None = None) -> float:
    """S(X:Y|Z) = S(XZ) + S(YZ) - S(Z) - S(XYZ)."""
    x, y, z = _disjoint(obj, x, y, z)
    s = lambda *g: joint_entropy(obj, *g, base=base)  # noqa: E731
    return s(x, z) + s(y, z) - s(z) - s(x, y, z)


def ternary_mutual(obj, x, y, z, base: int | None = None) -> float:
    """S(X:Y:Z) = S(X:Y) - S(X:Y|Z)."""
    return mutual_entropy(obj, x, y, base) - conditional_mutual(obj, x, y, z, base)


def coherence_rel_ent(rho: DensityMatrix, base: int | None = None) -> float:
    """Relative entropy of coherence S(ρ_diag) - S(ρ) in the product basis."""
    base = base or rho.dims[0]
    diag = np.real(np.diag(rho.matrix))
    return shannon(diag, base) - entropy(rho, base)


@dataclass(frozen=True)
class VennDiagram3:
    """Seven regions of a three-set entropy Venn diagram."""

    labels: tuple  # canonical keys of X, Y, Z
    x_given_yz: float
    y_given_xz: float
    z_given_xy: float
    xy_given_z: float
    xz_given_y: float
    yz_given_x: float
    xyz: float
    joint: float

    def regions(self) -> dict:
        x, y, z = self.labels
        return {
            f"S({x}|{y},{z})": self.x_given_yz,
            f"S({y}|{x},{z})": self.y_given_xz,
            f"S({z}|{x},{y})": self.z_given_xy,
            f"S({x}:{y}|{z})": self.xy_given_z,
            f"S({x}:{z}|{y})": self.xz_given_y,
            f"S({y}:{z}|{x})": self.yz_given_x,
            f"S({x}:{y}:{z})": self.xyz,
        }

    def total(self) -> float:
        return sum(self.regions().values())

    def to_dict(self, scale: float = 1.0) -> dict:
        out = {k: v * scale for k, v in self.regions().items()}
        out["joint"] = self.joint * scale
        return out


def venn3(obj, x, y, z, base: int | None = None) -> VennDiagram3:
    x, y, z = _disjoint(obj, x, y, z)
    s = lambda *g: joint_entropy(obj, *g, base=base)  # noqa: E731
    sx, sy, sz = s(x), s(y), s(z)
    sxy, sxz, syz = s(x, y), s(x, z), s(y, z)
    sxyz = s(x, y, z)
    xy_z = sxz + syz - sz - sxyz
    xz_y = sxy + syz - sy - sxyz
    yz_x = sxy + sxz - sx - sxyz
    return VennDiagram3(
        labels=(label_set_key(x), label_set_key(y), label_set_key(z)),
        x_given_yz=sxyz - syz,
        y_given_xz=sxyz - sxz,
        z_given_xy=sxyz - sxy,
        xy_given_z=xy_z,
        xz_given_y=xz_y,
        yz_given_x=yz_x,
        xyz=(sx + sy - sxy) - xy_z,
        joint=sxyz,
    )


def sigma_n(state: PureState, n: int) -> float:
    """Σ_n = S(A_{n-1}|A_n) for an unamplified pair of last ancillae."""
    steps = state.ancilla_steps()
    if n < 2 or n not in steps or (n - 1) not in steps:
        raise ValueError(f"Σ_n needs ancillae A{n - 1} and A{n}")
    for k in (n - 1, n):
        if any(lab.kind == "D" and lab.step == k for lab in state.labels):
            raise ValueError(f"Σ_n is defined on unamplified ancillae; step {k} is amplified")
    return conditional_entropy(state, f"A{n - 1}", f"A{n}")


@dataclass
class EntropyReport:
    """Entropies (dits) keyed by canonical label-set strings."""

    base: int
    entries: dict = field(default_factory=dict)
    derived: dict = field(default_factory=dict)

    def add(self, obj, labels) -> float:
        labels = _resolve(obj, labels)
        value = joint_entropy(obj, labels, base=self.base)
        self.entries[label_set_key(labels)] = value
        return value

    def to_dict(self, bits: bool = False) -> dict:
        to_bits = math.log2(self.base)
        scale = to_bits if bits else 1.0
        return {
            "base": self.base,
            "unit": "bits" if bits else "dits",
            "entries": {k: v * scale for k, v in sorted(self.entries.items())},
            "derived": {k: v * scale for k, v in sorted(self.derived.items())},
            "bits": {k: v * to_bits for k, v in sorted(self.entries.items())},
        }


def entropy_report(obj, groups, base: int | None = None) -> EntropyReport:
    rep = EntropyReport(base or _base(obj))
    for g in groups:
        rep.add(obj, g)
    return rep


# ------------------------------------------------------------ theorems

THEOREM_TOL = 1e-9


class SettingError(ValueError):
    """A theorem was asked of a chain outside its hypotheses."""


@dataclass(frozen=True)
class TheoremSetting:
    preparation: str  # "prepared", "unprepared" or "any"
    min_steps: int
    kind: str  # "equality", "inequality" or "interval"
    amplified: bool | None  # corpus hint: which chain version the claim is about
    statement: str


THEOREMS = {
    "T1": TheoremSetting("prepared", 2, "equality", False,
                         "S(A1..Ak) = S(Ak) for every prefix of a prepared chain"),
    "T2": TheoremSetting("unprepared", 3, "equality", False,
                         "S(Aa..Ab) = S(Aa Ab) for every window of length >= 3"),
    "T3": TheoremSetting("any", 3, "equality", True,
                         "S(Dj|Dj-1..Di) = S(Dj|Dj-1) for every window"),
    "C1": TheoremSetting("any", 3, "equality", True,
                         "S(Di:Dj|Di+1..Dj-1) = 0 for every window"),
    "L1": TheoremSetting("any", 1, "equality", None, "S(Q) = S(An)"),
    "L2": TheoremSetting("any", 1, "equality", None, "S(Ai) = S(Di) for every step"),
    "T4": TheoremSetting("prepared", 2, "inequality", None, "S(Q:Dn) <= S(Q:An)"),
    "T4_closed": TheoremSetting("prepared", 2, "equality", None,
                                "S(Q:An) = 2 Sn - Sn-1 and S(Q:Dn) = Sn"),
    "T5": TheoremSetting("any", 2, "inequality", None, "S(Dn:Dn-1) <= S(An:An-1)"),
    "T6": TheoremSetting("prepared", 2, "inequality", None,
                         "S(Dn:Dn-1..D1) <= S(An:An-1..A1) - Sigma_n"),
    "C2": TheoremSetting("prepared", 2, "inequality", None,
                         "S(Dn|Dn-1..D1) >= S(An|An-1..A1) + Sigma_n"),
    "NM": TheoremSetting("unprepared", 3, "interval", False,
                         "0 <= S(Aj|Aj-1) - S(Aj|Aj-1..Ai) <= 1 for every window"),
}

THEOREM_ALIASES = {"markov": "NM", "nonmarkov": "NM", "non-markov": "NM"}


def theorem_id(name: str) -> str:
    key = name.strip()
    key = THEOREM_ALIASES.get(key.lower(), key)
    upper = {k.upper(): k for k in THEOREMS}
    if key.upper() not in upper:
        raise KeyError(f"unknown theorem {name!r}; known: {', '.join(THEOREMS)}")
    return upper[key.upper()]


@dataclass(frozen=True)
class TheoremReport:
    """Outcome of one theorem check on one chain.

    For equalities ``gap = lhs - rhs``; for inequalities ``gap`` is the
    slack (``rhs - lhs`` for ``lhs <= rhs``); for the interval check ``gap``
    is the checked value itself and the bounds are ``[0, 1]``. When a claim
    covers several windows the worst one is reported.
    """

    theorem: str
    lhs: float
    rhs: float
    gap: float
    tolerance: float
    kind: str
    verdict: bool
    sigma_n: float | None = None
    detail: str = ""

    def to_dict(self, bits_factor: float | None = None) -> dict:
        out = {
            "theorem": self.theorem,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "gap": self.gap,
            "tolerance": self.tolerance,
            "kind": self.kind,
            "verdict": self.verdict,
            "sigma_n": self.sigma_n,
            "detail": self.detail,
        }
        if bits_factor is not None:
            out["bits"] = {k: (None if out[k] is None else out[k] * bits_factor)
                           for k in ("lhs", "rhs", "gap", "sigma_n")}
        return out


def _states(spec, cache: dict, amplified: bool):
    key = bool(amplified)
    if key not in cache:
        cache[key] = run_chain(spec.with_amplification(key))
    return cache[key]


def _devices(kind: str, lo: int, hi: int) -> list[str]:
    return [f"{kind}{k}" for k in range(lo, hi + 1)]


def _equality(tid, pairs, tol, sigma=None) -> TheoremReport:
    worst = max(pairs, key=lambda t: abs(t[0] - t[1]))
    lhs, rhs, where = worst
    gap = lhs - rhs
    return TheoremReport(tid, lhs, rhs, gap, tol, "equality", abs(gap) <= tol, sigma, where)


def _inequality(tid, pairs, tol, sigma=None) -> TheoremReport:
    # each pair is (smaller side, larger side, where)
    worst = min(pairs, key=lambda t: t[1] - t[0])
    lhs, rhs, where = worst
    gap = rhs - lhs
    return TheoremReport(tid, lhs, rhs, gap, tol, "inequality", gap >= -tol, sigma, where)


def verify_theorem(spec, theorem: str, tol: float = THEOREM_TOL) -> TheoremReport:
    """Check one theorem on the chain described by ``spec``.

    The chain's own amplification flags are ignored: the check runs the
    unamplified and/or fully amplified version it needs.
    """
    tid = theorem_id(theorem)
    setting = THEOREMS[tid]
    n = spec.n_steps
    if setting.preparation == "prepared" and not spec.prepared:
        raise SettingError(f"{tid} needs a prepared chain")
    if setting.preparation == "unprepared" and spec.prepared:
        raise SettingError(f"{tid} needs an unprepared chain")
    if n < setting.min_steps:
        raise SettingError(f"{tid} needs at least {setting.min_steps} steps, chain has {n}")
    cache: dict = {}
    un = lambda: _states(spec, cache, False)  # noqa: E731
    am = lambda: _states(spec, cache, True)  # noqa: E731

    if tid == "T1":
        st = un()
        pairs = [(joint_entropy(st, _devices("A", 1, k)), joint_entropy(st, f"A{k}"), f"A1..A{k}")
                 for k in range(2, n + 1)]
        return _equality(tid, pairs, tol)

    if tid == "T2":
        st = un()
        pairs = []
        for a in range(1, n + 1):
            for b in range(a + 2, n + 1):
                pairs.append((joint_entropy(st, _devices("A", a, b)),
                              joint_entropy(st, [f"A{a}", f"A{b}"]), f"A{a}..A{b}"))
        return _equality(tid, pairs, tol)

    if tid == "T3":
        st = am()
        pairs = []
        for j in range(3, n + 1):
            short = conditional_entropy(st, f"D{j}", f"D{j - 1}")
            for i in range(1, j - 1):
                pairs.append((conditional_entropy(st, f"D{j}", _devices("D", i, j - 1)), short,
                              f"D{j}|D{i}..D{j - 1}"))
        return _equality(tid, pairs, tol)

    if tid == "C1":
        st = am()
        pairs = []
        for j in range(3, n + 1):
            for i in range(1, j - 1):
                mid = _devices("D", i + 1, j - 1)
                pairs.append((conditional_mutual(st, f"D{i}", f"D{j}", mid), 0.0,
                              f"D{i}:D{j}|D{i + 1}..D{j - 1}"))
        return _equality(tid, pairs, tol)

    if tid == "L1":
        pairs = []
        for amp in (False, True):
            st = _states(spec, cache, amp)
            pairs.append((joint_entropy(st, "Q"), joint_entropy(st, f"A{n}"),
                          "amplified" if amp else "unamplified"))
        return _equality(tid, pairs, tol)

    if tid == "L2":
        pairs = [(joint_entropy(un(), f"A{k}"), joint_entropy(am(), f"D{k}"), f"step {k}")
                 for k in range(1, n + 1)]
        return _equality(tid, pairs, tol)

    if tid in ("T4", "T4_closed"):
        qa = mutual_entropy(un(), "Q", f"A{n}")
        qd = mutual_entropy(am(), "Q", f"D{n}")
        if tid == "T4":
            return _inequality(tid, [(qd, qa, f"Q:D{n} vs Q:A{n}")], tol)
        s_n = joint_entropy(un(), f"A{n}")
        s_prev = joint_entropy(un(), f"A{n - 1}")
        pairs = [(qa, 2 * s_n - s_prev, f"S(Q:A{n}) = 2S{n} - S{n - 1}"),
                 (qd, s_n, f"S(Q:D{n}) = S{n}")]
        return _equality(tid, pairs, tol)

    if tid == "T5":
        aa = mutual_entropy(un(), f"A{n}", f"A{n - 1}")
        dd = mutual_entropy(am(), f"D{n}", f"D{n - 1}")
        return _inequality(tid, [(dd, aa, f"D{n}:D{n - 1} vs A{n}:A{n - 1}")], tol)

    if tid in ("T6", "C2"):
        sig = sigma_n(un(), n)
        past_a = _devices("A", 1, n - 1)
        past_d = _devices("D", 1, n - 1)
        if tid == "T6":
            lhs = mutual_entropy(am(), f"D{n}", past_d)
            rhs = mutual_entropy(un(), f"A{n}", past_a) - sig
            return _inequality(tid, [(lhs, rhs, f"D{n}:D1..D{n - 1}")], tol, sig)
        big = conditional_entropy(am(), f"D{n}", past_d)
        small = conditional_entropy(un(), f"A{n}", past_a) + sig
        return _inequality(tid, [(small, big, f"D{n}|D1..D{n - 1}")], tol, sig)

    if tid == "NM":
        st = un()
        values = []
        for j in range(3, n + 1):
            short = conditional_entropy(st, f"A{j}", f"A{j - 1}")
            for i in range(1, j - 1):
                long_ = conditional_entropy(st, f"A{j}", _devices("A", i, j - 1))
                values.append((short, long_, f"A{j}|A{i}..A{j - 1}"))
        lhs, rhs, where = min(values, key=lambda t: min(t[0] - t[1], 1.0 - (t[0] - t[1])))
        gap = lhs - rhs
        ok = -tol <= gap <= 1.0 + tol
        return TheoremReport(tid, lhs, rhs, gap, tol, "interval", ok, None, where)

    raise KeyError(tid)  # pragma: no cover


def nonmarkov_gaps(state: PureState) -> list[float]:
    """Every window's ``S(Aj|Aj-1) - S(Aj|Aj-1..Ai)`` on an unamplified chain."""
    steps = state.ancilla_steps()
    n = max(steps) if steps else 0
    out = []
    for j in range(3, n + 1):
        short = conditional_entropy(state, f"A{j}", f"A{j - 1}")
        for i in range(1, j - 1):
            out.append(short - conditional_entropy(state, f"A{j}", _devices("A", i, j - 1)))
    return out


def theorem_corpus(theorem: str, trials: int, seed: int = 42, d_values=(2, 3), max_steps: int = 4):
    """Seeded random chains satisfying the theorem's hypotheses (see ``random_corpus``)."""
    setting = THEOREMS[theorem_id(theorem)]
    if max_steps < setting.min_steps:
        raise ValueError(f"max_steps must be >= {setting.min_steps} for this theorem")
    prepared = None if setting.preparation == "any" else setting.preparation == "prepared"
    return random_corpus(trials, seed, d_values, setting.min_steps, max_steps, prepared,
                         bool(setting.amplified))


__all__ = [
    "EIG_CLIP",
    "EntropyReport",
    "SettingError",
    "THEOREMS",
    "THEOREM_TOL",
    "TheoremReport",
    "VennDiagram3",
    "coherence_rel_ent",
    "conditional_entropy",
    "conditional_mutual",
    "entropy",
    "entropy_report",
    "joint_entropy",
    "mutual_entropy",
    "nonmarkov_gaps",
    "shannon",
    "sigma_n",
    "ternary_mutual",
    "theorem_corpus",
    "theorem_id",
    "venn3",
    "verify_theorem",
]
