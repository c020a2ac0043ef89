import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qmchain.chain import (
    Q,
    ChainSpec,
    DensityMatrix,
    PreparationSpec,
    StepSpec,
    ancilla,
    condition_on_outcome,
    qubit_chain,
    random_chain,
    reduced_density,
    run_chain,
)
from qmchain.entropy import (
    THEOREMS,
    SettingError,
    coherence_rel_ent,
    conditional_entropy,
    conditional_mutual,
    entropy,
    entropy_report,
    joint_entropy,
    mutual_entropy,
    nonmarkov_gaps,
    sigma_n,
    ternary_mutual,
    theorem_corpus,
    theorem_id,
    venn3,
    verify_theorem,
)
from qmchain.linalg import random_unitary

PI4 = math.pi / 4


def bench(**kw):
    return run_chain(qubit_chain([0.0, PI4, PI4], **kw))


# ----------------------------------------------------------- entropy


def test_entropy_examples():
    assert abs(entropy(np.eye(2) / 2, 2) - 1) < 1e-15
    v = np.array([0.6, 0.8])
    assert abs(entropy(np.outer(v, v), 2)) < 1e-12
    assert abs(joint_entropy(bench(), "A1,A2,A3") - 2) < 1e-9
    rho = reduced_density(bench(), "A1,A2,A3")
    assert abs(entropy(rho) - 2) < 1e-9


def test_entropy_bare_matrix_needs_base():
    with pytest.raises(ValueError):
        entropy(np.eye(2) / 2)


def test_empty_and_full_sets():
    st_ = bench()
    assert joint_entropy(st_) == 0.0
    assert joint_entropy(st_, []) == 0.0
    rho = reduced_density(st_, "A1,A2")
    assert abs(joint_entropy(rho, "A1,A2") - joint_entropy(st_, "A1,A2")) < 1e-12
    assert joint_entropy(st_, "Q,R,A1,A2,A3") == 0.0


def test_entropy_in_dits():
    st_ = run_chain(ChainSpec(3, PreparationSpec(), (StepSpec(random_unitary(3, 0)),)))
    assert abs(joint_entropy(st_, "A1") - 1) < 1e-12


# ----------------------------------------------------------- conditional / mutual


def test_entangled_pair_conditional_and_mutual():
    a = np.array([0.6, 0.8])
    st_ = run_chain(ChainSpec(2, PreparationSpec.pure(a), (StepSpec(np.eye(2)),)))
    s = joint_entropy(st_, "A1")
    assert s > 0.9
    assert abs(conditional_entropy(st_, "A1", "Q") + s) < 1e-12
    assert abs(mutual_entropy(st_, "Q", "A1") - 2 * s) < 1e-12


def test_unprepared_pair_conditional_zero():
    st_ = run_chain(ChainSpec(2, PreparationSpec(), (StepSpec(np.eye(2)),)))
    rho = reduced_density(st_, "Q,A1")
    assert abs(conditional_entropy(rho, "A1", "Q")) < 1e-12


def test_product_state_conditional():
    p = DensityMatrix.uniform((Q, ancilla(1)), np.kron(np.diag([0.3, 0.7]), np.eye(2) / 2), 2)
    assert abs(conditional_entropy(p, "Q", "A1") - entropy(p.partial_trace("Q"))) < 1e-12


def test_overlapping_sets_rejected():
    with pytest.raises(ValueError):
        conditional_entropy(bench(), "A1,A2", "A2")
    with pytest.raises(ValueError):
        conditional_mutual(bench(), "A1", "A2", "A1")


def test_amplified_ternary_vanishes():
    a = np.array([0.6, 0.8])
    st_ = run_chain(ChainSpec(2, PreparationSpec.pure(a), (StepSpec(np.eye(2), 1, True),)))
    assert abs(ternary_mutual(st_, "Q", "A1", "D1")) < 1e-12


def test_benchmark_conditional_mutuals():
    assert abs(conditional_mutual(bench(amplify=True), "D1", "D3", "D2")) < 1e-9
    assert abs(conditional_mutual(bench(), "A1", "A3", "A2") - 1) < 1e-9


# ----------------------------------------------------------- Venn diagrams


def test_venn_unamplified_benchmark():
    v = venn3(bench(), "A1", "A2", "A3")
    for val in (v.xy_given_z, v.xz_given_y, v.yz_given_x):
        assert abs(val - 1) < 1e-9
    assert abs(v.xyz + 1) < 1e-9
    for val in (v.x_given_yz, v.y_given_xz, v.z_given_xy):
        assert abs(val) < 1e-9
    assert abs(v.total() - v.joint) < 1e-9


def test_venn_amplified_benchmark():
    v = venn3(bench(amplify=True), "D1", "D2", "D3")
    for val in (v.xy_given_z, v.xz_given_y, v.yz_given_x, v.xyz):
        assert abs(val) < 1e-9
    for val in (v.x_given_yz, v.y_given_xz, v.z_given_xy):
        assert abs(val - 1) < 1e-9


def test_venn_product_all_zero():
    st_ = run_chain(ChainSpec(2, PreparationSpec.pure([1, 0]), tuple(StepSpec(np.eye(2)) for _ in range(3))))
    v = venn3(st_, "A1", "A2", "A3")
    assert all(abs(x) < 1e-12 for x in v.regions().values())


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 3]), st.booleans(), st.integers(0, 2**31))
def test_venn_regions_sum_to_joint(d, prepared, seed):
    st_ = run_chain(random_chain(d, 3, prepared=prepared, seed=seed))
    v = venn3(st_, "A1", "A2", "A3")
    assert abs(v.total() - v.joint) < 1e-9
    assert abs(v.xyz - ternary_mutual(st_, "A1", "A2", "A3")) < 1e-12
    assert abs(v.xy_given_z - conditional_mutual(st_, "A1", "A2", "A3")) < 1e-12


# ----------------------------------------------------------- coherence


def test_coherence_examples():
    assert abs(coherence_rel_ent(DensityMatrix.uniform((Q,), np.diag([0.2, 0.8]), 2))) < 1e-15
    assert abs(coherence_rel_ent(reduced_density(bench(), "A1,A2,A3")) - 1) < 1e-9
    plus = np.full((2, 2), 0.5)
    assert abs(coherence_rel_ent(DensityMatrix.uniform((Q,), plus, 2)) - 1) < 1e-12


# ----------------------------------------------------------- sigma_n


def test_sigma_examples():
    assert abs(sigma_n(run_chain(qubit_chain([0.3, 0.0], prepared=(0.6, 0.8))), 2)) < 1e-12
    st_ = run_chain(qubit_chain([0.0, PI4, PI4], prepared=(1 / math.sqrt(2), 1 / math.sqrt(2))))
    assert abs(sigma_n(st_, 3) - 1) < 1e-9
    u = random_unitary(2, 3)
    st2 = run_chain(ChainSpec(2, PreparationSpec.pure([1, 0]), (StepSpec(np.eye(2)), StepSpec(u))))
    assert abs(sigma_n(st2, 2)) < 1e-12


def test_sigma_errors():
    with pytest.raises(ValueError):
        sigma_n(bench(), 1)
    with pytest.raises(ValueError):
        sigma_n(bench(amplify=True), 3)


# ----------------------------------------------------------- reports


def test_entropy_report_keys_and_bits():
    st_ = run_chain(ChainSpec(3, PreparationSpec(), (StepSpec(random_unitary(3, 1)),)))
    rep = entropy_report(st_, ["A1", "Q,A1"])
    out = rep.to_dict(bits=True)
    assert out["unit"] == "bits"
    assert set(out["entries"]) == {"A1", "Q,A1"}
    assert abs(out["entries"]["A1"] - math.log2(3)) < 1e-12
    assert abs(rep.to_dict()["entries"]["A1"] - 1) < 1e-12


# ----------------------------------------------------------- invariants


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(0, 2**31))
def test_unitary_invariance(d, seed):
    st_ = run_chain(random_chain(d, 2, prepared=True, seed=seed))
    rho = reduced_density(st_, "A1,A2").matrix
    u = random_unitary(d * d, seed)
    assert abs(entropy(rho, d) - entropy(u @ rho @ u.conj().T, d)) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(2, 4), st.booleans(), st.booleans(), st.integers(0, 2**31))
def test_subadditivity_araki_lieb_ssa(d, n, prepared, amplify, seed):
    st_ = run_chain(random_chain(d, n, prepared=prepared, amplify=amplify, seed=seed))
    devs = [f"A{k}" for k in range(1, n + 1)] + ["Q"]
    for i, x in enumerate(devs):
        for y in devs[i + 1:]:
            sx, sy, sxy = joint_entropy(st_, x), joint_entropy(st_, y), joint_entropy(st_, [x, y])
            assert sxy <= sx + sy + 1e-9
            assert abs(sx - sy) <= sxy + 1e-9
    for k in range(1, n - 1):
        assert conditional_mutual(st_, f"A{k}", f"A{k + 2}", f"A{k + 1}") >= -1e-9


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(3, 4), st.booleans(), st.integers(0, 2**31))
def test_amplified_ssa_equality(d, n, prepared, seed):
    st_ = run_chain(random_chain(d, n, prepared=prepared, amplify=True, seed=seed))
    for k in range(1, n - 1):
        assert abs(conditional_mutual(st_, f"D{k}", f"D{k + 2}", f"D{k + 1}")) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(2, 4), st.integers(0, 2**31))
def test_prepared_marginals_never_decrease(d, n, seed):
    st_ = run_chain(random_chain(d, n, prepared=True, seed=seed))
    s = [joint_entropy(st_, f"A{k}") for k in range(1, n + 1)]
    assert all(b >= a - 1e-9 for a, b in zip(s, s[1:]))


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 4), st.booleans(), st.integers(0, 2**31))
def test_sigma_in_unit_interval_for_qubits(n, prepared, seed):
    st_ = run_chain(random_chain(2, n, prepared=prepared, seed=seed))
    s = sigma_n(st_, n)
    assert -1e-9 <= s <= 1 + 1e-9


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(3, 5), st.integers(0, 2**31))
def test_every_window_reduces_to_boundary(d, n, seed):
    st_ = run_chain(random_chain(d, n, prepared=False, seed=seed))
    for a in range(1, n + 1):
        for b in range(a + 2, n + 1):
            inner = ",".join(f"A{k}" for k in range(a, b + 1))
            assert abs(joint_entropy(st_, inner) - joint_entropy(st_, f"A{a},A{b}")) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([2, 3]), st.integers(3, 4), st.integers(0, 2**31))
def test_unprepared_window_bulk_is_pure(d, n, seed):
    st_ = run_chain(random_chain(d, n, prepared=False, seed=seed))
    labels = ",".join(f"A{k}" for k in range(1, n + 1))
    rho = reduced_density(st_, labels)
    for x in range(d):
        for y in range(d):
            try:
                c1, _ = condition_on_outcome(rho, "A1", x)
                c2, _ = condition_on_outcome(c1, f"A{n}", y)
            except ValueError:
                continue
            assert abs(c2.purity() - 1) < 1e-9


def test_nonmarkov_gaps_benchmark():
    gaps = nonmarkov_gaps(bench())
    assert len(gaps) == 1 and abs(gaps[0] - 1) < 1e-9


def test_nonmarkov_gap_also_bounded_on_prepared_chains():
    for spec in theorem_corpus("T1", 40, seed=7, max_steps=4):
        for g in nonmarkov_gaps(run_chain(spec)):
            assert -1e-9 <= g <= 1 + 1e-9


# ----------------------------------------------------------- theorem checks


def test_theorem_ids_and_aliases():
    assert theorem_id("markov") == "NM"
    assert theorem_id("t4_closed") == "T4_closed"
    with pytest.raises(KeyError):
        theorem_id("T99")


def test_t1_example():
    spec = random_chain(2, 4, prepared=True, seed=1)
    r = verify_theorem(spec, "T1")
    assert r.verdict and r.kind == "equality" and abs(r.gap) < 1e-9


def test_t3_on_benchmark():
    r = verify_theorem(qubit_chain([0.0, PI4, PI4]), "T3")
    assert r.verdict and abs(r.lhs - r.rhs) < 1e-9


def test_t4_closed_forms():
    spec = random_chain(3, 3, prepared=True, seed=2)
    r = verify_theorem(spec, "T4_closed")
    assert r.verdict
    st_ = run_chain(spec)
    s3, s2 = joint_entropy(st_, "A3"), joint_entropy(st_, "A2")
    assert abs(mutual_entropy(st_, "Q", "A3") - (2 * s3 - s2)) < 1e-9


def test_setting_mismatch():
    with pytest.raises(SettingError):
        verify_theorem(random_chain(2, 3, prepared=True, seed=0), "T2")
    with pytest.raises(SettingError):
        verify_theorem(random_chain(2, 3, prepared=False, seed=0), "T1")
    with pytest.raises(SettingError):
        verify_theorem(random_chain(2, 2, prepared=False, seed=0), "T3")


def test_theorem_six_spot_check():
    spec = qubit_chain([0.0, PI4, PI4], prepared=(1 / math.sqrt(2), 1 / math.sqrt(2)))
    r = verify_theorem(spec, "T6")
    assert r.verdict and abs(r.sigma_n - 1) < 1e-9
    assert abs(r.lhs) < 1e-9 and abs(r.rhs) < 1e-9


def test_report_serializes_with_bits():
    r = verify_theorem(random_chain(3, 2, prepared=True, seed=3), "T5")
    out = r.to_dict(math.log2(3))
    assert out["theorem"] == "T5" and out["kind"] == "inequality"
    assert abs(out["bits"]["lhs"] - r.lhs * math.log2(3)) < 1e-15


@pytest.mark.parametrize("tid", list(THEOREMS))
def test_theorem_small_corpus(tid):
    for spec in theorem_corpus(tid, 20, seed=123):
        r = verify_theorem(spec, tid)
        assert r.verdict, (tid, r)


def test_corpus_respects_settings():
    assert all(s.prepared for s in theorem_corpus("T1", 10))
    assert not any(s.prepared for s in theorem_corpus("T2", 10))
    assert all(s.n_steps >= 3 for s in theorem_corpus("NM", 10))
    with pytest.raises(ValueError):
        theorem_corpus("T2", 10, max_steps=2)
