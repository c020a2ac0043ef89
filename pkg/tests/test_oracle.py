import math

import numpy as np
import pytest

from qmchain.chain import (
    ChainSpec,
    PreparationSpec,
    StepSpec,
    qubit_chain,
    random_chain,
    random_corpus,
    reduced_density,
    run_chain,
)
from qmchain.entropy import joint_entropy
from qmchain.oracle import (
    coherent_dist,
    collapse_rho,
    detector_chain_entropy,
    detector_distribution,
    detector_joint,
    first_distribution,
    markov_kernel,
    p_boundary,
    q_dist,
    transition,
)

PI4 = math.pi / 4
CORPUS = random_corpus(60, seed=9)


def _devs(kind, i, j):
    return ",".join(f"{kind}{k}" for k in range(i, j + 1))


def test_transition_is_doubly_stochastic():
    t = transition(random_chain(3, 1, prepared=False, seed=0).steps[0].unitary)
    assert np.allclose(t.sum(axis=0), 1, atol=1e-14)
    assert np.allclose(t.sum(axis=1), 1, atol=1e-14)


def test_benchmark_closed_forms():
    spec = qubit_chain([0.0, PI4, PI4])
    q = q_dist(spec, 3)
    assert np.allclose(q.values, [0.5, 0.5]) and q.is_valid()
    pb = p_boundary(spec, 1, 3)
    assert np.allclose(pb.kernel, 0.5, atol=1e-15)
    assert np.allclose(pb.values, 0.25, atol=1e-15)
    assert abs(detector_chain_entropy(spec, 1, 3) - 3) < 1e-12
    assert np.allclose(np.diag(collapse_rho(spec, 1, 3).matrix), 1 / 8)


def test_first_distribution_prepared():
    spec = qubit_chain([0.3], prepared=(0.6, 0.8))
    u = spec.steps[0].unitary
    assert np.allclose(first_distribution(spec), np.abs(np.array([0.6, 0.8]) @ u) ** 2)


def test_identity_chain_is_frozen():
    spec = ChainSpec(2, PreparationSpec.pure([0.6, 0.8]), tuple(StepSpec(np.eye(2)) for _ in range(3)))
    assert np.allclose(q_dist(spec, 3).values, [0.36, 0.64])
    assert np.allclose(markov_kernel(spec, 1, 3), np.eye(2))


def test_window_validation():
    spec = qubit_chain([0.0, PI4, PI4])
    with pytest.raises(ValueError):
        p_boundary(spec, 2, 2)
    with pytest.raises(ValueError):
        q_dist(spec, 4)
    with pytest.raises(ValueError):
        collapse_rho(spec, 3, 1)


def test_to_dict_keys():
    out = p_boundary(qubit_chain([0.0, PI4]), 1, 2).to_dict()
    assert set(out["values"]) == {"0,0", "0,1", "1,0", "1,1"}
    assert np.allclose(out["kernel"], 0.5)


@pytest.mark.parametrize("spec", CORPUS)
def test_oracles_match_simulator(spec):
    n = spec.n_steps
    plain = run_chain(spec)
    amp_spec = spec.with_amplification(True)
    amp = run_chain(amp_spec)
    for i in range(1, n + 1):
        sim_q = reduced_density(plain, f"A{i}").diagonal()
        assert np.max(np.abs(sim_q - q_dist(spec, i).values)) < 1e-10
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            rho = reduced_density(amp, _devs("D", i, j))
            assert np.max(np.abs(rho.matrix - detector_joint(spec, i, j).matrix)) < 1e-10
            assert abs(joint_entropy(amp, _devs("D", i, j)) - detector_chain_entropy(spec, i, j)) < 1e-10
            if j > i:
                sim = reduced_density(plain, f"A{i},A{j}").diagonal()
                assert np.max(np.abs(sim - p_boundary(spec, i, j).values)) < 1e-10
                assert np.max(np.abs(rho.matrix - collapse_rho(spec, i, j).matrix)) < 1e-10


def test_unprepared_boundary_is_kernel_over_d():
    spec = random_chain(3, 4, prepared=False, seed=5)
    pb = p_boundary(spec, 1, 4)
    assert np.allclose(pb.values, pb.kernel / 3, atol=1e-15)
    assert np.allclose(pb.kernel.sum(axis=0), 1) and np.allclose(pb.kernel.sum(axis=1), 1)
    dist = detector_distribution(spec, 2, 4)
    assert dist.values.shape == (3, 3, 3) and dist.is_valid()


def test_coherent_differs_from_collapsed():
    spec = qubit_chain([0.0, PI4, PI4], prepared=(1.0, 0.0))
    assert np.allclose(q_dist(spec, 3).values, [0.5, 0.5])
    coh = coherent_dist(spec, 3)
    assert abs(max(coh) - 1) < 1e-12
    # with the middle step measured, the prepared chain's last ancilla sees the collapsed law
    st = run_chain(spec)
    assert np.allclose(reduced_density(st, "A3").diagonal(), [0.5, 0.5], atol=1e-12)


def test_coherent_equals_collapsed_for_two_steps():
    spec = random_chain(2, 2, prepared=True, seed=4)
    # step 1 is the only measurement before outcome 1, nothing to interfere
    assert np.allclose(coherent_dist(spec, 1), q_dist(spec, 1).values)
    assert np.allclose(coherent_dist(random_chain(3, 2, prepared=False, seed=1), 2), 1 / 3)
