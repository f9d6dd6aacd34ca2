import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plastic_qca.errors import BoundsError, DomainError
from plastic_qca.gates import (
    GateParams,
    GateVariant,
    build_gate,
    gate_matrix,
    interaction_layer,
    scaling_params,
)
from plastic_qca.lattice import BasisLabel, LatticeSpec, TruncationMode, basis_state, flat_index
from plastic_qca.operators import LinearOperator, number_op


def test_scaling_examples():
    massless = scaling_params(0.01, 1.0, 1.0, 0.0)
    assert massless.theta == pytest.approx(math.acos(0.01), abs=1e-15)
    assert massless.zeta == 0.0
    relativistic = scaling_params(0.01, 0.0, 0.5, 0.0)
    assert relativistic.kappa == 1.0
    assert relativistic.theta == pytest.approx(math.pi / 3, abs=1e-15)
    massive = scaling_params(0.01, 1.0, 1.0, 1.0)
    assert massive.zeta == pytest.approx(0.01 / math.sqrt(1 - 1e-4), rel=1e-14)
    assert massive.delta_t == 0.01 and massive.delta_x == 1.0


@pytest.mark.parametrize(
    "args",
    [(-0.1, 1.0, 1.0, 0.0), (0.1, 1.5, 1.0, 0.0), (0.1, 1.0, 0.0, 0.0), (2.0, 1.0, 1.0, 0.0), (0.1, 0.0, 1.0, 0.5)],
)
def test_scaling_domain_errors(args):
    with pytest.raises(DomainError):
        scaling_params(*args)


def test_identity_gate():
    spec = LatticeSpec(num_sites=2, cutoff=2)
    params = GateParams.from_angles(math.pi / 2, 0.0)
    np.testing.assert_allclose(gate_matrix(params, spec), np.eye(4 * spec.link_dim), atol=1e-16)


def test_full_hop_gate_action():
    spec = LatticeSpec(num_sites=2, cutoff=1)
    params = GateParams.from_angles(0.0, 0.0)
    G = build_gate(0, params, spec)
    assert np.allclose(G.to_dense().conj().T @ G.to_dense(), np.eye(spec.dim), atol=1e-14)
    # a fermion on site 1 hops to site 0, raising the link
    start = basis_state(BasisLabel((0, 1), (0,)), spec).amplitudes
    out = G.apply(start)
    target = flat_index(BasisLabel((1, 0), (1,)), spec)
    assert out[target] == pytest.approx(-1.0)
    assert np.count_nonzero(np.abs(out) > 1e-15) == 1
    # and from site 0 to site 1, lowering it
    out = G.apply(basis_state(BasisLabel((1, 0), (0,)), spec).amplitudes)
    assert out[flat_index(BasisLabel((0, 1), (-1,)), spec)] == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(
    st.floats(0, math.pi / 2),
    st.floats(-math.pi, math.pi),
    st.sampled_from(list(GateVariant)),
    st.booleans(),
    st.integers(1, 3),
)
def test_gate_unitary_and_number_conserving(theta, zeta, variant, conjugated, cutoff):
    spec = LatticeSpec(num_sites=2, cutoff=cutoff)
    params = GateParams.from_angles(theta, zeta, variant=variant, corner_angle=0.3)
    w = gate_matrix(params, spec, conjugated)
    assert np.linalg.norm(w.conj().T @ w - np.eye(len(w))) < 1e-12
    G = build_gate(0, params, spec, conjugated)
    pair = number_op(0, spec) + number_op(1, spec)
    assert (G @ pair - pair @ G).frobenius_norm() == 0


def test_conjugate_flips_mass_phase():
    spec = LatticeSpec(num_sites=2, cutoff=1)
    params = GateParams.from_angles(0.7, 0.3)
    flipped = GateParams.from_angles(0.7, -0.3)
    np.testing.assert_array_equal(gate_matrix(params, spec, conjugated=True), gate_matrix(flipped, spec))


def test_hard_cutoff_gate_not_unitary():
    spec = LatticeSpec(num_sites=2, cutoff=1, truncation=TruncationMode.HARD_CUTOFF)
    w = gate_matrix(GateParams.from_angles(0.4, 0.0), spec)
    assert np.linalg.norm(w.conj().T @ w - np.eye(len(w))) > 0.1


def test_double_prime_corner():
    relativistic = scaling_params(0.1, 0.0, 0.5, 0.2, GateVariant.W_DOUBLE_PRIME)
    assert relativistic.corner == complex(-1.0, 0.0)
    spec = LatticeSpec(num_sites=2, cutoff=1)
    w = gate_matrix(relativistic, spec)
    d = spec.link_dim
    np.testing.assert_array_equal(np.diag(w)[3 * d :], -np.ones(d))
    for eps in (0.1, 0.05, 0.01):
        p = scaling_params(eps, 1.0, 1.0, 0.0, GateVariant.W_DOUBLE_PRIME)
        assert abs(p.corner - 1) <= math.pi * eps**2 + 1e-12


def test_double_prime_without_phases():
    spec = LatticeSpec(num_sites=2, cutoff=1)
    params = GateParams.from_angles(0.5, 0.4, variant=GateVariant.W_DOUBLE_PRIME, reinstate_phases=False)
    w = gate_matrix(params, spec)
    d = spec.link_dim
    assert w[d, d] == pytest.approx(math.sin(0.5))


def test_wprime_has_no_link_action():
    spec = LatticeSpec(num_sites=2, cutoff=1)
    params = GateParams.from_angles(0.0, 0.0, variant=GateVariant.W_PRIME)
    out = build_gate(0, params, spec).apply(basis_state(BasisLabel((0, 1), (0,)), spec).amplitudes)
    assert out[flat_index(BasisLabel((1, 0), (0,)), spec)] == pytest.approx(-1.0)


def test_build_gate_bounds():
    spec = LatticeSpec(num_sites=4, cutoff=1)
    params = GateParams.from_angles(0.3, 0.1)
    for p in (-1, 3):
        with pytest.raises(BoundsError):
            build_gate(p, params, spec)


def test_interaction_layer_examples():
    free = LatticeSpec(num_sites=4, cutoff=1, coupling=0.0)
    assert (interaction_layer(free) - LinearOperator.identity(free)).frobenius_norm() == 0
    spec = LatticeSpec(num_sites=2, cutoff=1, coupling=1.0)
    params = GateParams.from_angles(0.3, 0.0, delta_t=math.pi, delta_x=1.0)
    D = interaction_layer(spec, params).diagonal_values()
    assert D[flat_index(BasisLabel((0, 0), (1,)), spec)] == pytest.approx(-1j, abs=1e-15)
    spec3 = LatticeSpec(num_sites=4, cutoff=1, coupling=1.0)
    D3 = interaction_layer(spec3, params).diagonal_values()
    a = D3[flat_index(BasisLabel((0,) * 4, (1, -1, 0)), spec3)]
    b = D3[flat_index(BasisLabel((0,) * 4, (-1, 1, 0)), spec3)]
    assert a == b
    assert a == pytest.approx(-1.0, abs=1e-15)


def test_interaction_layer_commutes_with_numbers():
    spec = LatticeSpec(num_sites=4, cutoff=1, coupling=1.3)
    D = interaction_layer(spec)
    for p in range(4):
        assert (D @ number_op(p, spec) - number_op(p, spec) @ D).frobenius_norm() == 0
