import json
import math

import numpy as np
import pytest

from plastic_qca.errors import BoundsError, ConfigError
from plastic_qca.evolution import build_step
from plastic_qca.fermions import build_hqca
from plastic_qca.gates import scaling_params
from plastic_qca.gauge import (
    GaugeField,
    gauge_commutator,
    gauge_phases,
    gauge_transform,
    gauss_generator,
    gauss_values,
    generator_conservation,
    read_gauge_fields,
)
from plastic_qca.lattice import BasisLabel, LatticeSpec, StateVector, basis_state, flat_index, interior_mask, vacuum
from plastic_qca.operators import LinearOperator, total_number_op


def test_zero_field_is_identity(chain4):
    P = gauge_transform(GaugeField.zero(4), chain4)
    assert (P - LinearOperator.identity(chain4)).frobenius_norm() == 0


def test_constant_field_is_number_phase(chain4):
    chi = 0.37
    phases = gauge_phases(GaugeField((chi,) * 4), chain4)
    number = total_number_op(chain4).diagonal_values().real
    np.testing.assert_allclose(phases, chi * number, atol=1e-14)


def test_two_site_phase():
    spec = LatticeSpec(num_sites=2, cutoff=1)
    P = gauge_transform(GaugeField((0.0, math.pi)), spec).diagonal_values()
    assert P[flat_index(BasisLabel((0, 0), (1,)), spec)] == pytest.approx(-1.0)


def test_generators_reconstruct_transform(chain4, rng):
    phi = GaugeField(rng.uniform(-3, 3, size=4))
    exponent = sum(a * gauss_values(p, chain4) for p, a in enumerate(phi.angles))
    np.testing.assert_allclose(np.exp(1j * exponent), gauge_transform(phi, chain4).diagonal_values(), atol=1e-14)


def test_gauss_examples(chain4):
    assert gauss_values(1, chain4)[flat_index(BasisLabel((0,) * 4, (0, 0, 0)), chain4)] == 0
    index = flat_index(BasisLabel((0, 1, 0, 0), (0, -1, 0)), chain4)
    assert gauss_values(1, chain4)[index] == 2
    with pytest.raises(BoundsError):
        gauss_generator(4, chain4)
    Q = [gauss_generator(p, chain4) for p in range(4)]
    assert all((a @ b - b @ a).frobenius_norm() == 0 for a in Q for b in Q)


def test_quantized_invariance(chain4, rng):
    params = scaling_params(0.1, 1.0, 1.0, 1.0)
    G = build_step(chain4, params)
    assert gauge_commutator(GaugeField.zero(4), chain4, params, G=G) == 0
    for _ in range(5):
        phi = GaugeField.quantized(rng.integers(0, 3, size=4), 1)
        assert gauge_commutator(phi, chain4, params, G=G) < 1e-12


def test_unquantized_rejected_and_broken(chain4):
    params = scaling_params(0.1, 1.0, 1.0, 1.0)
    phi = GaugeField((0.3, -0.2, 0.1, 0.4))
    with pytest.raises(ConfigError):
        gauge_commutator(phi, chain4, params)
    assert gauge_commutator(phi, chain4, params, allow_unquantized=True) > 1e-3


def test_hard_cutoff_interior_invariance(hard4, rng):
    params = scaling_params(0.1, 1.0, 1.0, 1.0)
    G = build_step(hard4, params)
    for _ in range(5):
        phi = GaugeField(rng.uniform(-math.pi, math.pi, size=4))
        assert gauge_commutator(phi, hard4, params, margin=1, G=G) < 1e-12


def test_constant_field_commutes_exactly(hard4):
    params = scaling_params(0.2, 1.0, 1.0, 0.5)
    assert gauge_commutator(GaugeField((1.1,) * 4), hard4, params) < 1e-13


def test_hamiltonian_gauss_law(hard4):
    H = build_hqca(hard4)
    mask = LinearOperator.diagonal(interior_mask(hard4, 1).astype(complex), hard4)
    for p in range(4):
        Q = gauss_generator(p, hard4)
        assert ((H @ Q - Q @ H) @ mask).frobenius_norm() < 1e-12


def test_conservation_examples():
    spec = LatticeSpec(num_sites=4, cutoff=3, mass=1.0, coupling=1.0)
    params = scaling_params(0.3, 1.0, 1.0, 1.0)
    assert generator_conservation(spec, params, vacuum(spec), 3).drift == 0
    state = basis_state(BasisLabel((0, 1, 0, 0), (0, 0, 0)), spec)
    report = generator_conservation(spec, params, state, 2)
    assert report.drift < 1e-10 and not report.boundary_contact


def test_seam_contact_flagged():
    spec = LatticeSpec(num_sites=2, cutoff=1)
    params = scaling_params(0.1, 0.0, 1.0, 0.0)
    state = basis_state(BasisLabel((1, 0), (-1,)), spec)
    report = generator_conservation(spec, params, state, 1)
    assert report.boundary_contact
    assert report.drift > 0


def test_conservation_preconditions(chain4):
    params = scaling_params(0.1, 1.0, 1.0, 1.0)
    with pytest.raises(ConfigError):
        generator_conservation(chain4, params, vacuum(chain4), -1)
    with pytest.raises(ConfigError):
        generator_conservation(chain4, params, StateVector(np.ones(12), LatticeSpec(num_sites=2, cutoff=1)), 1)


def test_read_gauge_fields(tmp_path):
    path = tmp_path / "fields.json"
    path.write_text(json.dumps([{"angles": [0.1, 0.2]}, {"integers": [1, 2]}]))
    fields = read_gauge_fields(path, cutoff=1)
    assert fields[0].angles == (0.1, 0.2)
    assert fields[1].is_quantized(1)
    assert not fields[0].is_quantized(1)
    path.write_text(json.dumps({"integers": [1, 2]}))
    with pytest.raises(ConfigError):
        read_gauge_fields(path)
    with pytest.raises(ConfigError):
        gauge_phases(GaugeField((0.1,)), LatticeSpec(num_sites=2, cutoff=1))
