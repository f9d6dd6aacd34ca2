"""Jordan-Wigner fermions on the chain and the two lattice Hamiltonians.

The string runs to the right: ``phi_p = I_{<p} (x) E01_p (x) sigma_z^{(x) q>p}``
on the qubit factor, identity on every link.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from .gates import GateParams, GateVariant, build_gate
from .lattice import LatticeSpec, link_values, site_occupations
from .operators import (
    E01,
    LinearOperator,
    LinkKind,
    anticommutator,
    link_op,
    number_op,
    qubit_op,
)


@dataclass(frozen=True)
class FermionOperatorSet:
    annihilators: tuple[LinearOperator, ...]
    creators: tuple[LinearOperator, ...]

    def number(self, p: int) -> LinearOperator:
        return self.creators[p] @ self.annihilators[p]


_JW_CACHE: dict[tuple[int, int], FermionOperatorSet] = {}


def jw_operators(spec: LatticeSpec) -> FermionOperatorSet:
    key = (spec.num_sites, spec.cutoff)
    if key not in _JW_CACHE:
        annihilators = []
        for p in range(spec.num_sites):
            string = np.ones(spec.dim)
            for q in range(p + 1, spec.num_sites):
                string = string * (1 - 2 * site_occupations(spec, q))
            annihilators.append(qubit_op(E01, p, spec) @ LinearOperator.diagonal(string, spec))
        creators = [phi.adjoint() for phi in annihilators]
        _JW_CACHE[key] = FermionOperatorSet(tuple(annihilators), tuple(creators))
    return _JW_CACHE[key]


def car_residuals(spec: LatticeSpec) -> list[dict]:
    """Frobenius residuals of both anticommutators for every ordered pair (p, q)."""
    ops = jw_operators(spec)
    eye = LinearOperator.identity(spec)
    report = []
    for p in range(spec.num_sites):
        for q in range(spec.num_sites):
            mixed = anticommutator(ops.annihilators[p], ops.creators[q])
            if p == q:
                mixed = mixed - eye
            same = anticommutator(ops.annihilators[p], ops.annihilators[q])
            report.append(
                {"p": p, "q": q, "mixed": mixed.frobenius_norm(), "same": same.frobenius_norm()}
            )
    return report


def _electric(spec: LatticeSpec) -> LinearOperator:
    squares = sum(link_values(spec, j) ** 2 for j in range(spec.num_links))
    return LinearOperator.diagonal(np.asarray(squares, dtype=np.complex128), spec)


def _staggered_mass(spec: LatticeSpec) -> LinearOperator:
    values = sum((-1) ** p * site_occupations(spec, p) for p in range(spec.num_sites))
    return LinearOperator.diagonal(spec.mass * np.asarray(values, dtype=np.complex128), spec)


def build_hs(spec: LatticeSpec, lattice_spacing_a: float = 1.0) -> LinearOperator:
    """Kogut-Susskind Hamiltonian with ``exp(-i theta_p) -> V_{p+1/2}``.

    ``(i/2a) sum_p (phi+_{p+1} V phi_p - h.c.) + m sum_p (-1)^p n_p + (a g^2/2) sum_p L_p^2``
    """
    a = lattice_spacing_a
    ops = jw_operators(spec)
    hopping = LinearOperator(np.zeros((spec.dim, spec.dim)), spec)
    for p in range(spec.num_links):
        forward = ops.creators[p + 1] @ link_op(LinkKind.LOWER, p, spec) @ ops.annihilators[p]
        hopping = hopping + forward - forward.adjoint()
    return (0.5j / a) * hopping + _staggered_mass(spec) + (0.5 * a * spec.coupling**2) * _electric(spec)


def build_hqca(spec: LatticeSpec) -> LinearOperator:
    """First-order generator of the automaton, ``G ~ 1 - 2i dt H``.

    ``sum_p [(i/2)(phi+_{p+1} phi_p V_{p+1/2} - h.c.) + m (-1)^p n_p + (g^2/2) L_p^2]``
    """
    ops = jw_operators(spec)
    hopping = LinearOperator(np.zeros((spec.dim, spec.dim)), spec)
    for p in range(spec.num_links):
        forward = ops.creators[p + 1] @ ops.annihilators[p] @ link_op(LinkKind.LOWER, p, spec)
        hopping = hopping + forward - forward.adjoint()
    return 0.5j * hopping + _staggered_mass(spec) + (0.5 * spec.coupling**2) * _electric(spec)


def wtilde_expression(
    spec: LatticeSpec, params: GateParams, p: int, conjugated: bool | None = None
) -> LinearOperator:
    """The gate on pair (p, p+1) rewritten as a quadratic fermionic expression.

    ``phi_p phi+_p phi_{p+1} phi+_{p+1} + e^{-i zeta} sin(theta) phi_p phi+_p phi+_{p+1} phi_{p+1}
    + e^{i zeta} sin(theta) phi+_p phi_p phi_{p+1} phi+_{p+1} - cos(theta) V phi_p phi+_{p+1}
    - cos(theta) V+ phi+_p phi_{p+1} + phi+_p phi_p phi+_{p+1} phi_{p+1}``

    For the WDoublePrime variant the hopping signs flip and the last term
    carries the corner phase.  ``conjugated`` defaults to ``p`` even.
    """
    if conjugated is None:
        conjugated = p % 2 == 0
    ops = jw_operators(spec)
    a, ad = ops.annihilators, ops.creators
    s, c = math.sin(params.theta), math.cos(params.theta)
    stay_01 = np.exp(-1j * params.zeta) * s
    stay_10 = np.exp(1j * params.zeta) * s
    hop, corner = c, 1.0
    if params.variant is GateVariant.W_DOUBLE_PRIME:
        hop, corner = -c, params.corner
        if not params.reinstate_phases:
            stay_01 = stay_10 = s
    if conjugated:
        stay_01, stay_10, corner = np.conj(stay_01), np.conj(stay_10), np.conj(corner)
    if params.variant is GateVariant.W_PRIME:
        lower = LinearOperator.identity(spec)
    else:
        lower = link_op(LinkKind.LOWER, p, spec)
    raise_ = lower.adjoint()

    empty_p, full_p = a[p] @ ad[p], ad[p] @ a[p]
    empty_q, full_q = a[p + 1] @ ad[p + 1], ad[p + 1] @ a[p + 1]
    return (
        empty_p @ empty_q
        + stay_01 * (empty_p @ full_q)
        + stay_10 * (full_p @ empty_q)
        - hop * (lower @ a[p] @ ad[p + 1])
        - hop * (raise_ @ ad[p] @ a[p + 1])
        + corner * (full_p @ full_q)
    )


def check_wtilde(spec: LatticeSpec, params: GateParams, p: int, conjugated: bool | None = None) -> float:
    """Frobenius distance between the fermionic expression and the embedded gate."""
    if conjugated is None:
        conjugated = p % 2 == 0
    gate = build_gate(p, params, spec, conjugated=conjugated)
    return (wtilde_expression(spec, params, p, conjugated) - gate).frobenius_norm()


def mass_identity_check(spec: LatticeSpec, p: int) -> float:
    """``|| n_p (1 - n_{p+1}) - (1 - n_p) n_{p+1} - (n_p - n_{p+1}) ||_F`` in fermionic form."""
    ops = jw_operators(spec)
    a, ad = ops.annihilators, ops.creators
    lhs = ad[p] @ a[p] @ a[p + 1] @ ad[p + 1] - a[p] @ ad[p] @ ad[p + 1] @ a[p + 1]
    return (lhs - (number_op(p, spec) - number_op(p + 1, spec))).frobenius_norm()


def write_triplets(op: LinearOperator, path: str | Path) -> None:
    """Sparse triplet CSV (row, col, re, im), row-major with sorted columns."""
    coo = op.matrix.tocoo()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row", "col", "re", "im"])
        for r, c, v in zip(coo.row, coo.col, coo.data):
            writer.writerow([int(r), int(c), format(v.real, ".17g"), format(v.imag, ".17g")])


def read_triplets(path: str | Path, dim: int) -> np.ndarray:
    rows, cols, vals = [], [], []
    with open(path, newline="") as fh:
        for record in csv.DictReader(fh):
            rows.append(int(record["row"]))
            cols.append(int(record["col"]))
            vals.append(complex(float(record["re"]), float(record["im"])))
    return sparse.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
