"""Global step operator, time evolution and observables.

One step applies, right to left,

    G = [prod_{p even} W*_p] D [prod_{p odd} W_p] D

with ``D`` the electric phase on every link.  The odd layer leaves sites
0 and N-1 unpaired; when ``spec.edge_phases`` is set each of them gets the
diagonal mass phase its missing gate would have applied (``exp(-i zeta)``
on an occupied site 0, ``exp(+i zeta)`` on an occupied site N-1), which
keeps the first-order generator equal to the staggered mass term on the
open chain.  One application of G advances time by ``2 dt``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _backend
from .errors import ShapeError
from .gates import (
    GateParams,
    GateVariant,
    electric_phase_exponent,
    gate_factors,
    gate_matrix,
    interaction_diagonal,
)
from .lattice import LatticeSpec, StateVector, link_values, site_occupations
from .operators import LinearOperator, embed, local_layout, local_triplets


def odd_pairs(spec: LatticeSpec) -> list[int]:
    return list(range(1, spec.num_sites - 1, 2))


def even_pairs(spec: LatticeSpec) -> list[int]:
    return list(range(0, spec.num_sites - 1, 2))


def edge_phases_trivial(spec: LatticeSpec, params: GateParams) -> bool:
    if not spec.edge_phases or params.zeta == 0:
        return True
    return params.variant is GateVariant.W_DOUBLE_PRIME and not params.reinstate_phases


def edge_phase_diagonal(spec: LatticeSpec, params: GateParams) -> np.ndarray:
    """Mass phases for the two sites left unpaired by the odd layer."""
    if edge_phases_trivial(spec, params):
        return np.ones(spec.dim, dtype=np.complex128)
    first = site_occupations(spec, 0)
    last = site_occupations(spec, spec.num_sites - 1)
    return np.exp(-1j * params.zeta * first + 1j * params.zeta * last)


def build_step(spec: LatticeSpec, params: GateParams) -> LinearOperator:
    """Sparse one-step operator G."""
    D = LinearOperator.diagonal(interaction_diagonal(spec, params), spec)
    edges = LinearOperator.diagonal(edge_phase_diagonal(spec, params), spec)
    odd_local = gate_matrix(params, spec, conjugated=False)
    even_local = gate_matrix(params, spec, conjugated=True)
    odd = edges
    for p in odd_pairs(spec):
        odd = embed(odd_local, gate_factors(p), spec) @ odd
    even = LinearOperator.identity(spec)
    for p in even_pairs(spec):
        even = embed(even_local, gate_factors(p), spec) @ even
    return even @ D @ odd @ D


@dataclass
class StepProgram:
    """Matrix-free form of G: a sequence of diagonal and local-gate passes.

    Application uses the compiled kernel when present (see ``_backend``).
    """

    spec: LatticeSpec
    params: GateParams
    passes: list = field(default_factory=list)

    @classmethod
    def build(cls, spec: LatticeSpec, params: GateParams) -> "StepProgram":
        D = interaction_diagonal(spec, params)
        passes = [("diag", D * edge_phase_diagonal(spec, params))]
        for conjugated, pairs in ((False, odd_pairs(spec)), (True, even_pairs(spec))):
            triplets = local_triplets(gate_matrix(params, spec, conjugated))
            for p in pairs:
                bases, offsets = local_layout(gate_factors(p), spec)
                passes.append(("local", (bases, offsets) + triplets))
            if not conjugated:
                passes.append(("diag", D))
        return cls(spec, params, passes)

    def apply(self, psi: np.ndarray, backend: str | None = None) -> np.ndarray:
        kernel = _backend.apply_local if backend is None else _backend.get_kernel(backend)
        psi = np.ascontiguousarray(psi, dtype=np.complex128)
        if psi.shape != (self.spec.dim,):
            raise ShapeError(f"vector of length {psi.shape} does not match dim {self.spec.dim}")
        current = psi.copy()
        scratch = np.empty_like(current)
        for kind, data in self.passes:
            if kind == "diag":
                current *= data
            else:
                kernel(current, scratch, *data)
                current, scratch = scratch, current
        return current


class SupportProgram:
    """G applied to a sparse support ``{flat index: amplitude}``.

    Exact on the full composite basis but never allocates a ``dim``-sized
    array, so it reaches lattices far beyond the dense budget as long as
    the state stays in a small sector (e.g. one particle).
    """

    def __init__(self, spec: LatticeSpec, params: GateParams):
        self.spec = spec
        self.params = params
        self._gates = []
        for conjugated, pairs in ((False, odd_pairs(spec)), (True, even_pairs(spec))):
            local = gate_matrix(params, spec, conjugated)
            columns = [
                [(int(r), complex(local[r, c])) for r in np.flatnonzero(local[:, c])]
                for c in range(local.shape[1])
            ]
            self._gates.append([(p, columns) for p in pairs])
        self._strength = electric_phase_exponent(spec, params)

    def _digits(self, index: int) -> tuple[list[int], list[int]]:
        spec = self.spec
        links = []
        for _ in range(spec.num_links):
            index, digit = divmod(index, spec.link_dim)
            links.append(digit - spec.cutoff)
        occupations = []
        for _ in range(spec.num_sites):
            index, bit = divmod(index, 2)
            occupations.append(bit)
        return occupations[::-1], links[::-1]

    def _electric(self, support: dict) -> dict:
        if self._strength == 0:
            return support
        out = {}
        for index, amp in support.items():
            _, links = self._digits(index)
            out[index] = amp * np.exp(-0.5j * self._strength * sum(l * l for l in links))
        return out

    def _edges(self, support: dict) -> dict:
        spec, params = self.spec, self.params
        if edge_phases_trivial(spec, params):
            return support
        out = {}
        for index, amp in support.items():
            occ, _ = self._digits(index)
            out[index] = amp * np.exp(-1j * params.zeta * occ[0] + 1j * params.zeta * occ[-1])
        return out

    def _layer(self, support: dict, gates) -> dict:
        spec = self.spec
        d = spec.link_dim
        for p, columns in gates:
            s0, s1, sl = spec.site_stride(p), spec.site_stride(p + 1), spec.link_stride(p)
            out: dict = {}
            for index, amp in support.items():
                n0 = (index // s0) % 2
                n1 = (index // s1) % 2
                digit = (index // sl) % d
                base = index - n0 * s0 - n1 * s1 - digit * sl
                for r, value in columns[(2 * n0 + n1) * d + digit]:
                    pair, rdigit = divmod(r, d)
                    target = base + (pair >> 1) * s0 + (pair & 1) * s1 + rdigit * sl
                    out[target] = out.get(target, 0.0) + value * amp
            support = out
        return support

    def apply(self, support: dict) -> dict:
        support = self._edges(self._electric(support))
        support = self._layer(support, self._gates[0])
        support = self._electric(support)
        return self._layer(support, self._gates[1])


def step(state: StateVector, G: LinearOperator | StepProgram) -> StateVector:
    """Apply one step of G."""
    if isinstance(G, StepProgram):
        return StateVector(G.apply(state.amplitudes), state.spec)
    if G.dim != state.spec.dim:
        raise ShapeError(f"operator dim {G.dim} does not match state dim {state.spec.dim}")
    return StateVector(G.apply(state.amplitudes), state.spec)


@dataclass
class Observables:
    occupations: np.ndarray
    link_mean: np.ndarray
    link_square: np.ndarray
    electric_energy: float
    total_number: float
    staggered_charge: float
    norm: float

    def rows(self):
        """(name, index, value) triples in a fixed order."""
        for p, v in enumerate(self.occupations):
            yield "occupation", p, float(v)
        for j, v in enumerate(self.link_mean):
            yield "link_mean", j, float(v)
        for j, v in enumerate(self.link_square):
            yield "link_square", j, float(v)
        yield "electric_energy", 0, self.electric_energy
        yield "total_number", 0, self.total_number
        yield "staggered_charge", 0, self.staggered_charge
        yield "norm", 0, self.norm


def measure(state: StateVector, spec: LatticeSpec | None = None) -> Observables:
    """Expectation values <psi|O|psi> (not renormalized; see ``norm``)."""
    spec = state.spec if spec is None else spec
    if spec.dim != state.amplitudes.shape[0]:
        raise ShapeError("state does not belong to this lattice")
    prob = np.abs(state.amplitudes) ** 2
    occupations = np.array([prob @ site_occupations(spec, p) for p in range(spec.num_sites)])
    link_mean = np.array([prob @ link_values(spec, j) for j in range(spec.num_links)])
    link_square = np.array([prob @ link_values(spec, j) ** 2 for j in range(spec.num_links)])
    signs = (-1.0) ** np.arange(spec.num_sites)
    return Observables(
        occupations=occupations,
        link_mean=link_mean,
        link_square=link_square,
        electric_energy=float(0.5 * spec.coupling**2 * link_square.sum()),
        total_number=float(occupations.sum()),
        staggered_charge=float(signs @ occupations),
        norm=float(np.sqrt(prob.sum())),
    )


@dataclass
class EvolutionReport:
    steps: list[int] = field(default_factory=list)
    norms: list[float] = field(default_factory=list)
    observables: list[Observables] = field(default_factory=list)
    trajectory: list[StateVector] = field(default_factory=list)
    final: StateVector | None = None


def evolve(
    state: StateVector,
    params: GateParams,
    steps: int,
    *,
    record_every: int = 1,
    keep_states: bool = False,
    method: str = "kernel",
    backend: str | None = None,
) -> EvolutionReport:
    """Apply G ``steps`` times, recording observables every ``record_every`` steps.

    ``method="kernel"`` uses the matrix-free program, ``"sparse"`` the
    assembled sparse G.
    """
    if steps < 0 or record_every < 1:
        raise ValueError("steps must be >= 0 and record_every >= 1")
    spec = state.spec
    if method == "kernel":
        program = StepProgram.build(spec, params)
        advance = lambda psi: program.apply(psi, backend)  # noqa: E731
    elif method == "sparse":
        G = build_step(spec, params)
        advance = G.apply
    else:
        raise ValueError(f"unknown method {method!r}")

    report = EvolutionReport()
    psi = state.amplitudes.copy()
    for n in range(1, steps + 1):
        psi = advance(psi)
        if n % record_every == 0 or n == steps:
            current = StateVector(psi, spec)
            obs = measure(current)
            report.steps.append(n)
            report.norms.append(obs.norm)
            report.observables.append(obs)
            if keep_states:
                report.trajectory.append(current.copy())
    report.final = StateVector(psi, spec)
    return report


def write_observables_csv(report: EvolutionReport, path: str | Path, delta_t: float) -> None:
    """Columns: step, time (= 2 step dt), observable, index, value."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "time", "observable", "index", "value"])
        for n, obs in zip(report.steps, report.observables):
            time = format(2 * n * delta_t, ".17g")
            for name, index, value in obs.rows():
                writer.writerow([n, time, name, index, format(value, ".17g")])
