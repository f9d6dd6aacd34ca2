"""Local U(1) gauge transformations and Gauss-law generators.

At each site p the transformation applies ``R_phi(p)`` to the qubit (phase
on |1>), ``T_phi(p)`` to the link on its left and ``T_-phi(p)`` to the link
on its right, so every interior link picks up ``phi(p+1) - phi(p)``.
Boundary sites have a single neighbouring link.

On a finite link range invariance is exact in two cases.  In HardCutoff
mode the truncated lowering operator still shifts the link phase by
exactly ``exp(-i phi)``.  In CyclicWrap mode the wrap ``-L -> +L`` costs
``exp(i (2L+1) phi)``, so the angles must be multiples of ``2 pi / (2L+1)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .evolution import StepProgram, build_step
from .gates import GateParams
from .lattice import LatticeSpec, StateVector, TruncationMode, interior_mask, link_values, site_occupations
from .operators import LinearOperator


@dataclass(frozen=True)
class GaugeField:
    angles: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))

    @classmethod
    def quantized(cls, integers: Sequence[int], cutoff: int) -> "GaugeField":
        """Angles ``2 pi r_p / (2 cutoff + 1)``."""
        return cls(tuple(2 * math.pi * int(r) / (2 * cutoff + 1) for r in integers))

    @classmethod
    def zero(cls, num_sites: int) -> "GaugeField":
        return cls((0.0,) * num_sites)

    def is_quantized(self, cutoff: int, tol: float = 1e-12) -> bool:
        d = 2 * cutoff + 1
        return all(abs(np.exp(1j * d * a) - 1) <= tol for a in self.angles)


def read_gauge_fields(path: str | Path, cutoff: int | None = None) -> list[GaugeField]:
    """Gauge fields from JSON.

    Accepts ``{"angles": [...]}``, ``{"integers": [...]}`` (quantized, needs
    ``cutoff``) or a list of such objects.
    """
    payload = json.loads(Path(path).read_text())
    return [gauge_field_from_json(item, cutoff) for item in (payload if isinstance(payload, list) else [payload])]


def gauge_field_from_json(item, cutoff: int | None = None) -> GaugeField:
    if isinstance(item, dict) and "angles" in item:
        return GaugeField(item["angles"])
    if isinstance(item, dict) and "integers" in item:
        if cutoff is None:
            raise ConfigError("integer gauge fields need the cutoff")
        return GaugeField.quantized(item["integers"], cutoff)
    raise ConfigError(f"cannot read a gauge field from {item!r}")


def _check_field(phi: GaugeField, spec: LatticeSpec) -> None:
    if len(phi.angles) != spec.num_sites:
        raise ConfigError(f"gauge field has {len(phi.angles)} angles, lattice has {spec.num_sites} sites")
    if not all(math.isfinite(a) for a in phi.angles):
        raise ConfigError("gauge angles must be finite")


def gauge_phases(phi: GaugeField, spec: LatticeSpec) -> np.ndarray:
    """Total phase angle of every basis state, accumulated site by site."""
    _check_field(phi, spec)
    angle = np.zeros(spec.dim)
    for p, a in enumerate(phi.angles):
        angle += a * site_occupations(spec, p)
        if p > 0:
            angle += a * link_values(spec, p - 1)
        if p < spec.num_links:
            angle -= a * link_values(spec, p)
    return angle


def gauge_transform(phi: GaugeField, spec: LatticeSpec) -> LinearOperator:
    """Diagonal unitary ``P_phi``."""
    return LinearOperator.diagonal(np.exp(1j * gauge_phases(phi, spec)), spec)


def gauss_generator(p: int, spec: LatticeSpec) -> LinearOperator:
    """``Q_p = n_p + L_{p-1/2} - L_{p+1/2}`` (missing boundary links count as 0)."""
    return LinearOperator.diagonal(gauss_values(p, spec).astype(np.complex128), spec)


def gauss_values(p: int, spec: LatticeSpec) -> np.ndarray:
    spec.check_site(p)
    values = site_occupations(spec, p).copy()
    if p > 0:
        values = values + link_values(spec, p - 1)
    if p < spec.num_links:
        values = values - link_values(spec, p)
    return values


def gauge_commutator(
    phi: GaugeField,
    spec: LatticeSpec,
    params: GateParams,
    margin: int = 0,
    *,
    allow_unquantized: bool = False,
    G: LinearOperator | None = None,
) -> float:
    """``||(P_phi G - G P_phi) Pi_margin||_F``.

    ``Pi_margin`` keeps basis states whose links all sit at least
    ``margin`` away from the cutoff (``margin=0``: identity).
    """
    _check_field(phi, spec)
    if spec.truncation is TruncationMode.CYCLIC_WRAP and not allow_unquantized and not phi.is_quantized(spec.cutoff):
        raise ConfigError(
            f"CyclicWrap invariance needs angles in 2 pi Z / {spec.link_dim}; pass allow_unquantized to override"
        )
    if G is None:
        G = build_step(spec, params)
    P = gauge_transform(phi, spec)
    difference = P @ G - G @ P
    if margin:
        difference = difference @ LinearOperator.diagonal(interior_mask(spec, margin).astype(complex), spec)
    return difference.frobenius_norm()


@dataclass
class ConservationReport:
    drift: float
    per_site: list[float]
    boundary_contact: bool
    norm_loss: float


def generator_conservation(
    spec: LatticeSpec,
    params: GateParams,
    state: StateVector,
    steps: int,
    *,
    contact_tol: float = 1e-14,
) -> ConservationReport:
    """Largest change of ``<Q_p>`` over ``steps`` applications of G.

    Conservation is exact only while the state never touches the link
    boundary (the wrap seam in CyclicWrap, the annihilating edge in
    HardCutoff); ``boundary_contact`` flags trajectories that do.
    """
    if steps < 0:
        raise ConfigError("steps must be non-negative")
    if state.spec.dim != spec.dim:
        raise ConfigError("state does not belong to this lattice")
    generators = [gauss_values(p, spec) for p in range(spec.num_sites)]
    edge = ~interior_mask(spec, 1)
    program = StepProgram.build(spec, params)

    psi = state.amplitudes.copy()
    prob = np.abs(psi) ** 2
    start = np.array([prob @ q for q in generators])
    norm0 = math.sqrt(prob.sum())
    drift = np.zeros(spec.num_sites)
    contact = bool(prob[edge].sum() > contact_tol)
    for _ in range(steps):
        psi = program.apply(psi)
        prob = np.abs(psi) ** 2
        contact = contact or bool(prob[edge].sum() > contact_tol)
        drift = np.maximum(drift, np.abs(np.array([prob @ q for q in generators]) - start))
    return ConservationReport(
        drift=float(drift.max()),
        per_site=drift.tolist(),
        boundary_contact=contact,
        norm_loss=norm0 - math.sqrt(prob.sum()),
    )
