"""Local gates of the automaton and the scaling parametrization feeding them."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import cosdg, sindg

from .errors import BoundsError, DomainError
from .lattice import LatticeSpec, link_values
from .operators import LinearOperator, embed, link, lowering_matrix, site


class GateVariant(str, enum.Enum):
    W = "W"
    W_PRIME = "WPrime"
    W_DOUBLE_PRIME = "WDoublePrime"


@dataclass(frozen=True)
class GateParams:
    """Derived step quantities.

    ``corner_angle`` is the exponent x of the ``|11><11|`` phase
    ``exp(i*pi*x)`` used by the ``WDoublePrime`` variant; it equals
    ``(dt/dx)**2 = epsilon**(2*alpha)`` under the scaling parametrization.
    """

    delta_t: float
    delta_x: float
    kappa: float
    theta: float
    zeta: float
    variant: GateVariant = GateVariant.W
    corner_angle: float = 0.0
    reinstate_phases: bool = True

    def __post_init__(self):
        object.__setattr__(self, "variant", GateVariant(self.variant))

    @classmethod
    def from_angles(
        cls,
        theta: float,
        zeta: float,
        *,
        delta_t: float = 1.0,
        delta_x: float = 1.0,
        variant: GateVariant = GateVariant.W,
        corner_angle: float = 0.0,
        reinstate_phases: bool = True,
    ) -> "GateParams":
        """Parameters set directly, bypassing the scaling relations."""
        return cls(
            delta_t=delta_t,
            delta_x=delta_x,
            kappa=math.cos(theta),
            theta=theta,
            zeta=zeta,
            variant=variant,
            corner_angle=corner_angle,
            reinstate_phases=reinstate_phases,
        )

    def with_variant(self, variant: GateVariant) -> "GateParams":
        return replace(self, variant=GateVariant(variant))

    @property
    def corner(self) -> complex:
        # degree-based trig keeps the alpha = 0 endpoint at exactly -1
        degrees = 180.0 * self.corner_angle
        return complex(cosdg(degrees), sindg(degrees))


def scaling_params(
    epsilon: float,
    alpha: float,
    c: float,
    m: float,
    variant: GateVariant = GateVariant.W,
) -> GateParams:
    """dt = eps, dx = eps**(1-alpha), kappa = eps**alpha, theta = arccos(c kappa), zeta = m eps / sin(theta).

    The staggered sign of the mass is carried by alternating W and its
    conjugate between the two layers, so ``zeta`` is non-negative.
    """
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if not 0 <= alpha <= 1:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    if not 0 < c <= 1:
        raise DomainError(f"c must lie in (0, 1], got {c}")
    if m < 0:
        raise DomainError(f"mass must be non-negative, got {m}")
    kappa = epsilon**alpha
    if c * kappa > 1:
        raise DomainError(f"c * epsilon**alpha = {c * kappa} exceeds 1; theta would be complex")
    theta = math.acos(c * kappa)
    sin_theta = math.sin(theta)
    if m == 0:
        zeta = 0.0
    elif sin_theta <= 0:
        raise DomainError("sin(theta) vanishes (c * epsilon**alpha = 1); the mass phase is undefined")
    else:
        zeta = m * epsilon / sin_theta
    return GateParams(
        delta_t=epsilon,
        delta_x=epsilon ** (1 - alpha),
        kappa=kappa,
        theta=theta,
        zeta=zeta,
        variant=GateVariant(variant),
        corner_angle=epsilon ** (2 * alpha),
    )


def params_for(spec: LatticeSpec, variant: GateVariant = GateVariant.W) -> GateParams:
    return scaling_params(spec.epsilon, spec.alpha, spec.speed, spec.mass, variant)


def gate_matrix(params: GateParams, spec: LatticeSpec, conjugated: bool = False) -> np.ndarray:
    """Dense ``4d x 4d`` gate on (qubit p, qubit p+1) x (link p+1/2).

    Rows and columns are ordered ``(n_p n_{p+1}) x link`` with the pair
    states ``00, 01, 10, 11``.
    """
    d = spec.link_dim
    eye = np.eye(d, dtype=np.complex128)
    lower = lowering_matrix(spec.cutoff, spec.truncation)
    if params.variant is GateVariant.W_PRIME:
        lower = eye
    s, c = math.sin(params.theta), math.cos(params.theta)
    stay_01 = np.exp(-1j * params.zeta) * s
    stay_10 = np.exp(1j * params.zeta) * s
    corner = 1.0
    hop_sign = 1.0
    if params.variant is GateVariant.W_DOUBLE_PRIME:
        corner = params.corner
        hop_sign = -1.0
        if not params.reinstate_phases:
            stay_01 = stay_10 = s

    w = np.zeros((4 * d, 4 * d), dtype=np.complex128)
    blk = lambda i, j: (slice(i * d, (i + 1) * d), slice(j * d, (j + 1) * d))  # noqa: E731
    w[blk(0, 0)] = eye
    w[blk(1, 1)] = stay_01 * eye
    w[blk(1, 2)] = hop_sign * c * lower
    w[blk(2, 1)] = -hop_sign * c * lower.conj().T
    w[blk(2, 2)] = stay_10 * eye
    w[blk(3, 3)] = corner * eye
    return w.conj() if conjugated else w


def gate_factors(p: int):
    return [site(p), site(p + 1), link(p)]


def build_gate(p: int, params: GateParams, spec: LatticeSpec, conjugated: bool = False) -> LinearOperator:
    """Gate on the pair ``(p, p+1)`` and the link between them, identity elsewhere."""
    if not 0 <= p < spec.num_sites - 1:
        raise BoundsError(f"gate position {p} outside 0..{spec.num_sites - 2}")
    return embed(gate_matrix(params, spec, conjugated), gate_factors(p), spec)


def electric_phase_exponent(spec: LatticeSpec, params: GateParams | None = None) -> float:
    """``dx * dt * g**2``; taken from ``params`` when given, else from the spec scaling."""
    if params is None:
        dxdt = spec.epsilon ** (2 - spec.alpha)
    else:
        dxdt = params.delta_x * params.delta_t
    return dxdt * spec.coupling**2


def interaction_diagonal(spec: LatticeSpec, params: GateParams | None = None) -> np.ndarray:
    strength = electric_phase_exponent(spec, params)
    squares = np.zeros(spec.dim, dtype=np.float64)
    for j in range(spec.num_links):
        squares += link_values(spec, j) ** 2
    return np.exp(-0.5j * strength * squares)


def interaction_layer(spec: LatticeSpec, params: GateParams | None = None) -> LinearOperator:
    """Diagonal electric phase ``exp(-(i/2) dx dt g^2 sum_links L^2)`` on all links at once."""
    return LinearOperator.diagonal(interaction_diagonal(spec, params), spec)
