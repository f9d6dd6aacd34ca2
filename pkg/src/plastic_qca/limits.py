"""Continuum limits of the automaton.

Two regimes are checked numerically:

* ``alpha = 1``: one step G approaches ``exp(-2i eps H_QCA)``, with an
  error of second order in eps.
* ``alpha = 0``: in the free one-particle sector the automaton reduces to a
  two-component walk on the coarse lattice of pairs; its dispersion
  approaches the Dirac relation ``omega^2 = c^2 k^2 + m^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigError, DomainError, NumericalError
from .evolution import SupportProgram, build_step
from .fermions import build_hqca, jw_operators
from .gates import GateParams, GateVariant, build_gate, scaling_params
from .lattice import BasisLabel, LatticeSpec, TruncationMode, flat_index
from .operators import LinearOperator

# ---------------------------------------------------------------------------
# alpha = 1: Hamiltonian limit


def hermitian_eigensystem(H: LinearOperator | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dense = H.to_dense() if isinstance(H, LinearOperator) else np.asarray(H)
    return np.linalg.eigh(dense)


def expm_hermitian(eigensystem: tuple[np.ndarray, np.ndarray], t: float) -> np.ndarray:
    """``exp(-i t H)`` from the eigendecomposition of Hermitian H."""
    w, U = eigensystem
    return (U * np.exp(-1j * t * w)) @ U.conj().T


@dataclass
class ConvergenceCurve:
    epsilons: list[float]
    residuals: list[float]
    slope: float = float("nan")
    intercept: float = float("nan")
    degenerate: bool = False

    def rows(self):
        return list(zip(self.epsilons, self.residuals))


def fit_loglog(epsilons: Sequence[float], residuals: Sequence[float], floor: float = 1e-13) -> tuple[float, float, bool]:
    """Least-squares slope and intercept of ``log r`` against ``log eps``.

    Returns ``degenerate=True`` (and NaN fit) when a residual sits at the
    rounding floor, where a power law is meaningless.
    """
    eps = np.asarray(epsilons, dtype=float)
    res = np.asarray(residuals, dtype=float)
    if len(eps) < 2:
        raise ConfigError("a log-log fit needs at least two points")
    if np.any(res <= floor):
        return float("nan"), float("nan"), True
    slope, intercept = np.polyfit(np.log(eps), np.log(res), 1)
    return float(slope), float(intercept), False


def hamiltonian_convergence(
    spec_template: LatticeSpec,
    eps_list: Sequence[float],
    *,
    theta: float | None = None,
) -> ConvergenceCurve:
    """Residuals ``||G(eps) - exp(-2i eps H_QCA)||_F`` along ``eps_list``.

    ``theta`` overrides the scaling relation for the gate angle (zeta is
    then taken as zero); used to probe the trivial all-identity gate.
    """
    if spec_template.alpha != 1:
        raise ConfigError("the Hamiltonian limit needs alpha = 1")
    if spec_template.truncation is not TruncationMode.CYCLIC_WRAP:
        raise ConfigError("the Hamiltonian limit is checked in CyclicWrap mode")
    if any(not e > 0 or spec_template.speed * e > 1 for e in eps_list):
        raise ConfigError("every epsilon must satisfy 0 < c * eps <= 1")
    eigensystem = hermitian_eigensystem(build_hqca(spec_template))
    residuals = []
    for eps in eps_list:
        spec = spec_template.replace(epsilon=eps)
        params = scaling_params(eps, 1.0, spec.speed, spec.mass)
        if theta is not None:
            params = GateParams(params.delta_t, params.delta_x, params.kappa, theta, 0.0)
        G = build_step(spec, params).to_dense()
        residuals.append(float(np.linalg.norm(G - expm_hermitian(eigensystem, 2 * eps))))
    slope, intercept, degenerate = fit_loglog(eps_list, residuals) if len(eps_list) > 1 else (float("nan"), float("nan"), False)
    return ConvergenceCurve(list(map(float, eps_list)), residuals, slope, intercept, degenerate)


def first_order_generator_residual(spec: LatticeSpec, eps: float) -> float:
    """``||(G - I)/(-2i eps) - H_QCA||_F`` at alpha = 1."""
    spec = spec.replace(epsilon=eps, alpha=1.0)
    G = build_step(spec, scaling_params(eps, 1.0, spec.speed, spec.mass))
    generator = (G - LinearOperator.identity(spec)) * (1 / (-2j * eps))
    return (generator - build_hqca(spec)).frobenius_norm()


# ---------------------------------------------------------------------------
# alpha = 0: one-particle walk


@dataclass
class SpinorAmplitudes:
    """Pairs ``(psi_l, psi_r)`` on coarse sites x (spacing 2 eps)."""

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.ndim != 2 or self.values.shape[1] != 2:
            raise ValueError(f"spinor field must have shape (M, 2), got {self.values.shape}")

    @classmethod
    def from_sites(cls, psi, right_sign: float = 1.0) -> "SpinorAmplitudes":
        """Pair site amplitudes: even sites give psi_l, odd sites ``right_sign * psi_r``."""
        psi = np.asarray(psi, dtype=np.complex128)
        if psi.ndim != 1 or len(psi) % 2:
            raise ValueError("need an even number of site amplitudes")
        return cls(np.stack([psi[0::2], right_sign * psi[1::2]], axis=1))

    def to_sites(self, right_sign: float = 1.0) -> np.ndarray:
        psi = np.empty(2 * len(self.values), dtype=np.complex128)
        psi[0::2] = self.values[:, 0]
        psi[1::2] = right_sign * self.values[:, 1]
        return psi

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def touches_seam(self, tol: float = 1e-14) -> bool:
        edge = np.abs(self.values[[0, -1]]).max()
        return bool(edge > tol)


def walk_matrices(theta: float, zeta: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Coefficients of ``s(x - 2eps)``, ``s(x)`` and ``s(x + 2eps)`` in the one-step recurrence."""
    s, c = math.sin(theta), math.cos(theta)
    em, ep = np.exp(-1j * zeta), np.exp(1j * zeta)
    a_minus = np.array([[0, -c * em * s], [0, c**2]], dtype=np.complex128)
    a_zero = np.array([[em**2 * s**2, c * ep * s], [-c * em * s, ep**2 * s**2]], dtype=np.complex128)
    a_plus = np.array([[c**2, 0], [c * ep * s, 0]], dtype=np.complex128)
    return a_minus, a_zero, a_plus


def walk_step(
    field_: SpinorAmplitudes,
    theta: float,
    zeta: float,
    boundary: str = "periodic",
    edge_phases: bool = True,
) -> SpinorAmplitudes:
    """One step ``t -> t + 2 eps`` of the free one-particle recurrence.

    ``boundary="periodic"`` wraps the coarse chain.  ``"open"`` matches a
    finite automaton chain: ghost cells are zero and the two edge sites,
    left unpaired by the first layer, pick up only their mass phase (or
    nothing when ``edge_phases`` is False).
    """
    a_minus, a_zero, a_plus = walk_matrices(theta, zeta)
    s = field_.values
    if boundary == "periodic":
        left, right = np.roll(s, 1, axis=0), np.roll(s, -1, axis=0)
    elif boundary == "open":
        zero = np.zeros((1, 2), dtype=np.complex128)
        left = np.concatenate([zero, s[:-1]])
        right = np.concatenate([s[1:], zero])
    else:
        raise ValueError(f"unknown boundary {boundary!r}")
    out = left @ a_minus.T + s @ a_zero.T + right @ a_plus.T

    if boundary == "open":
        sin_t, cos_t = math.sin(theta), math.cos(theta)
        em, ep = np.exp(-1j * zeta), np.exp(1j * zeta)
        first = (em if edge_phases else 1.0) - em * sin_t
        last = (ep if edge_phases else 1.0) - ep * sin_t
        # first-layer defect at the edges, propagated through the second layer
        delta_l = first * s[0, 0]
        out[0, 0] += em * sin_t * delta_l
        out[0, 1] += -cos_t * delta_l
        delta_r = last * s[-1, 1]
        out[-1, 0] += cos_t * delta_r
        out[-1, 1] += ep * sin_t * delta_r
    return SpinorAmplitudes(out)


def walk_step_layered(
    field_: SpinorAmplitudes,
    theta: float,
    zeta: float,
    boundary: str = "periodic",
    edge_phases: bool = True,
    hop_sign: float = -1.0,
) -> SpinorAmplitudes:
    """The same step as two explicit gate layers on the site amplitudes.

    ``hop_sign=-1`` reproduces the sign convention of :func:`walk_step`;
    ``+1`` is the W gate acting on raw site amplitudes.
    """
    psi = field_.to_sites()
    n = len(psi)
    s, c = math.sin(theta), math.cos(theta)

    def pair(psi, p, z):
        left, right = psi[p], psi[(p + 1) % n]
        psi[p] = np.exp(1j * z) * s * left - hop_sign * c * right
        psi[(p + 1) % n] = hop_sign * c * left + np.exp(-1j * z) * s * right

    out = psi.copy()
    for p in range(1, n - 1, 2):
        pair(out, p, zeta)
    if boundary == "periodic":
        pair(out, n - 1, zeta)
    elif edge_phases:
        out[0] *= np.exp(-1j * zeta)
        out[n - 1] *= np.exp(1j * zeta)
    for p in range(0, n, 2):
        pair(out, p, -zeta)
    return SpinorAmplitudes.from_sites(out)


def one_particle_amplitudes(psi: np.ndarray, spec: LatticeSpec) -> tuple[np.ndarray, float]:
    """Per-site amplitudes of the one-particle sector, summed over link configurations.

    Also returns the weight outside that sector.
    """
    blocks = psi.reshape(spec.fermion_dim, spec.gauge_dim)
    amplitudes = np.empty(spec.num_sites, dtype=np.complex128)
    inside = 0.0
    for q in range(spec.num_sites):
        row = blocks[1 << (spec.num_sites - 1 - q)]
        amplitudes[q] = row.sum()
        inside += float(np.sum(np.abs(row) ** 2))
    return amplitudes, max(float(np.sum(np.abs(psi) ** 2)) - inside, 0.0)


def support_one_particle(support: dict, spec: LatticeSpec) -> tuple[np.ndarray, float]:
    """Same as :func:`one_particle_amplitudes` for a sparse support."""
    amplitudes = np.zeros(spec.num_sites, dtype=np.complex128)
    leaked = 0.0
    for index, amp in support.items():
        fermions = index // spec.gauge_dim
        if fermions and fermions & (fermions - 1) == 0:
            amplitudes[spec.num_sites - fermions.bit_length()] += amp
        else:
            leaked += abs(amp) ** 2
    return amplitudes, leaked


def walk_vs_qca(
    spec: LatticeSpec,
    params: GateParams,
    steps: int,
    initial=None,
    *,
    backend: str | None = None,
) -> float:
    """Largest amplitude deviation between the automaton and the walk.

    ``initial`` is a length-N array of one-particle amplitudes (default: a
    single fermion at site N/2 - 1); all links start at zero.  The walk
    runs on the open coarse chain with the printed recurrence.  The
    automaton is evolved on its sparse support (:class:`SupportProgram`),
    so lattices beyond the dense dimension budget are fine.  For the W
    and WPrime gates its right component equals minus the odd-site
    amplitude; WDoublePrime already uses the walk's sign convention.
    """
    if spec.coupling != 0:
        raise ConfigError("the one-particle comparison needs g = 0")
    if steps < 0:
        raise ConfigError("steps must be non-negative")
    if params.variant is not GateVariant.W_PRIME and spec.cutoff < steps + 1:
        raise ConfigError(f"cutoff {spec.cutoff} too small for {steps} steps (need >= steps + 1)")
    if initial is None:
        initial = np.zeros(spec.num_sites, dtype=np.complex128)
        initial[spec.num_sites // 2 - 1] = 1.0
    initial = np.asarray(initial, dtype=np.complex128)
    if initial.shape != (spec.num_sites,):
        raise ConfigError("initial amplitudes must have one entry per site")

    support = {}
    for q in range(spec.num_sites):
        if initial[q] != 0:
            occ = tuple(int(i == q) for i in range(spec.num_sites))
            support[flat_index(BasisLabel(occ, (0,) * spec.num_links), spec)] = complex(initial[q])

    zeta = params.zeta
    if params.variant is GateVariant.W_DOUBLE_PRIME and not params.reinstate_phases:
        zeta = 0.0
    right_sign = 1.0 if params.variant is GateVariant.W_DOUBLE_PRIME else -1.0
    walker = SpinorAmplitudes.from_sites(initial, right_sign)
    program = SupportProgram(spec, params)

    deviation = 0.0
    for _ in range(steps):
        support = program.apply(support)
        walker = walk_step(walker, params.theta, zeta, boundary="open", edge_phases=spec.edge_phases)
        sites, leaked = support_one_particle(support, spec)
        deviation = max(deviation, float(np.abs(sites - walker.to_sites(right_sign)).max()), math.sqrt(leaked))
    return deviation


def pq_matrices(c: float, m: float) -> tuple[np.ndarray, np.ndarray]:
    """Transport matrix P and mass matrix Q of the continuum walk equation."""
    if not 0 < c <= 1:
        raise DomainError(f"c must lie in (0, 1], got {c}")
    r = math.sqrt(1 - c * c)
    P = np.array([[c * c, c * r], [c * r, -c * c]])
    Q = np.array([[1j * m * r, -1j * c * m], [-1j * c * m, -1j * m * r]])
    return P, Q


def spinor_basis(c: float) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal eigenvectors ``b_-``, ``b_+`` of P (eigenvalues -c, +c)."""
    if not 0 < c <= 1:
        raise DomainError(f"c must lie in (0, 1], got {c}")
    lo, hi = math.sqrt((1 - c) / 2), math.sqrt((1 + c) / 2)
    return np.array([-lo, hi]), np.array([hi, lo])


def transfer_matrix(k: float, params: GateParams) -> np.ndarray:
    """Momentum-space one-step matrix ``A_- e^{-2i eps k} + A_0 + A_+ e^{2i eps k}``."""
    a_minus, a_zero, a_plus = walk_matrices(params.theta, params.zeta)
    phase = np.exp(2j * params.delta_t * k)
    return a_minus / phase + a_zero + a_plus * phase


def walk_dispersion(k: float, params: GateParams, tol: float = 1e-10) -> tuple[float, float]:
    """Eigenfrequencies ``(omega_+, omega_-)`` of the walk at momentum k, with omega_+ >= omega_-."""
    eps = params.delta_t
    if abs(k) > math.pi / (2 * eps) * (1 + 1e-12):
        raise DomainError(f"|k| = {abs(k)} outside the coarse Brillouin zone pi/(2 eps)")
    eigenvalues = np.linalg.eigvals(transfer_matrix(k, params))
    if np.max(np.abs(np.abs(eigenvalues) - 1)) > tol:
        raise NumericalError(f"transfer matrix eigenvalues {eigenvalues} are not unimodular")
    omegas = sorted((-np.angle(eigenvalues) / (2 * eps)).tolist())
    return omegas[1], omegas[0]


def dirac_dispersion(k: float, c: float, m: float) -> tuple[float, float]:
    energy = math.sqrt(c * c * k * k + m * m)
    return energy, -energy


@dataclass
class DispersionRow:
    k: float
    walk_plus: float
    walk_minus: float
    dirac_plus: float
    dirac_minus: float

    @property
    def error(self) -> float:
        return max(abs(self.walk_plus - self.dirac_plus), abs(self.walk_minus - self.dirac_minus))


def dispersion_table(k_list: Sequence[float], epsilon: float, c: float, m: float) -> list[DispersionRow]:
    """Walk versus Dirac frequencies at alpha = 0."""
    params = scaling_params(epsilon, 0.0, c, m)
    rows = []
    for k in k_list:
        wp, wm = walk_dispersion(k, params)
        dp, dm = dirac_dispersion(k, c, m)
        rows.append(DispersionRow(float(k), wp, wm, dp, dm))
    return rows


def empirical_order(epsilons: Sequence[float], errors: Sequence[float]) -> list[float]:
    """Successive orders ``log(e_i / e_{i+1}) / log(eps_i / eps_{i+1})``."""
    return [
        math.log(errors[i] / errors[i + 1]) / math.log(epsilons[i] / epsilons[i + 1])
        for i in range(len(errors) - 1)
    ]


# ---------------------------------------------------------------------------
# order-0 behaviour of the scaled-corner gate


def controlz_degeneration(
    spec: LatticeSpec,
    *,
    corner_angle: float = 1.0,
    zeta: float = 0.0,
    theta: float = math.pi / 2,
    p: int = 0,
) -> float:
    """Distance of the WDoublePrime gate from ``1 - 2 n_p n_{p+1}``.

    Evaluated on the full space with Jordan-Wigner number operators and
    reported per gate support, i.e. divided by ``sqrt(dim / 4d)``, so the
    corner flipped to +1 gives ``sqrt(4d)``.
    """
    params = GateParams.from_angles(theta, zeta, variant=GateVariant.W_DOUBLE_PRIME, corner_angle=corner_angle)
    gate = build_gate(p, params, spec, conjugated=p % 2 == 0)
    ops = jw_operators(spec)
    target = LinearOperator.identity(spec) - 2 * (ops.number(p) @ ops.number(p + 1))
    rest = spec.dim / (4 * spec.link_dim)
    return (gate - target).frobenius_norm() / math.sqrt(rest)
