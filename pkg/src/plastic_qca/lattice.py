"""Open chain of qubit sites with truncated integer gauge links.

The composite basis is indexed in mixed radix.  Occupation bits are the
most significant digits (site 0 first), followed by the link digits
(link 0, between sites 0 and 1, first).  A link value ``l`` is stored as
the digit ``l + cutoff``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import BoundsError, BudgetError, ConfigError, ShapeError

DEFAULT_MAX_DIM = 2**24

SNAPSHOT_FORMAT = "plastic-qca-state"
SNAPSHOT_VERSION = 1


class TruncationMode(str, enum.Enum):
    """How the link lowering operator behaves at ``l = -cutoff``."""

    HARD_CUTOFF = "hard_cutoff"
    CYCLIC_WRAP = "cyclic_wrap"


@dataclass(frozen=True)
class LatticeSpec:
    """Static description of the chain and its physical parameters.

    Parameters
    ----------
    num_sites : int
        Number of qubit sites N (even, >= 2).
    cutoff : int
        Link truncation; link values run over ``-cutoff..cutoff``.
    truncation : TruncationMode
        Behaviour of the lowering operator at the bottom of the link range.
    mass, coupling, speed : float
        Fermion mass m, gauge coupling g and the speed parameter c.
    epsilon, alpha : float
        Scaling knobs: ``dt = epsilon`` and ``dx = epsilon**(1 - alpha)``.
    edge_phases : bool
        If True the unpaired edge sites of the odd gate layer pick up the
        mass phase of their missing gate (see ``evolution.build_step``).
    max_dim : int
        Dimension budget; larger Hilbert spaces are rejected.
    """

    num_sites: int
    cutoff: int = 1
    truncation: TruncationMode = TruncationMode.CYCLIC_WRAP
    mass: float = 0.0
    coupling: float = 0.0
    speed: float = 1.0
    epsilon: float = 0.1
    alpha: float = 1.0
    edge_phases: bool = True
    max_dim: int = field(default=DEFAULT_MAX_DIM, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "truncation", TruncationMode(self.truncation))
        if int(self.num_sites) != self.num_sites or self.num_sites < 2 or self.num_sites % 2:
            raise ConfigError(f"num_sites must be an even integer >= 2, got {self.num_sites}")
        if int(self.cutoff) != self.cutoff or self.cutoff < 1:
            raise ConfigError(f"cutoff must be a positive integer, got {self.cutoff}")
        if self.mass < 0 or self.coupling < 0:
            raise ConfigError("mass and coupling must be non-negative")
        if not 0 < self.speed <= 1:
            raise ConfigError(f"speed must lie in (0, 1], got {self.speed}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 <= self.alpha <= 1:
            raise ConfigError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.dim > self.max_dim:
            raise BudgetError(
                f"Hilbert dimension {self.dim} exceeds budget {self.max_dim} "
                f"(N={self.num_sites}, cutoff={self.cutoff})"
            )

    @property
    def num_links(self) -> int:
        return self.num_sites - 1

    @property
    def link_dim(self) -> int:
        return 2 * self.cutoff + 1

    @property
    def fermion_dim(self) -> int:
        return 2**self.num_sites

    @property
    def gauge_dim(self) -> int:
        return self.link_dim**self.num_links

    @property
    def dim(self) -> int:
        return self.fermion_dim * self.gauge_dim

    def site_stride(self, site: int) -> int:
        self.check_site(site)
        return 2 ** (self.num_sites - 1 - site) * self.gauge_dim

    def link_stride(self, link: int) -> int:
        self.check_link(link)
        return self.link_dim ** (self.num_links - 1 - link)

    def check_site(self, site: int) -> None:
        if not 0 <= site < self.num_sites:
            raise BoundsError(f"site {site} outside 0..{self.num_sites - 1}")

    def check_link(self, link: int) -> None:
        if not 0 <= link < self.num_links:
            raise BoundsError(f"link {link} outside 0..{self.num_links - 1}")

    def replace(self, **changes) -> "LatticeSpec":
        fields = asdict(self)
        fields.update(changes)
        return LatticeSpec(**fields)


@dataclass(frozen=True)
class BasisLabel:
    """Occupation bits per site and integer link values per link."""

    occupations: tuple[int, ...]
    links: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "occupations", tuple(int(n) for n in self.occupations))
        object.__setattr__(self, "links", tuple(int(l) for l in self.links))


@dataclass
class StateVector:
    """Complex amplitudes over the composite basis of ``spec``."""

    amplitudes: np.ndarray
    spec: LatticeSpec

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (self.spec.dim,):
            raise ShapeError(
                f"amplitude vector of shape {self.amplitudes.shape} does not match dim {self.spec.dim}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.spec)


def flat_index(label: BasisLabel, spec: LatticeSpec) -> int:
    """Mixed-radix index of ``label``."""
    if len(label.occupations) != spec.num_sites or len(label.links) != spec.num_links:
        raise BoundsError("label length does not match the lattice")
    index = 0
    for n in label.occupations:
        if n not in (0, 1):
            raise BoundsError(f"occupation {n} is not 0 or 1")
        index = 2 * index + n
    for l in label.links:
        if abs(l) > spec.cutoff:
            raise BoundsError(f"link value {l} outside [-{spec.cutoff}, {spec.cutoff}]")
        index = spec.link_dim * index + (l + spec.cutoff)
    return index


def unflatten(index: int, spec: LatticeSpec) -> BasisLabel:
    """Inverse of :func:`flat_index`."""
    if not 0 <= index < spec.dim:
        raise BoundsError(f"index {index} outside 0..{spec.dim - 1}")
    index = int(index)
    links = []
    for _ in range(spec.num_links):
        index, digit = divmod(index, spec.link_dim)
        links.append(digit - spec.cutoff)
    occupations = []
    for _ in range(spec.num_sites):
        index, bit = divmod(index, 2)
        occupations.append(bit)
    return BasisLabel(tuple(reversed(occupations)), tuple(reversed(links)))


def basis_state(label: BasisLabel, spec: LatticeSpec) -> StateVector:
    amplitudes = np.zeros(spec.dim, dtype=np.complex128)
    amplitudes[flat_index(label, spec)] = 1.0
    return StateVector(amplitudes, spec)


def vacuum(spec: LatticeSpec) -> StateVector:
    """All sites empty, all links zero."""
    return basis_state(BasisLabel((0,) * spec.num_sites, (0,) * spec.num_links), spec)


@lru_cache(maxsize=64)
def _occupation_column(num_sites: int, cutoff: int, site: int) -> np.ndarray:
    gauge_dim = (2 * cutoff + 1) ** (num_sites - 1)
    dim = 2**num_sites * gauge_dim
    stride = 2 ** (num_sites - 1 - site) * gauge_dim
    column = (np.arange(dim, dtype=np.int64) // stride) % 2
    column.setflags(write=False)
    return column


@lru_cache(maxsize=64)
def _link_column(num_sites: int, cutoff: int, link: int) -> np.ndarray:
    d = 2 * cutoff + 1
    dim = 2**num_sites * d ** (num_sites - 1)
    stride = d ** (num_sites - 2 - link)
    column = (np.arange(dim, dtype=np.int64) // stride) % d - cutoff
    column.setflags(write=False)
    return column


def site_occupations(spec: LatticeSpec, site: int) -> np.ndarray:
    """Occupation of ``site`` for every basis index (read-only int array)."""
    spec.check_site(site)
    return _occupation_column(spec.num_sites, spec.cutoff, site)


def link_values(spec: LatticeSpec, link: int) -> np.ndarray:
    """Value of ``link`` for every basis index (read-only int array)."""
    spec.check_link(link)
    return _link_column(spec.num_sites, spec.cutoff, link)


def total_occupation(spec: LatticeSpec) -> np.ndarray:
    return sum(site_occupations(spec, p) for p in range(spec.num_sites))


def interior_mask(spec: LatticeSpec, margin: int) -> np.ndarray:
    """True where every link satisfies ``|l| <= cutoff - margin``."""
    if margin < 0 or margin > spec.cutoff:
        raise BoundsError(f"margin {margin} outside 0..{spec.cutoff}")
    mask = np.ones(spec.dim, dtype=bool)
    for j in range(spec.num_links):
        mask &= np.abs(link_values(spec, j)) <= spec.cutoff - margin
    return mask


def project_interior(state: StateVector, margin: int) -> StateVector:
    """Zero every amplitude with a link closer than ``margin`` to the cutoff."""
    mask = interior_mask(state.spec, margin)
    return StateVector(np.where(mask, state.amplitudes, 0.0), state.spec)


def save_state(path: str | Path, state: StateVector) -> None:
    """Write a self-describing JSON snapshot; floats round-trip exactly."""
    spec = state.spec
    header = asdict(spec)
    header["truncation"] = spec.truncation.value
    header.pop("max_dim")
    payload = {
        "format": SNAPSHOT_FORMAT,
        "version": SNAPSHOT_VERSION,
        "spec": header,
        "num_sites": spec.num_sites,
        "cutoff": spec.cutoff,
        "truncation_mode": spec.truncation.value,
        "dim": spec.dim,
        "amplitudes": [[float(z.real), float(z.imag)] for z in state.amplitudes],
    }
    Path(path).write_text(json.dumps(payload) + "\n")


def load_state(path: str | Path, max_dim: int = DEFAULT_MAX_DIM) -> StateVector:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != SNAPSHOT_FORMAT:
        raise ConfigError(f"{path} is not a state snapshot")
    if payload.get("version") != SNAPSHOT_VERSION:
        raise ConfigError(f"unsupported snapshot version {payload.get('version')}")
    spec = LatticeSpec(**payload["spec"], max_dim=max_dim)
    if spec.dim != payload["dim"]:
        raise ConfigError("snapshot dim does not match its lattice header")
    pairs = np.asarray(payload["amplitudes"], dtype=np.float64).reshape(-1, 2)
    amplitudes = np.empty(len(pairs), dtype=np.complex128)
    amplitudes.real = pairs[:, 0]
    amplitudes.imag = pairs[:, 1]
    return StateVector(amplitudes, spec)

