"""
Dense complex linear algebra over multiparty Hilbert spaces.

Conventions
-----------
Amplitudes are stored row-major over party indices with party 0 the most
significant digit, so ``kron(|0>, |1>)`` is the unit vector at index 1.
Party indices are 0-based throughout the Python API.
"""
import logging
from itertools import combinations
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .errors import ArgumentError, CapacityError, ContractError, InvariantViolation, LayoutError
from .settings import get_settings

logger = logging.getLogger(__name__)

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
PSD_CLAMP = -1e-10
PSD_ZERO = 1e-12
TRACE_TOL = 1e-10
SCHMIDT_DROP = 1e-12
EIG_HERMITIAN_TOL = 1e-8

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def check_capacity(total: int) -> None:
    """Raise CapacityError if a total dimension exceeds the configured cap."""
    cap = get_settings().max_dimension
    if total > cap:
        raise CapacityError(f"total dimension {total} exceeds cap {cap}")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


class PartyLayout(BaseModel):
    """Per-party local dimensions of an n-party Hilbert space."""
    model_config = ConfigDict(frozen=True)

    dims: Tuple[int, ...]

    @field_validator("dims", mode="before")
    @classmethod
    def _coerce(cls, value):
        return tuple(int(d) for d in value)

    @model_validator(mode="after")
    def _check(self):
        if len(self.dims) < 1:
            raise ArgumentError("layout needs at least one party")
        if any(d < 2 for d in self.dims):
            raise ArgumentError(f"every local dimension must be >= 2, got {self.dims}")
        check_capacity(self.total)
        return self

    @classmethod
    def uniform(cls, n: int, d: int) -> "PartyLayout":
        return cls(dims=(d,) * n)

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    @property
    def is_qubit(self) -> bool:
        return all(d == 2 for d in self.dims)

    def sub(self, parties: Sequence[int]) -> "PartyLayout":
        return PartyLayout(dims=tuple(self.dims[i] for i in parties))


class PureState(BaseModel):
    """Unit vector over a PartyLayout."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    layout: PartyLayout
    amps: np.ndarray
    label: str = ""
    notes: Tuple[str, ...] = ()  # metadata flags, e.g. normalization mismatch

    @field_validator("amps", mode="before")
    @classmethod
    def _as_vector(cls, value):
        return _frozen(np.ravel(value))

    @model_validator(mode="after")
    def _check(self):
        if self.amps.shape != (self.layout.total,):
            raise LayoutError(
                f"amplitude vector has length {self.amps.size}, layout needs {self.layout.total}")
        norm = float(np.linalg.norm(self.amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ArgumentError(f"state is not normalized (norm {norm!r})")
        return self

    @classmethod
    def from_unnormalized(cls, layout: PartyLayout, amps, **kwargs) -> "PureState":
        amps = np.asarray(amps, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ArgumentError("zero vector cannot be normalized")
        return cls(layout=layout, amps=amps / norm, **kwargs)

    def tensor(self) -> np.ndarray:
        return self.amps.reshape(self.layout.dims)


class DensityOp(BaseModel):
    """Hermitian, positive semidefinite, unit-trace matrix over a PartyLayout."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    layout: PartyLayout
    mat: np.ndarray

    @field_validator("mat", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        return _frozen(value)

    @model_validator(mode="after")
    def _check(self):
        dim = self.layout.total
        if self.mat.shape != (dim, dim):
            raise LayoutError(f"density matrix has shape {self.mat.shape}, layout needs {(dim, dim)}")
        if np.max(np.abs(self.mat - self.mat.conj().T)) > HERMITIAN_TOL:
            raise ArgumentError("density matrix is not Hermitian")
        trace = np.trace(self.mat).real
        if abs(trace - 1.0) > TRACE_TOL:
            raise ArgumentError(f"density matrix trace is {trace!r}, expected 1")
        lowest = float(np.linalg.eigvalsh(self.mat)[0])
        if lowest < PSD_CLAMP:
            raise ArgumentError(f"density matrix has negative eigenvalue {lowest!r}")
        return self


class Bipartition(BaseModel):
    """A cut of the parties into two non-empty sides."""
    model_config = ConfigDict(frozen=True)

    left: Tuple[int, ...]
    right: Tuple[int, ...]

    @field_validator("left", "right", mode="before")
    @classmethod
    def _sorted(cls, value):
        return tuple(sorted(int(i) for i in value))

    @model_validator(mode="after")
    def _check(self):
        if not self.left or not self.right:
            raise ArgumentError("both sides of a bipartition must be non-empty")
        if set(self.left) & set(self.right):
            raise ArgumentError("bipartition sides overlap")
        if set(self.left) | set(self.right) != set(range(self.n)):
            raise ArgumentError("bipartition must cover parties 0..n-1")
        return self

    @classmethod
    def of(cls, left: Sequence[int], n: int) -> "Bipartition":
        left = set(left)
        return cls(left=left, right=[i for i in range(n) if i not in left])

    @property
    def n(self) -> int:
        return len(self.left) + len(self.right)

    def __str__(self) -> str:
        return "{%s}|{%s}" % (",".join(map(str, self.left)), ",".join(map(str, self.right)))


class SchmidtResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    coeffs: np.ndarray       # descending, non-negative
    left_basis: np.ndarray   # columns
    right_basis: np.ndarray  # columns

    @model_validator(mode="after")
    def _check(self):
        c = np.asarray(self.coeffs, dtype=float)
        if np.any(np.diff(c) > 0) or np.any(c < 0):
            raise InvariantViolation("Schmidt coefficients must be non-negative and descending")
        if abs(float(np.sum(c ** 2)) - 1.0) > 1e-10:
            raise InvariantViolation("Schmidt spectrum does not sum to 1")
        for basis in (self.left_basis, self.right_basis):
            gram = basis.conj().T @ basis
            if np.max(np.abs(gram - np.eye(gram.shape[0]))) > 1e-10:
                raise InvariantViolation("Schmidt basis is not orthonormal")
        return self

    @property
    def spectrum(self) -> np.ndarray:
        """Squared coefficients."""
        return np.asarray(self.coeffs, dtype=float) ** 2


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product in party order."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    check_capacity(a.shape[0] * b.shape[0])
    return np.kron(a, b)


def embed_site_op(op: np.ndarray, site: int, layout: PartyLayout) -> np.ndarray:
    """Return 1 x ... x op x ... x 1 with ``op`` acting on ``site``."""
    op = np.asarray(op, dtype=complex)
    if not 0 <= site < layout.n:
        raise LayoutError(f"site {site} outside 0..{layout.n - 1}")
    if op.shape != (layout.dims[site], layout.dims[site]):
        raise LayoutError(
            f"operator shape {op.shape} does not match local dimension {layout.dims[site]}")
    before = int(np.prod(layout.dims[:site]))
    after = int(np.prod(layout.dims[site + 1:]))
    return np.kron(np.kron(np.eye(before), op), np.eye(after))


def _check_parties(parties, n: int) -> Tuple[int, ...]:
    parties = tuple(sorted(set(int(i) for i in parties)))
    if not parties:
        raise ArgumentError("party set must not be empty")
    if parties[0] < 0 or parties[-1] >= n:
        raise ArgumentError(f"party indices {parties} outside 0..{n - 1}")
    return parties


def partial_trace(rho: DensityOp, keep) -> DensityOp:
    """Reduced density operator on the parties in ``keep``."""
    dims = list(rho.layout.dims)
    keep = _check_parties(keep, len(dims))
    tensor = rho.mat.reshape(dims + dims)
    m = len(dims)
    for idx in reversed(range(len(dims))):
        if idx in keep:
            continue
        tensor = np.trace(tensor, axis1=idx, axis2=idx + m)
        m -= 1
    sub = rho.layout.sub(keep)
    mat = tensor.reshape(sub.total, sub.total)
    return DensityOp(layout=sub, mat=(mat + mat.conj().T) / 2)


def marginal(psi: PureState, keep) -> np.ndarray:
    """Reduced density matrix of a pure state on ``keep``, as a plain array."""
    keep = _check_parties(keep, psi.layout.n)
    rest = [i for i in range(psi.layout.n) if i not in keep]
    dk = int(np.prod([psi.layout.dims[i] for i in keep]))
    block = psi.tensor().transpose(list(keep) + rest).reshape(dk, -1)
    return block @ block.conj().T


def herm_eig(h: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors of a Hermitian matrix."""
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {h.shape}")
    if np.max(np.abs(h - h.conj().T), initial=0.0) > EIG_HERMITIAN_TOL:
        raise ContractError("matrix is not Hermitian")
    w, v = scipy.linalg.eigh((h + h.conj().T) / 2)
    return w[::-1].copy(), v[:, ::-1].copy()


def _psd_eig(rho: DensityOp) -> Tuple[np.ndarray, np.ndarray]:
    w, v = herm_eig(rho.mat)
    if w[-1] < PSD_CLAMP:
        raise InvariantViolation(f"eigenvalue {w[-1]!r} below clamp {PSD_CLAMP}")
    # rounding residue below PSD_ZERO counts as an exact zero
    return np.where(w < PSD_ZERO, 0.0, w), v


def frac_power(rho: DensityOp, p: float) -> np.ndarray:
    """rho**p computed in the eigenbasis after clamping drift to zero."""
    return frac_power_pair(rho, p)[0]


def frac_power_pair(rho: DensityOp, p: float) -> Tuple[np.ndarray, np.ndarray]:
    """(rho**p, rho**(1-p)) from a single eigendecomposition."""
    if not 0.0 < p < 1.0:
        raise ArgumentError(f"p must lie in (0, 1), got {p!r}")
    w, v = _psd_eig(rho)
    vh = v.conj().T
    return (v * w ** p) @ vh, (v * w ** (1.0 - p)) @ vh


def _cut_matrix(psi: PureState, cut: Bipartition) -> np.ndarray:
    if cut.n != psi.layout.n:
        raise LayoutError(f"cut is over {cut.n} parties, state has {psi.layout.n}")
    dl = int(np.prod([psi.layout.dims[i] for i in cut.left]))
    return psi.tensor().transpose(list(cut.left) + list(cut.right)).reshape(dl, -1)


def schmidt(psi: PureState, cut: Bipartition) -> SchmidtResult:
    """Schmidt decomposition across ``cut`` via SVD of the reshaped amplitudes."""
    u, s, vh = scipy.linalg.svd(_cut_matrix(psi, cut), full_matrices=False)
    rank = max(1, int(np.sum(s > SCHMIDT_DROP)))
    s = s[:rank]
    s = s / np.linalg.norm(s)
    return SchmidtResult(coeffs=s, left_basis=u[:, :rank], right_basis=vh[:rank].T)


def schmidt_values(psi: PureState, cut: Bipartition) -> np.ndarray:
    """Squared Schmidt coefficients only (no bases)."""
    s = scipy.linalg.svdvals(_cut_matrix(psi, cut))
    return s[s > SCHMIDT_DROP] ** 2


def reconstruct(result: SchmidtResult, cut: Bipartition, layout: PartyLayout) -> np.ndarray:
    """Inverse of ``schmidt``: amplitudes in standard party order."""
    mat = (result.left_basis * result.coeffs) @ result.right_basis.T
    order = list(cut.left) + list(cut.right)
    tensor = mat.reshape([layout.dims[i] for i in order])
    return tensor.transpose(np.argsort(order)).reshape(-1)


def bipartitions(n: int) -> Iterator[Bipartition]:
    """All 2**(n-1) - 1 cuts, party 0 always on the left."""
    others = list(range(1, n))
    for size in range(0, n - 1):
        for extra in combinations(others, size):
            yield Bipartition.of((0,) + extra, n)


def permute_parties(psi: PureState, perm: Sequence[int]) -> PureState:
    """New party i is old party perm[i]."""
    perm = list(perm)
    if sorted(perm) != list(range(psi.layout.n)):
        raise ArgumentError(f"{perm} is not a permutation of 0..{psi.layout.n - 1}")
    layout = PartyLayout(dims=[psi.layout.dims[i] for i in perm])
    return PureState(layout=layout, amps=psi.tensor().transpose(perm).reshape(-1),
                     label=psi.label)


def permute_density(rho: DensityOp, perm: Sequence[int]) -> np.ndarray:
    perm = list(perm)
    n = rho.layout.n
    dims = list(rho.layout.dims)
    tensor = rho.mat.reshape(dims + dims).transpose(perm + [n + i for i in perm])
    return tensor.reshape(rho.layout.total, rho.layout.total)


def to_density(psi: PureState) -> DensityOp:
    return DensityOp(layout=psi.layout, mat=np.outer(psi.amps, psi.amps.conj()))


def purity(rho: DensityOp) -> float:
    return float(np.real(np.trace(rho.mat @ rho.mat)))


def _check_same_layout(rho: DensityOp, phi: PureState) -> None:
    if rho.layout.dims != phi.layout.dims:
        raise LayoutError(f"layout mismatch: {rho.layout.dims} vs {phi.layout.dims}")


def fidelity_pure(rho: DensityOp, phi: PureState) -> float:
    """<phi| rho |phi>, the pure-target fidelity used by every witness."""
    _check_same_layout(rho, phi)
    value = float(np.real(np.vdot(phi.amps, rho.mat @ phi.amps)))
    return min(1.0, max(0.0, value))


def fidelity_sqrt(rho: DensityOp, phi: PureState) -> float:
    """(tr(|phi><phi| sqrt(rho)))**2; reported alongside, never the default."""
    _check_same_layout(rho, phi)
    root = frac_power(rho, 0.5)
    return float(np.real(np.vdot(phi.amps, root @ phi.amps))) ** 2


def expect(rho: DensityOp, op: np.ndarray) -> float:
    """tr[op rho] for a Hermitian ``op`` of matching dimension."""
    op = np.asarray(op, dtype=complex)
    if op.shape != rho.mat.shape:
        raise LayoutError(f"operator shape {op.shape} does not match {rho.mat.shape}")
    if np.max(np.abs(op - op.conj().T)) > HERMITIAN_TOL:
        raise ContractError("observable is not Hermitian")
    value = np.sum(op.T * rho.mat)
    if abs(value.imag) > 1e-8:
        raise InvariantViolation(f"expectation has imaginary residue {value.imag!r}")
    return float(value.real)


def expect_pure(psi: PureState, op: np.ndarray) -> float:
    return float(np.real(np.vdot(psi.amps, np.asarray(op) @ psi.amps)))


def overlap(a: PureState, b: PureState) -> float:
    """|<a|b>|**2."""
    if a.layout.dims != b.layout.dims:
        raise LayoutError(f"layout mismatch: {a.layout.dims} vs {b.layout.dims}")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def basis_index(digits: Sequence[int], dims: Sequence[int]) -> int:
    """Row-major index of a digit string."""
    return int(np.ravel_multi_index(tuple(digits), tuple(dims)))


def computational_state(digits: Sequence[int], dims: Optional[Sequence[int]] = None) -> PureState:
    dims = tuple(dims) if dims is not None else (2,) * len(digits)
    layout = PartyLayout(dims=dims)
    amps = np.zeros(layout.total, dtype=complex)
    amps[basis_index(digits, dims)] = 1.0
    return PureState(layout=layout, amps=amps)
