"""
Network-model bound D(|phi>): the largest fidelity a network state can reach
with a pure target.

Closed forms cover GHZ, Dicke and permutationally symmetric superpositions;
``bound_schmidt_exact`` scans every bipartition and is exact for qubits;
``bound_colnorm`` is a cheap column-norm upper bound; ``gamma_three_qubit``
gives the three-qubit marginal eigenvalues in closed form.
"""
import logging
from enum import Enum
from itertools import combinations
from math import comb
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from .errors import ArgumentError
from .state_factory import dicke_range, dicke_strings
from .tensor_core import (
    NORM_TOL,
    Bipartition,
    PureState,
    bipartitions,
    herm_eig,
    marginal,
    schmidt_values,
)

logger = logging.getLogger(__name__)


class BoundMethod(str, Enum):
    CLOSED_GHZ = "closed-ghz"
    CLOSED_DICKE = "closed-dicke"
    SYM_UPPER = "sym-upper"
    SCHMIDT_EXACT = "schmidt-exact"
    COLNORM_UPPER = "colnorm-upper"
    GAMMA3 = "gamma3"


class Applicability(str, Enum):
    EXACT = "exact"
    UPPER_BOUND = "upper-bound"
    INAPPLICABLE_WARNING = "inapplicable-warning"


class BoundCertificate(BaseModel):
    model_config = ConfigDict(frozen=True)

    cut: Optional[Bipartition] = None
    subset: Optional[Tuple[int, ...]] = None     # colnorm marginal parties
    spectrum: Optional[Tuple[float, ...]] = None  # squared Schmidt coefficients
    eigenvalues: Optional[Tuple[float, ...]] = None

    @model_validator(mode="after")
    def _check(self):
        if self.spectrum is not None and abs(sum(self.spectrum) - 1.0) > 1e-10:
            raise ArgumentError(f"certificate spectrum sums to {sum(self.spectrum)!r}")
        return self


class BoundResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    method: BoundMethod
    applicability: Applicability
    certificate: Optional[BoundCertificate] = None
    notes: Tuple[str, ...] = ()

    @model_validator(mode="after")
    def _check(self):
        if not 0.0 < self.value <= 1.0 + 1e-12:
            raise ArgumentError(f"bound value {self.value!r} outside (0, 1]")
        return self


def _normalized(values: Sequence[float], what: str) -> np.ndarray:
    arr = np.abs(np.asarray(values, dtype=complex))
    total = float(np.sum(arr ** 2))
    if abs(total - 1.0) > NORM_TOL:
        raise ArgumentError(f"{what} squares sum to {total!r}, expected 1")
    return arr


def bound_ghz(a: Sequence[float]) -> BoundResult:
    """max_i a_i**2 for sum_i a_i |i..i>."""
    sq = _normalized(a, "GHZ amplitude") ** 2
    value = float(sq.max())
    notes = ("degenerate: product state",) if value >= 1.0 - 1e-15 else ()
    spectrum = tuple(float(x) for x in sorted(sq[sq > 0], reverse=True))
    return BoundResult(value=min(value, 1.0), method=BoundMethod.CLOSED_GHZ,
                       applicability=Applicability.EXACT,
                       certificate=BoundCertificate(spectrum=spectrum), notes=notes)


def dicke_count(k: int, n: int) -> int:
    """Unbounded composition count C(k+n-1, n-1)."""
    return comb(k + n - 1, n - 1)


def dicke_schmidt_spectrum(n: int, k: int, s: int) -> np.ndarray:
    """Squared Schmidt coefficients of |D_{k,n}> across an s | n-s cut, ordered by i."""
    if not 1 <= s <= n // 2:
        raise ArgumentError(f"split size s={s} outside [1, {n // 2}]")
    if k < 0:
        raise ArgumentError(f"excitation k={k} must be non-negative")
    total = dicke_count(k, n)
    return np.array([dicke_count(i, s) * dicke_count(k - i, n - s) / total
                     for i in range(k + 1)])


def dicke_mirror(n: int, d: int, k: int) -> int:
    """Representative excitation under k -> n(d-1) - k (digit flip i -> d-1-i)."""
    return min(k, n * (d - 1) - k)


def bound_dicke_closed(n: int, k: int, d: int) -> BoundResult:
    """(n-1)/(n+k-1), evaluated at the mirrored excitation."""
    lo, hi = dicke_range(n, d)
    if n < 2 or not lo <= k <= hi:
        raise ArgumentError(f"invalid Dicke parameters n={n}, k={k}, d={d}")
    kk = dicke_mirror(n, d, k)
    value = (n - 1) / (n + kk - 1)
    notes = []
    if kk != k:
        notes.append(f"evaluated at mirrored excitation {kk}")
    if kk <= d - 1:
        applicability = Applicability.EXACT
    else:
        applicability = Applicability.INAPPLICABLE_WARNING
        notes.append("closed form assumes k <= d-1; use schmidt-exact")
        logger.warning("closed Dicke bound used outside k <= d-1 (n=%d, k=%d, d=%d)", n, k, d)
    spectrum = tuple(float(x) for x in sorted(dicke_schmidt_spectrum(n, kk, 1), reverse=True))
    certificate = BoundCertificate(cut=Bipartition.of([0], n), spectrum=spectrum)
    return BoundResult(value=value, method=BoundMethod.CLOSED_DICKE,
                       applicability=applicability, certificate=certificate, notes=tuple(notes))


def sym_weights(n: int, d: int) -> np.ndarray:
    """Per-index coefficients (n-1)/(n+min(i, K-i)-1) for i = 1..K-1, K = n(d-1)."""
    big_k = n * (d - 1)
    return np.array([(n - 1) / (n + min(i, big_k - i) - 1) for i in range(1, big_k)])


def bound_sym_upper(alphas: Sequence[float], beta0: float, beta1: float,
                    n: int, d: int) -> BoundResult:
    """alpha_0**2 beta**2 + sum_i L(i) alpha_i**2 for a symmetric superposition."""
    big_k = n * (d - 1)
    if len(alphas) != big_k:
        raise ArgumentError(f"expected {big_k} alpha weights, got {len(alphas)}")
    a = _normalized(alphas, "alpha")
    b = _normalized([beta0, beta1], "beta")
    value = float(a[0] ** 2 * b.max() ** 2 + np.dot(sym_weights(n, d), a[1:] ** 2))
    return BoundResult(value=min(value, 1.0), method=BoundMethod.SYM_UPPER,
                       applicability=Applicability.UPPER_BOUND,
                       notes=("cross terms between Dicke components are not bounded",))


def bound_schmidt_exact(phi: PureState) -> BoundResult:
    """Max over all bipartitions of the squared leading Schmidt coefficient."""
    best_value, best_cut, best_spectrum = -1.0, None, None
    for cut in bipartitions(phi.layout.n):
        spectrum = np.sort(schmidt_values(phi, cut))[::-1]
        if spectrum[0] > best_value + 1e-15:
            best_value, best_cut, best_spectrum = float(spectrum[0]), cut, spectrum
    if best_cut is None:
        raise ArgumentError("schmidt-exact needs at least two parties")
    best_spectrum = best_spectrum / best_spectrum.sum()
    if phi.layout.is_qubit:
        applicability, notes = Applicability.EXACT, ()
    else:
        applicability = Applicability.UPPER_BOUND
        notes = ("exactness only established for all-qubit layouts",)
    certificate = BoundCertificate(cut=best_cut, spectrum=tuple(float(x) for x in best_spectrum))
    return BoundResult(value=min(best_value, 1.0), method=BoundMethod.SCHMIDT_EXACT,
                       applicability=applicability, certificate=certificate, notes=notes)


def _proper_subsets(n: int):
    for size in range(1, n):
        yield from combinations(range(n), size)


def bound_colnorm(phi: PureState) -> BoundResult:
    """Max over proper party subsets of the largest column 1-norm of the marginal."""
    best_value, best_subset = -1.0, None
    for subset in _proper_subsets(phi.layout.n):
        value = float(np.abs(marginal(phi, subset)).sum(axis=0).max())
        if value > best_value + 1e-15:
            best_value, best_subset = value, subset
    if best_subset is None:
        raise ArgumentError("colnorm bound needs at least two parties")
    notes = ("clipped to 1",) if best_value > 1.0 else ()
    return BoundResult(value=min(best_value, 1.0), method=BoundMethod.COLNORM_UPPER,
                       applicability=Applicability.UPPER_BOUND,
                       certificate=BoundCertificate(subset=best_subset), notes=notes)


class GammaBounds(NamedTuple):
    gamma1: float
    gamma2: float
    gamma3: float
    gamma: float


def _top(disc: float) -> float:
    return 0.5 + 0.5 * np.sqrt(max(disc, 0.0))


def gamma_three_qubit(lambdas: Sequence[float], phi: float = 0.0) -> GammaBounds:
    """Top eigenvalues of the three single-qubit marginals of the canonical state.

    Reduces to the phase-free formulas at phi = 0; the phase enters through
    the cross term 8 l1 l2 l3 l4 cos(phi).
    """
    if len(lambdas) != 5:
        raise ArgumentError(f"expected 5 lambda coefficients, got {len(lambdas)}")
    l0, l1, l2, l3, l4 = _normalized(lambdas, "lambda")
    if np.any(np.asarray(lambdas, dtype=float) < 0):
        raise ArgumentError("lambda coefficients must be non-negative")
    cross = 8 * l1 * l2 * l3 * l4 * np.cos(phi)
    shared = 4 * l1 ** 2 * l4 ** 2 + 4 * l2 ** 2 * l3 ** 2 + 4 * l0 ** 2 * l4 ** 2
    g1 = _top(1 - 4 * l0 ** 2 * (l2 ** 2 + l3 ** 2 + l4 ** 2))
    g2 = _top(1 + cross - shared - 4 * l0 ** 2 * l3 ** 2)
    g3 = _top(1 + cross - shared - 4 * l0 ** 2 * l2 ** 2)
    return GammaBounds(float(g1), float(g2), float(g3), float(max(g1, g2, g3)))


def bound_gamma(lambdas: Sequence[float], phi: float = 0.0) -> BoundResult:
    g = gamma_three_qubit(lambdas, phi)
    return BoundResult(value=min(g.gamma, 1.0), method=BoundMethod.GAMMA3,
                       applicability=Applicability.EXACT,
                       certificate=BoundCertificate(eigenvalues=(g.gamma1, g.gamma2, g.gamma3)))


def marginal_top_eigenvalues(phi: PureState) -> np.ndarray:
    """Largest eigenvalue of every single-party marginal."""
    return np.array([herm_eig(marginal(phi, [i]))[0][0] for i in range(phi.layout.n)])


def _uniform_d(phi: PureState) -> Optional[int]:
    dims = set(phi.layout.dims)
    return dims.pop() if len(dims) == 1 else None


def recognize_ghz(phi: PureState) -> Optional[np.ndarray]:
    """Amplitude magnitudes if phi is supported on |i..i> only."""
    d = _uniform_d(phi)
    if d is None or phi.layout.n < 2:
        return None
    tensor = phi.tensor()
    diag = np.array([tensor[(i,) * phi.layout.n] for i in range(d)])
    if abs(float(np.sum(np.abs(diag) ** 2)) - 1.0) > 1e-10:
        return None
    return np.abs(diag) / np.linalg.norm(diag)


def recognize_dicke(phi: PureState) -> Optional[Tuple[int, int, int]]:
    """(n, k, d) if phi is an exact Dicke state up to a global phase."""
    d = _uniform_d(phi)
    n = phi.layout.n
    if d is None or n < 2:
        return None
    support = np.flatnonzero(np.abs(phi.amps) > 1e-12)
    digits = np.array(np.unravel_index(support, phi.layout.dims)).T
    sums = set(int(s) for s in digits.sum(axis=1))
    if len(sums) != 1:
        return None
    k = sums.pop()
    lo, hi = dicke_range(n, d)
    if not lo <= k <= hi or len(support) != len(dicke_strings(n, d, k)):
        return None
    amps = phi.amps[support]
    if np.max(np.abs(amps - amps[0])) > 1e-10:
        return None
    return n, k, d


_CANONICAL_ZERO = (1, 2, 3)  # |001>, |010>, |011>
_CANONICAL_REAL = (0, 5, 6, 7)


def recognize_three_qubit(phi: PureState) -> Optional[Tuple[Tuple[float, ...], float]]:
    """(lambdas, phase) if phi has the five-term canonical three-qubit shape."""
    if phi.layout.dims != (2, 2, 2):
        return None
    amps = phi.amps
    if np.max(np.abs(amps[list(_CANONICAL_ZERO)])) > 1e-12:
        return None
    real = amps[list(_CANONICAL_REAL)]
    if np.max(np.abs(real.imag)) > 1e-12 or np.min(real.real) < -1e-12:
        return None
    l0, l2, l3, l4 = (max(float(x), 0.0) for x in real.real)
    l1 = float(abs(amps[4]))
    phase = float(np.angle(amps[4])) if l1 > 1e-12 else 0.0
    return (l0, l1, l2, l3, l4), phase


def best_bound(phi: PureState, prefer: Optional[BoundMethod] = None) -> BoundResult:
    """Best available bound for ``phi``.

    Recognized families get their exact closed form. Otherwise qubit layouts
    use schmidt-exact and everything else the column-norm upper bound.
    """
    if prefer == BoundMethod.COLNORM_UPPER:
        return bound_colnorm(phi)
    if prefer == BoundMethod.SCHMIDT_EXACT:
        return bound_schmidt_exact(phi)
    if prefer in (None, BoundMethod.CLOSED_GHZ):
        a = recognize_ghz(phi)
        if a is not None:
            return bound_ghz(a)
    if prefer in (None, BoundMethod.CLOSED_DICKE):
        params = recognize_dicke(phi)
        if params is not None:
            closed = bound_dicke_closed(*params)
            if closed.applicability == Applicability.EXACT:
                return closed
    if prefer in (None, BoundMethod.GAMMA3):
        canonical = recognize_three_qubit(phi)
        if canonical is not None:
            return bound_gamma(*canonical)
    if phi.layout.is_qubit:
        return bound_schmidt_exact(phi)
    return bound_colnorm(phi)
