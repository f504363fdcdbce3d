"""
Constructors for the state families and noise models used by the toolkit.
"""
import logging
from enum import Enum
from functools import lru_cache
from itertools import product
from math import comb
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .errors import ArgumentError, LayoutError
from .tensor_core import (
    NORM_TOL,
    DensityOp,
    PartyLayout,
    PureState,
    basis_index,
    permute_density,
    permute_parties,
)

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-10


class NoiseKind(str, Enum):
    WHITE = "white"
    CUSTOM_DENSITY = "custom-density"
    DIAGONAL_DICKE = "diagonal-dicke"


class DickeMode(str, Enum):
    EXACT = "exact"
    FORMULA_NORMALIZED = "formula-normalized"


class NoiseSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: NoiseKind = NoiseKind.WHITE
    v: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    weights: Tuple[float, ...] = ()  # v_0..v_K for diagonal-dicke
    # custom-density: real part and optional imaginary part of varrho, row by row
    density: Optional[Tuple[Tuple[float, ...], ...]] = None
    density_imag: Optional[Tuple[Tuple[float, ...], ...]] = None

    @model_validator(mode="after")
    def _check(self):
        if self.kind == NoiseKind.DIAGONAL_DICKE:
            _check_weights(self.weights)
            return self
        if self.v is None:
            raise ArgumentError(f"{self.kind.value} noise needs a mixing weight v")
        if self.kind == NoiseKind.CUSTOM_DENSITY and self.density is None:
            raise ArgumentError("custom-density noise needs a density matrix")
        return self

    def varrho(self, layout: PartyLayout) -> DensityOp:
        """The custom noise operator as a validated DensityOp over ``layout``."""
        if self.density is None:
            raise ArgumentError(f"{self.kind.value} noise carries no density matrix")
        try:
            mat = np.array(self.density, dtype=complex)
            if self.density_imag is not None:
                mat = mat + 1j * np.array(self.density_imag, dtype=float)
        except ValueError:
            raise LayoutError("density rows must all have the same length") from None
        if mat.ndim != 2:
            raise LayoutError(f"density must be a square matrix, got shape {mat.shape}")
        return DensityOp(layout=layout, mat=mat)


def _check_weights(weights: Sequence[float]) -> None:
    w = np.asarray(weights, dtype=float)
    if w.size == 0 or np.any(w < 0):
        raise ArgumentError("Dicke weights must be non-empty and non-negative")
    if abs(float(w.sum()) - 1.0) > NORM_TOL:
        raise ArgumentError(f"Dicke weights sum to {w.sum()!r}, expected 1")


def _check_unit(values: Sequence[float], what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    total = float(np.sum(arr ** 2))
    if abs(total - 1.0) > NORM_TOL:
        raise ArgumentError(f"{what} squares sum to {total!r}, expected 1")
    return arr


def _check_v(v: float) -> None:
    if not 0.0 <= v <= 1.0:
        raise ArgumentError(f"mixing weight v must lie in [0, 1], got {v!r}")


def _from_terms(dims: Sequence[int], terms, label: str = "", notes=()) -> PureState:
    layout = PartyLayout(dims=dims)
    amps = np.zeros(layout.total, dtype=complex)
    for digits, amp in terms:
        amps[basis_index(digits, dims)] += amp
    return PureState(layout=layout, amps=amps, label=label, notes=tuple(notes))


def make_ghz(n: int, d: int, a: Sequence[float]) -> PureState:
    """sum_i a_i |i...i> over n parties of dimension d."""
    if n < 2 or d < 2:
        raise ArgumentError(f"GHZ needs n >= 2 and d >= 2, got n={n}, d={d}")
    if len(a) != d:
        raise ArgumentError(f"GHZ needs {d} amplitudes, got {len(a)}")
    a = _check_unit(a, "GHZ amplitude")
    return _from_terms((d,) * n, (((i,) * n, a[i]) for i in range(d)), label="ghz")


def dicke_range(n: int, d: int) -> Tuple[int, int]:
    """Canonical excitation range 1 <= k <= n(d-1)-1."""
    return 1, n * (d - 1) - 1


@lru_cache(maxsize=256)
def dicke_strings(n: int, d: int, k: int) -> Tuple[Tuple[int, ...], ...]:
    """Digit strings over {0..d-1}^n whose digits sum to k."""
    return tuple(s for s in product(range(d), repeat=n) if sum(s) == k)


def formula_dicke_count(n: int, k: int) -> int:
    return comb(k + n - 1, n - 1)


def make_dicke(n: int, d: int, k: int, mode: DickeMode = DickeMode.EXACT) -> PureState:
    """Equal superposition of all digit strings summing to k."""
    lo, hi = dicke_range(n, d)
    if n < 2 or not lo <= k <= hi:
        raise ArgumentError(f"Dicke excitation k={k} outside [{lo}, {hi}] for n={n}, d={d}")
    strings = dicke_strings(n, d, k)
    notes = []
    if mode == DickeMode.FORMULA_NORMALIZED:
        formula = formula_dicke_count(n, k)
        if formula != len(strings):
            logger.warning("Dicke n=%d d=%d k=%d: C(k+n-1,n-1)=%d but %d strings exist",
                           n, d, k, formula, len(strings))
            notes.append(f"normalization-mismatch: formula count {formula}, "
                         f"exact count {len(strings)}, formula norm {np.sqrt(len(strings) / formula)!r}")
    amp = 1.0 / np.sqrt(len(strings))
    return _from_terms((d,) * n, ((s, amp) for s in strings), label=f"dicke-{k}", notes=notes)


def make_generalized_w(alphas: Sequence[float]) -> PureState:
    """sum_i alpha_i |0..1_i..0> over len(alphas) qubits."""
    alphas = _check_unit(alphas, "W amplitude")
    n = len(alphas)
    terms = []
    for i, amp in enumerate(alphas):
        digits = [0] * n
        digits[i] = 1
        terms.append((digits, amp))
    return _from_terms((2,) * n, terms, label="w")


class WVariant(str, Enum):
    R_LAST = "r-last"  # weight r on the last party, 1 elsewhere
    R_REST = "r-rest"  # weight r on the first n-1 parties, 1 on the last


def make_w_family(n: int, variant: Union[WVariant, str], r: float) -> PureState:
    if r < 0:
        raise ArgumentError(f"r must be non-negative, got {r!r}")
    if n < 2:
        raise ArgumentError(f"W family needs n >= 2, got {n}")
    variant = WVariant(variant)
    if variant == WVariant.R_LAST:
        weights = np.array([1.0] * (n - 1) + [r])
    else:
        weights = np.array([r] * (n - 1) + [1.0])
    return make_generalized_w(weights / np.linalg.norm(weights))


def make_sym_superposition(n: int, d: int, alphas: Sequence[float],
                           beta0: float, beta1: float) -> PureState:
    """sum_i alpha_i |D_i> with |D_0> = beta0|0..0> + beta1|d-1..d-1>.

    ``alphas`` has length n(d-1): index 0 is the beta-weighted component,
    indices 1..n(d-1)-1 are exact Dicke states.
    """
    length = n * (d - 1)
    if len(alphas) != length:
        raise ArgumentError(f"expected {length} alpha weights, got {len(alphas)}")
    alphas = _check_unit(alphas, "alpha")
    _check_unit([beta0, beta1], "beta")
    total = beta0 * alphas[0] * make_ghz(n, d, [1.0] + [0.0] * (d - 1)).amps
    total = total + beta1 * alphas[0] * make_ghz(n, d, [0.0] * (d - 1) + [1.0]).amps
    for i in range(1, length):
        if alphas[i] != 0.0:
            total = total + alphas[i] * make_dicke(n, d, i).amps
    return PureState(layout=PartyLayout.uniform(n, d), amps=total, label="sym")


def make_three_qubit_canonical(lambdas: Sequence[float], phi: float = 0.0) -> PureState:
    """l0|000> + l1 e^{i phi}|100> + l2|101> + l3|110> + l4|111>."""
    if len(lambdas) != 5:
        raise ArgumentError(f"expected 5 lambda coefficients, got {len(lambdas)}")
    lam = _check_unit(lambdas, "lambda")
    if np.any(lam < 0):
        raise ArgumentError("lambda coefficients must be non-negative")
    terms = [((0, 0, 0), lam[0]), ((1, 0, 0), lam[1] * np.exp(1j * phi)),
             ((1, 0, 1), lam[2]), ((1, 1, 0), lam[3]), ((1, 1, 1), lam[4])]
    return _from_terms((2, 2, 2), terms, label="three-qubit")


def make_maximal_slice(n: int, theta: float) -> PureState:
    """(|0>^n + |1>^(n-1)(cos t|0> + sin t|1>)) / sqrt(2)."""
    if not 0.0 < theta <= np.pi / 2 + 1e-15:
        raise ArgumentError(f"theta must lie in (0, pi/2], got {theta!r}")
    s = 1.0 / np.sqrt(2.0)
    terms = [((0,) * n, s),
             ((1,) * (n - 1) + (0,), s * np.cos(theta)),
             ((1,) * n, s * np.sin(theta))]
    return _from_terms((2,) * n, terms, label="maximal-slice")


def make_cluster5(a: float, b: float) -> PureState:
    """(a|00000> + b|11100> + a|00111> + b|11011>) / sqrt(2)."""
    _check_unit([a, b], "cluster (a, b)")
    s = 1.0 / np.sqrt(2.0)
    terms = [((0, 0, 0, 0, 0), s * a), ((1, 1, 1, 0, 0), s * b),
             ((0, 0, 1, 1, 1), s * a), ((1, 1, 0, 1, 1), s * b)]
    return _from_terms((2,) * 5, terms, label="cluster5")


DICKE24_TERMS = ((0, 0, 1, 1), (1, 1, 0, 0), (0, 1, 0, 1), (1, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0))


def make_dicke_superposition_24(gammas: Sequence[float]) -> PureState:
    """Six-term weight-2 state on four qubits with free weights."""
    if len(gammas) != 6:
        raise ArgumentError(f"expected 6 gamma weights, got {len(gammas)}")
    g = _check_unit(gammas, "gamma")
    return _from_terms((2,) * 4, zip(DICKE24_TERMS, g), label="dicke-2-4")


def make_chain_network_state() -> PureState:
    """Two EPR sources on a chain, encoded on C2 x C4 x C2."""
    terms = [((0, 0, 0), 0.5), ((0, 1, 1), 0.5), ((1, 2, 0), 0.5), ((1, 3, 1), 0.5)]
    return _from_terms((2, 4, 2), terms, label="chain-network")


def make_cyclic_network_state() -> PureState:
    """Three EPR sources on a triangle, encoded on C4 x C4 x C4."""
    digits = [(0, 0, 0), (0, 1, 2), (1, 2, 0), (1, 3, 2), (2, 0, 1), (2, 1, 3), (3, 2, 1), (3, 3, 3)]
    amp = 1.0 / (2.0 * np.sqrt(2.0))
    return _from_terms((4, 4, 4), ((dg, amp) for dg in digits), label="cyclic-network")


def mix_white_noise(phi: PureState, v: float) -> DensityOp:
    """v|phi><phi| + (1-v) 1/D."""
    _check_v(v)
    dim = phi.layout.total
    mat = v * np.outer(phi.amps, phi.amps.conj()) + (1.0 - v) * np.eye(dim) / dim
    return DensityOp(layout=phi.layout, mat=mat)


def mix_general(phi: PureState, varrho: DensityOp, v: float) -> DensityOp:
    """v|phi><phi| + (1-v) varrho."""
    _check_v(v)
    if phi.layout.dims != varrho.layout.dims:
        raise LayoutError(f"layout mismatch: {phi.layout.dims} vs {varrho.layout.dims}")
    mat = v * np.outer(phi.amps, phi.amps.conj()) + (1.0 - v) * varrho.mat
    return DensityOp(layout=phi.layout, mat=mat)


def maximally_mixed(layout: PartyLayout) -> DensityOp:
    return DensityOp(layout=layout, mat=np.eye(layout.total) / layout.total)


def mix_dicke_diag(n: int, d: int, weights: Sequence[float]) -> DensityOp:
    """sum_k v_k |D_k><D_k| + v_0 1/d^n, weights v_0..v_{n(d-1)-1}."""
    _check_weights(weights)
    lo, hi = dicke_range(n, d)
    if len(weights) != hi + 1:
        raise ArgumentError(f"expected {hi + 1} weights v_0..v_{hi}, got {len(weights)}")
    layout = PartyLayout.uniform(n, d)
    mat = weights[0] * np.eye(layout.total) / layout.total
    for k in range(lo, hi + 1):
        if weights[k]:
            dk = make_dicke(n, d, k).amps
            mat = mat + weights[k] * np.outer(dk, dk.conj())
    return DensityOp(layout=layout, mat=mat)


def _permuted_equal(state, perm) -> bool:
    if isinstance(state, PureState):
        moved = permute_parties(state, perm).amps
        return bool(np.max(np.abs(moved - state.amps)) <= SYMMETRY_TOL)
    return bool(np.max(np.abs(permute_density(state, perm) - state.mat)) <= SYMMETRY_TOL)


def is_invariant_under(state: Union[PureState, DensityOp], perm: Sequence[int]) -> bool:
    """True iff relabelling parties by ``perm`` leaves the state unchanged."""
    dims = state.layout.dims
    perm = list(perm)
    if sorted(perm) != list(range(len(dims))):
        raise ArgumentError(f"{perm} is not a permutation of 0..{len(dims) - 1}")
    if any(dims[p] != dims[i] for i, p in enumerate(perm)):
        raise LayoutError(f"permutation {perm} mixes parties of different dimension {dims}")
    return _permuted_equal(state, perm)


def is_perm_symmetric(state: Union[PureState, DensityOp]) -> bool:
    """Invariance under every adjacent transposition (hence all of S_n)."""
    dims = state.layout.dims
    if len(set(dims)) != 1:
        raise LayoutError(f"permutation symmetry needs equal local dimensions, got {dims}")
    n = len(dims)
    for i in range(n - 1):
        perm = list(range(n))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        if not _permuted_equal(state, perm):
            return False
    return True


def random_pure_state(layout: PartyLayout, rng: np.random.Generator) -> PureState:
    """Haar-random unit vector (normalized complex Gaussian)."""
    vec = rng.normal(size=layout.total) + 1j * rng.normal(size=layout.total)
    return PureState.from_unnormalized(layout, vec)


def random_density(layout: PartyLayout, rng: np.random.Generator,
                   rank: Optional[int] = None) -> DensityOp:
    """Induced-measure random density matrix G G^dagger / tr."""
    rank = rank or layout.total
    g = rng.normal(size=(layout.total, rank)) + 1j * rng.normal(size=(layout.total, rank))
    mat = g @ g.conj().T
    mat = (mat + mat.conj().T) / 2
    return DensityOp(layout=layout, mat=mat / np.trace(mat).real)