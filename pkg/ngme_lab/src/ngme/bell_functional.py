"""
Two-body Bell functionals built on the nonlinear correlators

    f1(rho, M_i)      = tr[rho^p M_i rho^(1-p) M_i]
    f2(rho, M_i, M_j) = tr[rho^p M_i rho^(1-p) M_j]

and the inequalities assembled from them. Sums over pairs run over ordered
pairs i != j, so every unordered pair is counted twice.
"""
import logging
from enum import Enum
from typing import List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy.optimize import bisect

from .errors import ArgumentError, BracketError, ContractError, LayoutError
from .state_factory import mix_white_noise
from .tensor_core import (
    HERMITIAN_TOL,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DensityOp,
    PureState,
    embed_site_op,
    expect,
    frac_power_pair,
)

logger = logging.getLogger(__name__)

VIOLATION_TOL = 1e-9
MONOTONE_POINTS = 32


class SiteObservable(BaseModel):
    """Hermitian local observable with spectrum in [-1, 1]."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray
    name: str = ""

    @field_validator("matrix", mode="before")
    @classmethod
    def _as_matrix(cls, value):
        arr = np.array(value, dtype=complex, copy=True)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ContractError(f"observable must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ContractError(f"observable {self.name!r} is not Hermitian")
        w = np.linalg.eigvalsh(m)
        if w[0] < -1 - 1e-10 or w[-1] > 1 + 1e-10:
            raise ContractError(f"observable {self.name!r} has eigenvalues outside [-1, 1]")
        return self

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def involutory(self) -> bool:
        return bool(np.max(np.abs(self.matrix @ self.matrix - np.eye(self.dim))) <= 1e-10)


SIGMA_X = SiteObservable(matrix=PAULI_X, name="x")
SIGMA_Y = SiteObservable(matrix=PAULI_Y, name="y")
SIGMA_Z = SiteObservable(matrix=PAULI_Z, name="z")
_PAULIS = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


def pauli(name: str) -> SiteObservable:
    try:
        return _PAULIS[name.lower()]
    except KeyError:
        raise ArgumentError(f"unknown Pauli observable {name!r}; expected x, y or z") from None


class BellForm(str, Enum):
    BIPARTITE = "bipartite"              # 2<AB> - f1(A)/2 - f1(B)/2 - f2(A,B) <= 0
    BISEPARABLE = "biseparable"          # n-party combination, biseparable bound
    FULLY_SEPARABLE = "fully-separable"  # same combination, bound 0
    K_PRODUCIBLE = "k-producible"        # combination / n, bound k-1
    WERNER_CLOSED = "werner-closed"      # k-producible with closed-form Werner f's


class WernerSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    target: PureState
    v: float = Field(ge=0.0, le=1.0)


class BellConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    observables: Tuple[SiteObservable, ...]
    p: float = 0.5
    form: BellForm = BellForm.FULLY_SEPARABLE
    k: Optional[int] = None
    werner: Optional[WernerSpec] = None

    @model_validator(mode="after")
    def _check(self):
        if not 0.0 < self.p < 1.0:
            raise ArgumentError(f"p must lie in (0, 1), got {self.p!r}")
        if not self.observables:
            raise ArgumentError("one observable per party is required")
        if self.form == BellForm.WERNER_CLOSED and self.werner is None:
            raise ArgumentError("werner-closed form needs a (target, v) Werner spec")
        return self

    @classmethod
    def uniform(cls, observable: SiteObservable, n: int, **kwargs) -> "BellConfig":
        return cls(observables=(observable,) * n, **kwargs)


class BellReport(BaseModel):
    lhs: float
    classical_bound: float
    quantum_max: float
    violated: bool
    form: BellForm
    k: Optional[int] = None
    correlations: Tuple[Tuple[float, ...], ...] = ()
    f1: Tuple[float, ...] = ()
    f2: Tuple[Tuple[float, ...], ...] = ()


def _site_ops(rho: DensityOp, observables: Sequence[SiteObservable]) -> List[np.ndarray]:
    if len(observables) != rho.layout.n:
        raise LayoutError(f"{len(observables)} observables for {rho.layout.n} parties")
    return [embed_site_op(m.matrix, i, rho.layout) for i, m in enumerate(observables)]


def _skew_trace(rp: np.ndarray, rq: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    # tr[rp a rq b] = sum((rp a) * (rq b)^T)
    return float(np.real(np.sum((rp @ a) * (rq @ b).T)))


def f1(rho: DensityOp, site: int, M: SiteObservable, p: float = 0.5) -> float:
    rp, rq = frac_power_pair(rho, p)
    a = embed_site_op(M.matrix, site, rho.layout)
    return _skew_trace(rp, rq, a, a)


def f2(rho: DensityOp, site_i: int, M_i: SiteObservable, site_j: int, M_j: SiteObservable,
       p: float = 0.5) -> float:
    """Real part of tr[rho^p M_i rho^(1-p) M_j] for two different sites."""
    if site_i == site_j:
        raise ArgumentError(f"f2 needs two different sites, got {site_i} twice")
    rp, rq = frac_power_pair(rho, p)
    a = embed_site_op(M_i.matrix, site_i, rho.layout)
    b = embed_site_op(M_j.matrix, site_j, rho.layout)
    return _skew_trace(rp, rq, a, b)


def _terms(rho: DensityOp, config: BellConfig):
    ops = _site_ops(rho, config.observables)
    n = len(ops)
    rp, rq = frac_power_pair(rho, config.p)
    left = [rp @ a for a in ops]
    right = [(rq @ a).T for a in ops]
    corr = np.zeros((n, n))
    ff = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            ff[i, j] = float(np.real(np.sum(left[i] * right[j])))
            if i != j:
                corr[i, j] = expect(rho, ops[i] @ ops[j])
    return corr, np.diag(ff).copy(), ff


def werner_closed_f(phi: PureState, v: float, site_i: int, M_i: SiteObservable,
                    site_j: Optional[int] = None, M_j: Optional[SiteObservable] = None,
                    printed: bool = False) -> float:
    """f1 (``site_j`` omitted) or f2 at p = 1/2 for v|phi><phi| + (1-v) 1/D.

    Uses rho^(1/2) = g|phi><phi| + c 1 with c = sqrt((1-v)/D) and
    g = sqrt(v + (1-v)/D) - c. ``printed=True`` swaps the f1 middle term
    2gc for 2gc<A>.
    """
    if not 0.0 <= v <= 1.0:
        raise ArgumentError(f"v must lie in [0, 1], got {v!r}")
    for m in (M_i, M_j):
        if m is not None and not m.involutory:
            raise ContractError(f"observable {m.name!r} does not square to the identity")
    dim = phi.layout.total
    c = np.sqrt((1.0 - v) / dim)
    g = np.sqrt(v + (1.0 - v) / dim) - c
    a = embed_site_op(M_i.matrix, site_i, phi.layout)
    mean_a = float(np.real(np.vdot(phi.amps, a @ phi.amps)))
    if site_j is None:
        middle = 2 * g * c * (mean_a if printed else 1.0)
        return float(g ** 2 * mean_a ** 2 + middle + (1.0 - v))
    if site_j == site_i:
        raise ArgumentError(f"f2 needs two different sites, got {site_i} twice")
    b = embed_site_op(M_j.matrix, site_j, phi.layout)
    mean_b = float(np.real(np.vdot(phi.amps, b @ phi.amps)))
    mean_ab = float(np.real(np.vdot(phi.amps, a @ b @ phi.amps)))
    return float(g ** 2 * mean_a * mean_b + 2 * g * c * mean_ab + c ** 2 * np.real(np.trace(a @ b)))


def _werner_terms(config: BellConfig, printed: bool = False):
    spec = config.werner
    rho = mix_white_noise(spec.target, spec.v)
    ops = _site_ops(rho, config.observables)
    n = len(ops)
    corr = np.zeros((n, n))
    ff = np.zeros((n, n))
    for i in range(n):
        ff[i, i] = werner_closed_f(spec.target, spec.v, i, config.observables[i], printed=printed)
        for j in range(n):
            if i != j:
                corr[i, j] = expect(rho, ops[i] @ ops[j])
                ff[i, j] = werner_closed_f(spec.target, spec.v, i, config.observables[i],
                                           j, config.observables[j])
    return corr, np.diag(ff).copy(), ff


def _combination(corr: np.ndarray, ff: np.ndarray) -> float:
    """sum_{i!=j} <M_i M_j> - (n-1)/n sum_i (f1_i + sum_{j!=i} f2_ij)."""
    n = corr.shape[0]
    return float(corr.sum() - (n - 1) / n * ff.sum())


def _report(form: BellForm, corr, f1s, ff, k: Optional[int]) -> BellReport:
    n = corr.shape[0]
    if form == BellForm.BIPARTITE:
        if n != 2:
            raise ArgumentError(f"bipartite form needs 2 parties, got {n}")
        lhs = 2 * corr[0, 1] - 0.5 * f1s[0] - 0.5 * f1s[1] - ff[0, 1]
        bound, qmax = 0.0, 2.0
    elif form == BellForm.BISEPARABLE:
        lhs = _combination(corr, ff)
        bound, qmax = float((n - 1) * (n - 2)), float(n * n - n)
    elif form == BellForm.FULLY_SEPARABLE:
        lhs = _combination(corr, ff)
        bound, qmax = 0.0, float(n * n - n)
    else:
        if k is None or not 1 <= k <= n:
            raise ArgumentError(f"k-producible form needs 1 <= k <= {n}, got {k!r}")
        lhs = _combination(corr, ff) / n
        bound, qmax = float(k - 1), float(n - 1)
    off = ff.copy()
    np.fill_diagonal(off, 0.0)
    return BellReport(
        lhs=float(lhs), classical_bound=bound, quantum_max=qmax,
        violated=bool(lhs > bound + VIOLATION_TOL), form=form, k=k,
        correlations=tuple(tuple(float(x) for x in row) for row in corr),
        f1=tuple(float(x) for x in f1s),
        f2=tuple(tuple(float(x) for x in row) for row in off),
    )


def bell_lhs(rho: Optional[DensityOp], config: BellConfig) -> BellReport:
    """Evaluate the configured form; ``rho`` may be None for the Werner closed form."""
    if config.form == BellForm.WERNER_CLOSED:
        corr, f1s, ff = _werner_terms(config)
        return _report(BellForm.K_PRODUCIBLE, corr, f1s, ff, config.k).model_copy(
            update={"form": BellForm.WERNER_CLOSED})
    if rho is None:
        raise ArgumentError(f"form {config.form.value} needs a density operator")
    corr, f1s, ff = _terms(rho, config)
    return _report(config.form, corr, f1s, ff, config.k)


def bell_kproducible(rho: Optional[DensityOp], config: BellConfig, k: int) -> BellReport:
    """Normalized n-party combination against the depth bound k - 1."""
    n = len(config.observables)
    if not 1 <= k <= n:
        raise ArgumentError(f"k must lie in [1, {n}], got {k}")
    form = BellForm.WERNER_CLOSED if config.form == BellForm.WERNER_CLOSED else BellForm.K_PRODUCIBLE
    return bell_lhs(rho, config.model_copy(update={"form": form, "k": k}))


def entanglement_depth(reports_by_k: Mapping[int, BellReport]) -> int:
    """Smallest k whose k-producible bound is not violated."""
    for k in sorted(reports_by_k):
        if not reports_by_k[k].violated:
            return k
    return max(reports_by_k) + 1


def depth_boundary(n: int, k: int) -> float:
    """theta* with cos 2theta* = sqrt((n-k)/(n-1)); GHZ(theta) exceeds depth k for theta > theta*."""
    if n < 2 or not 1 <= k <= n - 1:
        raise ArgumentError(f"depth boundary needs n >= 2 and 1 <= k <= n-1, got n={n}, k={k}")
    return float(0.5 * np.arccos(np.sqrt((n - k) / (n - 1))))


class CriticalNoise(NamedTuple):
    v_star: float
    monotone: bool


def critical_noise(target: PureState, observables: Sequence[SiteObservable], k: int,
                   bracket: Tuple[float, float] = (0.0, 1.0), p: float = 0.5,
                   closed_form: bool = False, xtol: float = 1e-12) -> CriticalNoise:
    """Noise level v* where the white-noise mixture starts to exceed depth k."""
    lo, hi = bracket
    if not 0.0 <= lo < hi <= 1.0:
        raise ArgumentError(f"bracket {bracket} must satisfy 0 <= lo < hi <= 1")
    base = BellConfig(observables=tuple(observables), p=p)

    def gap(v: float) -> float:
        if closed_form:
            config = base.model_copy(update={"form": BellForm.WERNER_CLOSED,
                                             "werner": WernerSpec(target=target, v=v)})
            report = bell_kproducible(None, config, k)
        else:
            report = bell_kproducible(mix_white_noise(target, v), base, k)
        return report.lhs - report.classical_bound

    g_lo, g_hi = gap(lo), gap(hi)
    if np.sign(g_lo) == np.sign(g_hi):
        raise BracketError(f"no sign change of lhs - bound on [{lo}, {hi}] ({g_lo!r}, {g_hi!r})")
    samples = np.array([gap(v) for v in np.linspace(lo, hi, MONOTONE_POINTS)])
    steps = np.diff(samples)
    monotone = bool(np.all(steps >= -1e-12) or np.all(steps <= 1e-12))
    if not monotone:
        logger.warning("lhs is not monotone on [%s, %s]; root may not be unique", lo, hi)
    return CriticalNoise(float(bisect(gap, lo, hi, xtol=xtol, maxiter=200)), monotone)
