"""
Fidelity witnesses W = D 1 - |phi><phi| and the noise thresholds they imply.

A witness is stored as a list of (coefficient, target) terms so that the
Dicke-family sum and the single-target witness share one evaluation path:
tr[W rho] = sum_t (c_t - <t|rho|t>). The dense operator is only built on
request.
"""
import logging
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.optimize import bisect

from .errors import ArgumentError, BracketError, LayoutError
from .gme_bounds import (
    Applicability,
    BoundMethod,
    BoundResult,
    best_bound,
    bound_dicke_closed,
    bound_gamma,
    bound_ghz,
    bound_schmidt_exact,
    bound_sym_upper,
)
from .ledger import DiscrepancyLedger, DiscrepancyRecord
from .state_factory import (
    dicke_range,
    make_cluster5,
    make_dicke,
    make_three_qubit_canonical,
    maximally_mixed,
    mix_general,
)
from .tensor_core import DensityOp, PartyLayout, PureState, fidelity_pure, fidelity_sqrt

logger = logging.getLogger(__name__)

CERTIFY_TOL = 1e-12


class Verdict(str, Enum):
    CERTIFIED = "certified-NGME"
    INCONCLUSIVE = "inconclusive"


class WitnessTerm(BaseModel):
    model_config = ConfigDict(frozen=True)

    coefficient: float
    target: PureState


class Witness(BaseModel):
    model_config = ConfigDict(frozen=True)

    terms: Tuple[WitnessTerm, ...]
    label: str = ""
    method: Optional[BoundMethod] = None
    family: Optional[Tuple[int, int]] = None  # (n, d) for the Dicke-family sum

    @model_validator(mode="after")
    def _check(self):
        if not self.terms:
            raise ArgumentError("witness needs at least one term")
        dims = {t.target.layout.dims for t in self.terms}
        if len(dims) != 1:
            raise LayoutError(f"witness terms live on different layouts: {sorted(dims)}")
        return self

    @property
    def layout(self) -> PartyLayout:
        return self.terms[0].target.layout

    @property
    def bound(self) -> float:
        """Identity coefficient of the summed operator."""
        return float(sum(t.coefficient for t in self.terms))

    @property
    def target(self) -> Optional[PureState]:
        return self.terms[0].target if len(self.terms) == 1 else None

    def value(self, rho: DensityOp) -> float:
        return float(sum(t.coefficient - fidelity_pure(rho, t.target) for t in self.terms))

    def operator(self) -> np.ndarray:
        dim = self.layout.total
        mat = np.zeros((dim, dim), dtype=complex)
        for t in self.terms:
            mat += t.coefficient * np.eye(dim) - np.outer(t.target.amps, t.target.amps.conj())
        return mat


class WitnessReport(BaseModel):
    value: float
    verdict: Verdict
    bound: float
    method: Optional[BoundMethod] = None
    target: str = ""
    fidelity: Optional[float] = None
    fidelity_sqrt: Optional[float] = None
    threshold: Optional[float] = None
    discrepancies: List[DiscrepancyRecord] = Field(default_factory=list)

    def to_json_dict(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def _verdict(value: float) -> Verdict:
    return Verdict.CERTIFIED if value < -CERTIFY_TOL else Verdict.INCONCLUSIVE


def build_witness(phi: PureState, bound: BoundResult) -> Witness:
    """D 1 - |phi><phi| for a bound D < 1."""
    if bound.value >= 1.0:
        raise ArgumentError(f"bound {bound.value!r} >= 1 gives a vacuous witness")
    if bound.applicability == Applicability.INAPPLICABLE_WARNING:
        logger.warning("building witness for %r from an inapplicable %s bound",
                       phi.label, bound.method.value)
    return Witness(terms=(WitnessTerm(coefficient=bound.value, target=phi),),
                   label=phi.label, method=bound.method)


def dicke_family_coefficients(n: int, d: int) -> Dict[int, float]:
    """Per-excitation witness coefficients L_k.

    The mirrored closed form where it is exact, otherwise the larger of the
    closed value and the exhaustive bipartition scan.
    """
    lo, hi = dicke_range(n, d)
    out = {}
    for k in range(lo, hi + 1):
        closed = bound_dicke_closed(n, k, d)
        if closed.applicability == Applicability.EXACT:
            out[k] = closed.value
        else:
            out[k] = max(closed.value, bound_schmidt_exact(make_dicke(n, d, k)).value)
    return out


def build_dicke_family_witness(n: int, d: int) -> Witness:
    """sum_k (L_k 1 - |D_k><D_k|) over every admissible excitation."""
    coeffs = dicke_family_coefficients(n, d)
    terms = tuple(WitnessTerm(coefficient=c, target=make_dicke(n, d, k)) for k, c in coeffs.items())
    return Witness(terms=terms, label=f"dicke-family-{n}-{d}",
                   method=BoundMethod.CLOSED_DICKE, family=(n, d))


def eval_witness(w: Witness, rho: DensityOp) -> WitnessReport:
    if rho.layout.dims != w.layout.dims:
        raise LayoutError(f"layout mismatch: {rho.layout.dims} vs {w.layout.dims}")
    value = w.value(rho)
    report = WitnessReport(value=value, verdict=_verdict(value), bound=w.bound,
                           method=w.method, target=w.label)
    if w.target is not None:
        report.fidelity = fidelity_pure(rho, w.target)
        report.fidelity_sqrt = fidelity_sqrt(rho, w.target)
    return report


class WhiteNoiseFamily(str, Enum):
    GHZ = "ghz"
    DICKE = "dicke"
    DICKE_DIAGONAL = "dicke-diagonal"


def _white_noise_root(dim: int, bound: float) -> float:
    return (dim * bound - 1.0) / (dim - 1.0)


def threshold_white_noise(family: WhiteNoiseFamily, n: int, d: int = 2,
                          a: Optional[Sequence[float]] = None, k: Optional[int] = None) -> float:
    """Closed-form white-noise threshold for a family instance.

    ``ghz`` and ``dicke`` return v* such that v|phi><phi| + (1-v)1/d^n is
    certified for every v > v*. ``dicke-diagonal`` returns v0* such that the
    diagonal Dicke mixture is certified for every v0 < v0*; a non-positive
    value means no admissible v0 exists.
    """
    family = WhiteNoiseFamily(family)
    dim = d ** n
    if family == WhiteNoiseFamily.GHZ:
        a = a if a is not None else [1.0 / np.sqrt(d)] * d
        return _white_noise_root(dim, bound_ghz(a).value)
    if family == WhiteNoiseFamily.DICKE:
        if k is None:
            raise ArgumentError("dicke threshold needs an excitation k")
        return _white_noise_root(dim, bound_dicke_closed(n, k, d).value)
    coeffs = dicke_family_coefficients(n, d)
    total = sum(coeffs.values())
    return dim * (1.0 - total) / (dim - len(coeffs))


def threshold_general(phi: PureState, varrho: DensityOp, bound: BoundResult) -> float:
    """(D - t) / (1 - t) with t = <phi|varrho|phi>; 0 when varrho alone certifies."""
    t = fidelity_pure(varrho, phi)
    if bound.value <= t:
        return 0.0
    return (bound.value - t) / (1.0 - t)


def certify_state(rho: DensityOp, phi: PureState) -> WitnessReport:
    """Compare F(rho, phi) against the best available bound for phi."""
    if rho.layout.dims != phi.layout.dims:
        raise LayoutError(f"layout mismatch: {rho.layout.dims} vs {phi.layout.dims}")
    bound = best_bound(phi)
    fidelity = fidelity_pure(rho, phi)
    value = bound.value - fidelity
    return WitnessReport(value=value, verdict=_verdict(value), bound=bound.value,
                         method=bound.method, target=phi.label, fidelity=fidelity,
                         fidelity_sqrt=fidelity_sqrt(rho, phi))


def threshold_dicke_projection(phi: PureState, n: int, d: int,
                               varrho: Optional[DensityOp] = None) -> float:
    """Threshold from the Dicke-family witness for v|phi><phi| + (1-v) varrho.

    Without ``varrho`` this is the noise-independent condition
    v > sum_k L_k / sum_k beta_k with beta_k = |<D_k|phi>|^2. With ``varrho``
    the exact root of the witness value is returned.
    """
    if phi.layout.dims != (d,) * n:
        raise LayoutError(f"target layout {phi.layout.dims} is not {n} parties of dimension {d}")
    coeffs = dicke_family_coefficients(n, d)
    dickes = {k: make_dicke(n, d, k) for k in coeffs}
    total_l = sum(coeffs.values())
    beta = sum(abs(np.vdot(dk.amps, phi.amps)) ** 2 for dk in dickes.values())
    eta = 0.0 if varrho is None else sum(fidelity_pure(varrho, dk) for dk in dickes.values())
    if beta - eta <= 0:
        raise ArgumentError("target has no Dicke weight beyond the noise; no threshold exists")
    return float((total_l - eta) / (beta - eta))


def threshold_sym_alpha(alphas: Sequence[float], beta0: float, beta1: float, n: int, d: int) -> float:
    """v > alpha_0^2 beta^2 + sum_i L(i) alpha_i^2, valid for any noise."""
    return bound_sym_upper(alphas, beta0, beta1, n, d).value


class ThresholdReport(BaseModel):
    v_star: float
    v_star_printed: Optional[float] = None
    bound: float
    method: BoundMethod
    discrepancy: Optional[DiscrepancyRecord] = None


CLUSTER5_CLAIM = "cluster5: white-noise threshold printed as (16a^2-1)/31"


def threshold_cluster5(a: float, b: float,
                       ledger: Optional[DiscrepancyLedger] = None) -> ThresholdReport:
    """White-noise threshold of the five-qubit cluster-type state.

    Computed from the exhaustive bipartition bound and adjudicated against
    the printed (16a^2 - 1)/31.
    """
    phi = make_cluster5(a, b)
    bound = bound_schmidt_exact(phi)
    v_star = _white_noise_root(phi.layout.total, bound.value)
    printed = (16 * a ** 2 - 1) / 31
    ledger = ledger if ledger is not None else DiscrepancyLedger()
    record = ledger.record(CLUSTER5_CLAIM, printed, v_star,
                           context={"a": a, "b": b, "bound": bound.value,
                                    "cut": str(bound.certificate.cut)})
    return ThresholdReport(v_star=v_star, v_star_printed=printed, bound=bound.value,
                           method=bound.method, discrepancy=record)


def threshold_three_qubit(lambdas: Sequence[float], phi: float = 0.0,
                          varrho: Optional[DensityOp] = None) -> ThresholdReport:
    """gamma-based threshold for the canonical three-qubit state mixed with varrho."""
    target = make_three_qubit_canonical(lambdas, phi)
    varrho = varrho if varrho is not None else maximally_mixed(target.layout)
    bound = bound_gamma(lambdas, phi)
    return ThresholdReport(v_star=threshold_general(target, varrho, bound),
                           bound=bound.value, method=bound.method)


def bisect_threshold(w: Witness, noise_builder: Callable[[float], DensityOp],
                     lo: float = 0.0, hi: float = 1.0, xtol: float = 1e-14) -> float:
    """Root in v of tr[W rho(v)], where ``noise_builder(v)`` returns rho(v)."""
    def f(v: float) -> float:
        return w.value(noise_builder(v))

    f_lo, f_hi = f(lo), f(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(f"witness value has no sign change on [{lo}, {hi}] "
                           f"({f_lo!r}, {f_hi!r})")
    return float(bisect(f, lo, hi, xtol=xtol, maxiter=200))


def white_noise_builder(phi: PureState) -> Callable[[float], DensityOp]:
    varrho = maximally_mixed(phi.layout)
    return lambda v: mix_general(phi, varrho, v)
