"""
Registry of worked Bell scenarios S1..S11.

Every scenario is evaluated twice: through the generic rho^p pipeline and
through the closed expression as printed. The two are compared and any
disagreement above ``AGREE_TOL`` goes to the discrepancy ledger. The
pipeline value is the authoritative one.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from .bell_functional import (
    BellConfig,
    BellForm,
    BellReport,
    SiteObservable,
    WernerSpec,
    bell_lhs,
    pauli,
    werner_closed_f,
)
from .errors import ArgumentError
from .ledger import DiscrepancyLedger, DiscrepancyRecord
from .state_factory import (
    WVariant,
    make_dicke_superposition_24,
    make_generalized_w,
    make_ghz,
    make_maximal_slice,
    make_three_qubit_canonical,
    make_w_family,
    mix_white_noise,
)
from .tensor_core import DensityOp, PureState, to_density

logger = logging.getLogger(__name__)

AGREE_TOL = 1e-9

Params = Dict[str, Any]


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    claim_ref: str
    form: BellForm
    defaults: Params
    build: Callable[[Params], Tuple[DensityOp, str]]  # (rho, observable name)
    printed: Callable[[Params], float]
    reduction: Callable[[Params], float]  # closed pipeline value, test oracle
    k: Callable[[Params], Optional[int]] = lambda params: None
    param_names: Tuple[str, ...] = field(default=())


class ScenarioResult(BaseModel):
    scenario: str
    params: Params
    report: BellReport
    lhs_pipeline: float
    lhs_printed: float
    difference: float
    claim_ref: str
    discrepancy: Optional[DiscrepancyRecord] = None


def _ghz_theta(n: int, theta: float) -> PureState:
    return make_ghz(n, 2, [np.cos(theta), np.sin(theta)])


def _gc(n: int, v: float) -> Tuple[float, float]:
    c = np.sqrt((1.0 - v) / 2 ** n)
    return float(np.sqrt(v + (1.0 - v) / 2 ** n) - c), float(c)


def _pure(psi: PureState) -> DensityOp:
    return to_density(psi)


def _ordered_pair_sum(x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    return float(x.sum() ** 2 - np.sum(x ** 2))


# -- S1: bipartite, cos t|00> + sin t|11> ------------------------------------

def _s1_build(p: Params):
    return _pure(_ghz_theta(2, p["theta"])), p["observable"]


def _s1_printed(p: Params) -> float:
    if p["observable"] == "x":
        return 4 * np.sin(2 * p["theta"])
    return 2 - 2 * np.cos(2 * p["theta"]) ** 2


def _s1_reduction(p: Params) -> float:
    if p["observable"] == "x":
        return 2 * np.sin(2 * p["theta"])
    return 2 - 2 * np.cos(2 * p["theta"]) ** 2


# -- S2 / S5: GHZ(theta), sigma_z ---------------------------------------------

def _ghz_build(p: Params):
    return _pure(_ghz_theta(p["n"], p["theta"])), "z"


def _s2_value(p: Params) -> float:
    n = p["n"]
    return n * n - n - n * (n - 1) * np.cos(2 * p["theta"]) ** 2


def _s5_value(p: Params) -> float:
    n = p["n"]
    return (n - 1) - (n - 1) * np.cos(2 * p["theta"]) ** 2


# -- S3: generalized W, sigma_x -----------------------------------------------

def _s3_build(p: Params):
    return _pure(make_generalized_w(p["alphas"])), "x"


# -- S4 / S7: weight-2 four-qubit superposition, sigma_x ----------------------

_COMPLEMENTARY = {(0, 1), (2, 3), (4, 5)}


def _d24_noncomplementary(g: Sequence[float]) -> float:
    return float(sum(g[a] * g[b] for a in range(6) for b in range(a + 1, 6)
                     if (a, b) not in _COMPLEMENTARY))


def _d24_build(p: Params):
    return _pure(make_dicke_superposition_24(p["gammas"])), "x"


def _sphere_gammas(phi: float, theta: float) -> Tuple[float, ...]:
    s = 1.0 / np.sqrt(2.0)
    a = s * np.sin(phi) * np.cos(theta)
    b = s * np.sin(phi) * np.sin(theta)
    c = s * np.cos(phi)
    return a, a, b, b, c, c


def _s7_build(p: Params):
    return _pure(make_dicke_superposition_24(_sphere_gammas(p["phi"], p["theta"]))), "x"


def _s7_printed(p: Params) -> float:
    phi, theta = p["phi"], p["theta"]
    return (4 / 3 * np.sin(phi) ** 2 * np.sin(2 * theta)
            + 4 / 3 * np.sin(2 * phi) * (np.cos(theta) + np.sin(theta)) + 2 / 3)


def _s7_reduction(p: Params) -> float:
    phi, theta = p["phi"], p["theta"]
    return np.sin(phi) ** 2 * np.sin(2 * theta) + np.sin(2 * phi) * (np.cos(theta) + np.sin(theta))


# -- S6: W family, sigma_x, depth 2 -------------------------------------------

def _s6_state(p: Params) -> PureState:
    variant = p["variant"]
    if variant == "balanced":
        return make_generalized_w([1 / np.sqrt(p["n"])] * p["n"])
    return make_w_family(p["n"], WVariant(variant), p["r"])


def _s6_build(p: Params):
    return _pure(_s6_state(p)), "x"


def _s6_printed(p: Params) -> float:
    n, r, variant = p["n"], p["r"], p["variant"]
    if variant == "balanced":
        return 4 * _ordered_pair_sum([1 / np.sqrt(n)] * n) / n
    if WVariant(variant) == WVariant.R_LAST:
        return (2 * (n - 1) ** 2 + r * (n - 1)) / (n * (n - 1 + r * r))
    return (8 * r + 4 * r * r) / (1 + 2 * r * r)


def _s6_reduction(p: Params) -> float:
    n, r, variant = p["n"], p["r"], p["variant"]
    if variant == "balanced":
        return 2 * (n - 1) / n
    if WVariant(variant) == WVariant.R_LAST:
        return 2 * (n - 1) * (n - 2 + 2 * r) / (n * (n - 1 + r * r))
    return 2 * ((n - 1) * (n - 2) * r * r + 2 * (n - 1) * r) / (n * (1 + (n - 1) * r * r))


# -- S8: maximal slice, sigma_z, depth n-1 ------------------------------------

def _s8_build(p: Params):
    return _pure(make_maximal_slice(p["n"], p["theta"])), "z"


def _s8_value(p: Params, middle_sign: float) -> float:
    n, c = p["n"], np.cos(2 * p["theta"])
    return ((n - 1) * (n - 2) / n + (n - 1) * (1 + middle_sign * c) / n
            - (n - 1) * (1 + c) ** 2 / (4 * n * n))


# -- S9: canonical three-qubit state, sigma_z, depth 2 ------------------------

def _s9_build(p: Params):
    return _pure(make_three_qubit_canonical(p["gammas"], p.get("phase", 0.0))), "z"


def _s9_printed(p: Params) -> float:
    g0, g1, g2, g3, g4 = (x * x for x in p["gammas"])
    return 2 * g0 + 2 * g4 - 2 / 3 * (g1 + g2 + g3) - 4 / 9 * (3 * g0 + g1 - g2 - g3 - g4) ** 2


def _s9_reduction(p: Params) -> float:
    g0, g1, g2, g3, g4 = (x * x for x in p["gammas"])
    s = 3 * g0 + g1 - g2 - g3 - 3 * g4
    return 2 * g0 + 2 * g4 - 2 / 3 * (g1 + g2 + g3) - 2 / 9 * s * s


# -- S10 / S11: white-noise mixtures ------------------------------------------

def _s10_build(p: Params):
    return mix_white_noise(_ghz_theta(p["n"], np.pi / 4), p["v"]), "z"


def _s10_value(p: Params, printed: bool) -> float:
    n, v = p["n"], p["v"]
    g, c = _gc(n, v)
    middle = 2 * (n - 1) ** 2 * g * c / n if printed else 2 * (n - 1) * g * c
    return (n - 1) * v - middle - (n - 1) * (1 - v) / n


def _w3() -> PureState:
    return make_generalized_w([1 / np.sqrt(3)] * 3)


def _s11_build(p: Params):
    return mix_white_noise(_w3(), p["v"]), "x"


def _s11_value(p: Params, printed: bool) -> float:
    v = p["v"]
    g, c = _gc(3, v)
    middle = 16 * g * c / 9 if printed else 28 * g * c / 9
    return 4 * v / 3 - middle - 2 * (1 - v) / 3


SCENARIOS: Dict[str, Scenario] = {
    s.name: s for s in (
        Scenario("S1", "bipartite cos t|00> + sin t|11>", "S1: bipartite sigma_x value printed as 4 sin 2t",
                 BellForm.BIPARTITE, {"theta": np.pi / 4, "observable": "x"},
                 _s1_build, _s1_printed, _s1_reduction, param_names=("theta",)),
        Scenario("S2", "GHZ(theta) sigma_z, biseparable bound", "S2: GHZ sigma_z biseparable value",
                 BellForm.BISEPARABLE, {"n": 3, "theta": np.pi / 4},
                 _ghz_build, _s2_value, _s2_value, param_names=("theta", "n")),
        Scenario("S3", "generalized W sigma_x, fully separable bound",
                 "S3: W sigma_x pair coefficient printed as 4 a_i a_j",
                 BellForm.FULLY_SEPARABLE, {"alphas": (1 / np.sqrt(3),) * 3}, _s3_build,
                 lambda p: 4 * _ordered_pair_sum(p["alphas"]),
                 lambda p: 2 * _ordered_pair_sum(p["alphas"])),
        Scenario("S4", "weight-2 four-qubit superposition sigma_x, fully separable bound",
                 "S4: weight-2 superposition printed as 8 sum_{i<j} g_i g_j",
                 BellForm.FULLY_SEPARABLE, {"gammas": (1 / np.sqrt(6),) * 6}, _d24_build,
                 lambda p: 8 * _ordered_pair_sum(p["gammas"]) / 2,
                 lambda p: 4 * _d24_noncomplementary(p["gammas"])),
        Scenario("S5", "GHZ(theta) sigma_z, depth k", "S5: GHZ sigma_z depth value",
                 BellForm.K_PRODUCIBLE, {"n": 3, "theta": np.pi / 4}, _ghz_build, _s5_value, _s5_value,
                 k=lambda p: p.get("k", p["n"] - 1), param_names=("theta", "n", "k")),
        Scenario("S6", "W family sigma_x, depth 2", "S6: W family depth-2 value",
                 BellForm.K_PRODUCIBLE, {"n": 4, "r": 1.0, "variant": "balanced"},
                 _s6_build, _s6_printed, _s6_reduction, k=lambda p: 2, param_names=("r", "n")),
        Scenario("S7", "weight-2 sphere parametrization sigma_x, depth k",
                 "S7: weight-2 sphere value printed with 4/3 factors and +2/3",
                 BellForm.K_PRODUCIBLE, {"phi": np.pi / 2, "theta": np.pi / 4}, _s7_build,
                 _s7_printed, _s7_reduction, k=lambda p: p.get("k", 2), param_names=("phi", "theta", "k")),
        Scenario("S8", "maximal slice sigma_z, depth n-1", "S8: maximal slice middle term printed with 1 + cos 2t",
                 BellForm.K_PRODUCIBLE, {"n": 3, "theta": np.pi / 4}, _s8_build,
                 lambda p: _s8_value(p, +1.0), lambda p: _s8_value(p, -1.0),
                 k=lambda p: p["n"] - 1, param_names=("theta", "n")),
        Scenario("S9", "canonical three-qubit state sigma_z, depth 2",
                 "S9: three-qubit depth value printed with 4/9 (.. - g4^2)^2",
                 BellForm.K_PRODUCIBLE,
                 {"gammas": (0.5, 0.0, np.sqrt(3 / 8), np.sqrt(3 / 8), 0.0), "phase": 0.0},
                 _s9_build,
                 _s9_printed, _s9_reduction, k=lambda p: 2, param_names=("phase",)),
        Scenario("S10", "white-noise GHZ sigma_z, depth n-1",
                 "S10: white-noise GHZ middle term printed as 2(n-1)^2 g c / n",
                 BellForm.K_PRODUCIBLE, {"n": 3, "v": 0.9}, _s10_build,
                 lambda p: _s10_value(p, True), lambda p: _s10_value(p, False),
                 k=lambda p: p["n"] - 1, param_names=("v", "n")),
        Scenario("S11", "white-noise W3 sigma_x, depth 2", "S11: white-noise W3 middle term printed as 16 g c / 9",
                 BellForm.K_PRODUCIBLE, {"v": 0.9}, _s11_build,
                 lambda p: _s11_value(p, True), lambda p: _s11_value(p, False),
                 k=lambda p: 2, param_names=("v",)),
    )
}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name.upper()]
    except KeyError:
        raise ArgumentError(f"unknown scenario {name!r}; expected one of {', '.join(SCENARIOS)}") from None


def resolve_params(scenario: Scenario, params: Optional[Params]) -> Params:
    merged = dict(scenario.defaults)
    for key, value in (params or {}).items():
        if key not in merged and key not in scenario.param_names:
            raise ArgumentError(f"scenario {scenario.name} has no parameter {key!r}")
        merged[key] = value
    for key in ("n", "k"):
        if key in merged:
            merged[key] = int(merged[key])
    return merged


def scenario_pipeline(name: str, params: Optional[Params] = None) -> Tuple[BellReport, Params]:
    scenario = get_scenario(name)
    params = resolve_params(scenario, params)
    rho, observable = scenario.build(params)
    config = BellConfig.uniform(pauli(observable), rho.layout.n, form=scenario.form,
                                k=scenario.k(params))
    return bell_lhs(rho, config), params


def scenario_eval(name: str, params: Optional[Params] = None,
                  ledger: Optional[DiscrepancyLedger] = None) -> ScenarioResult:
    """Dual-path evaluation of a named scenario."""
    scenario = get_scenario(name)
    report, params = scenario_pipeline(name, params)
    printed = float(scenario.printed(params))
    difference = abs(report.lhs - printed)
    record = None
    if difference > AGREE_TOL:
        ledger = ledger if ledger is not None else DiscrepancyLedger()
        record = ledger.record(scenario.claim_ref, printed, report.lhs, tol=AGREE_TOL,
                               context={"scenario": scenario.name, **_jsonable(params)})
    return ScenarioResult(scenario=scenario.name, params=params, report=report,
                          lhs_pipeline=report.lhs, lhs_printed=printed, difference=difference,
                          claim_ref=scenario.claim_ref, discrepancy=record)


def _jsonable(params: Params) -> Params:
    return {k: (list(v) if isinstance(v, (tuple, list, np.ndarray)) else v) for k, v in params.items()}


WERNER_F1_CLAIM = "werner-f1: white-noise f1 middle term printed as 2 g c <A>"


def werner_closed_check(phi: PureState, v: float, observable: SiteObservable, site: int = 0,
                        ledger: Optional[DiscrepancyLedger] = None) -> DiscrepancyRecord:
    """Adjudicate the printed f1 middle term against the corrected closed form."""
    ledger = ledger if ledger is not None else DiscrepancyLedger()
    printed = werner_closed_f(phi, v, site, observable, printed=True)
    corrected = werner_closed_f(phi, v, site, observable)
    return ledger.record(WERNER_F1_CLAIM, printed, corrected, tol=AGREE_TOL,
                         context={"target": phi.label, "v": v, "observable": observable.name})


def werner_config(phi: PureState, v: float, observable: SiteObservable, k: int) -> BellConfig:
    return BellConfig.uniform(observable, phi.layout.n, form=BellForm.WERNER_CLOSED, k=k,
                              werner=WernerSpec(target=phi, v=v))
