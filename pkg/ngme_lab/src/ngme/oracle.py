"""
Brute-force engines used to adjudicate closed-form claims.

``max_product_overlap`` maximizes |<phi| psi_1 x ... x psi_m>|^2 over block
product states by alternating optimization: with all blocks but one fixed,
the best free block is the normalized contraction of phi with the others.
The samplers draw states from the classical models (fully separable,
biseparable, k-producible) for statistical checks of the Bell bounds.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from math import comb
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from .errors import ArgumentError, InvariantViolation, LayoutError
from .gme_bounds import BoundResult
from .ledger import VERIFY_TOL, DiscrepancyLedger, DiscrepancyRecord, adjudicate
from .settings import get_settings
from .state_factory import dicke_strings, random_pure_state
from .tensor_core import DensityOp, PartyLayout, PureState

logger = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-12

Blocks = Tuple[Tuple[int, ...], ...]


class Grouping(BaseModel):
    """Partition of the parties into at least two blocks."""
    model_config = ConfigDict(frozen=True)

    blocks: Blocks

    @field_validator("blocks", mode="before")
    @classmethod
    def _canonical(cls, value):
        blocks = [tuple(sorted(int(i) for i in b)) for b in value]
        return tuple(sorted(blocks, key=lambda b: b[0] if b else -1))

    @model_validator(mode="after")
    def _check(self):
        if len(self.blocks) < 2:
            raise ArgumentError("a grouping needs at least two blocks")
        if any(not b for b in self.blocks):
            raise ArgumentError("grouping blocks must be non-empty")
        flat = [i for b in self.blocks for i in b]
        if sorted(flat) != list(range(len(flat))):
            raise ArgumentError(f"blocks {self.blocks} must partition 0..{len(flat) - 1}")
        return self

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    def __str__(self) -> str:
        return "".join("{%s}" % ",".join(map(str, b)) for b in self.blocks)


class OracleCertificate(BaseModel):
    best_overlap: float
    grouping: Grouping
    restarts: int
    converged: bool
    per_restart: Tuple[float, ...]

    @model_validator(mode="after")
    def _check(self):
        if not -1e-12 <= self.best_overlap <= 1.0 + 1e-12:
            raise InvariantViolation(f"overlap {self.best_overlap!r} outside [0, 1]")
        return self


def _set_partitions(items: List[int]) -> Iterator[List[List[int]]]:
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def enumerate_groupings(n: int) -> List[Grouping]:
    """Every set partition of 0..n-1 with at least two blocks."""
    if n < 2:
        raise ArgumentError(f"groupings need n >= 2, got {n}")
    return [Grouping(blocks=p) for p in _set_partitions(list(range(n))) if len(p) >= 2]


def _block_tensor(phi: PureState, blocks: Blocks) -> np.ndarray:
    order = [i for b in blocks for i in b]
    shape = [int(np.prod([phi.layout.dims[i] for i in b])) for b in blocks]
    return phi.tensor().transpose(order).reshape(shape)


def _contract_except(tensor: np.ndarray, vectors: Sequence[np.ndarray], free: int) -> np.ndarray:
    env = tensor
    # descending so the remaining axis indices stay valid
    for axis in reversed(range(len(vectors))):
        if axis != free:
            env = np.tensordot(env, vectors[axis].conj(), axes=([axis], [0]))
    return env


def _overlap(tensor: np.ndarray, vectors: Sequence[np.ndarray]) -> float:
    env = _contract_except(tensor, vectors, 0)
    return float(abs(np.vdot(vectors[0], env)) ** 2)


def _random_unit(dim: int, rng: np.random.Generator) -> np.ndarray:
    vec = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return vec / np.linalg.norm(vec)


def _single_restart(tensor: np.ndarray, rng: np.random.Generator,
                    max_sweeps: int, tol: float) -> Tuple[float, bool]:
    vectors = [_random_unit(dim, rng) for dim in tensor.shape]
    value = _overlap(tensor, vectors)
    for sweep in range(max_sweeps):
        start = value
        for b in range(len(vectors)):
            env = _contract_except(tensor, vectors, b)
            norm = float(np.linalg.norm(env))
            if norm == 0.0:
                continue
            vectors[b] = env / norm
            new_value = norm ** 2
            if new_value < value - MONOTONE_SLACK:
                raise InvariantViolation(
                    f"alternating optimization decreased the overlap ({value!r} -> {new_value!r})")
            value = new_value
        logger.debug("sweep %d objective %.15f", sweep, value)
        if value - start < tol:
            return value, True
    return value, False


def max_product_overlap(phi: PureState, grouping: Grouping, restarts: Optional[int] = None,
                        seed: Optional[int] = None, workers: int = 1) -> OracleCertificate:
    """Best squared overlap of ``phi`` with a product over ``grouping``'s blocks."""
    settings = get_settings()
    restarts = restarts if restarts is not None else settings.restarts
    seed = seed if seed is not None else settings.seed
    if restarts < 1:
        raise ArgumentError(f"restarts must be >= 1, got {restarts}")
    if grouping.n != phi.layout.n:
        raise LayoutError(f"grouping covers {grouping.n} parties, state has {phi.layout.n}")

    tensor = _block_tensor(phi, grouping.blocks)
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(restarts)]

    def run(rng):
        return _single_restart(tensor, rng, settings.max_sweeps, settings.sweep_tol)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, streams))
    else:
        outcomes = [run(rng) for rng in streams]

    values = tuple(min(v, 1.0) for v, _ in outcomes)
    swept = all(ok for _, ok in outcomes)
    improved_last = restarts > 1 and values[-1] > max(values[:-1]) + MONOTONE_SLACK
    if not swept:
        logger.warning("oracle restart hit %d sweeps without converging on %s",
                       settings.max_sweeps, grouping)
    return OracleCertificate(best_overlap=max(values), grouping=grouping, restarts=restarts,
                             converged=swept and not improved_last, per_restart=values)


def network_bound_oracle(phi: PureState, restarts: Optional[int] = None,
                         seed: Optional[int] = None) -> OracleCertificate:
    """Max of ``max_product_overlap`` over every grouping of the parties."""
    if phi.layout.n < 3:
        raise ArgumentError(f"network bound oracle needs n >= 3, got {phi.layout.n}")
    best: Optional[OracleCertificate] = None
    converged = True
    for grouping in enumerate_groupings(phi.layout.n):
        cert = max_product_overlap(phi, grouping, restarts, seed)
        converged = converged and cert.converged
        if best is None or cert.best_overlap > best.best_overlap + MONOTONE_SLACK:
            best = cert
    return best.model_copy(update={"converged": converged})


def product_candidate_overlap(phi: PureState, blocks: Sequence[Sequence[int]],
                              vectors: Sequence[np.ndarray]) -> float:
    """|<phi| v_1 x ... x v_m>|^2 for an explicit block product candidate."""
    blocks = tuple(tuple(b) for b in blocks)
    tensor = _block_tensor(phi, blocks)
    if len(vectors) != len(blocks):
        raise ArgumentError(f"{len(vectors)} vectors for {len(blocks)} blocks")
    units = []
    for dim, vec in zip(tensor.shape, vectors):
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (dim,):
            raise LayoutError(f"candidate vector of length {vec.size}, block needs {dim}")
        units.append(vec / np.linalg.norm(vec))
    return _overlap(tensor, units)


def _random_blocks(n: int, k: int, rng: np.random.Generator) -> Blocks:
    perm = [int(i) for i in rng.permutation(n)]
    blocks = []
    while perm:
        size = int(rng.integers(1, min(k, len(perm)) + 1))
        blocks.append(tuple(sorted(perm[:size])))
        perm = perm[size:]
    return tuple(blocks)


def product_state(layout: PartyLayout, blocks: Blocks, rng: np.random.Generator) -> PureState:
    """Haar-random pure state on each block, tensored and put back in party order."""
    order = [i for b in blocks for i in b]
    vec = np.ones(1, dtype=complex)
    for b in blocks:
        vec = np.kron(vec, random_pure_state(layout.sub(b), rng).amps)
    tensor = vec.reshape([layout.dims[i] for i in order]).transpose(np.argsort(order))
    return PureState.from_unnormalized(layout, tensor.reshape(-1))


def _mixture(layout: PartyLayout, draw, rng: np.random.Generator, mixture: int) -> DensityOp:
    if mixture < 1:
        raise ArgumentError(f"mixture size must be >= 1, got {mixture}")
    weights = rng.dirichlet(np.ones(mixture)) if mixture > 1 else np.ones(1)
    mat = np.zeros((layout.total, layout.total), dtype=complex)
    for w in weights:
        psi = draw()
        mat += w * np.outer(psi.amps, psi.amps.conj())
    mat = (mat + mat.conj().T) / 2
    return DensityOp(layout=layout, mat=mat / np.trace(mat).real)


def sample_kproducible_pure(layout: PartyLayout, k: int, blocks_rng: np.random.Generator,
                            state_rng: np.random.Generator) -> Tuple[PureState, Blocks]:
    if not 1 <= k <= layout.n:
        raise ArgumentError(f"k must lie in [1, {layout.n}], got {k}")
    blocks = _random_blocks(layout.n, k, blocks_rng)
    return product_state(layout, blocks, state_rng), blocks


def sample_kproducible(layout: PartyLayout, k: int, blocks_seed: int, state_seed: int,
                       mixture: int = 1) -> DensityOp:
    """Convex mixture of ``mixture`` products of blocks of at most k parties."""
    blocks_rng = np.random.default_rng(blocks_seed)
    state_rng = np.random.default_rng(state_seed)
    return _mixture(layout, lambda: sample_kproducible_pure(layout, k, blocks_rng, state_rng)[0],
                    state_rng, mixture)


def sample_fully_separable(layout: PartyLayout, rng: np.random.Generator,
                           mixture: int = 1) -> DensityOp:
    singles = tuple((i,) for i in range(layout.n))
    return _mixture(layout, lambda: product_state(layout, singles, rng), rng, mixture)


def sample_biseparable(layout: PartyLayout, rng: np.random.Generator,
                       mixture: int = 1) -> DensityOp:
    """Mixture of states that are each product across some random cut."""
    if layout.n < 2:
        raise ArgumentError("biseparable sampling needs at least two parties")

    def draw() -> PureState:
        size = int(rng.integers(1, layout.n))
        left = tuple(sorted(int(i) for i in rng.choice(layout.n, size=size, replace=False)))
        right = tuple(i for i in range(layout.n) if i not in left)
        return product_state(layout, (left, right), rng)

    return _mixture(layout, draw, rng, mixture)


class DickeCountReport(BaseModel):
    n: int
    k: int
    d: int
    exact: int
    formula: int
    equal: bool


def dicke_combinatorics_check(n: int, k: int, d: int) -> DickeCountReport:
    """Bounded-composition count against C(k+n-1, n-1)."""
    if n < 1 or d < 2 or k < 0:
        raise ArgumentError(f"invalid parameters n={n}, k={k}, d={d}")
    exact = len(dicke_strings(n, d, k))
    formula = comb(k + n - 1, n - 1)
    return DickeCountReport(n=n, k=k, d=d, exact=exact, formula=formula, equal=exact == formula)


def verify_bound(phi: PureState, closed: BoundResult, restarts: Optional[int] = None,
                 seed: Optional[int] = None, ledger: Optional[DiscrepancyLedger] = None,
                 claim_ref: Optional[str] = None) -> DiscrepancyRecord:
    """Adjudicate a bound against the oracle; failures go to the ledger."""
    if phi.layout.n >= 3:
        cert = network_bound_oracle(phi, restarts, seed)
    else:
        cert = max_product_overlap(phi, Grouping(blocks=((0,), (1,))), restarts, seed)
    claim_ref = claim_ref or f"bound-{closed.method.value}: {phi.label or 'target'} bound"
    record = adjudicate(claim_ref, closed.value, cert.best_overlap, VERIFY_TOL, context={
        "applicability": closed.applicability.value,
        "grouping": str(cert.grouping),
        "restarts": cert.restarts,
        "converged": cert.converged,
        "dims": list(phi.layout.dims),
        "notes": list(closed.notes),
    })
    ledger = ledger if ledger is not None else DiscrepancyLedger()
    ledger.append(record)
    return record
