"""
Append-only discrepancy ledger (JSON lines).

Each record adjudicates one printed claim against a computed value. Only
failing adjudications are persisted; passing ones go back to the caller.
"""
import json
import logging
import threading
from collections import defaultdict
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field, ValidationError

from .settings import get_settings

logger = logging.getLogger(__name__)

VERIFY_TOL = 1e-6


def format_float(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(x), ".17g")


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"


class DiscrepancyRecord(BaseModel):
    claim_ref: str
    closed_value: float
    oracle_value: float
    delta: float
    verdict: Verdict
    context: Dict[str, Any] = Field(default_factory=dict)

    @property
    def claim_key(self) -> str:
        """Stable key before the first colon of ``claim_ref`` (e.g. "S1")."""
        return self.claim_ref.split(":", 1)[0].strip()

    def to_line(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))


def adjudicate(claim_ref: str, closed_value: float, oracle_value: float,
               tol: float = VERIFY_TOL, context: Optional[Dict[str, Any]] = None) -> DiscrepancyRecord:
    """Compare a printed/closed value with the computed one."""
    delta = abs(float(oracle_value) - float(closed_value))
    return DiscrepancyRecord(
        claim_ref=claim_ref,
        closed_value=float(closed_value),
        oracle_value=float(oracle_value),
        delta=delta,
        verdict=Verdict.PASS if delta <= tol else Verdict.FAIL,
        context=context or {},
    )


class DiscrepancyLedger:
    """JSON-lines file of failed adjudications."""

    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path if path is not None else get_settings().ledger_path)
        self._lock = threading.Lock()

    def append(self, record: DiscrepancyRecord) -> bool:
        """Persist ``record`` if it failed. Returns True when a line was written."""
        if record.verdict != Verdict.FAIL:
            return False
        line = record.to_line()
        with self._lock:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as fh:
                fh.write(line + "\n")
        logger.info("ledger entry for %s (delta %s)", record.claim_ref, format_float(record.delta))
        return True

    def record(self, claim_ref: str, closed_value: float, oracle_value: float,
               tol: float = VERIFY_TOL, context: Optional[Dict[str, Any]] = None) -> DiscrepancyRecord:
        """Adjudicate and append in one step."""
        rec = adjudicate(claim_ref, closed_value, oracle_value, tol, context)
        if rec.verdict == Verdict.FAIL:
            logger.warning("%s: printed %s vs computed %s", claim_ref,
                           format_float(closed_value), format_float(oracle_value))
        self.append(rec)
        return rec

    def records(self) -> Tuple[List[DiscrepancyRecord], int]:
        """All parseable records and the number of corrupt lines skipped."""
        if not self.path.exists():
            return [], 0
        out: List[DiscrepancyRecord] = []
        warnings = 0
        with self.path.open("r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    out.append(DiscrepancyRecord.model_validate(json.loads(raw)))
                except (json.JSONDecodeError, ValidationError):
                    warnings += 1
                    logger.warning("skipping corrupt ledger line %d in %s", lineno, self.path)
        return out, warnings

    def summary(self, claim: Optional[str] = None) -> str:
        """Human-readable report grouped by claim reference, optionally for one claim key."""
        records, warnings = self.records()
        if claim is not None:
            records = [rec for rec in records if rec.claim_key == claim]
        grouped: Dict[str, List[DiscrepancyRecord]] = defaultdict(list)
        for rec in records:
            grouped[rec.claim_ref].append(rec)

        lines = [f"{len(records)} discrepancies"]
        for claim_ref in sorted(grouped):
            lines.append(f"[{claim_ref}]")
            for rec in grouped[claim_ref]:
                lines.append(
                    f"  closed={format_float(rec.closed_value)} "
                    f"computed={format_float(rec.oracle_value)} "
                    f"delta={format_float(rec.delta)} "
                    f"context={json.dumps(rec.context, sort_keys=True)}"
                )
        if warnings:
            lines.append(f"{warnings} warnings")
        return "\n".join(lines) + "\n"
