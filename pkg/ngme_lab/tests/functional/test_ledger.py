import json

import pytest

from ngme.ledger import (
    DiscrepancyLedger,
    Verdict,
    adjudicate,
    format_float,
)


def test_format_float_round_trips():
    text = format_float(1 / 3)
    assert float(text) == 1 / 3
    assert text == "0.33333333333333331"


@pytest.mark.parametrize("closed,computed,verdict", [
    (0.5, 0.5 + 1e-9, Verdict.PASS),
    (0.5, 0.5 + 1e-3, Verdict.FAIL),
])
def test_adjudicate_tolerance(closed, computed, verdict):
    assert adjudicate("claim", closed, computed).verdict == verdict


def test_passing_records_are_not_written(isolated_ledger):
    ledger = DiscrepancyLedger(isolated_ledger)
    assert ledger.append(adjudicate("claim", 1.0, 1.0)) is False
    assert not isolated_ledger.exists()


def test_default_path_from_environment(isolated_ledger):
    assert DiscrepancyLedger().path == isolated_ledger


def test_failing_record_is_one_sorted_json_line(isolated_ledger):
    ledger = DiscrepancyLedger()
    ledger.record("claim b", 1.0, 2.0, context={"n": 3})
    line = isolated_ledger.read_text().strip()
    payload = json.loads(line)
    assert list(payload) == sorted(payload)
    assert payload["delta"] == 1.0
    assert payload["verdict"] == "fail"


def test_summary_groups_by_claim(isolated_ledger):
    ledger = DiscrepancyLedger()
    ledger.record("claim b", 1.0, 2.0)
    ledger.record("claim a", 0.25, 0.5, context={"v": 0.9})
    ledger.record("claim b", 3.0, 1.0)
    lines = ledger.summary().splitlines()
    assert lines[0] == "3 discrepancies"
    assert lines[1] == "[claim a]"
    assert lines[2] == '  closed=0.25 computed=0.5 delta=0.25 context={"v": 0.9}'
    assert lines[3] == "[claim b]"
    assert len(lines) == 6


def test_summary_of_missing_ledger(tmp_path):
    assert DiscrepancyLedger(tmp_path / "none.jsonl").summary() == "0 discrepancies\n"


@pytest.mark.parametrize("claim_ref,key", [
    ("S1: bipartite sigma_x value", "S1"),
    ("cluster5: white-noise threshold", "cluster5"),
    ("no separator", "no separator"),
])
def test_claim_key(claim_ref, key):
    assert adjudicate(claim_ref, 0.0, 1.0).claim_key == key


def test_summary_filtered_by_claim_key(isolated_ledger):
    ledger = DiscrepancyLedger()
    ledger.record("S1: first", 1.0, 2.0)
    ledger.record("S10: second", 1.0, 3.0)
    lines = ledger.summary(claim="S1").splitlines()
    assert lines[0] == "1 discrepancies"
    assert lines[1] == "[S1: first]"
    assert ledger.summary(claim="S4") == "0 discrepancies\n"
