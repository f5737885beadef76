import math
import os
from pathlib import Path

import pytest

import ppgpt

FIXTURES = Path(os.environ.get("PPGPT_FIXTURE_DIR", Path(__file__).resolve().parents[2] / "tests" / "fixtures"))

COUNTER = """contract Counter {
  uint256 count;
  function bump(uint256 by) public { count += by; }
}"""


def test_check_accepts_rule_and_reports_coverage():
    spec = "rule bumpGrows() {\n  uint256 $b = count;\n  bump(1);\n  assert(count == $b + 1);\n}\n"
    r = ppgpt.check_spec(COUNTER, spec, target="bump")
    assert r["ok"]
    assert r["coverage"] == {"bumpGrows": True}


def test_check_rejects_statement_in_precondition():
    spec = "function bump(uint256 by) precondition { count = 1; } postcondition { count >= by; }\n"
    r = ppgpt.check_spec(COUNTER, spec)
    assert not r["ok"]
    assert r["diagnostics"][0]["code"] == "E2003"


def test_score_and_rank():
    assert ppgpt.score((0.8, 0.7, 0.6, 0.5), ppgpt.reference_weights()) == pytest.approx(0.665, abs=1e-9)
    top = ppgpt.rank_topk([("a", (0.1, 0.1, 0.1, 0.1)), ("b", (0.9, 0.9, 0.9, 0.9)), ("c", (0.5, 0.5, 0.5, 0.5))],
                          ppgpt.default_weights(), 2)
    assert [i for i, _ in top] == ["b", "c"]


def test_fit_recovers_planted_weights():
    planted = (0.3, -0.2, 0.5, 0.1)
    rows = []
    for i in range(10):
        f = ((i * 0.37) % 1, (i * 0.61) % 1, (i * 0.13 + 0.2) % 1, (i * 0.89 + 0.05) % 1)
        rows.append((f, ppgpt.score(f, planted)))
    fit = ppgpt.fit_weights(rows)
    assert fit["raw"] == pytest.approx(planted, abs=1e-9)
    assert all(math.isfinite(v) for v in fit["metrics"].values())


def test_knowledge_store_round_trip(tmp_path):
    store = ppgpt.KnowledgeStore.from_entries(str(FIXTURES / "pipeline" / "knowledge.jsonl"))
    assert len(store) == 3
    p = tmp_path / "store.jsonl"
    store.persist(str(p))
    again = ppgpt.KnowledgeStore.load(str(p))
    assert again.ids() == store.ids()
    code = (FIXTURES / "pipeline" / "envelope.msol").read_text()
    assert again.retrieve(code, 0.0) == store.retrieve(code, 0.0)


def test_verify_case_study():
    results = ppgpt.verify(FIXTURES / "cases" / "envelope.msol", FIXTURES / "cases" / "envelope.psl")
    assert [r["verdict"] for r in results] == ["Violated"]


def test_pipeline_replay():
    d = FIXTURES / "pipeline"
    rows = ppgpt.run_pipeline(d / "pipeline.conf", d / "envelope.msol", "addEnvelope")
    assert sorted(r["verdict"] for r in rows) == ["Proven", "Violated"]


def test_errors_are_typed():
    with pytest.raises(ppgpt.ConfigError):
        ppgpt.run_pipeline(FIXTURES / "missing.conf", FIXTURES / "pipeline" / "envelope.msol", "addEnvelope")
