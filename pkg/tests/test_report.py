import json

import numpy as np
import pytest

from sodegen import errors
from sodegen.report import TestReport, plain


def test_reason_consistency():
    TestReport("INCONCLUSIVE", "none")
    TestReport("DEGENERACY_CERTIFIED", "sign_reversal")
    with pytest.raises(ValueError):
        TestReport("INCONCLUSIVE", "sign_reversal")
    with pytest.raises(ValueError):
        TestReport("DEGENERACY_CERTIFIED", "none")
    with pytest.raises(ValueError):
        TestReport("MAYBE", "none")
    with pytest.raises(ValueError):
        TestReport("DEGENERACY_CERTIFIED", "luck")


def test_json_round_trip():
    rep = TestReport("DEGENERACY_CERTIFIED", "nontrivial_loop",
                     {"k_list": (np.int64(1),), "h": 1}, {"min_gap": np.float64(0.5)},
                     "loop_only", {"tolerances": {"tol_orth": 1e-10}},
                     details={"unused": object()})
    text = rep.to_json()
    doc = json.loads(text)
    assert doc["invariants"]["k_list"] == [1]
    assert "details" not in doc
    back = TestReport.from_json(text)
    assert back == TestReport.from_dict(doc)
    assert back.to_json() == text
    assert back.certified


def test_plain_handles_non_finite():
    assert plain({"a": np.array([1.0, 2.0]), "b": float("inf")}) == {"a": [1.0, 2.0], "b": "inf"}


def test_error_to_dict():
    exc = errors.ConditionViolated("bad", sample=np.int64(3), overlap=np.float64(0.5))
    d = exc.to_dict()
    assert d == {"code": "CONDITION_VIOLATED", "stage": "subspace", "message": "bad",
                 "context": {"sample": 3, "overlap": 0.5}}
    json.dumps(d)


def test_error_codes_unique():
    codes = [e.code for e in errors.ALL]
    assert len(codes) == len(set(codes))
