import json

import pytest

from heightlab.corpus import load_corpus, parse_entry
from heightlab.curves.reduction import bad_primes
from heightlab.errors import CorpusError


def test_shipped_corpus_loads():
    entries = load_corpus()
    assert len(entries) >= 6
    assert len({e.label for e in entries}) == len(entries)
    for e in entries:
        for P in e.points + e.torsion:
            assert e.curve.is_on_curve(P.x, P.y)
        assert sorted(e.bad_primes) == bad_primes(e.curve)


def test_singular_curve_rejected():
    with pytest.raises(CorpusError, match="bad"):
        parse_entry({"label": "bad", "ainvs": "0,0,0,0,0"})


def test_off_curve_point_reports_residue():
    with pytest.raises(CorpusError, match="residue"):
        parse_entry({"label": "x", "ainvs": "0,0,1,-1,0", "points": ["1;1"]})


def test_wrong_declared_reduction_rejected():
    with pytest.raises(CorpusError, match="declared"):
        parse_entry({"label": "x", "ainvs": "0,0,1,-1,0", "bad_primes": {"37": "additive"}})


def test_missing_fields_and_bad_files(tmp_path):
    with pytest.raises(CorpusError, match="ainvs"):
        parse_entry({"label": "x"})
    with pytest.raises(CorpusError):
        parse_entry({"label": "x", "ainvs": "0,0,1,-1,0", "points": ["1/0;2"]})
    bad = tmp_path / "c.json"
    bad.write_text("{not json")
    with pytest.raises(CorpusError):
        load_corpus(bad)
    dup = tmp_path / "d.json"
    dup.write_text(json.dumps({"curves": [{"label": "a", "ainvs": "0,0,1,-1,0"}] * 2}))
    with pytest.raises(CorpusError, match="duplicate"):
        load_corpus(dup)
