"""Curve corpus: labelled models with sample points and declared properties."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .curves.reduction import bad_primes, reduction_data
from .curves.weierstrass import CurvePoint, WeierstrassCurve, parse_curve, parse_element
from .errors import CorpusError, HeightlabError


@dataclass(frozen=True)
class CurveCorpusEntry:
    label: str
    curve: WeierstrassCurve
    cm_discriminant: Optional[int]
    bad_primes: dict
    points: tuple
    torsion: tuple
    notes: str = ""

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "ainvs": self.curve.format(),
            "cm_discriminant": self.cm_discriminant,
            "bad_primes": {str(p): t for p, t in sorted(self.bad_primes.items())},
            "points": [P.format() for P in self.points],
            "torsion": [P.format() for P in self.torsion],
        }


def _point(curve: WeierstrassCurve, text: str, label: str) -> CurvePoint:
    if ";" not in text:
        raise CorpusError(f"{label}: point {text!r} is not 'x;y'")
    xs, ys = text.split(";", 1)
    try:
        x, y = parse_element(xs), parse_element(ys)
    except (ValueError, ZeroDivisionError) as exc:
        raise CorpusError(f"{label}: bad coordinate in {text!r}: {exc}") from None
    if not curve.is_on_curve(x, y):
        raise CorpusError(f"{label}: point {text} is off the curve, residue {curve.residue(x, y)}")
    return curve.point(x, y)


def parse_entry(raw: dict) -> CurveCorpusEntry:
    label = str(raw.get("label", "?"))
    try:
        curve = parse_curve(str(raw["ainvs"]), label=label)
    except KeyError:
        raise CorpusError(f"{label}: missing 'ainvs'") from None
    except (ValueError, HeightlabError) as exc:
        raise CorpusError(f"{label}: {exc}") from None
    declared = {int(p): t for p, t in (raw.get("bad_primes") or {}).items()}
    if declared:
        actual = {p: reduction_data(curve, p).type for p in bad_primes(curve)}
        if actual != declared:
            raise CorpusError(f"{label}: declared bad primes {declared} but found {actual}")
    pts = tuple(_point(curve, s, label) for s in raw.get("points", []))
    tors = tuple(_point(curve, s, label) for s in raw.get("torsion", []))
    return CurveCorpusEntry(label, curve, raw.get("cm_discriminant"), declared, pts, tors, raw.get("notes", ""))


def default_corpus_path():
    return resources.files("heightlab") / "data" / "corpus.json"


def load_corpus(path: Union[str, Path, None] = None) -> list[CurveCorpusEntry]:
    """Parse and validate every entry; the first failure raises CorpusError."""
    src = default_corpus_path() if path is None else Path(path)
    try:
        data = json.loads(src.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CorpusError(f"cannot read corpus {src}: {exc}") from None
    entries = data.get("curves", data) if isinstance(data, dict) else data
    out = [parse_entry(raw) for raw in entries]
    labels = [e.label for e in out]
    if len(set(labels)) != len(labels):
        raise CorpusError("duplicate labels in corpus")
    return out


def corpus_entry(label: str, path=None) -> CurveCorpusEntry:
    for e in load_corpus(path):
        if e.label == label:
            return e
    raise CorpusError(f"no corpus entry labelled {label!r}")
