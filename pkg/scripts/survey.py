"""Height-floor survey over growing boxes.

For each B prints the number of non-torsion points, the smallest height and
the certified floor; --csv writes the rows of the largest box.

    python3 scripts/survey.py --curve 0,0,0,-1,0 --field "Q(i)" --box 5 10 20
"""

import argparse
import sys

from heightlab.bounds.constants import bound_certificate
from heightlab.bounds.survey import SURVEY_COLUMNS, SurveyFamily, height_floor_survey
from heightlab.curves.weierstrass import parse_curve
from heightlab.report import emit_report


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--curve", default="0,0,0,-1,0")
    ap.add_argument("--field", default="Q(i)")
    ap.add_argument("--box", type=int, nargs="+", default=[5, 10, 20])
    ap.add_argument("--no-translates", action="store_true")
    ap.add_argument("--csv")
    args = ap.parse_args()
    E = parse_curve(args.curve)
    cert = bound_certificate(E, args.field)
    print(f"p = {cert.p}  floor (unramified) = {cert.bound_unramified.value:.6g}  (ramified) = {cert.bound_ramified.value:.6g}")
    ok = True
    res = None
    for B in sorted(args.box):
        res = height_floor_survey(E, SurveyFamily(B=B, translates=not args.no_translates), cert)
        m = res.minimum
        low = f"{m.height.value:.6g} at {m.point}" if m else "-"
        print(f"B = {B:3d}: {len(res.non_torsion):4d} points, min height {low}, violations {len(res.violations)}")
        ok &= res.passed
    if args.csv and res is not None:
        with open(args.csv, "wb") as fh:
            fh.write(emit_report({"rows": [r.to_record() for r in res.rows]}, "csv", SURVEY_COLUMNS))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
