"""Run every verification suite at a budget and print one line per suite.

    python3 scripts/verify_all.py --budget desk --json suites.json
"""

import argparse
import json
import sys
import time

from heightlab.suites import BUDGETS, SUITES


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--budget", default="desk", choices=sorted(BUDGETS))
    ap.add_argument("--suite", action="append", choices=sorted(SUITES))
    ap.add_argument("--json", help="dump the full suite reports here")
    args = ap.parse_args()
    budget = BUDGETS[args.budget]
    results = []
    for name in args.suite or list(SUITES):
        t0 = time.perf_counter()
        res = SUITES[name](budget)
        dt = time.perf_counter() - t0
        results.append(res)
        print(f"{name:14s} {'PASS' if res['pass'] else 'FAIL'}  {len(res['reports']):4d} checks  {dt:7.1f}s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2, sort_keys=True)
    return 0 if all(r["pass"] for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
