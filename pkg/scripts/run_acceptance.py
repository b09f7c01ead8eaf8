"""Run the acceptance suite and print only the per-criterion lines."""

import subprocess
import sys
from pathlib import Path

root = Path(__file__).resolve().parents[1]
proc = subprocess.run(
    [sys.executable, "-m", "pytest", str(root / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"],
    capture_output=True, text=True, cwd=root,
)
lines = [ln for ln in proc.stdout.splitlines() if ln.startswith(("[PASS]", "[FAIL]"))]
print("\n".join(lines))
print(f"{sum(ln.startswith('[PASS]') for ln in lines)}/{len(lines)} criteria pass")
sys.exit(proc.returncode)
