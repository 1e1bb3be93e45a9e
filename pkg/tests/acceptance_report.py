"""Registry for acceptance-criterion outcomes, printed at session end."""

import sys

_RESULTS: list[tuple[str, bool, str]] = []


def record(criterion: str, passed: bool, detail: str) -> None:
    _RESULTS.append((criterion, passed, detail))
    status = "PASS" if passed else "FAIL"
    # also emit immediately so the line survives mid-run crashes
    print(f"[{criterion}] {status} — {detail}", file=sys.__stderr__)


def summary_lines() -> list[str]:
    return [f"[{name}] {'PASS' if ok else 'FAIL'} — {detail}"
            for name, ok, detail in _RESULTS]
