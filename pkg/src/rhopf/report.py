"""Machine-readable verification reports.

The JSON form is byte-identical across runs with the same inputs: check
ordering is fixed and wall times are kept out of it unless explicitly
requested (they go to the text summary instead).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import __version__

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped"


@dataclass
class CheckResult:
    check_id: str
    status: str
    residual: str = None
    wall_time: float = None
    advisory: bool = False
    note: str = None


@dataclass
class VerificationReport:
    instance: str
    toggles: dict
    checks: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    tool_version: str = __version__

    def add(self, result: CheckResult):
        self.checks.append(result)

    def failed(self) -> list:
        return [c for c in self.checks
                if c.status == FAIL and not c.advisory]

    def exit_code(self) -> int:
        return 1 if self.failed() else 0

    def to_json(self, include_timings: bool = False) -> str:
        payload = {
            "tool_version": self.tool_version,
            "instance": self.instance,
            "toggles": dict(sorted(self.toggles.items())),
            "flags": list(self.flags),
            "checks": [],
        }
        for c in self.checks:
            entry = {"check_id": c.check_id, "status": c.status}
            if c.residual is not None:
                entry["residual"] = c.residual
            if c.advisory:
                entry["advisory"] = True
            if c.note is not None:
                entry["note"] = c.note
            if include_timings and c.wall_time is not None:
                entry["wall_time"] = round(c.wall_time, 6)
            payload["checks"].append(entry)
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def text_summary(self) -> str:
        lines = [f"instance: {self.instance}"]
        for name, val in sorted(self.toggles.items()):
            lines.append(f"toggle {name} = {val}")
        for flag in self.flags:
            lines.append(f"note: {flag}")
        for c in self.checks:
            mark = {PASS: "ok", FAIL: "FAIL", SKIPPED: "skip"}[c.status]
            t = f"  [{c.wall_time:.2f}s]" if c.wall_time is not None else ""
            adv = " (advisory)" if c.advisory else ""
            lines.append(f"{mark:5} {c.check_id}{adv}{t}")
            if c.status == FAIL and c.residual:
                shown = c.residual
                if len(shown) > 400:
                    shown = shown[:400] + " ..."
                lines.append(f"      residual: {shown}")
        bad = self.failed()
        lines.append(f"{len(self.checks)} checks, {len(bad)} failed")
        return "\n".join(lines) + "\n"
