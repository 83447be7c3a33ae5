"""Run a scenario end to end and persist the result."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .characteristics import SnapshotRecorder, SnapshotSeries
from .config import Scenario, scenario_from_dict
from .evolution import FornbergWhitham, OutcomeKind, integrate
from .monitor import (
    BlowupReport,
    BoundCheck,
    Monitor,
    MonitorRecord,
    check_blowup_envelope,
    check_h2_conditional_bound,
    check_riccati_inequalities,
    classify_outcome,
    evaluate_criterion,
)
from .spectral import ExtremaResult, GridSpec

FLAG_NAMES = ("l2_bound", "linf_bound")
CSV_COLUMNS = ("t", "l2", "linf", "m1", "m2", "xi1", "xi2", "uxx_l2", "hs") + tuple(
    f"{name}_{part}" for name in FLAG_NAMES for part in ("ok", "margin")
)


@dataclass(eq=False)
class RunArtifact:
    scenario: dict[str, Any]
    outcome: dict[str, Any]
    classification: str
    records: list[MonitorRecord]
    report: BlowupReport
    checks: dict[str, Any] = field(default_factory=dict)
    profiles: dict[str, list[float]] = field(default_factory=dict)
    snapshots: SnapshotSeries | None = None

    def to_dict(self) -> dict[str, Any]:
        out = {
            "scenario": self.scenario,
            "outcome": self.outcome,
            "classification": self.classification,
            "report": dataclasses.asdict(self.report),
            "checks": self.checks,
            "profiles": self.profiles,
            "records": [_record_to_dict(r) for r in self.records],
        }
        if self.snapshots is not None:
            out["snapshots"] = {
                "times": self.snapshots.times.tolist(),
                "re": self.snapshots.coeffs.real.tolist(),
                "im": self.snapshots.coeffs.imag.tolist(),
                "coefficient": self.snapshots.coefficient,
            }
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunArtifact":
        snaps = None
        if "snapshots" in data:
            s = data["snapshots"]
            grid = GridSpec(int(data["scenario"]["n"]))
            coeffs = np.array(s["re"]) + 1j * np.array(s["im"])
            snaps = SnapshotSeries(grid, np.array(s["times"]), coeffs, s["coefficient"])
        return cls(
            scenario=data["scenario"],
            outcome=data["outcome"],
            classification=data["classification"],
            records=[_record_from_dict(r) for r in data["records"]],
            report=BlowupReport(**data["report"]),
            checks=data.get("checks", {}),
            profiles=data.get("profiles", {}),
            snapshots=snaps,
        )

    def __eq__(self, other):
        if not isinstance(other, RunArtifact):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def column(self, name: str) -> np.ndarray:
        return np.array([_record_row(r)[name] for r in self.records], dtype=float)


def _record_to_dict(r: MonitorRecord) -> dict[str, Any]:
    d = _record_row(r)
    d["flags"] = {k: {"passed": v.passed, "margin": v.margin} for k, v in r.bound_flags.items()}
    for name in FLAG_NAMES:
        d.pop(f"{name}_ok", None)
        d.pop(f"{name}_margin", None)
    return d


def _record_from_dict(d: dict[str, Any]) -> MonitorRecord:
    return MonitorRecord(
        t=d["t"], l2=d["l2"], linf=d["linf"],
        extrema=ExtremaResult(d["m1"], d["xi1"], d["m2"], d["xi2"]),
        uxx_l2=d["uxx_l2"], hs=d["hs"],
        bound_flags={k: BoundCheck(v["passed"], v["margin"]) for k, v in d["flags"].items()},
    )


def _record_row(r: MonitorRecord) -> dict[str, Any]:
    e = r.extrema
    row = {
        "t": r.t, "l2": r.l2, "linf": r.linf,
        "m1": e.min_value, "m2": e.max_value, "xi1": e.min_location, "xi2": e.max_location,
        "uxx_l2": r.uxx_l2, "hs": r.hs,
    }
    for name in FLAG_NAMES:
        flag = r.bound_flags.get(name)
        row[f"{name}_ok"] = None if flag is None else flag.passed
        row[f"{name}_margin"] = None if flag is None else flag.margin
    return row


def _finite(x):
    return x if x is None or math.isfinite(x) else None


def run(scenario: Scenario) -> RunArtifact:
    """Integrate a scenario with monitoring and evaluate every check.

    Deterministic: the step size is a fixed formula of the state and
    nothing is random. Abnormal endings are recorded in ``outcome``.
    """
    u0 = scenario.initial_field()
    solver = FornbergWhitham(scenario.n, linear=scenario.linear)
    monitor = Monitor(scenario.monitor_stride, scenario.hs_index)
    observers = [monitor]
    recorder = None
    if scenario.snapshots:
        recorder = SnapshotRecorder(scenario.snapshot_stride)
        observers.append(recorder)

    outcome = integrate(u0, scenario.t_final, scenario.control, observers, solver=solver)
    monitor.finalize()
    records = monitor.records

    report = evaluate_criterion(u0)
    if outcome.kind is OutcomeKind.SLOPE_CAP_HIT:
        report.observed_breaking_time = outcome.t

    checks: dict[str, Any] = {}
    h2 = check_h2_conditional_bound(records, records[0].uxx_l2)
    checks["h2_conditional_bound"] = {"passed": h2.passed, "margin": _finite(h2.margin)}
    ric = check_riccati_inequalities(records, linear=scenario.linear)
    checks["riccati"] = {
        "skipped": ric.skipped,
        "pairs": int(len(ric.passed)),
        "pass_fraction": ric.pass_fraction,
        "failed_m1": int((~ric.passed_m1).sum()),
        "failed_m2": int((~ric.passed_m2).sum()),
    }
    if report.criterion_met and not scenario.linear:
        env = check_blowup_envelope(records, report.M0)
        report.envelope_ok = env.envelope_ok
        checks["envelope"] = {
            "envelope_ok": env.envelope_ok,
            "min_margin": _finite(env.min_margin),
            "contradictions": env.contradictions,
            "checked": env.checked,
        }

    classification = classify_outcome(outcome, records, report)
    final = outcome.state
    profiles = {
        "0": u0.values.tolist(),
        repr(float(final.t)): final.u.values.tolist(),
    }
    snaps = None
    if recorder is not None:
        snaps = recorder.series(
            solver.coefficient, outcome.kind is OutcomeKind.RESOLUTION_EXHAUSTED
        )
    return RunArtifact(
        scenario=scenario.to_dict(),
        outcome={
            "kind": outcome.kind.value,
            "t": outcome.t,
            "value": outcome.value,
            "steps": outcome.steps,
        },
        classification=classification.value,
        records=records,
        report=report,
        checks=checks,
        profiles=profiles,
        snapshots=snaps,
    )


def reproduce(artifact: RunArtifact) -> RunArtifact:
    """Rerun from the config echo stored in an artifact."""
    return run(scenario_from_dict(artifact.scenario, artifact.scenario.get("name", "scenario")))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    return format(float(value), ".17g")


def csv_text(artifact: RunArtifact) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in artifact.records:
        row = _record_row(r)
        writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def json_text(artifact: RunArtifact) -> str:
    return json.dumps(artifact.to_dict(), sort_keys=True, indent=1) + "\n"


def export(artifact: RunArtifact, format: str, path) -> None:
    if format == "csv":
        text = csv_text(artifact)
    elif format == "json":
        text = json_text(artifact)
    else:
        raise ValueError(f"unknown export format {format!r}; expected csv or json")
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def load_artifact(path) -> RunArtifact:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return RunArtifact.from_dict(data)
