"""Scenario replay harness: run instruction corpora through grounding and
simulation, and emit per-category reports.

Every trial carries an explicit seed (repetitions derive seeds as
base + index) and the harness pins clocks and id counters, so a replay
is byte-identical across runs and machines. Reported durations are
desk-scale simulation totals: only their ordering across categories is
meaningful, which the report states in its header.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .grounding import Grounder
from .idgen import IdAllocator
from .llm_provider import Provider
from .mission_exec import (
    SCENARIO_TAGS,
    MissionRecord,
    ScenarioSummary,
    run_mission,
    summarize,
)
from .nav_sim import DEFAULT_CRUISE_SPEED, NavSimulator, fault_from_json
from .prompting import PromptTemplate
from .waypoint_world import WaypointWorld

__all__ = [
    "ScenarioSuite",
    "SuiteReport",
    "SuiteTrial",
    "load_suite",
    "packaged_suite_path",
    "run_suite",
]

REPORT_NOTE = (
    "NOTE: durations are desk-scale simulation totals; only their ordering "
    "across categories is meaningful. Absolute values are not comparable to "
    "a physical deployment."
)

CSV_HEADER = "scenario_category,avg_duration_s,success_rate_pct,total_attempts"


@dataclass(frozen=True, slots=True)
class SuiteTrial:
    instruction: str
    scenario_tag: str
    seed: int
    repetitions: int = 1
    fault: dict[str, Any] | None = None


@dataclass(frozen=True, slots=True)
class ScenarioSuite:
    name: str
    trials: tuple[SuiteTrial, ...]
    policy: str = "abort_mission"
    cruise_speed: float = DEFAULT_CRUISE_SPEED


@dataclass(slots=True)
class SuiteReport:
    suite_name: str
    records: list[MissionRecord]
    summaries: list[ScenarioSummary]
    csv_text: str
    table_text: str


def load_suite(path: str | Path) -> ScenarioSuite:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"suite file not found: {path}")
    doc = json.loads(path.read_text(encoding="utf-8"))
    trials = []
    for i, entry in enumerate(doc.get("trials", [])):
        tag = entry["scenario_tag"]
        if tag not in SCENARIO_TAGS:
            raise ValueError(f"trial {i}: unknown scenario tag {tag!r}")
        if "seed" not in entry:
            raise ValueError(f"trial {i}: seeds must be explicit")
        trials.append(
            SuiteTrial(
                instruction=str(entry["instruction"]),
                scenario_tag=tag,
                seed=int(entry["seed"]),
                repetitions=int(entry.get("repetitions", 1)),
                fault=entry.get("fault"),
            )
        )
    return ScenarioSuite(
        name=str(doc.get("name", path.stem)),
        trials=tuple(trials),
        policy=str(doc.get("policy", "abort_mission")),
        cruise_speed=float(doc.get("cruise_speed", DEFAULT_CRUISE_SPEED)),
    )


def packaged_suite_path(name: str) -> Path:
    return Path(str(resources.files("quadplan.data").joinpath(f"suites/{name}.json")))


def _format_rate(rate: float) -> str:
    return str(int(rate)) if rate == int(rate) else f"{rate:.2f}"


def _render_csv(summaries: list[ScenarioSummary]) -> str:
    lines = [CSV_HEADER]
    for s in summaries:
        mean = "" if s.mean_duration is None else f"{s.mean_duration:.2f}"
        lines.append(
            f"{s.scenario_tag},{mean},{_format_rate(s.success_rate)},{s.attempts}"
        )
    return "\n".join(lines) + "\n"


def _render_table(suite_name: str, summaries: list[ScenarioSummary]) -> str:
    lines = [f"Scenario replay: {suite_name}", REPORT_NOTE, ""]
    header = f"{'Scenario Category':<22}{'Avg. Duration(s)':>18}{'Success Rate(%)':>17}{'Total Attempts':>16}"
    lines.append(header)
    lines.append("-" * len(header))
    for s in summaries:
        mean = "n/a" if s.mean_duration is None else f"{s.mean_duration:.2f}"
        lines.append(
            f"{s.scenario_tag:<22}{mean:>18}{_format_rate(s.success_rate):>17}{s.attempts:>16}"
        )
    return "\n".join(lines) + "\n"


def run_suite(
    suite: ScenarioSuite,
    world: WaypointWorld,
    template: PromptTemplate,
    provider: Provider,
    *,
    out_dir: str | Path | None = None,
) -> SuiteReport:
    """Execute every trial deterministically under its seed.

    Per-trial failures (grounding rejections, execution failures) are data
    in the report, never harness errors.
    """
    grounder = Grounder(world, template, provider, clock=lambda: 0.0)
    mission_ids = IdAllocator("mission")
    records: list[MissionRecord] = []
    outcome_docs: list[dict[str, Any]] = []

    for trial in suite.trials:
        for rep in range(trial.repetitions):
            seed = trial.seed + rep
            outcome = grounder.ground(trial.instruction)
            outcome_docs.append(outcome.to_json())
            mission_id = mission_ids.next()
            if outcome.plan is None:
                records.append(
                    MissionRecord(
                        mission_id=mission_id,
                        outcome_id=outcome.outcome_id,
                        scenario_tag=trial.scenario_tag,
                        duration=0.0,
                        success=False,
                        phase="failed",
                        started_at=0.0,
                        finished_at=0.0,
                        end_to_end=outcome.provider_latency,
                        events=[],
                    )
                )
                continue
            faults = []
            if trial.fault is not None:
                faults.append(fault_from_json(trial.fault, world))
            sim = NavSimulator(
                world, cruise_speed=suite.cruise_speed, seed=seed, faults=faults
            )
            records.append(
                run_mission(
                    outcome.plan,
                    sim,
                    policy=suite.policy,
                    scenario_tag=trial.scenario_tag,
                    mission_id=mission_id,
                    outcome_id=outcome.outcome_id,
                    grounding_latency=outcome.provider_latency,
                )
            )

    summaries = summarize(records)
    csv_text = _render_csv(summaries)
    table_text = _render_table(suite.name, summaries)
    report = SuiteReport(
        suite_name=suite.name,
        records=records,
        summaries=summaries,
        csv_text=csv_text,
        table_text=table_text,
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "records.jsonl").open("w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record.to_json(), separators=(",", ":")) + "\n")
        with (out / "outcomes.jsonl").open("w", encoding="utf-8") as fh:
            for doc in outcome_docs:
                fh.write(json.dumps(doc, separators=(",", ":"), ensure_ascii=False) + "\n")
        (out / "summary.csv").write_text(csv_text, encoding="utf-8")
        (out / "report.txt").write_text(table_text, encoding="utf-8")
    return report
