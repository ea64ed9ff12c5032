"""Rounds of preprocessing steps with fixpoint detection on digests.

A pipeline is a sequence of steps run in order once per round; a step is
either the label of a bundle or an external command that reads QDIMACS on
stdin and writes QDIMACS on stdout. The canonical digest of the formula
is taken at every round boundary; a round that leaves the digest
unchanged ends the pipeline as a fixpoint. A failing external step
(crash, timeout, unparseable output) forwards its input unchanged and is
recorded as failed rather than aborting the run.
"""

from __future__ import annotations

import subprocess
import time
from dataclasses import dataclass

from .formula import PCNF, QdimacsError, canonical_digest, parse_qdimacs, write_qdimacs
from .prep import DEFAULT_BUNDLES, Bundle, formula_status, preprocess

SOLVED_SAT = "solved-sat"
SOLVED_UNSAT = "solved-unsat"
FIXPOINT = "fixpoint"
ROUNDS_EXHAUSTED = "rounds-exhausted"


@dataclass(frozen=True)
class ExternalStep:
    """A filter command: QDIMACS in on stdin, QDIMACS out on stdout."""

    command: tuple[str, ...]
    name: str = ""

    def label(self) -> str:
        return self.name or " ".join(self.command)


@dataclass(frozen=True)
class StepOutcome:
    step: str
    kind: str
    applications: int
    failed: bool
    seconds: float


@dataclass(frozen=True)
class RoundReport:
    index: int
    digest_before: str
    digest_after: str
    steps: tuple[StepOutcome, ...]


@dataclass(frozen=True)
class PipelineResult:
    outcome: str
    formula: PCNF
    rounds: tuple[RoundReport, ...]


def _run_external(f: PCNF, step: ExternalStep, limit: float):
    text = write_qdimacs(f)
    try:
        proc = subprocess.run(
            list(step.command),
            input=text.encode("ascii"),
            capture_output=True,
            timeout=limit,
        )
    except (subprocess.TimeoutExpired, OSError):
        return f, True
    if proc.returncode != 0:
        return f, True
    try:
        return parse_qdimacs(proc.stdout, strict=False), False
    except QdimacsError:
        return f, True


def run_pipeline(
    f: PCNF,
    steps,
    *,
    bundles: dict[str, Bundle] | None = None,
    max_rounds: int = 6,
    per_call_limit: float = 120.0,
    on_round=None,
) -> PipelineResult:
    """Run rounds of the given steps until solved, fixpoint, or round cap.

    on_round, when given, is called with each RoundReport as it completes.
    """
    if bundles is None:
        bundles = DEFAULT_BUNDLES
    if isinstance(steps, str):
        steps = list(steps)
    resolved = []
    for s in steps:
        if isinstance(s, ExternalStep):
            resolved.append(s)
        elif isinstance(s, str):
            if s not in bundles:
                raise ValueError(f"unknown bundle label {s!r}")
            resolved.append(s)
        else:
            raise TypeError(f"bad pipeline step {s!r}")
    if not resolved:
        raise ValueError("empty pipeline")

    status = formula_status(f)
    if status is not None:
        outcome = SOLVED_SAT if status == "SAT" else SOLVED_UNSAT
        return PipelineResult(outcome, f, ())

    rounds: list[RoundReport] = []
    for index in range(1, max_rounds + 1):
        digest_before = canonical_digest(f).hex()
        outcomes: list[StepOutcome] = []
        status = None
        for step in resolved:
            t0 = time.monotonic()
            if isinstance(step, ExternalStep):
                f, failed = _run_external(f, step, per_call_limit)
                outcomes.append(
                    StepOutcome(
                        step.label(),
                        "external",
                        0,
                        failed,
                        time.monotonic() - t0,
                    )
                )
                status = formula_status(f)
            else:
                r = preprocess(f, bundles[step], limit=per_call_limit)
                f = r.formula
                outcomes.append(
                    StepOutcome(
                        step,
                        "bundle",
                        sum(n for _, n in r.log),
                        False,
                        time.monotonic() - t0,
                    )
                )
                status = r.status
            if status is not None:
                break
        digest_after = canonical_digest(f).hex()
        rounds.append(
            RoundReport(index, digest_before, digest_after, tuple(outcomes))
        )
        if on_round is not None:
            on_round(rounds[-1])
        if status is not None:
            outcome = SOLVED_SAT if status == "SAT" else SOLVED_UNSAT
            return PipelineResult(outcome, f, tuple(rounds))
        if digest_before == digest_after:
            return PipelineResult(FIXPOINT, f, tuple(rounds))
    return PipelineResult(ROUNDS_EXHAUSTED, f, tuple(rounds))
