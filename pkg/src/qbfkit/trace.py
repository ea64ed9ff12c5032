"""Line-based resolution trace format shared by the solver and the checker.

Grammar, one record per line:

    c <free text>                      comment, ignored
    <id> <lit>* 0 <antecedent_id>* 0   step
    r (refutation|satisfaction) <id>   footer naming the empty step

Step ids are positive and strictly increasing; antecedents refer to earlier
steps. A step with no antecedents introduces an input clause (refutations)
or an input cube (satisfactions); one antecedent is a reduction; two are a
resolution. The pivot of a resolution is not written, it is recoverable as
the unique variable occurring in both antecedents with opposite signs.
"""

from __future__ import annotations

from dataclasses import dataclass

REFUTATION = "refutation"
SATISFACTION = "satisfaction"


class TraceError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class RawStep:
    id: int
    literals: tuple[int, ...]
    antecedents: tuple[int, ...]


def _canonical(lits) -> tuple[int, ...]:
    return tuple(sorted(lits, key=lambda l: (abs(l), l < 0)))


class TraceWriter:
    """Appends steps to a text sink, handing out ids; tracks bytes written."""

    def __init__(self, sink):
        self.sink = sink
        self.next_id = 1
        self.bytes_written = 0

    def _emit(self, lits, antecedents) -> int:
        step_id = self.next_id
        self.next_id += 1
        parts = [str(step_id)]
        parts += [str(l) for l in _canonical(lits)]
        parts.append("0")
        parts += [str(a) for a in antecedents]
        parts.append("0")
        line = " ".join(parts) + "\n"
        self.sink.write(line)
        self.bytes_written += len(line)
        return step_id

    def input_step(self, lits) -> int:
        return self._emit(lits, ())

    def reduction(self, parent: int, lits) -> int:
        return self._emit(lits, (parent,))

    def resolution(self, left: int, right: int, lits) -> int:
        return self._emit(lits, (left, right))

    def footer(self, kind: str, root: int):
        line = f"r {kind} {root}\n"
        self.sink.write(line)
        self.bytes_written += len(line)


def scan_trace(text):
    """Yield ("s", RawStep) events, then a final ("f", kind, root) event.

    Structural errors only (syntax, id ordering); dangling references are
    left to the checker where they map to rejection reasons.
    """
    if isinstance(text, bytes):
        text = text.decode("ascii", errors="replace")
    if isinstance(text, str):
        lines = text.splitlines()
    else:
        lines = text

    kind = root = None
    last_id = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("r "):
            if kind is not None:
                raise TraceError("duplicate footer", lineno)
            parts = line.split()
            if len(parts) != 3 or parts[1] not in (REFUTATION, SATISFACTION):
                raise TraceError(f"bad footer {line!r}", lineno)
            kind = parts[1]
            try:
                root = int(parts[2])
            except ValueError:
                raise TraceError(f"bad footer {line!r}", lineno) from None
            yield ("f", kind, root)
            continue
        if kind is not None:
            raise TraceError("step after footer", lineno)
        try:
            nums = [int(t) for t in line.split()]
        except ValueError:
            raise TraceError(f"bad step line {line!r}", lineno) from None
        if len(nums) < 3 or nums[0] <= 0:
            raise TraceError(f"bad step line {line!r}", lineno)
        step_id = nums[0]
        if step_id <= last_id:
            raise TraceError(f"step id {step_id} not increasing", lineno)
        last_id = step_id
        try:
            zero1 = nums.index(0, 1)
        except ValueError:
            raise TraceError("missing literal terminator", lineno) from None
        if nums[-1] != 0:
            raise TraceError("missing antecedent terminator", lineno)
        lits = tuple(nums[1:zero1])
        ants = tuple(nums[zero1 + 1 : -1])
        if any(a <= 0 for a in ants) or 0 in lits:
            raise TraceError(f"bad step line {line!r}", lineno)
        yield ("s", RawStep(step_id, lits, ants))
    if kind is None:
        raise TraceError("missing footer")


def parse_trace(text):
    """Parse a full trace; returns (steps, kind, root_id)."""
    steps: list[RawStep] = []
    kind = root = None
    for event in scan_trace(text):
        if event[0] == "s":
            steps.append(event[1])
        else:
            _, kind, root = event
    return steps, kind, root
