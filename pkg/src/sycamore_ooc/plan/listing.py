"""Plan listings: one ``mode gate args...`` step per line.

Full-line ``#`` comments and blank lines attach to the step that follows
them; a trailing ``# ...`` stays with its step. The Gate column uses ``-``
(or an em-dash on input) when empty.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

MODES = ("define", "new", "gate", "entgl", "slice", "all2all", "write", "read")
TAGS = {
    "define": {None},
    "new": {"tensor", "cache"},
    "gate": {"2Q"},
    "entgl": {"EI", "E2Q", "tensor"},
    "slice": {None},
    "all2all": {None, "tensor"},
    "write": {None},
    "read": {None},
}
EMPTY_TAGS = ("-", "\u2014", "\u2013")
MAX_CACHE = 5


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass
class PlanStep:
    mode: str
    gate_tag: Optional[str] = None
    args: list[int] = field(default_factory=list)
    comments: list[str] = field(default_factory=list)
    trailing: Optional[str] = None
    line: int = 0

    def text(self) -> str:
        parts = [self.mode, self.gate_tag or "-"] + [str(a) for a in self.args]
        body = " ".join(parts)
        return body if self.trailing is None else f"{body}  {self.trailing}"

    def __str__(self):
        return self.text()


@dataclass
class SimulationPlan:
    steps: list[PlanStep] = field(default_factory=list)
    footer: list[str] = field(default_factory=list)

    @property
    def n_qubits(self) -> int:
        return self.steps[0].args[0]

    @property
    def disk_qubits(self) -> tuple[int, ...]:
        return tuple(self.steps[1].args)

    @property
    def body(self) -> list[PlanStep]:
        return self.steps[2:]


def _check_arity(step: PlanStep, lineno: int, ordinal: int):
    mode, tag, args = step.mode, step.gate_tag, step.args

    def fail(msg):
        raise ParseError(lineno, f"{mode} {tag or '-'}: {msg}")

    if mode == "define":
        if ordinal == 0 and (len(args) != 1 or args[0] < 1):
            fail("first define takes one positive qubit count")
        if ordinal > 1:
            fail("only two define lines are allowed")
        if any(a < 0 for a in args):
            fail("qubit indices must be nonnegative")
    elif mode == "new" and tag == "tensor":
        if len(args) < 2 or args[0] < 0 or args[1] < 0 or len(args) != 2 + args[0] + args[1]:
            fail("expects counts nl ng followed by nl local and ng global indices")
    elif mode == "new" and tag == "cache":
        if not args or args[0] != len(args) - 1 or not 1 <= args[0] <= MAX_CACHE:
            fail(f"expects a count k (1..{MAX_CACHE}) followed by k qubits")
    elif mode == "gate":
        if len(args) != 2:
            fail("expects exactly two qubits")
    elif mode == "entgl" and tag in ("EI", "E2Q"):
        if len(args) != 4 or args[0] < 0 or args[1] < 0 or args[2] >= 0 or args[3] >= 0:
            fail("expects two qubits then two negative entanglement labels")
    elif mode == "entgl" and tag == "tensor":
        if any(a >= 0 for a in args):
            fail("contraction lists negative entanglement labels only")
    elif mode == "all2all" and tag == "tensor":
        if not args or args[0] < 1:
            fail("expects an effective size m followed by the new global qubits")
    qubit_args = {
        "gate": args, "slice": args, "write": args, "read": args,
        "all2all": args[1:] if tag == "tensor" else args,
        "new": args[1:] if tag == "cache" else [],
    }.get(mode, [])
    if any(a < 0 for a in qubit_args):
        fail("qubit indices must be nonnegative")


def parse_plan(text: str) -> SimulationPlan:
    steps: list[PlanStep] = []
    pending: list[str] = []
    defines = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            pending.append(stripped)
            continue
        trailing = None
        if "#" in line:
            line, comment = line.split("#", 1)
            trailing = "#" + comment
        fields = line.split()
        mode = fields[0]
        if mode not in MODES:
            raise ParseError(lineno, f"unknown mode {mode!r}")
        if len(fields) < 2:
            raise ParseError(lineno, "missing Gate column")
        tag = None if fields[1] in EMPTY_TAGS else fields[1]
        if tag not in TAGS[mode]:
            raise ParseError(lineno, f"mode {mode} does not take gate tag {fields[1]!r}")
        try:
            args = [int(a) for a in fields[2:]]
        except ValueError:
            bad = next(a for a in fields[2:] if not a.lstrip("-").isdigit())
            raise ParseError(lineno, f"non-integer argument {bad!r}") from None
        step = PlanStep(mode, tag, args, pending, trailing, lineno)
        pending = []
        if len(steps) < 2 and mode != "define":
            raise ParseError(lineno, "plan must start with two define lines")
        _check_arity(step, lineno, defines)
        if mode == "define":
            if len(steps) >= 2:
                raise ParseError(lineno, "define lines belong in the header")
            defines += 1
        steps.append(step)
    if len(steps) < 2:
        raise ParseError(len(text.splitlines()), "missing define header")
    return SimulationPlan(steps, pending)


def emit_plan(plan: SimulationPlan) -> str:
    lines = []
    for step in plan.steps:
        lines.extend(step.comments)
        lines.append(step.text())
    lines.extend(plan.footer)
    return "\n".join(lines) + "\n"


def load_plan(path: str | Path) -> SimulationPlan:
    return parse_plan(Path(path).read_text())


def save_plan(plan: SimulationPlan, path: str | Path) -> None:
    Path(path).write_text(emit_plan(plan))
