"""Canonical PASS/FAIL reports shared by every verification routine.

Report rendering is deterministic: the same input data always produces the
same byte sequence, which is what makes golden-file tests of the CLI viable.
"""

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Check:
    """One named verdict, with a counterexample witness when it failed."""

    name: str
    ok: bool
    witness: str = ""

    def line(self, suite: str) -> str:
        if self.ok:
            return f"CHECK {suite}.{self.name}: PASS"
        if self.witness:
            return f"CHECK {suite}.{self.name}: FAIL witness={self.witness}"
        return f"CHECK {suite}.{self.name}: FAIL"


@dataclass
class CheckReport:
    """Ordered list of checks under a fixed suite name."""

    suite: str
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, ok: bool, witness: str = "") -> None:
        self.checks.append(Check(name, bool(ok), witness))

    def merge(self, other: "CheckReport") -> None:
        for c in other.checks:
            self.checks.append(Check(f"{other.suite}.{c.name}", c.ok, c.witness))

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def lines(self) -> list[str]:
        return [c.line(self.suite) for c in self.checks]

    def __str__(self) -> str:
        return "\n".join(self.lines())
