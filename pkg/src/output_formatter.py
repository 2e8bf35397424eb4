import json
from typing import Any

from src.matrix import Matrix
from src.reports import (
    CheckOutcome,
    CheckReport,
    DerivationReport,
    ProtocolReport,
    Witness,
)

SCHEMA_VERSION = 1


class OutputFormatter:
    """Renders command results as plain text or as JSON documents."""

    def __init__(self, output_format: str = "text"):
        self.output_format = output_format

    @property
    def as_json(self) -> bool:
        return self.output_format == "json"

    def document(self, command: str, passed: bool, **body: Any) -> str:
        """The JSON envelope shared by every subcommand."""
        payload = {
            "schema": SCHEMA_VERSION,
            "command": command,
            "passed": passed,
            **body,
        }
        return json.dumps(payload, indent=2, ensure_ascii=False)

    def format_witness(self, witness: Witness, indent: str = "    ") -> str:
        text = f"{indent}witness: {witness.description}\n"
        for label, m in (
            ("morphism", witness.morphism),
            ("lhs", witness.lhs),
            ("rhs", witness.rhs),
        ):
            if m is not None:
                text += f"{indent}{label}:\n"
                for line in m.render().splitlines():
                    text += f"{indent}  {line}\n"
        if witness.terms is not None:
            text += f"{indent}got:      {witness.terms[0]}\n"
            text += f"{indent}expected: {witness.terms[1]}\n"
        return text

    def format_outcome(self, outcome: CheckOutcome) -> str:
        mark = "ok" if outcome.passed else "FAIL"
        text = f"  [{mark}] {outcome.name}"
        if outcome.detail:
            text += f" ({outcome.detail})"
        text += "\n"
        if outcome.witness is not None:
            text += self.format_witness(outcome.witness)
        return text

    def format_check_report(self, report: CheckReport) -> str:
        if self.as_json:
            return self.document(
                "verify",
                report.passed,
                report=report.model_dump(mode="json"),
            )
        text = f"# {report.title}\n"
        for o in report.outcomes:
            text += self.format_outcome(o)
        for note in report.notes:
            text += f"  note: {note}\n"
        passed = sum(o.passed for o in report.outcomes)
        text += f"{passed}/{len(report.outcomes)} checks passed\n"
        return text

    def format_derivation(self, report: DerivationReport) -> str:
        if self.as_json:
            return self.document(
                "derive",
                report.passed,
                report=report.model_dump(mode="json"),
            )
        text = f"# {report.title}\n"
        for k, step in enumerate(report.steps):
            text += (
                f"  step {k} [{step.chain}] {step.equation.name} at site "
                f"{step.site}\n"
                f"    before: {step.before_key}\n"
                f"    after:  {step.after_key}\n"
            )
        for c in report.conclusions:
            text += self.format_outcome(c)
        for d in report.derived:
            text += f"  derived: {d}\n"
        for note in report.notes:
            text += f"  note: {note}\n"
        return text

    def format_protocol(self, report: ProtocolReport) -> str:
        if self.as_json:
            return self.document(
                "demo",
                report.passed,
                report=report.model_dump(mode="json"),
            )
        text = f"# {report.title}\n"
        for b in report.branches:
            mark = "ok" if b.passed else "FAIL"
            text += f"  branch {b.index}: {mark}"
            if b.scalar is not None:
                text += f" (scalar {b.scalar})"
            text += "\n"
            if not b.passed:
                text += f"    {b.detail}\n"
                for line in b.composite.render().splitlines():
                    text += f"      {line}\n"
        for note in report.notes:
            text += f"  note: {note}\n"
        return text

    def format_matrix(
        self, m: Matrix, ledger: dict[str, int], loop_scalar: str
    ) -> str:
        if self.as_json:
            return self.document(
                "eval",
                True,
                matrix=m.model_dump(mode="json"),
                loops=ledger,
                loop_scalar=loop_scalar,
            )
        text = f"{m.rows}×{m.cols} over {m.algebra.name}\n{m.render()}\n"
        if ledger:
            loops = ", ".join(f"{b}: {n}" for b, n in sorted(ledger.items()))
            text += f"free loops: {loops} (scalar {loop_scalar})\n"
        return text

    def format_lines(
        self, command: str, passed: bool, lines: list[str], **body: Any
    ) -> str:
        """Simple line-oriented results (check, equal, keys, matches)."""
        if self.as_json:
            return self.document(command, passed, lines=lines, **body)
        return "".join(f"{line}\n" for line in lines)

    def format_error(self, kind: str, message: str, **body: Any) -> str:
        if self.as_json:
            return self.document("error", False, error=kind,
                                 message=message, **body)
        return f"error ({kind}): {message}\n"
