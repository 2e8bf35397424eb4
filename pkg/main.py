import argparse
import asyncio
import os
import sys

from dotenv import load_dotenv
from loguru import logger

from src.bundle import load_model
from src.config import LOG_LEVEL_ENV, CliConfig
from src.diagram import canonical_key, equal_diagrams, to_diagram
from src.dsl import Workspace, load_source
from src.errors import SourceError, UnknownName, WorkbenchError
from src.models import build_model, evaluate_with_report
from src.output_formatter import OutputFormatter
from src.protocols import (
    derive_teleportation,
    pauli_branches,
    teleport_verify,
)
from src.render import render_dot
from src.rewrite import enumerate_matches
from src.signature import TypedTerm
from src.suites import SUITES, run_suite

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class WorkbenchApp:
    def __init__(self, config: CliConfig):
        self.config = config
        self.output_formatter = OutputFormatter(config.output_format)

    @staticmethod
    def read_file(file_path: str) -> str:
        """Read content from a file."""
        try:
            with open(file_path, encoding="utf-8") as f:
                return f.read()
        except FileNotFoundError as err:
            logger.error(f"File not found: {file_path}")
            raise SourceError(
                f"The file '{file_path}' was not found"
            ) from err
        except OSError as e:
            logger.error(f"Error reading file {file_path}: {str(e)}")
            raise SourceError(
                f"Failed to read file '{file_path}': {str(e)}"
            ) from e

    def workspace(self, file_path: str) -> Workspace:
        logger.info(f"Loading declarations from {file_path}")
        return load_source(self.read_file(file_path))

    def _require_model(self) -> str:
        if not self.config.model_path:
            raise SourceError("This command needs --model")
        return self.config.model_path

    def check(self, file_path: str) -> tuple[int, str]:
        ws = self.workspace(file_path)
        lines = [f"term {name} : {t.dom} → {t.cod}"
                 for name, t in ws.terms.items()]
        lines += [f"eq {name} : {e.lhs.dom} → {e.lhs.cod}"
                  for name, e in ws.equations.items()]
        lines.append(
            f"{len(ws.terms)} terms, {len(ws.equations)} equations typecheck"
        )
        return EXIT_OK, self.output_formatter.format_lines(
            "check", True, lines
        )

    def equal(self, file_path: str, left: str, right: str) -> tuple[int, str]:
        ws = self.workspace(file_path)
        a, b = ws.resolve(left), ws.resolve(right)
        logger.info("Comparing diagrams")
        same = equal_diagrams(a, b)
        return (EXIT_OK if same else EXIT_FAILED), (
            self.output_formatter.format_lines(
                "equal", same, [str(same).lower()], left=left, right=right
            )
        )

    def evaluate(self, file_path: str, name: str) -> tuple[int, str]:
        ws = self.workspace(file_path)
        term = ws.resolve(name)
        bundle = load_model(
            self._require_model(), ws.signature, self.config.tolerance
        )
        missing = (term.dom.bases() | term.cod.bases()) - set(
            bundle.model.dims
        )
        if missing:
            raise UnknownName(min(missing))
        report = evaluate_with_report(term, bundle.model)
        return EXIT_OK, self.output_formatter.format_matrix(
            report.matrix, report.ledger, report.loop_scalar
        )

    def render(self, file_path: str, name: str) -> tuple[int, str]:
        ws = self.workspace(file_path)
        dot = render_dot(to_diagram(ws.resolve(name)), name)
        if self.config.dot_path:
            logger.info(f"Writing {self.config.dot_path}")
            with open(self.config.dot_path, "w", encoding="utf-8") as f:
                f.write(dot)
            return EXIT_OK, self.output_formatter.format_lines(
                "render", True, [f"wrote {self.config.dot_path}"]
            )
        return EXIT_OK, self.output_formatter.format_lines(
            "render", True, dot.splitlines()
        )

    def keys(self, file_path: str, name: str) -> tuple[int, str]:
        ws = self.workspace(file_path)
        key = canonical_key(to_diagram(ws.resolve(name))).text()
        return EXIT_OK, self.output_formatter.format_lines(
            "keys", True, key.splitlines()
        )

    def matches(
        self, file_path: str, name: str, equation: str
    ) -> tuple[int, str]:
        ws = self.workspace(file_path)
        host: TypedTerm = ws.resolve(name)
        eq = ws.equation(equation)
        found = enumerate_matches(to_diagram(host), to_diagram(eq.lhs))
        lines = [
            f"match {m.index}: nodes "
            + ", ".join(f"{p}->{h}" for p, h in m.node_map)
            for m in found
        ]
        lines.append(f"{len(found)} matches of '{eq.name}' in {name}")
        return EXIT_OK, self.output_formatter.format_lines(
            "matches", bool(found), lines
        )

    def verify(self, suite: str) -> tuple[int, str]:
        bundle = load_model(
            self._require_model(), tolerance=self.config.tolerance
        )
        report = run_suite(suite, bundle, self.config)
        code = EXIT_OK if report.passed else EXIT_FAILED
        return code, self.output_formatter.format_check_report(report)

    def demo_teleport(self) -> tuple[int, str]:
        logger.info("Building the qubit model over complex rationals")
        qubit = build_model(
            "fdvec", {"scalars": "complex-rational", "objects": {"A": 2}}
        )
        report = teleport_verify(qubit, "A", pauli_branches(qubit.algebra))
        derivation = derive_teleportation("A")
        passed = report.passed and derivation.passed
        if self.output_formatter.as_json:
            output = self.output_formatter.document(
                "demo",
                passed,
                report=report.model_dump(mode="json"),
                derivation=derivation.model_dump(mode="json"),
            )
        else:
            output = self.output_formatter.format_protocol(report)
            output += self.output_formatter.format_derivation(derivation)
        return (EXIT_OK if passed else EXIT_FAILED), output

    def dispatch(self, args: argparse.Namespace) -> tuple[int, str]:
        if args.command == "check":
            return self.check(args.file)
        if args.command == "equal":
            return self.equal(args.file, args.left, args.right)
        if args.command == "eval":
            return self.evaluate(args.file, args.term)
        if args.command == "render":
            return self.render(args.file, args.term)
        if args.command == "keys":
            return self.keys(args.file, args.term)
        if args.command == "matches":
            return self.matches(args.file, args.term, args.equation)
        if args.command == "verify":
            return self.verify(args.suite)
        return self.demo_teleport()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json"])
    common.add_argument("--model", type=str, help="Path to a model file")
    common.add_argument("--tolerance", type=float)
    common.add_argument("--budget", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(
        description="Compact closed category workbench"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("check", parents=[common], help="Typecheck a file")
    p.add_argument("file")
    p = sub.add_parser("equal", parents=[common],
                       help="Decide diagram equality of two terms")
    p.add_argument("file")
    p.add_argument("left")
    p.add_argument("right")
    p = sub.add_parser("eval", parents=[common],
                       help="Evaluate a term in a model")
    p.add_argument("file")
    p.add_argument("term")
    p = sub.add_parser("render", parents=[common],
                       help="Render a term's diagram as dot")
    p.add_argument("file")
    p.add_argument("term")
    p.add_argument("-o", "--output", type=str)
    p = sub.add_parser("keys", parents=[common],
                       help="Print a term's canonical key")
    p.add_argument("file")
    p.add_argument("term")
    p = sub.add_parser("matches", parents=[common],
                       help="List the sites an equation matches")
    p.add_argument("file")
    p.add_argument("term")
    p.add_argument("equation")
    p = sub.add_parser("verify", parents=[common],
                       help="Run a check suite against a model")
    p.add_argument("suite", choices=[*SUITES, "all"])
    p = sub.add_parser("demo", parents=[common],
                       help="Run a built-in demonstration")
    p.add_argument("name", choices=["teleport"])
    return parser


def run_command(
    argv: list[str], config: CliConfig | None = None
) -> tuple[int, str]:
    """Run one subcommand; returns the exit code and the rendered output."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as err:
        return (err.code if isinstance(err.code, int) else EXIT_USAGE), ""
    base = config or CliConfig()
    try:
        parsed = CliConfig.from_namespace(args)
    except ValueError as err:
        return EXIT_USAGE, OutputFormatter().format_error("usage", str(err))
    merged = base.model_copy(update=parsed.model_dump(exclude_unset=True))
    app = WorkbenchApp(merged)
    try:
        return app.dispatch(args)
    except WorkbenchError as err:
        logger.error(f"{type(err).__name__}: {err}")
        return EXIT_USAGE, app.output_formatter.format_error(
            type(err).__name__, str(err)
        )
    except Exception as e:
        logger.error(f"Unexpected error: {str(e)}")
        return EXIT_USAGE, app.output_formatter.format_error(
            "internal", str(e)
        )


async def main():
    """Main application entry point."""
    _ = load_dotenv()
    logger.remove()
    logger.add(sys.stderr, level=os.environ.get(LOG_LEVEL_ENV, "WARNING"))
    code, output = await asyncio.to_thread(run_command, sys.argv[1:])
    sys.stdout.write(output)
    sys.exit(code)


if __name__ == "__main__":
    asyncio.run(main())
