from pydantic import BaseModel, Field, model_validator

from src.diagram import Diagram, canonical_key, key_of, to_diagram
from src.errors import PreconditionUnmet
from src.matrix import Matrix
from src.rewrite import Equation, apply_equation, enumerate_matches
from src.signature import TypedTerm


class Witness(BaseModel):
    """Concrete evidence for a failed condition."""

    description: str
    morphism: Matrix | None = None
    lhs: Matrix | None = None
    rhs: Matrix | None = None
    terms: tuple[str, str] | None = None


class CheckOutcome(BaseModel):
    name: str
    passed: bool
    detail: str = ""
    witness: Witness | None = None

    @model_validator(mode="after")
    def _failures_carry_witness(self) -> "CheckOutcome":
        if not self.passed and self.witness is None:
            raise ValueError(f"Failed check '{self.name}' has no witness")
        return self


class CheckReport(BaseModel):
    title: str
    outcomes: list[CheckOutcome] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.outcomes)

    def failed(self) -> list[CheckOutcome]:
        return [o for o in self.outcomes if not o.passed]

    def outcome(self, name: str) -> CheckOutcome:
        for o in self.outcomes:
            if o.name == name:
                return o
        raise KeyError(name)

    def record(
        self,
        name: str,
        passed: bool,
        detail: str = "",
        witness: Witness | None = None,
    ) -> CheckOutcome:
        outcome = CheckOutcome(
            name=name, passed=passed, detail=detail, witness=witness
        )
        self.outcomes.append(outcome)
        return outcome

    def compare(
        self,
        name: str,
        lhs: Matrix,
        rhs: Matrix,
        description: str,
        morphism: Matrix | None = None,
    ) -> bool:
        """Record whether two evaluated legs agree."""
        same = lhs.equals(rhs)
        self.record(
            name,
            same,
            witness=None
            if same
            else Witness(
                description=description,
                morphism=morphism,
                lhs=lhs,
                rhs=rhs,
            ),
        )
        return same

    def extend(self, other: "CheckReport", prefix: str = "") -> None:
        for o in other.outcomes:
            self.outcomes.append(o.model_copy(update={"name": prefix + o.name}))
        self.notes.extend(other.notes)


class DerivationStep(BaseModel):
    """One rewrite; steps of the same chain follow each other."""

    chain: str
    before: Diagram
    equation: Equation
    site: int
    after: Diagram
    before_key: str
    after_key: str


class DerivationReport(BaseModel):
    """A chain of rewrites plus the key comparisons it establishes."""

    title: str
    steps: list[DerivationStep] = Field(default_factory=list)
    conclusions: list[CheckOutcome] = Field(default_factory=list)
    derived: list[str] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conclusions)

    def rewrite(self, chain: str, d: Diagram, eq: Equation) -> Diagram:
        """Rewrite at the first match and record the step."""
        matches = enumerate_matches(d, to_diagram(eq.lhs))
        if not matches:
            raise PreconditionUnmet(
                f"'{eq.name}' does not apply in {chain}", failed=[eq.name]
            )
        after = apply_equation(d, eq, matches[0])
        self.steps.append(
            DerivationStep(
                chain=chain,
                before=d,
                equation=eq,
                site=matches[0].index,
                after=after,
                before_key=canonical_key(d).text(),
                after_key=canonical_key(after).text(),
            )
        )
        return after

    def expect_key(self, name: str, d: Diagram, t: TypedTerm) -> bool:
        got, want = canonical_key(d), key_of(t)
        same = got == want
        self.conclusions.append(
            CheckOutcome(
                name=name,
                passed=same,
                detail=f"key of {t}",
                witness=None
                if same
                else Witness(description=f"{name} fails",
                             terms=(got.text(), want.text())),
            )
        )
        return same


class BranchVerdict(BaseModel):
    index: int
    passed: bool
    composite: Matrix
    scalar: str | None = None
    detail: str = ""


class ProtocolReport(BaseModel):
    title: str
    branches: list[BranchVerdict] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(b.passed for b in self.branches)
