"""The JSON model file schema."""

from math import prod
from typing import Any, Literal

from pydantic import BaseModel, Field

from src.errors import UnknownName
from src.signature import ObjectExpr, Signature

ModelKind = Literal["rel", "fdvec", "finset", "semilattice"]
ScalarsName = Literal[
    "bool", "rational", "complex-rational", "complex-float", "semilattice"
]
FamilyKind = Literal[
    "diagonal", "deleting", "left_projection", "right_projection"
]


class GeneratorSpec(BaseModel):
    dom: str | list[str]
    cod: str | list[str]
    entries: list[Any]


class FamilySpec(BaseModel):
    kind: FamilyKind
    components: dict[str, list[Any]] = Field(default_factory=dict)


class BranchSpec(BaseModel):
    branch: list[Any]
    correction: list[Any]


class ProtocolSpec(BaseModel):
    object: str | None = None
    teleport: list[BranchSpec] = Field(default_factory=list)


class ModelParams(BaseModel):
    kind: ModelKind
    scalars: ScalarsName
    objects: dict[str, int]
    generators: dict[str, GeneratorSpec | list[Any]] = Field(
        default_factory=dict
    )
    meet_table: list[list[int]] | None = None
    tolerance: float = Field(1e-9, ge=0)
    units: dict[str, list[Any]] = Field(default_factory=dict)
    counits: dict[str, list[Any]] = Field(default_factory=dict)
    families: dict[str, FamilySpec] = Field(default_factory=dict)
    protocols: ProtocolSpec = Field(default_factory=ProtocolSpec)
    description: str = ""

    def dim(self, word: ObjectExpr) -> int:
        for base in word.bases():
            if base not in self.objects:
                raise UnknownName(base)
        return prod(self.objects[f.base] for f in word.factors)

    def generator_words(
        self, name: str, signature: Signature | None = None
    ) -> tuple[ObjectExpr, ObjectExpr]:
        """The declared type of a generator, from the file or a signature."""
        spec = self.generators[name]
        if isinstance(spec, GeneratorSpec):
            return ObjectExpr.parse(spec.dom), ObjectExpr.parse(spec.cod)
        if signature is None or not signature.has_generator(name):
            raise UnknownName(name)
        g = signature.generator(name)
        return g.dom, g.cod

    def generator_entries(self, name: str) -> list[Any]:
        spec = self.generators[name]
        return spec.entries if isinstance(spec, GeneratorSpec) else spec
