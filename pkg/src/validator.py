from pydantic import BaseModel
from loguru import logger

from src.errors import AlgebraError, NotASemilattice, UnknownName
from src.params import ModelParams
from src.scalars import BooleanAlgebra, check_semilattice
from src.signature import Signature

_KIND_SCALARS = {
    "rel": {"bool"},
    "finset": {"bool"},
    "fdvec": {"rational", "complex-rational", "complex-float"},
    "semilattice": {"semilattice"},
}


class Verdict(BaseModel):
    is_valid: bool
    error_message: str | None = None
    stage: str | None = None


def _ok() -> Verdict:
    return Verdict(is_valid=True)


def _bad(stage: str, message: str) -> Verdict:
    return Verdict(is_valid=False, error_message=message, stage=stage)


class ModelValidator:
    """Validate model parameters stage by stage, stopping at the first
    failure: scalars, dimensions, meet table, generator shapes, kind."""

    def check_scalars(self, params: ModelParams) -> Verdict:
        allowed = _KIND_SCALARS[params.kind]
        if params.scalars not in allowed:
            return _bad(
                "scalars",
                f"A {params.kind} model needs scalars in {sorted(allowed)}, "
                f"got '{params.scalars}'",
            )
        return _ok()

    def check_dimensions(self, params: ModelParams) -> Verdict:
        for name, dim in params.objects.items():
            if dim < 1:
                return _bad("dimensions", f"Object {name} has dimension {dim}")
            if params.kind == "semilattice" and dim != 1:
                return _bad(
                    "dimensions",
                    f"Semilattice objects have dimension 1, {name} has {dim}",
                )
        return _ok()

    def check_meet_table(self, params: ModelParams) -> Verdict:
        if params.kind != "semilattice":
            return _ok()
        if params.meet_table is None:
            return _bad("semilattice", "A semilattice model needs meet_table")
        try:
            check_semilattice(tuple(tuple(r) for r in params.meet_table))
        except NotASemilattice as err:
            return _bad("semilattice", err.message)
        return _ok()

    def check_generators(
        self, params: ModelParams, signature: Signature | None = None
    ) -> Verdict:
        for name in params.generators:
            try:
                dom, cod = params.generator_words(name, signature)
                expected = params.dim(dom) * params.dim(cod)
            except UnknownName as err:
                return _bad(
                    "generators",
                    f"Generator '{name}': unknown name '{err.name}'",
                )
            found = len(params.generator_entries(name))
            if found != expected:
                return _bad(
                    "generators",
                    f"Generator '{name}' : {dom} → {cod} needs {expected} "
                    f"entries, got {found}",
                )
        return _ok()

    def check_kind_constraints(
        self, params: ModelParams, signature: Signature | None = None
    ) -> Verdict:
        if params.kind not in ("rel", "finset"):
            return _ok()
        booleans = BooleanAlgebra()
        for name in params.generators:
            try:
                entries = [
                    booleans.parse(x) for x in params.generator_entries(name)
                ]
            except AlgebraError as err:
                return _bad("kind", f"Generator '{name}': {err.message}")
            if params.kind == "finset":
                dom, cod = params.generator_words(name, signature)
                rows, cols = params.dim(cod), params.dim(dom)
                for j in range(cols):
                    ones = sum(entries[i * cols + j] for i in range(rows))
                    if ones != 1:
                        return _bad(
                            "kind",
                            f"Generator '{name}' is not a function: column "
                            f"{j} has {ones} ones",
                        )
        return _ok()

    def forward(
        self, params: ModelParams, signature: Signature | None = None
    ) -> Verdict:
        logger.info("Check scalar algebra against model kind")
        result = self.check_scalars(params)
        if not result.is_valid:
            return result

        logger.info("Check object dimensions")
        result = self.check_dimensions(params)
        if not result.is_valid:
            return result

        logger.info("Check meet table")
        result = self.check_meet_table(params)
        if not result.is_valid:
            return result

        logger.info("Check generator shapes")
        result = self.check_generators(params, signature)
        if not result.is_valid:
            return result

        logger.info("Check kind constraints")
        result = self.check_kind_constraints(params, signature)
        if not result.is_valid:
            return result

        logger.info("Model parameters are valid")
        return _ok()


def validate_model(
    params: ModelParams, signature: Signature | None = None
) -> Verdict:
    return ModelValidator().forward(params, signature)
