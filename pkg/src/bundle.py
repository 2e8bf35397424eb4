"""Reading a model file together with its families and protocol data."""

import json
import os
from pathlib import Path

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.errors import ModelFileError, UnknownName, WorkbenchError
from src.families import NaturalFamily, family_from_spec
from src.matrix import Matrix
from src.models import Model, build_model
from src.params import ModelParams
from src.protocols import BellBranch
from src.signature import Signature

MODEL_DIR_ENV = "CATWORK_MODEL_DIR"


class ModelBundle(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    model: Model
    families: dict[str, NaturalFamily] = Field(default_factory=dict)
    teleport_object: str | None = None
    teleport: list[BellBranch] = Field(default_factory=list)
    params: ModelParams
    source: str = ""

    def family(self, kind: str) -> NaturalFamily | None:
        """The first family of the given kind, in file order."""
        for fam in self.families.values():
            if fam.kind == kind:
                return fam
        return None


def resolve_model_path(path: str | Path) -> Path:
    """Bare file names are looked up in $CATWORK_MODEL_DIR as well."""
    candidate = Path(path)
    if candidate.exists():
        return candidate
    directory = os.environ.get(MODEL_DIR_ENV)
    if directory and candidate.parent == Path("."):
        for name in (candidate.name, f"{candidate.name}.json"):
            if (Path(directory) / name).exists():
                return Path(directory) / name
    raise ModelFileError(f"The model file '{path}' was not found")


def bundle_from_params(
    params: ModelParams,
    signature: Signature | None = None,
    source: str = "",
) -> ModelBundle:
    model = build_model(params.kind, params, signature)
    families = {
        name: family_from_spec(name, spec, model)
        for name, spec in params.families.items()
    }
    teleport_object = params.protocols.object
    if teleport_object is not None and teleport_object not in model.dims:
        logger.error(f"Protocol object '{teleport_object}' is not declared")
        raise UnknownName(teleport_object)
    branches = []
    if params.protocols.teleport:
        if teleport_object is None:
            teleport_object = next(iter(model.dims))
        n = model.dims[teleport_object]
        for k, spec in enumerate(params.protocols.teleport):
            branches.append(
                BellBranch(
                    index=k,
                    branch=Matrix.parse(model.algebra, n, n, spec.branch),
                    correction=Matrix.parse(
                        model.algebra, n, n, spec.correction
                    ),
                )
            )
    return ModelBundle(
        model=model,
        families=families,
        teleport_object=teleport_object,
        teleport=branches,
        params=params,
        source=source,
    )


def load_model(
    path: str | Path,
    signature: Signature | None = None,
    tolerance: float | None = None,
) -> ModelBundle:
    """Read a JSON model file; a tolerance overrides the file's own."""
    resolved = resolve_model_path(path)
    logger.info(f"Loading model file {resolved}")
    try:
        raw = json.loads(resolved.read_text(encoding="utf-8"))
    except json.JSONDecodeError as err:
        raise ModelFileError(
            f"{resolved}: invalid JSON at line {err.lineno}: {err.msg}"
        ) from err
    except OSError as err:
        raise ModelFileError(f"Failed to read '{resolved}': {err}") from err
    if tolerance is not None and isinstance(raw, dict):
        raw["tolerance"] = tolerance
    try:
        params = ModelParams.model_validate(raw)
    except ValidationError as err:
        raise ModelFileError(
            f"{resolved}: {err.error_count()} schema error(s); "
            f"first: {err.errors()[0]['msg']}"
        ) from err
    try:
        return bundle_from_params(params, signature, source=str(resolved))
    except WorkbenchError as err:
        logger.error(f"Model file {resolved} rejected: {err.message}")
        raise
