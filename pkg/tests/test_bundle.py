import json

import pytest
from loguru import logger

import src.bundle as bundle_module
from src.bundle import (
    MODEL_DIR_ENV,
    bundle_from_params,
    load_model,
    resolve_model_path,
)
from src.errors import KindMismatch, ModelFileError, UnknownName
from src.params import ModelParams
from src.protocols import teleport_verify
from src.signature import Signature
from tests.conftest import A, MODELS


def write_model(tmp_path, raw, name="model.json"):
    path = tmp_path / name
    path.write_text(raw if isinstance(raw, str) else json.dumps(raw))
    return path


class TestLoadModel:
    @pytest.mark.parametrize(
        "path", sorted(MODELS.glob("*.json")), ids=lambda p: p.stem
    )
    def test_shipped_models_load(self, path):
        bundle = load_model(path)
        assert bundle.model.kind == bundle.params.kind
        assert bundle.source == str(path)

    def test_families_by_kind(self):
        semilattice = load_model(MODELS / "semilattice.json")
        assert semilattice.family("diagonal").name == "copy"
        assert semilattice.family("deleting") is None

        finset = load_model(MODELS / "finset.json")
        assert finset.family("left_projection").name == "first"
        assert finset.family("right_projection").name == "second"

    def test_teleport_branches(self):
        bundle = load_model(MODELS / "qubit-teleport.json")
        assert bundle.teleport_object == "A"
        assert [b.index for b in bundle.teleport] == [0, 1, 2, 3]
        report = teleport_verify(
            bundle.model, bundle.teleport_object, bundle.teleport
        )
        assert report.passed

    def test_tolerance_override(self):
        bundle = load_model(MODELS / "qubit-teleport.json", tolerance=1e-6)
        assert bundle.params.tolerance == 1e-6

    def test_signature_types_untyped_generators(self, tmp_path):
        path = write_model(
            tmp_path,
            {"kind": "fdvec", "scalars": "rational", "objects": {"A": 2},
             "generators": {"f": [1, 0, 0, 1]}},
        )
        sig = Signature.build(["A"], [("f", A, A)])
        bundle = load_model(path, signature=sig)
        assert bundle.model.generators["f"].is_identity()

    def test_builds_through_build_model(self, mocker):
        """The bundle is built from the validated parameters."""
        logger.info("Spying on build_model")
        spy = mocker.spy(bundle_module, "build_model")
        bundle = load_model(MODELS / "rel.json")

        # Assertions
        spy.assert_called_once_with("rel", bundle.params, None)


class TestModelFileErrors:
    def test_invalid_json(self, tmp_path):
        path = write_model(tmp_path, "{ not json")
        with pytest.raises(ModelFileError) as excinfo:
            load_model(path)
        assert "invalid JSON at line 1" in excinfo.value.message

    def test_schema_error(self, tmp_path):
        path = write_model(tmp_path, {"kind": "vector", "objects": {}})
        with pytest.raises(ModelFileError) as excinfo:
            load_model(path)
        assert "schema error(s)" in excinfo.value.message

    def test_validator_errors_keep_their_class(self, tmp_path):
        path = write_model(
            tmp_path,
            {"kind": "rel", "scalars": "rational", "objects": {"X": 2}},
        )
        with pytest.raises(KindMismatch):
            load_model(path)

    def test_protocol_object_must_be_declared(self):
        params = ModelParams.model_validate(
            {
                "kind": "fdvec",
                "scalars": "rational",
                "objects": {"A": 2},
                "protocols": {
                    "object": "Q",
                    "teleport": [
                        {"branch": [1, 0, 0, 1], "correction": [1, 0, 0, 1]}
                    ],
                },
            }
        )
        with pytest.raises(UnknownName) as excinfo:
            bundle_from_params(params)
        assert excinfo.value.name == "Q"

    def test_protocol_object_error_from_file(self, tmp_path):
        path = write_model(
            tmp_path,
            {"kind": "rel", "scalars": "bool", "objects": {"X": 2},
             "protocols": {"object": "Y"}},
        )
        with pytest.raises(UnknownName):
            load_model(path)

    def test_missing_file(self, tmp_path, monkeypatch):
        monkeypatch.delenv(MODEL_DIR_ENV, raising=False)
        with pytest.raises(ModelFileError) as excinfo:
            load_model(tmp_path / "absent.json")
        assert "not found" in excinfo.value.message


class TestModelDirectory:
    def test_bare_name_found_in_model_dir(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv(MODEL_DIR_ENV, str(MODELS))
        assert resolve_model_path("rel") == MODELS / "rel.json"
        assert resolve_model_path("rel.json") == MODELS / "rel.json"

    def test_paths_with_directories_are_not_redirected(
        self, tmp_path, monkeypatch
    ):
        monkeypatch.chdir(tmp_path)
        monkeypatch.setenv(MODEL_DIR_ENV, str(MODELS))
        with pytest.raises(ModelFileError):
            resolve_model_path("elsewhere/rel.json")
