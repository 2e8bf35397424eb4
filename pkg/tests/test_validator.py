import pytest
from loguru import logger

from src.params import ModelParams
from src.validator import ModelValidator, Verdict, validate_model


def params(**overrides) -> ModelParams:
    raw = {"kind": "fdvec", "scalars": "rational", "objects": {"A": 2}}
    raw.update(overrides)
    return ModelParams.model_validate(raw)


class TestModelValidator:
    @pytest.fixture
    def validator(self):
        """Fixture to provide a fresh ModelValidator for each test."""
        return ModelValidator()

    def test_valid_model(self, validator, mocker):
        """Every stage runs once when all of them pass."""
        logger.info("Spying on every stage of a valid model")
        stages = [
            mocker.spy(validator, name)
            for name in (
                "check_scalars",
                "check_dimensions",
                "check_meet_table",
                "check_generators",
                "check_kind_constraints",
            )
        ]
        p = params()
        result = validator.forward(p)

        # Assertions
        assert result.is_valid is True
        assert result.error_message is None
        for stage in stages:
            stage.assert_called_once()

    def test_stops_at_first_failure(self, validator, mocker):
        """A failing stage short-circuits the later ones."""
        logger.info("Mocking the dimension stage to fail")
        mock_dimensions = mocker.patch.object(
            validator,
            "check_dimensions",
            return_value=Verdict(
                is_valid=False, error_message="bad", stage="dimensions"
            ),
        )
        mock_generators = mocker.patch.object(validator, "check_generators")
        mock_kind = mocker.patch.object(validator, "check_kind_constraints")

        p = params()
        result = validator.forward(p)

        # Assertions
        assert result.is_valid is False
        assert result.stage == "dimensions"
        mock_dimensions.assert_called_once_with(p)
        mock_generators.assert_not_called()  # Should stop after dimensions
        mock_kind.assert_not_called()

    def test_scalars_must_match_kind(self, validator):
        result = validator.forward(params(kind="rel"))
        assert result.stage == "scalars"
        assert "bool" in result.error_message

    def test_zero_dimension(self, validator):
        result = validator.forward(params(objects={"A": 0}))
        assert result.stage == "dimensions"

    def test_missing_meet_table(self, validator):
        result = validator.forward(
            params(kind="semilattice", scalars="semilattice",
                   objects={"A": 1})
        )
        assert result.stage == "semilattice"
        assert "meet_table" in result.error_message

    def test_bad_meet_table(self, validator):
        result = validator.forward(
            params(kind="semilattice", scalars="semilattice",
                   objects={"A": 1}, meet_table=[[1, 0], [0, 1]])
        )
        assert result.stage == "semilattice"
        assert "idempotent" in result.error_message

    def test_generator_entry_count(self, validator):
        result = validator.forward(
            params(generators={"f": {"dom": "A", "cod": "A",
                                     "entries": [1, 0, 1]}})
        )
        assert result.stage == "generators"
        assert "needs 4 entries, got 3" in result.error_message

    def test_generator_over_unknown_object(self, validator):
        result = validator.forward(
            params(generators={"f": {"dom": "B", "cod": "A",
                                     "entries": [1, 0]}})
        )
        assert result.stage == "generators"
        assert "'B'" in result.error_message

    def test_untyped_generator_needs_signature(self, validator):
        result = validator.forward(params(generators={"f": [1, 0, 0, 1]}))
        assert result.stage == "generators"

    def test_rel_entries_are_booleans(self, validator):
        result = validator.forward(
            params(kind="rel", scalars="bool",
                   generators={"r": {"dom": "A", "cod": "A",
                                     "entries": [1, 0, 2, 1]}})
        )
        assert result.stage == "kind"

    def test_finset_column_count(self, validator):
        result = validator.forward(
            params(kind="finset", scalars="bool",
                   generators={"r": {"dom": "A", "cod": "A",
                                     "entries": [1, 0, 1, 0]}})
        )
        assert result.stage == "kind"
        assert "column 0 has 2 ones" in result.error_message

    def test_validate_model_helper(self, mocker):
        """validate_model delegates to a fresh validator."""
        mock_forward = mocker.patch.object(
            ModelValidator, "forward", return_value=Verdict(is_valid=True)
        )
        p = params()
        assert validate_model(p).is_valid
        mock_forward.assert_called_once_with(p, None)
