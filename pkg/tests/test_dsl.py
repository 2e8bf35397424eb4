import pytest

from src.diagram import key_of
from src.dsl import (
    format_expr,
    format_source,
    load_source,
    parse_expression,
    parse_source,
)
from src.errors import (
    CompositionMismatch,
    DaggerUnavailable,
    LexError,
    ParseError,
    ResolveError,
    TraceShapeMismatch,
    TypeMismatch,
    UnknownName,
)
from src.signature import ident, unit
from tests.conftest import A, SOURCES


class TestParser:
    def test_round_trip(self):
        """Pretty printing and re-parsing gives the same declarations."""
        source = parse_source((SOURCES / "yanking.cat").read_text())
        again = parse_source(format_source(source))
        assert again.model_dump() == source.model_dump()

    def test_tensor_binds_tighter(self):
        e = parse_expression("f * g ; h")
        assert e.kind == "then"
        assert e.args[0].kind == "tensor"
        assert format_expr(e) == "((f * g) ; h)"

    def test_left_associative(self):
        assert format_expr(parse_expression("f ; g ; h")) == "((f ; g) ; h)"
        assert format_expr(parse_expression("f * g * h")) == "((f * g) * h)"

    def test_words(self):
        e = parse_expression("sym[A * dual(B), I]")
        assert format_expr(e) == "sym[A * dual(B), I]"

    def test_comments_are_ignored(self):
        source = parse_source("// header\nobject A; // trailing\n")
        assert len(source.decls) == 1

    def test_lex_error(self):
        with pytest.raises(LexError) as excinfo:
            parse_source("term x = f $ g;")
        assert (excinfo.value.line, excinfo.value.column) == (1, 12)
        assert excinfo.value.kind == "lex"

    def test_unexpected_end(self):
        with pytest.raises(ParseError) as excinfo:
            parse_source("object A")
        err = excinfo.value
        assert "end of input" in err.message
        assert "';'" in err.expected
        assert err.span == (1, 9)

    def test_unexpected_token(self):
        with pytest.raises(ParseError) as excinfo:
            parse_source("object A;\nterm = f;")
        assert "Unexpected token" in excinfo.value.message
        assert excinfo.value.line == 2


class TestElaboration:
    def test_yanking_source(self):
        ws = load_source((SOURCES / "yanking.cat").read_text())
        assert ws.signature.object_names() == ["A", "B"]
        assert set(ws.equations) == {"yanking", "swap_twice"}
        assert ws.term("bell").cod == A.dual() + A

    @pytest.mark.parametrize("path", sorted(SOURCES.glob("*.cat")),
                             ids=lambda p: p.stem)
    def test_shipped_sources_load(self, path):
        ws = load_source(path.read_text())
        assert ws.terms

    def test_resolve(self):
        ws = load_source((SOURCES / "yanking.cat").read_text())
        assert key_of(ws.resolve("bell")) == key_of(unit(A))
        assert ws.resolve("f").dom == A
        assert key_of(ws.resolve("id[A] ; id[A]")) == key_of(ident(A))
        with pytest.raises(UnknownName):
            ws.term("missing")
        with pytest.raises(ResolveError):
            ws.resolve("missing ; f")

    def test_unknown_name(self):
        with pytest.raises(ResolveError) as excinfo:
            load_source("object A;\nterm t = f;\n")
        assert excinfo.value.span == (2, 10)

    def test_unknown_object(self):
        with pytest.raises(ResolveError):
            load_source("object A;\ngen f : A -> C;\n")

    def test_duplicate_name(self):
        with pytest.raises(ResolveError) as excinfo:
            load_source("object A;\ngen f : A -> A;\ngen f : A -> A;\n")
        assert "already in use" in excinfo.value.message

    def test_composition_mismatch_points_at_right_operand(self):
        text = "object A, B;\ngen f : A -> B;\nterm bad = f ; f;\n"
        with pytest.raises(CompositionMismatch) as excinfo:
            load_source(text)
        assert excinfo.value.span == (3, 16)

    def test_dagger_needs_pragma(self):
        body = "object A;\ngen f : A -> A;\nterm d = dagger(f);\n"
        with pytest.raises(DaggerUnavailable) as excinfo:
            load_source(body)
        assert excinfo.value.span == (3, 10)
        ws = load_source("pragma dagger;\n" + body)
        assert ws.term("d").dom == A

    def test_unknown_pragma(self):
        with pytest.raises(ResolveError) as excinfo:
            load_source("pragma linear;")
        assert excinfo.value.expected == {"dagger"}

    def test_equation_sides_must_agree(self):
        with pytest.raises(TypeMismatch) as excinfo:
            load_source("object A, B;\neq bad : id[A] = id[B];\n")
        assert excinfo.value.span == (2, 18)

    def test_trace_shape(self):
        with pytest.raises(TraceShapeMismatch) as excinfo:
            load_source("object A, B;\ngen f : A -> B;\nterm t = tr(f);\n")
        assert excinfo.value.span == (3, 10)
