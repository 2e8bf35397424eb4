"""The declaration language for signatures, terms and equations.

    object A, B;
    gen f : A -> B * dual(A);
    pragma dagger;
    term yank = (id[A] * eta[A]) ; (eps[A] * id[A]);
    eq swap : sym[A, A] = id[A * A];

`;` composes left to right and binds looser than `*`. `I` is the empty
word. Keywords (id, eta, eps, sym, tr, dagger, name, coname, dual) cannot
be used as generator or term names.
"""

from typing import Literal

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import (
    UnexpectedCharacters,
    UnexpectedEOF,
    UnexpectedInput,
    UnexpectedToken,
)
from loguru import logger
from pydantic import BaseModel, Field

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
from src.rewrite import Equation
from src.signature import (
    UNIT,
    Factor,
    Frozen,
    Generator,
    ObjectExpr,
    Signature,
    TypedTerm,
    coname_of,
    counit,
    dagger,
    dual_of,
    gen,
    ident,
    name_of,
    sym,
    tensor,
    then,
    trace_term,
    unit,
)

GRAMMAR = r"""
    start: decl*

    ?decl: "object" NAME ("," NAME)* ";"             -> object_decl
         | "gen" NAME ":" word "->" word ";"         -> gen_decl
         | "term" NAME "=" expr ";"                  -> term_decl
         | "eq" NAME ":" expr "=" expr ";"           -> eq_decl
         | "pragma" NAME ";"                         -> pragma_decl

    word: "I"                                        -> unit_word
        | factor ("*" factor)*
    factor: NAME                                     -> base
          | "dual" "(" NAME ")"                      -> dual_base

    ?expr: par
         | expr ";" par                              -> then
    ?par: atom
        | par "*" atom                               -> tensor
    ?atom: NAME                                      -> ref
         | "id" "[" word "]"                         -> ident
         | "eta" "[" word "]"                        -> eta
         | "eps" "[" word "]"                        -> eps
         | "sym" "[" word "," word "]"               -> sym
         | "tr" "[" word "]" "(" expr ")"            -> partial_trace
         | "tr" "(" expr ")"                         -> trace
         | "dagger" "(" expr ")"                     -> dagger
         | "name" "(" expr ")"                       -> name
         | "coname" "(" expr ")"                     -> coname
         | "dual" "(" expr ")"                       -> dual
         | "(" expr ")"

    NAME: /[A-Za-z_][A-Za-z0-9_']*/

    %import common.CPP_COMMENT
    %import common.WS
    %ignore WS
    %ignore CPP_COMMENT
"""

RESERVED = {
    "object", "gen", "term", "eq", "pragma", "I", "id", "eta", "eps",
    "sym", "tr", "dagger", "name", "coname", "dual",
}

_PARSER = Lark(
    GRAMMAR,
    start=["start", "expr"],
    parser="lalr",
    propagate_positions=True,
)


class Span(Frozen):
    line: int
    column: int
    end_line: int
    end_column: int


ExprKind = Literal[
    "ref", "ident", "eta", "eps", "sym", "then", "tensor", "trace",
    "partial_trace", "dagger", "name", "coname", "dual",
]


class Expr(Frozen):
    kind: ExprKind
    name: str = ""
    words: tuple[ObjectExpr, ...] = ()
    args: tuple["Expr", ...] = ()
    span: Span | None = Field(None, exclude=True, repr=False)


class ObjectDecl(Frozen):
    decl: Literal["object"] = "object"
    names: tuple[str, ...]
    span: Span | None = Field(None, exclude=True, repr=False)


class GenDecl(Frozen):
    decl: Literal["gen"] = "gen"
    name: str
    dom: ObjectExpr
    cod: ObjectExpr
    span: Span | None = Field(None, exclude=True, repr=False)


class TermDecl(Frozen):
    decl: Literal["term"] = "term"
    name: str
    body: Expr
    span: Span | None = Field(None, exclude=True, repr=False)


class EqDecl(Frozen):
    decl: Literal["eq"] = "eq"
    name: str
    lhs: Expr
    rhs: Expr
    span: Span | None = Field(None, exclude=True, repr=False)


class PragmaDecl(Frozen):
    decl: Literal["pragma"] = "pragma"
    name: str
    span: Span | None = Field(None, exclude=True, repr=False)


Decl = ObjectDecl | GenDecl | TermDecl | EqDecl | PragmaDecl


class SourceFile(Frozen):
    decls: tuple[Decl, ...] = ()


def _span(meta) -> Span | None:
    if getattr(meta, "empty", True):
        return None
    return Span(
        line=meta.line,
        column=meta.column,
        end_line=meta.end_line,
        end_column=meta.end_column,
    )


def _token_span(tok: Token) -> Span:
    return Span(
        line=tok.line,
        column=tok.column,
        end_line=tok.end_line,
        end_column=tok.end_column,
    )


def _word_node(kind: str):
    def build(self, meta, children):
        return Expr(kind=kind, words=tuple(children), span=_span(meta))

    return build


def _arg_node(kind: str):
    def build(self, meta, children):
        return Expr(kind=kind, args=tuple(children), span=_span(meta))

    return build


@v_args(meta=True)
class _ToAst(Transformer):
    """Parse tree to AST, keeping source spans."""

    def start(self, meta, children):
        return SourceFile(decls=tuple(children))

    def object_decl(self, meta, children):
        return ObjectDecl(names=tuple(map(str, children)), span=_span(meta))

    def gen_decl(self, meta, children):
        name, dom, cod = children
        return GenDecl(name=str(name), dom=dom, cod=cod, span=_span(meta))

    def term_decl(self, meta, children):
        name, body = children
        return TermDecl(name=str(name), body=body, span=_span(meta))

    def eq_decl(self, meta, children):
        name, lhs, rhs = children
        return EqDecl(name=str(name), lhs=lhs, rhs=rhs, span=_span(meta))

    def pragma_decl(self, meta, children):
        return PragmaDecl(name=str(children[0]), span=_span(meta))

    def unit_word(self, meta, children):
        return UNIT

    def word(self, meta, children):
        return ObjectExpr(factors=tuple(children))

    def base(self, meta, children):
        return Factor(base=str(children[0]))

    def dual_base(self, meta, children):
        return Factor(base=str(children[0]), dual=True)

    def ref(self, meta, children):
        return Expr(kind="ref", name=str(children[0]),
                    span=_token_span(children[0]))

    ident = _word_node("ident")
    eta = _word_node("eta")
    eps = _word_node("eps")
    sym = _word_node("sym")

    then = _arg_node("then")
    tensor = _arg_node("tensor")
    trace = _arg_node("trace")
    dagger = _arg_node("dagger")
    name = _arg_node("name")
    coname = _arg_node("coname")
    dual = _arg_node("dual")

    def partial_trace(self, meta, children):
        word, body = children
        return Expr(kind="partial_trace", words=(word,), args=(body,),
                    span=_span(meta))


def _describe_expected(names) -> set[str]:
    out = set()
    for name in names or ():
        try:
            pattern = _PARSER.get_terminal(name).pattern
        except KeyError:
            out.add(name)
            continue
        out.add(repr(pattern.value) if pattern.type == "str" else name)
    return out


def _end_of(text: str) -> tuple[int, int]:
    lines = text.split("\n")
    return len(lines), len(lines[-1]) + 1


def _parse(text: str, start: str):
    try:
        return _PARSER.parse(text, start=start)
    except UnexpectedCharacters as err:
        raise LexError(
            f"Unexpected character {err.char!r}",
            err.line,
            err.column,
            expected=_describe_expected(err.allowed),
            cause=err,
        ) from err
    except UnexpectedEOF as err:
        line, column = _end_of(text)
        raise ParseError(
            "Unexpected end of input",
            line,
            column,
            expected=_describe_expected(err.expected),
            cause=err,
        ) from err
    except UnexpectedToken as err:
        if err.token.type == "$END":
            line, column = _end_of(text)
            message = "Unexpected end of input"
        else:
            line, column = err.line, err.column
            message = f"Unexpected token {str(err.token)!r}"
        raise ParseError(
            message,
            line,
            column,
            expected=_describe_expected(err.expected),
            cause=err,
        ) from err
    except UnexpectedInput as err:
        raise ParseError(str(err), err.line, err.column, cause=err) from err


def parse_source(text: str) -> SourceFile:
    """Parse a whole source file into declarations with spans."""
    logger.info("Parsing source")
    return _ToAst().transform(_parse(text, "start"))


def parse_expression(text: str) -> Expr:
    return _ToAst().transform(_parse(text, "expr"))


# Pretty printing


def format_expr(e: Expr) -> str:
    """Fully parenthesized, so that re-parsing gives the same tree."""
    if e.kind == "ref":
        return e.name
    if e.kind in ("ident", "eta", "eps"):
        keyword = {"ident": "id", "eta": "eta", "eps": "eps"}[e.kind]
        return f"{keyword}[{e.words[0].dsl()}]"
    if e.kind == "sym":
        return f"sym[{e.words[0].dsl()}, {e.words[1].dsl()}]"
    if e.kind == "then":
        return f"({format_expr(e.args[0])} ; {format_expr(e.args[1])})"
    if e.kind == "tensor":
        return f"({format_expr(e.args[0])} * {format_expr(e.args[1])})"
    if e.kind == "partial_trace":
        return f"tr[{e.words[0].dsl()}]({format_expr(e.args[0])})"
    keyword = "tr" if e.kind == "trace" else e.kind
    return f"{keyword}({format_expr(e.args[0])})"


def format_source(source: SourceFile) -> str:
    lines = []
    for d in source.decls:
        if isinstance(d, ObjectDecl):
            lines.append(f"object {', '.join(d.names)};")
        elif isinstance(d, GenDecl):
            lines.append(f"gen {d.name} : {d.dom.dsl()} -> {d.cod.dsl()};")
        elif isinstance(d, TermDecl):
            lines.append(f"term {d.name} = {format_expr(d.body)};")
        elif isinstance(d, EqDecl):
            lines.append(
                f"eq {d.name} : {format_expr(d.lhs)} = {format_expr(d.rhs)};"
            )
        else:
            lines.append(f"pragma {d.name};")
    return "\n".join(lines) + "\n"


# Elaboration


class Workspace(BaseModel):
    """A resolved source file: its signature, named terms and equations."""

    signature: Signature = Field(default_factory=Signature)
    terms: dict[str, TypedTerm] = Field(default_factory=dict)
    equations: dict[str, Equation] = Field(default_factory=dict)

    def term(self, name: str) -> TypedTerm:
        if name in self.terms:
            return self.terms[name]
        if self.signature.has_generator(name):
            return gen(self.signature.generator(name))
        raise UnknownName(name)

    def equation(self, name: str) -> Equation:
        if name not in self.equations:
            raise UnknownName(name)
        return self.equations[name]

    def resolve(self, text: str) -> TypedTerm:
        """A declared term or generator by name, else an expression."""
        if text in self.terms or self.signature.has_generator(text):
            return self.term(text)
        return _Elaborator(self).expr(parse_expression(text))


def _located(err, span: Span | None):
    """Attach the span's start position to an error."""
    if span is not None:
        err.at(span.line, span.column)
    return err


class _Elaborator:
    def __init__(self, workspace: Workspace):
        self.ws = workspace

    @property
    def sig(self) -> Signature:
        return self.ws.signature

    def _fresh(self, name: str, span: Span | None) -> None:
        taken = (
            name in RESERVED
            or name in self.sig.object_names()
            or self.sig.has_generator(name)
            or name in self.ws.terms
            or name in self.ws.equations
        )
        if taken:
            raise _located(
                ResolveError(f"Name '{name}' is already in use"), span
            )

    def _word(self, word: ObjectExpr, span: Span | None) -> ObjectExpr:
        unknown = word.bases() - set(self.sig.object_names())
        if unknown:
            raise _located(
                ResolveError(
                    f"Unknown object '{min(unknown)}'",
                    expected=set(self.sig.object_names()),
                ),
                span,
            )
        return word

    def expr(self, e: Expr) -> TypedTerm:
        if e.kind == "ref":
            if e.name in self.ws.terms:
                return self.ws.terms[e.name]
            if self.sig.has_generator(e.name):
                return gen(self.sig.generator(e.name))
            known = {g.name for g in self.sig.generators} | set(self.ws.terms)
            raise _located(
                ResolveError(f"Unknown name '{e.name}'", expected=known),
                e.span,
            )
        words = [self._word(w, e.span) for w in e.words]
        if e.kind == "ident":
            return ident(words[0])
        if e.kind == "eta":
            return unit(words[0])
        if e.kind == "eps":
            return counit(words[0])
        if e.kind == "sym":
            return sym(words[0], words[1])
        args = [self.expr(a) for a in e.args]
        if e.kind == "then":
            try:
                return then(args[0], args[1])
            except CompositionMismatch as err:
                _located(err, e.args[1].span)
                raise
        if e.kind == "tensor":
            return tensor(args[0], args[1])
        if e.kind == "dagger":
            if not self.sig.dagger_closed:
                raise _located(DaggerUnavailable(), e.span)
            return dagger(args[0])
        if e.kind == "name":
            return name_of(args[0])
        if e.kind == "coname":
            return coname_of(args[0])
        if e.kind == "dual":
            return dual_of(args[0])
        traced = words[0] if e.kind == "partial_trace" else None
        try:
            return trace_term(args[0], traced)
        except TraceShapeMismatch as err:
            _located(err, e.span)
            raise

    def decl(self, d: Decl) -> None:
        ws = self.ws
        if isinstance(d, ObjectDecl):
            for name in d.names:
                self._fresh(name, d.span)
            ws.signature = self.sig.extend(objects=list(d.names))
        elif isinstance(d, GenDecl):
            self._fresh(d.name, d.span)
            g = Generator(
                name=d.name,
                dom=self._word(d.dom, d.span),
                cod=self._word(d.cod, d.span),
            )
            ws.signature = self.sig.extend(generators=[g])
        elif isinstance(d, PragmaDecl):
            if d.name != "dagger":
                raise _located(
                    ResolveError(f"Unknown pragma '{d.name}'",
                                 expected={"dagger"}),
                    d.span,
                )
            ws.signature = self.sig.extend(dagger_closed=True)
        elif isinstance(d, TermDecl):
            self._fresh(d.name, d.span)
            logger.debug(f"Elaborating term {d.name}")
            ws.terms[d.name] = self.expr(d.body)
        else:
            self._fresh(d.name, d.span)
            lhs, rhs = self.expr(d.lhs), self.expr(d.rhs)
            if lhs.dom != rhs.dom or lhs.cod != rhs.cod:
                raise _located(
                    TypeMismatch(
                        f"Equation '{d.name}' relates {lhs.dom} → {lhs.cod} "
                        f"with {rhs.dom} → {rhs.cod}"
                    ),
                    d.rhs.span,
                )
            ws.equations[d.name] = Equation(name=d.name, lhs=lhs, rhs=rhs)


def elaborate(
    source: SourceFile, signature: Signature | None = None
) -> Workspace:
    """Resolve declarations in order; names must be declared before use."""
    logger.info(f"Elaborating {len(source.decls)} declarations")
    ws = Workspace(signature=signature or Signature())
    elaborator = _Elaborator(ws)
    for d in source.decls:
        elaborator.decl(d)
    return ws


def load_source(text: str) -> Workspace:
    return elaborate(parse_source(text))
