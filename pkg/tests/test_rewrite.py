import pytest

from src.diagram import canonical_key, key_of, to_diagram
from src.errors import NoSuchMatch, TypeMismatch
from src.rewrite import (
    Equation,
    Match,
    apply_equation,
    enumerate_matches,
    reverse_equation,
    rewrite_once,
)
from src.signature import (
    UNIT,
    counit,
    gen,
    ident,
    tensor,
    then,
    trace_term,
    unit,
)
from tests.conftest import A


@pytest.fixture
def cancel(sig):
    """f ; h = 1_A"""
    f, h = gen(sig.generator("f")), gen(sig.generator("h"))
    return Equation(name="cancel", lhs=then(f, h), rhs=ident(A))


class TestEquation:
    def test_sides_must_agree(self, sig):
        with pytest.raises(TypeMismatch):
            Equation(name="bad", lhs=gen(sig.generator("f")), rhs=ident(A))

    def test_reverse_round_trip(self, cancel):
        backwards = reverse_equation(cancel)
        assert backwards.name == "cancel^-1"
        assert backwards.lhs == cancel.rhs
        assert reverse_equation(backwards).name == "cancel"


class TestMatching:
    def test_two_disjoint_sites(self, sig, cancel):
        """f;h;f;h contains the pattern twice, in node order."""
        f, h = gen(sig.generator("f")), gen(sig.generator("h"))
        host = to_diagram(then(f, h, f, h))
        matches = enumerate_matches(host, to_diagram(cancel.lhs))
        assert [m.node_map for m in matches] == [
            ((0, 0), (1, 1)),
            ((0, 2), (1, 3)),
        ]
        assert [m.index for m in matches] == [0, 1]

    def test_rewrite_either_site(self, sig, cancel):
        f, h = gen(sig.generator("f")), gen(sig.generator("h"))
        host = to_diagram(then(f, h, f, h))
        pattern = to_diagram(cancel.lhs)
        for site in enumerate_matches(host, pattern):
            rewritten = apply_equation(host, cancel, site)
            assert canonical_key(rewritten) == key_of(then(f, h))

    def test_no_match(self, sig, cancel):
        assert rewrite_once(to_diagram(gen(sig.generator("f"))), cancel) is None

    def test_forged_site(self, sig, cancel):
        f, h = gen(sig.generator("f")), gen(sig.generator("h"))
        host = to_diagram(then(f, h))
        bogus = Match(index=3, node_map=((0, 1), (1, 0)), attachments=())
        with pytest.raises(NoSuchMatch):
            apply_equation(host, cancel, bogus)

    def test_wire_pattern(self, sig):
        """A snake inside a host is hosted on one of its wires."""
        snake = then(tensor(ident(A), unit(A)), tensor(counit(A), ident(A)))
        yanking = Equation(name="yanking", lhs=snake, rhs=ident(A))
        f = gen(sig.generator("f"))
        host = to_diagram(then(snake, f))
        matches = enumerate_matches(host, to_diagram(snake))
        assert len(matches) == 1
        rewritten = apply_equation(host, yanking, matches[0])
        assert canonical_key(rewritten) == key_of(f)

    def test_loop_pattern(self, sig):
        """Removing a free loop consumes exactly one loop label."""
        loop = trace_term(ident(A))
        drop = Equation(name="drop", lhs=loop, rhs=ident(UNIT))
        f = gen(sig.generator("f"))
        host = to_diagram(tensor(loop, loop, f))
        once = rewrite_once(host, drop)
        assert canonical_key(once) == key_of(tensor(loop, f))
        twice = rewrite_once(once, drop)
        assert canonical_key(twice) == key_of(f)
        assert rewrite_once(twice, drop) is None

    def test_rewriting_in_context(self, sig, cancel):
        """Rewrites happen under a tensor with unrelated wiring."""
        f, g, h = (gen(sig.generator(n)) for n in "fgh")
        host = to_diagram(tensor(then(f, h), g))
        rewritten = rewrite_once(host, cancel)
        assert canonical_key(rewritten) == key_of(tensor(ident(A), g))
