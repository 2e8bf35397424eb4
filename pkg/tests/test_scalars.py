from fractions import Fraction

import pytest

from src.errors import AlgebraError, ConjUnavailable, NotASemilattice
from src.scalars import (
    BooleanAlgebra,
    ComplexFloatField,
    ComplexRational,
    ComplexRationalField,
    RationalField,
    SemilatticeAlgebra,
    algebra_for,
    check_semilattice,
)
from tests.conftest import DIAMOND


class TestBooleanAlgebra:
    def test_operations(self):
        b = BooleanAlgebra()
        assert b.add(True, False) is True
        assert b.mul(True, False) is False
        assert b.from_int(2) is True
        assert b.elements() == [False, True]

    def test_parse(self):
        b = BooleanAlgebra()
        assert b.parse("1") is True
        assert b.parse(0) is False
        with pytest.raises(AlgebraError):
            b.parse(2)


class TestRationalField:
    def test_parse_fraction_strings(self):
        q = RationalField()
        assert q.parse("-3/4") == Fraction(-3, 4)
        assert q.to_json(Fraction(1, 2)) == "1/2"
        with pytest.raises(AlgebraError):
            q.parse(True)
        with pytest.raises(AlgebraError):
            q.parse("one half")

    def test_division(self):
        q = RationalField()
        assert q.inv(Fraction(2, 3)) == Fraction(3, 2)
        with pytest.raises(AlgebraError):
            q.inv(Fraction(0))

    def test_from_int(self):
        assert RationalField().from_int(3) == Fraction(3)


class TestComplexRationals:
    def test_i_squared(self):
        c = ComplexRationalField()
        i = ComplexRational(Fraction(0), Fraction(1))
        assert c.mul(i, i) == c.neg(c.one)
        assert c.conj(i) == ComplexRational(Fraction(0), Fraction(-1))

    def test_parse_and_render(self):
        c = ComplexRationalField()
        z = c.parse(["1/2", -1])
        assert z == ComplexRational(Fraction(1, 2), Fraction(-1))
        assert str(z) == "1/2-1i"
        assert c.to_json(z) == ["1/2", "-1"]
        assert c.parse(3) == ComplexRational(Fraction(3), Fraction(0))

    def test_inverse(self):
        c = ComplexRationalField()
        z = ComplexRational(Fraction(1), Fraction(1))
        assert c.mul(z, c.inv(z)) == c.one


class TestComplexFloats:
    def test_tolerance(self):
        f = ComplexFloatField(tolerance=1e-6)
        assert f.eq(1 + 0j, 1 + 1e-8j)
        assert not f.eq(1 + 0j, 1.1 + 0j)

    def test_negative_tolerance(self):
        with pytest.raises(AlgebraError):
            ComplexFloatField(tolerance=-1.0)


class TestSemilattice:
    def test_diamond(self):
        s = SemilatticeAlgebra(DIAMOND)
        assert s.one == 3
        assert s.mul(1, 2) == 0
        assert s.mul(3, 2) == 2
        assert not s.additive

    def test_no_additive_structure(self):
        s = SemilatticeAlgebra(DIAMOND)
        with pytest.raises(AlgebraError):
            _ = s.zero
        with pytest.raises(AlgebraError):
            s.add(1, 2)
        with pytest.raises(ConjUnavailable):
            s.conj(1)

    def test_parse_range(self):
        s = SemilatticeAlgebra(DIAMOND)
        assert s.parse("2") == 2
        with pytest.raises(AlgebraError):
            s.parse(4)

    @pytest.mark.parametrize(
        "table, problem",
        [
            ([[0, 1], [0, 1]], "commutative"),
            ([[1, 0], [0, 1]], "idempotent"),
            ([[0, 2, 2], [2, 1, 2], [2, 2, 2]], "top"),
            ([[0, 0], [0]], "square"),
        ],
    )
    def test_rejected_tables(self, table, problem):
        with pytest.raises(NotASemilattice) as excinfo:
            check_semilattice(tuple(tuple(r) for r in table))
        assert problem in str(excinfo.value)


class TestAlgebraFor:
    def test_known_names(self):
        assert isinstance(algebra_for("bool"), BooleanAlgebra)
        assert algebra_for("complex-float", tolerance=0.5).tolerance == 0.5

    def test_semilattice_needs_table(self):
        with pytest.raises(NotASemilattice):
            algebra_for("semilattice")

    def test_unknown(self):
        with pytest.raises(AlgebraError):
            algebra_for("octonion")
