import random
from pathlib import Path

import pytest

from src.models import build_model
from src.signature import UNIT, ObjectExpr, Signature, ident, tensor, then

ROOT = Path(__file__).resolve().parent.parent
MODELS = ROOT / "models"
SOURCES = ROOT / "sources"

A = ObjectExpr.of("A")
B = ObjectExpr.of("B")


@pytest.fixture
def sig():
    """f, g : A → B and h : B → A."""
    return Signature.build(
        ["A", "B"],
        [("f", A, B), ("g", A, B), ("h", B, A)],
    )


@pytest.fixture
def dagger_sig(sig):
    return sig.extend(dagger_closed=True)


@pytest.fixture
def rng():
    return random.Random(1234)


@pytest.fixture
def qubit():
    """Rational qubit with the bit flip x and phase flip z."""
    return build_model(
        "fdvec",
        {
            "scalars": "rational",
            "objects": {"A": 2},
            "generators": {
                "x": {"dom": "A", "cod": "A", "entries": [0, 1, 1, 0]},
                "z": {"dom": "A", "cod": "A", "entries": [1, 0, 0, -1]},
            },
        },
    )


@pytest.fixture
def complex_qubit():
    return build_model(
        "fdvec", {"scalars": "complex-rational", "objects": {"A": 2}}
    )


@pytest.fixture
def float_qubit():
    """Complex floats compared within the default tolerance."""
    return build_model(
        "fdvec", {"scalars": "complex-float", "objects": {"A": 2}}
    )


@pytest.fixture
def rel():
    return build_model(
        "rel",
        {
            "scalars": "bool",
            "objects": {"X": 2},
            "generators": {
                "R": {"dom": "X", "cod": "X", "entries": [1, 1, 0, 1]},
            },
        },
    )


@pytest.fixture
def finset():
    return build_model(
        "finset",
        {
            "scalars": "bool",
            "objects": {"X": 2},
            "generators": {
                "swap": {"dom": "X", "cod": "X", "entries": [0, 1, 1, 0]},
            },
        },
    )


DIAMOND = [[0, 0, 0, 0], [0, 1, 0, 1], [0, 0, 2, 2], [0, 1, 2, 3]]


@pytest.fixture
def diamond():
    """The four-element diamond semilattice with top 3."""
    return build_model(
        "semilattice",
        {
            "scalars": "semilattice",
            "objects": {"A": 1},
            "meet_table": DIAMOND,
            "generators": {
                "s": {"dom": "A", "cod": "A", "entries": [1]},
                "t": {"dom": "A", "cod": "A", "entries": [2]},
            },
        },
    )


@pytest.fixture
def padded():
    """Wrap a term in identities and empty tensors; the diagram is the
    same."""

    def pad(t):
        return then(ident(t.dom), tensor(ident(UNIT), t), ident(t.cod))

    return pad
