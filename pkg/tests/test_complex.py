import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectra.complex import (
    ComplexFormatError,
    FilteredComplex,
    Generator,
    InvalidComplex,
    RandomParams,
    dual_complex,
    dumps,
    fixture_e1,
    fixture_e2,
    load,
    loads,
    random_complex,
    shifted,
    sublevel,
    validate,
)
from spectra.homology import homology
from spectra.rings import ZZ


def test_fixtures_are_valid():
    assert validate(fixture_e1()) == []
    assert validate(fixture_e2()) == []


def test_equal_action_is_rejected():
    C = FilteredComplex(1, [Generator("y", 0, 1), Generator("x", 1, 1)], {"x": [("y", 1)]})
    problems = validate(C)
    assert any("non-decreasing action" in p for p in problems)
    with pytest.raises(InvalidComplex):
        homology(C, ZZ, 0)


def test_square_nonzero_is_rejected():
    C = FilteredComplex(
        2,
        [Generator("z", 0, 0), Generator("y", 1, 1), Generator("x", 2, 2)],
        {"x": [("y", 1)], "y": [("z", 1)]},
    )
    assert any("square nonzero" in p for p in validate(C))


def test_bad_references_are_reported():
    C = FilteredComplex(1, [Generator("x", 1, 3), Generator("y", 1, 0)], {"x": [("y", 1), ("q", 2)]})
    problems = validate(C)
    assert any("unknown generator 'q'" in p for p in problems)
    assert any("degree" in p for p in problems)
    dup = FilteredComplex(0, [Generator("a", 0, 0), Generator("a", 0, 1)])
    assert any("duplicate" in p for p in validate(dup))


def test_sublevel_examples():
    E2 = fixture_e2()
    assert sublevel(E2, -1).generators == ()
    assert sublevel(E2, 100) == E2
    assert [g.id for g in sublevel(E2, 3).generators] == ["y", "x"]
    assert validate(sublevel(E2, 3)) == []


def test_dual_examples():
    empty = FilteredComplex(2, [])
    assert dual_complex(empty).generators == ()
    D = dual_complex(fixture_e1())
    gens = {g.id: (g.degree, g.action) for g in D.generators}
    assert gens == {"u*": (1, 0), "v*": (1, -1), "x*": (0, -3)}
    assert D.differential == {"u*": (("x*", 1),), "v*": (("x*", -2),)}
    single = FilteredComplex(4, [Generator("p", 1, Fraction(5, 2))])
    assert dual_complex(single).generators == (Generator("p*", 3, Fraction(-5, 2)),)


def test_dual_is_an_involution_and_valid():
    for seed in range(60):
        C = random_complex(seed)
        D = dual_complex(C)
        assert validate(D) == []
        assert dual_complex(D) == C


def test_json_round_trip_is_bit_exact(tmp_path):
    for C in [fixture_e1(), fixture_e2()] + [random_complex(s) for s in range(30)]:
        text = dumps(C)
        assert dumps(loads(text)) == text
        assert loads(text) == C
    path = tmp_path / "e1.json"
    path.write_text(dumps(fixture_e1()))
    assert load(path) == fixture_e1()


def test_documented_example_parses():
    text = json.dumps(
        {
            "top_degree": 1,
            "generators": [
                {"id": "u", "degree": 0, "action": "0"},
                {"id": "v", "degree": 0, "action": "1"},
                {"id": "x", "degree": 1, "action": "3"},
            ],
            "differential": {"x": [["u", 1], ["v", -2]]},
        }
    )
    assert loads(text) == fixture_e1()


@pytest.mark.parametrize(
    "obj, fragment",
    [
        ({"top_degree": 1, "generators": [], "extra": 1}, "unknown field"),
        ({"generators": []}, "top_degree"),
        ({"top_degree": 1, "generators": [{"id": "a", "degree": 0, "action": 1}]}, "action"),
        ({"top_degree": 1, "generators": [{"id": "a", "degree": 0, "action": "0.5"}]}, "action"),
        ({"top_degree": 1, "generators": [{"id": "a", "degree": 0, "action": "1", "x": 0}]}, "unknown"),
        ({"top_degree": 1, "generators": [], "differential": {"a": [["b", 1.5]]}}, "integer"),
        ({"top_degree": "1", "generators": []}, "top_degree"),
    ],
)
def test_format_errors_name_the_field(obj, fragment):
    with pytest.raises(ComplexFormatError, match=fragment):
        loads(json.dumps(obj))


def test_invalid_json():
    with pytest.raises(ComplexFormatError):
        loads("{not json")


def test_missing_differential_means_zero():
    C = loads('{"top_degree": 0, "generators": [{"id": "a", "degree": 0, "action": "-3/2"}]}')
    assert C.boundary("a") == ()
    assert C.generators[0].action == Fraction(-3, 2)


def test_random_is_deterministic():
    assert dumps(random_complex(42)) == dumps(random_complex(42))
    assert dumps(random_complex(42)) != dumps(random_complex(43))


def test_random_complexes_validate():
    for seed in range(1000):
        assert validate(random_complex(seed)) == []
    for seed in range(200):
        assert validate(random_complex(seed, RandomParams(closed=False, torsion_bias=0.8))) == []


def test_zero_torsion_bias_gives_torsion_free_sublevels():
    params = RandomParams(torsion_bias=0.0)
    for seed in range(40):
        C = random_complex(seed, params)
        for k in C.degrees:
            for tau in C.critical_values:
                assert homology(C, ZZ, k, tau).torsion == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**9), st.integers(1, 3), st.integers(1, 5), st.integers(2, 20))
def test_random_params_property(seed, max_degree, per_degree, action_range):
    params = RandomParams(max_degree=max_degree, gens_per_degree=per_degree, action_range=action_range)
    C = random_complex(seed, params)
    assert validate(C) == []
    assert all(0 <= g.degree <= max_degree for g in C.generators)


def test_bad_params():
    with pytest.raises(ValueError):
        RandomParams(max_degree=0)
    with pytest.raises(ValueError):
        RandomParams(torsion_bias=1.5)


def test_shift_moves_every_action():
    C = shifted(fixture_e2(), 1)
    assert [g.action for g in C.generators] == [1, 3, 6]
