import json
import random
from fractions import Fraction

import jsonschema
import pytest

from spectra import checks as ck
from spectra.complex import FilteredComplex, Generator, RandomParams, fixture_e1, fixture_e2, random_complex, shifted, with_action
from spectra.homology import change_ring_class, class_from_chain, generator_classes, zero_class
from spectra.linalg import Matrix
from spectra.rings import QQ, ZZ, Zmod
from spectra.schemas import load_schema
from spectra.spectral import c


def e1_classes():
    E1 = fixture_e1()
    return E1, class_from_chain(E1, ZZ, {"v": 1}), class_from_chain(E1.dual(), ZZ, {"u*": 2, "v*": 1})


def e2_classes():
    E2 = fixture_e2()
    return E2, class_from_chain(E2, ZZ, {"x": 1, "w": -2})


def test_coeff_monotone_examples():
    E1, v, _ = e1_classes()
    r = ck.check_coeff_monotone(v, QQ)
    assert r["status"] == ck.PASS and r["values"] == {"c_Z": "1", "c_Q": "0"}
    r = ck.check_coeff_monotone(v, Zmod(2))
    assert r["status"] == ck.PASS and r["values"]["c_Z/2"] == "1"
    r = ck.check_coeff_monotone(zero_class(E1, ZZ, 0), QQ)
    assert r["status"] == ck.PASS and r["values"] == {"c_Z": "-inf", "c_Q": "-inf"}


def test_z_vs_q_examples():
    _, v, _ = e1_classes()
    r = ck.check_z_vs_q(v)
    assert r["status"] == ck.PASS
    assert r["witness"]["k"] == 2
    assert r["values"]["inf_k c_Z(ka)"] == "0" == r["values"]["c_Q"]
    _, a = e2_classes()
    r = ck.check_z_vs_q(a)
    assert r["status"] == ck.PASS and r["values"]["c_Z"] == "5" == r["values"]["c_Q"]


def test_prime_envelope_examples():
    _, v, _ = e1_classes()
    r = ck.check_prime_envelope(v)
    assert r["status"] == ck.PASS
    assert {2, 3} <= set(r["witness"]["primes"])
    assert r["values"]["inf_p"] == "0" and r["values"]["sup_p"] == "1"
    _, a = e2_classes()
    r = ck.check_prime_envelope(a)
    assert r["status"] == ck.PASS
    assert r["values"]["c_Q"] == r["values"]["c_Z"] == "5"


def test_refinement_examples():
    _, v, _ = e1_classes()
    r = ck.check_refinement(v, 2)
    assert r["status"] == ck.PASS
    assert r["values"]["inf_k"] == "0" and r["values"]["inf_k_not_in_pN"] == "1"
    assert ck.check_refinement(v, 3)["status"] == ck.INCONCLUSIVE
    with pytest.raises(ValueError):
        ck.check_refinement(v, 4)


def test_refinement_is_inconclusive_without_torsion():
    for seed in range(20):
        C = random_complex(seed, RandomParams(torsion_bias=0.0))
        for a in ck.integral_classes(C):
            for p in (2, 3, 5):
                assert ck.check_refinement(a, p)["status"] == ck.INCONCLUSIVE


def test_multiple_infima_match_direct_scan():
    for seed in range(60):
        C = random_complex(seed, RandomParams(torsion_bias=0.6))
        for a in ck.integral_classes(C):
            if a.is_torsion():
                continue
            for p in (2, 3):
                inf_all, inf_coprime = ck.multiple_infima(a, p)
                values = {k: c(a.scale(k)) for k in range(1, 49)}
                assert inf_all == min(values.values())
                assert inf_coprime == min(v for k, v in values.items() if k % p)


def test_field_pd_examples():
    E1, _, vd = e1_classes()
    for field in (QQ, Zmod(3)):
        r = ck.check_field_pd(E1, change_ring_class(vd, field))
        assert r["status"] == ck.PASS
    C = FilteredComplex(2, [Generator("p", 1, Fraction(5, 2))])
    r = ck.check_field_pd(C, class_from_chain(C.dual(), QQ, {"p*": 1}))
    assert r["status"] == ck.PASS and r["values"]["inf_b c(b)"] == "5/2"
    with pytest.raises(ValueError):
        ck.check_field_pd(E1, vd)


def test_corrected_pd_examples():
    E1, _, vd = e1_classes()
    r = ck.check_corrected_pd(E1, vd)
    assert r["status"] == ck.PASS and r["values"]["sum"] == "0" and r["values"]["beta_tor"] == "0"
    E2 = fixture_e2()
    for b in generator_classes(E2.dual(), ZZ, 0):
        r = ck.check_corrected_pd(E2, b)
        assert r["status"] == ck.PASS
        assert Fraction(r["values"]["sum"]) <= 3
    assert ck.check_corrected_pd(E1, zero_class(E1.dual(), ZZ, 1))["status"] == ck.INCONCLUSIVE


def test_corrected_pd_reports_unmet_hypothesis():
    # torsion in the full homology one degree below lets the sum exceed beta_tor
    C = FilteredComplex(
        1,
        [Generator("y", 0, 0), Generator("x", 1, 1), Generator("z", 1, 10)],
        {"x": [("y", 2)]},
    )
    a = class_from_chain(C.dual(), ZZ, {"x*": 1, "z*": 1})
    r = ck.check_corrected_pd(C, a)
    assert r["values"]["sum"] == "9"
    assert r["values"]["beta_tor"] == "0"
    assert r["values"]["torsion_free_below"] is False
    assert r["status"] == ck.INCONCLUSIVE


def test_depth_identity_examples():
    _, v, vd = e1_classes()
    r = ck.check_depth_identity(v, vd)
    assert r["status"] == ck.PASS
    assert (r["values"]["gamma_Z"], r["values"]["gamma_Q"], r["values"]["beta_spec"]) == ("1", "0", "1")
    E2, a = e2_classes()
    for b in generator_classes(E2.dual(), ZZ, 0):
        if not b.is_torsion():
            assert ck.check_depth_identity(a, b)["status"] == ck.PASS


def test_generic_prime_agrees_with_rationals():
    count = 0
    for seed in range(150):
        C = random_complex(seed, RandomParams(closed=seed % 2 == 0, torsion_bias=0.6))
        for a in ck.integral_classes(C):
            if a.is_zero():
                continue
            _, p = ck.envelope_primes(a)
            assert c(change_ring_class(a, Zmod(p))) == c(change_ring_class(a, QQ))
            count += 1
    assert count > 300


def test_identity_interleaving_trivial_case():
    E2 = fixture_e2()
    r = ck.check_tor_lipschitz(ck.identity_interleaving(E2, E2))
    assert r["status"] == ck.PASS and r["values"]["difference"] == "0" and r["values"]["shift_sum"] == "0"


def test_lipschitz_uniform_shift():
    E2 = fixture_e2()
    inter = ck.identity_interleaving(E2, shifted(E2, 1))
    assert (inter.s1, inter.s2) == (1, 0)
    r = ck.check_tor_lipschitz(inter)
    assert r["status"] == ck.PASS
    assert r["values"]["beta_tor_F"] == r["values"]["beta_tor_G"] == "3"


def test_lipschitz_equality_case():
    E2 = fixture_e2()
    inter = ck.identity_interleaving(E2, with_action(E2, "w", 4))
    assert (inter.s1, inter.s2) == (0, 1)
    r = ck.check_tor_lipschitz(inter)
    assert r["status"] == ck.PASS
    assert (r["values"]["difference"], r["values"]["shift_sum"]) == ("1", "1")


def test_invalid_interleavings_are_rejected():
    E2 = fixture_e2()
    good = ck.identity_interleaving(E2, with_action(E2, "w", 4))
    # shift too small for the forward map
    bad = ck.Interleaving(E2, good.G, good.forward, good.backward, Fraction(0), Fraction(0))
    assert bad.problems()
    assert ck.check_tor_lipschitz(bad)["status"] == ck.INCONCLUSIVE
    with pytest.raises(ck.InvalidInterleaving):
        bad.check()
    # not a chain map: drop y from the degree 0 component
    forward = dict(good.forward)
    forward[0] = Matrix([[0]])
    broken = ck.Interleaving(E2, good.G, forward, good.backward, good.s1, good.s2)
    assert any("commute" in p for p in broken.problems())
    # chain maps whose composite is zero on homology
    zero = {k: Matrix.zeros(m.nrows, m.ncols) for k, m in good.forward.items()}
    null = ck.Interleaving(E2, good.G, zero, zero, Fraction(1), Fraction(1))
    assert any("differs" in p for p in null.problems())
    with pytest.raises(ck.InvalidInterleaving):
        ck.identity_interleaving(E2, fixture_e1())


def test_generated_perturbations_are_valid():
    for seed in range(1, 31):
        C = random_complex(seed)
        for inter in ck.perturbations(C, random.Random(seed), 2):
            assert inter.problems() == []
            assert ck.check_tor_lipschitz(inter)["status"] == ck.PASS


def test_dual_torsion_difference_is_a_finding():
    E2 = fixture_e2()
    r = ck.check_dual_torsion(E2)
    assert r["values"]["beta_tor"] == "3" and r["values"]["beta_tor_dual"] == "0"
    assert r["values"]["finding"] is True and r["status"] == ck.INCONCLUSIVE
    summary = ck.summarize("dual-tor", {}, [r])
    assert summary["status"] == ck.PASS
    assert summary["witness"]["findings"] == [r]
    # on E1 the dual picks up Z/2 at level -1, killed at level 0
    r = ck.check_dual_torsion(fixture_e1())
    assert (r["values"]["beta_tor"], r["values"]["beta_tor_dual"]) == ("0", "1")
    C = random_complex(3, RandomParams(torsion_bias=0.0))
    assert ck.check_dual_torsion(C)["status"] == ck.PASS


def test_reports_validate_against_schema():
    schema = load_schema("report")
    C = random_complex(7, RandomParams(torsion_bias=0.6))
    reports = ck.run_checks(C, rng=random.Random(7))
    for r in reports:
        jsonschema.validate(r, schema)
        assert json.loads(json.dumps(r)) == r
    assert {r["check"] for r in reports} >= set(ck.CHECK_NAMES) - {"depth-id", "refine", "zq", "primes", "coeff-mono"}
    jsonschema.validate(ck.summarize("all", {"seed": 7}, reports), schema)


def test_run_checks_passes_on_a_corpus_sample():
    for seed in range(1, 41):
        C = random_complex(seed)
        reports = ck.run_checks(C, rng=random.Random(seed))
        assert ck.summarize("all", {"seed": seed}, reports)["status"] == ck.PASS
    with pytest.raises(ValueError):
        ck.run_checks(fixture_e1(), ("nope",))


def test_open_complexes_never_fail():
    params = RandomParams(closed=False, torsion_bias=0.7)
    for seed in range(1, 31):
        C = random_complex(seed, params)
        reports = ck.run_checks(C, rng=random.Random(seed))
        assert [r for r in reports if r["status"] == ck.FAIL] == []
