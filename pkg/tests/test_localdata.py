import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import curves, model_maps, random_curve
from tamagawa import localdata
from tamagawa.arith import legendre, val
from tamagawa.curve import WeierstrassModel, global_minimal_model, short_model
from tamagawa.localdata import (
    ADDITIVE,
    GOOD,
    I0,
    II,
    III,
    NONSPLIT,
    SPLIT,
    ContractError,
    I,
    IIIs,
    Istar,
    IVs,
    KodairaType,
    LocalData,
    bad_primes,
    check_table1,
    check_table1_pair,
    conductor,
    global_tamagawa,
    is_split_multiplicative,
    ogg_holds,
    tate_algorithm,
)

E11 = WeierstrassModel.from_ainvs([0, -1, 1, 0, 0])


def classify_large_p(E, p):
    """Type and c_p for p >= 5 from valuations on a short minimal model (independent of Tate's loop)."""
    M, _ = global_minimal_model(E)
    S = short_model(M)  # u = 1/6 is a unit at p >= 5
    A, B = int(S.a4), int(S.a6)
    vd = val(int(M.discriminant), p)
    vc4 = val(int(M.c4), p) if M.c4 else 99
    if vd == 0:
        return I0, 1
    if vc4 == 0:
        split = legendre(-int(M.c6), p) == 1
        return I(vd), (vd if split else (2 if vd % 2 == 0 else 1))
    def sq(x):
        return legendre(x, p) == 1
    if vd == 2:
        return II, 1
    if vd == 3:
        return III, 2
    if vd == 4:
        return KodairaType("IV"), (3 if sq(B // p**2) else 1)
    if vd == 6 and vc4 >= 2:
        a, b = A // p**2, B // p**3
        roots = sum(1 for x in range(p) if (x**3 + a * x + b) % p == 0)
        return KodairaType("I*", 0), 1 + roots
    if vd == 8:
        return IVs, (3 if sq(B // p**4) else 1)
    if vd == 9:
        return IIIs, 2
    if vd == 10:
        return KodairaType("II*"), 1
    return Istar(vd - 6), None


class TestKodaira:
    @pytest.mark.parametrize("text", ["I0", "I7", "I0*", "I3*", "II", "III", "IV", "II*", "III*", "IV*"])
    def test_round_trip(self, text):
        assert str(KodairaType.parse(text)) == text

    @pytest.mark.parametrize("text", ["I", "II3", "V", "I-1", "IV**", ""])
    def test_bad_symbols(self, text):
        with pytest.raises(ValueError):
            KodairaType.parse(text)

    def test_components(self):
        assert [k.components for k in (I0, I(5), II, III, Istar(2), IVs, IIIs)] == [1, 5, 1, 2, 7, 7, 8]
        assert KodairaType.parse("II*").components == 9
        assert Istar(0).is_starred and not I(3).is_starred


class TestExamples:
    def test_conductor_11(self):
        ld = tate_algorithm(E11, 11)
        assert (str(ld.kodaira), ld.cp, ld.fp, ld.v_delta, ld.kind) == ("I1", 1, 1, 1, SPLIT)
        assert tate_algorithm(E11, 5) == LocalData(5, I0, 1, 0, 0, GOOD)
        assert conductor(E11) == 11
        assert global_tamagawa(E11)[0] == 1

    def test_known_conductors(self):
        assert conductor(WeierstrassModel.from_ainvs([0, 0, 1, -1, 0])) == 37
        assert conductor(WeierstrassModel.from_ainvs([1, -1, 0, -1822, 30393])) == 49
        assert conductor(WeierstrassModel.from_ainvs([1, 0, 1, -1, -2])) == 50
        assert conductor(WeierstrassModel.from_ainvs([0, 0, 1, -270, -1708])) == 27

    def test_non_minimal_input(self):
        # y^2 = x^3 + 16 is y^2 + y = x^3 scaled by u = 2; good at 2 once minimalized
        E = WeierstrassModel.from_ainvs([0, 0, 0, 0, 16])
        assert tate_algorithm(E, 2).kind == GOOD
        ld = tate_algorithm(E, 3)
        assert (ld.kodaira, ld.fp, ld.v_delta) == (II, 3, 3)
        assert conductor(E) == 27

    def test_split_contract(self):
        assert is_split_multiplicative(E11, 11)
        with pytest.raises(ContractError):
            is_split_multiplicative(E11, 5)
        with pytest.raises(ValueError):
            tate_algorithm(E11, 9)

    def test_rational_model_accepted(self):
        E = WeierstrassModel.parse("[0,0,0,1/16,0]")
        assert tate_algorithm(E, 2) == tate_algorithm(WeierstrassModel.from_ainvs([0, 0, 0, 1, 0]), 2)


class TestProperties:
    @given(curves(bound=200), st.sampled_from([5, 7, 11, 13, 17, 19, 23]))
    def test_matches_valuation_classifier_for_large_p(self, E, p):
        ld = tate_algorithm(E, p)
        k, cp = classify_large_p(E, p)
        assert ld.kodaira == k
        if cp is not None:
            assert ld.cp == cp

    @given(curves(), st.sampled_from([2, 3, 5, 7, 11]))
    def test_ogg_formula_all_primes(self, E, p):
        # Ogg-Saito: v(disc_min) = f_p + m - 1 holds at every prime, including 2 and 3
        assert ogg_holds(tate_algorithm(E, p))

    @given(curves(), st.sampled_from([2, 3, 5, 7]))
    def test_type_and_cp_admissible(self, E, p):
        assert check_table1(tate_algorithm(E, p))

    @given(curves(), model_maps, st.sampled_from([2, 3, 5, 7]))
    def test_model_independence(self, E, m, p):
        assert tate_algorithm(E, p) == tate_algorithm(m.apply(E), p)

    @given(curves())
    def test_global_product_and_bad_primes(self, E):
        c, bd = global_tamagawa(E)
        prod = 1
        for ld in bd:
            prod *= ld.cp
            assert ld.kind != GOOD
        assert c == prod
        assert [ld.p for ld in bd] == bad_primes(E)

    @given(curves())
    def test_json_round_trip(self, E):
        for ld in global_tamagawa(E)[1]:
            assert LocalData.from_json(ld.to_json()) == ld

    def test_multiplicative_fp_and_kind(self):
        rng = random.Random(3)
        seen = set()
        for _ in range(300):
            for ld in global_tamagawa(random_curve(rng))[1]:
                seen.add(ld.kind)
                if ld.kind in (SPLIT, NONSPLIT):
                    assert ld.fp == 1 and ld.kodaira.symbol == "I"
                if ld.kind == ADDITIVE:
                    assert ld.fp >= 2
        assert {SPLIT, NONSPLIT, ADDITIVE} <= seen


class TestAdmissibilityChecker:
    def test_rejects_inconsistent_data(self):
        assert not check_table1(LocalData(5, I(4), 3, 1, 4, SPLIT))
        assert not check_table1(LocalData(5, I(4), 2, 2, 4, NONSPLIT))
        assert not check_table1(LocalData(5, III, 1, 2, 3, ADDITIVE))
        assert not check_table1(LocalData(5, Istar(1), 1, 2, 7, ADDITIVE))
        assert not check_table1(LocalData(5, I0, 1, 0, 3, GOOD))
        assert check_table1(LocalData(5, Istar(0), 4, 2, 6, ADDITIVE))

    @pytest.mark.parametrize(
        "k,ok,bad",
        [("II", [1], [2]), ("IV", [1, 3], [2]), ("I0*", [1, 2, 4], [3]), ("I2*", [2, 4], [1]), ("I6", [6, 2], [3])],
    )
    def test_pairs(self, k, ok, bad):
        assert all(check_table1_pair(k, c) for c in ok)
        assert not any(check_table1_pair(k, c) for c in bad)


def test_observer_hook():
    seen = []
    localdata.add_observer(seen.append)
    try:
        tate_algorithm(E11, 11)
    finally:
        localdata.remove_observer(seen.append)
    tate_algorithm(E11, 11)
    assert len(seen) == 1 and seen[0].p == 11
