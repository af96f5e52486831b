import pytest
from hypothesis import given
from hypothesis import strategies as st

from tamagawa.lmfdb_client import load_fixtures, verify_fixture
from tamagawa.shapes import SHAPES, check_shape, shape_for


def naive_verdict(N, c):
    s = shape_for(N)
    rest, exps = c, {}
    for p, _, _ in s.exponents:
        while rest % p == 0:
            rest //= p
            exps[p] = exps.get(p, 0) + 1
    support = rest == 1 and all(hi is None or exps.get(p, 0) <= hi for p, _, hi in s.exponents)
    lower = all(exps.get(p, 0) >= lo for p, lo, _ in s.exponents)
    return support, lower


@pytest.fixture(scope="module")
def computed():
    return {label: (fx, verify_fixture(fx).c) for label, fx in load_fixtures().items()}


class TestShapes:
    def test_degrees_are_disjoint(self):
        seen = set()
        for s in SHAPES:
            assert not seen & s.degrees
            seen |= s.degrees

    @pytest.mark.parametrize("N", [14, 19, 43, 67, 163, 11, 27, 37, 17, 15, 21])
    def test_known_degrees(self, N):
        assert N in shape_for(N).degrees

    def test_unknown_degree(self):
        assert shape_for(13) is None
        with pytest.raises(ValueError):
            check_shape(13, 2)

    @pytest.mark.parametrize(
        "N,c,support,lower",
        [
            (17, 2 * 3 * 17, True, True),
            (17, 2 * 9, False, True),
            (17, 17, True, False),
            (11, 1, True, True),
            (11, 2**7 * 3, True, True),
            (11, 5, False, True),
            (14, 3, False, False),
            (15, 2 * 9 * 5, True, True),
            (15, 2 * 27, False, True),
            (21, 4 * 7, True, True),
            (21, 49, False, False),
        ],
    )
    def test_examples(self, N, c, support, lower):
        v = check_shape(N, c)
        assert (v.support_ok, v.lower_ok) == (support, lower)
        assert v.ok == (support and lower)

    @given(st.sampled_from(sorted(set().union(*(s.degrees for s in SHAPES)))), st.integers(1, 10**6))
    def test_matches_naive_check(self, N, c):
        v = check_shape(N, c)
        assert (v.support_ok, v.lower_ok) == naive_verdict(N, c)


class TestFixtures:
    def test_support_and_caps_hold_on_every_fixture(self, computed):
        for label, (fx, c) in computed.items():
            if fx.isogeny_degree is not None:
                assert check_shape(fx.isogeny_degree, c).support_ok, label

    def test_lower_bound_on_the_two_power(self, computed):
        # N = 15 and 21 fixtures have odd c, so "2^n with n >= 1" fails on exactly those
        failing = {label for label, (fx, c) in computed.items()
                   if fx.isogeny_degree is not None and not check_shape(fx.isogeny_degree, c).lower_ok}
        assert failing == {label for label, (fx, _) in computed.items() if fx.isogeny_degree in (15, 21)}
        assert all(c % 2 == 1 for label, (_, c) in computed.items() if label in failing)
