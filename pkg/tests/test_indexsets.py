import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tail_lab.indexsets import (
    EmptyIndexSetError,
    IndexSet,
    UnsupportedParameterError,
    generate_E_DC,
    generate_E_IS,
    generate_F_DC,
    generate_F_IS,
    min_exponent,
    minkowski_sum,
    predicted_rates,
    pullback_blowup,
    closed_form_rates,
)
from tail_lab.spectrum import Problem


def close(A, values, tol=1e-9):
    got = A.exponents
    return len(got) == len(values) and all(abs(a - b) <= tol for a, b in zip(got, sorted(values)))


class TestIndexSet:
    def test_sorted_and_deduped(self):
        A = IndexSet(((2.0, 0), (1.0, 0), (2.0, 0), (1.0, 1)), 3.0)
        assert A.elements == ((1.0, 0), (1.0, 1), (2.0, 0))

    def test_truncation_enforced(self):
        with pytest.raises(ValueError):
            IndexSet(((3.0, 0),), 3.0)
        with pytest.raises(ValueError):
            IndexSet(((1.0, -1),), 3.0)

    def test_restrict(self):
        A = IndexSet.from_exponents([0.5, 1.5, 2.5], 3)
        B = A.restrict(2.0)
        assert B.exponents == [0.5, 1.5] and B.truncation == 2.0


class TestGenerators:
    def test_E_IS_examples(self):
        assert close(generate_E_IS(3, 1.0, 3.0), [1.5 + math.sqrt(1.25)])
        assert len(generate_E_IS(3, 0.0, 4.0)) == 0
        assert close(generate_E_IS(3, 2.0, 4.0), [1.5 + math.sqrt(4.25)])

    def test_F_IS_examples(self):
        v0, v1 = math.sqrt(1.25), math.sqrt(3.25)
        assert close(generate_F_IS(3, 1.0, 2.0), [v0 - 0.5, v0 + 0.5, v1 - 0.5])
        # nu_0 = 1 is an integer: excluded by default, present without the exclusion
        assert len(generate_F_IS(3, 0.75, 1.0)) == 0
        assert close(generate_F_IS(3, 0.75, 1.0, exclude_integer_nu=False), [0.5])
        F = generate_F_IS(4, 2.0, 2.0)
        assert F.exponents[0] == pytest.approx(-1 + math.sqrt(3.0))

    def test_DC_examples(self):
        s1, s2 = math.sqrt(0.91), math.sqrt(3.91)
        assert close(generate_E_DC(0.3, 3.1), [2 + s1])
        assert close(generate_F_DC(0.3, 1.1), [-1 + s1, s1, -1 + s2])
        assert close(generate_F_DC(0.45, 0.0), [-1 + math.sqrt(0.7975)])

    @pytest.mark.parametrize("n,f,L", [(3, 1.0, 6.0), (4, 0.3, 5.5), (5, -0.5, 7.0), (3, -0.1875, 4.0)])
    def test_E_IS_complete_by_brute_force(self, n, f, L):
        brute = set()
        for j, k in itertools.product(range(40), range(40)):
            v = math.sqrt(((n - 2) / 2) ** 2 + j * (j + n - 2) + f)
            a = n / 2 + k + v
            if a < L and abs(0.5 + v - round(0.5 + v)) > 1e-10:
                brute.add(round(a, 12))
        got = {round(a, 12) for a in generate_E_IS(n, f, L).exponents}
        assert got == brute

    @pytest.mark.parametrize("Z,L", [(0.3, 5.0), (0.45, 4.2), (-0.2, 6.0)])
    def test_DC_complete_by_brute_force(self, Z, L):
        for offset, gen in ((2.0, generate_E_DC), (-1.0, generate_F_DC)):
            brute = set()
            for kap in range(-40, 41):
                if kap == 0:
                    continue
                for l in range(40):
                    a = offset + l + math.sqrt(kap * kap - Z * Z)
                    if a < L:
                        brute.add(round(a, 12))
            assert {round(a, 12) for a in gen(Z, L).exponents} == brute


class TestAlgebra:
    def test_sum_example(self):
        A = IndexSet(((2.0, 0),), 5.0)
        B = IndexSet(((1.0, 0),), 5.0)
        assert (A + B).elements == ((3.0, 0),)

    def test_sum_empty(self):
        A = IndexSet(((2.0, 0),), 5.0)
        E = IndexSet((), 5.0)
        assert len(A + E) == 0

    def test_E_plus_F_IS(self):
        S = generate_E_IS(3, 1.0, 6.0) + generate_F_IS(3, 1.0, 6.0)
        assert min_exponent(S)[0] == pytest.approx(1 + 2 * math.sqrt(1.25))

    def test_pullback(self):
        E = IndexSet(((2.0, 0),), 5.0)
        F = IndexSet(((1.0, 0),), 5.0)
        h1, ff, h2 = pullback_blowup(E, F)
        assert h1 is E and h2 is F and ff.elements == ((3.0, 0),)
        h1, ff, h2 = pullback_blowup(IndexSet((), 5.0), F)
        assert len(h1) == 0 and len(ff) == 0 and h2 is F

    def test_pullback_dirac(self):
        _, ff, _ = pullback_blowup(generate_E_DC(0.45, 6.0), generate_F_DC(0.45, 6.0))
        assert min_exponent(ff)[0] == pytest.approx(1 + 2 * math.sqrt(0.7975))

    def test_min_exponent(self):
        assert min_exponent(generate_E_DC(0.3, 4.0)) == (pytest.approx(2 + math.sqrt(0.91)), 0)
        assert min_exponent(IndexSet(((1.0, 0), (1.0, 1)), 2.0)) == (1.0, 1)
        assert min_exponent(generate_F_IS(3, 0.75, 2.0, exclude_integer_nu=False)) == (0.5, 0)
        with pytest.raises(EmptyIndexSetError):
            min_exponent(IndexSet((), 1.0))

    def test_sum_truncation_complete(self):
        # every pair sum below the reported truncation must be present
        A = IndexSet.from_exponents([0.3, 1.1, 2.0], 2.5)
        B = IndexSet.from_exponents([0.7, 1.9], 2.2)
        S = A + B
        assert S.truncation == pytest.approx(min(2.5 + 0.7, 2.2 + 0.3))
        full = sorted(a + b for a in [0.3, 1.1, 2.0] for b in [0.7, 1.9])
        assert S.exponents == pytest.approx([x for x in full if x < S.truncation])


exps = st.lists(st.floats(0.0, 5.0), min_size=1, max_size=6)


@settings(max_examples=200, deadline=None)
@given(exps, exps)
def test_min_of_sum(a, b):
    A = IndexSet.from_exponents(a, 6.0)
    B = IndexSet.from_exponents(b, 6.0)
    assert min_exponent(A + B)[0] == pytest.approx(min(a) + min(b))


@settings(max_examples=200, deadline=None)
@given(exps, exps, exps)
def test_sum_commutative_associative(a, b, c):
    A, B, C = (IndexSet.from_exponents(x, 6.0) for x in (a, b, c))
    assert (A + B).matches(B + A, 1e-12)
    lhs, rhs = (A + B) + C, A + (B + C)
    t = min(lhs.truncation, rhs.truncation)
    assert lhs.restrict(t).matches(rhs.restrict(t), 1e-9)


@settings(max_examples=100, deadline=None)
@given(exps, exps)
def test_pullback_ff_is_sum(a, b):
    E = IndexSet.from_exponents(a, 6.0)
    F = IndexSet.from_exponents(b, 6.0)
    assert pullback_blowup(E, F).ff.matches(minkowski_sum(E, F))


class TestRates:
    def test_wave_f1(self):
        t = predicted_rates("wave", 3, 1.0)
        assert (t.rate_C_plus, t.rate_tf_plus) == (pytest.approx(2.618034, abs=1e-6),
                                                   pytest.approx(3.236068, abs=1e-6))
        assert t.rate_tf_plus > t.rate_C_plus

    def test_wave_exceptional(self):
        t = predicted_rates("wave", 3, 2.0)
        assert t.rate_C_plus == pytest.approx(3.561553, abs=1e-6)
        assert t.rate_tf_plus == pytest.approx(5.123106, abs=1e-6)
        assert t.leading_mode == 1
        assert t.mode_row(0).vanishing
        assert t.rate_tf_plus == pytest.approx(2 + math.sqrt(17) - 1, abs=1e-12)

    def test_dirac(self):
        t = predicted_rates("dirac", 3, 0.45)
        assert t.rate_C_plus == pytest.approx(2.893029, abs=1e-6)
        assert t.rate_tf_plus == pytest.approx(2.786057, abs=1e-6)
        assert t.rate_tf_plus < t.rate_C_plus

    def test_negative_coupling_ordering(self):
        t = predicted_rates("wave", 3, -0.1875)
        assert t.rate_C_plus == pytest.approx(1.75) and t.rate_tf_plus == pytest.approx(1.5)

    def test_flat_notes(self):
        t = predicted_rates("wave", 3, 0.0)
        assert math.isinf(t.rate_tf_plus)
        assert any("sharpness" in note for note in t.notes)
        assert any("sharpness" in note for note in predicted_rates("dirac", 3, 0.0).notes)

    def test_integer_nu_unsupported(self):
        with pytest.raises(UnsupportedParameterError):
            predicted_rates("wave", 3, 0.75)

    def test_per_mode_rows(self):
        t = predicted_rates("wave", 4, 0.3, jmax=2)
        for row in t.per_mode:
            v = math.sqrt(1 + row.mode * (row.mode + 2) + 0.3)
            assert row.rate_C_plus == pytest.approx(2 + v)
            assert row.rate_tf_plus == pytest.approx(1 + 2 * v)

    def test_text_and_csv(self):
        t = predicted_rates(Problem.WAVE, 3, 2.0)
        assert "5.123106" in t.to_text()
        assert t.to_csv().splitlines()[0] == "mode,rate_C_plus,rate_tf_plus,class"

    def test_closed_form_rates_random(self):
        rng = np.random.default_rng(0)
        for f in rng.uniform(-0.24, 5.0, 200):
            t = predicted_rates("wave", 3, float(f))
            assert (t.rate_C_plus, t.rate_tf_plus) == pytest.approx(closed_form_rates("wave", f), abs=1e-12)
        for Z in rng.uniform(-0.499, 0.499, 200):
            t = predicted_rates("dirac", 3, float(Z))
            assert (t.rate_C_plus, t.rate_tf_plus) == pytest.approx(closed_form_rates("dirac", Z), abs=1e-12)
