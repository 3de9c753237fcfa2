import random
from fractions import Fraction as F

import pytest

from melkit.exact_coeff import ExactCoeff
from melkit.melnikov_core import (
    Basis,
    MelnikovCombination,
    assemble,
    assemble_piecewise,
    assemble_smooth,
    canonical_basis,
    even_part_to_cos_basis,
    expand,
    reduce_to_canonical,
    rewrite_I,
    rewrite_J,
    structural_indices,
)
from melkit.perturbation import PiecewisePerturbation, SmoothPerturbation
from melkit.quadrature import quad_melnikov

PI = ExactCoeff.pi
RT2 = ExactCoeff.rt2


def B(text):
    return Basis.parse(text)


def rand_smooth(rng, n, s1, s2, trig=True):
    w = s2 - s1 + 1
    q = lambda: F(rng.randint(-9, 9), rng.randint(1, 5))
    a = [[q() for _ in range(w)] for _ in range(n + 1)]
    at = [[q() for _ in range(w)] for _ in range(n)] if trig else None
    return SmoothPerturbation(n, s1, s2, a, at)


def rand_piecewise(rng, n, s1, s2, s3):
    return PiecewisePerturbation(n, s1, s2, s3, rand_smooth(rng, n, s1, s2), rand_smooth(rng, n, s1, s3))


class TestCosBasis:
    @pytest.mark.parametrize("a,ct", [((1,), (1,)), ((0, 1), (1, -1)), ((0, 0, 1), (1, -2, 1))])
    def test_examples(self, a, ct):
        assert even_part_to_cos_basis(a).ctilde == tuple(F(v) for v in ct)

    def test_padding_and_degree_check(self):
        assert even_part_to_cos_basis([2], n=2).ctilde == (2, 0, 0)
        with pytest.raises(ValueError):
            even_part_to_cos_basis([1, 2, 3], n=1)


class TestAssemble:
    def test_even_power_only_is_empty(self):
        p = SmoothPerturbation(1, 2, 2, [[1], [1]])
        c = assemble_smooth(p)
        assert c.is_empty()
        assert expand(c, 5).identically_zero

    def test_constant(self):
        c = assemble_smooth(SmoothPerturbation(0, 1, 1, [[1]]))
        assert c.terms == ((B("I_{0,1}"), 1),)

    def test_drops_even_powers(self, rng):
        c = assemble_smooth(rand_smooth(rng, 2, 1, 4))
        assert {b.p for b, _ in c.terms} <= {1, 3}
        assert c.indices["m"] == 2

    def test_piecewise_odd_sides_add(self):
        one = SmoothPerturbation(0, 1, 1, [[1]])
        c = assemble_piecewise(PiecewisePerturbation(0, 1, 1, 1, one, one))
        assert c.terms == ((B("J_{0,1}"), 2),)

    def test_piecewise_even_cancelling_pair(self):
        q = SmoothPerturbation(1, 2, 2, [[3], [-1]])
        c = assemble_piecewise(PiecewisePerturbation(1, 2, 2, 2, q, q))
        assert c.is_empty()

    def test_piecewise_odd_trig_only(self):
        q = SmoothPerturbation(1, 1, 1, [[0], [0]], [[1]])
        assert assemble_piecewise(PiecewisePerturbation(1, 1, 1, 1, q, None)).is_empty()

    def test_piecewise_odd_equals_half_I(self, rng):
        p = rand_smooth(rng, 2, 1, 3)
        pw = PiecewisePerturbation(2, 1, 3, 3, p, p)
        smooth = assemble_smooth(p).as_dict()
        # both sides equal: odd powers double on J, i.e. J-coefficient/2 * I == I-combination
        odd = {Basis("I", b.i, b.p): v / 2 for b, v in assemble_piecewise(pw).terms if b.p % 2}
        assert odd == smooth

    def test_structural_indices(self):
        assert structural_indices(1, 4) == {"r": 0, "m": 2, "rt": 1, "l": 2}
        assert structural_indices(2, 5) == {"r": 1, "m": 2, "rt": 1, "l": 2}


class TestRelations:
    def test_rewrite_I_single_step(self):
        rel = rewrite_I(0, 0, 0)
        assert rel.lhs == B("I_{0,3}")
        assert rel.as_dict() == {B("I_{1,1}"): 6, B("I_{1,3}"): 1, B("I_{2,1}"): -3}

    def test_rewrite_I_chain(self):
        rel = rewrite_I(0, 0, 1)
        assert rel.as_dict() == {B("I_{1,1}"): 6, B("I_{2,1}"): -1, B("I_{2,3}"): F(2, 3), B("I_{3,1}"): -1}

    def test_rewrite_J(self):
        assert rewrite_J(0, 1, 0).as_dict() == {B("J_{1,2}"): 8, B("J_{1,4}"): 1, B("J_{2,2}"): -4}
        assert rewrite_J(1, 1, 0).as_dict() == {B("J_{2,2}"): F(8, 3), B("J_{2,4}"): F(2, 3), B("J_{3,2}"): F(-4, 3)}

    def test_rewrite_J_needs_positive_r(self):
        with pytest.raises(ValueError):
            rewrite_J(0, 0, 0)

    @pytest.mark.parametrize("i", range(4))
    @pytest.mark.parametrize("k", range(3))
    def test_residuals(self, i, k):
        for rel in (rewrite_I(i, 1, k), rewrite_J(i, 2, k)):
            assert rel.series_residual(12).is_zero()
            d, scale = rel.quad_residual(0.5)
            assert abs(d) <= 1e-12 * scale


class TestExpand:
    def test_I01(self):
        s = expand(B("I_{0,1}"), 3)
        assert [s.coefficient(e) for e in (2, 4, 6)] == [PI(2), PI(F(1, 8)), PI(F(3, 128))]
        assert s.coefficient(3) == ExactCoeff()

    def test_L11_leading(self):
        s = expand(B("L_{1,1}"), 3)
        assert s.leading() == (8, PI(F(-3, 32)))

    def test_L11_is_its_definition(self):
        comb = MelnikovCombination("generic", ((B("I_{2,3}"), 2), (B("I_{3,1}"), -3)))
        assert expand(comb, 6) == expand(B("L_{1,1}"), 6)

    def test_J02(self):
        assert expand(B("J_{0,2}"), 2).leading() == (3, RT2(F(8, 3)))

    def test_order_must_be_positive(self):
        with pytest.raises(ValueError):
            expand(B("I_{0,1}"), 0)

    @pytest.mark.parametrize("seed", range(6))
    def test_round_trip_against_quadrature(self, seed):
        rng = random.Random(seed)
        n = rng.randint(0, 3)
        if seed % 2:
            s1 = rng.randint(1, 3)
            p = rand_piecewise(rng, n, s1, s1 + rng.randint(0, 3), s1 + rng.randint(0, 3))
        else:
            s1 = rng.randint(1, 3)
            p = rand_smooth(rng, n, s1, s1 + rng.randint(0, 4))
        series = expand(assemble(p), 25)
        for h in (0.01, 0.05):
            q = quad_melnikov(p, h, tol=1e-13)
            v = series(h)
            assert abs(v - q.value) <= 1e-6 * max(abs(q.value), 1e-300) + 10 * q.abs_error_estimate

    def test_series_json(self):
        from melkit.exact_coeff import HalfPowerSeries
        s = expand(B("J_{1,2}"), 4)
        assert HalfPowerSeries.from_json(s.to_json()) == s


class TestReduction:
    def test_m1_identity(self, rng):
        c = assemble_smooth(rand_smooth(rng, 3, 1, 1))
        form = reduce_to_canonical(c)
        assert form.combination().as_dict() == c.as_dict()

    @pytest.mark.parametrize("n", range(1, 5))
    @pytest.mark.parametrize("r", range(3))
    def test_two_ladder_map(self, n, r):
        # A in terms of the inputs X_{i,2r+1} (i <= n), X_{n-1,2r+3}, X_{n,2r+3}
        s = 2 * r + 3
        blk_basis = canonical_basis("I", n, 2, r)
        assert blk_basis[-1] == Basis("L", n, r + 1)
        cols = {}
        for name in ("n-1", "n"):
            i = n - 1 if name == "n-1" else n
            comb = MelnikovCombination("smooth", ((Basis("I", i, s), 1),), n, 2 * r + 1, s)
            cols[name] = reduce_to_canonical(comb).block("I").A
        want_nm1 = [0] * (n + 3)
        want_nm1[n] = F(2 * s, 2 * n - 1)
        want_nm1[n + 1] = F(-s, 4 * n * n - 1)
        want_nm1[n + 2] = F(n, 4 * n * n - 1)
        want_n = [0] * (n + 3)
        want_n[n + 1] = F(2 * s, 2 * n + 1)
        want_n[n + 2] = F(1, 2 * n + 1)
        assert list(cols["n-1"]) == want_nm1
        assert list(cols["n"]) == want_n
        for i in range(n + 1):
            comb = MelnikovCombination("smooth", ((Basis("I", i, s - 2), 1),), n, 2 * r + 1, s)
            A = reduce_to_canonical(comb).block("I").A
            assert list(A) == [1 if k == i else 0 for k in range(n + 3)]

    @pytest.mark.parametrize("n,s1,s2", [(1, 1, 5), (2, 2, 7), (3, 1, 3), (0, 1, 5), (4, 3, 8)])
    def test_smooth_preserves_series(self, rng, n, s1, s2):
        c = assemble_smooth(rand_smooth(rng, n, s1, s2))
        form = reduce_to_canonical(c)
        assert expand(form, 15) == expand(c, 15)

    @pytest.mark.parametrize("n,s1,sh", [(1, 1, 2), (2, 1, 5), (3, 2, 6), (0, 1, 4), (2, 3, 7)])
    def test_piecewise_preserves_series(self, rng, n, s1, sh):
        c = assemble_piecewise(rand_piecewise(rng, n, s1, sh, rng.randint(s1, sh)))
        form = reduce_to_canonical(c)
        assert expand(form, 15) == expand(c, 15)

    @pytest.mark.parametrize("n", range(1, 5))
    @pytest.mark.parametrize("m", range(1, 5))
    def test_surjective(self, n, m):
        c = MelnikovCombination("smooth", (), n, 1, 2 * m - 1)
        blk = reduce_to_canonical(c).block("I")
        assert blk.map_rank() == n + 2 * m - 1
        cp = MelnikovCombination("piecewise", (), n, 2, 2 * m)
        assert reduce_to_canonical(cp).block("J").map_rank() == n + 2 * m - 1

    def test_generic_refused(self):
        with pytest.raises(ValueError):
            reduce_to_canonical(MelnikovCombination.single(B("I_{0,1}")))

    def test_combination_json(self, rng):
        c = assemble_smooth(rand_smooth(rng, 2, 1, 3))
        assert MelnikovCombination.from_json(c.to_json()) == c
