import pytest
from hypothesis import given, settings, strategies as st

from ltk.rings import PrecisionExhausted, make_ring
from ltk.series import TruncSeries
from ltk.measures import (
    FiniteCharacter,
    Measure,
    _mult_order_elem,
    coset_mass,
    dirac,
    gauss_sum,
    moment,
    partition_check,
    restrict_to_units,
    riemann_moment,
    tilde_mahler,
    tilde_series,
    twist_eval,
    twist_factorization_report,
    unit_residues,
)

from conftest import random_series

Z12 = make_ring(3, 12, "zp")
Q3_12 = make_ring(3, 12, "ramified_quad", quad=(0, 3))


def test_dirac_examples():
    z = make_ring(3, 8, "zp")
    assert dirac(0, "zp", z, 20).amice.eq_mod(TruncSeries.one(z, 20))
    assert dirac(1, "zp", z, 20).amice.eq_mod(TruncSeries(z, 20, [1, 1]))
    # sigma((1, 2)) = 3 in the okp reading
    q = make_ring(3, 8, "ramified_quad", quad=(0, 3))
    a = q.elem((1, 2))
    mu = dirac(a, "okp", z, 20, okp=q)
    assert mu.amice.eq_mod(TruncSeries(z, 20, [1, 1]).pow_int(3))


def test_tilde_examples():
    z = make_ring(3, 10, "zp")
    for a, fixed in [(7, True), (4, True), (6, False), (12, False)]:
        g = dirac(a, "zp", z, 32).amice
        t = tilde_series(g)
        if fixed:
            assert t.eq_mod(g, t.n_eff)
        else:
            assert t.eq_mod(TruncSeries.zero(z, 32), t.n_eff)
    c = TruncSeries(z, 32, [11])
    assert tilde_series(c).eq_mod(TruncSeries.zero(z, 32))


def test_tilde_p2():
    z = make_ring(2, 10, "zp")
    g = dirac(5, "zp", z, 24).amice
    t = tilde_series(g)
    assert t.eq_mod(g, t.n_eff)
    g2 = dirac(6, "zp", z, 24).amice
    assert tilde_series(g2).eq_mod(TruncSeries.zero(z, 24), t.n_eff)


@given(st.lists(st.integers(0, 3 ** 10 - 1), min_size=1, max_size=6))
@settings(max_examples=12, deadline=None)
def test_tilde_idempotent_and_oracle(coeffs):
    z = make_ring(3, 10, "zp")
    g = TruncSeries(z, 18, coeffs)
    t1 = tilde_series(g)
    t2 = tilde_mahler(g)
    assert t1.eq_mod(t2, t1.n_eff)
    tt = tilde_series(t1)
    assert tt.eq_mod(t1, tt.n_eff)


def test_tilde_kills_mahler_p_degrees():
    # coefficients of Q^n vanish for p | n when expanded in Q
    z = make_ring(3, 10, "zp")
    import random
    g = random_series(z, 15, random.Random(2), unit=False)
    t = tilde_mahler(g)
    # re-expand tilde(g) in powers of Q and inspect
    spec = z
    b = [spec.zero() for _ in range(15)]
    for m in range(15):
        cm = t.coeff(m)
        if cm.is_zero():
            continue
        binom = 1
        sign = 1 if m % 2 == 0 else -1
        b[0] = b[0] + cm * (sign * binom)
        for r in range(1, m + 1):
            binom = binom * (m - r + 1) // r
            sign = 1 if (m - r) % 2 == 0 else -1
            b[r] = b[r] + cm * (sign * binom)
    for r in range(0, 15, 3):
        assert b[r].is_zero()


def test_coset_mass_dirac_indicator():
    a = Q3_12.elem((4, 3))          # sigma = 7
    mu = dirac(a, "okp", Z12, 64, okp=Q3_12)
    hit, g = coset_mass(mu, Q3_12.elem((7, 0)), 1)
    assert hit.coords[0] % 3 ** g == 1
    miss, _ = coset_mass(mu, Q3_12.elem((2, 0)), 1)
    assert miss.is_zero()
    # level 2 and lift independence (well-definedness)
    v1, _ = coset_mass(mu, Q3_12.elem((7, 0)), 2)
    v2, _ = coset_mass(mu, Q3_12.elem((16, 9)), 2)
    assert v1 == v2
    assert v1.coords[0] % 9 == 1


def test_coset_mass_zero_series():
    mu = Measure(TruncSeries.zero(Z12, 64), "okp", Q3_12)
    for d in ((1, 0), (2, 3)):
        v, _ = coset_mass(mu, Q3_12.elem(d), 1)
        assert v.is_zero()


def test_partition_law():
    a = Q3_12.elem((4, 3))
    b = Q3_12.elem((2, 1))
    mu_a = dirac(a, "okp", Z12, 64, okp=Q3_12)
    mu_b = dirac(b, "okp", Z12, 64, okp=Q3_12)
    comb = Measure(mu_a.amice + mu_b.amice.scale(2), "okp", Q3_12)
    ok, guar = partition_check(comb, 1)
    assert ok and guar >= 3


def test_admissibility_negative_control():
    a = Q3_12.elem((4, 3))
    mu = dirac(a, "okp", Z12, 64, okp=Q3_12)
    bad = Measure(TruncSeries(Z12, 64, list(mu.amice.coeffs), 12, 1),
                  "okp", Q3_12)
    with pytest.raises(PrecisionExhausted):
        coset_mass(bad, Q3_12.elem((7, 0)), 1)


def test_moment_examples():
    mu = dirac(5, "zp", Z12, 40)
    for k in range(5):
        assert moment(mu, k).coords[0] == 5 ** k
    # moment(T, 1) = 1, moment(T, 2) = 1
    t = Measure(TruncSeries.x(Z12, 20), "zp")
    assert moment(t, 1).coords[0] == 1
    assert moment(t, 2).coords[0] == 1
    # linearity
    mu2 = dirac(7, "zp", Z12, 40)
    comb = Measure(mu.amice + mu2.amice.scale(3), "zp")
    assert moment(comb, 2).coords[0] == (25 + 3 * 49) % Z12.modulus


def test_moment_vs_riemann():
    a = Q3_12.elem((4, 3))
    mu = dirac(a, "okp", Z12, 64, okp=Q3_12)
    for k in (1, 2, 3):
        rm, guar = riemann_moment(mu, k, 2)
        mm = moment(mu, k)
        assert (rm - mm).coords[0] % 3 ** min(guar, 2) == 0


def test_tilde_equals_units_restriction():
    # coset_mass(tilde(mu), delta, n) = coset_mass(mu, delta, n) for units;
    # mass on p Z_p is 0 after restriction
    z = make_ring(3, 12, "zp")
    mu = Measure(dirac(5, "zp", z, 54).amice + dirac(6, "zp", z, 54).amice,
                 "zp")
    res = restrict_to_units(mu)
    for a in (1, 2, 4, 5):
        v1, g1 = coset_mass(mu, a, 1)
        v2, g2 = coset_mass(res, a, 1)
        q = 3 ** min(g1, g2)
        assert (v1 - v2).coords[0] % q == 0
    v0, g0 = coset_mass(res, 0, 1)
    assert v0.coords[0] % 3 ** g0 == 0


def test_amice_bijection_brute_force():
    # masses at level n resynthesize the Mahler coefficients mod p^{n-c}
    z = make_ring(3, 12, "zp")
    mu = Measure(dirac(4, "zp", z, 54).amice.scale(2) +
                 dirac(7, "zp", z, 54).amice, "zp")
    n = 2
    pn = 3 ** n
    for m in range(4):
        acc = z.zero()
        guar = 12
        for a in range(pn):
            v, g = coset_mass(mu, a, n)
            from math import comb
            acc = acc + v * comb(a, m)
            guar = min(guar, g)
        true = mu.amice.coeff(m)
        assert (acc - true).coords[0] % 3 ** (n - 1) == 0


def _order6_character():
    c3 = make_ring(3, 12, "cyclotomic", level=1)
    gen = next(Q3_12.elem(d) for d in unit_residues(Q3_12, 1)
               if _mult_order_elem(Q3_12.elem(d), 3) == 6)
    return FiniteCharacter.from_generator(Q3_12, 1, c3, gen, -(c3.zeta())), c3


def test_gauss_sum_trivial_constant():
    _, c3 = _order6_character()
    triv = FiniteCharacter.trivial(c3)
    tau = gauss_sum(triv, okp=Q3_12)
    assert tau.den_exp == 0
    assert tau.num == c3.one()
    assert tau.const == 3  # |(O/p^2)^x| / phi(3) = 6/2


def test_twist_trivial_matches_moment():
    _, c3 = _order6_character()
    a = Q3_12.elem((4, 3))
    mu = dirac(a, "okp", c3, 64, okp=Q3_12)
    triv = FiniteCharacter.trivial(c3)
    for k in (0, 1, 2, 3):
        tv = twist_eval(mu, triv, k)
        assert tv.coords[0] % 3 ** 6 == pow(7, k, 3 ** 6)


def test_twist_level1_orthogonality_oracle():
    chi, c3 = _order6_character()
    assert chi.is_primitive()
    a = Q3_12.elem((4, 3))
    mu = dirac(a, "okp", c3, 64, okp=Q3_12)
    tv = twist_eval(mu, chi, 0)
    assert tv == chi.value(Q3_12.from_int(7))
    # k = 1: chi(sigma(a)) * sigma(a)
    tv1 = twist_eval(mu, chi, 1)
    assert tv1 == chi.value(Q3_12.from_int(7)) * 7


def test_twist_factorization_report():
    chi, c3 = _order6_character()
    a = Q3_12.elem((4, 3))
    mu = dirac(a, "okp", c3, 64, okp=Q3_12)
    direct, tau, orbit, match = twist_factorization_report(mu, chi, 0)
    assert match
    direct1, _, _, match1 = twist_factorization_report(mu, chi, 1)
    assert match1


def test_units_invariant_check():
    z = make_ring(3, 10, "zp")
    mu = Measure(dirac(5, "zp", z, 36).amice + dirac(7, "zp", z, 36).amice,
                 "zp")
    res = restrict_to_units(mu)
    assert res.group == "zp_units"
    assert res.check_units_invariant(4)
    # a measure with mass on pZ_p fails the invariant under the units tag
    fake = Measure(dirac(6, "zp", z, 36).amice, "zp_units")
    assert not fake.check_units_invariant(4)


def test_measure_json_round_trip():
    a = Q3_12.elem((4, 3))
    mu = dirac(a, "okp", Z12, 24, okp=Q3_12)
    j = mu.to_json()
    back = Measure.from_json(j)
    assert back.group == "okp"
    assert back.amice.eq_mod(mu.amice)
    assert back.okp == Q3_12
