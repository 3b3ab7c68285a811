import cmath
import math

import pytest

from ltk.elliptic import (
    EllipticDomainError,
    Lattice,
    coset_reps,
    delta_canonical,
    distribution_defect,
    psi_robert,
    scale_lattice,
    sublattice_index,
)

L = Lattice(1j, 1.0)
Z = 0.3 + 0.21j


def test_lattice_validation():
    with pytest.raises(EllipticDomainError):
        Lattice(1.0, 1j)  # wrong orientation
    assert L.legendre_defect < 1e-10


def test_eta_values_square_lattice():
    e1, e2 = L.eta_pair()
    assert abs(e2 - math.pi) < 1e-12
    assert abs(e1 + 1j * math.pi) < 1e-12


def test_delta_two_truncations_and_g_route():
    D = L.delta()
    assert abs(D.imag) < 1e-12 * abs(D)
    assert abs(D - L.delta(terms=40)) <= 1e-10 * abs(D)
    assert abs(L.delta_from_g() - D) < 1e-10 * abs(D)


def test_sigma_odd_and_quasiperiodic():
    assert abs(L.sigma(-Z) + L.sigma(Z)) < 1e-12
    e1, e2 = L.eta_pair()
    s = L._sigma_raw(Z)
    up = L._sigma_raw(Z + 1j)
    assert abs(up + s * cmath.exp(e1 * (Z + 1j / 2))) < 1e-8 * abs(up)
    right = L._sigma_raw(Z + 1.0)
    assert abs(right + s * cmath.exp(e2 * (Z + 0.5))) < 1e-8 * abs(right)


def test_wp_differential_equation():
    w, wp = L.wp(Z), L.wp_prime(Z)
    lhs = wp ** 2
    rhs = 4 * w ** 3 - L.g2() * w - L.g3()
    assert abs(lhs - rhs) <= 1e-9 * max(abs(lhs), 1.0)


def test_wp_even_periodic():
    assert abs(L.wp(-Z) - L.wp(Z)) < 1e-10 * abs(L.wp(Z))
    assert abs(L.wp(Z + 3 - 2j) - L.wp(Z)) < 1e-10 * abs(L.wp(Z))


def test_theta_periodicity_and_evenness():
    # exact phase periodicity on 6-division points; modulus everywhere
    z6 = (1j + 5.0) / 6
    t = L.theta_robert(z6)
    assert abs(L.theta_robert(z6 + 3j - 2) - t) <= 1e-8 * abs(t)
    tz = L.theta_robert(Z)
    assert abs(abs(L.theta_robert(Z + 3j - 2)) - abs(tz)) <= 1e-8 * abs(tz)
    assert abs(L.theta_robert(-Z) - tz) <= 1e-10 * abs(tz)


def test_homogeneity_degrees():
    c = 1 + 2j
    Lc = scale_lattice(L, c)
    assert abs(Lc.sigma(c * Z) - c * L.sigma(Z)) < 1e-10 * abs(L.sigma(Z))
    assert abs(Lc.wp(c * Z) - L.wp(Z) / c ** 2) < 1e-10 * abs(L.wp(Z) / c ** 2)
    assert abs(Lc.delta() - L.delta() / c ** 12) < 1e-10 * abs(L.delta() / c ** 12)
    assert abs(Lc.eta_form(c * Z) - L.eta_form(Z) / c) < 1e-10 * abs(L.eta_form(Z) / c)
    # theta homogeneity degree 0
    assert abs(Lc.theta_robert(c * Z) - L.theta_robert(Z)) < 1e-8 * abs(L.theta_robert(Z))


def test_sublattice_machinery():
    a = 2 + 1j
    Linv = scale_lattice(L, 1 / a)
    assert sublattice_index(L, Linv) == 5
    reps = coset_reps(L, Linv)
    assert len(reps) == 5
    assert sublattice_index(L, scale_lattice(L, 1 / (1 + 1j))) == 2
    # not a sublattice at all
    with pytest.raises(EllipticDomainError):
        sublattice_index(L, Lattice(1j, 0.7))
    # index coprime to 6 enforced in delta
    with pytest.raises(EllipticDomainError):
        delta_canonical(L, scale_lattice(L, 0.5))


def test_delta_twelfth_power_identity():
    a = 2 + 1j
    Linv = scale_lattice(L, 1 / a)
    d, rep = delta_canonical(L, Linv)
    tgt = L.delta() ** 5 / Linv.delta()
    assert abs(d ** 12 - tgt) <= 1e-8 * abs(tgt)
    # cross-machinery identity: theta-quotient constant equals Delta^N/Delta'
    assert rep["theta_constant_rel_err"] <= 1e-8
    assert rep["mu12_ambiguity"] is True


def test_psi_degenerate_and_periodic():
    # index 1: empty product, delta(L, L) = 1
    d, _ = delta_canonical(L, Lattice(1j, 1.0), check=False)
    assert abs(d - 1.0) < 1e-12
    a = 2 + 1j
    Linv = scale_lattice(L, 1 / a)
    p1 = psi_robert(Z, L, Linv)
    assert abs(psi_robert(Z + 1 + 1j, L, Linv) - p1) <= 1e-9 * abs(p1)


def test_distribution_relation_mod_mu12():
    r = distribution_defect(L, 2 + 1j, 2 - 1j, Z)
    assert abs(abs(r) - 1.0) <= 1e-6
    assert abs(r ** 12 - 1.0) <= 1e-6
    # the branch defect is one fixed 12th root of unity across z
    r2 = distribution_defect(L, 2 + 1j, 2 - 1j, 0.17 - 0.4j)
    assert abs(r - r2) <= 1e-6


def test_pole_detection():
    a = 2 + 1j
    Linv = scale_lattice(L, 1 / a)
    rho = coset_reps(L, Linv)[1]
    with pytest.raises(EllipticDomainError):
        psi_robert(rho, L, Linv)
