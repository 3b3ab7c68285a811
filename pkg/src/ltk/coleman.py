"""Coleman interpolation over the torsion tower and the tilde-log pipeline.

A norm-compatible system of units across the tower levels determines a
unique series g with g(alpha_m) = beta_m (the d = 1 case); here it is
reconstructed by Newton-style CRT over the quotient rings base[X]/pibar_m,
which is finite and exact, while the classical fixed-point characterization
of the norm operator serves as an independent oracle.

The tilde-log of a unit series g is

    log g - (1/#F_f[f]) log((N_f g) o f) = (1/q) log(g^q / (N_f g o f)),

computed term by term with certified exact divisions; the final division by
q replays the integrality bootstrap numerically: first the d(log)-combination
is certified integral, then the series itself, with the offending coefficient
reported on failure.
"""

from __future__ import annotations

from dataclasses import dataclass
from .rings import DomainError, PrecisionExhausted, RingElem, valuation
from .series import TruncSeries
from .measures import Measure

__all__ = [
    "CompatibleSystem",
    "system_from_series",
    "interpolate",
    "norm_fixed_point",
    "tilde_log",
    "mu_zero",
]


@dataclass
class CompatibleSystem:
    """Tower values beta_m; interpolation works for any value system, while
    genuine Coleman systems additionally satisfy Nm(beta_m) = beta_{m-1}
    (equivalent to coming from a norm-operator fixed point)."""

    tower: object
    values: dict  # level m -> element of O'_m (tuple of base RingElems)

    def __post_init__(self):
        tw = self.tower
        for m in range(1, tw.M + 1):
            if m not in self.values:
                raise DomainError("missing level %d value" % m)
            if not tw.rings[m].is_unit(self.values[m]):
                raise DomainError("beta_%d is not a unit" % m)

    def norm_compatible(self, n_check=None):
        """Check Nm_m(beta_m) = beta_{m-1}; returns the agreement verdict."""
        tw = self.tower
        spec = tw.group.spec
        nc = n_check or (spec.N - 1)
        q = spec.p ** nc
        for m in range(2, tw.M + 1):
            nm = tw.norm(m, self.values[m])
            prev = self.values[m - 1]
            for x, y in zip(nm, prev):
                if any((a - b) % q for a, b in zip(x.coords, y.coords)):
                    return False
        return True

    def require_norm_compatible(self, n_check=None):
        if not self.norm_compatible(n_check):
            raise DomainError("norm compatibility fails in the tower")
        return self

    def to_json(self):
        return {
            "levels": self.tower.M,
            "values": {str(m): self.tower.rings[m].flat_coords(v)
                       for m, v in self.values.items()},
        }


def system_from_series(tower, g):
    """Evaluate a unit series at the tower generators alpha_m."""
    vals = {}
    for m in range(1, tower.M + 1):
        E = tower.rings[m]
        vals[m] = E.eval_series(g, tower.alphas[m])
    return CompatibleSystem(tower, vals)


def interpolate(sys):
    """The series g with g(alpha_m) = beta_m, mod (prod pibar_m, p^n_eff).

    Newton-style CRT: g is corrected level by level by multiples of the
    partial products of the pibar_m; the divisions in the quotient rings are
    exact with certified integrality and cost the reported precision.
    """
    tw = sys.tower
    G = tw.group
    spec = G.spec
    cap = G.cap
    total_deg = sum(tw.rings[m].deg for m in range(1, tw.M + 1))
    if total_deg > cap:
        raise PrecisionExhausted("cap too small for the interpolation modulus")
    # level 1: lift beta_1 as a polynomial of degree < deg pibar_1
    E1 = tw.rings[1]
    coeffs = list(sys.values[1]) + [spec.zero()] * (cap - E1.deg)
    g = TruncSeries(spec, cap, coeffs)
    mod_poly = TruncSeries(spec, cap, list(G.pibar(1)))
    n_eff = spec.N
    for m in range(2, tw.M + 1):
        E = tw.rings[m]
        am = tw.alphas[m]
        ga = E.eval_series(g, am)
        target = sys.values[m]
        diff = E.sub(target, ga)
        den = E.eval_series(mod_poly, am)
        h = E.divide(diff, den)
        # one digit per division is the worst case at desk scale
        n_eff -= 1
        lift = TruncSeries(spec, cap, list(h) + [spec.zero()] * (cap - E.deg))
        g = g + mod_poly * lift
        mod_poly = mod_poly * TruncSeries(spec, cap, list(G.pibar(m)))
    info = {
        "modulus_degree": total_deg,
        "n_eff": n_eff,
        "levels": tw.M,
    }
    return g.truncate(cap), info


def reduce_mod_system_ideal(g, tower, n_eff=None):
    """Canonical representative of g mod (prod pibar_m, p^n_eff)."""
    from .series import poly_divmod_monic
    G = tower.group
    spec = G.spec
    prod = TruncSeries(spec, G.cap, [1])
    for m in range(1, tower.M + 1):
        prod = prod * TruncSeries(spec, G.cap, list(G.pibar(m)))
    deg = prod.degree()
    P = [prod.coeff(i) for i in range(deg + 1)]
    _, r = poly_divmod_monic(g, P)
    r = r.canonical()
    if n_eff:
        return r.reduce_precision(n_eff)
    return r


def norm_fixed_point(G, seed, max_iter=None, target=None):
    """Iterate g -> N_f g from a unit seed until stabilization.

    Returns (g, info); info records the iteration count and the congruence
    level at which consecutive iterates agreed.  Non-convergence within the
    hard cap is an error, as the contraction is only empirical.
    """
    if not seed.constant_term().is_unit():
        raise DomainError("seed must be a unit series")
    target = target or (G.spec.N - 1)
    cap_iter = max_iter or (4 * G.spec.N + 8)
    g = seed
    history = []
    for it in range(1, cap_iter + 1):
        g2 = G.coleman_norm(g)
        # agreement level of g2 vs g
        lvl = _agreement_level(g2, g)
        history.append(lvl)
        g = g2
        if lvl >= target:
            return g, {"iterations": it, "agreement": lvl, "history": history}
    raise PrecisionExhausted(
        "norm-operator iteration did not stabilize (history %s)" % history)


def _agreement_level(a, b):
    p = a.spec.p
    lvl = min(a.n_eff, b.n_eff)
    for ca, cb in zip(a.coeffs, b.coeffs):
        for x, y in zip(ca, cb):
            d = (x - y) % (p ** lvl)
            if d:
                v = 0
                while d % p == 0:
                    d //= p
                    v += 1
                lvl = min(lvl, v)
    return lvl


def _log_one_units(u, terms=None):
    """log of a unit series congruent to 1 mod the maximal ideal.

    Purely p-adic convergence: terms (u-1)^k/k with certified divisions;
    (u-1)^k has coefficients in m^k, which covers the division by k.
    """
    spec = u.spec
    p, N = spec.p, spec.N
    one = TruncSeries.one(spec, u.cap)
    h = u - one
    for i in range(h.cap):
        c = h.coeff(i)
        if not c.is_zero() and valuation(c) <= 0:
            raise DomainError("log argument is not congruent to 1 mod m")
    e = spec.ramification_index
    kmax = terms or (e * (N + 2) + 4)
    acc = TruncSeries.zero(spec, u.cap)
    power = one
    from .rings import ord_int
    for k in range(1, kmax + 1):
        power = power * h
        if power.canonical().is_zero():
            break
        a = ord_int(k, p)
        term = power.scale(pow(k // p ** a, -1, spec.modulus))
        term = term.divide_exact_p(a)
        if k % 2 == 0:
            term = -term
        acc = _add_min(acc, term)
    return acc


def _add_min(a, b):
    return TruncSeries(a.spec, min(a.cap, b.cap),
                       [a.coeff(i) + b.coeff(i) for i in range(min(a.cap, b.cap))],
                       min(a.n_eff, b.n_eff), 0)


def tilde_log(G, g, bootstrap=True):
    """(1/q) log(g^q / (N_f g o f)) with the integrality bootstrap replayed.

    Returns (series, report).  The report carries the bootstrap verdict and
    the effective precision; an integrality failure raises with the offending
    coefficient.
    """
    g = g.require_integral()
    if not g.constant_term().is_unit():
        raise DomainError("tilde_log requires a unit series")
    spec = G.spec
    q = G.q
    qord = 1 if q == spec.p else 2
    P = G.coleman_norm(g).compose(G.f.truncate(g.cap))
    u = (g.pow_int(q)) * P.invert()
    S = _log_one_units(u)
    report = {}
    if bootstrap:
        # d(tilde-log) = S'/(q log_F') must be integral before dividing S by q
        logp = G.log_derivative_series(g.cap)
        dS = S.derive()
        A = dS * logp.invert()
        try:
            A.divide_exact_p(qord)
            report["d_bootstrap_integral"] = True
        except PrecisionExhausted:
            report["d_bootstrap_integral"] = False
    try:
        out = S.divide_exact_p(qord)
    except PrecisionExhausted as exc:
        bad = _first_nondivisible(S, qord)
        raise PrecisionExhausted(
            "tilde_log not integral at precision: coefficient %d (%s)"
            % (bad, exc)) from exc
    report["n_eff"] = out.n_eff
    report["q"] = q
    return out, report


def _first_nondivisible(S, k):
    p = S.spec.p
    qq = p ** k
    s = S.canonical()
    for i in range(s.cap):
        if any(x % qq for x in s.coeffs[i]):
            return i
    return -1


def log_unit_series(G, g):
    """log g = log(g(0)) + log(g/g(0)) as a shifted series plus scalar data.

    Used by the measure-side comparisons; the unit-part logarithm has
    denominators bounded by the X-order growth and is returned shifted.
    """
    from .series import formal_log
    c0 = g.constant_term()
    norm = g.scale(c0.inverse())
    return formal_log(norm)


def partial_dlog(G, lt, k):
    """k-th moment of the X-side measure: ((1/log_F') d/dX)^k at 0."""
    logp = G.log_derivative_series(lt.cap)
    inv = logp.invert()
    h = lt
    for _ in range(k):
        h = h.derive() * inv
    return h.coeff(0)


def mu_zero(G, sys, cap=None):
    """The measure pipeline: interpolate, tilde-log, tag as an okp measure.

    The amice series is kept in the X coordinate (Omega_p = 1 diagonal
    reading); its moments use the integral operator (1/log_F') d/dX.  The
    first-moment bookkeeping (the d = 1 shadow of the cokernel map) is
    recorded in the report, not enforced.
    """
    g, info = interpolate(sys)
    lt, rep = tilde_log(G, g)
    rep["interpolation"] = info
    rep["first_moment"] = partial_dlog(G, lt, 1)
    okp = G.spec if G.spec.quad is not None else None
    mu = Measure(lt, "okp_units" if okp is not None else "zp_units", okp)
    return mu, g, rep
