"""p-adic measures through their Amice series.

A measure on Z_p is its Mahler/Amice transform sum mu(binom(x,n)) T^n; the
group element a acts as (1+T)^a.  The O_Kp variant stores the diagonal
one-variable series together with the fixed trivialization O_Kp = Z_p^2 and
the coordinate-sum map sigma(a0 + a1 w) = a0 + a1; group elements enter the
series only through sigma.  Coset masses on delta*(1 + p^n O) are exact
root-of-unity sums over O_K/p^n computed in cyclotomic quotient rings, with
the p^{2n} division certified by a valuation check, never assumed.

The tilde operator restricts a measure to the units: on series,
h~ = h - (1/p) sum_j h(zeta_p^j (1+T) - 1).  Measures are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

from .rings import (
    DomainError,
    PrecisionExhausted,
    RingElem,
    embed,
    make_composite,
    make_ring,
)
from .series import TruncSeries

__all__ = [
    "Measure",
    "FiniteCharacter",
    "sigma_map",
    "dirac",
    "tilde_series",
    "tilde_mahler",
    "coset_mass",
    "partition_check",
    "moment",
    "riemann_moment",
    "unit_residues",
    "gauss_sum",
    "twist_eval",
]

GROUP_TAGS = ("zp", "zp_units", "okp", "okp_units")


def sigma_map(a):
    """The coordinate-sum trivialization O_Kp -> Z_p, as a canonical integer."""
    if isinstance(a, int):
        return a
    if a.spec.kind in ("ramified_quad", "unramified_quad"):
        return (a.coords[0] + a.coords[1]) % a.spec.modulus
    if a.spec.kind == "zp":
        return a.coords[0]
    raise DomainError("sigma is defined on quadratic ring elements")


@dataclass(frozen=True)
class Measure:
    amice: TruncSeries        # series in T = Q - 1 over the value ring
    group: str                # one of GROUP_TAGS
    okp: object = None        # quadratic RingSpec for the okp tags

    def __post_init__(self):
        if self.group not in GROUP_TAGS:
            raise DomainError(f"unknown group tag {self.group!r}")
        if self.group.startswith("okp") and self.okp is None:
            raise DomainError("okp measures need the quadratic group spec")

    @property
    def spec(self):
        return self.amice.spec

    def check_units_invariant(self, n_check=None):
        """For the units tags: the amice series is tilde-fixed (up to the
        truncation-tail window, like every infinite-series identity here)."""
        if not self.group.endswith("units"):
            return True
        t = tilde_series(self.amice)
        nc = min(n_check or t.n_eff, t.n_eff)
        window = max(1, self.amice.cap - (self.spec.p - 1) * nc)
        return t.truncate(window).eq_mod(self.amice.truncate(window), nc)

    def to_json(self):
        d = {"amice": self.amice.to_json(), "group": self.group}
        if self.okp is not None:
            d["okp"] = self.okp.to_json()
        return d

    @staticmethod
    def from_json(obj):
        from .rings import RingSpec
        okp = RingSpec.from_json(obj["okp"]) if "okp" in obj else None
        return Measure(TruncSeries.from_json(obj["amice"]), obj["group"], okp)


def dirac(a, group, value_spec, cap, okp=None):
    """Dirac measure: amice = (1+T)^a, exponent sigma(a) for the okp tags.

    The exponent uses the canonical integer lift; tests feed small exact
    integers where on-the-nose identities are asserted.
    """
    if group in ("okp", "okp_units"):
        if okp is None and isinstance(a, RingElem):
            okp = a.spec
        if group == "okp_units" and isinstance(a, RingElem) and not a.is_unit():
            raise DomainError("group element is not a unit")
        e = sigma_map(a)
    else:
        e = a if isinstance(a, int) else a.coords[0]
        if group == "zp_units" and e % value_spec.p == 0:
            raise DomainError("group element is not a unit")
    one_plus_t = TruncSeries(value_spec, cap, [1, 1])
    ser = one_plus_t.pow_int(e % value_spec.modulus)
    return Measure(ser, group, okp)


def _level_ring(value_spec, n):
    if n == 0:
        return value_spec
    if value_spec.kind == "zp":
        return make_ring(value_spec.p, value_spec.N, "cyclotomic", level=n)
    if value_spec.kind in ("ramified_quad", "unramified_quad"):
        return make_composite(value_spec, n)
    if value_spec.kind in ("cyclotomic", "composite"):
        if value_spec.level >= n:
            return value_spec
        if value_spec.kind == "cyclotomic":
            return make_ring(value_spec.p, value_spec.N, "cyclotomic", level=n)
        quad = make_ring(value_spec.p, value_spec.N,
                         value_spec.quad_kind + "_quad", quad=value_spec.quad)
        return make_composite(quad, n)
    raise DomainError("unsupported value ring")


def _descend_to(x, base, n_check):
    """Project to the base ring; higher components must vanish mod p^n."""
    if x.spec == base:
        return x
    if x.spec.kind == "composite" and base.kind != "zp":
        keep, rest = x.coords[:2], x.coords[2:]
    else:
        keep, rest = x.coords[: base.rank], x.coords[base.rank:]
    q = x.spec.p ** n_check
    if any(c % q for c in rest):
        raise PrecisionExhausted("value does not descend to the base ring")
    return base.elem(list(keep))


# -- tilde ---------------------------------------------------------------------


def tilde_series(h, p=None):
    """Restriction-to-units on the series side (cyclotomic route, descended)."""
    p = p or h.spec.p
    spec = h.spec
    ext = _level_ring(spec, 1)
    if ext == spec:
        zeta = spec.from_int(-1)  # p = 2 with trivial cyclotomic part
        hext = h
    else:
        zeta = ext.zeta()
        hext = TruncSeries(ext, h.cap,
                           [embed(h.coeff(i), ext) for i in range(h.cap)],
                           h.n_eff, h.shift)
    acc = TruncSeries.zero(hext.spec, h.cap)
    zj = hext.spec.one()
    for j in range(p):
        a = zj - hext.spec.one()
        acc = acc + hext.compose_affine(a, zj)
        zj = zj * zeta
    acc = acc.divide_exact_p(1)
    out = []
    for i in range(h.cap):
        out.append(_descend_to(acc.coeff(i), spec, acc.n_eff))
    rest = TruncSeries(spec, h.cap, out, acc.n_eff, h.shift)
    return _sub_mixed(h, rest)


def _sub_mixed(h, rest):
    # align n_eff: h at full precision minus the reduced-precision sum
    return TruncSeries(h.spec, h.cap,
                       [h.coeff(i) - rest.coeff(i) for i in range(h.cap)],
                       min(h.n_eff, rest.n_eff), h.shift)


def tilde_mahler(h):
    """Independent tilde: expand in powers of Q = 1+T, kill p | n, re-expand."""
    spec, cap = h.spec, h.cap
    # h = sum_m c_m (Q-1)^m -> b_r via binomial transform (exact)
    b = [spec.zero() for _ in range(cap)]
    for m in range(cap):
        cm = h.coeff(m)
        if cm.is_zero():
            continue
        binom = 1
        sign = 1 if m % 2 == 0 else -1
        b[0] = b[0] + cm * (sign * binom)
        for r in range(1, m + 1):
            binom = binom * (m - r + 1) // r
            sign = 1 if (m - r) % 2 == 0 else -1
            b[r] = b[r] + cm * (sign * binom)
    for r in range(0, cap, spec.p):
        b[r] = spec.zero()
    # re-expand in T
    out = [spec.zero() for _ in range(cap)]
    for r in range(cap):
        br = b[r]
        if br.is_zero():
            continue
        binom = 1
        out[0] = out[0] + br
        for m in range(1, r + 1):
            binom = binom * (r - m + 1) // m
            out[m] = out[m] + br * binom
    return TruncSeries(spec, cap, out, h.n_eff, h.shift)


def restrict_to_units(mu):
    """Measure-level tilde; retags to the units variant."""
    new_tag = {"zp": "zp_units", "okp": "okp_units"}.get(mu.group, mu.group)
    return Measure(tilde_series(mu.amice), new_tag, mu.okp)


# -- coset masses ----------------------------------------------------------------


def _eval_table(h, ext, n):
    """Stored-coefficient values h((zeta^s) - 1), s in Z/p^n, with guarantee.

    The table is built from the stored integral coefficients; a nonzero shift
    is the caller's responsibility (the admissibility check charges for it).
    """
    p = h.spec.p
    pn = p ** n
    hs = TruncSeries(h.spec, h.cap, list(h.coeffs), h.n_eff, 0)
    zeta = ext.zeta() if n >= 1 else ext.one()
    table = []
    guar = hs.n_eff
    z = ext.one()
    for s in range(pn):
        val, g = hs.eval(z - ext.one()) if s else hs.eval(ext.zero())
        if s:
            guar = min(guar, g)
        table.append(val)
        z = z * zeta
    return table, guar


def coset_mass(mu, delta, n):
    """mu(delta * U_n): exact root-of-unity sum with certified p^2n division.

    delta is a unit of O_K/p^n (any lift; only its class matters).  Returns
    (value, n_eff): the mass is correct mod p^n_eff.
    """
    if not mu.group.startswith("okp"):
        return _coset_mass_zp(mu, delta, n)
    h = mu.amice
    spec = h.spec
    p = spec.p
    pn = p ** n
    if n == 0:
        hs = TruncSeries(spec, h.cap, list(h.coeffs), h.n_eff, 0)
        v, g = hs.eval(spec.zero())
        if h.shift:
            v = v.divide_exact_p(h.shift)
            g -= h.shift
        return v, g
    okp = mu.okp
    if isinstance(delta, tuple):
        delta = okp.elem(list(delta))
    dl = delta
    if not dl.is_unit():
        raise DomainError("delta must be a unit")
    dinv = dl.inverse()
    u = sigma_map(dinv) % pn
    v = sigma_map(dinv * okp.gen_quad()) % pn
    ext = _level_ring(spec, n)
    table, guar = _eval_table(h, ext, n)
    zeta = ext.zeta()
    zpows = [ext.one()]
    for _ in range(pn - 1):
        zpows.append(zpows[-1] * zeta)
    counts = {}
    for j0 in range(pn):
        for j1 in range(pn):
            s1 = (j0 * u + j1 * v) % pn
            s2 = (-(j0 + j1)) % pn
            key = (s1, s2)
            counts[key] = counts.get(key, 0) + 1
    num = ext.zero()
    for (s1, s2), c in counts.items():
        num = num + table[s1] * zpows[s2] * c
    need = 2 * n + h.shift
    if guar < need + 1:
        raise PrecisionExhausted(
            "precision cannot certify the p^%d division" % (2 * n))
    qmod = p ** guar
    num = ext.elem([c % qmod for c in num.coords])
    if any(c % (p ** need) for c in num.coords):
        raise PrecisionExhausted(
            "numerator valuation < 2n + shift: series is not admissible")
    num = ext.elem([(c // p ** need) % (p ** (guar - need)) for c in num.coords])
    out = _descend_to(num, spec, guar - need)
    return out, guar - need


def _coset_mass_zp(mu, a, n):
    """mu(a + p^n Z_p) for a Z_p-measure (or its unit restriction)."""
    h = mu.amice
    spec = h.spec
    p = spec.p
    pn = p ** n
    if n == 0:
        hs = TruncSeries(spec, h.cap, list(h.coeffs), h.n_eff, 0)
        v, g = hs.eval(spec.zero())
        if h.shift:
            v = v.divide_exact_p(h.shift)
            g -= h.shift
        return v, g
    a = a if isinstance(a, int) else a.coords[0]
    ext = _level_ring(spec, n)
    table, guar = _eval_table(h, ext, n)
    zeta = ext.zeta()
    zpows = [ext.one()]
    for _ in range(pn - 1):
        zpows.append(zpows[-1] * zeta)
    num = ext.zero()
    for t in range(pn):
        num = num + table[t] * zpows[(-t * a) % pn]
    need = n + h.shift
    if guar < need + 1:
        raise PrecisionExhausted("precision cannot certify the p^%d division" % n)
    qmod = p ** guar
    num = ext.elem([c % qmod for c in num.coords])
    if any(c % (p ** need) for c in num.coords):
        raise PrecisionExhausted(
            "numerator valuation < n + shift: series is not admissible")
    num = ext.elem([(c // p ** need) % (p ** (guar - need)) for c in num.coords])
    out = _descend_to(num, spec, guar - need)
    return out, guar - need


def unit_residues(okp, n):
    """Units of O_K/p^n as coordinate pairs (d0, d1)."""
    p = okp.p
    pn = p ** n
    ram = okp.quad_kind == "ramified"
    out = []
    for d0 in range(pn):
        for d1 in range(pn):
            if ram:
                if d0 % p:
                    out.append((d0, d1))
            else:
                if d0 % p or d1 % p:
                    out.append((d0, d1))
    return out


def partition_check(mu, n):
    """sum over delta in U_n/U_{n+1} of mu(delta U_{n+1}) == mu(U_n)."""
    okp = mu.okp
    p = okp.p
    lhs = None
    guar = None
    for c0 in range(p):
        for c1 in range(p):
            d = okp.elem((1 + c0 * p ** n, c1 * p ** n))
            v, g = coset_mass(mu, d, n + 1)
            lhs = v if lhs is None else lhs + v
            guar = g if guar is None else min(guar, g)
    rhs, g2 = coset_mass(mu, okp.one(), n)
    guar = min(guar, g2)
    q = mu.spec.p ** guar
    ok = all((x - y) % q == 0 for x, y in zip(lhs.coords, rhs.coords))
    return ok, guar


# -- moments ----------------------------------------------------------------------


def qddq(h):
    """The operator (1+T) d/dT."""
    return h.derive() * TruncSeries(h.spec, h.cap, [1, 1])


def moment(mu, k):
    """k-th moment: (Qd/dQ)^k amice at T = 0."""
    h = mu.amice
    for _ in range(k):
        h = qddq(h)
    v = h.coeff(0)
    if h.shift:
        return v.divide_exact_p(h.shift)
    return v


def riemann_moment(mu, k, n):
    """Riemann sum over level-n cosets against sigma(x)^k (or x^k on Z_p)."""
    if mu.group.startswith("okp"):
        okp = mu.okp
        acc = None
        guar = None
        for d0, d1 in unit_residues(okp, n):
            dl = okp.elem((d0, d1))
            v, g = coset_mass(mu, dl, n)
            term = v * (sigma_map(dl) ** k if k else 1)
            acc = term if acc is None else acc + term
            guar = g if guar is None else min(guar, g)
        return acc, guar
    p = mu.spec.p
    acc = None
    guar = None
    for a in range(p ** n):
        if mu.group == "zp_units" and a % p == 0:
            continue
        v, g = _coset_mass_zp(mu, a, n)
        term = v * (a ** k if k else 1)
        acc = term if acc is None else acc + term
        guar = g if guar is None else min(guar, g)
    return acc, guar


# -- characters and twists ----------------------------------------------------------


class FiniteCharacter:
    """A character of (O_K/p^n)^x or (Z/p^n)^x tabulated on the whole group."""

    def __init__(self, level, domain, value_spec, table):
        self.level = level
        self.domain = domain          # quadratic RingSpec or "zp"
        self.value_spec = value_spec
        self.table = table            # key -> RingElem
        self._validate()

    def _validate(self):
        if self.level == 0:
            return
        # spot-check multiplicativity on a few products
        keys = list(self.table)
        p = self.value_spec.p
        pn = p ** self.level
        for i in range(0, len(keys), max(1, len(keys) // 8)):
            for j in range(0, len(keys), max(1, len(keys) // 8)):
                a, b = keys[i], keys[j]
                ab = self._mul_key(a, b, pn)
                if ab in self.table:
                    if self.table[ab] != self.table[a] * self.table[b]:
                        raise DomainError("character table is not multiplicative")

    def _mul_key(self, a, b, pn):
        if self.domain == "zp":
            return (a * b) % pn
        x = self.domain.elem(a) * self.domain.elem(b)
        return tuple(c % pn for c in x.coords)

    @staticmethod
    def trivial(value_spec):
        return FiniteCharacter(0, "zp", value_spec, {})

    @staticmethod
    def from_generator(domain, n, value_spec, gen, image):
        """Build a character of a cyclic unit group from one generator."""
        p = value_spec.p
        pn = p ** n
        if domain == "zp":
            order = _mult_order_int(gen, pn)
            target = _unit_count_zp(p, n)
            key = lambda x: x % pn
            mul = lambda x, y: (x * y) % pn
            e = gen
        else:
            order = _mult_order_elem(gen, pn)
            target = len(unit_residues(domain, n))
            key = lambda x: tuple(c % pn for c in x.coords)
            mul = lambda x, y: x * y
            e = gen
        if order != target:
            raise DomainError("element does not generate the unit group")
        if not (image ** order == value_spec.one()):
            raise DomainError("image order does not divide the group order")
        table = {}
        x, v = e, image
        for _ in range(order):
            table[key(x)] = v
            x = mul(x, e)
            v = v * image
        return FiniteCharacter(n, domain, value_spec, table)

    def value(self, x):
        """chi(x); zero for arguments outside the tabulated units."""
        if self.level == 0:
            return self.value_spec.one()
        pn = self.value_spec.p ** self.level
        if self.domain == "zp":
            k = (x if isinstance(x, int) else x.coords[0]) % pn
        else:
            if isinstance(x, int):
                x = self.domain.from_int(x)
            k = tuple(c % pn for c in x.coords)
        got = self.table.get(k)
        return got if got is not None else self.value_spec.zero()

    def is_primitive(self):
        """Does chi fail to factor through level n-1?"""
        if self.level == 0:
            return False
        p = self.value_spec.p
        pn1 = p ** (self.level - 1)
        one = self.value_spec.one()
        if self.domain == "zp":
            for t in range(1, p):
                if self.value(1 + t * pn1) != one:
                    return True
            return False
        for c0 in range(p):
            for c1 in range(p):
                if (c0, c1) == (0, 0):
                    continue
                x = self.domain.from_int(1 + c0 * pn1) + \
                    self.domain.gen_quad() * (c1 * pn1)
                if self.value(x) != one:
                    return True
        return False


def _mult_order_int(g, pn):
    from math import gcd
    x = g % pn
    if gcd(x, pn) != 1:
        raise DomainError("not a unit")
    o = 1
    y = x
    while y != 1:
        y = (y * x) % pn
        o += 1
        if o > pn:
            raise DomainError("order overflow")
    return o


def _unit_count_zp(p, n):
    return p ** n - p ** (n - 1)


def _mult_order_elem(g, pn):
    spec = g.spec
    one_k = tuple(c % pn for c in spec.one().coords)
    o = 1
    y = g
    while tuple(c % pn for c in y.coords) != one_k:
        y = y * g
        o += 1
        if o > pn * pn:
            raise DomainError("order overflow")
    return o


def gauss_sum(chi, okp=None):
    """tau(chi): the normalization constant times p^{-2n} times the double sum.

    Gauss sums are generally not integral, so the value is returned as a
    GaussSum record (num, den_exp, const) representing const * num / p^den_exp
    with num content-stripped.  The empty sum at level 0 is taken to be 1, so
    tau(trivial) is exactly the normalization constant; this convention is
    surfaced rather than hidden.
    """
    value_spec = chi.value_spec
    p = value_spec.p
    n = chi.level
    okp = okp or (chi.domain if chi.domain != "zp" else None)
    if okp is None:
        raise DomainError("gauss_sum needs the quadratic group ring")
    const = _tau_constant(okp)
    if n == 0:
        return GaussSum(value_spec.one(), 0, const)
    pn = p ** n
    ext = _level_ring(value_spec, n)
    zeta = ext.zeta()
    zpows = [ext.one()]
    for _ in range(pn - 1):
        zpows.append(zpows[-1] * zeta)
    w = okp.gen_quad()
    acc = ext.zero()
    for s in range(pn):
        sigma = okp.one() + w * s      # coset representatives (1, s)
        for j in range(pn):
            x = sigma * j
            cv = chi.value(x)
            if cv.is_zero():
                continue
            term = embed(cv, ext) if cv.spec != ext else cv
            acc = acc + term * zpows[(-sigma_map(x)) % pn]
    t = 0
    while t < 2 * n and not any(c % p for c in acc.coords):
        acc = ext.elem([c // p for c in acc.coords])
        t += 1
    return GaussSum(acc, 2 * n - t, const)


@dataclass(frozen=True)
class GaussSum:
    """tau = const * num / p^den_exp; num is content-stripped."""

    num: RingElem
    den_exp: int
    const: object  # Fraction

    def scaled(self):
        """num with the constant folded in (as a ring element)."""
        m = self.num.spec.modulus
        c = (self.const.numerator *
             pow(self.const.denominator, -1, m)) % m
        return self.num * c


def _tau_constant(okp):
    """|(O_K/frakp^eps)^x| / |(Z/q)^x|, eps = floor(1/((p-1) ord_p frakp)) + 1.

    q is the residue size (p ramified, p^2 inert) and |(Z/q)^x| is read as
    phi(q).  The quotient must be a p-unit; a p in the denominator is flagged
    as the normalization ambiguity rather than silently accepted.
    """
    from fractions import Fraction
    p = okp.p
    if okp.quad_kind == "ramified":
        eps = 2 // (p - 1) + 1            # ord_p(frak p) = 1/2
        units = p ** eps - p ** (eps - 1)
        q = p
    else:
        eps = 1 // (p - 1) + 1            # ord_p(frak p) = 1
        units = p ** (2 * eps) - p ** (2 * eps - 2)
        q = p * p
    phi_q = q - q // p
    c = Fraction(units, phi_q)
    if c.denominator % p == 0:
        raise PrecisionExhausted("tau normalization constant is not p-integral")
    return c


def twist_eval(mu, chi, k):
    """The twisted evaluation mu(chi * kappa^k), exactly.

    Computed as the finite sum over unit cosets of chi(delta) times the
    local k-th sigma-moment of mu on delta U_n; for level 0 this is
    tau(trivial)-free, i.e. just the k-th moment.
    """
    n = chi.level
    if n == 0:
        return moment(mu, k)
    h = mu.amice
    for _ in range(k):
        h = qddq(h)
    hk = Measure(h, mu.group, mu.okp)
    vspec = chi.value_spec
    acc = None
    if mu.group.startswith("okp"):
        deltas = unit_residues(mu.okp, n)
        for d in deltas:
            dl = mu.okp.elem(d)
            cv = chi.value(dl)
            if cv.is_zero():
                continue
            mass, g = coset_mass(hk, dl, n)
            term = cv * embed(mass, vspec) if mass.spec != vspec else cv * mass
            acc = term if acc is None else acc + term
        return acc
    for a in range(vspec.p ** n):
        if a % vspec.p == 0:
            continue
        cv = chi.value(a)
        if cv.is_zero():
            continue
        mass, g = _coset_mass_zp(hk, a, n)
        term = cv * embed(mass, vspec) if mass.spec != vspec else cv * mass
        acc = term if acc is None else acc + term
    return acc


def twist_factorization_report(mu, chi, k):
    """Compare the direct twisted evaluation with the Gauss-sum-shaped route.

    The Gauss-sum-shaped product is tau(chi) times the orbit sum over unit cosets
    of chi(delta^{-1}) (d^k amice)(zeta^{sigma(delta)} - 1).  Locally the
    orbit runs over all unit cosets, so the normalization constant of tau
    (which compensates the global-unit collapse of the Artin orbit) must be
    divided back out: the check is num(tau) * orbit == p^den_exp * direct.
    Returns (direct, tau, orbit_sum, match).
    """
    n = chi.level
    direct = twist_eval(mu, chi, k)
    tau = gauss_sum(chi, okp=mu.okp)
    if n == 0:
        return direct, tau, None, None
    h = mu.amice
    for _ in range(k):
        h = qddq(h)
    vspec = chi.value_spec
    ext = _level_ring(vspec, n)
    pn = vspec.p ** n
    table, _ = _eval_table(h, ext, n)
    orbit = ext.zero()
    for d in unit_residues(mu.okp, n):
        dl = mu.okp.elem(d)
        cv = chi.value(dl.inverse())
        if cv.is_zero():
            continue
        cve = embed(cv, ext) if cv.spec != ext else cv
        orbit = orbit + cve * table[sigma_map(dl) % pn]
    taue = embed(tau.num, ext) if tau.num.spec != ext else tau.num
    prod = taue * orbit
    de = embed(direct, ext) if direct.spec != ext else direct
    match = prod == de * (vspec.p ** tau.den_exp)
    return direct, tau, orbit, match
