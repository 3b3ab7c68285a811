"""Lubin-Tate formal groups at desk scale.

A FormalGroup packages a base ring (Z_p or a quadratic extension), a
uniformizer parameter pi', a torsion size q, and a Frobenius polynomial f
with f == pi'*X mod X^2 and f == X^q mod the maximal ideal.  The default
variant is f = pi'*X + X^q; the multiplicative variant (1+X)^p - 1 over Z_p
recovers the classical picture.

Internally the group solves its structural series (logarithm, endomorphisms,
exponential) coefficient by coefficient over exact rationals, so divisions by
pi^k - pi cost nothing in precision; results are certified integral and
converted back to residue arithmetic.  The Coleman norm operator is computed
as a resultant: N_f g (Y) = det g(C) where C is the companion matrix of
f(Z) - Y, which is exact mod (p^N, Y^D).  The independent check forms the
product of g over actual torsion translates in the quotient ring
base[w]/pibar_1(w).
"""

from __future__ import annotations

from fractions import Fraction
from math import inf

from .rings import (
    DomainError,
    PrecisionExhausted,
    RingElem,
    RingSpec,
    _det_bareiss,
    ord_int,
    valuation,
)
from .series import TruncSeries, weierstrass_prep

__all__ = [
    "FormalGroup",
    "build_group",
    "QuotientRing",
    "TorsionTower",
    "build_tower",
]


# -- exact rational coordinate arithmetic (rank 1 or 2) ------------------------


def _fr_lift(elem):
    """Balanced-representative lift to exact rationals.

    The balanced lift keeps small negative constants (like pi^2 = -2) exact,
    so identities such as [pi]^2 = [pi^2] hold on the nose rather than only
    mod a reduced precision.
    """
    m = elem.spec.modulus
    return tuple(Fraction(c if c <= m // 2 else c - m) for c in elem.coords)


def _fr_zero(rank):
    return (Fraction(0),) * rank


def _fr_one(rank):
    return (Fraction(1),) + (Fraction(0),) * (rank - 1)


def _fr_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def _fr_sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _fr_smul(s, a):
    return tuple(s * x for x in a)


def _fr_mul(bc, a, b):
    if len(a) == 1:
        return (a[0] * b[0],)
    qb, qc = bc
    t0 = a[0] * b[0]
    t2 = a[1] * b[1]
    t1 = a[0] * b[1] + a[1] * b[0]
    return (t0 - qc * t2, t1 - qb * t2)


def _fr_inv(bc, a):
    if len(a) == 1:
        return (1 / a[0],)
    qb, qc = bc
    nm = a[0] * a[0] - qb * a[0] * a[1] + qc * a[1] * a[1]
    return ((a[0] - qb * a[1]) / nm, -a[1] / nm)


def _fr_is_zero(a):
    return all(x == 0 for x in a)


def _fr_to_elem(spec, a, n_extra=0):
    """Exact rational coords -> residue coords; denominators must be p-units."""
    m = spec.p ** (spec.N + n_extra)
    out = []
    for x in a:
        den = x.denominator
        if den % spec.p == 0:
            raise PrecisionExhausted("coefficient is not p-integral")
        out.append((x.numerator * pow(den, -1, m)) % m)
    if n_extra:
        return tuple(out)
    return spec.elem(out)


def _fr_poly_mul(bc, a, b, cap):
    rank = len(a[0]) if a else 1
    out = [_fr_zero(rank) for _ in range(cap)]
    for i, ai in enumerate(a):
        if i >= cap:
            break
        if not _fr_is_zero(ai):
            for j, bj in enumerate(b):
                if i + j >= cap:
                    break
                if not _fr_is_zero(bj):
                    out[i + j] = _fr_add(out[i + j], _fr_mul(bc, ai, bj))
    return out


# -- the formal group ----------------------------------------------------------


class FormalGroup:
    """A Lubin-Tate datum with cached structural series."""

    def __init__(self, spec, pi, q, cap, f_coeffs, variant):
        self.spec = spec
        self.pi = pi
        self.q = q
        self.cap = cap
        self.variant = variant
        self.f = TruncSeries(spec, cap, f_coeffs)
        self.f_poly = [self.f.coeff(i) for i in range(q + 1)]
        self._check_frobenius_shape()
        self._log_cache = {}
        self._exp_cache = {}
        self._endo_cache = {}
        self._pibar_cache = {}
        self._pi_power_cache = {0: TruncSeries.x(spec, cap)}

    def _check_frobenius_shape(self):
        if self.f.coeff(0) != self.spec.zero():
            raise DomainError("f must vanish at 0")
        if self.f.coeff(1) != self.pi:
            raise DomainError("f must be pi*X mod X^2")
        if self.f.degree() != self.q:
            raise DomainError("f must be a polynomial of degree q")
        for j in range(2, self.q):
            c = self.f.coeff(j)
            if not c.is_zero() and valuation(c) <= 0:
                raise DomainError("f must reduce to X^q mod the maximal ideal")
        top = self.f.coeff(self.q) - self.spec.one()
        if not top.is_zero() and valuation(top) <= 0:
            raise DomainError("leading coefficient must be a unit lifting 1")

    # -- rational scratch data -------------------------------------------------

    @property
    def _bc(self):
        if self.spec.quad is None:
            return None
        return (Fraction(self.spec.quad[0]), Fraction(self.spec.quad[1]))

    @property
    def _rank(self):
        return self.spec.rank

    def _f_frac(self):
        return [_fr_lift(c) for c in self.f_poly]

    def _pi_frac_pow(self, k):
        out = _fr_one(self._rank)
        pf = _fr_lift(self.pi)
        for _ in range(k):
            out = _fr_mul(self._bc, out, pf)
        return out

    def log_coeffs(self, cap=None):
        """Exact rational coefficients of log_F, solved from log(f) = pi*log."""
        cap = cap or self.cap
        if cap in self._log_cache:
            return self._log_cache[cap]
        bc, rank = self._bc, self._rank
        fp = self._f_frac()
        pif = _fr_lift(self.pi)
        l = [_fr_zero(rank), _fr_one(rank)] + [_fr_zero(rank)] * (cap - 2)
        # rolling ACC = sum_{j<k} l_j f^j, rolling F = f^{k-1}
        F = list(fp) + [_fr_zero(rank)] * (cap - len(fp))
        F = F[:cap]
        acc = [c for c in F]  # l_1 = 1
        for k in range(2, cap):
            # l_k (pi^k - pi) = -acc[k]
            d = _fr_sub(self._pi_frac_pow(k), pif)
            lk = _fr_mul(bc, _fr_smul(Fraction(-1), acc[k]), _fr_inv(bc, d))
            l[k] = lk
            if k < cap - 1:
                F = _fr_poly_mul(bc, F, fp, cap)
                if not _fr_is_zero(lk):
                    for i in range(cap):
                        if not _fr_is_zero(F[i]):
                            acc[i] = _fr_add(acc[i], _fr_mul(bc, lk, F[i]))
        self._log_cache[cap] = l
        return l

    def exp_coeffs(self, cap=None):
        """Exact rational coefficients of exp_F, from f(exp(Y)) = exp(pi*Y)."""
        cap = cap or self.cap
        if cap in self._exp_cache:
            return self._exp_cache[cap]
        bc, rank, q = self._bc, self._rank, self.q
        fp = self._f_frac()
        pif = _fr_lift(self.pi)
        e = [_fr_zero(rank), _fr_one(rank)] + [_fr_zero(rank)] * (cap - 2)
        # maintain powers E^j for 2 <= j <= q
        pows = {1: [c for c in e]}
        for j in range(2, q + 1):
            pows[j] = _fr_poly_mul(bc, pows[j - 1], e, cap)
        for k in range(2, cap):
            rhs = _fr_zero(rank)
            for j in range(2, q + 1):
                cj = fp[j]
                if not _fr_is_zero(cj):
                    rhs = _fr_add(rhs, _fr_mul(bc, cj, pows[j][k]))
            d = _fr_sub(self._pi_frac_pow(k), pif)
            ek = _fr_mul(bc, rhs, _fr_inv(bc, d))
            e[k] = ek
            if _fr_is_zero(ek) or k == cap - 1:
                pows[1][k] = ek
                continue
            # update E^j with (E + ek X^k)^j - E^j
            old = {j: pows[j] for j in range(1, q + 1)}
            pows = {1: old[1][:]}
            pows[1][k] = ek
            mono = [_fr_zero(rank)] * cap
            mono[k] = ek
            for j in range(2, q + 1):
                new = old[j][:]
                # sum_{i>=1} C(j,i) (ek X^k)^i E^{j-i}
                term = mono
                binom = 1
                for i in range(1, j + 1):
                    binom = binom * (j - i + 1) // i
                    base = old[j - i] if j - i >= 1 else None
                    if j - i >= 1:
                        add = _fr_poly_mul(bc, term, base, cap)
                    else:
                        add = term
                    for t in range(cap):
                        if not _fr_is_zero(add[t]):
                            new[t] = _fr_add(new[t], _fr_smul(Fraction(binom), add[t]))
                    if i < j:
                        term = _fr_poly_mul(bc, term, mono, cap)
                        if all(_fr_is_zero(c) for c in term):
                            break
                pows[j] = new
        self._exp_cache[cap] = e
        return e

    def log_series(self, cap=None):
        """log_F as a shifted-integral TruncSeries (log'(0) = 1)."""
        return self._pack_frac(self.log_coeffs(cap), cap or self.cap)

    def exp_series(self, cap=None):
        return self._pack_frac(self.exp_coeffs(cap), cap or self.cap)

    def _pack_frac(self, fr, cap):
        spec = self.spec
        p = spec.p
        S = 0
        for c in fr:
            for x in c:
                v = 0
                d = x.denominator
                while d % p == 0:
                    d //= p
                    v += 1
                S = max(S, v)
        mod = p ** (spec.N + S)
        coeffs = []
        for c in fr:
            row = []
            for x in c:
                den = x.denominator
                v = 0
                while den % p == 0:
                    den //= p
                    v += 1
                row.append((x.numerator * (p ** (S - v)) * pow(den, -1, mod)) % mod)
            coeffs.append(tuple(row))
        big = spec.with_precision(spec.N + S)
        ts = TruncSeries(big, cap, coeffs, spec.N + S, S)
        return ts.normalize_shift() if S == 0 else _fold_shifted(ts, spec)

    def group_law_bivariate(self, cap=8):
        """F(X,Y) = exp_F(log X + log Y) as {(i,j): RingElem}, total deg < cap.

        Solved over exact rationals and certified integral; small caps only
        (the translates machinery never needs the bivariate law).
        """
        bc, rank = self._bc, self._rank
        l = self.log_coeffs(cap)
        e = self.exp_coeffs(cap)

        def bmul(A, B):
            out = {}
            for (i1, j1), a in A.items():
                if _fr_is_zero(a):
                    continue
                for (i2, j2), b in B.items():
                    i, j = i1 + i2, j1 + j2
                    if i + j >= cap or _fr_is_zero(b):
                        continue
                    cur = out.get((i, j), _fr_zero(rank))
                    out[(i, j)] = _fr_add(cur, _fr_mul(bc, a, b))
            return out

        S = {}
        for k in range(1, cap):
            if not _fr_is_zero(l[k]):
                S[(k, 0)] = l[k]
                S[(0, k)] = l[k]
        F = {}
        P = {(0, 0): _fr_one(rank)}
        for k in range(1, cap):
            P = bmul(P, S)
            if not P:
                break
            if not _fr_is_zero(e[k]):
                for key, v in P.items():
                    cur = F.get(key, _fr_zero(rank))
                    F[key] = _fr_add(cur, _fr_mul(bc, e[k], v))
        return {key: _fr_to_elem(self.spec, v) for key, v in F.items()
                if not _fr_is_zero(v)}

    def log_derivative_series(self, cap=None):
        """log_F'(X) as an integral unit TruncSeries (certified)."""
        cap = cap or self.cap
        l = self.log_coeffs(cap + 1)
        fr = [_fr_smul(Fraction(k + 1), l[k + 1]) for k in range(cap)]
        ser = _fr_series_integral(self.spec, fr)
        if ser is None:
            raise PrecisionExhausted("log_F' is not integral (unexpected)")
        return ser

    def log_derivative_is_unit(self, cap=None):
        """log_F'(X) must be an integral unit series (constant term 1)."""
        l = self.log_coeffs(cap)
        for k in range(1, len(l)):
            c = _fr_smul(Fraction(k), l[k])
            for x in c:
                if x.denominator % self.spec.p == 0:
                    return False
        return _fr_sub(l[1], _fr_one(self._rank)) == _fr_zero(self._rank)

    # -- endomorphisms ----------------------------------------------------------

    def endomorphism(self, a, cap=None):
        """[a]_f as an integral TruncSeries, solved from [a] o f = f o [a]."""
        cap = cap or self.cap
        if isinstance(a, int):
            a = self.spec.from_int(a)
        key = (a.coords, cap)
        if key in self._endo_cache:
            return self._endo_cache[key]
        bc, rank, q = self._bc, self._rank, self.q
        fp = self._f_frac()
        pif = _fr_lift(self.pi)
        af = _fr_lift(a)
        c = [_fr_zero(rank), af] + [_fr_zero(rank)] * (cap - 2)
        F = list(fp) + [_fr_zero(rank)] * (cap - len(fp))
        F = F[:cap]
        acc = [_fr_mul(bc, af, t) for t in F]  # c_1 * f^1
        pows = {1: [t for t in c]}
        for j in range(2, q + 1):
            pows[j] = _fr_poly_mul(bc, pows[j - 1], c, cap)
        for k in range(2, cap):
            rhs = _fr_zero(rank)
            for j in range(2, q + 1):
                if not _fr_is_zero(fp[j]):
                    rhs = _fr_add(rhs, _fr_mul(bc, fp[j], pows[j][k]))
            d = _fr_sub(self._pi_frac_pow(k), pif)
            ck = _fr_mul(bc, _fr_sub(rhs, acc[k]), _fr_inv(bc, d))
            c[k] = ck
            if k == cap - 1:
                break
            F = _fr_poly_mul(bc, F, fp, cap)
            if not _fr_is_zero(ck):
                for i in range(cap):
                    if not _fr_is_zero(F[i]):
                        acc[i] = _fr_add(acc[i], _fr_mul(bc, ck, F[i]))
                old = {j: pows[j] for j in range(1, q + 1)}
                pows = {1: old[1][:]}
                pows[1][k] = ck
                mono = [_fr_zero(rank)] * cap
                mono[k] = ck
                for j in range(2, q + 1):
                    new = old[j][:]
                    term = mono
                    binom = 1
                    for i in range(1, j + 1):
                        binom = binom * (j - i + 1) // i
                        if j - i >= 1:
                            add = _fr_poly_mul(bc, term, old[j - i], cap)
                        else:
                            add = term
                        for t in range(cap):
                            if not _fr_is_zero(add[t]):
                                new[t] = _fr_add(new[t], _fr_smul(Fraction(binom), add[t]))
                        if i < j:
                            term = _fr_poly_mul(bc, term, mono, cap)
                            if all(_fr_is_zero(x) for x in term):
                                break
                    pows[j] = new
        out = TruncSeries(self.spec, cap, [_fr_to_elem(self.spec, t) for t in c])
        self._endo_cache[key] = out
        return out

    # -- [pi^m] iterates and distinguished quotients ----------------------------

    def pi_power_series(self, m):
        """[pi^m]_f = f composed with itself m times (exact, d = 1)."""
        if m in self._pi_power_cache:
            return self._pi_power_cache[m]
        g = self.pi_power_series(m - 1)
        out = self.f_of(g)
        self._pi_power_cache[m] = out
        return out

    def f_of(self, g):
        """f(g) for the stored polynomial f, by powers of g."""
        out = TruncSeries.zero(self.spec, g.cap)
        powg = TruncSeries.one(self.spec, g.cap)
        for j in range(1, self.q + 1):
            powg = powg * g
            cj = self.f_poly[j]
            if not cj.is_zero():
                out = out + powg.scale(cj)
        return out

    def pibar(self, m):
        """Distinguished polynomial of [pi^m]/[pi^{m-1}] (degree (q-1) q^{m-1})."""
        if m in self._pibar_cache:
            return self._pibar_cache[m]
        g = self.pi_power_series(m - 1)
        # f(g)/g = sum_j f_j g^(j-1), exact since f(0)=0
        quot = TruncSeries.zero(self.spec, self.cap)
        powg = TruncSeries.one(self.spec, self.cap)
        for j in range(1, self.q + 1):
            cj = self.f_poly[j]
            if not cj.is_zero():
                quot = quot + powg.scale(cj)
            if j < self.q:
                powg = powg * g
        deg = (self.q - 1) * self.q ** (m - 1)
        if deg >= self.cap:
            raise PrecisionExhausted("cap too small for pibar_%d" % m)
        wd = weierstrass_prep(quot)
        if wd.mu != 0 or wd.lam != deg:
            raise PrecisionExhausted("pibar_%d has unexpected invariants" % m)
        self._pibar_cache[m] = wd.dist
        return wd.dist

    def omega_polys(self, n):
        """pibar_m for m <= n and the omega^{+/-} products with their X-free forms."""
        spec = self.spec
        pibars = {m: self.pibar(m) for m in range(1, n + 1)}
        def prod_over(ms):
            acc = TruncSeries.one(spec, self.cap)
            for m in ms:
                acc = acc * TruncSeries(spec, self.cap, list(pibars[m]))
            return acc
        tilde_plus = prod_over([m for m in range(1, n + 1) if m % 2 == 0])
        tilde_minus = prod_over([m for m in range(1, n + 1) if m % 2 == 1])
        x = TruncSeries.x(spec, self.cap)
        return {
            "pibar": pibars,
            "omega_plus": x * tilde_plus,
            "omega_minus": x * tilde_minus,
            "omega_tilde_plus": tilde_plus,
            "omega_tilde_minus": tilde_minus,
        }

    def omega_factorization_check(self, n, n_check=None, target=None,
                                  window=None):
        """omega^+_{2n} * omega~^-_{2n} = unit * target mod (p^n_check, X^window).

        target defaults to [pi^{2n}]_f; pass [p^n]_f explicitly in the
        ramified case (pi^2 = p*unit), where the two sides share their
        distinguished polynomial.  The unit is normalized away by Weierstrass
        preparation of the target: the check is an exact residue match of the
        distinguished parts plus the reconstruction identity on the window.

        A truncation at degree D only pins the factorization mod
        p^{(D - lambda) * v_min(A)}, so the group's cap must exceed the
        comparison window by about n_check/v_min; the caller controls that
        through the constructor cap.
        """
        om = self.omega_polys(2 * n)
        A = om["omega_plus"] * om["omega_tilde_minus"]
        B = target if target is not None else self.pi_power_series(2 * n)
        degA = A.degree()
        wd = weierstrass_prep(B)
        nc = min(n_check or wd.n_eff, wd.n_eff, A.n_eff)
        window = window or self.cap
        ok = (wd.mu == 0 and wd.lam == degA)
        if ok:
            dist_series = TruncSeries(self.spec, A.cap, list(wd.dist))
            ok = dist_series.truncate(window).eq_mod(A.truncate(window), nc)
        if ok:
            recon = (A * wd.unit).canonical()
            ok = recon.truncate(window).eq_mod(B.truncate(window), nc)
        return wd.unit, ok

    # -- Coleman norm operator ---------------------------------------------------

    def coleman_norm(self, g):
        """N_f g as det of g at the companion matrix of f(Z) - Y (exact).

        (N_f g)(f(X)) = prod over the f-fiber of g, which is the defining
        product over torsion translates; no compositional inversion and no
        precision loss are involved.
        """
        g = g.require_integral()
        spec, q, cap = self.spec, self.q, min(g.cap, self.cap)
        zero = TruncSeries.zero(spec, cap)
        one = TruncSeries.one(spec, cap)
        y = TruncSeries.x(spec, cap)
        # last companion column: Z * Z^{q-1} = Z^q = (Y - sum_{1<=i<q} f_i Z^i)/f_q
        top_inv = self.f_poly[q].inverse()
        last_col = [y.scale(top_inv)]
        for i in range(1, q):
            last_col.append(zero - one.scale(self.f_poly[i] * top_inv))
        gtop = g.coeff(cap - 1)
        M = [[one.scale(gtop) if r == c else zero for c in range(q)]
             for r in range(q)]
        for k in range(cap - 2, -1, -1):
            new = [[None] * q for _ in range(q)]
            for r in range(q):
                # M*C: columns 0..q-2 are M's columns shifted; last is M @ last_col
                for c in range(q - 1):
                    new[r][c] = M[r][c + 1]
                acc = zero
                for i in range(q):
                    if not M[r][i].is_zero() and not last_col[i].is_zero():
                        acc = acc + M[r][i] * last_col[i]
                new[r][q - 1] = acc
            gk = g.coeff(k)
            if not gk.is_zero():
                for r in range(q):
                    new[r][r] = new[r][r] + one.scale(gk)
            M = new
        return _det_series_matrix(M, spec, cap)

    def torsion_quotient_ring(self):
        """base[w]/pibar_1(w), housing the nonzero f-torsion."""
        return QuotientRing(self.spec, list(self.pibar(1)))

    def torsion_points(self, E=None, cap=None):
        """All q torsion points [a]_f(w) in the pibar_1 quotient ring."""
        E = E or self.torsion_quotient_ring()
        cap = cap or self.cap
        pts = [E.zero()]
        w = E.x_class()
        one = self.spec.one()
        for a in self._residue_reps()[1:]:
            if isinstance(a, int):
                a = self.spec.from_int(a)
            if a == one:
                pts.append(w)
            else:
                pts.append(E.eval_series(self.endomorphism(a, cap), w))
        return pts

    def _residue_reps(self):
        """Representatives of the q-element residue module O/p-bar."""
        if self.q == self.spec.p:
            return list(range(self.q))
        if self.spec.quad_kind == "unramified":
            p = self.spec.p
            w = self.spec.gen_quad()
            reps = [0]
            for a1 in range(p):
                for a0 in range(p):
                    if (a0, a1) != (0, 0):
                        reps.append(self.spec.from_int(a0) + w * a1)
            return reps
        raise DomainError("torsion size q does not match the residue field")

    def translate_series(self, pt, E, cap=None):
        """T(X) = X [+]_f pt, solved from f(T) = f(X), T(0) = pt.

        Exact rational solve in E with certified divisions by f'(pt); the
        result is reduced to working precision.
        """
        cap = cap or self.cap
        fE = [E.from_base(c) for c in self.f_poly]
        # d_i = sum_{j>=i} f_j C(j,i) pt^{j-i}
        q = self.q
        pt_pows = [E.one()]
        for _ in range(q):
            pt_pows.append(E.mul(pt_pows[-1], pt))
        d = []
        for i in range(q + 1):
            acc = E.zero()
            for j in range(i, q + 1):
                b = 1
                for t in range(i):
                    b = b * (j - t) // (t + 1)
                acc = E.add(acc, E.smul(b, E.mul(fE[j], pt_pows[j - i])))
            d.append(acc)
        # f(pt) must vanish to working precision
        if not E.is_zero_mod(d[0], self.spec.N - 1):
            raise PrecisionExhausted("torsion point fails f(pt) = 0 at precision")
        S = [E.zero() for _ in range(cap)]
        # powers of S maintained up to q
        pows = {1: S[:]}
        for j in range(2, q + 1):
            pows[j] = [E.zero() for _ in range(cap)]
        if E.is_zero(pt):
            S[1] = E.one()
            T = S[:]
            return T
        divide_by_d1 = E.make_divider(d[1])
        for k in range(1, cap):
            rhs = E.from_base(self.f_poly[k]) if k <= q else E.zero()
            for i in range(2, q + 1):
                if not E.is_zero(d[i]):
                    rhs = E.sub(rhs, E.mul(d[i], pows[i][k]))
            sk = divide_by_d1(rhs)
            S[k] = sk
            if k == cap - 1:
                break
            old = {j: pows[j] for j in range(1, q + 1)}
            pows = {1: old[1][:]}
            pows[1][k] = sk
            if E.is_zero(sk):
                for j in range(2, q + 1):
                    pows[j] = old[j]
                continue
            mono = [E.zero()] * cap
            mono[k] = sk
            for j in range(2, q + 1):
                new = old[j][:]
                term = mono
                binom = 1
                for i in range(1, j + 1):
                    binom = binom * (j - i + 1) // i
                    if j - i >= 1:
                        add = _e_poly_mul(E, term, old[j - i], cap)
                    else:
                        add = term
                    for t in range(cap):
                        if not E.is_zero(add[t]):
                            new[t] = E.add(new[t], E.smul(binom, add[t]))
                    if i < j:
                        term = _e_poly_mul(E, term, mono, cap)
                        if all(E.is_zero(x) for x in term):
                            break
                pows[j] = new
        T = S[:]
        T[0] = pt
        return T

    def translates_product(self, g, cap=None):
        """prod over torsion pt of g(X [+] pt), in the extension, descended.

        This is the extension-ring side of the norm-operator law; it shares
        nothing with coleman_norm's resultant route.
        """
        g = g.require_integral()
        cap = min(cap or self.cap, g.cap)
        E = self.torsion_quotient_ring()
        pts = self.torsion_points(E, cap)
        acc = None
        for pt in pts:
            T = self.translate_series(pt, E, cap)
            comp = _e_compose(E, g, T, cap)
            acc = comp if acc is None else _e_poly_mul(E, acc, comp, cap)
        out = []
        for c in acc:
            out.append(E.descend(c, self.spec.N - 1))
        return TruncSeries(self.spec, cap, out, min(g.n_eff, self.spec.N - 1), 0)

    # -- q-coordinate -------------------------------------------------------------

    def q_coordinate(self, omega_p, cap=None):
        """theta(X) = exp(Omega_p^{-1} log_F(X)) - 1 and the conjugated Frobenius.

        Returns a dict with theta, theta_inv (compositional inverse), f_q
        (theta o f o theta_inv), integrality verdicts, and the mod-p
        congruence report f_q(T) = T^q.
        """
        cap = cap or min(self.cap, 32)
        bc, rank = self._bc, self._rank
        if isinstance(omega_p, int):
            omega_p = self.spec.from_int(omega_p)
        if not omega_p.is_unit():
            raise DomainError("Omega_p must be a unit")
        oinv = _fr_inv(bc, _fr_lift(omega_p))
        l = self.log_coeffs(cap)
        h = [_fr_mul(bc, oinv, c) for c in l]
        # ordinary exp via E' = E h', E(0)=1
        E = [_fr_one(rank)] + [_fr_zero(rank)] * (cap - 1)
        hp = [_fr_smul(Fraction(k + 1), h[k + 1]) for k in range(cap - 1)]
        for k in range(1, cap):
            acc = _fr_zero(rank)
            for j in range(k):
                if not _fr_is_zero(E[j]) and k - 1 - j < len(hp):
                    acc = _fr_add(acc, _fr_mul(bc, E[j], hp[k - 1 - j]))
            E[k] = _fr_smul(Fraction(1, k), acc)
        theta = E[:]
        theta[0] = _fr_zero(rank)  # exp(...) - 1
        # rational compositional inverse
        theta_inv = _fr_reversion(bc, rank, theta, cap)
        f_fr = self._f_frac() + [_fr_zero(rank)] * (cap - self.q - 1)
        f_comp = _fr_compose(bc, rank, f_fr[:cap], theta_inv, cap)
        f_q = _fr_compose(bc, rank, theta, f_comp, cap)
        p = self.spec.p
        s_th = _fr_max_denominator_ord(theta, p)
        s_fq = _fr_max_denominator_ord(f_q, p)
        report = {
            "omega_p": omega_p,
            "theta_integral": s_th == 0,
            "theta_max_denominator_ord": s_th,
            "f_q_integral": s_fq == 0,
            "f_q_max_denominator_ord": s_fq,
            "achieved_n_eff": max(self.spec.N - s_fq, 0),
            "theta_slope_matches": theta[1] == oinv,
        }
        if s_th == 0:
            report["theta"] = _fr_series_integral(self.spec, theta)
        if s_fq == 0:
            ser = _fr_series_integral(self.spec, f_q)
            report["f_q"] = ser
            tgt = TruncSeries.monomial(self.spec, cap, self.q)
            report["congruence_mod_p"] = ser.eq_mod(tgt, 1)
        else:
            # congruence checked on the prefix before the first denominator
            report["congruence_mod_p"] = None
            d = next(i for i in range(cap)
                     if any(x.denominator % p == 0 for x in f_q[i]))
            report["integral_prefix_degree"] = d
            pref = _fr_series_integral(self.spec, f_q[:d]) if d else None
            if pref is not None:
                tgt = TruncSeries.monomial(self.spec, d, self.q) if self.q < d \
                    else TruncSeries.zero(self.spec, max(d, 1))
                report["congruence_mod_p_prefix"] = pref.eq_mod(tgt, 1)
        return report


def _fold_shifted(ts, spec):
    """Reduce a big-modulus shifted series to the ring's nominal window."""
    keep = min(spec.N + ts.shift, ts.n_eff)
    out = ts.reduce_precision(keep)
    return out


def _fr_reversion(bc, rank, f, cap):
    inv1 = _fr_inv(bc, f[1])
    g = [_fr_zero(rank), inv1] + [_fr_zero(rank)] * (cap - 2)
    for k in range(2, cap):
        comp = _fr_compose(bc, rank, f[: k + 1], g, k + 1)
        err = comp[k]
        g[k] = _fr_mul(bc, _fr_smul(Fraction(-1), err), inv1)
    return g


def _fr_compose(bc, rank, f, g, cap):
    res = [_fr_zero(rank)] * cap
    for k in range(len(f) - 1, -1, -1):
        res = _fr_poly_mul(bc, res, g, cap)
        if not _fr_is_zero(f[k]):
            res[0] = _fr_add(res[0], f[k])
    return res


def _fr_series_integral(spec, fr):
    """Convert exact-rational coords to a TruncSeries if p-integral, else None."""
    try:
        coeffs = [_fr_to_elem(spec, c) for c in fr]
    except PrecisionExhausted:
        return None
    return TruncSeries(spec, len(fr), coeffs)


def _fr_max_denominator_ord(fr, p):
    s = 0
    for c in fr:
        for x in c:
            d = x.denominator
            v = 0
            while d % p == 0:
                d //= p
                v += 1
            s = max(s, v)
    return s


def _det_series_matrix(M, spec, cap):
    """Determinant of a small matrix of TruncSeries (subset-memo Laplace)."""
    q = len(M)
    if q == 1:
        return M[0][0]
    memo = {}

    def minor(rows, cols_mask, depth):
        key = (rows, cols_mask)
        if key in memo:
            return memo[key]
        r = rows[0]
        acc = TruncSeries.zero(spec, cap)
        sign = 1
        for c in range(q):
            if not (cols_mask >> c) & 1:
                continue
            entry = M[r][c]
            if not entry.is_zero():
                if len(rows) == 1:
                    sub = TruncSeries.one(spec, cap)
                else:
                    sub = minor(rows[1:], cols_mask & ~(1 << c), depth + 1)
                term = entry * sub
                acc = acc + term if sign > 0 else acc - term
            sign = -sign
        memo[key] = acc
        return acc

    return minor(tuple(range(q)), (1 << q) - 1, 0)


def build_group(spec, pi, q, cap, variant="standard"):
    """Assemble a FormalGroup; variant picks f = pi*X + X^q by default."""
    if isinstance(pi, int):
        pi = spec.from_int(pi)
    v = valuation(pi)
    if spec.kind == "zp" or spec.quad_kind == "unramified":
        if v != 1:
            raise DomainError("pi must be a uniformizer (v = 1)")
    else:
        if v != Fraction(1, 2):
            raise DomainError("pi must be a uniformizer (v = 1/2)")
    if variant == "standard":
        coeffs = [spec.zero()] * cap
        coeffs[1] = pi
        if q < cap:
            coeffs[q] = spec.one()
        else:
            raise DomainError("cap must exceed q")
        return FormalGroup(spec, pi, q, cap, coeffs, variant)
    if variant == "multiplicative":
        if spec.kind != "zp":
            raise DomainError("multiplicative variant lives over Z_p")
        p = spec.p
        if pi != spec.from_int(p):
            raise DomainError("multiplicative variant needs pi = p")
        coeffs = [spec.zero()] * cap
        b = 1
        for k in range(1, p + 1):
            b = b * (p - k + 1) // k
            if k < cap:
                coeffs[k] = spec.from_int(b)
        return FormalGroup(spec, pi, p, cap, coeffs, variant)
    raise DomainError(f"unknown variant {variant!r}")


# -- quotient rings and the torsion tower -----------------------------------------


def _e_poly_mul(E, a, b, cap):
    out = [E.zero()] * cap
    for i, ai in enumerate(a):
        if i >= cap:
            break
        if not E.is_zero(ai):
            for j, bj in enumerate(b):
                if i + j >= cap:
                    break
                if not E.is_zero(bj):
                    out[i + j] = E.add(out[i + j], E.mul(ai, bj))
    return out


def _e_compose(E, g, T, cap):
    """g(T) for a base-coefficient series g and extension-coefficient list T."""
    res = [E.zero()] * cap
    for k in range(g.cap - 1, -1, -1):
        res = _e_poly_mul(E, res, T, cap)
        ck = g.coeff(k)
        if not ck.is_zero():
            res[0] = E.add(res[0], E.from_base(ck))
    return res


class QuotientRing:
    """base[X]/(P(X)) for a monic polynomial P over a RingSpec.

    Elements are tuples of base RingElems of length deg P.  Division by
    non-units is supported through an exact rational solve with certified
    p-integrality; the division reports nothing on success and raises
    PrecisionExhausted when the quotient does not exist at working precision.
    """

    def __init__(self, base, modulus):
        self.base = base
        self.modulus = [c if isinstance(c, RingElem) else base.from_int(c)
                        for c in modulus]
        if self.modulus[-1] != base.one():
            raise DomainError("modulus must be monic")
        self.deg = len(self.modulus) - 1
        if self.deg < 1:
            raise DomainError("modulus must have positive degree")

    def zero(self):
        return tuple(self.base.zero() for _ in range(self.deg))

    def one(self):
        return self.from_base(self.base.one())

    def from_base(self, c):
        return tuple([c] + [self.base.zero()] * (self.deg - 1))

    def x_class(self):
        if self.deg == 1:
            return (self.base.zero() - self.modulus[0],)
        return tuple([self.base.zero(), self.base.one()] +
                     [self.base.zero()] * (self.deg - 2))

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def sub(self, a, b):
        return tuple(x - y for x, y in zip(a, b))

    def smul(self, s, a):
        return tuple(x * s for x in a)

    def is_zero(self, a):
        return all(x.is_zero() for x in a)

    def is_zero_mod(self, a, n):
        q = self.base.p ** n
        return all(all(c % q == 0 for c in x.coords) for x in a)

    def mul(self, a, b):
        d = self.deg
        conv = [self.base.zero() for _ in range(2 * d - 1)]
        for i, x in enumerate(a):
            if not x.is_zero():
                for j, y in enumerate(b):
                    if not y.is_zero():
                        conv[i + j] = conv[i + j] + x * y
        for e in range(2 * d - 2, d - 1, -1):
            c = conv[e]
            if not c.is_zero():
                conv[e] = self.base.zero()
                for i in range(d):
                    conv[e - d + i] = conv[e - d + i] - c * self.modulus[i]
        return tuple(conv[:d])

    def eval_series(self, ts, pt):
        """Evaluate a base-coefficient TruncSeries at an element (Horner)."""
        acc = self.zero()
        for k in range(ts.cap - 1, -1, -1):
            acc = self.mul(acc, pt)
            ck = ts.coeff(k)
            if not ck.is_zero():
                acc = self.add(acc, self.from_base(ck))
        return acc

    def flat_coords(self, a):
        out = []
        for x in a:
            out.extend(x.coords)
        return out

    def from_flat(self, flat):
        br = self.base.rank
        return tuple(self.base.elem(flat[i * br:(i + 1) * br])
                     for i in range(self.deg))

    def flat_rank(self):
        return self.deg * self.base.rank

    def _flat_mult_matrix(self, y):
        """Integer matrix of multiplication by y on the flat basis."""
        R = self.flat_rank()
        br = self.base.rank
        cols = []
        for j in range(R):
            flat = [0] * R
            flat[j] = 1
            ej = self.from_flat(flat)
            cols.append(self.flat_coords(self.mul(y, ej)))
        return [[cols[j][i] for j in range(R)] for i in range(R)]

    def norm_to_zp(self, y):
        det = _det_bareiss(self._flat_mult_matrix(y)) % self.base.modulus
        return det

    def valuation(self, y):
        if self.is_zero(y):
            return inf
        det = self.norm_to_zp(y)
        vd = ord_int(det, self.base.p)
        if vd == inf or vd >= self.base.N:
            raise PrecisionExhausted("valuation unresolved in quotient ring")
        return Fraction(vd, self.flat_rank())

    def is_unit(self, y):
        try:
            return self.valuation(y) == 0
        except PrecisionExhausted:
            return False

    def make_divider(self, y):
        """Precompute the rational inverse of mult-by-y; returns b -> b/y.

        Division is exact with certified p-integrality; a p in a denominator
        means the quotient does not exist at working precision.
        """
        R = self.flat_rank()
        M = self._flat_mult_matrix(y)
        A = [[Fraction(M[i][j]) for j in range(R)] +
             [Fraction(1 if i == j else 0) for j in range(R)]
             for i in range(R)]
        for col in range(R):
            piv = next((i for i in range(col, R) if A[i][col] != 0), None)
            if piv is None:
                raise PrecisionExhausted("division by (near) zero divisor")
            A[col], A[piv] = A[piv], A[col]
            pv = A[col][col]
            A[col] = [v / pv for v in A[col]]
            for i in range(R):
                if i != col and A[i][col] != 0:
                    f = A[i][col]
                    A[i] = [A[i][j] - f * A[col][j] for j in range(2 * R)]
        inv = [[A[i][R + j] for j in range(R)] for i in range(R)]
        m = self.base.modulus
        p = self.base.p

        def divide(b):
            rhs = self.flat_coords(b)
            flat = []
            for i in range(R):
                x = sum(inv[i][j] * rhs[j] for j in range(R))
                if x.denominator % p == 0:
                    raise PrecisionExhausted(
                        "quotient not integral at this precision")
                flat.append((x.numerator * pow(x.denominator, -1, m)) % m)
            return self.from_flat(flat)

        return divide

    def divide(self, b, y):
        return self.make_divider(y)(b)

    def inverse(self, y):
        return self.divide(self.one(), y)

    def descend(self, a, n_check):
        """Project to the base when the higher coordinates vanish mod p^n."""
        q = self.base.p ** n_check
        for x in a[1:]:
            if any(c % q for c in x.coords):
                raise PrecisionExhausted("element does not descend to base")
        return a[0]


class TorsionTower:
    """Quotient rings O'_m = base[X]/pibar_m with inclusions and norms."""

    def __init__(self, group, M):
        self.group = group
        self.M = M
        self.rings = {}
        self.alphas = {}
        for m in range(1, M + 1):
            pib = group.pibar(m)
            E = QuotientRing(group.spec, list(pib))
            self.rings[m] = E
            self.alphas[m] = E.x_class()
        self._verify_compatibility()

    def _verify_compatibility(self):
        for m in range(2, self.M + 1):
            E = self.rings[m]
            fa = E.eval_series(self.group.f, self.alphas[m])
            pib_prev = TruncSeries(self.group.spec, self.group.cap,
                                   list(self.group.pibar(m - 1)))
            val = E.eval_series(pib_prev, fa)
            if not E.is_zero_mod(val, self.group.spec.N - 1):
                raise PrecisionExhausted(
                    "tower inclusion fails: pibar_%d(f(alpha_%d)) != 0" % (m - 1, m))

    def include(self, y, m):
        """Map O'_{m-1} -> O'_m via X -> f(X)."""
        E = self.rings[m]
        fa = E.eval_series(self.group.f, self.alphas[m])
        acc = E.zero()
        for k in range(self.rings[m - 1].deg - 1, -1, -1):
            acc = E.mul(acc, fa)
            acc = E.add(acc, E.from_base(y[k]))
        return acc

    def norm(self, m, y):
        """Norm O'_m -> O'_{m-1} (to the base ring for m = 1).

        For m >= 2 the element y (a base-polynomial in alpha_m) is evaluated
        at the companion matrix of the monic polynomial f(Z) - alpha_{m-1}
        over O'_{m-1}; its determinant is the norm.  No divisions occur.
        """
        g = self.group
        if m == 1:
            return self._norm_matrix_det(self.rings[1], y)
        Eprev = self.rings[m - 1]
        q = g.q
        top_inv = g.f_poly[q].inverse()  # unit in the base ring
        A = self.alphas[m - 1]
        # last companion column: Z^q = (alpha_{m-1} - sum_{1<=i<q} f_i Z^i)/f_q
        last_col = [Eprev.smul(top_inv, A)]
        for i in range(1, q):
            last_col.append(Eprev.smul(g.f_poly[i] * top_inv * (-1), Eprev.one()))
        deg = len(y)
        zeroE, oneE = Eprev.zero(), Eprev.one()
        ytop = y[deg - 1]
        M = [[Eprev.smul(ytop, oneE) if r == c else zeroE for c in range(q)]
             for r in range(q)]
        for k in range(deg - 2, -1, -1):
            new = [[None] * q for _ in range(q)]
            for r in range(q):
                for c in range(q - 1):
                    new[r][c] = M[r][c + 1]
                acc = zeroE
                for i in range(q):
                    if not Eprev.is_zero(M[r][i]) and not Eprev.is_zero(last_col[i]):
                        acc = Eprev.add(acc, Eprev.mul(M[r][i], last_col[i]))
                new[r][q - 1] = acc
            yk = y[k]
            if not yk.is_zero():
                for r in range(q):
                    new[r][r] = Eprev.add(new[r][r], Eprev.smul(yk, oneE))
            M = new
        return _laplace_det_ring(Eprev, M)

    def _norm_matrix_det(self, E, y):
        """Norm to the base ring: determinant of mult-by-y over the base."""
        d = E.deg
        base = E.base
        cols = []
        for j in range(d):
            ej = tuple(base.one() if i == j else base.zero() for i in range(d))
            cols.append(E.mul(y, ej))
        rows = [[cols[j][i] for j in range(d)] for i in range(d)]
        return _laplace_det_elems(base, rows)


def _laplace_det_elems(base, rows):
    q = len(rows)
    memo = {}

    def minor(r, mask):
        key = (r, mask)
        if key in memo:
            return memo[key]
        acc = base.zero()
        sign = 1
        for c in range(q):
            if not (mask >> c) & 1:
                continue
            entry = rows[r][c]
            if not entry.is_zero():
                sub = base.one() if r == q - 1 else minor(r + 1, mask & ~(1 << c))
                term = entry * sub
                acc = acc + term if sign > 0 else acc - term
            sign = -sign
        memo[key] = acc
        return acc

    return minor(0, (1 << q) - 1)


def _laplace_det_ring(E, rows):
    """Determinant of a small matrix with QuotientRing entries."""
    q = len(rows)
    memo = {}

    def minor(r, mask):
        key = (r, mask)
        if key in memo:
            return memo[key]
        acc = E.zero()
        sign = 1
        for c in range(q):
            if not (mask >> c) & 1:
                continue
            entry = rows[r][c]
            if not E.is_zero(entry):
                sub = E.one() if r == q - 1 else minor(r + 1, mask & ~(1 << c))
                term = E.mul(entry, sub)
                acc = E.add(acc, term) if sign > 0 else E.sub(acc, term)
            sign = -sign
        memo[key] = acc
        return acc

    return minor(0, (1 << q) - 1)


def build_tower(group, M):
    return TorsionTower(group, M)
