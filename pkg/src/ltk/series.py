"""Truncated power-series kernel over any RingSpec.

A TruncSeries is a polynomial of degree < cap whose coefficients are exact
ring elements stored mod p^N.  Two bookkeeping fields ride along:

  n_eff   the stored coefficients are meaningful mod p^n_eff (<= spec.N);
  shift   the represented series is p^(-shift) times the stored one.

The shift is how series with p in denominators (formal logs and exps) are
carried: a single global exponent, never per-coefficient fractions.  The
"true" precision of the represented series is n_eff - shift.  Most series
have shift 0 and the arithmetic fast-paths that case.
"""

from __future__ import annotations

from fractions import Fraction
from math import floor, inf

from .rings import (
    DomainError,
    PrecisionExhausted,
    RingElem,
    RingSpec,
    embed,
    make_composite,
    make_ring,
    ord_int,
    valuation,
)

__all__ = [
    "TruncSeries",
    "WeierstrassData",
    "weierstrass_prep",
    "poly_divmod_monic",
    "mu_lambda_by_roots",
    "iwasawa_invariants_by_roots",
    "formal_log",
    "formal_exp",
    "reversion",
]


def _as_coords(spec, c):
    if isinstance(c, RingElem):
        if c.spec != spec:
            raise DomainError("coefficient from a different ring")
        return c.coords
    if isinstance(c, int):
        return spec.from_int(c).coords
    return tuple(int(a) % spec.modulus for a in c)


class TruncSeries:
    __slots__ = ("spec", "cap", "coeffs", "n_eff", "shift")

    def __init__(self, spec, cap, coeffs, n_eff=None, shift=0):
        if cap < 1:
            raise DomainError("cap must be >= 1")
        cs = [_as_coords(spec, c) for c in coeffs[:cap]]
        zero = (0,) * spec.rank
        cs.extend([zero] * (cap - len(cs)))
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "cap", cap)
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "n_eff", spec.N if n_eff is None else n_eff)
        object.__setattr__(self, "shift", shift)
        if self.n_eff <= self.shift:
            raise PrecisionExhausted("series has no significant digits left")

    def __setattr__(self, *a):
        raise AttributeError("TruncSeries is immutable")

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zero(spec, cap):
        return TruncSeries(spec, cap, [])

    @staticmethod
    def one(spec, cap):
        return TruncSeries(spec, cap, [1])

    @staticmethod
    def x(spec, cap):
        return TruncSeries(spec, cap, [0, 1])

    @staticmethod
    def monomial(spec, cap, k, c=1):
        coeffs = [0] * cap
        if k < cap:
            coeffs[k] = c
        return TruncSeries(spec, cap, coeffs)

    # -- accessors ------------------------------------------------------------

    def coeff(self, i):
        if i >= self.cap:
            return self.spec.zero()
        return RingElem(self.spec, self.coeffs[i])

    def constant_term(self):
        return self.coeff(0)

    def degree(self):
        """Largest index with a nonzero stored coefficient, or -1."""
        for i in range(self.cap - 1, -1, -1):
            if any(self.coeffs[i]):
                return i
        return -1

    def order(self):
        """Smallest index with a nonzero stored coefficient, or inf."""
        for i in range(self.cap):
            if any(self.coeffs[i]):
                return i
        return inf

    def __repr__(self):
        return (f"TruncSeries({self.spec.kind}, cap={self.cap}, "
                f"n_eff={self.n_eff}, shift={self.shift})")

    def is_zero(self):
        return all(not any(c) for c in self.coeffs)

    def eq_mod(self, other, n=None):
        """Coefficientwise congruence mod p^n (default: joint precision)."""
        a, b = _align(self, other)
        if n is None:
            n = min(a.n_eff, b.n_eff)
        q = self.spec.p ** n
        for ca, cb in zip(a.coeffs, b.coeffs):
            if any((x - y) % q for x, y in zip(ca, cb)):
                return False
        return True

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        a, b = _align(self, other)
        add = self.spec.add_coords
        cs = [add(x, y) for x, y in zip(a.coeffs, b.coeffs)]
        return TruncSeries(self.spec, a.cap, cs,
                           min(a.n_eff, b.n_eff), a.shift)

    def __sub__(self, other):
        a, b = _align(self, other)
        sub = self.spec.sub_coords
        cs = [sub(x, y) for x, y in zip(a.coeffs, b.coeffs)]
        return TruncSeries(self.spec, a.cap, cs,
                           min(a.n_eff, b.n_eff), a.shift)

    def __neg__(self):
        m = self.spec.modulus
        cs = [tuple((-x) % m for x in c) for c in self.coeffs]
        return TruncSeries(self.spec, self.cap, cs, self.n_eff, self.shift)

    def scale(self, c):
        """Multiply by a ring element or integer scalar."""
        spec = self.spec
        if isinstance(c, int):
            cs = [spec.smul_coords(c, a) for a in self.coeffs]
        else:
            cc = _as_coords(spec, c)
            mul = spec.mul_coords
            cs = [mul(cc, a) for a in self.coeffs]
        return TruncSeries(spec, self.cap, cs, self.n_eff, self.shift)

    def __mul__(self, other):
        if isinstance(other, (int, RingElem)):
            return self.scale(other)
        if self.spec != other.spec:
            raise DomainError("mixed ring specs")
        cap = min(self.cap, other.cap)
        cs = _mul_lists(self.spec, self.coeffs, other.coeffs, cap)
        return TruncSeries(self.spec, cap, cs,
                           min(self.n_eff, other.n_eff),
                           self.shift + other.shift)

    __rmul__ = __mul__

    def pow_int(self, e):
        if e < 0:
            raise DomainError("negative power of a series")
        out = TruncSeries.one(self.spec, self.cap)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base if e > 1 else base
            e >>= 1
        return out

    def truncate(self, cap2):
        if cap2 >= self.cap:
            return self
        return TruncSeries(self.spec, cap2, list(self.coeffs[:cap2]),
                           self.n_eff, self.shift)

    def extend_cap(self, cap2):
        """Zero-pad to a larger cap (the tail is NOT claimed correct)."""
        if cap2 <= self.cap:
            return self.truncate(cap2)
        return TruncSeries(self.spec, cap2, list(self.coeffs),
                           self.n_eff, self.shift)

    def lift_precision(self, N2):
        """Reinterpret canonical residues at a larger modulus; n_eff is kept."""
        spec2 = self.spec.with_precision(N2)
        return TruncSeries(spec2, self.cap, [c for c in self.coeffs],
                           self.n_eff, self.shift)

    def reduce_precision(self, N2):
        spec2 = self.spec.with_precision(N2)
        q = spec2.modulus
        cs = [tuple(x % q for x in c) for c in self.coeffs]
        return TruncSeries(spec2, self.cap, cs, min(self.n_eff, N2), self.shift)

    def canonical(self):
        """Reduce stored residues mod p^n_eff (junk above n_eff zeroed)."""
        q = self.spec.p ** self.n_eff
        cs = [tuple(x % q for x in c) for c in self.coeffs]
        return TruncSeries(self.spec, self.cap, cs, self.n_eff, self.shift)

    def normalize_shift(self):
        """Strip certified p-content from the stored coefficients."""
        if self.shift == 0:
            return self
        s = self.canonical()
        p = self.spec.p
        content = self.n_eff
        for c in s.coeffs:
            for x in c:
                if x:
                    content = min(content, ord_int(x, p))
            if content == 0:
                break
        t = min(self.shift, content)
        if t == 0:
            return s
        q = p ** t
        cs = [tuple(x // q for x in c) for c in s.coeffs]
        return TruncSeries(self.spec, self.cap, cs, self.n_eff - t, self.shift - t)

    def require_integral(self):
        """Normalize and fail loudly if a denominator survives."""
        s = self.normalize_shift()
        if s.shift:
            raise PrecisionExhausted(
                "series is not integral at this precision (shift=%d)" % s.shift)
        return s

    def divide_exact_p(self, k):
        """Exact coefficientwise division by p^k (certified)."""
        if k == 0:
            return self
        s = self.canonical()
        q = self.spec.p ** k
        cs = []
        for i, c in enumerate(s.coeffs):
            if any(x % q for x in c):
                raise PrecisionExhausted(
                    "coefficient %d not divisible by p^%d" % (i, k))
            cs.append(tuple(x // q for x in c))
        return TruncSeries(self.spec, self.cap, cs, self.n_eff - k, self.shift)

    # -- composition and evaluation -------------------------------------------

    def compose(self, inner):
        """self(inner); inner must be integral with positive-valuation constant."""
        if inner.shift:
            raise DomainError("inner series of a composition must be integral")
        c0 = inner.constant_term()
        if not c0.is_zero() and valuation(c0) <= 0:
            raise DomainError("inner constant term must have positive valuation")
        cap = min(self.cap, inner.cap)
        spec = self.spec
        zero = (0,) * spec.rank
        res = [zero] * cap
        for k in range(self.cap - 1, -1, -1):
            res = _mul_lists(spec, res, inner.coeffs, cap)
            ck = self.coeffs[k]
            if any(ck):
                res[0] = spec.add_coords(res[0], ck)
        return TruncSeries(spec, cap, res,
                           min(self.n_eff, inner.n_eff), self.shift)

    def compose_affine(self, a, b):
        """self(a + b*X) for ring elements a (positive valuation) and b."""
        spec = self.spec
        ac, bc = _as_coords(spec, a), _as_coords(spec, b)
        cap = self.cap
        zero = (0,) * spec.rank
        res = [zero] * cap
        mul, add = spec.mul_coords, spec.add_coords
        for k in range(cap - 1, -1, -1):
            # res <- res*(a + bX) + c_k
            new = [zero] * cap
            for i in range(cap):
                if any(res[i]):
                    new[i] = add(new[i], mul(res[i], ac))
                    if i + 1 < cap:
                        new[i + 1] = add(new[i + 1], mul(res[i], bc))
            ck = self.coeffs[k]
            if any(ck):
                new[0] = add(new[0], ck)
            res = new
        return TruncSeries(spec, cap, res, self.n_eff, self.shift)

    def derive(self):
        spec = self.spec
        cs = [spec.smul_coords(k, self.coeffs[k]) for k in range(1, self.cap)]
        cs.append((0,) * spec.rank)
        return TruncSeries(spec, self.cap, cs, self.n_eff, self.shift)

    def invert(self):
        """Multiplicative inverse; requires a unit constant term."""
        s = self.require_integral()
        spec = s.spec
        c0 = s.constant_term()
        if not c0.is_unit():
            raise DomainError("invert requires a unit constant term")
        inv0 = c0.inverse().coords
        mul, sub = spec.mul_coords, spec.sub_coords
        zero = (0,) * spec.rank
        out = [zero] * s.cap
        out[0] = inv0
        for k in range(1, s.cap):
            acc = zero
            for j in range(0, k):
                cj = s.coeffs[k - j]
                if any(cj) and any(out[j]):
                    acc = spec.add_coords(acc, mul(out[j], cj))
            out[k] = mul(inv0, sub(zero, acc))
        return TruncSeries(spec, s.cap, out, s.n_eff, 0)

    def eval(self, x):
        """Evaluate at a positive-valuation point in an extension ring.

        Returns (value, guarantee): the value is correct mod p^guarantee,
        guarantee = min(n_eff - shift, floor(cap * v(x))).
        """
        s = self.require_integral()
        target = x.spec
        vx = valuation(x) if not x.is_zero() else inf
        if vx <= 0:
            raise DomainError("evaluation point must have positive valuation")
        acc = target.zero()
        for k in range(s.cap - 1, -1, -1):
            acc = acc * x
            ck = s.coeffs[k]
            if any(ck):
                acc = acc + embed(RingElem(s.spec, ck), target)
        if vx is inf:
            guar = s.n_eff
        else:
            guar = min(s.n_eff, floor(s.cap * vx))
        return acc, guar

    # -- serialization ----------------------------------------------------------

    def to_json(self):
        d = {
            "spec": self.spec.to_json(),
            "D": self.cap,
            "N_eff": self.n_eff,
            "coeffs": [list(c) for c in self.coeffs],
        }
        if self.shift:
            d["shift"] = self.shift
        return d

    @staticmethod
    def from_json(obj):
        spec = RingSpec.from_json(obj["spec"])
        return TruncSeries(spec, obj["D"], obj["coeffs"],
                           obj["N_eff"], obj.get("shift", 0))


def _align(a, b):
    """Common cap and common shift (scaling stored coefficients up)."""
    if isinstance(b, (int, RingElem)):
        b = TruncSeries(a.spec, a.cap, [b], a.spec.N, 0)
    if a.spec != b.spec:
        raise DomainError("mixed ring specs")
    cap = min(a.cap, b.cap)
    s = max(a.shift, b.shift)
    a2 = a._shift_up(s - a.shift).truncate(cap)
    b2 = b._shift_up(s - b.shift).truncate(cap)
    return a2, b2


def _shift_up(self, d):
    if d == 0:
        return self
    q = self.spec.p ** d
    m = self.spec.modulus
    cs = [tuple((x * q) % m for x in c) for c in self.coeffs]
    return TruncSeries(self.spec, self.cap, cs,
                       min(self.n_eff + d, self.spec.N), self.shift + d)


TruncSeries._shift_up = _shift_up


def _mul_lists(spec, a, b, cap):
    """Truncated product of coefficient lists (coord tuples)."""
    zero = (0,) * spec.rank
    out = [zero] * cap
    if spec.rank == 1:
        m = spec.modulus
        raw = [0] * cap
        for i in range(min(len(a), cap)):
            ai = a[i][0]
            if ai:
                jmax = min(len(b), cap - i)
                for j in range(jmax):
                    bj = b[j][0]
                    if bj:
                        raw[i + j] += ai * bj
        return [(v % m,) for v in raw]
    mul, add = spec.mul_coords, spec.add_coords
    for i in range(min(len(a), cap)):
        ai = a[i]
        if any(ai):
            jmax = min(len(b), cap - i)
            for j in range(jmax):
                bj = b[j]
                if any(bj):
                    out[i + j] = add(out[i + j], mul(ai, bj))
    return out


# -- formal log / exp ---------------------------------------------------------


def formal_log(g, terms=None):
    """log of a series with constant term 1; denominators go into the shift.

    The stored coefficients are p^S times the true ones with S = max ord_p(k)
    over the term indices used; true precision is n_eff - shift after the
    content strip.
    """
    if g.shift:
        raise DomainError("formal_log input must be integral")
    if g.constant_term() != g.spec.one():
        raise DomainError("formal_log requires constant term 1")
    spec = g.spec
    p, N = spec.p, spec.N
    h = g - TruncSeries.one(spec, g.cap)
    kmax = min(terms or (g.cap - 1), g.cap - 1)
    if kmax < 1 or h.is_zero():
        return TruncSeries.zero(spec, g.cap)
    S = max(ord_int(k, p) for k in range(1, kmax + 1))
    N_int = N + S
    big_spec = spec.with_precision(N_int)
    hb = TruncSeries(big_spec, g.cap, list(h.coeffs), N_int, 0)
    acc = TruncSeries.zero(big_spec, g.cap)
    power = TruncSeries.one(big_spec, g.cap)
    for k in range(1, kmax + 1):
        power = power * hb
        if power.is_zero():
            break
        a = ord_int(k, p)
        c = (p ** (S - a)) * pow(k // p ** a, -1, big_spec.modulus)
        if k % 2 == 0:
            c = -c
        acc = acc + power.scale(c)
    return _pack_shifted(acc, spec, g.n_eff, S)


def formal_exp(f, terms=None):
    """exp of a series with zero constant term, via inflated-precision sums.

    Accepts a shifted input.  The sum is exact at an inflated modulus, so the
    true precision carried through is the input's n_eff - shift (comfortably
    within the worst-case sum-of-ord_p(k) loss bound).
    """
    spec = f.spec
    p, N = spec.p, spec.N
    if not f.constant_term().is_zero():
        raise DomainError("formal_exp requires zero constant term")
    kmax = min(terms or (f.cap - 1), f.cap - 1)
    if kmax < 1:
        return TruncSeries.one(spec, f.cap)
    fact_ord = 0
    for k in range(1, kmax + 1):
        fact_ord += ord_int(k, p)
    S = f.shift * kmax + fact_ord
    t_out = f.n_eff - f.shift
    N_int = N + S
    big_spec = spec.with_precision(N_int)
    fb = TruncSeries(big_spec, f.cap, list(f.coeffs), N_int, 0)
    acc = TruncSeries.one(big_spec, f.cap).scale(p ** S)
    power = TruncSeries.one(big_spec, f.cap)
    fo = 0
    fact_unit = 1
    for k in range(1, kmax + 1):
        power = power * fb
        if power.is_zero():
            break
        a = ord_int(k, p)
        fo += a
        fact_unit = (fact_unit * (k // p ** a)) % big_spec.modulus
        sc = (p ** (S - f.shift * k - fo)) * pow(fact_unit, -1, big_spec.modulus)
        acc = acc + power.scale(sc)
    return _pack_shifted(acc, spec, t_out, S, allow_nonintegral=True)


def _pack_shifted(acc_big, spec, true_prec, S, allow_nonintegral=True):
    """Strip content from a p^S-scaled big-modulus accumulator and repack.

    true_prec bounds the represented series' true precision; the result has
    n_eff - shift = min(true_prec, what the representation can carry).
    """
    p, N = spec.p, spec.N
    content = S
    for c in acc_big.coeffs:
        for x in c:
            if x:
                content = min(content, ord_int(x, p))
        if content == 0:
            break
    shift = S - content
    if shift and not allow_nonintegral:
        raise PrecisionExhausted("denominator survives at this precision")
    q = p ** content
    keep = min(true_prec + shift, N)
    if keep <= shift:
        raise PrecisionExhausted("no significant digits survive the shift")
    mod = p ** keep
    cs = [tuple((x // q) % mod for x in c) for c in acc_big.coeffs]
    return TruncSeries(spec, acc_big.cap, cs, keep, shift)


def reversion(f):
    """Compositional inverse of f = c1*X + ... with c1 a unit."""
    if f.shift:
        raise DomainError("reversion of a shifted series is not supported")
    if not f.constant_term().is_zero():
        raise DomainError("reversion requires zero constant term")
    c1 = f.coeff(1)
    if not c1.is_unit():
        raise DomainError("reversion requires a unit linear coefficient")
    spec, cap = f.spec, f.cap
    inv1 = c1.inverse()
    g = [spec.zero().coords, inv1.coords] + [spec.zero().coords] * (cap - 2)
    for k in range(2, cap):
        gs = TruncSeries(spec, k + 1, g[: k + 1], spec.N, 0)
        err = f.truncate(k + 1).compose(gs).coeff(k)
        # [X^k] f(g + t X^k) = [X^k] f(g) + c1 t, so t = -err/c1
        g[k] = (-(err * inv1)).coords
    return TruncSeries(spec, cap, g, f.n_eff, 0)


# -- Weierstrass preparation ---------------------------------------------------


class WeierstrassData:
    """mu, lambda, distinguished polynomial, and unit cofactor of a series."""

    __slots__ = ("mu", "lam", "dist", "unit", "n_eff")

    def __init__(self, mu, lam, dist, unit, n_eff):
        self.mu = mu
        self.lam = lam
        self.dist = dist      # tuple of RingElem, monic, length lam+1
        self.unit = unit      # TruncSeries with unit constant term
        self.n_eff = n_eff    # reconstruction holds mod p^n_eff

    def dist_series(self, cap=None):
        cap = cap or self.unit.cap
        return TruncSeries(self.unit.spec, cap, list(self.dist))

    def __repr__(self):
        return f"WeierstrassData(mu={self.mu}, lambda={self.lam})"


def poly_divmod_monic(f, P, cap=None):
    """Divide by a monic polynomial (tuple of RingElem): exact, no p-divisions.

    Returns (Q, R) with f = Q*P + R and deg R < deg P, all mod X^cap.
    """
    spec = f.spec
    cap = cap or f.cap
    lam = len(P) - 1
    Pc = [_as_coords(spec, c) for c in P]
    work = [c for c in f.coeffs[:cap]]
    work += [(0,) * spec.rank] * (cap - len(work))
    q = [(0,) * spec.rank] * cap
    sub, mul = spec.sub_coords, spec.mul_coords
    for k in range(cap - 1, lam - 1, -1):
        c = work[k]
        if any(c):
            q[k - lam] = c
            for i in range(lam + 1):
                if any(Pc[i]):
                    work[k - lam + i] = sub(work[k - lam + i], mul(c, Pc[i]))
    Q = TruncSeries(spec, cap, q, f.n_eff, f.shift)
    R = TruncSeries(spec, max(lam, 1), work[:lam] if lam else [0], f.n_eff, f.shift)
    return Q, R


def weierstrass_prep(f, max_iter=None):
    """Factor f = p^mu * distinguished * unit over Z_p or a quadratic ring.

    mu is the largest integer with p^mu dividing every coefficient; lambda is
    the least index where f/p^mu has a unit coefficient.  The distinguished
    factor is produced by quadratic Hensel iteration against the monic
    candidate X^lambda and verified by reconstruction.
    """
    spec = f.spec
    if spec.kind not in ("zp", "ramified_quad", "unramified_quad"):
        raise DomainError("weierstrass_prep needs Z_p or quadratic coefficients")
    s = f.require_integral().canonical()
    p = spec.p
    mu = s.n_eff
    for c in s.coeffs:
        for x in c:
            if x:
                mu = min(mu, ord_int(x, p))
        if mu == 0:
            break
    if mu >= s.n_eff:
        raise PrecisionExhausted("all coefficients vanish at this precision")
    q = p ** mu
    F = TruncSeries(spec, s.cap, [tuple(x // q for x in c) for c in s.coeffs],
                    s.n_eff - mu, 0)
    lam = next((i for i in range(F.cap) if F.coeff(i).is_unit()), None)
    if lam is None:
        raise DomainError("no unit coefficient after removing p^mu "
                          "(content has fractional valuation or lambda exceeds cap)")
    # initial factorization: P = X^lam, U = top part of F
    P = [spec.zero() for _ in range(lam)] + [spec.one()]
    U = TruncSeries(spec, F.cap, list(F.coeffs[lam:]), F.n_eff, 0)
    it_cap = max_iter or (2 * (F.n_eff * spec.ramification_index).bit_length() + 8)
    for _ in range(it_cap):
        E = F - TruncSeries(spec, F.cap, [c.coords for c in P],
                            F.n_eff, 0) * U
        if E.canonical().is_zero():
            break
        A = E * U.invert()
        Q, R = poly_divmod_monic(A, P)
        P = [P[i] + R.coeff(i) for i in range(lam)] + [spec.one()]
        U = U + Q * U
    else:
        raise PrecisionExhausted("weierstrass preparation did not converge")
    if not U.constant_term().is_unit():
        raise PrecisionExhausted("unit factor lost its unit constant term")
    return WeierstrassData(mu, lam, tuple(P), U.canonical(), F.n_eff)


# -- root-of-unity oracle -------------------------------------------------------


def _cyclo_extension(spec, n):
    if spec.kind == "zp":
        return make_ring(spec.p, spec.N, "cyclotomic", level=n)
    if spec.kind in ("ramified_quad", "unramified_quad"):
        return make_composite(spec, n)
    raise DomainError("unsupported base for the cyclotomic oracle")


def _descend(x, base, n_check=None):
    """Project an element with vanishing non-base components back to base.

    The non-base coordinates must vanish mod p^n_check (full precision by
    default); otherwise the element genuinely lives upstairs.
    """
    spec = x.spec
    if spec == base:
        return x
    if spec.kind == "composite" and base.kind != "zp":
        keep, rest = list(x.coords[:2]), x.coords[2:]
    else:
        keep, rest = list(x.coords[: base.rank]), x.coords[base.rank:]
    q = spec.p ** (spec.N if n_check is None else n_check)
    if any(c % q for c in rest):
        raise PrecisionExhausted("element does not descend to the base ring")
    return base.elem(keep)


def mu_lambda_by_roots(f, n_values):
    """ord_p of prod over primitive p^n-th roots zeta of f(zeta - 1), per n.

    Returns a list of (n, Fraction).  The product is computed exactly in the
    cyclotomic extension and must descend to the base ring.
    """
    s = f.require_integral()
    if s.is_zero():
        raise DomainError("zero series")
    spec = s.spec
    p = spec.p
    out = []
    for n in n_values:
        ext = _cyclo_extension(spec, n)
        zeta = ext.zeta()
        one = ext.one()
        emb = [embed(RingElem(spec, c), ext) for c in s.coeffs]
        prod = ext.one()
        z = one
        for j in range(p ** n):
            z = z if j == 0 else z * zeta
            if j == 0 or j % p == 0:
                continue
            pt = z - one
            acc = ext.zero()
            for k in range(s.cap - 1, -1, -1):
                acc = acc * pt
                if any(emb[k].coords):
                    acc = acc + emb[k]
            prod = prod * acc
        # each factor is correct mod p^min(n_eff, cap * v(zeta-1))
        phi_n = p ** (n - 1) * (p - 1)
        guar = min(s.n_eff, s.cap // phi_n)
        base_val = _descend(prod, spec, n_check=guar)
        v = valuation(base_val)
        if v >= guar:
            raise PrecisionExhausted(
                "precision insufficient to resolve the valuation at n=%d" % n)
        out.append((n, v))
    return out


def iwasawa_invariants_by_roots(f, n_max=4):
    """(mu, lambda, n0) solved from consecutive root-product valuations.

    Levels are computed lazily: once two consecutive solutions agree the
    oracle stops, so the expensive high levels are touched only when the
    invariants actually need them.
    """
    s = f.require_integral()
    p = s.spec.p
    phis = {n: p ** (n - 1) * (p - 1) for n in range(1, n_max + 2)}
    vals = {}
    best = None
    for n in range(1, n_max + 1):
        vals[n] = mu_lambda_by_roots(s, [n])[0][1]
        if n == 1:
            continue
        d_phi = phis[n] - phis[n - 1]
        mu = (vals[n] - vals[n - 1]) / d_phi
        lam = vals[n - 1] - mu * phis[n - 1]
        if mu < 0 or lam < 0 or lam.denominator != 1 or mu.denominator != 1:
            best = None
            continue
        # Newton slopes of a distinguished polynomial are >= 1/lambda, so both
        # levels are in the asymptotic regime once phi(p^{n-1}) > lambda
        if lam < phis[n - 1]:
            return int(mu), int(lam), n - 1
        if best and best[:2] == (mu, lam):
            return int(mu), int(lam), best[2]
        best = (mu, lam, n - 1)
    raise PrecisionExhausted("root-product valuations did not stabilize; "
                             "raise n_max or the precision")
