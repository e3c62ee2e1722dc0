"""Exact noncommutative algebra of polynomial differential operators.

A WeylElement is a normal-ordered sum  sum_T c_T(u,v,s,..) * prod_k z_k^a d_k^b
over N sites, with holomorphic ("h") and anti-holomorphic ("a") sectors that
commute with each other.  Coefficients are exact Poly values, so commutation
checks are structural zero tests rather than tolerance tests.
"""

from __future__ import annotations

from math import comb, factorial
from typing import Dict, Tuple

from .exact import POLY_I, POLY_ONE, Poly, QC, QC_I

# term key: sorted tuple of (sector, site, zdeg, ddeg) with zdeg+ddeg > 0
Key = Tuple[Tuple[str, int, int, int], ...]

TERM_CAP = 2_000_000


class TermCapExceeded(RuntimeError):
    pass


class WeylElement:
    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Key, Poly] | None = None):
        self.terms = {}
        if terms:
            for key, poly in terms.items():
                if not poly.is_zero():
                    self.terms[key] = poly

    @staticmethod
    def zero() -> "WeylElement":
        return WeylElement()

    @staticmethod
    def scalar(value) -> "WeylElement":
        p = value if isinstance(value, Poly) else Poly.const(value)
        return WeylElement({(): p}) if not p.is_zero() else WeylElement()

    @staticmethod
    def monomial(sector: str, site: int, zdeg: int, ddeg: int, coeff=1) -> "WeylElement":
        p = coeff if isinstance(coeff, Poly) else Poly.const(coeff)
        if zdeg == 0 and ddeg == 0:
            return WeylElement.scalar(p)
        return WeylElement({((sector, site, zdeg, ddeg),): p})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self.terms)
        for key, poly in other.terms.items():
            s = out.get(key)
            s = poly if s is None else s + poly
            if s.is_zero():
                out.pop(key, None)
            else:
                out[key] = s
        return WeylElement(out)

    __radd__ = __add__

    def __neg__(self):
        return WeylElement({k: -p for k, p in self.terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, WeylElement):
            other = _coerce(other)
        out: Dict[Key, Poly] = {}
        for k1, p1 in self.terms.items():
            for k2, p2 in other.terms.items():
                coeff = p1 * p2
                for key, factor in _reorder(k1, k2):
                    c = coeff * factor if factor != 1 else coeff
                    s = out.get(key)
                    s = c if s is None else s + c
                    if s.is_zero():
                        out.pop(key, None)
                    else:
                        out[key] = s
                if len(out) > TERM_CAP:
                    raise TermCapExceeded(f"term count exceeded {TERM_CAP}")
        return WeylElement(out)

    def __rmul__(self, other):
        return _coerce(other) * self

    def __eq__(self, other):
        return self.terms == _coerce(other).terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def commutator(self, other: "WeylElement") -> "WeylElement":
        return self * other - other * self

    def coeff_of(self, name: str, power: int) -> "WeylElement":
        """Extract the operator coefficient of a spectral-parameter power."""
        out = {}
        for key, poly in self.terms.items():
            c = poly.coeff_of(name, power)
            if not c.is_zero():
                out[key] = c
        return WeylElement(out)

    def degree_in(self, name: str) -> int:
        return max((p.degree_in(name) for p in self.terms.values()), default=0)

    def transpose(self) -> "WeylElement":
        """Formal transpose: z -> z, d -> -d, factor order reversed."""
        out = WeylElement()
        for key, poly in self.terms.items():
            acc = WeylElement.scalar(poly)
            for sector, site, zdeg, ddeg in key:
                sign = -1 if ddeg % 2 else 1
                # (z^a d^b)^T = (-1)^b d^b z^a, then normal order
                flipped = WeylElement()
                for k in range(min(zdeg, ddeg) + 1):
                    c = sign * factorial(k) * comb(ddeg, k) * comb(zdeg, k)
                    flipped += WeylElement.monomial(sector, site, zdeg - k, ddeg - k, c)
                acc = acc * flipped
            out += acc
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for key in sorted(self.terms):
            ops = []
            for sector, site, zdeg, ddeg in key:
                tag = "" if sector == "h" else "~"
                if zdeg:
                    ops.append(f"z{tag}{site}" + (f"^{zdeg}" if zdeg > 1 else ""))
                if ddeg:
                    ops.append(f"d{tag}{site}" + (f"^{ddeg}" if ddeg > 1 else ""))
            bits.append(f"({self.terms[key]!r})" + "".join(" " + o for o in ops))
        return " + ".join(bits)


def _coerce(value) -> WeylElement:
    if isinstance(value, WeylElement):
        return value
    return WeylElement.scalar(value)


def _reorder(k1: Key, k2: Key):
    """Normal-order the product of two term keys; yields (key, integer factor)."""
    per_site: Dict[Tuple[str, int], Tuple[int, int, int, int]] = {}
    for sector, site, z, d in k1:
        per_site[(sector, site)] = (z, d, 0, 0)
    for sector, site, z, d in k2:
        a = per_site.get((sector, site), (0, 0, 0, 0))
        per_site[(sector, site)] = (a[0], a[1], z, d)
    # expand each site independently: d^b1 z^a2 = sum_k k! C(b1,k) C(a2,k) z^(a2-k) d^(b1-k)
    results = [((), 1)]
    for (sector, site), (a1, b1, a2, b2) in sorted(per_site.items()):
        site_terms = []
        for k in range(min(b1, a2) + 1):
            c = factorial(k) * comb(b1, k) * comb(a2, k)
            z, d = a1 + a2 - k, b1 + b2 - k
            if z or d:
                site_terms.append(((sector, site, z, d), c))
            else:
                site_terms.append((None, c))
        new = []
        for key, f in results:
            for entry, c in site_terms:
                new.append((key + ((entry,) if entry else ()), f * c))
        results = new
    for key, f in results:
        yield tuple(sorted(key)), f


# --- spin generators -------------------------------------------------------

def spin_symbol(sector: str) -> str:
    return "s" if sector == "h" else "sb"


def s_minus(site: int, sector: str = "h") -> WeylElement:
    return WeylElement.monomial(sector, site, 0, 1, -1)


def s_zero(site: int, sector: str = "h") -> WeylElement:
    return WeylElement.monomial(sector, site, 1, 1) + WeylElement.scalar(
        Poly.var(spin_symbol(sector))
    )


def s_plus(site: int, sector: str = "h") -> WeylElement:
    return WeylElement.monomial(sector, site, 2, 1) + WeylElement.monomial(
        sector, site, 1, 0, 2 * Poly.var(spin_symbol(sector))
    )


def total(gen, N: int, sector: str = "h") -> WeylElement:
    out = WeylElement.zero()
    for k in range(1, N + 1):
        out += gen(k, sector)
    return out


# --- Lax and monodromy matrices -------------------------------------------

class OperatorMatrix2x2:
    __slots__ = ("e",)

    def __init__(self, e11, e12, e21, e22):
        self.e = [[e11, e12], [e21, e22]]

    def __getitem__(self, rc):
        return self.e[rc[0]][rc[1]]

    def __matmul__(self, other: "OperatorMatrix2x2") -> "OperatorMatrix2x2":
        a, b = self.e, other.e
        return OperatorMatrix2x2(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )

    def trace(self) -> WeylElement:
        return self.e[0][0] + self.e[1][1]

    def entry(self, i: int, j: int) -> WeylElement:
        """1-based entry access: entry(1,2) is the B operator."""
        return self.e[i - 1][j - 1]


def lax(site: int, spectral: str = "u", sector: str = "h") -> OperatorMatrix2x2:
    """L(u) = u + i * [[S0, S-], [S+, -S0]] at one site."""
    u = WeylElement.scalar(Poly.var(spectral))
    i = POLY_I
    return OperatorMatrix2x2(
        u + i * s_zero(site, sector),
        i * s_minus(site, sector),
        i * s_plus(site, sector),
        u - i * s_zero(site, sector),
    )


def monodromy(N: int, spectral: str = "u", sector: str = "h") -> OperatorMatrix2x2:
    if N < 1:
        raise ValueError("N >= 1")
    out = lax(1, spectral, sector)
    for k in range(2, N + 1):
        out = out @ lax(k, spectral, sector)
    return out


def fcr_residual(N: int, sector: str = "h"):
    """R00'(u-v) T(u) T'(v) - T'(v) T(u) R00'(u-v) as a 4x4 WeylElement matrix.

    Auxiliary indices are flattened as (a, a') -> 2*a + a'; R = (u-v) + i P.
    """
    if N > 3:
        raise ValueError("desk scale: N <= 3")
    T = monodromy(N, "u", sector)
    Tp = monodromy(N, "v", sector)
    uv = Poly.var("u") - Poly.var("v")

    def rmat(a, ap, b, bp) -> Poly:
        val = Poly()
        if a == b and ap == bp:
            val = val + uv
        if a == bp and ap == b:
            val = val + POLY_I
        return val

    def kron(left: OperatorMatrix2x2, right: OperatorMatrix2x2, left_first: bool):
        # entries of the aux-space tensor product; operator order per left_first
        m = [[None] * 4 for _ in range(4)]
        for a in range(2):
            for ap in range(2):
                for b in range(2):
                    for bp in range(2):
                        x, y = left.e[a][b], right.e[ap][bp]
                        m[2 * a + ap][2 * b + bp] = x * y if left_first else y * x
        return m

    TT = kron(T, Tp, True)     # T(u) entries left of T'(v) entries
    TpT = kron(T, Tp, False)   # T'(v) entries left of T(u) entries
    res = [[WeylElement.zero()] * 4 for _ in range(4)]
    for r in range(4):
        for c in range(4):
            acc = WeylElement.zero()
            for k in range(4):
                Rrk = rmat(r // 2, r % 2, k // 2, k % 2)
                if not Rrk.is_zero():
                    acc += WeylElement.scalar(Rrk) * TT[k][c]
                Rkc = rmat(k // 2, k % 2, c // 2, c % 2)
                if not Rkc.is_zero():
                    acc -= TpT[r][k] * WeylElement.scalar(Rkc)
            res[r][c] = acc
    return res
