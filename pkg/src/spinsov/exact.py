"""Exact scalar arithmetic for the operator algebra.

QC is a complex number with rational real/imag parts; Poly is a multivariate
polynomial in named formal scalars (u, v, s, sb, ...) with QC coefficients.
AffineForm is the degree<=1 specialization used for propagator exponents.
All identities checked structurally ("residual is the zero polynomial") go
through these types; floats enter only at instantiation.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple


class QC:
    """Complex number with exact rational components."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    _COERCIBLE = (int, float, Fraction, complex)

    @staticmethod
    def of(value) -> "QC":
        if isinstance(value, QC):
            return value
        if isinstance(value, complex):
            return QC(Fraction(value.real), Fraction(value.imag))
        return QC(value)

    def __add__(self, other):
        other = QC.of(other)
        return QC(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return QC(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-QC.of(other))

    def __rsub__(self, other):
        return QC.of(other) + (-self)

    def __mul__(self, other):
        other = QC.of(other)
        return QC(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def conj(self) -> "QC":
        return QC(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __eq__(self, other):
        other = QC.of(other)
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}*i"
        return f"({self.re}{'+' if self.im > 0 else '-'}{abs(self.im)}*i)"


QC_ONE = QC(1)
QC_I = QC(0, 1)


class Poly:
    """Multivariate polynomial over QC; keys are frozen (var, power) tuples."""

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Tuple[Tuple[str, int], ...], QC] | None = None):
        self.terms = {}
        if terms:
            for mono, c in terms.items():
                if not c.is_zero():
                    self.terms[mono] = c

    @staticmethod
    def const(value) -> "Poly":
        c = QC.of(value)
        return Poly({(): c}) if not c.is_zero() else Poly()

    @staticmethod
    def var(name: str) -> "Poly":
        return Poly({((name, 1),): QC_ONE})

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        if not isinstance(other, Poly):
            if not isinstance(other, (QC,) + QC._COERCIBLE):
                return NotImplemented
            other = Poly.const(other)
        out = dict(self.terms)
        for mono, c in other.terms.items():
            acc = out.get(mono)
            s = c if acc is None else acc + c
            if s.is_zero():
                out.pop(mono, None)
            else:
                out[mono] = s
        p = Poly()
        p.terms = out
        return p

    __radd__ = __add__

    def __neg__(self):
        p = Poly()
        p.terms = {m: -c for m, c in self.terms.items()}
        return p

    def __sub__(self, other):
        res = self + (-other if isinstance(other, Poly) else -Poly.const(other))
        return res

    def __rsub__(self, other):
        return Poly.const(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Poly):
            if not isinstance(other, (QC,) + QC._COERCIBLE):
                return NotImplemented
            other = Poly.const(other)
        out: Dict[Tuple[Tuple[str, int], ...], QC] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = _merge_monomials(m1, m2)
                c = c1 * c2
                acc = out.get(mono)
                s = c if acc is None else acc + c
                if s.is_zero():
                    out.pop(mono, None)
                else:
                    out[mono] = s
        p = Poly()
        p.terms = out
        return p

    __rmul__ = __mul__

    def __eq__(self, other):
        other = other if isinstance(other, Poly) else Poly.const(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def coeff_of(self, name: str, power: int) -> "Poly":
        """Collect the coefficient of name**power (name removed from monomials)."""
        out = Poly()
        acc = {}
        for mono, c in self.terms.items():
            d = dict(mono)
            if d.pop(name, 0) == power:
                key = tuple(sorted(d.items()))
                acc[key] = acc.get(key, QC(0)) + c
        out.terms = {m: c for m, c in acc.items() if not c.is_zero()}
        return out

    def degree_in(self, name: str) -> int:
        deg = 0
        for mono in self.terms:
            deg = max(deg, dict(mono).get(name, 0))
        return deg

    def instantiate(self, binding: Mapping[str, complex]) -> complex:
        total = 0j
        for mono, c in self.terms.items():
            val = complex(c)
            for name, power in mono:
                val *= binding[name] ** power
            total += val
        return total

    def variables(self) -> set:
        out = set()
        for mono in self.terms:
            for name, _ in mono:
                out.add(name)
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for mono, c in sorted(self.terms.items()):
            factors = [f"{n}^{p}" if p > 1 else n for n, p in mono]
            bits.append("*".join([repr(c)] + factors) if factors else repr(c))
        return " + ".join(bits)


def _merge_monomials(m1, m2):
    d = dict(m1)
    for name, power in m2:
        d[name] = d.get(name, 0) + power
    return tuple(sorted((n, p) for n, p in d.items() if p))


POLY_ZERO = Poly()
POLY_ONE = Poly.const(1)
POLY_I = Poly.const(QC_I)


class AffineForm:
    """Exact affine combination c0 + sum c_k * sym_k of formal basis symbols."""

    __slots__ = ("const", "lin")

    def __init__(self, const=0, lin: Mapping[str, QC] | None = None):
        self.const = QC.of(const)
        self.lin: Dict[str, QC] = {}
        if lin:
            for k, v in lin.items():
                v = QC.of(v)
                if not v.is_zero():
                    self.lin[k] = v

    @staticmethod
    def sym(name: str, coeff=1) -> "AffineForm":
        return AffineForm(0, {name: QC.of(coeff)})

    @staticmethod
    def of(value) -> "AffineForm":
        if isinstance(value, AffineForm):
            return value
        return AffineForm(QC.of(value))

    def __add__(self, other):
        other = AffineForm.of(other)
        lin = dict(self.lin)
        for k, v in other.lin.items():
            s = lin.get(k, QC(0)) + v
            if s.is_zero():
                lin.pop(k, None)
            else:
                lin[k] = s
        return AffineForm(self.const + other.const, lin)

    __radd__ = __add__

    def __neg__(self):
        return AffineForm(-self.const, {k: -v for k, v in self.lin.items()})

    def __sub__(self, other):
        return self + (-AffineForm.of(other))

    def __rsub__(self, other):
        return AffineForm.of(other) + (-self)

    def scale(self, factor) -> "AffineForm":
        factor = QC.of(factor)
        return AffineForm(self.const * factor, {k: v * factor for k, v in self.lin.items()})

    def is_const(self) -> bool:
        return not self.lin

    def __eq__(self, other):
        other = AffineForm.of(other)
        return self.const == other.const and self.lin == other.lin

    def __hash__(self):
        return hash((self.const, frozenset(self.lin.items())))

    def instantiate(self, binding: Mapping[str, complex]) -> complex:
        total = complex(self.const)
        for name, coeff in self.lin.items():
            total += complex(coeff) * binding[name]
        return total

    def to_poly(self) -> Poly:
        p = Poly.const(self.const)
        for name, coeff in self.lin.items():
            p = p + Poly({((name, 1),): coeff})
        return p

    def key(self):
        return (self.const.re, self.const.im, tuple(sorted((k, v.re, v.im) for k, v in self.lin.items())))

    def __repr__(self):
        bits = [] if self.const.is_zero() else [repr(self.const)]
        for k, v in sorted(self.lin.items()):
            bits.append(k if v == QC_ONE else f"{v!r}*{k}")
        return " + ".join(bits) if bits else "0"


# Formal adjoint on the exponent basis under the physical reality conventions:
# s* = 1 - sb, sb* = 1 - s, (i x_k)* = -(i xb_k), (i u)* = -(i ub), eps* = eps.
def conj_symbol(name: str) -> Tuple[AffineForm, QC]:
    """Return (image form, coefficient multiplier is applied by caller)."""
    if name == "s":
        return AffineForm(1) - AffineForm.sym("sb"), QC_ONE
    if name == "sb":
        return AffineForm(1) - AffineForm.sym("s"), QC_ONE
    if name.startswith("ix_"):
        return -AffineForm.sym("ixb_" + name[3:]), QC_ONE
    if name.startswith("ixb_"):
        return -AffineForm.sym("ix_" + name[4:]), QC_ONE
    if name == "iu":
        return -AffineForm.sym("iub"), QC_ONE
    if name == "iub":
        return -AffineForm.sym("iu"), QC_ONE
    if name == "iv":
        return -AffineForm.sym("ivb"), QC_ONE
    if name == "ivb":
        return -AffineForm.sym("iv"), QC_ONE
    if name == "eps":
        return AffineForm.sym("eps"), QC_ONE
    raise ValueError(f"no conjugation rule for symbol {name!r}")


def conj_form(form: AffineForm) -> AffineForm:
    """Formal complex conjugate of an affine exponent."""
    out = AffineForm(form.const.conj())
    for name, coeff in form.lin.items():
        image, _ = conj_symbol(name)
        out = out + image.scale(coeff.conj())
    return out
