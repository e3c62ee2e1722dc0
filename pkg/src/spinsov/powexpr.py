"""Closed-form kernel expressions: sums of coeff * power products * plane waves.

A PowExpr is closed under holomorphic/anti-holomorphic differentiation,
multiplication, inversion and the fractional derivative on powers, which is
what makes every kernel identity in the workbench checkable pointwise.
Exponents are exact affine forms in the formal parameters; floats appear only
when an expression is bound to numeric parameter values.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Tuple

import numpy as np

from .exact import AffineForm, Poly, QC, conj_form
from .specialfn import PoleError, ZIndex, a_of
from .weyl import WeylElement

INT_TOL = 1e-9


class SingularPoint(ValueError):
    pass


class UnboundVariable(KeyError):
    pass


class OutOfClass(ValueError):
    pass


@dataclass(frozen=True)
class SymIndex:
    """Exponent pair (holomorphic, anti-holomorphic), each an affine form."""

    h: AffineForm
    a: AffineForm

    @staticmethod
    def const(h, a=None) -> "SymIndex":
        return SymIndex(AffineForm.of(h), AffineForm.of(h if a is None else a))

    def __add__(self, other):
        if isinstance(other, SymIndex):
            return SymIndex(self.h + other.h, self.a + other.a)
        return SymIndex(self.h + other, self.a + other)

    __radd__ = __add__

    def __neg__(self):
        return SymIndex(-self.h, -self.a)

    def __sub__(self, other):
        return self + (-other if isinstance(other, SymIndex) else -AffineForm.of(other))

    def __rsub__(self, other):
        return (-self) + other

    def dagger(self) -> "SymIndex":
        """Index of the complex-conjugated factor: slots swap and conjugate."""
        return SymIndex(conj_form(self.a), conj_form(self.h))

    def mform(self) -> AffineForm:
        return self.h - self.a

    def is_zero(self) -> bool:
        return self.h == AffineForm(0) and self.a == AffineForm(0)

    def key(self):
        return (self.h.key(), self.a.key())

    def instantiate(self, binding: Mapping[str, complex]) -> ZIndex:
        h = self.h.instantiate(binding)
        a = self.a.instantiate(binding)
        m = h - a
        mr = round(m.real)
        if abs(m - mr) > INT_TOL:
            raise ValueError(f"index difference {m} not an integer (holo={h}, anti={a})")
        return ZIndex(h, mr)

    def __repr__(self):
        return f"({self.h!r} | {self.a!r})"


# factor keys: ("d", v1, v2) means [v1 - v2]^index, ("p", v) means [v]^index
FactorKey = Tuple[str, ...]


def _merge_dict(base: dict, key, value, zero_test):
    cur = base.get(key)
    s = value if cur is None else cur + value
    if zero_test(s):
        base.pop(key, None)
    else:
        base[key] = s


class PTerm:
    __slots__ = ("coeff", "signexp", "factors", "waves")

    def __init__(self, coeff: Poly, signexp: AffineForm, factors, waves):
        self.coeff = coeff
        self.signexp = signexp
        self.factors: Dict[FactorKey, SymIndex] = factors
        self.waves: Dict[Tuple[str, bool], Dict[str, int]] = waves

    def shape_key(self):
        f = tuple(sorted((k, idx.key()) for k, idx in self.factors.items()))
        w = tuple(sorted((k, tuple(sorted(v.items()))) for k, v in self.waves.items()))
        return (f, w, self.signexp.key())

    def copy(self):
        return PTerm(self.coeff, self.signexp, dict(self.factors), {k: dict(v) for k, v in self.waves.items()})


class PowExpr:
    __slots__ = ("terms",)

    def __init__(self, terms: List[PTerm] | None = None):
        self.terms = terms or []

    # --- constructors ------------------------------------------------------

    @staticmethod
    def const(value) -> "PowExpr":
        p = value if isinstance(value, Poly) else Poly.const(value)
        if p.is_zero():
            return PowExpr([])
        return PowExpr([PTerm(p, AffineForm(0), {}, {})])

    @staticmethod
    def power(var: str, idx: SymIndex) -> "PowExpr":
        return PowExpr([PTerm(Poly.const(1), AffineForm(0), {("p", var): idx}, {})])

    @staticmethod
    def diff_power(v1: str, v2: str, idx: SymIndex) -> "PowExpr":
        """[v1 - v2]^idx."""
        return PowExpr([PTerm(Poly.const(1), AffineForm(0), {("d", v1, v2): idx}, {})])

    @staticmethod
    def wave(var: str, momentum: str = "p", inverted: bool = False) -> "PowExpr":
        return PowExpr([PTerm(Poly.const(1), AffineForm(0), {}, {(var, inverted): {momentum: 1}})])

    # --- algebra -----------------------------------------------------------

    def __add__(self, other):
        other = other if isinstance(other, PowExpr) else PowExpr.const(other)
        return PowExpr(self.terms + other.terms).collect()

    __radd__ = __add__

    def __neg__(self):
        return PowExpr([PTerm(-t.coeff, t.signexp, t.factors, t.waves) for t in self.terms])

    def __sub__(self, other):
        other = other if isinstance(other, PowExpr) else PowExpr.const(other)
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, PowExpr):
            return self.scale(other)
        out = []
        for t1 in self.terms:
            for t2 in other.terms:
                factors = dict(t1.factors)
                for k, idx in t2.factors.items():
                    _merge_dict(factors, k, idx, lambda s: s.is_zero())
                waves = {k: dict(v) for k, v in t1.waves.items()}
                for k, mom in t2.waves.items():
                    cur = waves.setdefault(k, {})
                    for sym, mult in mom.items():
                        cur[sym] = cur.get(sym, 0) + mult
                        if cur[sym] == 0:
                            del cur[sym]
                    if not cur:
                        del waves[k]
                out.append(PTerm(t1.coeff * t2.coeff, t1.signexp + t2.signexp, factors, waves))
        return PowExpr(out).collect()

    __rmul__ = __mul__

    def scale(self, value) -> "PowExpr":
        p = value if isinstance(value, Poly) else Poly.const(value)
        return PowExpr([PTerm(t.coeff * p, t.signexp, t.factors, t.waves) for t in self.terms]).collect()

    def collect(self) -> "PowExpr":
        acc: Dict[tuple, PTerm] = {}
        for t in self.terms:
            key = t.shape_key()
            cur = acc.get(key)
            if cur is None:
                acc[key] = t.copy()
            else:
                cur.coeff = cur.coeff + t.coeff
        return PowExpr([t for t in acc.values() if not t.coeff.is_zero()])

    def is_zero(self) -> bool:
        return not self.collect().terms

    def variables(self) -> set:
        out = set()
        for t in self.terms:
            for k in t.factors:
                out.update(k[1:])
            for (v, _inv) in t.waves:
                out.add(v)
        return out

    # --- calculus ----------------------------------------------------------

    def diff(self, var: str, sector: str = "h") -> "PowExpr":
        """Exact d/dz_var (sector 'h') or d/dzbar_var (sector 'a')."""
        out = []
        for t in self.terms:
            for key, idx in t.factors.items():
                if var not in key[1:]:
                    continue
                exp = idx.h if sector == "h" else idx.a
                orient = 1 if (key[0] == "p" or key[1] == var) else -1
                mult = exp.scale(orient).to_poly()
                if mult.is_zero():
                    continue
                factors = dict(t.factors)
                shift = SymIndex(AffineForm(-1), AffineForm(0)) if sector == "h" else SymIndex(AffineForm(0), AffineForm(-1))
                _merge_dict(factors, key, shift, lambda s: s.is_zero())
                out.append(PTerm(t.coeff * mult, t.signexp, factors, dict(t.waves)))
            for (wvar, inv), mom in t.waves.items():
                if wvar != var:
                    continue
                mult = Poly()
                for sym, k in mom.items():
                    name = sym if sector == "h" else sym + "_bar"
                    mult = mult + Poly.const(QC(0, k)) * Poly.var(name)
                if inv:
                    # d/dz e^{i(p/z + pb/zb)} = -i p / z^2 * wave (per sector)
                    factors = dict(t.factors)
                    shift = SymIndex(AffineForm(-2), AffineForm(0)) if sector == "h" else SymIndex(AffineForm(0), AffineForm(-2))
                    _merge_dict(factors, ("p", var), shift, lambda s: s.is_zero())
                    out.append(PTerm(t.coeff * (-mult), t.signexp, factors, {k: dict(v) for k, v in t.waves.items()}))
                else:
                    out.append(PTerm(t.coeff * mult, t.signexp, dict(t.factors), {k: dict(v) for k, v in t.waves.items()}))
        return PowExpr(out).collect()

    def mul_single_power(self, var: str, idx: SymIndex) -> "PowExpr":
        out = []
        for t in self.terms:
            factors = dict(t.factors)
            _merge_dict(factors, ("p", var), idx, lambda s: s.is_zero())
            out.append(PTerm(t.coeff, t.signexp, factors, dict(t.waves)))
        return PowExpr(out).collect()

    def bind(self, binding: Mapping[str, complex]) -> "BoundExpr":
        binding = normalize_binding(binding)
        terms = []
        for t in self.terms:
            coeff = t.coeff.instantiate(binding)
            sv = t.signexp.instantiate(binding)
            svr = round(sv.real)
            if abs(sv - svr) > INT_TOL:
                raise ValueError(f"sign exponent {sv} not an integer")
            if svr % 2:
                coeff = -coeff
            factors = []
            for key, idx in t.factors.items():
                z = idx.instantiate(binding)
                if key[0] == "p":
                    factors.append((key[1], None, z.alpha, z.abar, z.m))
                else:
                    factors.append((key[1], key[2], z.alpha, z.abar, z.m))
            waves = []
            for (var, inv), mom in t.waves.items():
                p = sum(k * binding[sym] for sym, k in mom.items())
                pb = sum(k * binding[sym + "_bar"] for sym, k in mom.items())
                waves.append((var, inv, p, pb))
            terms.append(BoundTerm(coeff, factors, waves))
        return BoundExpr(terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for t in self.terms:
            fs = []
            if not (t.signexp == AffineForm(0)):
                fs.append(f"(-1)^({t.signexp!r})")
            for key, idx in sorted(t.factors.items()):
                base = key[1] if key[0] == "p" else f"{key[1]}-{key[2]}"
                fs.append(f"[{base}]^{idx!r}")
            for (v, inv), mom in sorted(t.waves.items()):
                arg = f"1/{v}" if inv else v
                fs.append(f"E_{mom}({arg})")
            bits.append(f"({t.coeff!r}) " + " ".join(fs))
        return " + ".join(bits)


# --- numeric layer ---------------------------------------------------------

def normalize_binding(binding: Mapping[str, complex]) -> Dict[str, complex]:
    out = dict(binding)
    for name in list(out):
        if not name.endswith("_bar") and name + "_bar" not in out:
            # default anti-holomorphic partner: complex conjugate
            if name in ("p", "pp") or name.startswith("p_"):
                out[name + "_bar"] = complex(out[name]).conjugate()
    return out


class BoundTerm:
    __slots__ = ("coeff", "factors", "waves")

    def __init__(self, coeff, factors, waves):
        self.coeff = coeff
        self.factors = factors
        self.waves = waves


class BoundExpr:
    """PowExpr with all parameters bound; evaluates at point assignments."""

    __slots__ = ("terms",)

    def __init__(self, terms: List[BoundTerm]):
        self.terms = terms

    def variables(self) -> set:
        out = set()
        for t in self.terms:
            for v1, v2, *_ in t.factors:
                out.add(v1)
                if v2 is not None:
                    out.add(v2)
            for v, *_ in t.waves:
                out.add(v)
        return out

    def eval(self, pts: Mapping[str, complex]) -> complex:
        total = 0j
        for t in self.terms:
            total += _eval_term(t, pts)
        return total

    def __call__(self, pts):
        return self.eval(pts)


def eval_factor(zeta: complex, alpha: complex, abar: complex, m: int) -> complex:
    """[zeta]^(alpha, abar) = exp((alpha+abar) ln r) exp(i m theta); fixed formula."""
    r = abs(zeta)
    if r < 1e-9:
        raise SingularPoint(f"factor evaluated at |zeta|={r}")
    theta = cmath.phase(zeta)
    return cmath.exp((alpha + abar) * cmath.log(r)) * cmath.exp(1j * m * theta)


def _eval_term(t: BoundTerm, pts) -> complex:
    val = t.coeff
    try:
        for v1, v2, alpha, abar, m in t.factors:
            zeta = pts[v1] if v2 is None else pts[v1] - pts[v2]
            val *= eval_factor(zeta, alpha, abar, m)
        for var, inv, p, pb in t.waves:
            z = pts[var]
            if inv:
                if abs(z) < 1e-9:
                    raise SingularPoint("wave argument 1/z at z ~ 0")
                z = 1.0 / z
            val *= cmath.exp(1j * (p * z + pb * z.conjugate()))
    except KeyError as exc:
        raise UnboundVariable(str(exc)) from exc
    return val


@dataclass
class PointAssignment:
    """Map variable -> complex point; zbar is evaluated as conj(z)."""

    points: Dict[str, complex]
    min_dist: float = 0.1

    def __post_init__(self):
        names = sorted(self.points)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if abs(self.points[a] - self.points[b]) < self.min_dist:
                    raise SingularPoint(f"points {a}, {b} closer than {self.min_dist}")

    def __getitem__(self, key):
        return self.points[key]


def evaluate(e: PowExpr, pts, binding: Mapping[str, complex]) -> complex:
    """Evaluate a PowExpr at a point assignment with bound parameters."""
    mapping = pts.points if isinstance(pts, PointAssignment) else pts
    return e.bind(binding).eval(mapping)


# --- operator application --------------------------------------------------

def apply_weyl(op: WeylElement, e: PowExpr, site_to_var: Mapping[int, str]) -> PowExpr:
    """Apply a normal-ordered differential operator to a kernel expression."""
    out = PowExpr([])
    for key, coeff in op.terms.items():
        cur = e
        for sector, site, zdeg, ddeg in key:
            var = site_to_var[site]
            for _ in range(ddeg):
                cur = cur.diff(var, sector)
            if zdeg:
                idx = SymIndex(AffineForm(zdeg), AffineForm(0)) if sector == "h" else SymIndex(AffineForm(0), AffineForm(zdeg))
                cur = cur.mul_single_power(var, idx)
        out = out + cur.scale(coeff)
    return out


def transpose_apply(op: WeylElement, e: PowExpr, site_to_var: Mapping[int, str]) -> PowExpr:
    """Apply the formal transpose of op (integration-by-parts image)."""
    return apply_weyl(op.transpose(), e, site_to_var)


# --- inversion -------------------------------------------------------------

def inversion_J(e: PowExpr, variables: Iterable[str]) -> "PowExpr":
    """[J f](z) = prod [z_k]^(-2s,-2sb) f(1/z_1, ..., 1/z_N); J o J = id."""
    variables = list(variables)
    vset = set(variables)
    minus2s = SymIndex(AffineForm.sym("s", -2), AffineForm.sym("sb", -2))
    out = []
    for t in e.terms:
        factors: Dict[FactorKey, SymIndex] = {}
        signexp = t.signexp
        for key, idx in t.factors.items():
            names = key[1:]
            if not vset.issuperset(names):
                raise OutOfClass(f"factor {key} involves unmapped variables")
            if key[0] == "p":
                _merge_dict(factors, key, -idx, lambda s: s.is_zero())
            else:
                # 1/z1 - 1/z2 = -(z1 - z2) / (z1 z2)
                _merge_dict(factors, key, idx, lambda s: s.is_zero())
                _merge_dict(factors, ("p", key[1]), -idx, lambda s: s.is_zero())
                _merge_dict(factors, ("p", key[2]), -idx, lambda s: s.is_zero())
                signexp = signexp + idx.mform()
        waves = {}
        for (var, inv), mom in t.waves.items():
            if var not in vset:
                raise OutOfClass(f"wave variable {var} unmapped")
            waves[(var, not inv)] = dict(mom)
        nt = PTerm(t.coeff, signexp, factors, waves)
        out.append(nt)
    res = PowExpr(out)
    for v in variables:
        res = res.mul_single_power(v, minus2s)
    return res.collect()


# --- fractional derivative on powers and waves -----------------------------

def frac_power_coeff(b: ZIndex, c: ZIndex) -> complex:
    """[i d]^c [z]^b = coeff * [z]^(b-c); coeff from the Fourier pair."""
    sign = (-1.0) ** (b.m % 2)
    phase = (-1j) ** (c.m % 4)
    try:
        return sign * phase * a_of(-b) * a_of(ZIndex(1, 0) + b - c)
    except PoleError as exc:
        raise PoleError(f"fractional derivative coefficient at pole: {exc}") from exc


def momentum_power(p: complex, pb: complex, c: ZIndex) -> complex:
    """[p]^c for a bound momentum, honoring pb independent of conj(p)."""
    # for physical momenta pb == conj(p) and this is |p|^(c+cbar) e^{i m arg p}
    if abs(pb - p.conjugate()) < 1e-12:
        return eval_factor(p, c.alpha, c.abar, c.m)
    return p ** c.alpha * pb ** c.abar


def frac_deriv_on_power(c: ZIndex, e: PowExpr, binding: Mapping[str, complex], var: str) -> PowExpr:
    """Apply [i d_var]^c to a target of single-variable powers and plane waves.

    Returns a numeric-coefficient PowExpr; exponents of var must instantiate.
    """
    binding = normalize_binding(binding)
    out = PowExpr([])
    for t in e.terms:
        factors = dict(t.factors)
        wave_key = None
        for (wvar, inv) in t.waves:
            if wvar == var:
                if inv:
                    raise OutOfClass("fractional derivative on inverted waves not in class")
                wave_key = (wvar, inv)
        plain = [k for k in factors if k[0] == "p" and k[1] == var]
        pair = [k for k in factors if k[0] == "d" and var in k[1:]]
        if pair:
            raise OutOfClass("target must be single-variable powers and waves")
        coeff = t.coeff.instantiate(binding)
        sv = t.signexp.instantiate(binding)
        if abs(sv - round(sv.real)) > INT_TOL:
            raise ValueError("sign exponent not integer")
        if round(sv.real) % 2:
            coeff = -coeff
        if wave_key is not None:
            mom = t.waves[wave_key]
            p = sum(k * binding[sym] for sym, k in mom.items())
            pb = sum(k * binding[sym + "_bar"] for sym, k in mom.items())
            if plain:
                raise OutOfClass("mixed wave*power in the same variable")
            coeff *= momentum_power(p, pb, c)
            nt = PTerm(Poly.const(coeff), AffineForm(0), dict(t.factors), {k: dict(v) for k, v in t.waves.items()})
            out = out + PowExpr([nt])
            continue
        b = ZIndex(0, 0)
        if plain:
            b = factors[plain[0]].instantiate(binding)
        coeff *= frac_power_coeff(b, c)
        newidx = SymIndex.const(QC.of(complex(b.alpha - c.alpha)), QC.of(complex(b.abar - c.abar)))
        if plain:
            factors.pop(plain[0])
        if not newidx.is_zero():
            factors[("p", var)] = newidx
        nt = PTerm(Poly.const(coeff), AffineForm(0), factors, {})
        out = out + PowExpr([nt])
    return out


# --- residual driver -------------------------------------------------------

def sample_assignment(variables, rng, annulus=(0.2, 5.0), min_dist=0.1, max_tries=200):
    lo, hi = annulus
    for _ in range(max_tries):
        pts = {}
        for v in sorted(variables):
            r = rng.uniform(lo, hi)
            th = rng.uniform(0.0, 2.0 * np.pi)
            pts[v] = complex(r * np.cos(th), r * np.sin(th))
        try:
            return PointAssignment(pts, min_dist=min_dist)
        except SingularPoint:
            continue
    raise SingularPoint("could not draw a nonsingular point assignment")


def kernel_identity_residual(
    lhs: PowExpr,
    rhs: PowExpr,
    samples: int,
    seed: int,
    binding: Mapping[str, complex],
    variables=None,
    annulus=(0.2, 5.0),
    min_dist=0.1,
) -> float:
    """Max over random admissible points of |L-R| / (|L|+|R|+1e-300)."""
    bl, br = lhs.bind(binding), rhs.bind(binding)
    if variables is None:
        variables = sorted(bl.variables() | br.variables())
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        for _attempt in range(10):
            pts = sample_assignment(variables, rng, annulus, min_dist)
            try:
                lv = bl.eval(pts.points)
                rv = br.eval(pts.points)
            except SingularPoint:
                continue
            worst = max(worst, abs(lv - rv) / (abs(lv) + abs(rv) + 1e-300))
            break
        else:
            raise SingularPoint("resampling limit reached")
    return worst
