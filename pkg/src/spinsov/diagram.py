"""Two-dimensional Feynman-diagram IR with exact coefficient tracking.

A Diagram is a directed multigraph: an edge from tail to head with index a
denotes the propagator [head - tail]^(-a); internal vertices are integrated
over the plane; the Anchor vertex "o" is the fixed point 0.  Every rewrite
appends its exact coefficient as atoms in a CoefficientProduct, so scripted
derivations end in closed forms that can be both printed and instantiated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from .exact import AffineForm, QC, conj_form
from .powexpr import PowExpr, PTerm, SymIndex, momentum_power
from .exact import Poly
from .specialfn import a_of

ANCHOR = "o"


class PreconditionFailed(ValueError):
    pass


class StepFailed(RuntimeError):
    def __init__(self, step_index: int, reason: str):
        super().__init__(f"script step {step_index}: {reason}")
        self.step_index = step_index
        self.reason = reason


# --- symbolic exponent builders ---------------------------------------------

def _f(*pairs) -> AffineForm:
    out = AffineForm(0)
    for name, coeff in pairs:
        if name is None:
            out = out + AffineForm(coeff)
        else:
            out = out + AffineForm.sym(name, coeff)
    return out


def idx_alpha(label: str) -> SymIndex:
    """1 - s - i x."""
    return SymIndex(
        _f((None, 1), ("s", -1), (f"ix_{label}", -1)),
        _f((None, 1), ("sb", -1), (f"ixb_{label}", -1)),
    )


def idx_beta(label: str) -> SymIndex:
    """1 - s + i x."""
    return SymIndex(
        _f((None, 1), ("s", -1), (f"ix_{label}", 1)),
        _f((None, 1), ("sb", -1), (f"ixb_{label}", 1)),
    )


def idx_gamma() -> SymIndex:
    """2s - 1."""
    return SymIndex(_f((None, -1), ("s", 2)), _f((None, -1), ("sb", 2)))


def idx_delta(label: str) -> SymIndex:
    """s + i x."""
    return SymIndex(
        _f(("s", 1), (f"ix_{label}", 1)), _f(("sb", 1), (f"ixb_{label}", 1))
    )


def idx_s_minus_ix(label: str) -> SymIndex:
    """s - i x (the tilde decoration is [z]^(ix-s) = [z]^-(s-ix))."""
    return SymIndex(
        _f(("s", 1), (f"ix_{label}", -1)), _f(("sb", 1), (f"ixb_{label}", -1))
    )


def idx_s_plus_iu(uname: str = "u") -> SymIndex:
    return SymIndex(_f(("s", 1), (f"i{uname}", 1)), _f(("sb", 1), (f"i{uname}b", 1)))


def idx_s_minus_iu(uname: str = "u") -> SymIndex:
    return SymIndex(_f(("s", 1), (f"i{uname}", -1)), _f(("sb", 1), (f"i{uname}b", -1)))


def idx_one_minus_2s() -> SymIndex:
    return SymIndex(_f((None, 1), ("s", -2)), _f((None, 1), ("sb", -2)))


def nform(label: str) -> AffineForm:
    """i(x - xbar) for a separated-variable label: the integer n."""
    return _f((f"ix_{label}", 1), (f"ixb_{label}", -1))


def nsform() -> AffineForm:
    return _f(("s", 1), ("sb", -1))


# --- coefficient atoms -------------------------------------------------------

@dataclass(frozen=True)
class PiPower:
    k: Fraction

    def __repr__(self):
        return f"pi^{self.k}"


@dataclass(frozen=True)
class Num:
    value: complex

    def __repr__(self):
        return f"{self.value}"


@dataclass(frozen=True)
class PhasePower:
    """i^expr with expr integer-valued at instantiation."""

    expr: AffineForm

    def __repr__(self):
        return f"i^({self.expr!r})"


def SignPower(expr: AffineForm) -> PhasePower:
    return PhasePower(expr.scale(2))


@dataclass(frozen=True)
class AFactor:
    idx: SymIndex
    power: int = 1

    def __repr__(self):
        p = "" if self.power == 1 else f"^{self.power}"
        return f"a({self.idx!r}){p}"


@dataclass(frozen=True)
class LinearFactor:
    form: AffineForm
    power: int = 1

    def __repr__(self):
        return f"({self.form!r})^{self.power}"


@dataclass(frozen=True)
class MomPower:
    sym: str
    idx: SymIndex

    def __repr__(self):
        return f"[{self.sym}]^{self.idx!r}"


@dataclass(frozen=True)
class DeltaPoint:
    v1: str
    v2: str

    def __repr__(self):
        return f"delta2({self.v1}-{self.v2})"


@dataclass(frozen=True)
class DeltaSpectral:
    label1: str
    label2: str

    def __repr__(self):
        return f"delta({self.label1}-{self.label2})"


Atom = object


def one_minus_bar(idx: SymIndex) -> SymIndex:
    """The pair (1 - abar, 1 - alpha): a(idx) * a(one_minus_bar(idx)) = 1."""
    return SymIndex(AffineForm(1) - idx.a, AffineForm(1) - idx.h)


def one_minus(idx: SymIndex) -> SymIndex:
    return SymIndex(AffineForm(1) - idx.h, AffineForm(1) - idx.a)


class CoefficientProduct:
    __slots__ = ("atoms",)

    def __init__(self, atoms: Iterable[Atom] = ()):
        self.atoms = list(atoms)

    def __mul__(self, other):
        if isinstance(other, CoefficientProduct):
            return CoefficientProduct(self.atoms + other.atoms)
        return CoefficientProduct(self.atoms + [other])

    def copy(self):
        return CoefficientProduct(list(self.atoms))

    def conj(self) -> "CoefficientProduct":
        out = []
        for at in self.atoms:
            if isinstance(at, PiPower):
                out.append(at)
            elif isinstance(at, Num):
                out.append(Num(at.value.conjugate()))
            elif isinstance(at, PhasePower):
                out.append(PhasePower(-conj_form(at.expr)))
            elif isinstance(at, AFactor):
                # conj(Gamma(1-abar)/Gamma(alpha)): both slots conjugate in place
                out.append(
                    AFactor(SymIndex(conj_form(at.idx.h), conj_form(at.idx.a)), at.power)
                )
            elif isinstance(at, LinearFactor):
                out.append(LinearFactor(conj_form(at.form), at.power))
            elif isinstance(at, MomPower):
                out.append(MomPower(at.sym, at.idx.dagger()))
            elif isinstance(at, (DeltaPoint, DeltaSpectral)):
                out.append(at)
            else:
                raise TypeError(f"cannot conjugate atom {at!r}")
        return CoefficientProduct(out)

    def deltas(self):
        return [a for a in self.atoms if isinstance(a, (DeltaPoint, DeltaSpectral))]

    def instantiate(self, binding: Mapping[str, complex], skip_deltas: bool = True) -> complex:
        from .powexpr import normalize_binding

        binding = normalize_binding(binding)
        import math

        val = 1.0 + 0.0j
        for at in self.atoms:
            if isinstance(at, PiPower):
                val *= math.pi ** float(at.k)
            elif isinstance(at, Num):
                val *= at.value
            elif isinstance(at, PhasePower):
                e = at.expr.instantiate(binding)
                er = round(e.real)
                if abs(e - er) > 1e-9:
                    raise ValueError(f"phase exponent {e} not an integer")
                val *= 1j ** (er % 4)
            elif isinstance(at, AFactor):
                val *= a_of(at.idx.instantiate(binding)) ** at.power
            elif isinstance(at, LinearFactor):
                val *= at.form.instantiate(binding) ** at.power
            elif isinstance(at, MomPower):
                p = binding[at.sym]
                pb = binding[at.sym + "_bar"]
                val *= momentum_power(p, pb, at.idx.instantiate(binding))
            elif isinstance(at, (DeltaPoint, DeltaSpectral)):
                if not skip_deltas:
                    raise ValueError("cannot instantiate a distributional atom")
            else:
                raise TypeError(f"unknown atom {at!r}")
        return val

    # --- simplification ------------------------------------------------------

    def substitute_label(self, old: str, new: str) -> "CoefficientProduct":
        """Rename a separated-variable label (evaluation on a delta's support)."""

        def sub_form(f: AffineForm) -> AffineForm:
            lin = {}
            for name, c in f.lin.items():
                if name == f"ix_{old}":
                    name = f"ix_{new}"
                elif name == f"ixb_{old}":
                    name = f"ixb_{new}"
                lin[name] = lin.get(name, QC(0)) + c
            return AffineForm(f.const, {k: v for k, v in lin.items() if not v.is_zero()})

        out = []
        for at in self.atoms:
            if isinstance(at, PhasePower):
                out.append(PhasePower(sub_form(at.expr)))
            elif isinstance(at, AFactor):
                out.append(AFactor(SymIndex(sub_form(at.idx.h), sub_form(at.idx.a)), at.power))
            elif isinstance(at, LinearFactor):
                out.append(LinearFactor(sub_form(at.form), at.power))
            elif isinstance(at, MomPower):
                out.append(MomPower(at.sym, SymIndex(sub_form(at.idx.h), sub_form(at.idx.a))))
            else:
                out.append(at)
        return CoefficientProduct(out)

    def simplify(self, labels: Sequence[str] = (), on_support: bool = False) -> "CoefficientProduct":
        cp = self
        if on_support:
            for d in cp.deltas():
                if isinstance(d, DeltaSpectral):
                    cp = cp.substitute_label(d.label2, d.label1)
        atoms = list(cp.atoms)
        changed = True
        while changed:
            changed = False
            afs = [i for i, a in enumerate(atoms) if isinstance(a, AFactor)]
            # expand powers into repeated atoms for uniform pairing
            for i in afs:
                at = atoms[i]
                if abs(at.power) > 1:
                    atoms[i: i + 1] = [AFactor(at.idx, at.power // abs(at.power))] * abs(at.power)
                    changed = True
                    break
            if changed:
                continue
            afs = [i for i, a in enumerate(atoms) if isinstance(a, AFactor) and a.power == 1]
            done = False
            for i, j in itertools.combinations(afs, 2):
                P, Q = atoms[i].idx, atoms[j].idx
                if Q == one_minus_bar(P) or P == one_minus_bar(Q):
                    for k in sorted((i, j), reverse=True):
                        del atoms[k]
                    done = True
                    break
                if Q == one_minus(P) or P == one_minus(Q):
                    # a(P) a(1-P) = (-1)^(m_P)
                    m = P.mform()
                    for k in sorted((i, j), reverse=True):
                        del atoms[k]
                    atoms.append(SignPower(m))
                    done = True
                    break
            if done:
                changed = True
                continue
            # strip a unit from a(1 + P) via a(1+P) = -1/(P_h P_a) a(P), but only
            # when a reflection partner a(1 - P) is present to finish the job
            for i in afs:
                idx = atoms[i].idx
                hh, aa = idx.h, idx.a
                if hh.const.re >= 1 and aa.const.re >= 1 and not (hh.is_const() and aa.is_const()):
                    P = SymIndex(hh - 1, aa - 1)
                    partner = one_minus(P)
                    if any(
                        k != i and isinstance(atoms[k], AFactor) and atoms[k].idx == partner
                        for k in afs
                    ):
                        del atoms[i]
                        atoms.extend(
                            [Num(-1.0 + 0j), LinearFactor(P.h, -1), LinearFactor(P.a, -1), AFactor(P)]
                        )
                        changed = True
                        break
            if changed:
                continue
        # accumulate phases
        total = AffineForm(0)
        rest = []
        for at in atoms:
            if isinstance(at, PhasePower):
                total = total + at.expr
            else:
                rest.append(at)
        atoms = rest
        const = total.const
        ci = round(float(const.re))
        lin_part = AffineForm(const - QC(ci), total.lin)
        phase_num = 1j ** (ci % 4)
        if not lin_part == AffineForm(0):
            reduced = _reduce_even_phase(lin_part, labels)
            if reduced is None:
                atoms.append(PhasePower(lin_part))
            else:
                phase_num *= reduced
        # merge numerics, pi powers, linear factors
        num = phase_num
        pi_k = Fraction(0)
        lf: Dict[tuple, int] = {}
        keep = []
        for at in atoms:
            if isinstance(at, Num):
                num *= at.value
            elif isinstance(at, PiPower):
                pi_k += at.k
            elif isinstance(at, LinearFactor):
                key = at.form.key()
                lf[key] = lf.get(key, 0) + at.power
            else:
                keep.append(at)
        out = []
        if num != 1:
            out.append(Num(num))
        if pi_k:
            out.append(PiPower(pi_k))
        forms = {}
        for at in atoms:
            if isinstance(at, LinearFactor):
                forms[at.form.key()] = at.form
        for key, p in sorted(lf.items()):
            if p:
                out.append(LinearFactor(forms[key], p))
        out.extend(keep)
        return CoefficientProduct(out)

    def __repr__(self):
        return " * ".join(repr(a) for a in self.atoms) if self.atoms else "1"


def _reduce_even_phase(form: AffineForm, labels: Sequence[str]):
    """Reduce i^(2*expr): +1 if expr/1 is 2*(integer combo of parity generators)."""
    # phase atoms here always arise as i^(2m); check whether m/... is reducible:
    # form = 2*m. If m = sum k_j g_j with integer k_j over known-integer
    # generators g_j, then i^(2m) = (-1)^m; if additionally m = 2*h with h in
    # the span, the sign is +1.
    half = form.scale(Fraction(1, 2))
    gens = [nsform() + nform(l) for l in labels] + [nsform() - nform(l) for l in labels]
    for l1 in labels:
        for l2 in labels:
            if l1 < l2:
                gens.append(nform(l1) - nform(l2))
    # integer membership of half/2 in the generator span -> sign +1
    quarter = half.scale(Fraction(1, 2))
    if _int_member(quarter, gens):
        return 1.0
    sol = _int_member(half, gens)
    if sol:
        # (-1)^(integer combo): parity = parity of sum of odd-weight uses; not
        # decidable without parity info, keep symbolic
        return None
    return None


def _int_member(target: AffineForm, gens: List[AffineForm], bound: int = 2):
    """Search small integer combinations of gens equal to target."""
    if not gens:
        return None
    if len(gens) > 6:
        gens = gens[:6]
    coeffs = range(-bound, bound + 1)
    for combo in itertools.product(coeffs, repeat=len(gens)):
        acc = AffineForm(0)
        for k, g in zip(combo, gens):
            if k:
                acc = acc + g.scale(k)
        if acc == target:
            return combo
    return None


# --- diagrams ----------------------------------------------------------------

@dataclass
class Edge:
    tail: str
    head: str
    idx: SymIndex


class Diagram:
    __slots__ = ("vertices", "edges", "waves", "coeff")

    def __init__(self, vertices: Dict[str, str], edges: List[Edge], waves=None, coeff=None):
        self.vertices = dict(vertices)
        self.edges = list(edges)
        self.waves: Dict[str, Dict[str, int]] = {k: dict(v) for k, v in (waves or {}).items()}
        self.coeff = coeff.copy() if coeff else CoefficientProduct()
        if any(e.tail == ANCHOR or e.head == ANCHOR for e in self.edges) or ANCHOR in self.waves:
            self.vertices.setdefault(ANCHOR, "anchor")

    def copy(self) -> "Diagram":
        return Diagram(self.vertices, [Edge(e.tail, e.head, e.idx) for e in self.edges], self.waves, self.coeff)

    def internal(self) -> List[str]:
        return sorted(v for v, kind in self.vertices.items() if kind == "int")

    def external(self) -> List[str]:
        return sorted(v for v, kind in self.vertices.items() if kind == "ext")

    def edges_at(self, v: str) -> List[int]:
        return [i for i, e in enumerate(self.edges) if v in (e.tail, e.head)]

    def relabel(self, mapping: Mapping[str, str]) -> "Diagram":
        def m(x):
            return mapping.get(x, x)

        verts: Dict[str, str] = {}
        for v, kind in self.vertices.items():
            nv = m(v)
            if nv in verts and verts[nv] != kind:
                verts[nv] = "ext" if "ext" in (verts[nv], kind) else kind
            else:
                verts[nv] = kind
        waves: Dict[str, Dict[str, int]] = {}
        for v, w in self.waves.items():
            cur = waves.setdefault(m(v), {})
            for sym, k in w.items():
                cur[sym] = cur.get(sym, 0) + k
        return Diagram(
            verts,
            [Edge(m(e.tail), m(e.head), e.idx) for e in self.edges],
            waves,
            self.coeff,
        )

    def adjoint(self) -> "Diagram":
        """Kernel of the adjoint operator: same graph, daggered indices."""
        out = Diagram(
            self.vertices,
            [Edge(e.tail, e.head, e.idx.dagger()) for e in self.edges],
            {v: {sym: -k for sym, k in w.items()} for v, w in self.waves.items()},
            self.coeff.conj(),
        )
        return out

    def merge(self, other: "Diagram", internalize: Iterable[str] = ()) -> "Diagram":
        verts = dict(self.vertices)
        for v, kind in other.vertices.items():
            if v in verts and {verts[v], kind} == {"ext", "int"}:
                raise PreconditionFailed(f"vertex kind clash at {v}")
            verts.setdefault(v, kind)
        for v in internalize:
            verts[v] = "int"
        waves = {k: dict(w) for k, w in self.waves.items()}
        for v, w in other.waves.items():
            cur = waves.setdefault(v, {})
            for sym, k in w.items():
                cur[sym] = cur.get(sym, 0) + k
        d = Diagram(verts, self.edges + other.edges, waves, self.coeff * other.coeff)
        return d

    def to_powexpr(self, include_coeff: bool = False, binding=None) -> PowExpr:
        """Pure product of propagators and waves (anchor folded to [v] powers)."""
        factors: Dict[tuple, SymIndex] = {}
        signexp = AffineForm(0)
        for e in self.edges:
            tail, head, idx = e.tail, e.head, e.idx
            if head == ANCHOR and tail == ANCHOR:
                raise PreconditionFailed("edge from anchor to anchor")
            if head == ANCHOR:
                # [0 - v]^(-idx) = (-1)^(m) [v]^(-idx)
                signexp = signexp + idx.mform()
                key = ("p", tail)
            elif tail == ANCHOR:
                key = ("p", head)
            else:
                key = ("d", head, tail)
            cur = factors.get(key)
            s = -idx if cur is None else cur + (-idx)
            if s.is_zero():
                factors.pop(key, None)
            else:
                factors[key] = s
        waves = {}
        for v, w in self.waves.items():
            plain = {sym: k for sym, k in w.items() if not sym.startswith("inv:")}
            inv = {sym[4:]: k for sym, k in w.items() if sym.startswith("inv:")}
            if plain:
                waves[(v, False)] = plain
            if inv:
                waves[(v, True)] = inv
        coeff = Poly.const(1)
        if include_coeff:
            if binding is None:
                raise ValueError("include_coeff requires a binding")
            coeff = Poly.const(self.coeff.instantiate(binding))
        return PowExpr([PTerm(coeff, signexp, factors, waves)])

    def __repr__(self):
        bits = [f"Diagram(ext={self.external()}, int={self.internal()})"]
        for e in sorted(self.edges, key=lambda e: (e.tail, e.head, repr(e.idx))):
            bits.append(f"  {e.tail} -> {e.head} : {e.idx!r}")
        for v, w in sorted(self.waves.items()):
            bits.append(f"  wave at {v}: {w}")
        bits.append(f"  coeff: {self.coeff!r}")
        return "\n".join(bits)


# --- serialization -----------------------------------------------------------

def _form_to_text(f: AffineForm) -> str:
    bits = [f"{f.const.re}:{f.const.im}"]
    for name, c in sorted(f.lin.items()):
        bits.append(f"{name}:{c.re}:{c.im}")
    return ",".join(bits)


def _form_from_text(text: str) -> AffineForm:
    parts = text.split(",")
    cre, cim = parts[0].split(":")
    lin = {}
    for item in parts[1:]:
        name, re_, im_ = item.rsplit(":", 2)
        lin[name] = QC(Fraction(re_), Fraction(im_))
    return AffineForm(QC(Fraction(cre), Fraction(cim)), lin)


def serialize(d: Diagram) -> str:
    lines = ["spinsov-diagram 1"]
    for v in sorted(d.vertices):
        lines.append(f"vertex {v} {d.vertices[v]}")
    ekeys = sorted(
        range(len(d.edges)),
        key=lambda i: (d.edges[i].tail, d.edges[i].head, _form_to_text(d.edges[i].idx.h), _form_to_text(d.edges[i].idx.a)),
    )
    for i in ekeys:
        e = d.edges[i]
        lines.append(f"edge {e.tail} {e.head} {_form_to_text(e.idx.h)} ; {_form_to_text(e.idx.a)}")
    for v in sorted(d.waves):
        mom = " ".join(f"{sym}:{k}" for sym, k in sorted(d.waves[v].items()))
        lines.append(f"wave {v} {mom}")
    for at in d.coeff.atoms:
        lines.append(f"atom {at!r}")
    return "\n".join(lines) + "\n"


def deserialize(text: str) -> Diagram:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if lines[0] != "spinsov-diagram 1":
        raise ValueError("unknown diagram format/version")
    vertices, edges, waves = {}, [], {}
    for ln in lines[1:]:
        kind, rest = ln.split(" ", 1)
        if kind == "vertex":
            name, vkind = rest.split()
            vertices[name] = vkind
        elif kind == "edge":
            head_part, anti = rest.split(" ; ")
            tail, head, hform = head_part.split(" ", 2)
            edges.append(Edge(tail, head, SymIndex(_form_from_text(hform), _form_from_text(anti))))
        elif kind == "wave":
            bits = rest.split()
            waves[bits[0]] = {sym: int(k) for sym, k in (b.split(":") for b in bits[1:])}
        elif kind == "atom":
            continue  # atoms are printed for the audit trail, not round-tripped
        else:
            raise ValueError(f"unknown record {kind!r}")
    return Diagram(vertices, edges, waves)


# --- builders ----------------------------------------------------------------

def build_lambda(N: int, family: str = "plain", label: str = "1", zs=None, ws=None) -> Diagram:
    """Layer-operator kernel Lambda_N(x) on (z_1..z_N | w_1..w_{N-1}).

    plain: product over k of [z_k - z_{k+1}]^-(2s-1) [w_k - z_k]^-(1-s-ix)
    [w_k - z_{k+1}]^-(1-s+ix), normalization r_N in the coefficient.
    tilde adds [z_N]^(ix-s); hat adds [z_1]^-(s+ix); bar adds both.
    """
    if N < 1:
        raise ValueError("N >= 1")
    zs = zs or [f"z{k}" for k in range(1, N + 1)]
    ws = ws or [f"w{k}" for k in range(1, N)]
    vertices = {v: "ext" for v in zs + ws}
    edges = []
    al, be, ga = idx_alpha(label), idx_beta(label), idx_gamma()
    for k in range(N - 1):
        edges.append(Edge(zs[k + 1], zs[k], ga))
        edges.append(Edge(zs[k], ws[k], al))
        edges.append(Edge(zs[k + 1], ws[k], be))
    coeff = CoefficientProduct()
    if N > 1:
        # r_N = (a(s+ix) a(sb - i xb))^(N-1)
        coeff = coeff * AFactor(idx_delta(label), N - 1)
        coeff = coeff * AFactor(
            SymIndex(_f(("sb", 1), (f"ixb_{label}", -1)), _f(("s", 1), (f"ix_{label}", -1))),
            N - 1,
        )
    d = Diagram(vertices, edges, None, coeff)
    if family in ("tilde", "bar"):
        d.edges.append(Edge(ANCHOR, zs[-1], idx_s_minus_ix(label)))
    if family in ("hat", "bar"):
        d.edges.append(Edge(ANCHOR, zs[0], idx_delta(label)))
    if family not in ("plain", "tilde", "hat", "bar"):
        raise ValueError(f"unknown lambda family {family!r}")
    if family != "plain":
        d.vertices.setdefault(ANCHOR, "anchor")
    return d


def build_psi(family: str, N: int, labels: Sequence[str] | None = None, momentum: str = "p") -> Diagram:
    """Layered eigenfunction diagram on externals z1..zN.

    B: |p|^(N-1) Lambda_N(x_1)...Lambda_2(x_{N-1}) applied to a plane wave.
    A: tilde layers ending on [z]^(i x_N - s);  D: hat layers ending on
    [z]^-(s + i x_N);  C: bar layers on the inverted wave.
    """
    family = family.upper()
    if family in ("A", "D"):
        labels = labels or [str(k) for k in range(1, N + 1)]
        if len(labels) != N:
            raise PreconditionFailed("A/D need N separated-variable labels")
    else:
        labels = labels or [str(k) for k in range(1, N)]
        if len(labels) != N - 1:
            raise PreconditionFailed("B/C need N-1 separated-variable labels")
    lam = {"A": "tilde", "B": "plain", "C": "bar", "D": "hat"}[family]
    slot = 0

    def fresh(k):
        nonlocal slot
        slot += 1
        return [f"t{slot}_{i}" for i in range(1, k + 1)]

    if family in ("A", "D"):
        idx_last = idx_s_minus_ix(labels[-1]) if family == "A" else idx_delta(labels[-1])
        d = Diagram({"q1": "ext"}, [Edge(ANCHOR, "q1", idx_last)])
        layer_labels = labels[:-1]
    else:
        if family == "B":
            d = Diagram({"q1": "ext"}, [], {"q1": {momentum: 1}})
        elif family == "C":
            # [z]^(-2s) e^{i(p/z + pb/zb)}: inverted waves carry an inv: tag
            d = Diagram(
                {"q1": "ext"},
                [Edge(ANCHOR, "q1", SymIndex(_f(("s", 2)), _f(("sb", 2))))],
                {"q1": {"inv:" + momentum: 1}},
            )
        else:
            raise ValueError(f"unknown psi family {family!r}")
        layer_labels = labels
    cur_vars = ["q1"]
    for j in range(len(layer_labels) - 1, -1, -1):
        k = len(cur_vars) + 1
        new_vars = fresh(k) if k < N else [f"z{i}" for i in range(1, N + 1)]
        lamd = build_lambda(k, lam, layer_labels[j], zs=new_vars, ws=cur_vars)
        d = lamd.merge(d, internalize=cur_vars)
        cur_vars = new_vars
    if family in ("B", "C"):
        half = Fraction(N - 1, 2)
        if half:
            d.coeff = d.coeff * MomPower(momentum, SymIndex(AffineForm(QC(half)), AffineForm(QC(half))))
    if len(cur_vars) == 1 and cur_vars == ["q1"]:
        d = d.relabel({"q1": "z1"})
    return d


def build_baxter(family: str, N: int, uname: str = "u") -> Diagram:
    """Baxter kernel diagrams on (z_1..z_N | w_1..w_N); w_0 = z_0 = anchor."""
    family = family.upper()
    zs = [f"z{k}" for k in range(1, N + 1)]
    ws = [f"w{k}" for k in range(1, N + 1)]
    sp, sm = idx_s_plus_iu(uname), idx_s_minus_iu(uname)
    one_m_2s = idx_one_minus_2s()
    vertices = {v: "ext" for v in zs + ws}
    edges = []
    if family in ("D", "C", "B"):
        for k in range(N):
            prev = ws[k - 1] if k > 0 else ANCHOR
            if family == "B" and k == 0:
                edges.append(Edge(ws[0], zs[0], sm))
                continue
            edges.append(Edge(prev, zs[k], sp))
            edges.append(Edge(ws[k], zs[k], sm))
            edges.append(Edge(prev, ws[k], one_m_2s))
        if family == "C":
            # [-w_N]^-(1 - s + iu) = [o - w_N]^-(..)
            edges.append(
                Edge(
                    ws[-1],
                    ANCHOR,
                    SymIndex(
                        _f((None, 1), ("s", -1), (f"i{uname}", 1)),
                        _f((None, 1), ("sb", -1), (f"i{uname}b", 1)),
                    ),
                )
            )
    elif family == "A":
        for k in range(N):
            nxt = ws[k + 1] if k + 1 < N else ANCHOR
            edges.append(Edge(ws[k], zs[k], sp))
            edges.append(Edge(nxt, zs[k], sm))
            edges.append(Edge(nxt, ws[k], one_m_2s))
    else:
        raise ValueError(f"unknown Baxter family {family!r}")
    return Diagram(vertices, edges)


def build_factorized_R(which: int, a_form: SymIndex, b_form: SymIndex) -> Diagram:
    """Factorizing-operator kernels on (z1, z2 | w1, w2).

    which=1: slots (a, b) = (i(u1-v1), i(u1-v2)); identity leg delta2(z1-w1).
    which=2: slots (a, b) = (i(u2-v2), i(u1-v2)); identity leg delta2(z2-w2).
    """
    vertices = {v: "ext" for v in ("z1", "z2", "w1", "w2")}
    if which == 1:
        edges = [
            Edge("z1", "z2", a_form - b_form),
            Edge("w2", "z2", 1 - a_form),
            Edge("w2", "z1", b_form),
        ]
        coeff = CoefficientProduct([DeltaPoint("z1", "w1")])
    elif which == 2:
        edges = [
            Edge("z2", "z1", a_form - b_form),
            Edge("z1", "w1", 1 - a_form),
            Edge("z2", "w1", b_form),
        ]
        coeff = CoefficientProduct([DeltaPoint("z2", "w2")])
    else:
        raise ValueError("which must be 1 or 2")
    return Diagram(vertices, edges, None, coeff)
