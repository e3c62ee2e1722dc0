"""Rewrite rules (chain, star-triangle, cross, delta, fourier) and the
scripted derivations that reproduce the scalar-product computations.

Every rule consumes an integration vertex (or a recognizable pattern) and
appends its exact coefficient to the diagram's CoefficientProduct.  The chain
rule carries the factor pi that the star-triangle and the delta reduction
force on it; rule soundness is cross-checked numerically by the quadrature
oracle in the verification suites.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Sequence, Tuple

from .exact import AffineForm, QC, conj_form
from .powexpr import SymIndex
from .diagram import (
    ANCHOR,
    AFactor,
    CoefficientProduct,
    DeltaPoint,
    DeltaSpectral,
    Diagram,
    Edge,
    LinearFactor,
    MomPower,
    Num,
    PhasePower,
    PiPower,
    PreconditionFailed,
    SignPower,
    StepFailed,
    build_lambda,
)

TWO = SymIndex(AffineForm(2), AffineForm(2))
ONE = SymIndex(AffineForm(1), AffineForm(1))


def _flip(d: Diagram, i: int) -> None:
    e = d.edges[i]
    d.coeff = d.coeff * SignPower(e.idx.mform())
    d.edges[i] = Edge(e.head, e.tail, e.idx)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise PreconditionFailed(msg)


def _remove_vertex(d: Diagram, v: str) -> None:
    d.vertices.pop(v, None)
    d.waves.pop(v, None)


def rule_merge_parallel(d: Diagram, loc: Tuple[str, str]) -> Diagram:
    """Combine all edges between two vertices into one (or none if they cancel)."""
    v1, v2 = loc
    d = d.copy()
    idxs = [i for i, e in enumerate(d.edges) if {e.tail, e.head} == {v1, v2}]
    _require(idxs, f"no edges between {v1} and {v2}")
    total = None
    for i in idxs:
        e = d.edges[i]
        if e.tail != v1:
            d.coeff = d.coeff * SignPower(e.idx.mform())
        total = e.idx if total is None else total + e.idx
    for i in sorted(idxs, reverse=True):
        del d.edges[i]
    if not total.is_zero():
        d.edges.append(Edge(v1, v2, total))
    return d


def _two_edge_pattern(d: Diagram, v: str) -> Tuple[Diagram, str, str, SymIndex, SymIndex]:
    """Normalize the two edges at v to [a - v]^-alpha [v - b]^-beta."""
    idxs = d.edges_at(v)
    _require(len(idxs) == 2, f"vertex {v} must have exactly 2 edges")
    _require(v not in d.waves or not d.waves[v], f"vertex {v} carries a wave")
    outgoing = [i for i in idxs if d.edges[i].tail == v]
    if len(outgoing) == 0:
        _flip(d, idxs[0])
    elif len(outgoing) == 2:
        _flip(d, outgoing[1])
    i_out = next(i for i in idxs if d.edges[i].tail == v)
    i_in = next(i for i in idxs if d.edges[i].head == v)
    a = d.edges[i_out].head
    b = d.edges[i_in].tail
    _require(a != b, "chain endpoints coincide")
    alpha = d.edges[i_out].idx
    beta = d.edges[i_in].idx
    for i in sorted((i_out, i_in), reverse=True):
        del d.edges[i]
    return d, a, b, alpha, beta


def rule_chain(d: Diagram, loc: str) -> Diagram:
    """Integrate a degree-2 vertex: result edge alpha+beta-1, coefficient
    pi (-1)^(m_gamma) a(alpha, beta, gamma) with gamma = 2 - alpha - beta."""
    v = loc
    _require(d.vertices.get(v) == "int", f"{v} is not an integration vertex")
    d = d.copy()
    d, a, b, alpha, beta = _two_edge_pattern(d, v)
    gamma = TWO - alpha - beta
    d.edges.append(Edge(b, a, alpha + beta - 1))
    d.coeff = (
        d.coeff
        * PiPower(Fraction(1))
        * SignPower(gamma.mform())
        * AFactor(alpha)
        * AFactor(beta)
        * AFactor(gamma)
    )
    _remove_vertex(d, v)
    return d


def rule_delta_reduce(d: Diagram, loc: str) -> Diagram:
    """Chain with alpha + beta = 2: pi^2 a(alpha, 2-alpha) delta2(a - b)."""
    v = loc
    _require(d.vertices.get(v) == "int", f"{v} is not an integration vertex")
    d = d.copy()
    d, a, b, alpha, beta = _two_edge_pattern(d, v)
    _require(alpha + beta == TWO, "delta reduction needs alpha + beta = 2 in both sectors")
    d.coeff = d.coeff * PiPower(Fraction(2)) * AFactor(alpha) * AFactor(beta) * DeltaPoint(a, b)
    _remove_vertex(d, v)
    return d


def rule_delta_consume(d: Diagram, loc: Tuple[str, str] | None = None) -> Diagram:
    """Use a point delta to eliminate an integration vertex."""
    d = d.copy()
    for k, at in enumerate(d.coeff.atoms):
        if isinstance(at, DeltaPoint):
            if loc is not None and {at.v1, at.v2} != set(loc):
                continue
            if d.vertices.get(at.v2) == "int":
                old, new = at.v2, at.v1
            elif d.vertices.get(at.v1) == "int":
                old, new = at.v1, at.v2
            else:
                continue
            _require(
                not any({e.tail, e.head} == {old, new} for e in d.edges),
                "delta endpoints connected by an edge: singular limit",
            )
            del d.coeff.atoms[k]
            out = d.relabel({old: new})
            out.vertices[new] = d.vertices[new]
            return out
    raise PreconditionFailed("no consumable point delta")


def rule_star(d: Diagram, loc: str) -> Diagram:
    """Star-triangle: degree-3 vertex with index sum 2 -> triangle, pi a(...)."""
    v = loc
    _require(d.vertices.get(v) == "int", f"{v} is not an integration vertex")
    _require(not d.waves.get(v), f"vertex {v} carries a wave")
    d = d.copy()
    idxs = d.edges_at(v)
    _require(len(idxs) == 3, "star needs exactly 3 edges")
    for i in idxs:
        if d.edges[i].tail != v:
            _flip(d, i)
    zs = [d.edges[i].head for i in idxs]
    als = [d.edges[i].idx for i in idxs]
    _require(len(set(zs)) == 3, "star endpoints must be distinct")
    total = als[0] + als[1] + als[2]
    _require(total == TWO, "star-triangle needs index sum 2 in both sectors")
    for i in sorted(idxs, reverse=True):
        del d.edges[i]
    z1, z2, z3 = zs
    a1, a2, a3 = als
    d.edges.append(Edge(z1, z2, ONE - a3))
    d.edges.append(Edge(z3, z1, ONE - a2))
    d.edges.append(Edge(z2, z3, ONE - a1))
    d.coeff = d.coeff * PiPower(Fraction(1)) * AFactor(a1) * AFactor(a2) * AFactor(a3)
    _remove_vertex(d, v)
    return d


def rule_unstar(d: Diagram, loc: Tuple[str, str, str, str]) -> Diagram:
    """Inverse star-triangle: triangle with index sum 1 -> new integration vertex."""
    z1, z2, z3, w = loc
    _require(w not in d.vertices, f"vertex {w} already exists")
    d = d.copy()

    def find(t, h):
        for i, e in enumerate(d.edges):
            if {e.tail, e.head} == {t, h}:
                return i
        raise PreconditionFailed(f"no edge between {t} and {h}")

    i12, i31, i23 = find(z1, z2), find(z3, z1), find(z2, z3)
    for i, (t, h) in ((i12, (z1, z2)), (i31, (z3, z1)), (i23, (z2, z3))):
        if d.edges[i].tail != t:
            _flip(d, i)
    a3 = d.edges[i12].idx
    a2 = d.edges[i31].idx
    a1 = d.edges[i23].idx
    _require(a1 + a2 + a3 == ONE, "inverse star needs triangle index sum 1")
    for i in sorted((i12, i31, i23), reverse=True):
        del d.edges[i]
    al1, al2, al3 = ONE - a1, ONE - a2, ONE - a3
    d.vertices[w] = "int"
    d.edges.append(Edge(w, z1, al1))
    d.edges.append(Edge(w, z2, al2))
    d.edges.append(Edge(w, z3, al3))
    d.coeff = (
        d.coeff
        * PiPower(Fraction(-1))
        * AFactor(al1, -1)
        * AFactor(al2, -1)
        * AFactor(al3, -1)
    )
    return d


def rule_cross(d: Diagram, loc: Tuple[str, str, str, str, str]) -> Diagram:
    """Cross relation: move the z1-z2 prefactor line to the z3-z4 pair."""
    v, z1, z2, z3, z4 = loc
    _require(d.vertices.get(v) == "int", f"{v} is not an integration vertex")
    d = d.copy()
    legs = {}
    for z in (z1, z2, z3, z4):
        found = [i for i in d.edges_at(v) if {d.edges[i].tail, d.edges[i].head} == {v, z}]
        _require(len(found) == 1, f"need exactly one edge {v}-{z}")
        i = found[0]
        if d.edges[i].tail != v:
            _flip(d, i)
        legs[z] = i
    pre = [i for i, e in enumerate(d.edges) if {e.tail, e.head} == {z1, z2}]
    _require(len(pre) == 1, "need exactly one z1-z2 prefactor edge")
    ip = pre[0]
    if d.edges[ip].tail != z2:
        _flip(d, ip)
    alpha = d.edges[legs[z1]].idx
    alphap = alpha + d.edges[ip].idx
    _require(d.edges[legs[z2]].idx == ONE - alphap, "z2 leg must carry 1 - alpha'")
    beta = d.edges[legs[z3]].idx
    betap = ONE - d.edges[legs[z4]].idx
    _require(alpha + beta == alphap + betap, "cross needs alpha + beta = alpha' + beta'")
    swap = lambda P: SymIndex(P.a, P.h)
    d.edges[legs[z1]] = Edge(v, z1, alphap)
    d.edges[legs[z2]] = Edge(v, z2, ONE - alpha)
    d.edges[legs[z3]] = Edge(v, z3, betap)
    d.edges[legs[z4]] = Edge(v, z4, ONE - beta)
    del d.edges[ip]
    d.edges.append(Edge(z4, z3, betap - beta))
    d.coeff = (
        d.coeff
        * AFactor(alpha)
        * AFactor(swap(beta))
        * AFactor(alphap, -1)
        * AFactor(swap(betap), -1)
    )
    return d


def rule_fourier(d: Diagram, loc: str) -> Diagram:
    """Integrate a wave-carrying vertex with a single edge.

    int d2v [a-v]^-al e^{i(pv+..)} = e^{i(pa+..)} pi (-i)^(m) a(al) [p]^(al-1).
    """
    v = loc
    _require(d.vertices.get(v) == "int", f"{v} is not an integration vertex")
    d = d.copy()
    mom = d.waves.get(v)
    _require(mom and len(mom) == 1, f"vertex {v} must carry a single-symbol wave")
    (sym, mult), = mom.items()
    _require(abs(mult) == 1 and not sym.startswith("inv:"), "wave must be +-1 * plain momentum")
    idxs = d.edges_at(v)
    _require(len(idxs) == 1, f"vertex {v} must have exactly one edge")
    e = d.edges[idxs[0]]
    if e.tail == v:
        a, phase = e.head, -1
    else:
        a, phase = e.tail, +1
    alpha = e.idx
    del d.edges[idxs[0]]
    d.coeff = (
        d.coeff
        * PiPower(Fraction(1))
        * PhasePower(alpha.mform().scale(phase))
        * AFactor(alpha)
        * MomPower(sym, alpha - 1)
    )
    if mult == -1:
        d.coeff = d.coeff * SignPower(alpha.mform())
    cur = d.waves.setdefault(a, {})
    cur[sym] = cur.get(sym, 0) + mult
    if not cur[sym]:
        del cur[sym]
    _remove_vertex(d, v)
    return d


def rule_mellin_delta(d: Diagram, loc: str) -> Diagram:
    """Critical radial integral: int d2v [v - b]^-(1 - c) = 2 pi^2 delta(x - x')
    for c = i(x_l - x_l'), i.e. Re(c + cbar) = 0 structurally."""
    v = loc
    _require(d.vertices.get(v) == "int", f"{v} is not an integration vertex")
    _require(not d.waves.get(v), f"vertex {v} carries a wave")
    d = d.copy()
    idxs = d.edges_at(v)
    others = {d.edges[i].tail if d.edges[i].head == v else d.edges[i].head for i in idxs}
    _require(len(others) == 1, "all edges must connect to a single partner vertex")
    for i in idxs:
        if d.edges[i].head != v:
            _flip(d, i)
    net = None
    for i in idxs:
        net = d.edges[i].idx if net is None else net + d.edges[i].idx
    c = ONE - net
    _require(conj_form(c.h) == -c.a, "net index not on the critical delta family")
    lin = c.h.lin
    _require(c.h.const == QC(0) and len(lin) == 2, "cannot extract spectral labels")
    items = sorted(lin.items())
    (n1, c1), (n2, c2) = items
    _require(
        {c1, c2} == {QC(1), QC(-1)} and n1.startswith("ix_") and n2.startswith("ix_"),
        "net index is not i(x - x') for two separated-variable labels",
    )
    l_pos = n1[3:] if c1 == QC(1) else n2[3:]
    l_neg = n2[3:] if c1 == QC(1) else n1[3:]
    for i in sorted(idxs, reverse=True):
        del d.edges[i]
    d.coeff = d.coeff * Num(2.0 + 0j) * PiPower(Fraction(2)) * DeltaSpectral(l_pos, l_neg)
    _remove_vertex(d, v)
    return d


def rule_merge_external(d: Diagram, loc: Tuple[str, str]) -> Diagram:
    """Coincident-point limit: identify old with new (no direct edge allowed)."""
    old, new = loc
    d = d.copy()
    _require(
        not any({e.tail, e.head} == {old, new} for e in d.edges),
        "direct edge between merged vertices: singular limit",
    )
    kind = d.vertices[new]
    out = d.relabel({old: new})
    out.vertices[new] = kind
    out.coeff = CoefficientProduct(
        [DeltaPoint(new if a.v1 == old else a.v1, new if a.v2 == old else a.v2) if isinstance(a, DeltaPoint) else a for a in out.coeff.atoms]
    )
    return out


def rule_momentum_loop(d: Diagram, loc: Tuple[str, Tuple[str, str], str]) -> Diagram:
    """Two-layer wave sandwich evaluated in momentum space.

    Pattern: wave at internal w; internal mids m1, m2, each with exactly one
    edge into w and one into the external target; the mid index sums must be
    complementary (A + B = 2).  The loop integral is the critical chain and
    produces 2 pi^2 delta(x - x') [p]^(-1) together with the Fourier factors
    of the four propagators and three position-space integrations.
    """
    w, mids, target = loc
    m1, m2 = mids
    _require(d.vertices.get(w) == "int", "wave vertex must be internal")
    mom = d.waves.get(w)
    _require(mom and len(mom) == 1, "wave vertex must carry a single momentum")
    (sym, mult), = mom.items()
    _require(mult == 1 and not sym.startswith("inv:"), "wave must be + momentum")
    d = d.copy()
    edge_of = {}
    for m in (m1, m2):
        _require(d.vertices.get(m) == "int", f"mid {m} must be internal")
        at = d.edges_at(m)
        _require(len(at) == 2, f"mid {m} must have exactly two edges")
        for i in at:
            e = d.edges[i]
            _require(e.tail == m, f"edge at {m} must be oriented mid -> (w|target)")
            _require(e.head in (w, target), f"mid {m} connects outside the loop pattern")
            edge_of[(m, e.head)] = e.idx
    _require(len(d.edges_at(w)) == 2, "wave vertex must touch only the two mids")
    _require(len(edge_of) == 4, "loop pattern incomplete")
    A2 = edge_of[(m1, w)] + edge_of[(m1, target)]
    B2 = edge_of[(m2, w)] + edge_of[(m2, target)]
    _require(A2 + B2 == TWO, "mid index sums must be complementary (A + B = 2)")
    c = ONE - A2
    _require(conj_form(c.h) == -c.a, "loop not on the critical delta family")
    lin = c.h.lin
    _require(c.h.const == QC(0) and len(lin) == 2, "cannot extract spectral labels")
    items = sorted(lin.items())
    (n1, c1), (n2, c2) = items
    _require({c1, c2} == {QC(1), QC(-1)}, "loop index is not i(x - x')")
    l_pos = n1[3:] if c1 == QC(1) else n2[3:]
    l_neg = n2[3:] if c1 == QC(1) else n1[3:]
    coeff = d.coeff
    for key in ((m1, w), (m1, target), (m2, w), (m2, target)):
        idx = edge_of[key]
        coeff = coeff * PiPower(Fraction(-1)) * PhasePower(-idx.mform()) * AFactor(idx)
    coeff = coeff * PiPower(Fraction(6))
    coeff = coeff * SignPower(edge_of[(m2, w)].mform() + edge_of[(m1, target)].mform())
    coeff = coeff * SignPower(c.mform())
    coeff = coeff * Num(2.0 + 0j) * PiPower(Fraction(2)) * DeltaSpectral(l_pos, l_neg)
    coeff = coeff * MomPower(sym, SymIndex(AffineForm(-1), AffineForm(-1)))
    keep = [e for e in d.edges if not ({e.tail, e.head} & {w, m1, m2})]
    out = Diagram(
        {v: k for v, k in d.vertices.items() if v not in (w, m1, m2)},
        keep,
        {v: wv for v, wv in d.waves.items() if v != w},
        coeff,
    )
    cur = out.waves.setdefault(target, {})
    cur[sym] = cur.get(sym, 0) + mult
    return out


RULES = {
    "merge_parallel": rule_merge_parallel,
    "chain": rule_chain,
    "delta_reduce": rule_delta_reduce,
    "delta_consume": rule_delta_consume,
    "star_triangle": rule_star,
    "unstar": rule_unstar,
    "cross": rule_cross,
    "fourier": rule_fourier,
    "mellin_delta": rule_mellin_delta,
    "merge_external": rule_merge_external,
    "momentum_loop": rule_momentum_loop,
}


def apply_rule(d: Diagram, rule: str, loc=None) -> Diagram:
    try:
        fn = RULES[rule]
    except KeyError:
        raise PreconditionFailed(f"unknown rule {rule!r}") from None
    return fn(d, loc) if loc is not None else fn(d)


class RewriteScript:
    """A named sequence of (rule, location) steps with an audit trace."""

    def __init__(self, name: str, steps: Sequence[Tuple[str, object]]):
        self.name = name
        self.steps = list(steps)

    def run(self, d: Diagram, trace: List[str] | None = None) -> Diagram:
        cur = d
        for i, (rule, loc) in enumerate(self.steps):
            try:
                cur = apply_rule(cur, rule, loc)
            except PreconditionFailed as exc:
                raise StepFailed(i, f"{rule} at {loc}: {exc}") from exc
            if trace is not None:
                trace.append(f"step {i}: {rule} at {loc}\n{cur!r}")
        return cur


def run_script(d: Diagram, script: RewriteScript, trace: List[str] | None = None) -> Diagram:
    return script.run(d, trace)


# --- shipped derivations -----------------------------------------------------

def exchange_pair_diagram(label: str = "1", plabel: str = "p1", wave: bool = False, family: str = "plain") -> Diagram:
    """Kernel diagram of Lambda_2(x')^dagger Lambda_2(x), optionally on a wave.

    Externals: w (input slot of Lambda_2(x)) and v (output variable of the
    adjoint); the two z's are integrated.
    """
    lam = build_lambda(2, family, label, zs=["z1", "z2"], ws=["w"])
    adj = build_lambda(2, family, plabel, zs=["z1", "z2"], ws=["v"]).adjoint()
    d = lam.merge(adj, internalize=["z1", "z2"])
    if wave:
        d.vertices["w"] = "int"
        d.waves["w"] = {"p": 1}
    return d


def script_lambda1(family: str = "tilde") -> Tuple[Diagram, RewriteScript]:
    lam = build_lambda(1, family, "1", zs=["z1"])
    adj = build_lambda(1, family, "p1", zs=["z1"]).adjoint()
    d = lam.merge(adj, internalize=["z1"])
    return d, RewriteScript("lambda1", [("merge_parallel", (ANCHOR, "z1")), ("mellin_delta", "z1")])


def script_exchange2() -> Tuple[Diagram, RewriteScript]:
    d = exchange_pair_diagram()
    steps = [
        ("merge_parallel", ("z2", "z1")),
        ("chain", "z1"),
        ("chain", "z2"),
        ("merge_parallel", ("w", "v")),
    ]
    return d, RewriteScript("exchange2", steps)


def script_ll2() -> Tuple[Diagram, RewriteScript]:
    d = exchange_pair_diagram(wave=True)
    steps = [
        ("merge_parallel", ("z2", "z1")),
        ("momentum_loop", ("w", ("z1", "z2"), "v")),
    ]
    return d, RewriteScript("ll2", steps)


def _iu_pair(name: str) -> SymIndex:
    return SymIndex(AffineForm.sym(f"i{name}"), AffineForm.sym(f"i{name}b"))


def script_appendixB_2Ra() -> Tuple[Diagram, RewriteScript]:
    from .diagram import build_factorized_R

    d = build_factorized_R(1, _iu_pair("u"), _iu_pair("v"))
    d.vertices["w1"] = "int"
    d.vertices["w2"] = "int"
    steps = [
        ("delta_consume", ("z1", "w1")),
        ("chain", "w2"),
        ("merge_parallel", ("z1", "z2")),
    ]
    return d, RewriteScript("appendixB_2Ra", steps)


def script_appendixB_2Rb() -> Tuple[Diagram, RewriteScript]:
    from .diagram import build_factorized_R

    d = build_factorized_R(1, _iu_pair("u"), _iu_pair("v"))
    steps = [
        ("unstar", ("z2", "z1", "w2", "t")),
        ("merge_external", ("z1", "z2")),
        ("merge_parallel", ("z2", "t")),
        ("delta_reduce", "t"),
    ]
    return d, RewriteScript("appendixB_2Rb", steps)


SCRIPTS = {
    "lambda1": script_lambda1,
    "exchange2": script_exchange2,
    "ll2": script_ll2,
    "appendixB_2Ra": script_appendixB_2Ra,
    "appendixB_2Rb": script_appendixB_2Rb,
}


def a1_closed(binding, paper_sign: bool = False) -> complex:
    """Closed form A^(1)(u, v) = pi (-1)^(i(u-ub)) a(iv, 1-iu, 1+iu-iv).

    paper_sign=True uses the printed variant (-1)^(i(v-vb)); the two differ
    by (-1)^(m) of the chain's gamma index and are distinguished numerically.
    """
    import math

    from .specialfn import ZIndex, a_of

    iu, iub = binding["iu"], binding["iub"]
    iv, ivb = binding["iv"], binding["ivb"]

    def zi(h, a):
        m = h - a
        mr = round(m.real)
        if abs(m - mr) > 1e-9:
            raise ValueError("A^(1) slots not single-valued")
        return ZIndex(h, mr)

    mu = round((iu - iub).real)
    mv = round((iv - ivb).real)
    sign = (-1.0) ** ((mv if paper_sign else mu) % 2)
    return (
        math.pi
        * sign
        * a_of(zi(iv, ivb))
        * a_of(zi(1 - iu, 1 - iub))
        * a_of(zi(1 + iu - iv, 1 + iub - ivb))
    )


def alpha_exchange_closed(binding, label: str = "1", plabel: str = "p1") -> complex:
    """alpha(x, x') = pi^2 / ((x - x')(xb - xb'))."""
    import math

    x = binding[f"ix_{label}"] / 1j
    xp = binding[f"ix_{plabel}"] / 1j
    xb = binding[f"ixb_{label}"] / 1j
    xbp = binding[f"ixb_{plabel}"] / 1j
    return math.pi**2 / ((x - xp) * (xb - xbp))


# --- Sklyanin measure assembly ----------------------------------------------

def measure_from_exchange(N: int, family: str = "A") -> CoefficientProduct:
    """Assemble 1/mu_S from the exchange alpha-factors and terminal deltas.

    The product is taken on the support of the reversal pairing x'_k =
    x_{N+1-k}; labels 1..N and p1..pN.
    """
    family = family.upper()
    atoms: List[object] = []
    if family == "A":
        n_seps = N
        atoms.append(Num(complex(2**N)))
        atoms.append(PiPower(Fraction(2 * N)))
        for k in range(1, N + 1):
            atoms.append(DeltaSpectral(str(k), f"p{N + 1 - k}"))
    elif family == "B":
        n_seps = N - 1
        atoms.append(Num(complex(2 ** (N - 1))))
        atoms.append(PiPower(Fraction(2 + 4 * (N - 1))))
        atoms.append(DeltaPoint("p", "pp"))
        for k in range(1, N):
            atoms.append(DeltaSpectral(str(k), f"p{N - k}"))
    else:
        raise ValueError("measure assembly implemented for families A and B")
    # alpha(x_j, x'_k) factors surviving on the reversal support: pairs j < l
    for j in range(1, n_seps + 1):
        for l in range(j + 1, n_seps + 1):
            atoms.append(PiPower(Fraction(2)))
            atoms.append(LinearFactor(nform_diff(str(j), str(l)), -1))
            atoms.append(LinearFactor(nbarform_diff(str(j), str(l)), -1))
    return CoefficientProduct(atoms)


def nform_diff(l1: str, l2: str) -> AffineForm:
    """(x_l1 - x_l2) as a form over the i x basis."""
    return AffineForm(0, {f"ix_{l1}": QC(0, -1), f"ix_{l2}": QC(0, 1)})


def nbarform_diff(l1: str, l2: str) -> AffineForm:
    return AffineForm(0, {f"ixb_{l1}": QC(0, -1), f"ixb_{l2}": QC(0, 1)})
