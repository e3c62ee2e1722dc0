"""Parameter bookkeeping: bindings between formal symbols and numeric values.

One binding dict feeds every layer: polynomial coefficients (u, v, s, sb),
affine exponents (s, sb, ix_<k>, iu, ...) and wave momenta (p, p_bar).
"""

from __future__ import annotations

from typing import Dict, Mapping

from .specialfn import SepPoint, Spin

# generic defaults used by the verification suites
DEFAULT_SPIN = Spin(two_ns=0, nu_s=0.3)
DEFAULT_U = 0.17 + 0.05j


def make_binding(
    s: complex | None = None,
    sb: complex | None = None,
    spin: Spin | None = None,
    seps: Mapping[str, tuple] | None = None,
    u: complex | None = None,
    ub: complex | None = None,
    v: complex | None = None,
    vb: complex | None = None,
    p: complex | None = None,
    pb: complex | None = None,
    extra: Mapping[str, complex] | None = None,
) -> Dict[str, complex]:
    """Assemble a binding dict; bars default to the physical partners.

    seps maps a label to a SepPoint or an (x, xbar) pair; entries land as
    ix_<label> / ixb_<label> (the exponent basis stores i*x, not x).
    """
    out: Dict[str, complex] = {}
    if spin is not None:
        s, sb = spin.s, spin.sbar
    if s is not None:
        out["s"] = complex(s)
        out["sb"] = complex(sb) if sb is not None else complex(s)
    if seps:
        for label, val in seps.items():
            if isinstance(val, SepPoint):
                x, xb = val.x, val.xbar
            else:
                x, xb = val
            out[f"ix_{label}"] = 1j * complex(x)
            out[f"ixb_{label}"] = 1j * complex(xb)
    if u is not None:
        ub = u if ub is None else ub
        out["u"], out["ub"] = complex(u), complex(ub)
        out["iu"], out["iub"] = 1j * complex(u), 1j * complex(ub)
    if v is not None:
        vb = v if vb is None else vb
        out["v"], out["vb"] = complex(v), complex(vb)
        out["iv"], out["ivb"] = 1j * complex(v), 1j * complex(vb)
    if p is not None:
        out["p"] = complex(p)
        out["p_bar"] = complex(pb) if pb is not None else complex(p).conjugate()
    out["eps"] = 0.0
    if extra:
        out.update(extra)
    return out


def x_of(binding: Mapping[str, complex], label: str) -> complex:
    return binding[f"ix_{label}"] / 1j


def xbar_of(binding: Mapping[str, complex], label: str) -> complex:
    return binding[f"ixb_{label}"] / 1j
