"""Construction descriptors and the build pipeline.

A descriptor names a quotient tessellation in one line::

    5,3,3,5/word(ababacbdedcbabacedcbaedced)
    5,3,3,5/ideal(2)            5,3,3,5/ideal(11,4)
    5,3,3,5/ideal-sqrt5         5,3,3,5/rotation-ideal(2)
    4,4/word(abcbabcbabcbabcb)
    4,4/covering(4,4/word(abcbabcbabcbabcb)|abcbabcb;bcabcbcbbcabcbcb)

``word`` takes ``;``-separated relators, ``covering`` a base descriptor and
the generating words of the deck group.  An optional ``?cap=N`` bounds the
enumeration.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algebra import IdealKind, classify_ideal, reduce
from .complex import (
    CellComplex,
    SubgroupSpec,
    build_complex,
    euler_characteristic,
    proper_euler_characteristic,
    properness_report,
    quotient_complex,
)
from .coxeter import (
    SchlafliSymbol,
    golden_det,
    gram_from_symbol,
    presentation_from_symbol,
    reduce_rep,
    reflection_rep,
    verify_relations,
)
from .css import CssCode, from_complex, rate_bound, rate_bound_check
from .errors import ParseError, ResourceCapExceeded, VerificationError
from .groups import (
    GroupAction,
    bfs_matrix_group,
    descriptor_hash,
    load_group,
    parabolic_order_report,
    relator_closure,
    relators_hold,
    save_group,
    todd_coxeter,
)

log = logging.getLogger(__name__)

DEFAULT_CAP = 2_500_000
LARGE_CAP = 40_000_000
_METHOD = re.compile(r"^(ideal|rotation-ideal|word|covering)\((.*)\)$|^(ideal-sqrt5)$")


@dataclass(frozen=True)
class ConstructionDescriptor:
    symbol: str
    method: str  # ideal | ideal-sqrt5 | rotation-ideal | word | covering
    args: tuple = ()
    base: ConstructionDescriptor | None = None
    cap: int | None = None

    @classmethod
    def parse(cls, text: str) -> ConstructionDescriptor:
        text = text.strip()
        cap = None
        if "?" in text and not text.endswith(")") or re.search(r"\?cap=\d+$", text):
            text, _, tail = text.rpartition("?")
            m = re.fullmatch(r"cap=(\d+)", tail)
            if not m:
                raise ParseError(f"bad descriptor option {tail!r}")
            cap = int(m.group(1))
        symbol, sep, method = text.partition("/")
        if not sep:
            raise ParseError(f"descriptor {text!r} lacks '/method'")
        try:
            symbol = ",".join(map(str, SchlafliSymbol.parse(symbol).entries))
        except (ValueError, TypeError) as exc:
            raise ParseError(f"bad symbol {symbol!r}: {exc}") from exc
        m = _METHOD.match(method)
        if not m:
            raise ParseError(f"unknown construction method {method!r}")
        if m.group(3):
            return cls(symbol, "ideal-sqrt5", (), None, cap)
        name, body = m.group(1), m.group(2)
        if name in ("ideal", "rotation-ideal"):
            try:
                nums = tuple(int(x) for x in body.split(","))
            except ValueError as exc:
                raise ParseError(f"{name} needs integer arguments, got {body!r}") from exc
            if not 1 <= len(nums) <= 2:
                raise ParseError(f"{name} takes a prime and optionally a root")
            return cls(symbol, name, nums, None, cap)
        if name == "word":
            words = tuple(w for w in body.split(";") if w)
            if not words or not all(re.fullmatch(r"[a-z]+", w) for w in words):
                raise ParseError(f"word relators must be letters a..z, got {body!r}")
            return cls(symbol, "word", words, None, cap)
        base_text, sep, words = body.rpartition("|")
        if not sep:
            raise ParseError("covering needs 'base|words'")
        base = cls.parse(base_text)
        if base.symbol != symbol:
            raise ParseError("covering base has a different symbol")
        wl = tuple(w for w in words.split(";") if w)
        if not all(re.fullmatch(r"[a-z]+", w) for w in wl):
            raise ParseError(f"subgroup words must be letters, got {words!r}")
        return cls(symbol, "covering", wl, base, cap)

    def __str__(self) -> str:
        if self.method == "ideal-sqrt5":
            body = "ideal-sqrt5"
        elif self.method in ("ideal", "rotation-ideal"):
            body = f"{self.method}({','.join(map(str, self.args))})"
        elif self.method == "word":
            body = f"word({';'.join(self.args)})"
        else:
            body = f"covering({self.base}|{';'.join(self.args)})"
        out = f"{self.symbol}/{body}"
        return out + (f"?cap={self.cap}" if self.cap is not None else "")


@dataclass
class BuildResult:
    descriptor: ConstructionDescriptor
    group: GroupAction | None
    complex: CellComplex
    code: CssCode
    report: dict


def _ideal_for(desc: ConstructionDescriptor):
    if desc.method == "ideal-sqrt5":
        return classify_ideal(5)
    p = desc.args[0]
    root = desc.args[1] if len(desc.args) > 1 else None
    try:
        return classify_ideal(p, root)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def build_group(desc: ConstructionDescriptor, cache_dir=None, large: bool = False) -> tuple[GroupAction, dict]:
    """The finite group of a non-covering descriptor, with a report."""
    if desc.method == "covering":
        raise ValueError("covering descriptors have no group of their own")
    cap = desc.cap or (LARGE_CAP if large else DEFAULT_CAP)
    if cap > DEFAULT_CAP and not large:
        raise ResourceCapExceeded(f"cap {cap} exceeds {DEFAULT_CAP}; pass --large to allow it")
    pres = presentation_from_symbol(desc.symbol)
    report: dict = {}
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"{descriptor_hash(str(desc))}.grp"
        if path.exists():
            G, stored = load_group(path)
            if stored == str(desc):
                log.info("loaded %s from cache", desc)
                report["cache"] = "hit"
                return G, _group_report(G, pres, report)
    if desc.method == "word":
        T = todd_coxeter(pres, list(desc.args), cap=cap)
        if not T.complete:
            raise ResourceCapExceeded(f"coset enumeration exceeded {cap} live cosets")
        report["max_live_cosets"] = T.max_live
        G = T
    else:
        ideal = _ideal_for(desc)
        rep = reflection_rep(gram_from_symbol(desc.symbol))
        red = reduce_rep(rep, ideal)
        rel = verify_relations(red, pres)
        report["ideal"] = ideal.label()
        report["field_order"] = ideal.q
        report["relations_hold"] = all(rel.values())
        if not report["relations_hold"]:
            raise VerificationError(f"Coxeter relations fail modulo {ideal.label()}")
        parity = [1] * pres.rank if desc.method == "rotation-ideal" else None
        G = bfs_matrix_group(ideal.field, red.generators, cap=cap, parity=parity)
        G.elements = None  # the matrices are not needed downstream
        _check_odd_order(G.order, ideal, rep, report)
    if not relators_hold(G, relator_closure(pres.relators())):
        raise VerificationError("Coxeter relations fail in the enumerated group")
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        save_group(path, G, str(desc))
        report["cache"] = "stored"
    return G, _group_report(G, pres, report)


def _check_odd_order(order: int, ideal, rep, report: dict) -> None:
    # |Omega_5(q) x Z_2| only applies when the reduced form is nondegenerate
    q = ideal.q
    if q % 2 == 0 or rep.rank != 5:
        return
    g = rep.gram
    det = reduce(golden_det(np.stack([g.a, g.b])), ideal)
    report["reduced_form_degenerate"] = det.code == 0
    if det.code == 0:
        return
    expected = q**10 - q**8 - q**6 + q**4
    report["odd_q_order_formula"] = expected
    if order != expected:
        raise VerificationError(f"group order {order} != q^10 - q^8 - q^6 + q^4 = {expected}")


def _group_report(G: GroupAction, pres, report: dict) -> dict:
    report["group_order"] = G.order
    par = parabolic_order_report(G, pres)
    report["parabolic"] = par.rows
    report["parabolics_proper"] = par.all_proper
    return report


def build(desc: ConstructionDescriptor | str, qubit_dim: int | None = None, cache_dir=None,
          large: bool = False) -> BuildResult:
    """Full pipeline: group, complex, CSS code, and the verification report."""
    if isinstance(desc, str):
        desc = ConstructionDescriptor.parse(desc)
    pres = presentation_from_symbol(desc.symbol)
    if desc.method == "covering":
        G, report = build_group(desc.base, cache_dir, large)
        base = build_complex(G, pres, str(desc.base))
        H = SubgroupSpec(list(desc.args))
        cx = quotient_complex(base, G, H, pres)
        cx.construction = str(desc)
        report["base_counts"] = list(base.counts)
        report["deck_group_order"] = G.order // cx.order
        group = None
    else:
        G, report = build_group(desc, cache_dir, large)
        cx = build_complex(G, pres, str(desc))
        group = G
    if qubit_dim is None:
        qubit_dim = cx.dim // 2
    code = from_complex(cx, qubit_dim)
    report.update(complex_report(cx, pres))
    report.update({
        "descriptor": str(desc),
        "css_condition": code.css_condition(),
        "n": code.n,
        "k": code.k,
        "rank_hx": code.rank_x,
        "rank_hz": code.rank_z,
    })
    if desc.symbol == "5,3,3,5":
        report["rate_bound"] = rate_bound(code.n)
        report["rate_bound_holds"] = bool(rate_bound_check(code))
    code.meta["descriptor"] = str(desc)
    return BuildResult(desc, group, cx, code, report)


def complex_report(cx: CellComplex, pres) -> dict:
    stats = properness_report(cx, pres)
    out = {
        "cell_counts": list(cx.counts),
        "chi": euler_characteristic(cx),
        "chain_condition": cx.check_chain(),
        "proper": all(s.proper for s in stats),
        "incidence": [
            {
                "degree": s.degree,
                "proper": s.proper,
                "faces": s.faces,
                "expected_faces": s.expected_faces,
                "cofaces": s.cofaces,
                "expected_cofaces": s.expected_cofaces,
                "multiplicities": s.multiplicities,
            }
            for s in stats
        ],
    }
    if cx.symbol == "5,3,3,5":
        out["chi_proper_formula"] = proper_euler_characteristic(cx.order)
    return out


def verify_report(report: dict) -> list[str]:
    """Names of the failed checks in a build report (empty when all pass)."""
    failed = []
    for key in ("css_condition", "chain_condition", "relations_hold", "rate_bound_holds"):
        if report.get(key) is False:
            failed.append(key)
    if report.get("proper") and report.get("chi_proper_formula") not in (None, report.get("chi")):
        failed.append("chi_proper_formula")
    return failed


__all__ = ["ConstructionDescriptor", "BuildResult", "build", "build_group", "complex_report",
           "verify_report", "IdealKind"]
