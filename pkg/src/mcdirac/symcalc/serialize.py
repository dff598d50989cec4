"""Deterministic JSON and LaTeX forms of symbol polynomials."""

from __future__ import annotations

import json

from .algebra import SymbolPoly

_CLIFF_TAG = {0: "1", 1: "s1", 2: "s2", 3: "s3"}
_CLIFF_TEX = {0: "", 1: "\\sigma^1", 2: "\\sigma^2", 3: "\\sigma^3"}


def _gen_tag(g) -> str:
    kind = g[0]
    if kind == "H":
        return f"H^{g[1]}"
    if kind == "dH":
        return f"dH_{g[1]}"
    if kind == "ddH":
        return f"ddH_{g[1]}{g[2]}"
    if kind == "lap":
        return "lapH"
    if kind == "A":
        return f"A_{g[1]}"
    if kind == "dA":
        return f"d_{g[2]}A_{g[1]}"
    if kind == "b0":
        return f"b0^{g[1]}"
    raise ValueError(f"unknown generator {g}")


def poly_to_json(poly: SymbolPoly) -> str:
    """Sorted, deterministic JSON term list."""
    items = []
    for (cliff, xi, word), c in poly.terms.items():
        items.append(
            {
                "coeff": c.serialize(),
                "clifford": _CLIFF_TAG[cliff],
                "xi": list(xi),
                "word": [_gen_tag(g) for g in word],
            }
        )
    items.sort(key=lambda t: (t["word"], t["xi"], t["clifford"], t["coeff"]))
    return json.dumps(items, separators=(",", ":"), sort_keys=True)


def _gen_tex(g) -> str:
    kind = g[0]
    if kind == "H":
        return f"H^{{{g[1]}}}"
    if kind == "dH":
        return f"\\delta_{{{g[1]}}}(H)"
    if kind == "ddH":
        return f"\\delta_{{{g[1]}}}\\delta_{{{g[2]}}}(H)"
    if kind == "lap":
        return "\\Delta(H)"
    if kind == "A":
        return f"A_{{{g[1]}}}"
    if kind == "dA":
        return f"\\delta_{{{g[2]}}}(A_{{{g[1]}}})"
    if kind == "b0":
        return f"b_0^{{{g[1]}}}"
    raise ValueError(f"unknown generator {g}")


def poly_to_latex(poly: SymbolPoly) -> str:
    parts = []
    for (cliff, (e1, e2, q), word), c in sorted(
        poly.terms.items(), key=lambda kv: (kv[0][2], kv[0][1], kv[0][0])
    ):
        factors = [str(c)]
        if cliff:
            factors.append(_CLIFF_TEX[cliff])
        factors.extend(_gen_tex(g) for g in word)
        if e1:
            factors.append(f"\\xi_1^{{{e1}}}")
        if e2:
            factors.append(f"\\xi_2^{{{e2}}}")
        if q:
            factors.append(f"(\\xi^2)^{{{q}}}")
        parts.append(" ".join(factors))
    return " + ".join(parts) if parts else "0"
