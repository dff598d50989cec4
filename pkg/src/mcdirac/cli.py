"""Command-line entry point.

Commands: symbols-verify, curvature, specfun, zeta, gb-check, chern,
diag-check.  Reports are JSON (densities and traces additionally as
CSV); every run with an --out path writes the fully resolved
configuration next to its outputs so reruns are reproducible.

Exit codes: 0 pass, 2 verification failure, 3 numerical-quality
failure, 4 input error.
"""

from __future__ import annotations

import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import chern as chern_mod
from . import dirac_numerics as dn
from .specfun import get_function
from .symcalc import (
    build_a_symbols,
    build_b_symbols,
    parametrix_defect,
    poly_is_zero_exact,
)
from .xi_integrate import build_b2_parts, integrate_pureH

EXIT_OK = 0
EXIT_VERIFICATION = 2
EXIT_NUMERICAL = 3
EXIT_INPUT = 4


def _write_report(out: str | None, payload: dict, config: dict):
    payload = {"version": __version__, "config": config, **payload}
    text = json.dumps(payload, indent=2, sort_keys=True, default=str)
    if out:
        path = Path(out)
        path.write_text(text + "\n")
        cfg_path = path.with_suffix(".config.json")
        cfg_path.write_text(
            json.dumps({"version": __version__, "config": config}, indent=2, sort_keys=True)
            + "\n"
        )
    click.echo(text)


@click.group()
def main():
    """Verification and computation toolkit for conformally rescaled
    Dirac operators on the flat 2-torus."""


# ---------------------------------------------------------------------------
# symbols-verify

# Reference seven-term display of the traced, angularly averaged
# A-independent order -2 symbol: (b0 power, H power, xi^2 power) -> coeff,
# split into the gradient-squared family (per direction) and the
# Laplacian family.
_EXPECTED_GRAD = {(2, 2, 0): -2, (3, 6, 1): 46, (4, 10, 2): -136, (5, 14, 3): 96}
_EXPECTED_LAP = {(2, 3, 0): -1, (3, 7, 1): 8, (4, 11, 2): -8}

# Coefficients (times pi) of the integrated A-independent curvature density.
_EXPECTED_PURE = {
    (("H", -1), ("lap",)): Fraction(1, 3),
    (("H", -2), ("dH", 1), ("dH", 1)): Fraction(-1, 3),
    (("H", -2), ("dH", 2), ("dH", 2)): Fraction(-1, 3),
}


def _deg0_families(deg0):
    grad, lap = {}, {}
    extras = []
    for (cliff, (e1, e2, k), word), c in deg0.terms.items():
        b0p = sum(g[1] for g in word if g[0] == "b0")
        hp = sum(g[1] for g in word if g[0] == "H")
        kinds = sorted(g[0] for g in word if g[0] not in ("b0", "H"))
        if kinds == ["dH", "dH"]:
            d = {g[1] for g in word if g[0] == "dH"}
            if len(d) == 1:
                grad[(b0p, hp, k, d.pop())] = c
            else:
                extras.append((word, c))
        elif kinds == ["lap"]:
            lap[(b0p, hp, k)] = c
        else:
            extras.append((word, c))
    return grad, lap, extras


@main.command("symbols-verify")
@click.option("--perturb", is_flag=True, help="Inject a unit coefficient perturbation (negative-control mode).")
@click.option("--out", default=None, help="Write the JSON report to this path.")
def symbols_verify(perturb, out):
    """Exact checks: parametrix identity through order -2, the
    seven-term traced display, and the integrated curvature density."""
    config = {"command": "symbols-verify", "perturb": perturb}
    checks = []
    ok = True

    for include_A in (False, True):
        a_syms = build_a_symbols(include_A=include_A)
        b_syms = build_b_symbols(*a_syms)
        for side in ("left", "right"):
            defects = parametrix_defect(a_syms, b_syms, side=side)
            zero = all(poly_is_zero_exact(d) for d in defects.values())
            checks.append(
                {
                    "check": f"parametrix identity ({side}, A={'on' if include_A else 'off'})",
                    "status": "MATCH" if zero else "MISMATCH",
                }
            )
            ok = ok and zero

    parts = build_b2_parts(include_A=False)
    deg0 = parts["deg0"]
    if perturb:
        key = next(iter(sorted(deg0.terms, key=str)))
        deg0.terms[key] = deg0.terms[key] + 1
    grad, lap, extras = _deg0_families(deg0)
    grad_flat = {(b, h, k): c for (b, h, k, _d), c in grad.items()}
    display_ok = (
        not extras
        and all(grad_flat.get(k) == v for k, v in _EXPECTED_GRAD.items())
        and all(lap.get(k) == v for k, v in _EXPECTED_LAP.items())
        and len(grad) == 2 * len(_EXPECTED_GRAD)
        and len(lap) == len(_EXPECTED_LAP)
    )
    checks.append(
        {
            "check": "order -2 traced display (7 terms per structure)",
            "status": "MATCH" if display_ok else "MISMATCH",
            "gradient_coefficients": sorted(int(c.re) for c in grad_flat.values()),
            "laplacian_coefficients": sorted(int(c.re) for c in lap.values()),
        }
    )
    ok = ok and display_ok

    dens_ok = True
    try:
        dens = integrate_pureH(deg0)
        dens_ok = dens.pureH == _EXPECTED_PURE
    except Exception as exc:  # perturbations can break integrability
        dens_ok = False
        checks.append({"check": "curvature density integration", "status": f"ERROR: {exc}"})
    checks.append(
        {
            "check": "integrated density coefficients (-pi/3, -pi/3, +pi/3)",
            "status": "MATCH" if dens_ok else "MISMATCH",
        }
    )
    ok = ok and dens_ok

    _write_report(out, {"checks": checks, "pass": ok}, config)
    sys.exit(EXIT_OK if ok else EXIT_VERIFICATION)


# ---------------------------------------------------------------------------
# curvature

@main.command("curvature")
@click.option("--out", default=None, help="Write the density JSON to this path.")
def curvature(out):
    """Serialize the full order -2 curvature density (exact pure-H part
    plus spectral-function sandwich terms)."""
    from .xi_integrate import total_density

    config = {"command": "curvature"}
    dens = total_density()
    payload = json.loads(dens.to_json())
    _write_report(out, {"density": payload}, config)
    sys.exit(EXIT_OK)


# ---------------------------------------------------------------------------
# specfun

@main.command("specfun")
@click.argument("action", type=click.Choice(["eval"]))
@click.option("--fn", required=True, type=click.Choice(["G", "F", "Fdiv", "Q"]))
@click.option("--s", "s_val", required=True, type=float)
@click.option("--t", "t_val", default=None, type=float)
def specfun_cmd(action, fn, s_val, t_val):
    """Evaluate a spectral function at a point."""
    f = get_function(fn)
    try:
        if f.arity == 2:
            if t_val is None:
                raise click.UsageError(f"{fn} needs --t")
            value = f(s_val, t_val)
        else:
            value = f(s_val)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    click.echo(f"{value:.12f}")
    sys.exit(EXIT_OK)


# ---------------------------------------------------------------------------
# zeta / gb-check

def _parse_N(text):
    return [int(x) for x in text.split(",") if x]


@main.command("zeta")
@click.option("--profile", default="P1", type=click.Choice(dn.PROFILE_NAMES))
@click.option("--n", default=2, type=int)
@click.option("--N", "n_list", default="8,12,16", help="Comma-separated cutoffs.")
@click.option("--guard", default="auto", help="Guard band: 'auto' or an integer.")
@click.option("--out", default=None, help="Write the JSON report here (+ CSV of traces).")
def zeta_cmd(profile, n, n_list, guard, out):
    """Heat-trace zeta(0) of the rescaled operator for one profile."""
    try:
        Ns = _parse_N(n_list)
        guard_val = None if guard == "auto" else int(guard)
    except ValueError:
        click.echo("error: bad --N or --guard", err=True)
        sys.exit(EXIT_INPUT)
    config = {
        "command": "zeta",
        "profile": profile,
        "n": n,
        "N": Ns,
        "guard": guard,
        "t_window": {"c1": 25.0, "c2": 0.03},
    }
    prof = dn.get_profile(profile, n)
    rows = []
    trace_rows = []
    for N in Ns:
        op = dn.assemble_profile(profile, N, n, guard=guard_val)
        fit = dn.zeta_at_zero(op, scale=prof.get("scale", 1.0), include_c2=True)
        rows.append(
            {
                "N": N,
                "dim": op.dim,
                "zeta0": fit.zeta0,
                "bracket": list(fit.bracket),
                "kernel_dim": fit.kernel_dim,
                "residual_rms": fit.residual_rms,
            }
        )
        trace_rows += [(N, t, tr) for t, tr in zip(fit.t_grid, fit.traces)]
    if out:
        csv_path = Path(out).with_suffix(".traces.csv")
        with csv_path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["N", "t", "trace"])
            w.writerows(trace_rows)
    _write_report(out, {"rows": rows, "expected_flat": -2.0 * n}, config)
    sys.exit(EXIT_OK)


@main.command("gb-check")
@click.option("--profile", default="P2", type=click.Choice(dn.PROFILE_NAMES))
@click.option("--n", default=2, type=int)
@click.option("--N", "n_list", default="8,12,16")
@click.option("--tolerance", default=0.05, type=float)
@click.option("--out", default=None)
def gb_check(profile, n, n_list, tolerance, out):
    """Compare zeta(0) of D and of the rescaled operator (both should be
    -2n); FAIL exits with the numerical-quality code."""
    try:
        Ns = _parse_N(n_list)
    except ValueError:
        click.echo("error: bad --N", err=True)
        sys.exit(EXIT_INPUT)
    config = {
        "command": "gb-check",
        "profile": profile,
        "n": n,
        "N": Ns,
        "tolerance": tolerance,
    }
    report = dn.gauss_bonnet_report(profile, Ns, n=n)
    passed = report["difference"] <= tolerance
    report["rows"] = [
        {**r, "bracket_D": list(r["bracket_D"]), "bracket_Dh": list(r["bracket_Dh"])}
        for r in report["rows"]
    ]
    _write_report(out, {**report, "pass": bool(passed)}, config)
    sys.exit(EXIT_OK if passed else EXIT_NUMERICAL)


# ---------------------------------------------------------------------------
# chern / diag-check

def _parse_grid(text):
    a, b = text.lower().split("x")
    return int(a), int(b)


@main.command("chern")
@click.option("--case", required=True, type=click.Choice(["bott", "torus", "embed"]))
@click.option("--genus", default=2, type=int)
@click.option("--grid", default=None, help="Grid AxB (defaults per case).")
@click.option("--out", default=None)
def chern_cmd(case, genus, grid, out):
    """Chern number of one of the shipped projections."""
    try:
        grid_t = _parse_grid(grid) if grid else None
    except ValueError:
        click.echo("error: bad --grid, expected AxB", err=True)
        sys.exit(EXIT_INPUT)
    config = {"command": "chern", "case": case, "genus": genus, "grid": grid}
    try:
        if case == "bott":
            P = chern_mod.bott_projection(grid_t or (200, 100))
        else:
            P = chern_mod.make_torus_projection(
                chern_mod.default_bump_triple(), grid_t or (256, 64)
            )
            if case == "embed":
                P = chern_mod.embed_in_surface(P, chern_mod.Surface(genus))
        c = chern_mod.chern_number_density(P)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    _write_report(out, {"case": case, "chern_number": c, "rounded": int(round(c))}, config)
    sys.exit(EXIT_OK)


def _read_field_csv(path):
    """CSV rows: i, j, then the row-major real,imag pairs of the matrix."""
    cells = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            i, j = int(row[0]), int(row[1])
            vals = [float(x) for x in row[2:]]
            n = int(round((len(vals) // 2) ** 0.5))
            if 2 * n * n != len(vals):
                raise ValueError(f"row ({i},{j}): expected 2*n^2 matrix entries")
            m = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
            cells[(i, j)] = m.reshape(n, n)
    if not cells:
        raise ValueError("empty field file")
    N0 = max(i for i, _ in cells) + 1
    N1 = max(j for _, j in cells) + 1
    n = next(iter(cells.values())).shape[0]
    out = np.zeros((N0, N1, n, n), dtype=complex)
    for (i, j), m in cells.items():
        out[i, j] = m
    if len(cells) != N0 * N1:
        raise ValueError("field grid has missing points")
    return out


@main.command("diag-check")
@click.option("--input", "input_path", required=True, type=click.Path(exists=False))
@click.option("--domain", default="torus", type=click.Choice(["torus", "sphere"]))
@click.option("--gap-tol", default=1e-3, type=float)
@click.option("--out", default=None)
def diag_check(input_path, domain, gap_tol, out):
    """Band Chern numbers and diagonalizability verdict for a sampled
    Hermitian field read from CSV."""
    config = {
        "command": "diag-check",
        "input": input_path,
        "domain": domain,
        "gap_tol": gap_tol,
    }
    try:
        values = _read_field_csv(input_path)
    except (OSError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INPUT)
    try:
        report = chern_mod.diagonalizability_verdict(values, domain, gap_tol)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    _write_report(out, report.to_json(), config)
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
