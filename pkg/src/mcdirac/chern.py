"""First Chern classes of explicit projections and diagonalizability.

Two computations are provided.  For projections given in closed form the
first Chern class is integrated from its density (1/2*pi*i) Tr(p dp dp),
with spectral derivatives along periodic directions and high-order finite
differences along bounded ones.  For eigenbundles of sampled Hermitian
fields, whose eigenvectors carry arbitrary phases, the gauge-invariant
plaquette (link-variable) method is used instead; it returns integers at
finite resolution.  A positive field with simple spectrum admits a global
continuous diagonalization iff all its band Chern numbers vanish.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

__all__ = [
    "ProjectionField",
    "BumpTriple",
    "ChernReport",
    "Surface",
    "bott_projection",
    "chern_density",
    "chern_number_density",
    "default_bump_triple",
    "make_torus_projection",
    "embed_in_surface",
    "diagonalizability_verdict",
    "plaquette_chern",
    "sample_sphere",
    "sample_torus",
]

PROJECTION_TOL = 1e-10


# ---------------------------------------------------------------------------
# Sampled projection fields


@dataclass
class ProjectionField:
    """Sampled n x n projection on a two-dimensional chart.

    kind 'sphere': axes = (theta nodes on [0, pi], phi nodes, periodic);
    kind 'torus': axes = (t nodes, s nodes), both periodic on [0, 1).
    values has shape (len(axis0), len(axis1), n, n).
    """

    kind: str
    axes: tuple
    values: np.ndarray
    constant_value: np.ndarray | None = None  # for embedded fields
    orientation: int = 1  # +1 if (axis0, axis1) agrees with the surface orientation

    @property
    def n(self) -> int:
        return self.values.shape[-1]

    def validate(self, tol: float = PROJECTION_TOL) -> dict:
        v = self.values
        herm = np.abs(v - np.conj(np.swapaxes(v, -1, -2))).max()
        idem = np.abs(np.einsum("...ij,...jk->...ik", v, v) - v).max()
        ranks = np.round(np.real(np.trace(v, axis1=-2, axis2=-1)))
        if herm > tol or idem > tol:
            raise ValueError(
                f"projection residuals exceed {tol:.0e}: "
                f"|P - P*| = {herm:.2e}, |P^2 - P| = {idem:.2e}"
            )
        if ranks.min() != ranks.max():
            raise ValueError("projection rank is not constant over the domain")
        return {"hermiticity": float(herm), "idempotency": float(idem), "rank": int(ranks.flat[0])}


def _sphere_axes(n_theta: int, n_phi: int):
    theta = np.linspace(0.0, np.pi, n_theta)
    phi = np.arange(n_phi) * (2 * np.pi / n_phi)
    return theta, phi


def _torus_axes(n_t: int, n_s: int):
    return np.arange(n_t) / n_t, np.arange(n_s) / n_s


def bott_projection(grid=(200, 100)) -> ProjectionField:
    """Rank-one projection (1 + x.sigma)/2 over the unit sphere, sampled on
    a latitude-longitude grid (n_theta, n_phi)."""
    n_theta, n_phi = grid
    theta, phi = _sphere_axes(n_theta, n_phi)
    st, ct = np.sin(theta)[:, None], np.cos(theta)[:, None]
    x1 = st * np.cos(phi)[None, :]
    x2 = st * np.sin(phi)[None, :]
    x3 = ct * np.ones_like(phi)[None, :]
    p = np.empty((n_theta, n_phi, 2, 2), dtype=complex)
    p[..., 0, 0] = (1 + x3) / 2
    p[..., 0, 1] = (x1 + 1j * x2) / 2
    p[..., 1, 0] = (x1 - 1j * x2) / 2
    p[..., 1, 1] = (1 - x3) / 2
    return ProjectionField("sphere", (theta, phi), p)


# ---------------------------------------------------------------------------
# Chern density and its integral


def _fornberg_row(x, x0, order=1):
    """Finite-difference weights for the derivative at x0 from nodes x."""
    n = len(x)
    c = np.zeros((n, order + 1))
    c[0, 0] = 1.0
    c1 = 1.0
    c4 = x[0] - x0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def _fd_derivative_axis0(values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Fourth-order finite-difference d/dx along axis 0 (non-periodic)."""
    m = len(x)
    if m < 6:
        raise ValueError("need at least 6 nodes for the boundary stencils")
    D = np.zeros((m, m))
    for i in range(m):
        lo = min(max(i - 2, 0), m - 5)
        D[i, lo : lo + 5] = _fornberg_row(x[lo : lo + 5], x[i])
    return np.einsum("ij,j...->i...", D, values)


def _fft_derivative(values: np.ndarray, axis: int, period: float) -> np.ndarray:
    n = values.shape[axis]
    k = np.fft.fftfreq(n, d=1.0 / n)
    shape = [1] * values.ndim
    shape[axis] = n
    ik = (2j * np.pi / period) * k.reshape(shape)
    return np.fft.ifft(np.fft.fft(values, axis=axis) * ik, axis=axis)


def chern_density(P: ProjectionField) -> np.ndarray:
    """Chart density rho with c1 = rho dx0 ^ dx1, from
    (1/2 pi i) Tr(p dp dp) = (1/2 pi i) Tr(p [d0 p, d1 p]) dx0 ^ dx1."""
    if P.kind == "surface":
        raise ValueError("per-chart fields: call chern_density on each chart")
    v = P.values
    if P.kind == "sphere":
        d0 = _fd_derivative_axis0(v, P.axes[0])
        d1 = _fft_derivative(v, 1, 2 * np.pi)
    elif P.kind == "torus":
        d0 = _fft_derivative(v, 0, 1.0)
        d1 = _fft_derivative(v, 1, 1.0)
    else:
        raise ValueError(f"unknown domain kind {P.kind!r}")
    comm = np.einsum("...ij,...jk->...ik", d0, d1) - np.einsum(
        "...ij,...jk->...ik", d1, d0
    )
    tr = np.einsum("...ij,...ji->...", v, comm)
    return P.orientation * np.real(tr / (2j * np.pi))


def _integrate_chart(P: ProjectionField, rho: np.ndarray) -> float:
    if P.kind == "sphere":
        per_theta = rho.mean(axis=1) * 2 * np.pi
        return float(simpson(per_theta, x=P.axes[0]))
    if P.kind == "torus":
        return float(rho.mean())
    raise ValueError(f"unknown domain kind {P.kind!r}")


def chern_number_density(P: ProjectionField, integrality_tol: float | None = 1e-3) -> float:
    """Integral of the Chern density over the closed surface; raises if the
    result misses the nearest integer by more than integrality_tol."""
    if P.kind == "surface":
        total = 0.0
        for chart in P.axes:  # axes holds the chart list for embedded fields
            total += _integrate_chart(chart, chern_density(chart))
    else:
        total = _integrate_chart(P, chern_density(P))
    if integrality_tol is not None and abs(total - round(total)) > integrality_tol:
        raise ValueError(
            f"Chern integral {total:.6f} is not integral to {integrality_tol:.0e}; "
            "increase the grid resolution"
        )
    return total


# ---------------------------------------------------------------------------
# Bump triple and the torus projection


def _smoothstep(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1, strictly monotone between."""
    x = np.asarray(x, dtype=float)

    def sig(y):
        out = np.zeros_like(y)
        pos = y > 0
        out[pos] = np.exp(-1.0 / y[pos])
        return out

    a = sig(x)
    b = sig(1.0 - x)
    return a / (a + b)


@dataclass(frozen=True)
class BumpTriple:
    """Functions f, g, h on (0, 1) with g h = 0 and f^2 + g^2 + h^2 = f,
    f vanishing identically near t = 0 and t = 1."""

    f: object
    g: object
    h: object
    eps: float = 0.1

    def validate(self, samples: int = 2001, tol: float = 1e-12) -> dict:
        t = np.linspace(0.0, 1.0, samples)
        f, g, h = self.f(t), self.g(t), self.h(t)
        prod = np.abs(g * h).max()
        constraint = np.abs(f**2 + g**2 + h**2 - f).max()
        edge = max(
            np.abs(f[t <= self.eps]).max(initial=0.0),
            np.abs(f[t >= 1.0 - self.eps]).max(initial=0.0),
        )
        if prod > tol or constraint > tol or edge > tol:
            raise ValueError(
                f"bump-triple constraints violated: |g h| = {prod:.2e}, "
                f"|f^2+g^2+h^2-f| = {constraint:.2e}, edge value {edge:.2e}"
            )
        return {"gh": float(prod), "sum_rule": float(constraint), "edge": float(edge)}


def default_bump_triple(eps: float = 0.1) -> BumpTriple:
    """f ramps 0 -> 1 on (eps, 0.45), plateaus at 1, ramps down on
    (0.55, 1-eps); g = sqrt(f(1-f)) on the rising half, h on the falling."""
    up_hi = 0.45
    down_lo = 0.55

    def f(t):
        t = np.asarray(t, dtype=float)
        rise = _smoothstep((t - eps) / (up_hi - eps))
        fall = _smoothstep((1.0 - eps - t) / (1.0 - eps - down_lo))
        return np.where(t < 0.5, rise, fall)

    def g(t):
        t = np.asarray(t, dtype=float)
        v = f(t)
        return np.where(t < 0.5, np.sqrt(np.maximum(v * (1.0 - v), 0.0)), 0.0)

    def h(t):
        t = np.asarray(t, dtype=float)
        v = f(t)
        return np.where(t >= 0.5, np.sqrt(np.maximum(v * (1.0 - v), 0.0)), 0.0)

    return BumpTriple(f, g, h, eps)


def make_torus_projection(b: BumpTriple, grid=(256, 64)) -> ProjectionField:
    """Projection [[f, h + g e^{2 pi i s}], [h + g e^{-2 pi i s}, 1 - f]]
    on the (t, s) torus; constant diag(0, 1) outside supp(f)."""
    b.validate()
    n_t, n_s = grid
    t, s = _torus_axes(n_t, n_s)
    f = b.f(t)[:, None] * np.ones(n_s)[None, :]
    off = b.h(t)[:, None] + b.g(t)[:, None] * np.exp(2j * np.pi * s)[None, :]
    p = np.empty((n_t, n_s, 2, 2), dtype=complex)
    p[..., 0, 0] = f
    p[..., 0, 1] = off
    p[..., 1, 0] = np.conj(off)
    p[..., 1, 1] = 1.0 - f
    # the (t, s) chart is negatively oriented: the density in the oriented
    # surface is 4 g g' f - 4 g^2 f' - 2 g g', integrating to -1
    P = ProjectionField("torus", (t, s), p, orientation=-1)
    P.validate()
    return P


# ---------------------------------------------------------------------------
# Embedding into a closed genus-g surface


@dataclass(frozen=True)
class Surface:
    """Closed surface as a list of chart names; one chart may carry a
    nonconstant field, the rest are filled with a constant projection."""

    genus: int

    def chart_names(self):
        return ["tube"] + [f"patch{i}" for i in range(2 * self.genus)]


def embed_in_surface(
    P_tube: ProjectionField,
    surface: Surface,
    tube_chart: str = "tube",
    boundary_tol: float = 1e-10,
) -> ProjectionField:
    """Extend a tube field, constant near its t-boundary, by that constant
    over the remaining charts of the surface; the Chern number is carried
    entirely by the tube chart (the density vanishes where P is constant)."""
    v = P_tube.values
    const = v[0, 0]
    spread = max(np.abs(v[0] - const).max(), np.abs(v[-1] - const).max())
    if spread > boundary_tol:
        raise ValueError(
            f"tube field is not constant near its boundary (spread {spread:.2e})"
        )
    charts = []
    n_t = 32
    for name in surface.chart_names():
        if name == tube_chart:
            charts.append(P_tube)
            continue
        t, s = _torus_axes(n_t, n_t)
        flat = np.broadcast_to(const, (n_t, n_t) + const.shape).copy()
        charts.append(ProjectionField("torus", (t, s), flat))
    return ProjectionField("surface", tuple(charts), v, constant_value=const.copy())


# ---------------------------------------------------------------------------
# Plaquette Chern numbers of eigenbundles


def sample_sphere(fn, n_theta: int = 100, n_phi: int = 100):
    theta, phi = _sphere_axes(n_theta, n_phi)
    out = None
    for i, th in enumerate(theta):
        for j, ph in enumerate(phi):
            x = (math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th))
            m = np.asarray(fn(*x), dtype=complex)
            if out is None:
                out = np.empty((n_theta, n_phi) + m.shape, dtype=complex)
            out[i, j] = m
    return out


def sample_torus(fn, n1: int = 64, n2: int = 64):
    t, s = _torus_axes(n1, n2)
    out = None
    for i, a in enumerate(t):
        for j, b in enumerate(s):
            m = np.asarray(fn(a, b), dtype=complex)
            if out is None:
                out = np.empty((n1, n2) + m.shape, dtype=complex)
            out[i, j] = m
    return out


def plaquette_chern(vectors: np.ndarray, periodic0: bool) -> float:
    """Lattice Chern number of a sampled line bundle via link variables.

    vectors: (N0, N1, n) normalized frames; axis 1 is always periodic,
    axis 0 is periodic for a torus and bounded (pole-terminated) for a
    sphere grid.  Per-site phases cancel plaquette by plaquette."""
    v = vectors
    up = np.roll(v, -1, axis=0) if periodic0 else v[1:]
    base = v if periodic0 else v[:-1]
    u0 = np.einsum("ijk,ijk->ij", np.conj(base), up)  # link along axis 0
    u1 = np.einsum("ijk,ijk->ij", np.conj(v), np.roll(v, -1, axis=1))
    u1_top = np.roll(u1, -1, axis=0) if periodic0 else u1[1:]
    loop = u0 * u1_top * np.conj(np.roll(u0, -1, axis=1)) * np.conj(u1[: u0.shape[0]])
    return float(np.angle(loop).sum() / (2 * np.pi))


@dataclass
class ChernReport:
    bands: list
    gaps: dict
    diagonalizable: bool
    domain: str
    grid: tuple

    def to_json(self) -> dict:
        return {
            "bands": self.bands,
            "gaps": self.gaps,
            "diagonalizable": self.diagonalizable,
            "domain": self.domain,
            "grid": list(self.grid),
        }


def diagonalizability_verdict(
    values: np.ndarray,
    domain: str = "sphere",
    gap_tol: float = 1e-3,
) -> ChernReport:
    """Band Chern numbers of a sampled positive Hermitian field with simple
    spectrum; the field is continuously diagonalizable iff all vanish."""
    values = np.asarray(values, dtype=complex)
    N0, N1, n, _ = values.shape
    herm = np.abs(values - np.conj(np.swapaxes(values, -1, -2))).max()
    if herm > 1e-10:
        raise ValueError(f"field is not Hermitian (defect {herm:.2e})")
    eigvals, eigvecs = np.linalg.eigh(values)
    scale = np.abs(eigvals).max()
    min_gap = float(np.min(np.diff(eigvals, axis=-1)) / scale) if n > 1 else math.inf
    if n > 1 and min_gap < gap_tol:
        raise ValueError(
            f"spectral gap {min_gap:.2e} below threshold {gap_tol:.0e}: "
            "simple-spectrum hypothesis violated"
        )
    bands = []
    total = 0
    for i in range(n):
        vecs = eigvecs[..., :, i]
        c_float = plaquette_chern(vecs, periodic0=(domain == "torus"))
        c = int(round(c_float))
        total += c
        bands.append(
            {
                "band": i,
                "lambda_min": float(eigvals[..., i].min()),
                "lambda_max": float(eigvals[..., i].max()),
                "chern": c,
                "flux_residual": float(abs(c_float - c)),
            }
        )
    if total != 0:
        raise ValueError(f"band Chern numbers sum to {total}, expected 0")
    return ChernReport(
        bands=bands,
        gaps={"min_relative_gap": min_gap},
        diagonalizable=all(b["chern"] == 0 for b in bands),
        domain=domain,
        grid=(N0, N1),
    )
