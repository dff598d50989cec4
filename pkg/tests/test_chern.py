"""Chern densities, Chern numbers, and diagonalizability verdicts."""

import math

import numpy as np
import pytest

from mcdirac.chern import (
    BumpTriple,
    ProjectionField,
    Surface,
    _torus_axes,
    bott_projection,
    chern_density,
    chern_number_density,
    default_bump_triple,
    diagonalizability_verdict,
    embed_in_surface,
    make_torus_projection,
    plaquette_chern,
    sample_torus,
)


def test_bott_projection_invariants():
    P = bott_projection((60, 40))
    info = P.validate()
    assert info["rank"] == 1
    # north pole row is diag(1, 0)
    assert np.allclose(P.values[0, 0], np.diag([1.0, 0.0]))
    # trace one everywhere
    tr = np.trace(P.values, axis1=-2, axis2=-1)
    assert np.allclose(tr, 1.0)


def test_bott_density_is_multiple_of_volume_form():
    P = bott_projection((200, 100))
    rho = chern_density(P)
    theta = P.axes[0]
    ref = -np.sin(theta)[:, None] / (4 * np.pi)
    assert np.abs(rho - ref).max() < 1e-8


def test_bott_chern_number():
    c = chern_number_density(bott_projection((200, 100)))
    assert abs(c + 1.0) <= 1e-3


def test_constant_projection_has_zero_density():
    flat = np.zeros((24, 24, 2, 2), dtype=complex)
    flat[..., 1, 1] = 1.0
    P = ProjectionField("torus", _torus_axes(24, 24), flat)
    assert np.abs(chern_density(P)).max() < 1e-12
    assert chern_number_density(P) == pytest.approx(0.0, abs=1e-12)


def test_bump_triple_constraints():
    b = default_bump_triple()
    info = b.validate()
    assert info["gh"] <= 1e-12
    assert info["sum_rule"] <= 1e-12


def test_broken_bump_triple_fails_validation():
    b = default_bump_triple()
    bad = BumpTriple(b.f, b.g, lambda t: b.g(np.asarray(t)), b.eps)
    with pytest.raises(ValueError, match="constraints violated"):
        make_torus_projection(bad)


def test_torus_projection_structure():
    b = default_bump_triple()
    P = make_torus_projection(b, (128, 32))
    t, s = P.axes
    # constant diag(0,1) outside supp f
    assert np.allclose(P.values[0], np.diag([0.0, 1.0]))
    # mid-support of g: off-diagonal is g e^{2 pi i s}
    i = np.argmax(b.g(t))
    g_here = b.g(t[i])
    assert np.allclose(P.values[i, :, 0, 1], g_here * np.exp(2j * np.pi * s))
    assert np.allclose(P.values[i, :, 0, 0], b.f(t[i]))
    info = P.validate()
    assert info["idempotency"] <= 1e-10


def test_torus_projection_density_closed_form():
    from mcdirac.chern import _fft_derivative

    b = default_bump_triple()
    P = make_torus_projection(b, (256, 64))
    t = P.axes[0]
    f, g = b.f(t), b.g(t)
    fp = _fft_derivative(f.astype(complex)[:, None], 0, 1.0)[:, 0].real
    gp = _fft_derivative(g.astype(complex)[:, None], 0, 1.0)[:, 0].real
    closed = 4 * g * gp * f - 4 * g**2 * fp - 2 * g * gp
    rho = chern_density(P)
    assert np.abs(rho[:, 0] - closed).max() < 1e-5


def test_torus_projection_chern_number():
    P = make_torus_projection(default_bump_triple(), (256, 64))
    assert abs(chern_number_density(P) + 1.0) <= 1e-3


def test_genus2_embedding_preserves_chern_number():
    P = make_torus_projection(default_bump_triple(), (256, 64))
    emb = embed_in_surface(P, Surface(2))
    assert abs(chern_number_density(emb) + 1.0) <= 1e-3


def test_embedding_rejects_nonconstant_boundary():
    P = bott_projection((40, 30))  # not constant along axis 0 ends vs each other
    tube = ProjectionField("torus", _torus_axes(40, 30), P.values)
    with pytest.raises(ValueError, match="boundary"):
        embed_in_surface(tube, Surface(2))


def test_trivial_tube_embeds_to_zero():
    flat = np.zeros((16, 16, 2, 2), dtype=complex)
    flat[..., 1, 1] = 1.0
    tube = ProjectionField("torus", _torus_axes(16, 16), flat)
    emb = embed_in_surface(tube, Surface(2))
    assert chern_number_density(emb) == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# plaquette method


def test_one_plus_bott_band_chern_numbers():
    vals = np.eye(2) + bott_projection((100, 100)).values
    rep = diagonalizability_verdict(vals, "sphere")
    assert [b["chern"] for b in rep.bands] == [1, -1]
    assert not rep.diagonalizable
    assert all(b["flux_residual"] < 1e-6 for b in rep.bands)


def test_density_and_plaquette_methods_agree():
    P = bott_projection((100, 100))
    c_density = chern_number_density(P)
    vals = np.eye(2) + P.values
    rep = diagonalizability_verdict(vals, "sphere")
    c_plaquette = [b for b in rep.bands if b["band"] == 1][0]["chern"]
    assert abs(c_density - c_plaquette) <= 1e-3
    assert round(c_density) == c_plaquette


def test_global_eigenframe_is_diagonalizable():
    def Hf(t, s):
        th = 0.7 * math.sin(2 * math.pi * t) + 0.3 * math.cos(2 * math.pi * s)
        U = np.diag([np.exp(1j * th), np.exp(-1j * th)])
        return U @ np.diag([1.0, 2.0]) @ U.conj().T

    rep = diagonalizability_verdict(sample_torus(Hf, 32, 32), "torus")
    assert [b["chern"] for b in rep.bands] == [0, 0]
    assert rep.diagonalizable


def test_constant_field_all_zero():
    vals = np.broadcast_to(np.diag([1.0, 2.0]).astype(complex), (12, 12, 2, 2)).copy()
    rep = diagonalizability_verdict(vals, "torus")
    assert [b["chern"] for b in rep.bands] == [0, 0]
    assert rep.diagonalizable


def test_band_chern_numbers_sum_to_zero():
    vals = np.eye(2) + bott_projection((60, 60)).values
    rep = diagonalizability_verdict(vals, "sphere")
    assert sum(b["chern"] for b in rep.bands) == 0


def test_plaquette_gauge_invariance(rng):
    vals = np.eye(2) + bott_projection((40, 40)).values
    _, vecs = np.linalg.eigh(vals)
    for band in (0, 1):
        v = vecs[..., :, band]
        c0 = plaquette_chern(v, periodic0=False)
        phases = np.exp(2j * np.pi * rng.uniform(size=v.shape[:2]))
        c1 = plaquette_chern(v * phases[..., None], periodic0=False)
        assert abs(c0 - c1) < 1e-10


def test_gap_closure_detected():
    vals = np.broadcast_to(np.eye(2, dtype=complex), (8, 8, 2, 2)).copy()
    with pytest.raises(ValueError, match="gap"):
        diagonalizability_verdict(vals, "torus")


def test_integrality_guard_trips_on_coarse_grid():
    # a grid too coarse for the quadrature must raise, not return junk
    P = make_torus_projection(default_bump_triple(), (12, 8))
    with pytest.raises(ValueError, match="integral"):
        chern_number_density(P, integrality_tol=1e-6)
