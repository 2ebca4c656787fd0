"""Boost and frame dressings of the Cartan connection, and the Weyl cocycles.

The boost dressing u1 = K1(q) with q = a . e^-1 kills the trace block of the
connection; the frame dressing ubar = diag(1, e, 1) converts the result to
holonomic (coordinate) form.  Both use only the first matrix column of the
connection, so their jets stay exact through chains of gauge transforms.

Residual Weyl transformations of dressed fields act through the cocycle
matrices C(z) (frame form) and Cbar(z) (holonomic form); residual Lorentz
transformations act through constant diag(1, S, 1) conjugation.  The same
transform_* combinators implement gauge transformation and dressing: only the
transformation law of the acting field differs, never the formula.
"""

from __future__ import annotations

import numpy as np

from . import jets
from .cartan import (
    CartanError,
    ConnectionField,
    constant_field,
    matvec,
    transform_connection,
    transform_section,
)
from .fields import JetField, ScalarField
from .geometry import Geometry


def boost_vector(conn: ConnectionField, point, order):
    """q_b = a_mu e^mu_b from the connection's first column."""
    col = conn.col0(point, order)
    alg = jets.algebra(conn.n, order)
    a = col[:, 0]  # (n, NC)
    e = np.swapaxes(col[:, 1:-1], 0, 1)  # e^a_mu
    e_val = alg.value(e)
    scale = max(1.0, float(np.abs(e_val).max())) ** conn.n
    if abs(np.linalg.det(e_val)) < 1e-12 * scale:
        raise CartanError(f"soldering block is singular at {point}")
    einv = alg.inv_matrix(e)
    return alg.matmul(a[None, :], einv)[0]  # (n, NC)


def k1_jet_matrix(q, eta, alg):
    """K1(q) for a jet-valued row q: rows (1, q, qq^t/2; 0, 1, q^t; 0, 0, 1)."""
    n = eta.shape[0]
    eta_inv = np.linalg.inv(eta)
    m = alg.const(np.eye(n + 2))
    qt = np.tensordot(eta_inv, q, axes=(1, 0))
    m[0, 1:-1] = q
    m[0, -1] = 0.5 * alg.mul(q, qt).sum(axis=0)
    m[1:-1, -1] = qt
    return m


def boost_dressing(conn: ConnectionField) -> JetField:
    """Dressing field u1 = K1(a . e^-1); the dressed connection has no trace block."""
    n = conn.n
    eta = conn.eta

    def fn(point, order):
        alg = jets.algebra(n, order)
        q = boost_vector(conn, point, order)
        return k1_jet_matrix(q, eta, alg)

    return JetField(fn, n, max_order=conn.col0_order, label=f"u1({conn.label})")


def frame_dressing(conn: ConnectionField) -> JetField:
    """ubar = diag(1, e, 1) with the vielbein from the soldering block."""
    n = conn.n

    def fn(point, order):
        alg = jets.algebra(n, order)
        e, _ = conn.frame(point, order)
        m = alg.const(np.eye(n + 2))
        m[1:-1, 1:-1] = e
        return m

    return JetField(fn, n, max_order=conn.col0_order, label=f"ubar({conn.label})")


def dress(chi, u: JetField, label=""):
    """Dress a connection or section field (curvatures conjugate separately)."""
    if isinstance(chi, ConnectionField):
        return transform_connection(chi, u, label=label or f"({chi.label})^u")
    return transform_section(chi, u, label=label)


def upsilon_row(z_field: ScalarField, point, order, n):
    """Upsilon_mu = z^-1 d_mu z as a jet row (n, NC)."""
    alg_hi = jets.algebra(n, order + 1)
    alg = jets.algebra(n, order)
    zj = z_field.coeffs(point, order + 1)
    if zj[0] <= 0:
        raise CartanError(f"Weyl rescaling must be positive, got {zj[0]} at {point}")
    dz = np.stack([alg_hi.deriv(zj, mu) for mu in range(n)])
    return alg.mul(alg.reciprocal(alg_hi.truncate(zj, order)), dz)


def weyl_cocycle(metric, z_field, variant="C") -> JetField:
    """Cocycle matrix field: C(z) in frame form or Cbar(z) in holonomic form."""
    k1f, zf = cocycle_factors(metric, z_field, variant)
    n = metric.n

    def fn(point, order):
        alg = jets.algebra(n, order)
        return alg.matmul(k1f.at(point, order), zf.at(point, order))

    return JetField(fn, n, max_order=min(k1f.max_order, zf.max_order), label=f"{variant}(z)")


def cocycle_factors(metric, z_field, variant="C"):
    """The factorization C = k1(z) Z (resp. Cbar = k1bar(z) Zbar) as two fields."""
    n = metric.n
    N = n + 2
    eta = metric.eta
    eta_inv = np.linalg.inv(eta)
    z_field = z_field if isinstance(z_field, ScalarField) else ScalarField.from_expression(z_field)

    def k1_fn(point, order):
        alg = jets.algebra(n, order)
        ups = upsilon_row(z_field, point, order, n)  # Upsilon_mu
        geom = Geometry(metric, point)
        m = alg.const(np.eye(N))
        if variant == "C":
            ups_a = alg.matmul(ups[None, :], geom.einv(order))[0]  # Upsilon_a
            ups_t = np.tensordot(eta_inv, ups_a, axes=(1, 0))
            m[0, 1:-1] = ups_a
            m[0, -1] = 0.5 * alg.mul(ups_a, ups_t).sum(axis=0)
            m[1:-1, -1] = ups_t
        else:
            ups_up = matvec(alg, geom.ginv(order), ups)
            m[0, 1:-1] = ups
            m[0, -1] = 0.5 * alg.mul(ups, ups_up).sum(axis=0)
            m[1:-1, -1] = ups_up
        return m

    def z_fn(point, order):
        alg = jets.algebra(n, order)
        zj = z_field.coeffs(point, order)
        m = alg.const(np.eye(N))
        m[0, 0] = zj
        m[-1, -1] = alg.reciprocal(zj)
        if variant != "C":
            m[1:-1, 1:-1] = alg.mul(zj, alg.const(np.eye(n)))
        return m

    k1_label = "k1(z)" if variant == "C" else "k1bar(z)"
    z_label = "Z" if variant == "C" else "Zbar"
    return (
        JetField(k1_fn, n, max_order=2, label=k1_label),
        JetField(z_fn, n, max_order=3, label=z_label),
    )


def residual_weyl_transform(chi, metric, z_field, variant="C", label=""):
    """Residual Weyl transform of a dressed field: conjugation through the cocycle
    (plus the inhomogeneous term for connections)."""
    return dress(chi, weyl_cocycle(metric, z_field, variant), label=label or "chi^Z")


def residual_lorentz_transform(chi, metric, S, label=""):
    """Residual frame-rotation transform of a first-stage dressed field."""
    return dress(chi, lorentz_element(metric, S), label=label or "chi^S")


def lorentz_element(metric, S) -> JetField:
    """Constant diag(1, S, 1) field for residual Lorentz transformations."""
    S = np.asarray(S, dtype=float)
    if np.abs(S.T @ metric.eta @ S - metric.eta).max() > 1e-10:
        raise CartanError("S is not eta-orthogonal")
    m = np.eye(metric.n + 2)
    m[1:-1, 1:-1] = S
    return constant_field(metric, m)


def tilde_z_field(metric, z_field) -> JetField:
    """diag(1, z, 1): the Weyl action on the frame dressing."""
    n = metric.n
    z_field = z_field if isinstance(z_field, ScalarField) else ScalarField.from_expression(z_field)

    def fn(point, order):
        alg = jets.algebra(n, order)
        m = alg.const(np.eye(n + 2))
        m[1:-1, 1:-1] = alg.mul(z_field.coeffs(point, order), alg.const(np.eye(n)))
        return m

    return JetField(fn, n, max_order=3, label="Ztilde")


def tractor_metric_G(metric, point, order):
    """G = ubar^T Sigma ubar = [[0,0,-1],[0,g,0],[-1,0,0]] with jets."""
    alg = jets.algebra(metric.n, order)
    N = metric.n + 2
    G = alg.zeros((N, N))
    G[0, -1] = alg.const(-1.0)
    G[-1, 0] = alg.const(-1.0)
    G[1:-1, 1:-1] = Geometry(metric, point).g(order)
    return G
