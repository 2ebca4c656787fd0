"""Ghost fields and the nilpotent symmetry transformations of all gauge objects.

Transformation rules on a connection w, curvature F, section phi and ghost v:

    s w   = -dv - [w, v]        s F = [F, v]
    s phi = -v phi              s v = -v^2

realized through the graded arithmetic in `ghosts`; per generator these
linearize the finite transformation tables (the finite/infinitesimal
consistency suite measures exactly that).  Dressing the ghost with the boost
and frame dressings collapses it to the composite ghosts carrying only the
Weyl (and, at the first stage, Lorentz) directions.
"""

from __future__ import annotations

import numpy as np

from . import jets
from .cartan import ConnectionField
from .dressing import boost_dressing, frame_dressing
from .fields import JetField, RowField, ScalarField
from .geometry import Geometry
from .ghosts import GradedValue, even, odd


class Ghost:
    """Ghost field split over Weyl/Lorentz/boost directions.

    `components` is one (eps, s, iota) triple per Grassmann generator: eps a
    scalar field or None, s a constant eta-antisymmetric matrix or None, iota
    a row of scalar fields or None.  Lorentz parts are restricted to constant
    matrices (the residual suites use constant frame rotations).
    """

    def __init__(self, metric, components):
        self.metric = metric
        self.n = metric.n
        self.eta = metric.eta
        self.parts = []
        for eps, s, iota in components:
            eps_f = None if eps is None else (
                eps if isinstance(eps, ScalarField) else ScalarField.from_expression(eps)
            )
            s_m = None
            if s is not None:
                s_m = np.asarray(s, dtype=float)
                if np.abs(self.eta @ s_m + s_m.T @ self.eta).max() > 1e-10:
                    raise ValueError("Lorentz ghost must be eta-antisymmetric")
            iota_f = None if iota is None else (iota if isinstance(iota, RowField) else RowField(iota))
            self.parts.append((eps_f, s_m, iota_f))

    @property
    def n_generators(self):
        return len(self.parts)

    def _gen_matrix(self, k, point, order, select):
        """Matrix of generator k restricted to the chosen directions."""
        n = self.n
        alg = jets.algebra(n, order)
        eta_inv = np.linalg.inv(self.eta)
        m = alg.zeros((n + 2, n + 2))
        eps_f, s_m, iota_f = self.parts[k]
        if "eps" in select and eps_f is not None:
            e = eps_f.coeffs(point, order)
            m[0, 0] += e
            m[-1, -1] -= e
        if "s" in select and s_m is not None:
            m[1:-1, 1:-1] += alg.const(s_m)
        if "iota" in select and iota_f is not None:
            row = iota_f.coeffs(point, order)
            m[0, 1:-1] += row
            m[1:-1, -1] += np.tensordot(eta_inv, row, axes=(1, 0))
        return m

    def value(self, point, order, select=("eps", "s", "iota")) -> GradedValue:
        return odd(
            self.n, order,
            {k: self._gen_matrix(k, point, order, select) for k in range(self.n_generators)},
        )

    def matrix_field(self, k=0, select=("eps", "s", "iota")) -> JetField:
        """Coefficient matrix of one generator as a plain field (for finite checks)."""
        return JetField(
            lambda p, o: self._gen_matrix(k, p, o, select), self.n, max_order=3, label="ghost-coeff"
        )


def sigma_membership_residual(ghost: Ghost, point, order=1):
    from .cartan import sigma_matrix

    v = ghost.value(point, order)
    s = sigma_matrix(ghost.eta)
    worst = 0.0
    for m in v.components.values():
        val = jets.algebra(ghost.n, order).value(m)
        worst = max(worst, float(np.abs(val.T @ s + s @ val).max()))
    return worst


# -- transformation rules -------------------------------------------------------


def brst_connection_with(conn: ConnectionField, v_hi: GradedValue, point, order=0) -> GradedValue:
    """s w = -dv - [w, v]; v_hi carries the ghost at one order above."""
    dv = v_hi.d()
    v = v_hi.truncate(order)
    w = even(conn.n, order, conn.at(point, order), form_degree=1)
    return -dv - w.bracket(v)


def brst_connection(conn: ConnectionField, ghost: Ghost, point, order=0) -> GradedValue:
    return brst_connection_with(conn, ghost.value(point, order + 1), point, order)


def brst_curvature(curv_graded: GradedValue, ghost_value: GradedValue) -> GradedValue:
    return curv_graded.bracket(ghost_value.truncate(curv_graded.order))


def brst_section(phi_graded: GradedValue, ghost_value: GradedValue) -> GradedValue:
    return -ghost_value.truncate(phi_graded.order).matmul(phi_graded)


def brst_ghost(ghost_value: GradedValue) -> GradedValue:
    return -ghost_value.matmul(ghost_value)


def section_graded(phi: JetField, point, order) -> GradedValue:
    return even(phi.n, order, phi.at(point, order)[:, None], form_degree=0)


def curvature_graded(curv_fn, point, order, n) -> GradedValue:
    return even(n, order, curv_fn(point, order), form_degree=2)


# -- nilpotency ------------------------------------------------------------------


def s2_section_with(phi_graded: GradedValue, v: GradedValue):
    """s^2 phi = (v^2) phi - v (v phi), measured."""
    res = v.matmul(v).matmul(phi_graded) - v.matmul(v.matmul(phi_graded))
    return res.max_abs()


def s2_section(phi: JetField, ghost: Ghost, point, order=0):
    return s2_section_with(section_graded(phi, point, order), ghost.value(point, order))

def s2_ghost(ghost: Ghost, point, order=0):
    """s^2 v = (v^2) v - v (v^2), measured."""
    v = ghost.value(point, order)
    v2 = v.matmul(v)
    return (v2.matmul(v) - v.matmul(v2)).max_abs()


def s2_connection(conn: ConnectionField, ghost: Ghost, point, order=0):
    """s^2 w via graded Leibniz:
    s^2 w = d(sv) - (sw) v + w (sv) - (sv) w + v (sw), measured."""
    n = conn.n
    v_hi = ghost.value(point, order + 2)
    sv_hi = -v_hi.matmul(v_hi)  # order+2 jets of -v^2 (enough for one d)
    d_sv = sv_hi.truncate(order + 1).d()
    sv = sv_hi.truncate(order)
    v = ghost.value(point, order)
    w = even(n, order, conn.at(point, order), form_degree=1)
    sw = brst_connection(conn, ghost, point, order)
    res = d_sv + (-1.0) * sw.matmul(v) + w.matmul(sv) - sv.matmul(w) + v.matmul(sw)
    return res.max_abs()


# -- dressed (composite) ghosts ---------------------------------------------------


def linearized_boost(metric, ghost: Ghost, point, order, holonomic=False) -> GradedValue:
    """k1(eps) per generator: the nilpotent first-order part of the Weyl cocycle.

    Frame form: [[0, de.e^-1, 0], [0, 0, (de.e^-1)^t], [0, 0, 0]]; holonomic
    form has the row d eps and the column g^-1 d eps instead.
    """
    from .cartan import matvec

    n = metric.n
    alg = jets.algebra(n, order)
    alg_hi = jets.algebra(n, order + 1)
    geom = Geometry(metric, point)
    eta_inv = np.linalg.inv(metric.eta)
    parts = {}
    for k, (eps_f, _, _) in enumerate(ghost.parts):
        m = alg.zeros((n + 2, n + 2))
        if eps_f is not None:
            e_hi = eps_f.coeffs(point, order + 1)
            de = np.stack([alg_hi.deriv(e_hi, mu) for mu in range(n)])  # d_mu eps
            if holonomic:
                m[0, 1:-1] = de
                m[1:-1, -1] = matvec(alg, geom.ginv(order), de)
            else:
                p_row = alg.matmul(de[None, :], geom.einv(order))[0]  # de . e^-1
                m[0, 1:-1] = p_row
                m[1:-1, -1] = np.tensordot(eta_inv, p_row, axes=(1, 0))
        parts[k] = m
    return odd(n, order, parts)


def dressed_ghost(metric, conn: ConnectionField, ghost: Ghost, stage, point, order=0):
    """Composite ghost after dressing, with the closed-form reference.

    Returns (composite, closed_form, mismatch): composite is computed from
    u^-1 v u + u^-1 su with the transformation rules of the dressings; the
    closed form is c(eps) + v_s at the first stage and the holonomic cocycle
    linearization at the full stage.
    """
    n = metric.n
    u1 = boost_dressing(conn)
    u1_g = even(n, order, u1.at(point, order))
    u1_inv = even(n, order, jets.algebra(n, order).inv_matrix(u1.at(point, order)))

    v = ghost.value(point, order)
    v_eps = ghost.value(point, order, select=("eps",))
    v_s = ghost.value(point, order, select=("s",))
    v_iota = ghost.value(point, order, select=("iota",))
    c_eps = linearized_boost(metric, ghost, point, order) + v_eps

    s_u1 = -v_iota.matmul(u1_g) + (u1_g.matmul(v_s) - v_s.matmul(u1_g)) \
        - v_eps.matmul(u1_g) + u1_g.matmul(c_eps)
    v1 = u1_inv.matmul(v.matmul(u1_g) + s_u1)
    closed1 = c_eps + v_s
    if stage == "first":
        return v1, closed1, (v1 - closed1).max_abs()

    w1 = _dressed_connection(conn)
    ubar = frame_dressing(w1)
    ub = even(n, order, ubar.at(point, order))
    ub_inv = even(n, order, jets.algebra(n, order).inv_matrix(ubar.at(point, order)))
    tilde_v_eps = _tilde_eps(metric, ghost, point, order)
    s_ub = tilde_v_eps.matmul(ub) - v_s.matmul(ub)
    v_w = ub_inv.matmul(v1.matmul(ub) + s_ub)
    closed_w = linearized_boost(metric, ghost, point, order, holonomic=True) + v_eps + tilde_v_eps
    return v_w, closed_w, (v_w - closed_w).max_abs()


def _dressed_connection(conn):
    from .dressing import dress

    return dress(conn, boost_dressing(conn))


def _tilde_eps(metric, ghost, point, order):
    n = metric.n
    alg = jets.algebra(n, order)
    parts = {}
    for k, (eps_f, _, _) in enumerate(ghost.parts):
        m = alg.zeros((n + 2, n + 2))
        if eps_f is not None:
            m[1:-1, 1:-1] = alg.mul(eps_f.coeffs(point, order), alg.const(np.eye(n)))
        parts[k] = m
    return odd(n, order, parts)


# -- finite/infinitesimal consistency ---------------------------------------------


def exp_field(metric, coeff_field: JetField, t, terms=16) -> JetField:
    """exp(t * M(x)) as a jet matrix field."""
    n = metric.n

    def fn(point, order):
        alg = jets.algebra(n, order)
        m = t * coeff_field.at(point, order)
        out = alg.const(np.eye(m.shape[0]))
        power = out
        for j in range(1, terms):
            power = alg.matmul(power, m) / j
            out = out + power
        return out

    return JetField(fn, n, max_order=coeff_field.max_order, label=f"exp({t}*ghost)")


def finite_consistency(metric, conn: ConnectionField, ghost: Ghost, kind, point,
                       ts=(1e-2, 1e-3, 1e-4), phi: JetField = None):
    """Slope of ||(chi^{exp(t v)} - chi)/t - s chi|| against t (expect ~1)."""
    from .cartan import transform_connection, transform_section

    n = metric.n
    coeff = ghost.matrix_field(0)
    if kind == "connection":
        s_chi = brst_connection(conn, ghost, point, 0).component((0,))
        base = conn.at(point, 0)
    elif kind == "section":
        v = ghost.value(point, 0)
        s_chi = brst_section(section_graded(phi, point, 0), v).component((0,))[..., 0, :]
        base = phi.at(point, 0)
    else:
        raise ValueError(f"unknown kind {kind!r}")

    residuals = []
    for t in ts:
        gam = exp_field(metric, coeff, t)
        if kind == "connection":
            chi_t = transform_connection(conn, gam).at(point, 0)
        else:
            chi_t = transform_section(phi, gam).at(point, 0)
        diff = (chi_t - base) / t
        residuals.append(float(np.abs(diff - s_chi).max()))
    ts_arr, res_arr = np.asarray(ts), np.asarray(residuals)
    slope = float(np.polyfit(np.log(ts_arr), np.log(np.maximum(res_arr, 1e-300)), 1)[0])
    return {"ts": list(ts), "residuals": residuals, "slope": slope}
