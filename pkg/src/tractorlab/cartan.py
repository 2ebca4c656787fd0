"""The conformal Cartan connection as an (n+2)x(n+2) matrix-valued 1-form.

Block layout of group/algebra matrices, with rows/columns split (1, n, 1):

    algebra element      connection (per direction mu)   curvature (per mu,nu)
    [eps  iota   0  ]    [a      P_b     0   ]           [f    C     0  ]
    [tau   v   iota^t]   [theta  A^a_b   P^t ]           [Th   W     C^t]
    [0   tau^t  -eps ]   [0      theta^t -a  ]           [0    Th^t  -f ]

eta-transposition: for a row r, r^t = eta^-1 r^T (a column); for a column c,
c^t = (eta c)^T (a row).  All such matrices are antisymmetric / orthogonal
with respect to Sigma = [[0,0,-1],[0,eta,0],[-1,0,0]].

Connection fields expose the full matrix to jet order 1 (the Schouten block
caps the order) and the first column (a and theta blocks) to higher order;
the boost dressing only needs the first column, which is what keeps its jets
exact through chains of gauge transforms.
"""

from __future__ import annotations

import numpy as np

from . import jets
from .fields import JetField, RowField, ScalarField
from .geometry import Geometry


class CartanError(ValueError):
    pass


def sigma_matrix(eta):
    n = eta.shape[0]
    s = np.zeros((n + 2, n + 2))
    s[0, -1] = s[-1, 0] = -1.0
    s[1:-1, 1:-1] = eta
    return s


def row_t(r, eta_inv):
    """eta-transpose of a row vector: the column (r eta^-1)^T."""
    return eta_inv @ np.asarray(r)


def col_t(c, eta):
    """eta-transpose of a column vector: the row (eta c)^T."""
    return np.asarray(c) @ eta


# -- algebra and group elements (plain float matrices) -------------------------


def embed_algebra(eps, v, tau, iota, eta, check=True):
    """Assemble a Lie-algebra element from graded blocks (eps, v, tau, iota).

    v must be eta-antisymmetric (eta v + v^T eta = 0); tau is a column
    n-vector, iota a row n-covector.
    """
    n = eta.shape[0]
    eta_inv = np.linalg.inv(eta)
    v = np.asarray(v, dtype=float)
    tau = np.asarray(tau, dtype=float).reshape(n)
    iota = np.asarray(iota, dtype=float).reshape(n)
    m = np.zeros((n + 2, n + 2))
    m[0, 0] = eps
    m[-1, -1] = -eps
    m[0, 1:-1] = iota
    m[1:-1, 0] = tau
    m[1:-1, 1:-1] = v
    m[1:-1, -1] = row_t(iota, eta_inv)
    m[-1, 1:-1] = col_t(tau, eta)
    if check:
        res = sigma_antisymmetry(m, eta)
        if res > 1e-10 * (1.0 + np.abs(m).max()):
            raise CartanError(f"malformed v block: Sigma-antisymmetry residual {res:.3e}")
    return m


def split_algebra(m, eta):
    """Inverse of embed_algebra: recover (eps, v, tau, iota) exactly."""
    n = eta.shape[0]
    return m[0, 0], m[1:-1, 1:-1].copy(), m[1:-1, 0].copy(), m[0, 1:-1].copy()


def grading_parts(m, eta):
    """Split into (g_-1, g_0, g_+1) matrices: tau part, (eps, v) part, iota part."""
    eps, v, tau, iota = split_algebra(m, eta)
    n = eta.shape[0]
    zero = np.zeros(n)
    return (
        embed_algebra(0.0, np.zeros((n, n)), tau, zero, eta, check=False),
        embed_algebra(eps, v, zero, zero, eta, check=False),
        embed_algebra(0.0, np.zeros((n, n)), zero, iota, eta, check=False),
    )


def sigma_antisymmetry(m, eta):
    s = sigma_matrix(eta)
    return np.abs(m.T @ s + s @ m).max()


def sigma_membership(m, eta):
    """max |M^T Sigma M - Sigma|: zero for group elements."""
    s = sigma_matrix(eta)
    return np.abs(m.T @ s @ m - s).max()


def k0_matrix(z, S):
    n = S.shape[0]
    m = np.zeros((n + 2, n + 2))
    m[0, 0] = z
    m[1:-1, 1:-1] = S
    m[-1, -1] = 1.0 / z
    return m


def k1_matrix(r, eta):
    n = eta.shape[0]
    eta_inv = np.linalg.inv(eta)
    r = np.asarray(r, dtype=float).reshape(n)
    rt = row_t(r, eta_inv)
    m = np.eye(n + 2)
    m[0, 1:-1] = r
    m[0, -1] = 0.5 * float(r @ rt)
    m[1:-1, -1] = rt
    return m


def h_matrix(z, S, r, eta):
    """Group element K0(z, S) K1(r); z > 0, S eta-orthogonal."""
    if z <= 0:
        raise CartanError(f"Weyl factor must be positive, got {z}")
    if np.abs(S.T @ eta @ S - eta).max() > 1e-10:
        raise CartanError("S is not eta-orthogonal")
    return k0_matrix(z, S) @ k1_matrix(r, eta)


def h_inverse(z, S, r, eta):
    """Inverse in factored form: K1(-r) K0(1/z, S^-1)."""
    eta_inv = np.linalg.inv(eta)
    s_inv = eta_inv @ S.T @ eta
    return k1_matrix(-np.asarray(r), eta) @ k0_matrix(1.0 / z, s_inv)


def invariant_pairing(phi, phi2, eta):
    """Sigma bilinear form: -sigma rho' + l^T eta l' - rho sigma'."""
    return float(np.asarray(phi) @ sigma_matrix(eta) @ np.asarray(phi2))


def matvec(alg, m, v):
    """Jet matrix @ jet column: (..., N, N, NC) x (..., N, NC) -> (..., N, NC)."""
    return alg.matmul(m, v[..., :, None, :])[..., 0, :]


# -- jet-valued fields ----------------------------------------------------------


class ConnectionField:
    """Matrix-valued 1-form field: at(point, order) -> (n, N, N, NC).

    `col0` evaluates only the first matrix column (the a and theta blocks),
    which stays exact to higher jet order than the Schouten block allows.
    """

    def __init__(self, at_fn, col0_fn, n, eta, max_order=1, col0_order=3, label=""):
        self._at = at_fn
        self._col0 = col0_fn
        self.n = n
        self.eta = np.asarray(eta, dtype=float)
        self.max_order = max_order
        self.col0_order = col0_order
        self.label = label

    def at(self, point, order):
        if order > self.max_order:
            raise jets.JetError(
                f"connection {self.label or '<anon>'} supports order <= {self.max_order}"
            )
        return self._at(tuple(point), order)

    def col0(self, point, order):
        if order > self.col0_order:
            raise jets.JetError(
                f"connection {self.label or '<anon>'} first column supports order <= {self.col0_order}"
            )
        return self._col0(tuple(point), order)

    def frame(self, point, order):
        """Vielbein e^a_mu and inverse extracted from the soldering block."""
        col = self.col0(point, order)  # (n, N, NC)
        e = np.swapaxes(col[:, 1:-1], 0, 1)  # e^a_mu
        alg = jets.algebra(self.n, order)
        return e, alg.inv_matrix(e)


def conn_blocks(w):
    """Named views of a connection value (n, N, N, NC)."""
    return {
        "a": w[:, 0, 0],
        "P": w[:, 0, 1:-1],
        "theta": np.swapaxes(w[:, 1:-1, 0], 0, 1),  # theta^a_mu
        "A": w[:, 1:-1, 1:-1],  # [mu, a, b]
        "P_t": w[:, 1:-1, -1],
        "theta_t": w[:, -1, 1:-1],
    }


def curv_blocks(f):
    """Named views of a curvature value (n, n, N, N, ...)."""
    return {
        "f": f[:, :, 0, 0],
        "C": f[:, :, 0, 1:-1],
        "Theta": f[:, :, 1:-1, 0],
        "W": f[:, :, 1:-1, 1:-1],
        "C_t": f[:, :, 1:-1, -1],
    }


def normal_connection(metric) -> ConnectionField:
    """Torsion-free connection with vanishing trace blocks: a = 0, theta from the
    vielbein, A the metric spin connection, P the Schouten tensor in frame form."""
    n = metric.n
    N = n + 2

    def at(point, order):
        geom = Geometry(metric, point)
        alg = jets.algebra(n, order)
        w = alg.zeros((n, N, N))
        e = geom.e(order)
        einv = geom.einv(order)
        a_spin = jets.algebra(n, 2).truncate(geom.spin2, order)
        p_frame = alg.matmul(jets.algebra(n, 1).truncate(geom.schouten1, order), einv)  # P_{mu b}
        eta_inv = np.linalg.inv(metric.eta)
        for mu in range(n):
            w[mu, 0, 1:-1] = p_frame[mu]
            w[mu, 1:-1, 0] = e[:, mu]
            w[mu, 1:-1, 1:-1] = a_spin[mu]
            w[mu, 1:-1, -1] = eta_inv @ p_frame[mu]
            w[mu, -1, 1:-1] = metric.eta @ e[:, mu]
        return w

    def col0(point, order):
        geom = Geometry(metric, point)
        alg = jets.algebra(n, order)
        col = alg.zeros((n, N))
        e = geom.e(order)
        for mu in range(n):
            col[mu, 1:-1] = e[:, mu]
        return col

    return ConnectionField(at, col0, n, metric.eta, max_order=1, col0_order=3, label="normal")


def h_field(metric, z=None, S=None, r=None) -> JetField:
    """Group-valued field K0(z(x), S) K1(r(x)) with jets; S is constant."""
    n = metric.n
    N = n + 2
    eta = metric.eta
    eta_inv = np.linalg.inv(eta)
    z_f = None if z is None else (z if isinstance(z, ScalarField) else ScalarField.from_expression(z))
    r_f = None if r is None else (r if isinstance(r, RowField) else RowField(r))
    s_mat = np.eye(n) if S is None else np.asarray(S, dtype=float)
    if np.abs(s_mat.T @ eta @ s_mat - eta).max() > 1e-10:
        raise CartanError("S is not eta-orthogonal")

    def fn(point, order):
        alg = jets.algebra(n, order)
        k0 = alg.const(np.eye(N))
        if z_f is not None:
            zj = z_f.coeffs(point, order)
            if zj[0] <= 0:
                raise CartanError(f"Weyl factor must be positive, got {zj[0]} at {point}")
            k0[0, 0] = zj
            k0[-1, -1] = alg.reciprocal(zj)
        k0[1:-1, 1:-1] = alg.const(s_mat)
        if r_f is None:
            return k0
        rj = r_f.coeffs(point, order)  # (n, NC)
        rt = np.tensordot(eta_inv, rj, axes=(1, 0))
        k1 = alg.const(np.eye(N))
        k1[0, 1:-1] = rj
        k1[0, -1] = 0.5 * alg.mul(rj, rt).sum(axis=0)
        k1[1:-1, -1] = rt
        return alg.matmul(k0, k1)

    label = f"h(z={getattr(z_f, 'description', '1')},r={'yes' if r_f else 'no'})"
    return JetField(fn, n, max_order=3, label=label)


def constant_field(metric, matrix) -> JetField:
    matrix = np.asarray(matrix, dtype=float)

    def fn(point, order):
        return jets.algebra(metric.n, order).const(matrix)

    return JetField(fn, metric.n, max_order=3, label="const")


def section_field(metric, rho, ell, sigma) -> JetField:
    """Column field (rho, ell^a, sigma) from scalar-field components."""
    n = metric.n
    rho_f = rho if isinstance(rho, ScalarField) else ScalarField.from_expression(rho)
    sig_f = sigma if isinstance(sigma, ScalarField) else ScalarField.from_expression(sigma)
    ell_f = ell if isinstance(ell, RowField) else RowField(ell)

    def fn(point, order):
        alg = jets.algebra(n, order)
        out = alg.zeros((n + 2,))
        out[0] = rho_f.coeffs(point, order)
        out[1:-1] = ell_f.coeffs(point, order)
        out[-1] = sig_f.coeffs(point, order)
        return out

    return JetField(fn, n, max_order=3, label="section")


# -- transforms (the same formulas serve gauge transformation and dressing) ----


def transform_connection(conn: ConnectionField, gfield: JetField, label="") -> ConnectionField:
    """chi -> g^-1 chi g + g^-1 dg for a matrix-valued 1-form field."""
    n = conn.n

    def at(point, order):
        alg_hi = jets.algebra(n, order + 1)
        alg = jets.algebra(n, order)
        g_hi = gfield.at(point, order + 1)
        g = alg_hi.truncate(g_hi, order)
        ginv = alg.inv_matrix(g)
        w = conn.at(point, order)
        dg = np.stack([alg_hi.deriv(g_hi, mu) for mu in range(n)])
        core = alg.matmul(alg.matmul(ginv[None], w), g[None])
        return core + alg.matmul(ginv[None], dg)

    def col0(point, order):
        alg_hi = jets.algebra(n, order + 1)
        alg = jets.algebra(n, order)
        g_hi = gfield.at(point, order + 1)
        g = alg_hi.truncate(g_hi, order)
        ginv = alg.inv_matrix(g)
        col = conn.col0(point, order)  # (n, N, NC)
        g00 = g[0, 0]
        out = alg.mul(g00, matvec(alg, ginv[None], col))
        dg0 = np.stack([alg_hi.deriv(g_hi[:, 0], mu) for mu in range(n)])  # (n, N, NC)
        out += matvec(alg, ginv[None], dg0)
        return out

    max_order = min(conn.max_order, gfield.max_order - 1)
    col0_order = min(conn.col0_order, gfield.max_order - 1)
    return ConnectionField(
        at, col0, n, conn.eta, max_order=max_order, col0_order=col0_order,
        label=label or f"({conn.label})^g",
    )


def transform_section(phi: JetField, gfield: JetField, label="") -> JetField:
    """phi -> g^-1 phi."""
    n = phi.n

    def fn(point, order):
        alg = jets.algebra(n, order)
        ginv = alg.inv_matrix(gfield.at(point, order))
        return matvec(alg, ginv, phi.at(point, order))

    return JetField(fn, n, min(phi.max_order, gfield.max_order), label or f"({phi.label})^g")


def conjugate_curvature(curv_fn, gfield, n, label=""):
    """F -> g^-1 F g for a curvature-valued field given as a plain closure."""

    def fn(point, order):
        alg = jets.algebra(n, order)
        g = gfield.at(point, order)
        ginv = alg.inv_matrix(g)
        f = curv_fn(point, order)
        return alg.matmul(alg.matmul(ginv[None, None], f), g[None, None])

    return fn


def curvature(conn: ConnectionField):
    """Structure-equation curvature F_{mu nu} = d_mu w_nu - d_nu w_mu + [w_mu, w_nu].

    Returns a closure (point, order) -> (n, n, N, N, NC); order is capped one
    below the connection's.
    """
    n = conn.n

    def fn(point, order=0):
        alg_hi = jets.algebra(n, order + 1)
        alg = jets.algebra(n, order)
        w_hi = conn.at(point, order + 1)
        w = alg_hi.truncate(w_hi, order)
        dw = np.stack([alg_hi.deriv(w_hi, mu) for mu in range(n)])  # [mu, nu, N, N]
        ww = alg.matmul(w[:, None], w[None, :])  # [mu, nu] -> w_mu w_nu
        return dw - np.einsum("mn...->nm...", dw) + ww - np.einsum("mn...->nm...", ww)

    return fn


def section_derivative(conn: ConnectionField, phi: JetField, point, order=0):
    """D phi = d phi + w phi, per direction: (n, N, NC)."""
    n = conn.n
    alg_hi = jets.algebra(n, order + 1)
    alg = jets.algebra(n, order)
    p_hi = phi.at(point, order + 1)
    dp = np.stack([alg_hi.deriv(p_hi, mu) for mu in range(n)])
    w = conn.at(point, order)
    p = alg_hi.truncate(p_hi, order)
    return dp + matvec(alg, w, p[None, :])


def normality_report(curv_value, einv_value, eta):
    """Max norms of the torsion, trace, and Ricci-type Weyl trace blocks."""
    n = eta.shape[0]
    f = curv_value[:, :, 0, 0]
    torsion = curv_value[:, :, 1:-1, 0]
    wblk = curv_value[:, :, 1:-1, 1:-1]  # [mu, nu, a, b]
    w_frame = np.einsum("mnab,mc,nd->abcd", wblk, einv_value, einv_value)
    ricci_trace = np.einsum("abad->bd", w_frame)
    report = {
        "torsion_norm": float(np.abs(torsion).max()),
        "f_norm": float(np.abs(f).max()),
        "ricci_type_trace_norm": float(np.abs(ricci_trace).max()),
    }
    report["normal"] = all(v < 1e-8 for v in report.values())
    return report
