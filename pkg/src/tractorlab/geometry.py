"""Metric-level tensors: vielbein, Christoffel, curvature, Schouten/Cotton/Weyl,
spin connection, and covariant derivatives, all evaluated through jets at a point.

Index conventions (storage order):
    gamma[alpha, mu, nu]          Gamma^alpha_{mu nu}
    riemann[rho, sigma, mu, nu]   R^rho_{sigma mu nu} = d_mu Gamma^rho_{nu sigma} - ...
    schouten[mu, nu]              P_{mu nu} = -1/(n-2) (R_{mu nu} - R/(2(n-1)) g_{mu nu})
    nabla_schouten[lam, mu, nu]   covariant d_lam P_{mu nu}
    cotton[mu, lam, nu]           C_{mu lam, nu} = nabla_mu P_{lam nu} - nabla_lam P_{mu nu}
    weyl[rho, sigma, mu, nu]      trace-free part of Riemann (one index up)
    spin[mu, a, b]                A^a_{b mu} = e^a_nu (d_mu e^nu_b + Gamma^nu_{mu lam} e^lam_b)

Cotton is stored in 2-form components over (mu, lam); the sign convention is
pinned by the structure-equation and commutator cross-checks in the cartan and
tractor suites.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from . import jets
from .metrics import MetricError


class FrameError(MetricError):
    def __init__(self, pivot, value, expected_sign):
        self.pivot = pivot
        super().__init__(
            f"vielbein factorization pivot {pivot} has value {value:.3e}, "
            f"sign disagrees with eta entry {expected_sign:+.0f}"
        )


class Geometry:
    """Lazy cache of the curvature pipeline of one metric at one point."""

    def __new__(cls, metric, point):
        # memoized per metric: suites hit the same points through many fields
        key = tuple(float(x) for x in point)
        cache = metric.__dict__.setdefault("_geometry_cache", {})
        hit = cache.get(key)
        if hit is not None:
            return hit
        self = super().__new__(cls)
        self.metric = metric
        self.point = key
        self.n = metric.n
        self.eta = metric.eta
        if len(cache) > 4096:
            cache.clear()
        cache[key] = self
        return self

    def alg(self, order):
        return jets.algebra(self.n, order)

    # -- metric jets ---------------------------------------------------------

    @cached_property
    def g3(self):
        return self.metric.g(self.point, 3)

    @cached_property
    def ginv3(self):
        return self.metric.g_inv(self.point, 3)

    def g(self, order):
        return self.alg(3).truncate(self.g3, order)

    def ginv(self, order):
        return self.alg(3).truncate(self.ginv3, order)

    # -- frame ----------------------------------------------------------------

    @cached_property
    def _ldl(self):
        """Signature-aware LDL^T of g with jets: g = L D L^T, pivots in chart order."""
        n, alg = self.n, self.alg(3)
        a = self.g3.copy()
        L = alg.const(np.eye(n))
        d = []
        for k in range(n):
            dk = a[k, k].copy()
            for m in range(k):
                dk -= alg.mul(alg.mul(L[k, m], L[k, m]), d[m])
            if np.sign(dk[0]) != self.eta[k, k]:
                raise FrameError(k, float(dk[0]), self.eta[k, k])
            d.append(dk)
            for i in range(k + 1, n):
                num = a[i, k].copy()
                for m in range(k):
                    num -= alg.mul(alg.mul(L[i, m], L[k, m]), d[m])
                L[i, k] = alg.div(num, dk)
        return L, d

    @cached_property
    def e3(self):
        """Vielbein e^a_mu with e^T eta e = g; deterministic triangular choice."""
        L, d = self._ldl
        alg = self.alg(3)
        e = alg.zeros((self.n, self.n))
        for a_idx in range(self.n):
            root = alg.sqrt(self.eta[a_idx, a_idx] * d[a_idx])
            for mu in range(self.n):
                e[a_idx, mu] = alg.mul(root, L[mu, a_idx])
        return e

    @cached_property
    def einv3(self):
        """Inverse vielbein e^mu_a, stored einv[mu, a]."""
        alg = self.alg(3)
        x = alg.const(np.linalg.inv(alg.value(self.e3)))
        ident = alg.const(np.eye(self.n))
        for _ in range(2):
            x = alg.matmul(x, 2.0 * ident - alg.matmul(self.e3, x))
        return x

    def e(self, order):
        return self.alg(3).truncate(self.e3, order)

    def einv(self, order):
        return self.alg(3).truncate(self.einv3, order)

    # -- connection and curvature ---------------------------------------------

    @cached_property
    def gamma2(self):
        """Christoffel symbols with order-2 jets."""
        alg = self.alg(2)
        dg = np.stack([self.alg(3).deriv(self.g3, mu) for mu in range(self.n)])  # [mu, b, nu]
        t = (
            np.einsum("mbn...->bmn...", dg)
            + np.einsum("nbm...->bmn...", dg)
            - np.einsum("bmn...->bmn...", dg)
        )
        flat = np.ascontiguousarray(t.reshape(self.n, self.n * self.n, alg.ncoef))
        out = alg.matmul(self.ginv(2), flat)
        return 0.5 * out.reshape(self.n, self.n, self.n, alg.ncoef)

    @cached_property
    def riemann1(self):
        """R^rho_{sigma mu nu} with order-1 jets."""
        alg, n = self.alg(1), self.n
        dgam = np.stack([self.alg(2).deriv(self.gamma2, mu) for mu in range(n)])
        dterm = np.einsum("mrns...->rsmn...", dgam) - np.einsum("nrms...->rsmn...", dgam)
        gam = self.alg(2).truncate(self.gamma2, 1)
        a = np.ascontiguousarray(gam.reshape(n * n, n, alg.ncoef))  # [(rho,mu), lam]
        b = np.ascontiguousarray(gam.reshape(n, n * n, alg.ncoef))  # [lam, (nu,sigma)]
        gg = alg.matmul(a, b).reshape(n, n, n, n, alg.ncoef)  # [rho, mu, nu, sigma]
        ggterm = np.einsum("rmns...->rsmn...", gg) - np.einsum("rnms...->rsmn...", gg)
        return dterm + ggterm

    @cached_property
    def ricci1(self):
        return np.einsum("msmn...->sn...", self.riemann1)

    @cached_property
    def scalar1(self):
        return self.alg(1).mul(self.ginv(1), self.ricci1).sum(axis=(0, 1))

    @cached_property
    def schouten1(self):
        n, alg = self.n, self.alg(1)
        trace_part = alg.mul(self.scalar1 / (2.0 * (n - 1.0)), self.g(1))
        return (-1.0 / (n - 2.0)) * (self.ricci1 - trace_part)

    @cached_property
    def schouten_trace1(self):
        return self.alg(1).mul(self.ginv(1), self.schouten1).sum(axis=(0, 1))

    @cached_property
    def schouten_up1(self):
        """P^rho_mu = g^{rho beta} P_{beta mu}."""
        return self.alg(1).matmul(self.ginv(1), self.schouten1)

    @cached_property
    def nabla_schouten(self):
        """Covariant d_lam P_{mu nu} (values), stored [lam, mu, nu]."""
        return self.alg(0).value(self.covariant_derivative(self.schouten1, "dd"))

    @cached_property
    def cotton(self):
        """C_{mu lam, nu} (values), antisymmetric in (mu, lam)."""
        ns = self.nabla_schouten
        return ns - ns.swapaxes(0, 1)

    @cached_property
    def weyl1(self):
        """W^rho_{sigma mu nu} with order-1 jets; totally trace-free."""
        n, alg = self.n, self.alg(1)
        delta = np.eye(n)
        P, Pup, g = self.schouten1, self.schouten_up1, self.g(1)
        w = self.riemann1.copy()
        w += np.einsum("rm,ns...->rsmn...", delta, P)
        w -= np.einsum("rn,ms...->rsmn...", delta, P)
        w += alg.mul(Pup[:, None, :, None, :], g[None, :, None, :, :])  # P^r_m g_{s n}
        w -= alg.mul(Pup[:, None, None, :, :], g[None, :, :, None, :])  # P^r_n g_{s m}
        return w

    @cached_property
    def weyl(self):
        return self.alg(1).value(self.weyl1)

    @cached_property
    def spin2(self):
        """Spin connection A^a_{b mu}, stored [mu, a, b], order-2 jets."""
        n, alg = self.n, self.alg(2)
        de = np.stack([self.alg(3).deriv(self.e3, mu) for mu in range(n)])  # d_mu e^a_nu
        einv = self.einv(2)
        e2 = self.e(2)
        out = np.empty((n, n, n, alg.ncoef))
        for mu in range(n):
            deinv_mu = -alg.matmul(alg.matmul(einv, de[mu]), einv)  # d_mu e^nu_b
            ge = alg.matmul(self.gamma2[:, mu, :], einv)  # Gamma^nu_{mu lam} e^lam_b
            out[mu] = alg.matmul(e2, deinv_mu + ge)
        return out

    # -- covariant derivative ---------------------------------------------------

    def covariant_derivative(self, tensor, valences, order=None):
        """Levi-Civita covariant derivative; the new (derivative) index comes first.

        `tensor` is a jet array with one axis per tensor index plus the trailing
        coefficient axis; `valences` is a string of 'u'/'d' per index ('' for a
        scalar).  The output order is one below the input order.
        """
        tensor = np.asarray(tensor)
        k = self._order_of(tensor)
        if order is not None and order < k:
            tensor = self.alg(k).truncate(tensor, order)
            k = order
        if tensor.ndim - 1 != len(valences):
            raise MetricError(
                f"tensor has {tensor.ndim - 1} index axes but valence string is {valences!r}"
            )
        if k < 1:
            raise MetricError("covariant derivative needs at least order-1 jets")
        alg_in, alg_out, n = self.alg(k), self.alg(k - 1), self.n
        out = np.stack([alg_in.deriv(tensor, mu) for mu in range(n)])
        if not valences:
            return out
        t_low = alg_in.truncate(tensor, k - 1)
        gam = self.alg(2).truncate(self.gamma2, k - 1)
        for slot, val in enumerate(valences):
            moved = np.moveaxis(t_low, slot, 0)  # [lam, rest..., NC]
            rest_nd = moved.ndim - 2
            pad = (n, n) + (1,) * rest_nd + (alg_out.ncoef,)
            corr = np.zeros((n, n) + moved.shape[1:])
            for lam in range(n):
                if val == "u":
                    block = gam[:, :, lam]  # [i, mu]
                else:
                    block = gam[lam].swapaxes(0, 1)  # [i, mu] from Gamma^lam_{mu i}
                corr += alg_out.mul(block.reshape(pad), moved[lam])
            corr = np.moveaxis(corr.swapaxes(0, 1), 1, slot + 1)  # [mu, ..., i at slot]
            out = out + corr if val == "u" else out - corr
        return out

    def laplacian(self, scalar_jets):
        """Delta f = g^{mu nu} (d_mu d_nu f - Gamma^lam_{mu nu} d_lam f)."""
        scalar_jets = np.asarray(scalar_jets)
        k = self._order_of(scalar_jets)
        if k < 2:
            raise MetricError("laplacian needs at least order-2 jets")
        alg, n = self.alg(k), self.n
        grad = np.stack([alg.deriv(scalar_jets, mu) for mu in range(n)])
        hess = np.stack(
            [self.alg(k - 1).deriv(grad, mu) for mu in range(n)]
        )  # [mu, nu]
        alg2 = self.alg(k - 2)
        gam = self.alg(2).truncate(self.gamma2, k - 2)
        grad2 = self.alg(k - 1).truncate(grad, k - 2)
        term = hess - alg2.mul(gam, grad2[:, None, None, :]).sum(axis=0)
        return alg2.mul(self.ginv(k - 2), term).sum(axis=(0, 1))

    def _order_of(self, arr):
        nc = np.asarray(arr).shape[-1]
        for k in range(jets.MAX_ORDER + 1):
            if jets.algebra(self.n, k).ncoef == nc:
                return k
        raise MetricError(f"coefficient axis of length {nc} matches no jet order")


# -- spec-level convenience wrappers ------------------------------------------


def vielbein(metric, point):
    """Frame e^a_mu and inverse with jets; e^T eta e = g to roundoff."""
    geom = Geometry(metric, point)
    return geom.e3, geom.einv3


def christoffel(metric, point):
    return Geometry(metric, point).gamma2


def curvature_tensors(metric, point):
    geom = Geometry(metric, point)
    return geom.riemann1, geom.ricci1, geom.scalar1


def schouten(metric, point):
    geom = Geometry(metric, point)
    return geom.schouten1, geom.schouten_trace1


def conformal_tensors(metric, point):
    geom = Geometry(metric, point)
    return geom.cotton, geom.weyl


def spin_connection(metric, point):
    return Geometry(metric, point).spin2
