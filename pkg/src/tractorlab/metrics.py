"""Metric catalog, metric spec files, and jet-level metric evaluation.

A MetricField evaluates components g_{mu,nu} (and the inverse metric) as jets
at chart points.  The catalog covers the witnesses the verification suites
need: flat space in both signatures, conformally flat metrics, the round
sphere in stereographic coordinates, Schwarzschild in isotropic coordinates,
and seeded random polynomial perturbations of flat space.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from . import expr, jets
from .fields import ScalarField, random_polynomial

CATALOG = (
    "flat_euclidean",
    "flat_minkowski",
    "conformally_flat",
    "round_sphere",
    "schwarzschild",
    "poly_perturbation",
)


class MetricError(ValueError):
    pass


class SignatureError(MetricError):
    def __init__(self, name, point, eigenvalues, expected):
        self.point = tuple(point)
        self.eigenvalues = tuple(eigenvalues)
        super().__init__(
            f"metric {name!r} fails signature check at {self.point}: "
            f"eigenvalue signs {['+' if e > 0 else '-' for e in eigenvalues]}, expected {expected}"
        )


@dataclass
class MetricSpec:
    name: str
    n: int
    signature: tuple  # (r, s): r minus signs, s plus signs
    components: dict = field(default_factory=dict)  # (i, j) with i <= j -> AST
    domain: list = field(default_factory=list)  # per-coordinate (lo, hi)

    def component(self, i, j):
        key = (i, j) if i <= j else (j, i)
        return self.components.get(key, expr.const(0.0))


def eta_matrix(signature):
    r, s = signature
    return np.diag([-1.0] * r + [1.0] * s)


class MetricField:
    """Chart metric with jet accessors for g and its inverse."""

    def __init__(self, name, n, signature, g_fn, domain, spec=None):
        if n < 3:
            raise MetricError(f"dimension must be >= 3, got {n}")
        if signature[0] + signature[1] != n:
            raise MetricError(f"signature {signature} incompatible with dimension {n}")
        self.name = name
        self.n = n
        self.signature = tuple(signature)
        self.eta = eta_matrix(signature)
        self._g_fn = g_fn
        self.domain = [(float(lo), float(hi)) for lo, hi in domain]
        self.spec = spec

    def g(self, point, order):
        """Component jets g_{mu,nu}: array (n, n, NC)."""
        key = (tuple(point), order)
        cache = self.__dict__.setdefault("_g_cache", {})
        hit = cache.get(key)
        if hit is None:
            if len(cache) > 8192:
                cache.clear()
            hit = self._g_fn(key[0], order)
            hit.flags.writeable = False  # shared across callers
            cache[key] = hit
        return hit

    def g_inv(self, point, order):
        alg = jets.algebra(self.n, order)
        a = self.g(point, order)
        x = alg.const(np.linalg.inv(alg.value(a)))
        ident = alg.const(np.eye(self.n))
        for _ in range(2):  # Newton doubles the correct jet order each step
            x = alg.matmul(x, 2.0 * ident - alg.matmul(a, x))
        return x

    def component_jet(self, i, j, point, order):
        return jets.Jet(jets.algebra(self.n, order), self.g(point, order)[i, j])

    def rescale(self, z_field: ScalarField, label=None):
        """Conformally related metric z(x)^2 g."""

        def g_fn(point, order):
            z = z_field.coeffs(point, order)
            alg = jets.algebra(self.n, order)
            z2 = alg.mul(z, z)
            return alg.mul(z2, self.g(point, order))

        name = label or f"{self.name}*z^2"
        return MetricField(name, self.n, self.signature, g_fn, self.domain)

    def check_signature(self, samples=20, seed=0):
        """Eigenvalue-sign check of g at sampled points of the domain box."""
        rng = np.random.default_rng(seed)
        pts = sample_points(self, samples, rng)
        r, s = self.signature
        for p in pts:
            value = jets.algebra(self.n, 0).value(self.g(p, 0))
            eig = np.linalg.eigvalsh(value)
            if np.any(np.abs(eig) < 1e-9) or (eig < 0).sum() != r or (eig > 0).sum() != s:
                raise SignatureError(self.name, p, eig, self.signature)
        return True


def sample_points(metric, count, rng, shrink=0.1):
    """Uniform points in the domain box, shrunk away from the boundary."""
    lo = np.array([d[0] for d in metric.domain])
    hi = np.array([d[1] for d in metric.domain])
    margin = shrink * (hi - lo) / 2.0
    return rng.uniform(lo + margin, hi - margin, size=(count, metric.n))


def metric_from_spec(spec: MetricSpec) -> MetricField:
    n = spec.n
    compiled = {key: expr.compile_scalar(ast) for key, ast in spec.components.items()}

    def g_fn(point, order):
        alg = jets.algebra(n, order)
        out = alg.zeros((n, n))
        for (i, j), fn in compiled.items():
            c = fn(point, order)
            out[i, j] = c
            if i != j:
                out[j, i] = c
        return out

    domain = spec.domain or [(-1.0, 1.0)] * n
    return MetricField(spec.name, n, spec.signature, g_fn, domain, spec=spec)


# -- catalog ------------------------------------------------------------------


def _flat_spec(name, n, signature):
    eta = eta_matrix(signature)
    comps = {(i, i): expr.const(eta[i, i]) for i in range(n)}
    return MetricSpec(name, n, signature, comps, [(-1.0, 1.0)] * n)


def _conformal_factor_components(factor_ast, n, signature, square=True):
    """Components e^{2*Omega} eta_{mu,nu} (or f^2 eta for an explicit factor)."""
    eta = eta_matrix(signature)
    weight = expr.Call("exp", expr.mul(expr.const(2.0), factor_ast))
    comps = {}
    for i in range(n):
        comps[(i, i)] = expr.mul(weight, expr.const(eta[i, i])) if eta[i, i] != 1.0 else weight
    return comps


def flat_euclidean(n=4):
    return metric_from_spec(_flat_spec("flat_euclidean", n, (0, n)))


def flat_minkowski(n=4):
    return metric_from_spec(_flat_spec("flat_minkowski", n, (1, n - 1)))


def conformally_flat(factor="0.3*x0", n=4, signature=None):
    """g = exp(2*Omega(x)) eta with Omega given as an expression."""
    factor_ast = expr.parse(factor) if isinstance(factor, str) else factor
    signature = tuple(signature) if signature else (0, n)
    comps = _conformal_factor_components(factor_ast, n, signature)
    spec = MetricSpec("conformally_flat", n, signature, comps, [(-1.0, 1.0)] * n)
    return metric_from_spec(spec)


def round_sphere(n=4):
    """Unit n-sphere in stereographic coordinates: g = 4/(1+|x|^2)^2 delta."""
    r2 = expr.add(*[expr.Pow(expr.coord(i), 2) for i in range(n)])
    factor = expr.BinOp("/", expr.const(4.0), expr.Pow(expr.BinOp("+", expr.const(1.0), r2), 2))
    comps = {(i, i): factor for i in range(n)}
    spec = MetricSpec("round_sphere", n, (0, n), comps, [(-0.8, 0.8)] * n)
    return metric_from_spec(spec)


def schwarzschild(mass=1.0, n=4):
    """Schwarzschild in isotropic coordinates; chart box keeps r well off the horizon."""
    if n != 4:
        raise MetricError("schwarzschild requires n = 4")
    r = expr.Call("sqrt", expr.add(*[expr.Pow(expr.coord(i), 2) for i in (1, 2, 3)]))
    half_m_over_r = expr.BinOp("/", expr.const(mass / 2.0), r)
    a = expr.BinOp("+", expr.const(1.0), half_m_over_r)
    b = expr.BinOp("-", expr.const(1.0), half_m_over_r)
    g00 = expr.Neg(expr.Pow(expr.BinOp("/", b, a), 2))
    spatial = expr.Pow(a, 4)
    comps = {(0, 0): g00, (1, 1): spatial, (2, 2): spatial, (3, 3): spatial}
    domain = [(-0.5, 0.5), (2.0, 3.0), (2.0, 3.0), (2.0, 3.0)]
    return metric_from_spec(MetricSpec("schwarzschild", n, (1, 3), comps, domain))


def poly_perturbation(amplitude=0.05, seed=0, n=4, degree=3):
    """Flat Euclidean metric plus a seeded random polynomial perturbation."""
    rng = np.random.default_rng(int(seed))
    comps = {}
    for i in range(n):
        for j in range(i, n):
            p = expr.polynomial(random_polynomial(rng, n, degree, float(amplitude)))
            base = expr.const(1.0) if i == j else None
            comps[(i, j)] = expr.BinOp("+", base, p) if base else p
    name = f"poly_perturbation(a={amplitude},seed={seed})"
    spec = MetricSpec(name, n, (0, n), comps, [(-0.3, 0.3)] * n)
    metric = metric_from_spec(spec)
    metric.check_signature()
    return metric


_BUILDERS = {
    "flat_euclidean": flat_euclidean,
    "flat_minkowski": flat_minkowski,
    "conformally_flat": conformally_flat,
    "round_sphere": round_sphere,
    "schwarzschild": schwarzschild,
    "poly_perturbation": poly_perturbation,
}


def load_metric(source, **params) -> MetricField:
    """Catalog name, spec file path, or MetricSpec -> validated MetricField."""
    import os

    if isinstance(source, MetricSpec):
        metric = metric_from_spec(source)
    elif isinstance(source, str) and source in _BUILDERS:
        metric = _BUILDERS[source](**params)
    elif isinstance(source, str) and os.path.exists(source):
        metric = metric_from_spec(parse_metric_file(source))
    else:
        raise MetricError(f"unknown metric source {source!r}; catalog: {', '.join(CATALOG)}")
    metric.check_signature()
    return metric


def _parse_signature(text, n):
    text = text.strip().lower().strip("()")
    if text == "euclidean":
        return (0, n)
    if text == "lorentzian":
        return (1, n - 1)
    parts = [int(p) for p in text.split(",")]
    if len(parts) != 2:
        raise MetricError(f"cannot parse signature {text!r}")
    return tuple(parts)


def parse_metric_file(path) -> MetricSpec:
    """INI-style metric spec: [metric] name/n/signature, [components], [domain]."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",))
    with open(path) as fh:
        cp.read_file(fh)
    if "metric" not in cp:
        raise MetricError(f"{path}: missing [metric] section")
    meta = cp["metric"]
    n = int(meta.get("n", "4"))
    name = meta.get("name", "unnamed")
    signature = _parse_signature(meta.get("signature", "euclidean"), n)
    comps = {}
    for key, text in cp.items("components") if cp.has_section("components") else []:
        if not key.startswith("g_"):
            raise MetricError(f"{path}: component key {key!r} must look like g_01")
        i, j = int(key[2]), int(key[3])
        if i > j:
            i, j = j, i
        comps[(i, j)] = expr.parse(text)
    domain = [(-1.0, 1.0)] * n
    if cp.has_section("domain"):
        for key, text in cp.items("domain"):
            idx = int(key.lstrip("x"))
            lo, hi = (float(v) for v in text.split(","))
            domain[idx] = (lo, hi)
    return MetricSpec(name, n, signature, comps, domain)
