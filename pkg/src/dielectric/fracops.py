"""Grünwald-Letnikov type discretizations of fractional operators.

Samples are taken on a uniform grid ``t_n = n h`` starting at ``t_0 = 0``.
Operators are convolution quadratures: the derivative at node ``n`` is a
weighted sum of the samples at nodes ``n, n-1, ..., 0``.

Two weight families are available:

* ``"gl"``: coefficients of ``(1 - x)^alpha`` (first order).
* ``"bdf2"``: coefficients of ``(3/2 - 2x + x^2/2)^alpha``, the fractional
  power of the second-order backward difference (second order for smooth
  data vanishing at the origin).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal, special

from . import models as md
from . import special_functions as sf

MAX_STEPS = 2 ** 16
SCHEMES = ("gl", "bdf2")


@dataclass(frozen=True)
class GlWeightTable:
    alpha: float
    n: int
    weights: np.ndarray


@dataclass(frozen=True)
class PrabhakarWeightTable:
    alpha: float
    gamma: float
    lam: float
    h: float
    n: int
    omega_caps: np.ndarray
    prefactor: float


@dataclass(frozen=True)
class ConstitutiveConfig:
    """Polarization problem on ``steps`` uniform steps of size ``h``.

    ``delta_eps`` is the permittivity increment (vacuum permittivity times
    static minus infinite relative permittivity) and ``p0`` the initial
    polarization.
    """

    delta_eps: float
    p0: float
    h: float
    steps: int

    def __post_init__(self):
        _validate_step(self.h)
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError("steps must be a positive integer")
        if self.steps > MAX_STEPS:
            raise ValueError(f"steps must not exceed {MAX_STEPS}")
        if self.delta_eps < 0:
            raise ValueError("delta_eps must be nonnegative")


def _validate_step(h):
    if not h > 0:
        raise ValueError("step h must be positive")


def _validate_count(n):
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")


def _validate_samples(samples):
    f = np.asarray(samples, dtype=float)
    if f.ndim != 1 or f.size < 2:
        raise ValueError("need a 1-d series of at least 2 samples")
    return f


def _series_power(base, exponent, n):
    """First ``n+1`` coefficients of ``B(x)^exponent`` for a polynomial or
    power series ``B`` with ``B(0) != 0`` (J.C.P. Miller's recurrence)."""
    b = np.zeros(n + 1)
    m = min(len(base), n + 1)
    b[:m] = base[:m]
    c = np.zeros(n + 1)
    c[0] = b[0] ** exponent
    nz = np.flatnonzero(b[1:]) + 1
    sparse = nz.size <= 4
    if sparse:
        for k in range(1, n + 1):
            j = nz[nz <= k]
            c[k] = np.dot(((exponent + 1) * j - k) * b[j], c[k - j]) / (k * b[0])
        return c
    weighted = (exponent + 1) * np.arange(n + 1) * b
    rev = np.zeros(n + 1)
    rev[n] = c[0]
    for k in range(1, n + 1):
        hist = rev[n - k + 1:]
        c[k] = (np.dot(weighted[1:k + 1], hist) - k * np.dot(b[1:k + 1], hist)) / (k * b[0])
        rev[n - k] = c[k]
    return c


def gl_weights(alpha: float, n: int) -> GlWeightTable:
    """``omega_k = (-1)^k binom(alpha, k)`` for ``k = 0..n``."""
    _validate_count(n)
    k = np.arange(1, n + 1)
    w = np.concatenate(([1.0], np.cumprod(1.0 - (alpha + 1.0) / k)))
    return GlWeightTable(float(alpha), int(n), w)


def bdf2_weights(alpha: float, n: int) -> np.ndarray:
    """Coefficients of ``(3/2 - 2x + x^2/2)^alpha``."""
    _validate_count(n)
    return _series_power(np.array([1.5, -2.0, 0.5]), alpha, n)


def _weights(alpha, n, scheme):
    if scheme == "gl":
        return gl_weights(alpha, n).weights
    if scheme == "bdf2":
        return bdf2_weights(alpha, n)
    raise ValueError(f"scheme must be one of {SCHEMES}")


def prabhakar_weights(alpha: float, gamma: float, lam: float, h: float, n: int) -> PrabhakarWeightTable:
    """Weights ``Omega_k`` and prefactor ``(1 + h^alpha lam)^gamma / h^(alpha gamma)``
    of the Grünwald-Letnikov form of the Prabhakar derivative."""
    _validate_step(h)
    _validate_count(n)
    omega = gl_weights(alpha, n).weights
    shift = h ** alpha * lam
    scaled = omega / (1.0 + shift)
    weighted = np.arange(n + 1) * scaled
    # caps stored reversed so each history slice is contiguous
    rev = np.zeros(n + 1)
    rev[n] = 1.0
    for k in range(1, n + 1):
        hist = rev[n - k + 1:]
        rev[n - k] = ((1.0 + gamma) / k * np.dot(weighted[1:k + 1], hist)
                      - np.dot(scaled[1:k + 1], hist))
    caps = rev[::-1].copy()
    prefactor = (1.0 + shift) ** gamma / h ** (alpha * gamma)
    return PrabhakarWeightTable(float(alpha), float(gamma), float(lam), float(h), int(n), caps, prefactor)


def _convolve(weights, f):
    n = f.size
    if n > 2048:
        return signal.fftconvolve(weights[:n], f)[:n]
    return np.convolve(weights[:n], f)[:n]


def caputo_derivative(samples, alpha: float, h: float, scheme: str = "gl") -> np.ndarray:
    """Caputo derivative of order ``alpha`` at every node (zero at ``t_0``)."""
    f = _validate_samples(samples)
    _validate_step(h)
    w = _weights(alpha, f.size - 1, scheme)
    return _convolve(w, f - f[0]) / h ** alpha


def prabhakar_derivative(samples, alpha: float, gamma: float, lam: float, h: float,
                         regularized: bool = True) -> np.ndarray:
    """Prabhakar derivative ``(D^alpha + lam)^gamma``; the regularized form
    acts on ``f - f(0)``."""
    f = _validate_samples(samples)
    _validate_step(h)
    if not 0 < alpha * gamma < 1 + 1e-12:
        raise ValueError("need 0 < alpha*gamma <= 1")
    table = prabhakar_weights(alpha, gamma, lam, h, f.size - 1)
    g = f - f[0] if regularized else f
    return table.prefactor * _convolve(table.omega_caps, g)


# ---------------------------------------------------------------------------
# evolution equations
# ---------------------------------------------------------------------------

def _check_nodes(t_grid, h):
    t = np.atleast_1d(np.asarray(t_grid, dtype=float))
    _validate_step(h)
    idx = np.rint(t / h).astype(int)
    if np.any(idx < 1) or np.any(np.abs(idx * h - t) > 1e-9 * np.maximum(t, h)):
        raise ValueError("check times must be positive multiples of h")
    if idx.max() > MAX_STEPS:
        raise ValueError(f"grid would need more than {MAX_STEPS} steps")
    return t, idx


def _dot_at(weights, g, idx):
    # sum_k w_k g_{n-k} at the requested nodes only
    return np.array([np.dot(weights[:n + 1], g[n::-1]) for n in idx])


def evolution_residual(model, t_grid, h: float, scheme: str = "gl") -> float:
    """Largest ``|LHS - RHS|`` of the model's relaxation evolution equation,
    with the exact relaxation function sampled on ``0, h, 2h, ...`` and the
    fractional operators discretized, at the check times ``t_grid``.

    The check times must be multiples of ``h``; keeping them fixed while
    ``h`` shrinks exposes the order of convergence.
    """
    t, idx = _check_nodes(t_grid, h)
    n_max = int(idx.max())
    nodes = h * np.arange(n_max + 1)

    if isinstance(model, md.KWW):
        # first-order ODE checked with the analytic derivative
        g, tau = model.gamma, model.tau
        lhs = -md.response(model, t)
        rhs = -(g / tau) * (t / tau) ** (g - 1) * md.relaxation(model, t)
        return float(np.max(np.abs(lhs - rhs)))

    psi = md.relaxation(model, nodes)
    shifted = psi - psi[0]

    def caputo(alpha):
        w = _weights(alpha, n_max, scheme)
        return _dot_at(w, shifted, idx) / h ** alpha

    if isinstance(model, md.Debye):
        residual = caputo(1.0) + psi[idx] / model.tau
    elif isinstance(model, md.ColeCole):
        residual = caputo(model.alpha) + psi[idx] / model.tau ** model.alpha
    elif isinstance(model, (md.DavidsonCole, md.HavriliakNegami, md.JWS)):
        if isinstance(model, md.DavidsonCole):
            a, g = 1.0, model.gamma
        else:
            a, g = model.alpha, model.gamma
        tau = model.tau
        table = prabhakar_weights(a, g, tau ** (-a), h, n_max)
        lhs = table.prefactor * _dot_at(table.omega_caps, shifted, idx)
        if isinstance(model, md.JWS):
            ag = a * g
            kernel = np.real(sf.ml3(a, 1 - ag, -g, -(t / tau) ** a).value)
            rhs = t ** (-ag) * special.rgamma(1 - ag) - t ** (-ag) * kernel
        else:
            rhs = -np.full(t.shape, tau ** (-a * g))
        residual = lhs - rhs
    elif isinstance(model, md.ExcessWing):
        a, t1, t2 = model.alpha, model.tau1, model.tau2
        c = t2 ** a / t1
        lhs = caputo(1.0) + c * caputo(a)
        rhs = -psi[idx] / t1 - c * t ** (-a) * special.rgamma(1 - a)
        residual = lhs - rhs
    elif isinstance(model, md.CMV):
        a, b, tau = model.alpha, model.beta, model.tau
        residual = caputo(a) + tau ** (-model.gamma) * t ** b * psi[idx]
    else:
        raise md.UnsupportedModelError(f"no evolution equation for {model!r}")
    return float(np.max(np.abs(residual)))


# ---------------------------------------------------------------------------
# constitutive law
# ---------------------------------------------------------------------------

SCHEME_ORDER = {"gl": 1.0, "bdf2": 2.0}
MAX_START_TERMS = 8


def _start_exponents(bases, order):
    """Positive sums of ``bases`` (and 1) below ``order``: the singular powers
    ``t^q`` a convolution quadrature of that order cannot integrate exactly."""
    found = {0.0}
    frontier = [0.0]
    steps = sorted({float(b) for b in bases if b > 0} | {1.0})
    while frontier:
        nxt = []
        for q in frontier:
            for b in steps:
                v = round(q + b, 12)
                if v < order - 1e-9 and v not in found:
                    found.add(v)
                    nxt.append(v)
        frontier = nxt
    out = sorted(found - {0.0})
    if len(out) > MAX_START_TERMS:
        raise ValueError("too many starting terms; use a larger fractional order")
    return out


def _starting_weights(order, weights, h, exponents, n):
    """Matrix ``S`` with ``h^-order (w * g)_k + S[k] . g[1:m+1]`` exact for
    every ``g = t^q``, ``q`` in ``exponents`` (Lubich's correction)."""
    m = len(exponents)
    k = np.arange(n + 1)
    t = h * k
    resid = np.zeros((n + 1, m))
    for i, q in enumerate(exponents):
        approx = _convolve(weights, k.astype(float) ** q) * h ** (q - order)
        with np.errstate(divide="ignore"):
            exact = special.gamma(q + 1) * special.rgamma(q + 1 - order) * t ** (q - order)
        exact[0] = approx[0]
        resid[:, i] = (exact - approx) / h ** q
    vander = np.arange(1, m + 1)[None, :].astype(float) ** np.asarray(exponents)[:, None]
    return np.linalg.solve(vander, resid.T).T


def _solve_convolution(a, rhs, start=None):
    """Solve ``sum_{k=0}^n a_k g_{n-k} + start[n] . g[1:m+1] = rhs_n`` for
    ``n >= 1`` with ``g_0 = 0``."""
    n = rhs.size
    g = np.zeros(n)
    first = 1
    if start is not None and start.shape[1] > 0:
        m = min(start.shape[1], n - 1)
        # the first m values are coupled through the starting weights
        idx = np.arange(1, m + 1)
        lag = idx[:, None] - idx[None, :]
        mat = np.where(lag >= 0, a[np.clip(lag, 0, None)], 0.0) + start[1:m + 1, :m]
        g[1:m + 1] = np.linalg.solve(mat, rhs[1:m + 1])
        rhs = rhs - start[:, :m] @ g[1:m + 1]
        first = m + 1
    a0 = a[0]
    rev = np.zeros(n)  # g reversed: rev[n - 1 - i] = g[i]
    rev[n - first:] = g[first - 1::-1]
    nz = np.flatnonzero(a[1:]) + 1
    banded = nz.size <= 4
    for i in range(first, n):
        if banded:
            k = nz[nz <= i]
            hist = np.dot(a[k], g[i - k])
        else:
            hist = np.dot(a[1:i + 1], rev[n - i:])
        g[i] = (rhs[i] - hist) / a0
        rev[n - 1 - i] = g[i]
    return g


def solve_polarization(model, e_field, cfg: ConstitutiveConfig, scheme: str = "gl",
                       correct_start: bool = False) -> np.ndarray:
    """Polarization ``P(t_n)``, ``n = 0..steps``, driven by the field samples
    ``e_field`` (one per node) from ``P(0) = cfg.p0``.

    The constitutive law of each model is written for ``g = P - P(0)`` and
    stepped implicitly; the scheme is linear in ``(E, P(0))``.  ``scheme``
    selects first-order Grünwald-Letnikov weights or the second-order
    backward-difference family for Debye, Cole-Cole and excess-wing models.

    With ``correct_start`` those models also get starting weights that make
    the Caputo operators exact on the powers ``t^q`` present in the solution
    near ``t = 0``; this restores the full order of the scheme for data that
    is not smooth at the origin.
    """
    e = np.asarray(e_field, dtype=float)
    if e.ndim != 1 or e.size != cfg.steps + 1:
        raise ValueError(f"e_field must hold steps + 1 = {cfg.steps + 1} samples")
    if (scheme != "gl" or correct_start) and not isinstance(model, (md.Debye, md.ColeCole, md.ExcessWing)):
        raise ValueError("scheme and start correction options apply to Debye, Cole-Cole and excess-wing models")
    if scheme not in SCHEMES:
        raise ValueError(f"scheme must be one of {SCHEMES}")
    order = SCHEME_ORDER[scheme]
    start = None
    h, n, de, p0 = cfg.h, cfg.steps, cfg.delta_eps, cfg.p0
    t = h * np.arange(n + 1)

    if isinstance(model, (md.Debye, md.ColeCole)):
        a_ord = 1.0 if isinstance(model, md.Debye) else model.alpha
        lam = model.tau ** (-a_ord)
        a = _weights(a_ord, n, scheme) / h ** a_ord
        a[0] += lam
        rhs = lam * (de * e - p0)
        if correct_start:
            q = _start_exponents([a_ord], order)
            start = _starting_weights(a_ord, _weights(a_ord, n, scheme), h, q, n)
    elif isinstance(model, (md.HavriliakNegami, md.DavidsonCole)):
        if isinstance(model, md.DavidsonCole):
            al, g = 1.0, model.gamma
        else:
            al, g = model.alpha, model.gamma
        table = prabhakar_weights(al, g, model.tau ** (-al), h, n)
        a = table.prefactor * table.omega_caps
        rhs = model.tau ** (-al * g) * (de * e - p0)
    elif isinstance(model, md.JWS):
        al, g, tau = model.alpha, model.gamma, model.tau
        ag = al * g
        table = prabhakar_weights(al, g, tau ** (-al), h, n)
        a = table.prefactor * table.omega_caps
        # field terms: (D^a + lam)^g E - D^(ag) E, both without regularization
        field = table.prefactor * _convolve(table.omega_caps, e)
        field -= _convolve(gl_weights(ag, n).weights, e) / h ** ag
        rhs = de * field
        with np.errstate(divide="ignore"):
            kernel = np.real(sf.ml3(al, 1 - ag, -g, -(t[1:] / tau) ** al).value)
            init = t[1:] ** (-ag) * (special.rgamma(1 - ag) - kernel)
        rhs[1:] += p0 * init
    elif isinstance(model, md.ExcessWing):
        al, t1, t2 = model.alpha, model.tau1, model.tau2
        c = t2 ** al
        w_al = _weights(al, n, scheme)
        a = t1 * _weights(1.0, n, scheme) / h + c * w_al / h ** al
        a[0] += 1.0
        rhs = de * (e + c * _convolve(w_al, e) / h ** al)
        with np.errstate(divide="ignore"):
            rhs[1:] -= p0 * (1.0 + c * t[1:] ** (-al) * special.rgamma(1 - al))
        if correct_start:
            q = _start_exponents([al, 1.0 - al], order)
            start = (t1 * _starting_weights(1.0, _weights(1.0, n, scheme), h, q, n)
                     + c * _starting_weights(al, w_al, h, q, n))
    else:
        raise md.UnsupportedModelError(f"no constitutive solver for {model.kind}")
    return p0 + _solve_convolution(a, rhs, start)
