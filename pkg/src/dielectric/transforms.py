"""Numerical Laplace-transform tools.

These routines work on plain callables and know nothing about the models, so
they serve as an independent check on the closed forms in
:mod:`dielectric.models`.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .special_functions import CONTOUR_DELTA, CONTOUR_MU, hyperbolic_nodes

# second contour used to detect poles lying between the two hyperbolas
CONTOUR_MU_CHECK = 1.5 * CONTOUR_MU
INVERSION_RTOL = 1e-8
_EPS = np.finfo(float).eps


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, value=None, abs_err=None):
        super().__init__(message)
        self.value = value
        self.abs_err = abs_err


class ContourError(ArithmeticError):
    """Two contour discretizations disagree, e.g. because of a pole off the cut."""

    def __init__(self, message: str, value=None):
        super().__init__(message)
        self.value = value


@dataclass(frozen=True)
class LaplaceImage:
    """A Laplace image ``F(s)`` analytic off the closed negative real axis."""

    evaluator: Callable
    note: str = "analytic in the plane cut along the negative real axis"

    def __call__(self, s):
        return self.evaluator(s)


@dataclass(frozen=True)
class SpectralDensity:
    """Nonnegative density over decay rate (``K``), time (``H``) or log-time (``L``).

    ``breakpoints`` lists abscissae where the density is not smooth (e.g. a
    cut-off), which quadrature routines should split at.  A tabulated density
    is interpolated linearly and vanishes beyond its last abscissa.
    """

    representation: str
    kind: str
    evaluator: Callable | None = None
    abscissa: np.ndarray | None = None
    values: np.ndarray | None = None
    breakpoints: tuple = field(default=())

    def __call__(self, x):
        if self.evaluator is not None:
            return self.evaluator(x)
        return np.interp(x, self.abscissa, self.values, right=0.0)


def _quad(fn, a, b, epsrel, **kwargs):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        val, err = integrate.quad(fn, a, b, epsabs=0.0, epsrel=epsrel, limit=500, **kwargs)
    return val, err, bool(caught)


def forward_laplace(f: Callable, s, *, knee: float = 1.0, rtol: float = 1e-8) -> complex:
    """``int_0^inf exp(-s t) f(t) dt`` by adaptive quadrature.

    The range is split at ``knee`` (shortened to half an oscillation period
    when ``Im s`` is large).  The head is integrated directly; for ``Im s != 0``
    the tail uses a Fourier-weighted rule on ``[knee, inf)``.
    """
    s = complex(s)
    if s.real < 0 or (s.real == 0 and s.imag == 0):
        raise ValueError("forward_laplace needs Re(s) > 0 or a purely imaginary s != 0")
    sigma, omega = s.real, s.imag
    split = float(knee)
    if omega != 0:
        split = min(split, np.pi / abs(omega))
    sub = 0.1 * rtol

    def damped(t):
        return np.exp(-sigma * t) * f(t)

    total = 0j
    err = 0.0
    flagged = False
    if omega == 0:
        for a, b in ((0.0, split), (split, np.inf)):
            v, e, w = _quad(damped, a, b, sub)
            total += v
            err += e
            flagged |= w
    else:
        v1, e1, w1 = _quad(lambda t: damped(t) * np.cos(omega * t), 0.0, split, sub)
        v2, e2, w2 = _quad(lambda t: damped(t) * np.sin(omega * t), 0.0, split, sub)
        total += complex(v1, -v2)
        err += e1 + e2
        flagged |= w1 or w2
        # tail: Fourier-weighted rule with the origin moved to ``split``
        g = lambda x: damped(x + split)  # noqa: E731
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", integrate.IntegrationWarning)
            c, ec = integrate.quad(g, 0.0, np.inf, weight="cos", wvar=abs(omega), limlst=200)
            sn, es = integrate.quad(g, 0.0, np.inf, weight="sin", wvar=abs(omega), limlst=200)
        flagged |= bool(caught)
        sgn = np.sign(omega)
        phase = np.exp(-1j * omega * split)
        total += phase * complex(c, -sgn * sn)
        err += ec + es
    if flagged and err > rtol * max(abs(total), 1e-300):
        raise QuadratureError(
            f"forward Laplace transform at s={s} reached only abs err {err:.2e}", total, err)
    return total


def _contour_values(F, t, mu, refine=1):
    s, w = hyperbolic_nodes(mu=mu, delta=CONTOUR_DELTA, refine=refine)
    st = s[None, :] / t[:, None]
    vals = F(st) * (w * np.exp(s))[None, :] / t[:, None]
    return vals.sum(axis=1), np.abs(vals).sum(axis=1)


def invert_laplace(F: Callable, t):
    """Inverse Laplace transform ``f(t)`` for images analytic off the negative axis.

    The Bromwich line is deformed into a hyperbola scaled with ``1/t`` and the
    trapezoidal rule is applied with fixed node counts (about 85 nodes).  A
    second hyperbola with a wider opening gives an independent value; if the
    two disagree beyond ``INVERSION_RTOL`` (a pole between them, or a slowly
    decaying image) a :class:`ContourError` is raised.  Returns the real part.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("t must be positive")
    shape = t_arr.shape
    tf = t_arr.ravel()
    with np.errstate(all="ignore"):
        first, size = _contour_values(F, tf, CONTOUR_MU)
        second, _ = _contour_values(F, tf, CONTOUR_MU_CHECK)
    if not (np.all(np.isfinite(first)) and np.all(np.isfinite(second))):
        raise ContourError("Laplace image is not finite on the inversion contour", first.real)
    # relative tolerance, floored at the rounding level of the node sum
    tol = np.maximum(INVERSION_RTOL * np.abs(first), 1e3 * _EPS * size)
    bad = np.abs(first - second) > tol
    if bad.any():
        worst = int(np.argmax(np.abs(first - second) / tol))
        raise ContourError(
            f"contour quadratures disagree at t={tf[worst]:.3g} "
            f"({first[worst].real:.12g} vs {second[worst].real:.12g})", first.real)
    out = first.real
    return out.reshape(shape)[()] if shape == () else out.reshape(shape)


def titchmarsh_spectral(F: Callable, r):
    """Spectral density ``-(1/pi) Im F(r e^{i pi})`` on the upper edge of the cut.

    The image is evaluated at ``complex(-r, +0.0)`` so that principal powers
    pick up the phase ``e^{i alpha pi}``.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise ValueError("r must be positive")
    s = np.empty(r_arr.shape, dtype=complex)
    s.real = -r_arr
    s.imag = 0.0
    with np.errstate(all="ignore"):
        val = np.asarray(F(s), dtype=complex)
    if not np.all(np.isfinite(val)):
        raise ArithmeticError("Laplace image is not finite on the cut")
    out = -val.imag / np.pi
    return out[()] if out.ndim == 0 else out


def spectral_reconstruct(K, t, *, breakpoints: Sequence[float] = (), rtol: float = 1e-10):
    """``int_0^inf exp(-r t) K(r) dr`` by adaptive quadrature in ``u = ln r``.

    ``K`` is a callable (or :class:`SpectralDensity`, whose breakpoints are
    honoured).  Raises :class:`QuadratureError` if the achieved error exceeds
    ``1e-8`` relative.
    """
    if isinstance(K, SpectralDensity):
        breakpoints = tuple(breakpoints) + tuple(K.breakpoints)
        if K.evaluator is None:
            breakpoints += tuple(np.asarray(K.abscissa, dtype=float))
    cuts = sorted(np.log(b) for b in breakpoints if b > 0)
    edges = [-np.inf, *cuts, np.inf]
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    out = np.empty(t_arr.size)
    for i, ti in enumerate(t_arr.ravel()):
        def integrand(u, ti=ti):
            r = np.exp(u)
            if r == 0.0 or not np.isfinite(r) or ti * r > 745:
                return 0.0
            with np.errstate(all="ignore"):
                val = float(np.exp(-ti * r) * K(r) * r)
            return val if np.isfinite(val) else 0.0

        upper = edges
        if ti > 0:
            # beyond u = ln(745/t) the factor exp(-t r) underflows
            u_end = np.log(745.0 / ti)
            upper = [e for e in edges[:-1] if e < u_end] + [u_end]
        total, err = 0.0, 0.0
        for a, b in zip(upper[:-1], upper[1:]):
            v, e, _ = _quad(integrand, a, b, rtol)
            total += v
            err += e
        if err > 1e-8 * max(abs(total), 1e-300):
            raise QuadratureError(f"spectral integral at t={ti} has abs err {err:.2e}", total, err)
        out[i] = total
    return out.reshape(t_arr.shape)[()] if t_arr.ndim == 0 else out.reshape(t_arr.shape)

