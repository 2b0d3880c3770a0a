"""Relaxation models: susceptibilities, time-domain functions and spectra.

Each model is an immutable dataclass carrying its shape parameters and
reference time(s).  All reference times are in seconds and all frequencies
are angular (rad/s).  The susceptibility is normalized so that
``susceptibility(model, 0) == 1`` and uses the convention
``chi(i w) = chi'(w) - i chi''(w)`` with ``chi''`` positive for loss.

The functions below accept scalars or numpy arrays for the time/frequency
argument.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from typing import ClassVar

import numpy as np
from scipy import special

from . import special_functions as sf
from .transforms import SpectralDensity, forward_laplace, spectral_reconstruct


class UnsupportedModelError(ValueError):
    """The requested operation is not available for this model."""


class DegenerateSpectrumError(ValueError):
    """The spectral distribution is a Dirac mass and has no density."""


class MultipleRootError(ArithmeticError):
    """The partial-fraction denominator has a repeated root."""


@dataclass(frozen=True)
class Debye:
    tau: float = 1.0
    kind: ClassVar[str] = "debye"


@dataclass(frozen=True)
class ColeCole:
    alpha: float
    tau: float = 1.0
    kind: ClassVar[str] = "cc"


@dataclass(frozen=True)
class DavidsonCole:
    gamma: float
    tau: float = 1.0
    kind: ClassVar[str] = "dc"


@dataclass(frozen=True)
class HavriliakNegami:
    alpha: float
    gamma: float
    tau: float = 1.0
    kind: ClassVar[str] = "hn"


@dataclass(frozen=True)
class JWS:
    """Modified Havriliak-Negami model, the mirror image of HN in frequency.

    Its response carries a Dirac mass at ``t = 0`` of weight
    ``DIRAC_WEIGHT``; :func:`response` returns only the regular part.
    """

    alpha: float
    gamma: float
    tau: float = 1.0
    kind: ClassVar[str] = "jws"
    DIRAC_WEIGHT: ClassVar[float] = 0.0


@dataclass(frozen=True)
class KWW:
    gamma: float
    tau: float = 1.0
    kind: ClassVar[str] = "kww"


@dataclass(frozen=True)
class CMV:
    """Kilbas-Saigo relaxation bridging Cole-Cole (``beta = 0``) and KWW (``alpha = 1``).

    The rate constant of the evolution equation is absorbed into ``tau``.
    """

    alpha: float
    beta: float
    tau: float = 1.0
    kind: ClassVar[str] = "cmv"

    @property
    def gamma(self) -> float:
        return self.alpha + self.beta


@dataclass(frozen=True)
class ExcessWing:
    alpha: float
    tau1: float
    tau2: float
    kind: ClassVar[str] = "ew"


Model = Debye | ColeCole | DavidsonCole | HavriliakNegami | JWS | KWW | CMV | ExcessWing

MODEL_CLASSES = {
    cls.kind: cls
    for cls in (Debye, ColeCole, DavidsonCole, HavriliakNegami, JWS, KWW, CMV, ExcessWing)
}
_KIND_ALIASES = {
    "cole_cole": "cc", "colecole": "cc", "davidson_cole": "dc", "havriliak_negami": "hn",
    "excess_wing": "ew", "excesswing": "ew",
}


def model_from_dict(data: dict) -> Model:
    """Build a model from ``{"kind": ..., <parameters>}``."""
    if not isinstance(data, dict) or "kind" not in data:
        raise ValueError("model description needs a 'kind' entry")
    kind = str(data["kind"]).lower()
    kind = _KIND_ALIASES.get(kind, kind)
    if kind not in MODEL_CLASSES:
        raise ValueError(f"unknown model kind {data['kind']!r}")
    cls = MODEL_CLASSES[kind]
    names = {f.name for f in fields(cls)}
    params = {k: v for k, v in data.items() if k != "kind"}
    unknown = set(params) - names
    if unknown:
        raise ValueError(f"unknown parameters for {kind}: {sorted(unknown)}")
    try:
        return cls(**{k: float(v) for k, v in params.items()})
    except TypeError as exc:
        raise ValueError(str(exc)) from exc


def model_to_dict(model: Model) -> dict:
    return {"kind": model.kind, **asdict(model)}


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------

def validate(model: Model) -> list[str]:
    """List every violated admissibility constraint (empty list means ok)."""
    problems = []
    for name in ("tau", "tau1", "tau2"):
        if hasattr(model, name) and not getattr(model, name) > 0:
            problems.append(f"{name} = {getattr(model, name)} must be positive")
    if isinstance(model, ColeCole) and not 0 < model.alpha <= 1:
        problems.append(f"alpha = {model.alpha} must lie in (0, 1]")
    if isinstance(model, DavidsonCole) and not 0 < model.gamma <= 1:
        problems.append(f"gamma = {model.gamma} must lie in (0, 1]")
    if isinstance(model, (HavriliakNegami, JWS)):
        if not 0 < model.alpha <= 1:
            problems.append(f"alpha = {model.alpha} must lie in (0, 1]")
        ag = model.alpha * model.gamma
        if not 0 < ag <= 1 + 1e-12:
            problems.append(f"alpha*gamma = {ag:.6g} must lie in (0, 1]")
    if isinstance(model, KWW) and not 0 < model.gamma < 1:
        problems.append(f"gamma = {model.gamma} must lie in (0, 1)")
    if isinstance(model, CMV):
        if not 0 < model.alpha <= 1:
            problems.append(f"alpha = {model.alpha} must lie in (0, 1]")
        if not -model.alpha < model.beta <= 1 - model.alpha + 1e-12:
            problems.append(f"beta = {model.beta} must lie in (-alpha, 1 - alpha]")
    if isinstance(model, ExcessWing) and not 0 < model.alpha < 1:
        problems.append(f"alpha = {model.alpha} must lie in (0, 1)")
    return problems


def _require_valid(model: Model) -> None:
    problems = validate(model)
    if problems:
        raise ValueError(f"inadmissible {model.kind} model: " + "; ".join(problems))


# ---------------------------------------------------------------------------
# frequency domain
# ---------------------------------------------------------------------------

def _power(s, a):
    # principal branch; keeps the sign of a zero imaginary part
    return np.power(s, a)


def susceptibility_laplace(model: Model, s):
    """``chi(s)``, the Laplace transform of the response, for ``Re s >= 0``
    (and on the upper edge of the negative real axis for the closed forms)."""
    _require_valid(model)
    s = np.asarray(s, dtype=complex)
    if isinstance(model, Debye):
        return 1.0 / (1.0 + s * model.tau)
    if isinstance(model, ColeCole):
        return 1.0 / (1.0 + _power(s * model.tau, model.alpha))
    if isinstance(model, DavidsonCole):
        return _power(1.0 + s * model.tau, -model.gamma)
    if isinstance(model, HavriliakNegami):
        return _power(1.0 + _power(s * model.tau, model.alpha), -model.gamma)
    if isinstance(model, JWS):
        return 1.0 - _power(1.0 + _power(s * model.tau, -model.alpha), -model.gamma)
    if isinstance(model, ExcessWing):
        w = _power(s * model.tau2, model.alpha)
        return (1.0 + w) / (1.0 + w + s * model.tau1)
    # no closed form: numerical Laplace transform of the response
    flat = s.ravel()
    out = np.empty(flat.size, dtype=complex)
    for i, si in enumerate(flat):
        if si == 0:
            out[i] = 1.0
        else:
            out[i] = forward_laplace(lambda t: response(model, t), si, knee=model.tau)
    return out.reshape(s.shape)[()] if s.ndim == 0 else out.reshape(s.shape)


def susceptibility(model: Model, omega):
    """Normalized complex susceptibility ``chi(i omega)``."""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("omega must be nonnegative")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.asarray(susceptibility_laplace(model, 1j * w), dtype=complex)
    out = np.where(w == 0, 1.0 + 0j, out)
    return out[()] if out.ndim == 0 else out


def relaxation_laplace(model: Model, s):
    """Laplace transform of the relaxation function, ``(1 - chi(s)) / s``."""
    _require_valid(model)
    s = np.asarray(s, dtype=complex)
    if isinstance(model, JWS):
        a, g, tau = model.alpha, model.gamma, model.tau
        return _power(s, a * g - 1) / _power(_power(s, a) + tau ** (-a), g)
    if isinstance(model, HavriliakNegami):
        # 1 - (1 + w)^(-g) without cancellation for small w
        w = _power(s * model.tau, model.alpha)
        return -np.expm1(-model.gamma * np.log1p(w)) / s
    if isinstance(model, ExcessWing):
        return model.tau1 / (1.0 + _power(s * model.tau2, model.alpha) + s * model.tau1)
    return (1.0 - susceptibility_laplace(model, s)) / s


def cole_cole_locus(model: Model, omega_grid) -> np.ndarray:
    """Rows ``(chi', chi'')`` along an ascending frequency grid."""
    w = np.asarray(omega_grid, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("omega grid must be a nonempty 1-d sequence")
    if np.any(np.diff(w) < 0):
        raise ValueError("omega grid must be sorted ascending")
    chi = np.atleast_1d(susceptibility(model, w))
    return np.column_stack([chi.real, -chi.imag])


@dataclass(frozen=True)
class UrlExponents:
    m: float
    n: float
    fits_url: bool


def jonscher_exponents(model: Model) -> UrlExponents:
    """Low- and high-frequency power-law exponents of the universal relaxation law."""
    _require_valid(model)
    if isinstance(model, ColeCole):
        return UrlExponents(model.alpha, 1 - model.alpha, True)
    if isinstance(model, HavriliakNegami):
        return UrlExponents(model.alpha, 1 - model.alpha * model.gamma, True)
    if isinstance(model, JWS):
        return UrlExponents(model.alpha * model.gamma, 1 - model.alpha, True)
    return UrlExponents(float("nan"), float("nan"), False)


# ---------------------------------------------------------------------------
# time domain
# ---------------------------------------------------------------------------

def _as_times(t, allow_zero: bool):
    t_arr = np.asarray(t, dtype=float)
    if allow_zero and np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    if not allow_zero and np.any(t_arr <= 0):
        raise ValueError("t must be positive")
    return t_arr


def _ml2_real(alpha, beta, z):
    return np.real(sf.ml2(alpha, beta, z).value)


def _ml3_real(alpha, beta, gamma, z):
    return np.real(sf.ml3(alpha, beta, gamma, z).value)


def _cmv_parameters(model: CMV):
    g = model.gamma
    return model.alpha, g / model.alpha, (g - model.alpha) / model.alpha


def _ew_rational(model: ExcessWing):
    frac = Fraction(model.alpha).limit_denominator(64)
    if abs(float(frac) - model.alpha) < 1e-12:
        return frac.numerator, frac.denominator
    return None


def _ew_pfrac_sum(model: ExcessWing, t, residues_attr: str):
    pf = ew_partial_fractions(model)
    weights = getattr(pf, residues_attr)
    q = pf.q
    root_t = t ** (1.0 / q)
    total = np.zeros(t.shape, dtype=complex)
    for lam, d in zip(pf.roots, weights):
        total += d * sf.ml2(1.0 / q, 1.0 / q, root_t * lam).value
    return np.real(total * t ** (1.0 / q - 1))


def relaxation(model: Model, t):
    """Relaxation function ``Psi(t)``; ``Psi(0) = 1``."""
    _require_valid(model)
    t_arr = _as_times(t, allow_zero=True)
    out = np.ones(t_arr.shape)
    pos = t_arr > 0
    tp = t_arr[pos]
    if tp.size:
        out[pos] = _relaxation_positive(model, tp)
    return out[()] if out.ndim == 0 else out


def _relaxation_positive(model: Model, t):
    if isinstance(model, ExcessWing):
        if _ew_rational(model) is not None:
            return _ew_pfrac_sum(model, t, "residues_relaxation")
        return spectral_reconstruct(_kpsi_ew(model), t)
    x = t / model.tau
    if isinstance(model, Debye):
        return np.exp(-x)
    if isinstance(model, ColeCole):
        return _ml2_real(model.alpha, 1.0, -x ** model.alpha)
    if isinstance(model, DavidsonCole):
        return special.gammaincc(model.gamma, x)
    if isinstance(model, HavriliakNegami):
        a, g = model.alpha, model.gamma
        return 1.0 - x ** (a * g) * _ml3_real(a, a * g + 1, g, -x ** a)
    if isinstance(model, JWS):
        return _ml3_real(model.alpha, 1.0, model.gamma, -x ** model.alpha)
    if isinstance(model, KWW):
        return np.exp(-x ** model.gamma)
    if isinstance(model, CMV):
        a, m, l = _cmv_parameters(model)
        return np.real(sf.kilbas_saigo(a, m, l, -x ** model.gamma).value)
    raise UnsupportedModelError(f"unknown model {model!r}")


def response(model: Model, t):
    """Response function ``phi(t) = -dPsi/dt`` for ``t > 0``.

    For JWS only the regular part is returned; the Dirac mass at the origin
    is described by ``JWS.DIRAC_WEIGHT``.
    """
    _require_valid(model)
    t_arr = _as_times(t, allow_zero=False)
    if isinstance(model, ExcessWing):
        if _ew_rational(model) is not None:
            out = _ew_pfrac_sum(model, t_arr, "residues_response")
        else:
            k = _kpsi_ew(model)
            out = spectral_reconstruct(lambda r: r * k(r), t_arr)
        return out
    tau = model.tau
    x = t_arr / tau
    if isinstance(model, Debye):
        out = np.exp(-x) / tau
    elif isinstance(model, ColeCole):
        a = model.alpha
        out = x ** (a - 1) * _ml2_real(a, a, -x ** a) / tau
    elif isinstance(model, DavidsonCole):
        g = model.gamma
        out = np.exp((g - 1) * np.log(x) - x - special.gammaln(g)) / tau
    elif isinstance(model, HavriliakNegami):
        a, g = model.alpha, model.gamma
        out = x ** (a * g - 1) * _ml3_real(a, a * g, g, -x ** a) / tau
    elif isinstance(model, JWS):
        a, g = model.alpha, model.gamma
        out = -_ml3_real(a, 0.0, g, -x ** a) / (x * tau)
    elif isinstance(model, KWW):
        g = model.gamma
        out = g * x ** (g - 1) * np.exp(-x ** g) / tau
    elif isinstance(model, CMV):
        a, m, l = _cmv_parameters(model)
        zd = sf.kilbas_saigo_derivative_term(a, m, l, -x ** model.gamma).value
        out = -model.gamma * np.real(zd) / t_arr
    else:
        raise UnsupportedModelError(f"unknown model {model!r}")
    return out


def relaxation_asymptotic(model: Model, t, regime: str):
    """Leading-order short-time (``regime="short"``) or long-time
    (``regime="long"``) behaviour of the relaxation function."""
    _require_valid(model)
    if regime not in ("short", "long"):
        raise ValueError("regime must be 'short' or 'long'")
    if isinstance(model, (CMV, ExcessWing, Debye)):
        raise UnsupportedModelError(f"no asymptotic form for {model.kind}")
    x = _as_times(t, allow_zero=False) / model.tau
    rg = special.rgamma
    if isinstance(model, ColeCole):
        a = model.alpha
        return 1 - x ** a * rg(1 + a) if regime == "short" else x ** (-a) * rg(1 - a)
    if isinstance(model, DavidsonCole):
        g = model.gamma
        if regime == "short":
            return 1 - x ** g * rg(g + 1)
        return x ** (g - 1) * np.exp(-x) * rg(g)
    if isinstance(model, HavriliakNegami):
        a, g = model.alpha, model.gamma
        if regime == "short":
            return 1 - x ** (a * g) * rg(a * g + 1)
        return g * x ** (-a) * rg(1 - a)
    if isinstance(model, JWS):
        a, g = model.alpha, model.gamma
        if regime == "short":
            return 1 - g * x ** a * rg(a + 1)
        return x ** (-a * g) * rg(1 - a * g)
    if isinstance(model, KWW):
        g = model.gamma
        return 1 - x ** g if regime == "short" else np.exp(-x ** g)
    raise UnsupportedModelError(f"unknown model {model!r}")


# ---------------------------------------------------------------------------
# excess-wing partial fractions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EwPartialFractions:
    p: int
    q: int
    roots: np.ndarray
    residues_response: np.ndarray
    residues_relaxation: np.ndarray


def ew_partial_fractions(model: ExcessWing, root_tol: float = 1e-8) -> EwPartialFractions:
    """Roots of ``Q(z) = 1 + tau2^a z^p + tau1 z^q`` and the residues of
    ``P/Q`` and ``tau1/Q``, where ``a = p/q`` and ``P(z) = 1 + tau2^a z^p``."""
    _require_valid(model)
    pq = _ew_rational(model)
    if pq is None:
        raise ValueError(f"alpha = {model.alpha} is not p/q with q <= 64")
    p, q = pq
    c = model.tau2 ** model.alpha
    coeffs = np.zeros(q + 1)          # highest power first
    coeffs[0] = model.tau1
    coeffs[q - p] += c
    coeffs[q] += 1.0
    roots = np.roots(coeffs)
    gaps = np.abs(roots[:, None] - roots[None, :])
    np.fill_diagonal(gaps, np.inf)
    if gaps.min() < root_tol * max(1.0, np.abs(roots).max()):
        raise MultipleRootError("Q(z) has a repeated root")
    # polish with a Newton step on the original polynomial
    dcoeffs = np.polyder(coeffs)
    roots = roots - np.polyval(coeffs, roots) / np.polyval(dcoeffs, roots)
    qprime = np.polyval(dcoeffs, roots)
    pvals = 1.0 + c * roots ** p
    return EwPartialFractions(p, q, roots, pvals / qprime, model.tau1 / qprime)


# ---------------------------------------------------------------------------
# spectral distributions
# ---------------------------------------------------------------------------

def hn_spectral_angle(alpha: float, x):
    """Angle ``theta`` in ``[0, alpha*pi]`` entering the HN and JWS spectra,
    as a function of the reduced rate ``x = tau * r``."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        num = np.cos(np.pi * alpha) + x ** (-alpha)
    return np.pi / 2 - np.arctan2(num, np.sin(np.pi * alpha))


def _hn_denominator(alpha, gamma, x):
    xa = x ** alpha
    base = xa * xa + 2 * xa * np.cos(alpha * np.pi) + 1
    return base ** (gamma / 2)


def _kpsi_ew(model: ExcessWing):
    a, t1, t2 = model.alpha, model.tau1, model.tau2

    def k(r):
        r = np.asarray(r, dtype=float)
        wa = t2 ** a * r ** a
        u = 1 - t1 * r
        den = u * u + 2 * u * wa * np.cos(a * np.pi) + wa * wa
        return t1 * wa * np.sin(a * np.pi) / (np.pi * den)

    return k


def _kpsi(model: Model):
    """Closed-form K^Psi(r) and its breakpoints."""
    if isinstance(model, Debye):
        raise DegenerateSpectrumError("the Debye spectrum is a Dirac mass at r = 1/tau")
    if isinstance(model, CMV):
        raise UnsupportedModelError("no closed-form spectrum for CMV; use titchmarsh_spectral")
    if isinstance(model, ExcessWing):
        return _kpsi_ew(model), ()
    tau = model.tau
    if isinstance(model, ColeCole):
        a = model.alpha
        if a == 1:
            raise DegenerateSpectrumError("Cole-Cole with alpha = 1 is Debye")
        sa, ca = np.sin(a * np.pi), np.cos(a * np.pi)

        def k(r):
            x = tau * np.asarray(r, dtype=float)
            return sa / (np.pi * r * (x ** a + 2 * ca + x ** (-a)))

        return k, ()
    if isinstance(model, DavidsonCole):
        g = model.gamma
        if g == 1:
            raise DegenerateSpectrumError("Davidson-Cole with gamma = 1 is Debye")
        sg = np.sin(g * np.pi)

        def k(r):
            r = np.asarray(r, dtype=float)
            x = tau * r
            with np.errstate(divide="ignore", invalid="ignore"):
                val = sg / (np.pi * r * np.abs(x - 1) ** g)
            return np.where(x > 1, val, 0.0)

        return k, (1.0 / tau,)
    if isinstance(model, (HavriliakNegami, JWS)):
        a, g = model.alpha, model.gamma
        if a == 1 and g == 1:
            raise DegenerateSpectrumError(f"{model.kind} with alpha = gamma = 1 is Debye")
        jws = isinstance(model, JWS)

        def k(r):
            r = np.asarray(r, dtype=float)
            x = tau * r
            theta = hn_spectral_angle(a, x)
            den = _hn_denominator(a, g, x)
            if jws:
                return tau * x ** (a * g - 1) * np.sin(g * (a * np.pi - theta)) / (np.pi * den)
            return np.sin(g * theta) / (np.pi * r * den)

        return k, ((1.0 / tau,) if a == 1 else ())
    if isinstance(model, KWW):
        g = model.gamma

        def k(r):
            return tau * sf.levy_extremal_density(g, tau * np.asarray(r, dtype=float))

        return k, ()
    raise UnsupportedModelError(f"unknown model {model!r}")


def _hpsi_cole_cole(model: ColeCole):
    """Closed-form H^Psi for Cole-Cole, written in the same operand order as
    K^Psi so the two coincide to the last bit when tau = 1."""
    a, tau = model.alpha, model.tau
    sa, ca = np.sin(a * np.pi), np.cos(a * np.pi)

    def h(t):
        t = np.asarray(t, dtype=float)
        w = t / tau
        return sa / (np.pi * t * (w ** a + 2 * ca + w ** (-a)))

    return h


_KIND_NAMES = {"psi": "psi", "Ψ": "psi", "relaxation": "psi",
               "phi": "phi", "φ": "phi", "response": "phi"}


def spectral_density(model: Model, kind: str = "psi", representation: str = "K") -> SpectralDensity:
    """Spectral distribution of the relaxation (``kind="psi"``) or response
    (``kind="phi"``) function over rate ``K(r)``, time ``H(tau)`` or log-time
    ``L(u)``, ``u = ln(tau)``."""
    _require_valid(model)
    kind_key = _KIND_NAMES.get(kind if kind in _KIND_NAMES else str(kind).lower())
    if kind_key is None:
        raise ValueError(f"kind must be psi or phi, got {kind!r}")
    rep = str(representation).upper()
    if rep not in ("K", "H", "L"):
        raise ValueError(f"representation must be K, H or L, got {representation!r}")
    kpsi, cuts = _kpsi(model)
    if kind_key == "psi":
        k = kpsi
    else:
        def k(r):
            return np.asarray(r, dtype=float) * kpsi(r)

    if rep == "K":
        fn = k
        breaks = cuts
    elif rep == "H" and kind_key == "psi" and isinstance(model, ColeCole):
        fn = _hpsi_cole_cole(model)
        breaks = ()
    elif rep == "H":
        def fn(tau):
            tau = np.asarray(tau, dtype=float)
            return k(1.0 / tau) / tau ** 2
        breaks = tuple(1.0 / c for c in cuts)
    else:
        def fn(u):
            r = np.exp(-np.asarray(u, dtype=float))
            return r * k(r)
        breaks = ()
    return SpectralDensity(rep, kind_key, evaluator=fn, breakpoints=breaks)


def spectral(model: Model, kind: str, representation: str, x):
    """Value of the spectral distribution at ``x`` (see :func:`spectral_density`)."""
    x_arr = np.asarray(x, dtype=float)
    if str(representation).upper() in ("K", "H") and np.any(x_arr <= 0):
        raise ValueError("K and H need positive abscissae")
    out = np.asarray(spectral_density(model, kind, representation)(x_arr), dtype=float)
    return out[()] if out.ndim == 0 else out
