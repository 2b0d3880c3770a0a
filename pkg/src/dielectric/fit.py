"""Least-squares estimation of relaxation-model parameters from spectra.

Data rows hold ``(omega, chi', chi'')`` with the loss convention
``chi = chi' - i chi''``, so a passive medium has ``chi'' >= 0``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import models as md
from .special_functions import DomainError

log = logging.getLogger(__name__)

WEIGHTINGS = ("uniform", "relative", "custom")
JITTER_DECADES = 0.5
FD_STEP = 1e-6
# keeps starting exponents away from the flat ends of the logistic map
START_CLIP = (0.01, 0.99)
LOG_LIMIT = 300.0
LOGIT_LIMIT = 36.0


class FitError(ValueError):
    """Dataset or configuration not usable for fitting."""


class FitFailure(ArithmeticError):
    """The optimizer could not produce an admissible fit."""


@dataclass(frozen=True)
class SpectrumDataset:
    omega: np.ndarray
    chi_re: np.ndarray
    chi_im: np.ndarray
    eps_s: float | None = None
    eps_inf: float | None = None
    source: str = ""

    def __post_init__(self):
        for name in ("omega", "chi_re", "chi_im"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        _validate_rows(self.omega, self.chi_re, self.chi_im)
        if (self.eps_s is None) != (self.eps_inf is None):
            raise FitError("eps_s and eps_inf must be given together")
        if self.eps_s is not None and not self.eps_s > self.eps_inf:
            raise FitError("eps_s must exceed eps_inf")

    @classmethod
    def from_rows(cls, rows, **meta) -> SpectrumDataset:
        arr = np.asarray(rows, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise FitError("rows must be (omega, chi_re, chi_im) triples")
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], **meta)

    @property
    def chi(self) -> np.ndarray:
        return self.chi_re - 1j * self.chi_im

    def __len__(self):
        return self.omega.size


def _validate_rows(omega, re, im):
    if omega.size < 1:
        raise FitError("dataset needs at least one row")
    if not (omega.size == re.size == im.size):
        raise FitError("columns differ in length")
    if not np.all(np.isfinite(omega)) or np.any(omega <= 0):
        raise FitError("omega must be positive and finite")
    if np.any(np.diff(omega) <= 0):
        raise FitError("omega must be strictly increasing")
    if not (np.all(np.isfinite(re)) and np.all(np.isfinite(im))):
        raise FitError("susceptibility values must be finite")


@dataclass(frozen=True)
class FitConfig:
    model_kind: str
    weighting: str = "uniform"
    weights: tuple | None = None
    multistart: int = 8
    max_iter: int = 200
    tol_step: float = 1e-10
    tol_grad: float = 1e-12
    seed: int = 0

    def __post_init__(self):
        kind = md._KIND_ALIASES.get(self.model_kind.lower(), self.model_kind.lower())
        if kind not in _PARAMETERIZATIONS:
            raise FitError(f"unknown model kind {self.model_kind!r}")
        object.__setattr__(self, "model_kind", kind)
        if self.weighting not in WEIGHTINGS:
            raise FitError(f"weighting must be one of {WEIGHTINGS}")
        if self.weighting == "custom" and self.weights is None:
            raise FitError("custom weighting needs per-row weights")
        if self.multistart < 1 or self.max_iter < 1:
            raise FitError("multistart and max_iter must be at least 1")
        if not (self.tol_step > 0 and self.tol_grad > 0):
            raise FitError("tolerances must be positive")


@dataclass(frozen=True)
class FitResult:
    model: md.Model
    residual_norm: float
    stderr: dict
    iterations: int
    converged: bool
    history: tuple = field(default=(), repr=False)
    start_index: int = 0
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "model": md.model_to_dict(self.model),
            "residual_norm": self.residual_norm,
            "stderr": dict(self.stderr),
            "iterations": self.iterations,
            "converged": self.converged,
            "start_index": self.start_index,
            "message": self.message,
        }


def normalize_permittivity(rows, eps_s: float, eps_inf: float, source: str = "") -> SpectrumDataset:
    """Map raw ``(omega, eps', eps'')`` rows to normalized susceptibility."""
    if not eps_s > eps_inf:
        raise DomainError("eps_s must exceed eps_inf")
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise FitError("rows must be (omega, eps_re, eps_im) triples")
    span = eps_s - eps_inf
    return SpectrumDataset(arr[:, 0], (arr[:, 1] - eps_inf) / span, arr[:, 2] / span,
                           eps_s=float(eps_s), eps_inf=float(eps_inf), source=source)


# ---------------------------------------------------------------------------
# parameter maps
# ---------------------------------------------------------------------------

def _logit(p):
    lo, hi = START_CLIP
    p = min(max(p, lo), hi)
    return float(np.log(p / (1 - p)))


def _to_model(kind, u):
    def sig(v):
        # clamped so exponents stay strictly inside (0, 1)
        return special.expit(np.clip(v, -LOGIT_LIMIT, LOGIT_LIMIT))

    u = np.concatenate(([np.clip(u[0], -LOG_LIMIT, LOG_LIMIT)], u[1:]))
    if kind == "ew":
        u[1] = np.clip(u[1], -LOG_LIMIT, LOG_LIMIT)
    if kind == "debye":
        return md.Debye(np.exp(u[0]))
    if kind == "cc":
        return md.ColeCole(sig(u[1]), np.exp(u[0]))
    if kind == "dc":
        return md.DavidsonCole(sig(u[1]), np.exp(u[0]))
    if kind in ("hn", "jws"):
        alpha, prod = sig(u[1]), sig(u[2])
        cls = md.HavriliakNegami if kind == "hn" else md.JWS
        return cls(alpha, prod / alpha, np.exp(u[0]))
    if kind == "kww":
        return md.KWW(sig(u[1]), np.exp(u[0]))
    if kind == "cmv":
        alpha = sig(u[1])
        return md.CMV(alpha, sig(u[2]) - alpha, np.exp(u[0]))
    if kind == "ew":
        return md.ExcessWing(sig(u[2]), np.exp(u[0]), np.exp(u[1]))
    raise FitError(f"unknown model kind {kind!r}")


def _from_model(model):
    if isinstance(model, md.Debye):
        return np.array([np.log(model.tau)])
    if isinstance(model, (md.ColeCole,)):
        return np.array([np.log(model.tau), _logit(model.alpha)])
    if isinstance(model, (md.DavidsonCole, md.KWW)):
        return np.array([np.log(model.tau), _logit(model.gamma)])
    if isinstance(model, (md.HavriliakNegami, md.JWS)):
        return np.array([np.log(model.tau), _logit(model.alpha), _logit(model.alpha * model.gamma)])
    if isinstance(model, md.CMV):
        return np.array([np.log(model.tau), _logit(model.alpha), _logit(model.alpha + model.beta)])
    if isinstance(model, md.ExcessWing):
        return np.array([np.log(model.tau1), np.log(model.tau2), _logit(model.alpha)])
    raise FitError(f"cannot fit {model!r}")


_PARAMETERIZATIONS = {"debye": 1, "cc": 2, "dc": 2, "hn": 3, "jws": 3, "kww": 2, "cmv": 3, "ew": 3}


def _physical(model) -> dict:
    return {k: v for k, v in md.model_to_dict(model).items() if k != "kind"}


# ---------------------------------------------------------------------------
# initial guess
# ---------------------------------------------------------------------------

def _edge_slope(logw, logy, side):
    """Log-log slope over the outermost decade on one side of the grid."""
    if side == "low":
        sel = logw <= logw[0] + 1.0
    else:
        sel = logw >= logw[-1] - 1.0
    sel &= np.isfinite(logy)
    if sel.sum() < 2:
        return None
    return float(np.polyfit(logw[sel], logy[sel], 1)[0])


def init_guess(ds: SpectrumDataset, model_kind: str) -> md.Model:
    """Heuristic starting model from the loss peak and the edge slopes of ``chi''``."""
    kind = FitConfig(model_kind).model_kind
    logw = np.log10(ds.omega)
    if len(ds) < 5 or logw[-1] - logw[0] < 2:
        raise FitError("init_guess needs at least 5 rows spanning 2 decades")
    loss = ds.chi_im
    peak = int(np.argmax(loss))
    if 0 < peak < len(ds) - 1 and loss[peak] > 0:
        # parabola through the peak and its neighbours in log-log coordinates
        x = logw[peak - 1:peak + 2]
        y = np.log(np.maximum(loss[peak - 1:peak + 2], 1e-300))
        a, b, _ = np.polyfit(x, y, 2)
        log_peak = -b / (2 * a) if a < 0 else logw[peak]
        log_peak = float(np.clip(log_peak, x[0], x[-1]))
    else:
        log_peak = 0.5 * (logw[0] + logw[-1])
    tau = 10.0 ** -log_peak
    with np.errstate(divide="ignore", invalid="ignore"):
        logy = np.log10(np.where(loss > 0, loss, np.nan))
    far_low = log_peak - logw[0] >= 1.0
    far_high = logw[-1] - log_peak >= 1.0
    low = _edge_slope(logw, logy, "low") if far_low else None
    high = _edge_slope(logw, logy, "high") if far_high else None

    def clip(v, default):
        return default if v is None or not np.isfinite(v) else float(np.clip(v, 0.02, 1.0))

    if kind == "debye":
        return md.Debye(tau)
    if kind == "cc":
        guesses = [v for v in (low, None if high is None else -high) if v is not None]
        return md.ColeCole(clip(np.mean(guesses) if guesses else None, 0.8), tau)
    if kind == "dc":
        return md.DavidsonCole(clip(None if high is None else -high, 0.7), tau)
    if kind in ("hn", "jws"):
        lo, hi = clip(low, 0.8), clip(None if high is None else -high, 0.6)
        if kind == "hn":
            alpha, prod = lo, min(hi, lo)
            return md.HavriliakNegami(alpha, prod / alpha, tau)
        alpha, prod = hi, min(lo, hi)
        return md.JWS(alpha, prod / alpha, tau)
    if kind == "kww":
        return md.KWW(min(clip(None if high is None else -high, 0.6), 0.98), tau)
    if kind == "cmv":
        alpha = clip(low, 0.8)
        return md.CMV(alpha, 0.0, tau)
    alpha = min(clip(None if high is None else 1.0 + high, 0.5), 0.98)
    # wing amplitude: |chi| ~ tau2^alpha omega^(alpha-1) / tau1 at high frequency
    w_end = ds.omega[-1]
    amp = abs(ds.chi[-1])
    tau2 = (amp * tau * w_end ** (1 - alpha)) ** (1 / alpha) if amp > 0 else tau / 10
    tau2 = float(np.clip(tau2, tau * 1e-6, tau))
    return md.ExcessWing(alpha, tau, tau2)


# ---------------------------------------------------------------------------
# damped Gauss-Newton
# ---------------------------------------------------------------------------

def _row_weights(ds, cfg):
    if cfg.weighting == "uniform":
        return np.ones(len(ds))
    if cfg.weighting == "relative":
        mag = np.abs(ds.chi)
        floor = 1e-12 * max(mag.max(), 1e-300)
        return 1.0 / np.maximum(mag, floor) ** 2
    w = np.asarray(cfg.weights, dtype=float)
    if w.shape != (len(ds),) or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise FitError("custom weights must be one nonnegative value per row")
    return w


def objective(model, ds: SpectrumDataset, weights=None) -> float:
    """``sum w_i (|chi'_model - chi'_i|^2 + |chi''_model - chi''_i|^2)``."""
    diff = md.susceptibility(model, ds.omega) - ds.chi
    w = np.ones(len(ds)) if weights is None else np.asarray(weights, dtype=float)
    return float(np.sum(w * (diff.real ** 2 + diff.imag ** 2)))


def _residuals(kind, u, ds, sqrt_w):
    diff = md.susceptibility(_to_model(kind, u), ds.omega) - ds.chi
    r = np.concatenate((sqrt_w * diff.real, sqrt_w * diff.imag))
    if not np.all(np.isfinite(r)):
        raise ArithmeticError("forward model returned non-finite values")
    return r


def _jacobian(fun, u, r0):
    jac = np.empty((r0.size, u.size))
    for j in range(u.size):
        step = FD_STEP * max(abs(u[j]), 1.0)
        up, dn = u.copy(), u.copy()
        up[j] += step
        dn[j] -= step
        jac[:, j] = (fun(up) - fun(dn)) / (2 * step)
    return jac


@dataclass
class _Run:
    u: np.ndarray
    r: np.ndarray
    jac: np.ndarray
    iterations: int
    converged: bool
    history: list
    message: str


def _levenberg_marquardt(fun, u0, cfg) -> _Run:
    u = np.asarray(u0, dtype=float)
    r = fun(u)
    cost = r @ r
    jac = _jacobian(fun, u, r)
    history = [float(np.sqrt(cost))]
    damping = None
    converged, message = False, "iteration limit reached"
    it = 0
    while it < cfg.max_iter:
        it += 1
        grad = jac.T @ r
        if np.max(np.abs(grad)) <= cfg.tol_grad:
            converged, message = True, "gradient tolerance met"
            break
        normal = jac.T @ jac
        diag = np.maximum(np.diag(normal), 1e-30)
        if damping is None:
            damping = 1e-3 * diag.max()
        accepted = False
        while not accepted:
            try:
                step = np.linalg.solve(normal + damping * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                step = np.zeros_like(u)
            trial = u + step
            try:
                r_new = fun(trial)
                cost_new = r_new @ r_new
            except (ArithmeticError, ValueError):
                cost_new = np.inf
            if cost_new < cost:
                accepted = True
                damping = max(damping / 3.0, 1e-300)
            else:
                damping *= 4.0
                if damping > 1e16 * diag.max():
                    break
        small_step = np.linalg.norm(step) <= cfg.tol_step * (np.linalg.norm(u) + cfg.tol_step)
        if not accepted:
            converged = small_step or np.max(np.abs(grad)) <= cfg.tol_grad
            message = "step tolerance met" if converged else "no decrease along damped steps"
            break
        u, r, cost = trial, r_new, cost_new
        history.append(float(np.sqrt(cost)))
        jac = _jacobian(fun, u, r)
        if small_step:
            converged, message = True, "step tolerance met"
            break
    return _Run(u, r, jac, it, converged, history, message)


def _standard_errors(kind, run, n_res):
    p = run.u.size
    dof = n_res - p
    names = list(_physical(_to_model(kind, run.u)))
    if dof <= 0:
        return {k: float("nan") for k in names}
    s2 = (run.r @ run.r) / dof
    try:
        cov_u = s2 * np.linalg.pinv(run.jac.T @ run.jac)
    except np.linalg.LinAlgError:
        return {k: float("nan") for k in names}

    def phys(u):
        return np.array(list(_physical(_to_model(kind, u)).values()), dtype=float)

    # map Jacobian d(physical)/d(unconstrained) by central differences
    base = phys(run.u)
    dmap = np.empty((base.size, p))
    for j in range(p):
        h = 1e-6 * max(abs(run.u[j]), 1.0)
        up, dn = run.u.copy(), run.u.copy()
        up[j] += h
        dn[j] -= h
        dmap[:, j] = (phys(up) - phys(dn)) / (2 * h)
    cov = dmap @ cov_u @ dmap.T
    return {k: float(np.sqrt(max(cov[i, i], 0.0))) for i, k in enumerate(names)}


def fit(ds: SpectrumDataset, cfg: FitConfig, start: md.Model | None = None) -> FitResult:
    """Weighted least-squares fit with multistart; returns the best start.

    Parameters are optimized in an unconstrained space (log of times,
    logistic map of exponents; HN and JWS use ``alpha`` and ``alpha*gamma``)
    so every iterate is an admissible model.
    """
    kind = cfg.model_kind
    n_par = _PARAMETERIZATIONS[kind]
    if len(ds) < n_par + 1:
        raise FitError(f"{kind} has {n_par} parameters and needs at least {n_par + 1} rows")
    sqrt_w = np.sqrt(_row_weights(ds, cfg))
    first = start if start is not None else init_guess(ds, kind)
    u0 = _from_model(first)
    rng = np.random.default_rng(cfg.seed)
    jitter = rng.uniform(-JITTER_DECADES, JITTER_DECADES, size=(cfg.multistart, n_par)) * np.log(10)
    jitter[0] = 0.0

    def fun(u):
        return _residuals(kind, u, ds, sqrt_w)

    best, best_idx, failures = None, -1, []
    for i in range(cfg.multistart):
        try:
            run = _levenberg_marquardt(fun, u0 + jitter[i], cfg)
        except (ArithmeticError, ValueError) as exc:
            failures.append(f"start {i}: {exc}")
            continue
        norm = float(np.sqrt(run.r @ run.r))
        if best is None or norm < best[0]:
            best, best_idx = (norm, run), i
    if best is None:
        raise FitFailure("forward model failed at every start: " + "; ".join(failures))
    norm, run = best
    model = _to_model(kind, run.u)
    problems = md.validate(model)
    if problems:
        raise FitFailure("fitted model is inadmissible: " + "; ".join(problems))
    log.debug("fit %s: start %d, residual %.3e, %d iterations", kind, best_idx, norm, run.iterations)
    return FitResult(model, norm, _standard_errors(kind, run, 2 * len(ds)), run.iterations,
                     run.converged, tuple(run.history), best_idx, run.message)
