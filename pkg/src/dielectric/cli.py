"""Command-line front end.

Curves, loci and spectral densities are written as CSV (header row, 17
significant digits) or JSON (``{"meta": ..., "data": [...]}``).  Exit codes:
0 success, 1 numerical failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fit as ft
from . import fracops as fo
from . import models as md
from . import special_functions as sf
from . import transforms as tr

COMMANDS = ("curve", "locus", "spectral", "eval", "fit", "pfrac", "verify")
EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2

log = logging.getLogger(__name__)


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    points: int
    spacing: str = "log"

    def __post_init__(self):
        if self.points < 2:
            raise UsageError("grid needs at least 2 points")
        if not self.lo < self.hi:
            raise UsageError("grid needs min < max")
        if self.spacing not in ("lin", "log"):
            raise UsageError("grid spacing must be lin or log")
        if self.spacing == "log" and self.lo <= 0:
            raise UsageError("log grid needs min > 0")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.logspace(np.log10(self.lo), np.log10(self.hi), self.points)
        return np.linspace(self.lo, self.hi, self.points)


def parse_grid(text: str) -> GridSpec:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise UsageError(f"grid must be min:max:n[:lin|log], got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad grid {text!r}: {exc}") from None
    return GridSpec(lo, hi, n, parts[3] if len(parts) == 4 else "log")


def parse_models(text: str | None) -> tuple:
    """One model or a list of models from inline JSON or a JSON file."""
    if not text:
        raise UsageError("--model is required")
    raw = text.strip()
    if not raw.startswith(("{", "[")):
        path = Path(raw)
        if not path.is_file():
            raise UsageError(f"--model is neither JSON nor a readable file: {text!r}")
        raw = path.read_text()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError(f"model JSON does not parse: {exc}") from None
    items = data if isinstance(data, list) else [data]
    if not items:
        raise UsageError("empty model list")
    out = []
    for item in items:
        try:
            model = md.model_from_dict(item)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        problems = md.validate(model)
        if problems:
            raise UsageError("; ".join(problems))
        out.append(model)
    return tuple(out)


def _fmt(x) -> str:
    return format(float(x), ".17g")


def render(columns: list[str], rows, meta: dict, fmt: str) -> str:
    if fmt == "json":
        data = [dict(zip(columns, (float(v) for v in row))) for row in rows]
        return json.dumps({"meta": meta, "data": data}, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _tabulate(models, x, columns, evaluate):
    """Rows for every model; a leading model-index column when there are several."""
    rows = []
    for i, model in enumerate(models):
        block = np.column_stack([x] + [np.asarray(c, dtype=float) for c in evaluate(model, x)])
        if len(models) > 1:
            block = np.column_stack([np.full(len(x), i), block])
        rows.extend(block.tolist())
    cols = (["model"] if len(models) > 1 else []) + columns
    return cols, rows


def _meta(args, models, **extra) -> dict:
    return {"command": args.command, "models": [md.model_to_dict(m) for m in models], **extra}


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_curve(args) -> int:
    models = parse_models(args.model)
    grid = parse_grid(args.grid or "1e-2:1e2:200:log")
    t = grid.values()
    if np.any(t <= 0):
        raise UsageError("curve needs positive times")

    def evaluate(model, x):
        return md.relaxation(model, x), md.response(model, x)

    cols, rows = _tabulate(models, t, ["t", "psi", "phi"], evaluate)
    _emit(render(cols, rows, _meta(args, models, grid=args.grid), args.format), args.out)
    return EXIT_OK


def cmd_locus(args) -> int:
    models = parse_models(args.model)
    grid = parse_grid(args.grid or "1e-3:1e3:200:log")

    def evaluate(model, x):
        pts = md.cole_cole_locus(model, x)
        return pts[:, 0], pts[:, 1]

    cols, rows = _tabulate(models, grid.values(), ["omega", "chi_re", "chi_loss"], evaluate)
    _emit(render(cols, rows, _meta(args, models, grid=args.grid), args.format), args.out)
    return EXIT_OK


def cmd_spectral(args) -> int:
    models = parse_models(args.model)
    rep = args.repr.upper()
    default = "-5:5:200:lin" if rep == "L" else "1e-3:1e3:200:log"
    grid = parse_grid(args.grid or default)

    def evaluate(model, x):
        return (md.spectral(model, args.kind, rep, x),)

    names = {"K": "r", "H": "tau", "L": "u"}
    cols, rows = _tabulate(models, grid.values(), [names[rep], rep], evaluate)
    meta = _meta(args, models, grid=args.grid, kind=args.kind, representation=rep)
    _emit(render(cols, rows, meta, args.format), args.out)
    return EXIT_OK


_QUANTITIES = ("relaxation", "response", "susceptibility", "spectral")


def cmd_eval(args) -> int:
    models = parse_models(args.model)
    if args.at is None:
        raise UsageError("eval needs --at")
    x = np.asarray(args.at, dtype=float)
    out = []
    for model in models:
        if args.quantity == "relaxation":
            val = md.relaxation(model, x)
        elif args.quantity == "response":
            val = md.response(model, x)
        elif args.quantity == "susceptibility":
            chi = md.susceptibility(model, x)
            val = [[c.real, -c.imag] for c in np.atleast_1d(chi)]
        else:
            val = md.spectral(model, args.kind, args.repr, x)
        out.append({"model": md.model_to_dict(model), "at": x.tolist(),
                    "value": np.asarray(val, dtype=float).tolist()})
    payload = {"meta": {"command": "eval", "quantity": args.quantity}, "data": out}
    _emit(json.dumps(payload, indent=1) + "\n", args.out)
    return EXIT_OK


def read_dataset(path: str, eps_s=None, eps_inf=None) -> ft.SpectrumDataset:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = [h.strip().lower() for h in next(reader)]
            rows = [[float(v) for v in row] for row in reader if row and any(c.strip() for c in row)]
    except (OSError, StopIteration, ValueError) as exc:
        raise UsageError(f"cannot read dataset {path!r}: {exc}") from None
    try:
        if header == ["omega", "chi_re", "chi_im"]:
            return ft.SpectrumDataset.from_rows(rows, source=path)
        if header == ["omega", "eps_re", "eps_im"]:
            if eps_s is None or eps_inf is None:
                raise UsageError("permittivity columns need --eps-s and --eps-inf")
            return ft.normalize_permittivity(rows, eps_s, eps_inf, source=path)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    raise UsageError("dataset columns must be omega,chi_re,chi_im or omega,eps_re,eps_im")


def cmd_fit(args) -> int:
    if not args.data:
        raise UsageError("fit needs --data")
    ds = read_dataset(args.data, args.eps_s, args.eps_inf)
    kind = args.model
    if kind and kind.strip().startswith("{"):
        try:
            kind = json.loads(kind)["kind"]
        except (json.JSONDecodeError, KeyError, TypeError):
            raise UsageError("--model for fit must be a kind or a JSON object with 'kind'") from None
    if not kind:
        raise UsageError("fit needs --model <kind>")
    try:
        cfg = ft.FitConfig(kind, weighting=args.weighting, multistart=args.multistart,
                           seed=args.seed, **({"tol_step": args.tol} if args.tol else {}))
        result = ft.fit(ds, cfg)
    except ft.FitError as exc:
        raise UsageError(str(exc)) from None
    payload = {"meta": {"command": "fit", "source": ds.source, "rows": len(ds)},
               "data": result.to_dict()}
    _emit(json.dumps(payload, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_pfrac(args) -> int:
    models = parse_models(args.model)
    rows = []
    for i, model in enumerate(models):
        if not isinstance(model, md.ExcessWing):
            raise UsageError("pfrac applies to excess-wing models only")
        try:
            pf = md.ew_partial_fractions(model, **({"root_tol": args.tol} if args.tol else {}))
        except md.MultipleRootError:
            raise
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        for z, a, b in zip(pf.roots, pf.residues_response, pf.residues_relaxation):
            rows.append([i, pf.p, pf.q, z.real, z.imag, a.real, a.imag, b.real, b.imag])
    cols = ["model", "p", "q", "root_re", "root_im", "res_phi_re", "res_phi_im",
            "res_psi_re", "res_psi_im"]
    _emit(render(cols, rows, _meta(args, models), args.format), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verification suite
# ---------------------------------------------------------------------------

def _check_ml_reductions(tol):
    z = np.linspace(-5, 2, 15)
    err = np.max(np.abs(sf.ml2(1.0, 1.0, z).value - np.exp(z)) / np.exp(z))
    return err < tol, f"max rel err {err:.2e}"


def _check_levy(tol):
    r = np.logspace(-1, 1, 9)
    ref = r ** -1.5 / (2 * np.sqrt(np.pi)) * np.exp(-1 / (4 * r))
    err = np.max(np.abs(sf.levy_extremal_density(0.5, r) / ref - 1))
    return err < tol, f"max rel err {err:.2e}"


def _check_cc_circle(tol):
    a = 0.6
    pts = md.cole_cole_locus(md.ColeCole(a, 1.0), np.logspace(-3, 3, 50))
    s = np.sin(a * np.pi / 2)
    center = np.array([0.5, -np.cos(a * np.pi / 2) / (2 * s)])
    dist = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])
    err = np.max(np.abs(dist - 1 / (2 * s)))
    return err < tol, f"max radius deviation {err:.2e}"


def _check_titchmarsh(tol):
    model = md.HavriliakNegami(0.8, 0.7, 1.0)
    r = np.array([0.1, 1.0, 10.0])
    num = tr.titchmarsh_spectral(lambda s: md.relaxation_laplace(model, s), r)
    ref = md.spectral(model, "psi", "K", r)
    err = np.max(np.abs(num / ref - 1))
    return err < 1e3 * tol, f"max rel err {err:.2e}"


def _check_inversion(tol):
    model = md.ColeCole(0.7, 1.0)
    t = np.array([0.1, 1.0, 10.0])
    num = tr.invert_laplace(lambda s: md.relaxation_laplace(model, s), t)
    err = np.max(np.abs(num - md.relaxation(model, t)))
    return err < 1e3 * tol, f"max abs err {err:.2e}"


def _check_ew_pfrac(tol):
    model = md.ExcessWing(0.5, 2.0, 1.0)
    t = np.logspace(-2, 2, 5)
    num = tr.invert_laplace(lambda s: md.relaxation_laplace(model, s), t)
    err = np.max(np.abs(num - md.relaxation(model, t)))
    return err < 1e4 * tol, f"max abs err {err:.2e}"


def _check_prabhakar_weights(tol):
    table = fo.prabhakar_weights(0.6, 1.0, 0.0, 0.01, 512)
    err = np.max(np.abs(table.omega_caps - fo.gl_weights(0.6, 512).weights))
    return err < tol, f"max abs diff {err:.2e}"


def _check_cc_convergence(tol):
    model = md.ColeCole(0.6, 1.0)
    res = [fo.evolution_residual(model, [0.5, 1.0], 2.0 ** -k) for k in (6, 7)]
    order = np.log2(res[0] / res[1])
    return order > 0.9, f"observed order {order:.3f}"


def _check_fit(tol):
    omega = np.logspace(-3, 3, 40)
    model = md.ColeCole(0.8, 1.0)
    chi = md.susceptibility(model, omega)
    ds = ft.SpectrumDataset(omega, chi.real, -chi.imag)
    got = ft.fit(ds, ft.FitConfig("cc", multistart=2)).model
    err = max(abs(got.alpha - 0.8) / 0.8, abs(got.tau - 1.0))
    return err < 1e3 * tol, f"max rel param err {err:.2e}"


VERIFY_SUITE = (
    ("ml2 reduces to exp", _check_ml_reductions),
    ("Levy density closed form", _check_levy),
    ("Cole-Cole locus circle", _check_cc_circle),
    ("Titchmarsh vs closed form (HN)", _check_titchmarsh),
    ("contour inversion vs closed form (CC)", _check_inversion),
    ("EW partial fractions vs contour", _check_ew_pfrac),
    ("Prabhakar weight reduction", _check_prabhakar_weights),
    ("CC evolution residual order", _check_cc_convergence),
    ("CC fit recovery", _check_fit),
)


def run_verify(tol: float = 1e-10, out=sys.stdout) -> tuple[int, int]:
    passed = failed = 0
    for name, check in VERIFY_SUITE:
        try:
            ok, detail = check(tol)
        except (ArithmeticError, ValueError) as exc:
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        passed += bool(ok)
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}", file=out)
    print(f"{passed} passed, {failed} failed", file=out)
    return passed, failed


def cmd_verify(args) -> int:
    _, failed = run_verify(args.tol or 1e-10)
    return EXIT_OK if failed == 0 else EXIT_NUMERICAL


HANDLERS = {
    "curve": cmd_curve, "locus": cmd_locus, "spectral": cmd_spectral, "eval": cmd_eval,
    "fit": cmd_fit, "pfrac": cmd_pfrac, "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dielectric", description="Fractional relaxation models.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--model", help="model JSON (object or list) or a JSON file; a kind for fit")
        p.add_argument("--grid", help="min:max:n:lin|log")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--kind", choices=("psi", "phi"), default="psi")
        p.add_argument("--repr", choices=("K", "H", "L"), default="K")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float)
        if name == "eval":
            p.add_argument("--at", type=float, nargs="+")
            p.add_argument("--quantity", choices=_QUANTITIES, default="relaxation")
        if name == "fit":
            p.add_argument("--data", help="CSV with omega,chi_re,chi_im or omega,eps_re,eps_im")
            p.add_argument("--eps-s", type=float)
            p.add_argument("--eps-inf", type=float)
            p.add_argument("--weighting", choices=ft.WEIGHTINGS[:2], default="uniform")
            p.add_argument("--multistart", type=int, default=8)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"dielectric {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, ValueError) as exc:
        print(f"dielectric {args.command}: numerical failure: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_NUMERICAL
