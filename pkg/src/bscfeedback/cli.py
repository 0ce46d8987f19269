"""Command-line front end: rate sweeps, figure data and simulation runs.

Sweeps and figures are written as CSV, simulation counts as JSON. Reals are
printed with 12 significant digits; grid points are rounded to the same
precision before evaluation so that every row can be reproduced by calling
the library at the printed abscissa.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass
from typing import Callable

from . import __version__
from .core import BracketError, DomainError
from .exponents import e_ex, e_low, e_r, e_sp, r_crit
from .feedback import (
    ChannelPair,
    InfeasibleError,
    f1_noiseless,
    f1_noisy,
    gamma0,
    p0,
    p11,
    t0,
    t1,
)
from .simulator import SimConfig, estimate

SCHEMA = "simstats-v1"
QUANTITIES = ("e_r", "e_ex", "e_sp", "e_low", "f1_noiseless", "f1_noisy", "p0", "t0", "t1", "p11")
FIGURES = ("fig2", "fig3", "fig4")
FIG_P = 0.01
FIG_ALPHA = 0.1
FIG_STEPS = 200


class UsageError(ValueError):
    pass


def fmt(x) -> str:
    if isinstance(x, (bool, int)):
        return str(int(x))
    return format(float(x), ".12g")


def snap(x: float) -> float:
    """Round to the 12 significant digits that will be printed."""
    return float(fmt(x))


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepSpec:
    quantity: str
    p: float
    r_min: float
    r_max: float
    steps: int
    p1: float | None = None
    L: int | None = None

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise UsageError(f"unknown quantity {self.quantity!r}")
        if not (self.r_min < self.r_max):
            raise UsageError("rate-min must be below rate-max")
        if self.steps < 2:
            raise UsageError("steps must be at least 2")
        if not (0.0 < self.p < 0.5):
            raise UsageError(f"p={self.p} outside (0, 1/2)")
        if self.p1 is not None and not (0.0 <= self.p1 <= 0.5):
            raise UsageError(f"p1={self.p1} outside [0, 1/2]")
        if self.quantity in ("f1_noisy", "t1") and self.p1 is None:
            raise UsageError(f"{self.quantity} needs --p1")
        if self.L is not None and self.L < 1:
            raise UsageError("list size must be >= 1")

    @property
    def variable(self) -> str:
        return "alpha" if self.quantity == "p11" else "R"

    def grid(self) -> list[float]:
        span = self.r_max - self.r_min
        return [snap(self.r_min + span * i / (self.steps - 1)) for i in range(self.steps)]


# each evaluator returns (value, extra columns)
def _evaluator(spec: SweepSpec) -> tuple[Callable[[float], tuple[float, dict]], tuple[str, ...]]:
    p, p1, L = spec.p, spec.p1, spec.L or 1
    q = spec.quantity
    if q == "e_r":
        return (lambda R: (e_r(R, p, L), {})), ()
    if q == "e_ex":
        return (lambda R: (e_ex(R, p, L), {})), ()
    if q == "e_sp":
        return (lambda R: (e_sp(R, p), {})), ()
    if q == "e_low":
        return (lambda R: (e_low(R, p, L), {})), ()
    if q == "f1_noiseless":
        return (lambda R: (f1_noiseless(R, p), {"gamma0": gamma0(R, p)})), ("gamma0",)
    if q == "f1_noisy":
        cols = ("branch_list2", "branch_pair", "gamma_star", "t_star")

        def f(R):
            b = f1_noisy(R, ChannelPair(p, p1))
            return b.value, {c: getattr(b, c) for c in cols}

        return f, cols
    if q == "p0":
        return (lambda R: (p0(R, p), {})), ()
    if q == "t0":
        return (lambda R: (t0(R, p), {})), ()
    if q == "t1":
        return (lambda R: (t1(R, p1), {})), ()
    return (lambda a: (p11(p, a), {})), ()


def _status(exc: Exception) -> str:
    if isinstance(exc, InfeasibleError):
        return f"infeasible:{exc.reason}"
    if isinstance(exc, BracketError):
        return "infeasible:bracket"
    return "infeasible:domain"


def sweep_rows(spec: SweepSpec) -> tuple[list[str], list[list[str]]]:
    """Header and formatted rows of a sweep."""
    f, extra = _evaluator(spec)
    header = [spec.variable, "value", *extra, "status"]
    rows = []
    for x in spec.grid():
        try:
            v, ex = f(x)
        except (InfeasibleError, DomainError, BracketError) as exc:
            rows.append([fmt(x), "", *([""] * len(extra)), _status(exc)])
            continue
        rows.append([fmt(x), fmt(v), *(fmt(ex[c]) for c in extra), "ok"])
    return header, rows


def _write_csv(out, artifact: str, params: dict, header, rows) -> None:
    out.write(f"# artifact={artifact} version={__version__}\n")
    for k, v in params.items():
        out.write(f"# {k}={'' if v is None else (fmt(v) if isinstance(v, (int, float)) else v)}\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def cmd_sweep(spec: SweepSpec, out) -> None:
    header, rows = sweep_rows(spec)
    params = {
        "quantity": spec.quantity,
        "p": spec.p,
        "p1": spec.p1,
        "list_size": spec.L,
        "rate_min": spec.r_min,
        "rate_max": spec.r_max,
        "steps": spec.steps,
        "variable": spec.variable,
    }
    _write_csv(out, "sweep", params, header, rows)


# ---------------------------------------------------------------------------
# figures


def figure_rows(fig: str, steps: int = FIG_STEPS) -> tuple[list[str], list[list[str]]]:
    """Data behind the three curves: p0 vs R, F1/E_ex vs R, p11 vs p."""
    if fig not in FIGURES:
        raise UsageError(f"unknown figure {fig!r}")
    if steps < 2:
        raise UsageError("steps must be at least 2")
    if fig == "fig2":
        rc = r_crit(FIG_P)
        xs = [snap(rc * i / steps) for i in range(steps)]  # [0, R_crit)
        return ["R", "p0"], [[fmt(R), fmt(p0(R, FIG_P))] for R in xs]
    if fig == "fig3":
        rc = r_crit(FIG_P)
        xs = [snap(rc * i / (steps + 1)) for i in range(1, steps + 1)]
        return ["R", "f1_noiseless", "e_ex"], [
            [fmt(R), fmt(f1_noiseless(R, FIG_P)), fmt(e_ex(R, FIG_P))] for R in xs
        ]
    xs = [snap(0.5 * i / (steps + 1)) for i in range(1, steps + 1)]
    return ["p", "p11"], [[fmt(p), fmt(p11(p, FIG_ALPHA))] for p in xs]


def cmd_figure(fig: str, out, steps: int = FIG_STEPS) -> None:
    header, rows = figure_rows(fig, steps)
    params = {"figure": fig, "steps": steps}
    if fig == "fig4":
        params["alpha"] = FIG_ALPHA
    else:
        params["p"] = FIG_P
    _write_csv(out, fig, params, header, rows)


# ---------------------------------------------------------------------------
# simulation


def sim_document(cfg: SimConfig, workers: int = 1) -> dict:
    stats = estimate(cfg, workers=workers)
    return {"config": asdict(cfg), "stats": stats.to_dict(), "schema": SCHEMA}


def cmd_sim(cfg: SimConfig, out, workers: int = 1) -> None:
    json.dump(sim_document(cfg, workers), out, indent=2)
    out.write("\n")


# ---------------------------------------------------------------------------
# argument parsing


def _prob(s: str) -> float:
    v = float(s)
    if not (0.0 <= v <= 1.0) or math.isnan(v):
        raise argparse.ArgumentTypeError(f"{s} is not a probability")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bscfeedback", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="evaluate one quantity on a uniform grid")
    sw.add_argument("--quantity", required=True, choices=QUANTITIES)
    sw.add_argument("--p", type=_prob, required=True)
    sw.add_argument("--p1", type=_prob)
    sw.add_argument("--list-size", type=int)
    sw.add_argument("--rate-min", type=float, required=True, help="grid start (alpha for p11)")
    sw.add_argument("--rate-max", type=float, required=True, help="grid end (alpha for p11)")
    sw.add_argument("--steps", type=int, required=True)
    sw.add_argument("--out")

    fg = sub.add_parser("figure", help="emit the data behind a figure")
    fg.add_argument("--figure", required=True, choices=FIGURES)
    fg.add_argument("--steps", type=int, default=FIG_STEPS)
    fg.add_argument("--out")

    sm = sub.add_parser("sim", help="run the two-phase protocol simulator")
    sm.add_argument("--n", type=int, required=True)
    sm.add_argument("--messages", type=int, required=True)
    sm.add_argument("--gamma", type=float, required=True)
    sm.add_argument("--t", type=float, required=True)
    sm.add_argument("--p", type=_prob, required=True)
    sm.add_argument("--p1", type=_prob, default=0.0)
    sm.add_argument("--trials", type=int, required=True)
    sm.add_argument("--seed", type=int, required=True)
    sm.add_argument("--workers", type=int, default=1)
    sm.add_argument("--out")
    return ap


def _dispatch(args, out) -> None:
    if args.command == "sweep":
        spec = SweepSpec(
            quantity=args.quantity, p=args.p, p1=args.p1, L=args.list_size,
            r_min=args.rate_min, r_max=args.rate_max, steps=args.steps,
        )
        cmd_sweep(spec, out)
    elif args.command == "figure":
        cmd_figure(args.figure, out, args.steps)
    else:
        cfg = SimConfig(
            n=args.n, M=args.messages, gamma=args.gamma, t=args.t, p=args.p,
            p1=args.p1, trials=args.trials, seed=args.seed,
        )
        cmd_sim(cfg, out, workers=args.workers)


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    buf = io.StringIO()
    try:
        _dispatch(args, buf)
    except (UsageError, ValueError) as exc:
        ap.error(str(exc))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
