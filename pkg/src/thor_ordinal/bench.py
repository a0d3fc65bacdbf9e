"""Multi-method comparison tables and margin sweeps.

Independent training jobs can fan out over processes (``jobs > 1``); rows are
keyed by method/gamma so results come back in request order regardless.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

from . import methods
from .errors import InfeasibleMargin, OrdinalError
from .trainer import evaluate, train


@dataclass(frozen=True)
class Row:
    method: str
    accuracy: float
    mae: float
    inconsistency_rate: Optional[float] = None


def _map(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _compare_job(args):
    method, splits, cfg = args
    tr, va, te = splits
    try:
        rep = train(tr, va, replace(cfg, method=method))
    except (OrdinalError, ArithmeticError) as exc:
        exc.args = (f"[{method}] {exc}",)
        raise
    heads = list(methods.HEADS) if method == "hybrid" else [None]
    rows = []
    for head in heads:
        m = evaluate(rep.predictor, te, head)
        name = method if head is None else f"{method}/{head}"
        rows.append(Row(name, m.accuracy, m.mae, m.inconsistency_rate))
    return rows


def compare(method_names, splits, cfg, jobs=1):
    """Train each method on the same splits and seed; evaluate on the test split.

    Hybrid models contribute one row per inference head.
    """
    if not method_names:
        raise ValueError("need at least one method")
    for mth in method_names:
        methods.check_method(mth)
    results = _map(_compare_job, [(m, splits, cfg) for m in method_names], jobs)
    return [row for rows in results for row in rows]


def _rank_marks(values, higher_is_better):
    """'best'/'second' markers per position, ties share a rank."""
    distinct = sorted(set(values), reverse=higher_is_better)
    marks = {}
    if distinct:
        marks[distinct[0]] = "best"
    if len(distinct) > 1:
        marks[distinct[1]] = "second"
    return [marks.get(v) for v in values]


def _fmt_cell(v, mark):
    s = f"{v:.3f}"
    if mark == "best":
        return f"**{s}**"
    if mark == "second":
        return f"_{s}_"
    return s


def format_table(rows, fmt="text"):
    """Render rows as aligned text (best in ``**bold**``, runner-up
    ``_underlined_``) or as CSV with raw values."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "accuracy", "mae", "inconsistency_rate"])
        for r in rows:
            rate = "" if r.inconsistency_rate is None else repr(r.inconsistency_rate)
            w.writerow([r.method, repr(r.accuracy), repr(r.mae), rate])
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown table format {fmt!r}")
    acc_marks = _rank_marks([r.accuracy for r in rows], True)
    mae_marks = _rank_marks([r.mae for r in rows], False)
    body = [("method", "accuracy", "mae", "inconsistency")]
    for r, am, mm in zip(rows, acc_marks, mae_marks):
        rate = "-" if r.inconsistency_rate is None else f"{r.inconsistency_rate:.3f}"
        body.append((r.method, _fmt_cell(r.accuracy, am), _fmt_cell(r.mae, mm), rate))
    widths = [max(len(line[c]) for line in body) for c in range(4)]
    out = []
    for ln in body:
        out.append("  ".join(cell.ljust(w) if c == 0 else cell.rjust(w) for c, (cell, w) in enumerate(zip(ln, widths))).rstrip())
    return "\n".join(out) + "\n"


def _sweep_job(args):
    gamma, splits, cfg = args
    tr, va, te = splits
    rep = train(tr, va, replace(cfg, method="thor", gamma=gamma))
    m = evaluate(rep.predictor, te)
    return gamma, m.accuracy, m.mae


def sweep_gamma(gammas, splits, cfg, jobs=1, allow_infeasible=False):
    """One threshold-loss run per margin value; returns ``[(gamma, acc, mae)]``."""
    gammas = [float(g) for g in gammas]
    if not gammas:
        raise ValueError("need at least one gamma")
    k = splits[0].k
    for g in gammas:
        if g < 0:
            raise InfeasibleMargin(f"gamma {g} is negative")
        if not allow_infeasible:
            replace(cfg, method="thor", gamma=g).resolve_boundaries(k)
    cfg = replace(cfg, allow_infeasible_margin=allow_infeasible)
    return _map(_sweep_job, [(g, splits, cfg) for g in gammas], jobs)


def format_sweep(series):
    lines = ["gamma,accuracy,mae"]
    lines.extend(f"{g!r},{a!r},{m!r}" for g, a, m in series)
    return "\n".join(lines) + "\n"
