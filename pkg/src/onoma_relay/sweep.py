"""Parameter sweeps, CSV emission and the O-NOMA vs C-NOMA comparison report."""

from __future__ import annotations

import csv
import io
import math
import os
from collections import defaultdict
from dataclasses import dataclass

from .analytic import avg_rate_s1_analytic, avg_rate_s2_analytic, cnoma_avg_rate_analytic
from .errors import MissingPair, NonConvergence, QuadratureFailure
from .montecarlo import Scheme, estimate_rate, oracle_onoma_rate
from .rates import PowerSplit, SnrConfig
from .scenario import Engine, Scenario

__all__ = ["SweepRow", "CSV_HEADER", "run_sweep", "emit_csv", "read_csv", "scheme_gains", "compare_report", "plot_script"]

CSV_HEADER = ("a2", "rho_db", "scheme", "engine", "rate_s1", "rate_s2", "rate_sum", "stderr_sum", "direct_fraction")


@dataclass(frozen=True)
class SweepRow:
    a2: float
    rho_db: float
    scheme: Scheme
    engine: Engine
    rate_s1: float
    rate_s2: float
    std_error_sum: float | None = None
    direct_mode_fraction: float | None = None
    error: str | None = None

    @property
    def rate_sum(self) -> float:
        return self.rate_s1 + self.rate_s2

    @property
    def failed(self) -> bool:
        return self.error is not None


def _analytic_row(scenario, a2, rho_db, scheme):
    topo = scenario.topology
    rho = SnrConfig.from_db(rho_db).rho
    ctrl = scenario.series
    if scheme is Scheme.PAPER_SUM_EQ15:
        s1 = avg_rate_s1_analytic(rho, a2, topo.sd, topo.sr, ctrl)
        s2 = avg_rate_s2_analytic(rho, a2, topo.sr, topo.rd, ctrl)
        return SweepRow(a2, rho_db, scheme, Engine.ANALYTIC, s1, s2)
    if scheme is Scheme.CNOMA:
        s1, s2 = cnoma_avg_rate_analytic(rho, a2, topo, ctrl)
        return SweepRow(a2, rho_db, scheme, Engine.ANALYTIC, float(s1), float(s2), direct_mode_fraction=0.0)
    s1, s2, direct = oracle_onoma_rate(topo, a2, rho)
    return SweepRow(a2, rho_db, scheme, Engine.ANALYTIC, s1, s2, direct_mode_fraction=direct)


def _mc_row(scenario, a2, rho_db, scheme, workers):
    est = estimate_rate(scheme, scenario.topology, PowerSplit(a2), SnrConfig.from_db(rho_db), scenario.mc, workers)
    if scheme is Scheme.ONOMA:
        direct = est.direct_fraction.mean
    elif scheme is Scheme.CNOMA:
        direct = 0.0
    else:
        direct = None
    return SweepRow(a2, rho_db, scheme, Engine.MONTE_CARLO, est.s1.mean, est.s2.mean, est.sum.std_error, direct)


def run_sweep(scenario: Scenario, workers: int = 1) -> list[SweepRow]:
    """Evaluate every (a2, rho, scheme, engine) combination in a fixed order.

    A row whose series or quadrature fails is kept, with NaN rates and the
    error message attached, so one bad point does not abort the sweep.
    """
    rows = []
    for a2 in scenario.a2_grid:
        for rho_db in scenario.rho_db_grid:
            for scheme in scenario.schemes:
                for engine in scenario.engines:
                    try:
                        if engine is Engine.ANALYTIC:
                            row = _analytic_row(scenario, a2, rho_db, scheme)
                        else:
                            row = _mc_row(scenario, a2, rho_db, scheme, workers)
                    except (NonConvergence, QuadratureFailure) as exc:
                        row = SweepRow(a2, rho_db, scheme, engine, math.nan, math.nan, error=str(exc))
                    rows.append(row)
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    return f"{value:.6g}"


def emit_csv(rows, destination) -> None:
    """Write ``rows`` as CSV to a path or a text stream."""
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to write")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(
            [
                _fmt(r.a2),
                _fmt(r.rho_db),
                r.scheme.value,
                r.engine.value,
                _fmt(r.rate_s1),
                _fmt(r.rate_s2),
                _fmt(r.rate_sum),
                _fmt(r.std_error_sum),
                _fmt(r.direct_mode_fraction),
            ]
        )
    text = buf.getvalue()
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(os.fspath(destination), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def read_csv(source) -> list[SweepRow]:
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(os.fspath(source), encoding="utf-8") as fh:
            text = fh.read()
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")

    def opt(v):
        return float(v) if v != "" else None

    rows = []
    for rec in reader:
        rows.append(
            SweepRow(
                a2=float(rec["a2"]),
                rho_db=float(rec["rho_db"]),
                scheme=Scheme(rec["scheme"]),
                engine=Engine(rec["engine"]),
                rate_s1=float(rec["rate_s1"]),
                rate_s2=float(rec["rate_s2"]),
                std_error_sum=opt(rec["stderr_sum"]),
                direct_mode_fraction=opt(rec["direct_fraction"]),
            )
        )
    return rows


def _index(rows):
    table = {}
    for r in rows:
        table[(r.a2, r.rho_db, r.engine, r.scheme)] = r
    return table


def scheme_gains(rows, scheme_a: Scheme, scheme_b: Scheme, engine: Engine | None = None) -> dict:
    """Sum-rate gain of ``scheme_a`` over ``scheme_b`` per ``(a2, rho_db, engine)``.

    Raises :class:`MissingPair` when a grid point has one scheme but not the
    other.
    """
    table = _index(rows)
    points = sorted({(r.a2, r.rho_db, r.engine.value) for r in rows if engine is None or r.engine is engine})
    gains = {}
    for a2, rho_db, eng in points:
        eng = Engine(eng)
        ra = table.get((a2, rho_db, eng, scheme_a))
        rb = table.get((a2, rho_db, eng, scheme_b))
        if ra is None and rb is None:
            continue
        if ra is None or rb is None:
            missing = scheme_a if ra is None else scheme_b
            raise MissingPair(f"no {missing.value} row at a2={a2}, rho_db={rho_db}, engine={eng.value}")
        gains[(a2, rho_db, eng)] = ra.rate_sum - rb.rate_sum
    return gains


def compare_report(rows) -> str:
    """Per grid point: gains over C-NOMA, analytic vs MC deviation, direct fraction."""
    rows = list(rows)
    table = _index(rows)
    points = sorted({(r.a2, r.rho_db) for r in rows})
    engines = sorted({r.engine for r in rows}, key=lambda e: e.value)
    lines = []
    for a2, rho_db in points:
        lines.append(f"a2={a2:g} rho={rho_db:g} dB")
        for eng in engines:
            present = {s for s in Scheme if (a2, rho_db, eng, s) in table}
            if not present:
                continue
            if Scheme.CNOMA not in present or not present & {Scheme.ONOMA, Scheme.PAPER_SUM_EQ15}:
                raise MissingPair(
                    f"a2={a2}, rho_db={rho_db}, engine={eng.value}: need cnoma and onoma or eq15, "
                    f"have {sorted(s.value for s in present)}"
                )
            base = table[(a2, rho_db, eng, Scheme.CNOMA)].rate_sum
            parts = []
            for s in (Scheme.PAPER_SUM_EQ15, Scheme.ONOMA):
                if s in present:
                    parts.append(f"{s.value}-cnoma={table[(a2, rho_db, eng, s)].rate_sum - base:+.4f}")
            lines.append(f"  [{eng.value}] gain " + ", ".join(parts) + " bit/s/Hz")
        for s in Scheme:
            ra = table.get((a2, rho_db, Engine.ANALYTIC, s))
            rm = table.get((a2, rho_db, Engine.MONTE_CARLO, s))
            if ra is not None and rm is not None and rm.rate_sum:
                dev = (ra.rate_sum - rm.rate_sum) / rm.rate_sum
                lines.append(f"  {s.value}: analytic vs mc relative deviation {dev:+.3%}")
        for eng in (Engine.MONTE_CARLO, Engine.ANALYTIC):
            r = table.get((a2, rho_db, eng, Scheme.ONOMA))
            if r is not None and r.direct_mode_fraction is not None:
                lines.append(f"  onoma direct-mode fraction ({eng.value}) {r.direct_mode_fraction:.4f}")
                break
    return "\n".join(lines) + "\n"


def plot_script(csv_path: str, scenario: Scenario) -> str:
    """A gnuplot script drawing sum rate per scheme and engine from the CSV."""
    xcol, xlabel = (1, "a_2") if len(scenario.a2_grid) > 1 else (2, "transmit SNR rho (dB)")
    lines = [
        "set datafile separator ','",
        "set key left top",
        f"set xlabel '{xlabel}'",
        "set ylabel 'achievable average sum rate (bit/s/Hz)'",
        f"set title '{scenario.name}'",
    ]
    plots = []
    for scheme in scenario.schemes:
        for engine in scenario.engines:
            style = "lines" if engine is Engine.ANALYTIC else "points"
            sel = f'(strcol(3) eq "{scheme.value}" && strcol(4) eq "{engine.value}" ? ${7} : NaN)'
            plots.append(f"'{csv_path}' every ::1 using {xcol}:{sel} with {style} title '{scheme.value} {engine.value}'")
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"
