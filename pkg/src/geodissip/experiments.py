"""Figure-reproduction experiments, the physical-units estimate and CSV output.

Every experiment returns a :class:`Table`.  Sweeps over m or phi record a
``status`` per row (``ok``, ``gap_closure`` or ``unresolved``) instead of
aborting, because the gap closes exactly at the topological transitions.
Before a table is written its rows are checked against the orderings the
figure is meant to show; a violation raises InvariantViolation naming the row.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np
from scipy import constants

from .bloch import DissipatorParams, cycle_averaged_power, toy_model_dissipation, toy_steady_state_check
from .bounds import bounds_report, inequality_chain_R
from .config import ExperimentConfig
from .errors import GapClosure, InvariantViolation, UnresolvedTopology
from .geometry import chern_from_grid, chern_number, torus_grid
from .model import SpinModel
from .rates import Incommensurate, commensurate_sweep, rate_report


@dataclass
class Table:
    columns: list[str]
    rows: list[dict[str, Any]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def add(self, **row):
        missing = set(self.columns) - set(row)
        if missing:
            row.update({k: None for k in missing})
        self.rows.append(row)

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([format_value(row.get(c)) for c in table.columns])
    return buf.getvalue()


def write_csv(table: Table, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(to_csv(table))


# --- model construction ----------------------------------------------------


def model_from(cfg: ExperimentConfig, **override) -> SpinModel:
    kw = dict(
        b11=cfg.b11, b12=cfg.b12, b21=cfg.b21, b22=cfg.b22, m=cfg.m, theta=cfg.theta, phi=cfg.phi,
        omega1=cfg.omega1, omega2=cfg.omega2, fixed_gap=cfg.fixed_gap,
    )
    kw.update(override)
    return SpinModel.two_tone(**kw)


def params_from(cfg: ExperimentConfig, tau2: float | None = None) -> DissipatorParams:
    """Dissipator; a swept tau2 drags tau1 along unless tau1 was set explicitly."""
    t2 = cfg.tau2 if tau2 is None else tau2
    t1 = cfg.tau1 if ("tau1" in cfg.explicit or tau2 is None) else t2
    return DissipatorParams(t1, t2, cfg.s0_mode, cfg.beta)


def _status(exc) -> str:
    return "gap_closure" if isinstance(exc, GapClosure) else "unresolved"


# --- physical estimate -----------------------------------------------------


class EstimateReport(NamedTuple):
    gamma: float
    w_d: float
    dT_dt: float
    gamma_alt: float
    w_d_alt: float
    dT_dt_alt: float


def physical_estimate(field_amplitude: float, omega1: float, omega2: float, tau2: float, chern: int,
                      n_atoms: int = 1) -> EstimateReport:
    """Heating of an atomic cloud at the topological dissipation bound, in SI units.

    x = Delta tau2 with Delta = field_amplitude; W = hbar omega1 omega2 gamma |C|/(2 pi)
    per atom and dT/dt = N W / (N k_B).  The ``_alt`` fields use Delta = 2 x field.
    """
    for name, v in (("field_amplitude", field_amplitude), ("omega1", omega1), ("omega2", omega2),
                    ("tau2", tau2), ("n_atoms", n_atoms)):
        if not v > 0:
            raise ValueError(f"{name} must be positive")

    def one(delta):
        x = delta * tau2
        gamma = 2 * x / (1 + x * x)
        w = constants.hbar * omega1 * omega2 * gamma * abs(chern) / (2 * math.pi)
        return gamma, w, n_atoms * w / (n_atoms * constants.k)

    return EstimateReport(*one(field_amplitude), *one(2 * field_amplitude))


def run_estimate(cfg: ExperimentConfig) -> Table:
    r = physical_estimate(cfg.field_amplitude, cfg.omega1, cfg.omega2, cfg.tau2, cfg.chern, cfg.n_atoms)
    t = Table(["convention", "delta", "gamma", "w_d_watt", "dT_dt_kelvin_per_s"])
    t.add(convention="delta=field", delta=cfg.field_amplitude, gamma=r.gamma, w_d_watt=r.w_d,
          dT_dt_kelvin_per_s=r.dT_dt)
    t.add(convention="delta=2*field", delta=2 * cfg.field_amplitude, gamma=r.gamma_alt, w_d_watt=r.w_d_alt,
          dT_dt_kelvin_per_s=r.dT_dt_alt)
    return t


# --- experiments -----------------------------------------------------------


def run_steady_state(cfg: ExperimentConfig) -> Table:
    """Toy-model steady state vs RK4, frame components (e, f, d), per x = delta0 tau2."""
    t = Table(["x", "tau2", "s_e", "s_f", "s_d", "s_e_ode", "s_f_ode", "s_d_ode", "max_abs_diff", "tolerance"])
    omega = cfg.omega_ratio * cfg.delta0
    for x in cfg.values["x_values"]:
        tau2 = x / cfg.delta0
        p = DissipatorParams(tau2 if "tau1" not in cfg.explicit else cfg.tau1, tau2, cfg.s0_mode, cfg.beta)
        c = toy_steady_state_check(cfg.delta0, omega, p)
        t.add(x=x, tau2=tau2, s_e=c.analytic[0], s_f=c.analytic[1], s_d=c.analytic[2],
              s_e_ode=c.ode[0], s_f_ode=c.ode[1], s_d_ode=c.ode[2],
              max_abs_diff=float(np.abs(c.analytic - c.ode).max()), tolerance=5 * cfg.omega_ratio**2)
    return t


def run_toy(cfg: ExperimentConfig) -> Table:
    p = params_from(cfg)
    exact = toy_model_dissipation(cfg.delta0, cfg.omega1, p)
    ode = cycle_averaged_power(SpinModel.toy(cfg.delta0, cfg.omega1), p, cfg.n_per_period)
    t = Table(["delta0", "omega", "tau1", "tau2", "w_closed_form", "w_ode_heat", "w_ode_work", "rel_diff"])
    t.add(delta0=cfg.delta0, omega=cfg.omega1, tau1=p.tau1, tau2=p.tau2, w_closed_form=exact,
          w_ode_heat=ode.dissipation, w_ode_work=ode.work, rel_diff=(ode.dissipation - exact) / exact)
    return t


def run_fig2(cfg: ExperimentConfig) -> Table:
    n_lo, n_hi, _ = cfg.n_range
    n_values = range(int(n_lo), int(n_hi) + 1)
    t = Table(["m", "n", "w_d_bar", "w_c_bar", "delta_w_d", "delta_w_c"])
    for m in cfg.sweep("m"):
        rows = commensurate_sweep(model_from(cfg, m=m), params_from(cfg), n_values, cfg.n_grid, cfg.n_per_period)
        for r in rows:
            t.add(m=m, n="inf" if r.n is None else r.n, w_d_bar=r.w_d_bar, w_c_bar=r.w_c_bar,
                  delta_w_d=r.delta_w_d, delta_w_c=r.delta_w_c)
    return t


_BOUND_COLS = ["w_d_bar", "w_c_bar", "w_gb_bar", "w_tb_bar", "gamma_min", "gamma_max"]


def _bound_row(model, params, cfg):
    rep = bounds_report(model, params, cfg.n_grid, cfg.n_chern)
    rates = rate_report(model, params, Incommensurate(cfg.n_grid))
    w0 = rep.w0
    return dict(status="ok", chern=rep.chern, w_d_bar=rep.w_d / w0, w_c_bar=rates.w_c_bar,
                w_gb_bar=rep.w_gb / w0, w_tb_bar=rep.w_tb / w0, w_fb_bar=rep.w_fb / w0, w_ub_bar=rep.w_ub / w0,
                gamma_min=rep.gamma_min, gamma_max=rep.gamma_max, g12_avg=rep.g12_avg)


def _safe_row(fn, *args):
    try:
        return fn(*args)
    except (GapClosure, UnresolvedTopology) as exc:
        return {"status": _status(exc)}


def run_fig3b(cfg: ExperimentConfig) -> Table:
    """Conversion rate, dissipation and the two lower bounds against m, per tau2."""
    t = Table(["tau2", "m", "status", "chern"] + _BOUND_COLS)
    for tau2 in cfg.sweep("tau2"):
        p = params_from(cfg, tau2)
        for m in cfg.sweep("m"):
            row = _safe_row(_bound_row, model_from(cfg, m=m), p, cfg)
            t.add(tau2=tau2, m=m, **{k: row.get(k) for k in ["status", "chern"] + _BOUND_COLS})
    return t


def run_fig3c(cfg: ExperimentConfig) -> Table:
    """As fig3b for the fixed-gap model, with the variable-gap topological bound alongside."""
    cols = ["tau2", "m", "status", "chern"] + _BOUND_COLS + ["tightness", "w_d_bar_variable",
                                                            "w_tb_bar_variable", "tightness_variable"]
    t = Table(cols)
    for tau2 in cfg.sweep("tau2"):
        p = params_from(cfg, tau2)
        for m in cfg.sweep("m"):
            fixed = _safe_row(_bound_row, model_from(cfg, m=m), p, cfg)
            var = _safe_row(_bound_row, model_from(cfg, m=m, fixed_gap=None), p, cfg)
            row = {k: fixed.get(k) for k in ["status", "chern"] + _BOUND_COLS}
            if fixed["status"] == "ok" and var["status"] == "ok":
                row.update(tightness=fixed["w_tb_bar"] / fixed["w_d_bar"], w_d_bar_variable=var["w_d_bar"],
                           w_tb_bar_variable=var["w_tb_bar"],
                           tightness_variable=var["w_tb_bar"] / var["w_d_bar"])
            elif var["status"] != "ok":
                row["status"] = var["status"]
            t.add(tau2=tau2, m=m, **row)
    return t


def _phi_values(cfg: ExperimentConfig) -> list[float]:
    if cfg.phi_values is not None:
        return list(cfg.phi_values)
    n = cfg.phi_count
    return [2 * math.pi * k / n for k in range(n)]


def run_fig3def(cfg: ExperimentConfig) -> Table:
    """Dissipation, all bounds and the averaged g12 against the azimuth of m."""
    cols = ["phi", "status", "chern", "w_d_bar", "w_gb_bar", "w_tb_bar", "w_fb_bar", "w_ub_bar", "g12_avg"]
    t = Table(cols)
    p = params_from(cfg)
    for phi in _phi_values(cfg):
        row = _safe_row(_bound_row, model_from(cfg, phi=phi), p, cfg)
        t.add(phi=phi, **{k: row.get(k) for k in cols[1:]})
    return t


def run_chern(cfg: ExperimentConfig) -> Table:
    t = Table(["m", "status", "chern", "flux_sum"])
    for m in cfg.sweep("m"):
        model = model_from(cfg, m=m)
        try:
            c = chern_number(model, cfg.n_chern)
            _, raw = chern_from_grid(model, cfg.n_chern)
            t.add(m=m, status="ok", chern=c, flux_sum=raw)
        except (GapClosure, UnresolvedTopology) as exc:
            t.add(m=m, status=_status(exc))
    return t


def run_bounds(cfg: ExperimentConfig) -> Table:
    """All bounds and the R chain for a single configuration (gap closure is fatal)."""
    model, p = model_from(cfg), params_from(cfg)
    rep = bounds_report(model, p, cfg.n_grid, cfg.n_chern)
    lhs, mid, rhs = inequality_chain_R(model, geo=torus_grid(model, p, cfg.n_grid), chern=rep.chern)
    t = Table(["chern", "w0", "w_d", "w_gb", "w_tb", "w_fb", "w_ub", "gamma_min", "gamma_max", "delta_min",
               "p1", "p2", "g12_avg", "r_lower", "r_mid", "r_upper"])
    t.add(chern=rep.chern, w0=rep.w0, w_d=rep.w_d, w_gb=rep.w_gb, w_tb=rep.w_tb, w_fb=rep.w_fb, w_ub=rep.w_ub,
          gamma_min=rep.gamma_min, gamma_max=rep.gamma_max, delta_min=rep.delta_min, p1=rep.p1, p2=rep.p2,
          g12_avg=rep.g12_avg, r_lower=lhs, r_mid=mid, r_upper=rhs)
    return t


RUNNERS = {
    "steady-state": run_steady_state,
    "toy": run_toy,
    "fig2": run_fig2,
    "fig3b": run_fig3b,
    "fig3c": run_fig3c,
    "fig3def": run_fig3def,
    "chern": run_chern,
    "bounds": run_bounds,
    "estimate": run_estimate,
}


# --- invariants ------------------------------------------------------------


def _le(a, b, rtol) -> bool:
    return a <= b + rtol * max(abs(a), abs(b))


def check_invariants(experiment: str, table: Table, rtol: float = 1e-9):
    """Fail closed if a row breaks an ordering the experiment is meant to display."""

    def fail(i, what):
        raise InvariantViolation(f"{experiment}: row {i}: {what}", row=i)

    for i, r in enumerate(table.rows):
        for k, v in r.items():
            if isinstance(v, float) and not math.isfinite(v):
                fail(i, f"{k} is not finite")
        if r.get("status", "ok") != "ok":
            continue
        if experiment in ("fig3b", "fig3c"):
            if not _le(r["w_tb_bar"], r["w_gb_bar"], rtol):
                fail(i, "W_tb > W_gb")
            if not _le(r["w_gb_bar"], r["w_d_bar"], rtol):
                fail(i, "W_gb > W_d")
        if experiment == "fig3c" and abs(r["gamma_max"] - r["gamma_min"]) > rtol * r["gamma_max"]:
            fail(i, "gamma varies in the fixed-gap model")
        if experiment in ("fig3def", "bounds"):
            sfx = "_bar" if experiment == "fig3def" else ""
            if not _le(r["w_fb" + sfx], r["w_d" + sfx], rtol):
                fail(i, "W_fb > W_d")
            if not _le(r["w_d" + sfx], r["w_ub" + sfx], rtol):
                fail(i, "W_d > W_ub")
            if not _le(r["w_tb" + sfx], r["w_gb" + sfx], rtol):
                fail(i, "W_tb > W_gb")
        if experiment == "bounds" and not (_le(r["r_lower"], r["r_mid"], rtol) and _le(r["r_mid"], r["r_upper"], rtol)):
            fail(i, "R chain out of order")
        if experiment in ("toy", "fig2", "fig3b", "fig3c", "fig3def") and r.get("w_d_bar", 0.0) < 0:
            fail(i, "negative dissipation")


def run_experiment(cfg: ExperimentConfig) -> Table:
    table = RUNNERS[cfg.experiment](cfg)
    check_invariants(cfg.experiment, table, cfg.rtol)
    return table
