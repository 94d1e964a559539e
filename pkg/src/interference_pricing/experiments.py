"""Sweep configuration, figure-reproduction sweeps and flat-file output.

Configurations are small YAML documents::

    w: 1
    s: 1
    gains: [[1, 0.3], [0.4, 1]]      # or raw_gains: [...] with normalize: true
    prices: [0.2, 0.4]               # used by the 'we' and 'regions' runs
    sweep:
      a2: {start: 0, stop: 1.7, step: 0.02}
    s_values: [0.1, 1, 10]           # 'fig5' only
    outputs: [me_pd, de]
    allow_strong: false
    seed: 0
"""

from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .equilibria import br_iterate, duopoly, monopoly_pd, monopoly_search, monopoly_uniform, unilateral_gain
from .errors import (
    BoundViolated,
    DegenerateDuopoly,
    EmptyTable,
    GainFloorWarning,
    HypothesisViolated,
    ParseError,
    PricingError,
    ValidationError,
)
from .lcp import LcpInstance, assemble_lcp, is_p_matrix, solve_lcp_enumerate, solve_lcp_lemke
from .market import DemandCurve, Market, RawChannelModel, build_market, from_sinr, weak_interference_check
from .metrics import efficiency, verify_bounds
from .wardrop import (
    classify_region,
    demand_branches,
    demand_crossings,
    normalize_order,
    switch_off_point,
    switch_on_point,
    total_demand,
    wardrop_equilibrium,
)

SWEEP_VARIABLES = ("a2", "b1", "s", "p1", "p2")
OUTPUTS = ("me_pd", "me_uniform", "de", "pocs", "pocp", "regions", "fd_curve")
WEAK_OUTPUTS = {"me_pd", "me_uniform", "de", "pocs", "pocp"}
TWO_AP_OUTPUTS = {"regions", "fd_curve"}
KEYS = {"w", "s", "gains", "raw_gains", "normalize", "prices", "sweep", "s_values",
        "outputs", "out", "seed", "allow_strong"}


@dataclass(frozen=True)
class Range:
    start: float
    stop: float
    step: float

    def values(self) -> np.ndarray:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return np.round(self.start + self.step * np.arange(n), 12)


@dataclass(frozen=True)
class SweepConfig:
    w: float = 1.0
    s: float = 1.0
    gains: tuple = ((1.0, 0.0), (0.0, 1.0))
    prices: tuple | None = None
    sweep: dict = field(default_factory=dict)
    s_values: tuple = (0.1, 1.0, 10.0)
    outputs: tuple = ()
    out: str | None = None
    seed: int = 0
    allow_strong: bool = False

    @property
    def n(self) -> int:
        return len(self.gains)

    def market(self, **over) -> Market:
        """Base market with any of ``w, s, a2, b1`` overridden."""
        g = np.array(self.gains, dtype=float)
        if "a2" in over:
            g[1, 0] = over["a2"]
        if "b1" in over:
            g[0, 1] = over["b1"]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", GainFloorWarning)
            return build_market(DemandCurve(over.get("w", self.w), over.get("s", self.s)), g)

    def with_step(self, step: float | None) -> "SweepConfig":
        if step is None:
            return self
        return replace(self, sweep={k: replace(r, step=step) for k, r in self.sweep.items()})


def _number(raw, key: str, positive: bool = False) -> float:
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ValidationError(key, f"expected a number, got {raw!r}")
    val = float(raw)
    if not math.isfinite(val):
        raise ValidationError(key, "must be finite")
    if positive and val <= 0:
        raise ValidationError(key, "must be positive")
    return val


def _matrix(raw, key: str) -> tuple:
    if not isinstance(raw, list) or not raw or not all(isinstance(r, list) for r in raw):
        raise ValidationError(key, "expected a nested list (row-major matrix)")
    rows = tuple(tuple(_number(v, key) for v in r) for r in raw)
    if any(len(r) != len(rows) for r in rows):
        raise ValidationError(key, "matrix must be square")
    return rows


def _range(raw, key: str) -> Range:
    if isinstance(raw, list) and len(raw) == 3:
        start, stop, step = raw
    elif isinstance(raw, dict) and set(raw) <= {"start", "stop", "step"} and len(raw) == 3:
        start, stop, step = raw["start"], raw["stop"], raw["step"]
    else:
        raise ValidationError(key, "expected {start, stop, step} or [start, stop, step]")
    r = Range(_number(start, key), _number(stop, key), _number(step, key, positive=True))
    if r.stop < r.start:
        raise ValidationError(key, "stop must not be below start")
    return r


def _max_cross(cfg: SweepConfig) -> float:
    g = np.array(cfg.gains, dtype=float)
    a2 = cfg.sweep["a2"].values().max() if "a2" in cfg.sweep else g[1, 0]
    b1 = cfg.sweep["b1"].values().max() if "b1" in cfg.sweep else g[0, 1]
    return a2 + b1


def parse_config(text: str, overrides: dict | None = None, **defaults) -> SweepConfig:
    """Parse and validate a YAML sweep configuration.

    Keyword arguments supply defaults for keys the text leaves out;
    ``overrides`` (command-line flags) take precedence over the text.
    Raises :class:`ParseError` (with line and column) on malformed YAML and
    :class:`ValidationError` naming the key on bad content.
    """
    try:
        doc = yaml.safe_load(text) if text.strip() else {}
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise ParseError(exc.problem or str(exc), line, col) from None
    except yaml.YAMLError as exc:
        raise ParseError(str(exc)) from None
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ParseError("top level must be a mapping of keys to values", 1, 1)
    for key in doc:
        if key not in KEYS:
            raise ValidationError(str(key), "unknown key")
    merged = {**defaults, **doc, **(overrides or {})}

    kw: dict = {}
    kw["w"] = _number(merged.get("w", 1.0), "w", positive=True)
    kw["s"] = _number(merged.get("s", 1.0), "s", positive=True)
    if "raw_gains" in doc:
        if not doc.get("normalize", False):
            raise ValidationError("normalize", "raw_gains requires normalize: true")
        raw = np.array(_matrix(doc["raw_gains"], "raw_gains"))
        try:
            g = from_sinr(RawChannelModel(raw))
        except PricingError as exc:
            raise ValidationError("raw_gains", str(exc)) from None
        kw["gains"] = tuple(tuple(r) for r in g.g.tolist())
    elif "gains" in merged:
        kw["gains"] = _matrix(merged["gains"], "gains")
    if "gains" in kw:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", GainFloorWarning)
                build_market(DemandCurve(kw["w"], kw["s"]), kw["gains"])
        except PricingError as exc:
            raise ValidationError("gains", str(exc)) from None
    if merged.get("prices") is not None:
        p = merged["prices"]
        if not isinstance(p, list):
            raise ValidationError("prices", "expected a list")
        kw["prices"] = tuple(_number(v, "prices") for v in p)
        if any(v < 0 for v in kw["prices"]):
            raise ValidationError("prices", "prices must be non-negative")
    sweep = merged.get("sweep") or {}
    if not isinstance(sweep, dict):
        raise ValidationError("sweep", "expected a mapping from variable to range")
    for var in sweep:
        if var not in SWEEP_VARIABLES:
            raise ValidationError(f"sweep.{var}", f"sweep variable must be one of {SWEEP_VARIABLES}")
    kw["sweep"] = {var: _range(r, f"sweep.{var}") for var, r in sweep.items()}
    if "s_values" in merged:
        sv = merged["s_values"]
        if not isinstance(sv, list) or not sv:
            raise ValidationError("s_values", "expected a non-empty list")
        kw["s_values"] = tuple(_number(v, "s_values", positive=True) for v in sv)
    outputs = merged.get("outputs", [])
    if not isinstance(outputs, list) or any(o not in OUTPUTS for o in outputs):
        raise ValidationError("outputs", f"each output must be one of {OUTPUTS}")
    kw["outputs"] = tuple(outputs)
    if merged.get("out") is not None:
        kw["out"] = str(merged["out"])
    seed = merged.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ValidationError("seed", "expected an integer")
    kw["seed"] = seed
    allow = merged.get("allow_strong", False)
    if not isinstance(allow, bool):
        raise ValidationError("allow_strong", "expected true or false")
    kw["allow_strong"] = allow

    cfg = SweepConfig(**kw)
    return validate(cfg)


def validate(cfg: SweepConfig) -> SweepConfig:
    """Cross-key checks shared by the parser and command-line overrides."""
    if cfg.prices is not None and len(cfg.prices) != cfg.n:
        raise ValidationError("prices", f"expected {cfg.n} prices")
    two_ap_needed = set(cfg.outputs) & TWO_AP_OUTPUTS or {"a2", "b1"} & set(cfg.sweep)
    if two_ap_needed and cfg.n != 2:
        raise ValidationError("gains", "two-AP outputs and a2/b1 sweeps need a 2x2 gain matrix")
    if set(cfg.outputs) & WEAK_OUTPUTS and not cfg.allow_strong:
        if cfg.n == 2:
            if _max_cross(cfg) >= 2:
                raise ValidationError(
                    "sweep", "a2 + b1 reaches 2 (strong interference); set allow_strong: true to use numeric paths"
                )
        elif not weak_interference_check(np.array(cfg.gains)):
            raise ValidationError("gains", "strong interference; set allow_strong: true")
    return cfg


def load_config(path, overrides: dict | None = None, **defaults) -> SweepConfig:
    return parse_config(Path(path).read_text(), overrides, **defaults)


# ---------------------------------------------------------------------------
# tables


@dataclass
class Table:
    """Column-ordered result rows plus the metadata that produced them."""

    name: str
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, **row):
        self.rows.append([row.get(c, "") for c in self.columns])

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [r[k] for r in self.rows]

    def __len__(self):
        return len(self.rows)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else "%.17g" % v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\r\n")
    wr.writerow(table.columns)
    for r in table.rows:
        wr.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def emit_csv(table: Table, path) -> Path:
    if not table.rows:
        raise EmptyTable(f"table {table.name!r} has no rows")
    path = Path(path)
    path.write_bytes(to_csv(table).encode())
    return path


def build_id() -> str:
    from . import __version__

    try:
        res = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
        if res.returncode == 0 and res.stdout.strip():
            return f"{__version__}+{res.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def plot_blocks(table: Table) -> list[dict]:
    """Split a table into one block per figure panel: ``{name, x, xlabel, ylabel, series}``."""
    if table.name == "fig4":
        x = table.column("a2")
        panels = [("fig4a", "price", "p"), ("fig4b", "user flow", "x"), ("fig4c", "profit", "prof")]
        blocks = []
        for name, ylabel, stem in panels:
            series = {f"{stem}{i}_{eq}": table.column(f"{stem}{i}_{eq}") for eq in ("me", "de") for i in (1, 2)}
            blocks.append({"name": name, "xlabel": "a2", "ylabel": ylabel, "x": x, "series": series})
        return blocks
    if table.name == "fig5":
        blocks = []
        s_col, a_col = table.column("s"), table.column("a2")
        s_vals = sorted(set(s_col))
        for name, metric in (("fig5a", "pocs"), ("fig5b", "pocp")):
            vals = table.column(metric)
            x = sorted(set(a_col))
            series = {}
            for s in s_vals:
                lookup = {a: v for a, v, ss in zip(a_col, vals, s_col) if ss == s}
                series[f"s={s:g}"] = [lookup.get(a, float("nan")) for a in x]
            blocks.append({"name": name, "xlabel": "a2 = b1", "ylabel": metric.upper(), "x": x, "series": series})
        return blocks
    numeric = [c for c in table.columns[1:]
               if all(isinstance(v, (int, float, np.number)) and not isinstance(v, bool) for v in table.column(c))]
    return [{"name": table.name, "xlabel": table.columns[0], "ylabel": "value",
             "x": table.column(table.columns[0]), "series": {c: table.column(c) for c in numeric}}]


def emit_plotdata(table: Table, path) -> tuple[Path, Path]:
    """Whitespace-separated ``x series...`` blocks plus a JSON sidecar.

    Blocks are separated by two blank lines (gnuplot ``index`` style).  The
    sidecar ``<path>.meta.json`` records axis labels, the sweep parameters
    and the build identifier.
    """
    if not table.rows:
        raise EmptyTable(f"table {table.name!r} has no rows")
    path = Path(path)
    blocks = plot_blocks(table)
    out = []
    for b in blocks:
        names = list(b["series"])
        lines = [f"# {b['name']}", "# " + " ".join([b["xlabel"].replace(" ", "")] + names)]
        for k, xv in enumerate(b["x"]):
            lines.append(" ".join(_fmt(v) for v in [xv] + [b["series"][n][k] for n in names]))
        out.append("\n".join(lines))
    path.write_text("\n\n\n".join(out) + "\n")
    meta = {
        "table": table.name,
        "build": build_id(),
        "parameters": table.meta,
        "blocks": [{"name": b["name"], "xlabel": b["xlabel"], "ylabel": b["ylabel"], "series": list(b["series"])}
                   for b in blocks],
    }
    side = path.with_name(path.name + ".meta.json")
    side.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_fmt) + "\n")
    return path, side


# ---------------------------------------------------------------------------
# runs

FIG4_DEFAULTS = {"w": 1, "s": 1, "gains": [[1, 0.3], [0, 1]],
                 "sweep": {"a2": {"start": 0, "stop": 1.68, "step": 0.02}}, "outputs": ["me_pd", "de"]}
FIG5_DEFAULTS = {"w": 1, "gains": [[1, 0], [0, 1]], "s_values": [0.1, 1, 10],
                 "sweep": {"a2": {"start": 0, "stop": 0.99, "step": 0.01}}, "outputs": ["pocs", "pocp"]}
REGIONS_DEFAULTS = {"w": 1, "s": 1, "gains": [[1, 0], [0, 1]], "prices": [0.2, 0.4],
                    "sweep": {"a2": {"start": 0, "stop": 3, "step": 0.1},
                              "b1": {"start": 0, "stop": 3, "step": 0.1}},
                    "outputs": ["regions"]}


def _sweep_values(cfg: SweepConfig, var: str, default: Range) -> np.ndarray:
    return cfg.sweep.get(var, default).values()


def _meta(cfg: SweepConfig, **extra) -> dict:
    return {
        "w": cfg.w, "s": cfg.s, "gains": [list(r) for r in cfg.gains],
        "prices": list(cfg.prices) if cfg.prices else None,
        "sweep": {k: [r.start, r.stop, r.step] for k, r in sorted(cfg.sweep.items())},
        "seed": cfg.seed, "allow_strong": cfg.allow_strong, **extra,
    }


FIG4_COLUMNS = ["a2", "p1_me", "p2_me", "p1_de", "p2_de", "x1_me", "x2_me", "x1_de", "x2_de",
                "prof1_me", "prof2_me", "prof1_de", "prof2_de", "de_case_tag", "me_method",
                "p_meu", "x1_meu", "x2_meu", "prof1_meu", "prof2_meu"]


def run_fig4(cfg: SweepConfig) -> Table:
    """Monopoly and duopoly prices, flows and profits along an ``a2`` sweep.

    Rows where ``a2 + b1 >= 2`` are skipped unless ``allow_strong`` is set,
    in which case monopoly prices come from grid search and duopoly prices
    from best-response iteration.
    """
    table = Table("fig4", FIG4_COLUMNS, meta=_meta(cfg, figure="fig4"))
    b1 = float(cfg.gains[0][1])
    for a2 in _sweep_values(cfg, "a2", Range(0.0, 1.68, 0.02)):
        market = cfg.market(a2=a2)
        if market.weak:
            me, de, meu = monopoly_pd(market), duopoly(market), monopoly_uniform(market)
        elif cfg.allow_strong:
            me, de, meu = monopoly_search(market), br_iterate(market), None
        else:
            continue
        row = dict(a2=float(a2), de_case_tag=de.case_tag, me_method=me.method)
        for i in (0, 1):
            k = i + 1
            row[f"p{k}_me"], row[f"p{k}_de"] = float(me.prices[i]), float(de.prices[i])
            row[f"x{k}_me"], row[f"x{k}_de"] = float(me.flows[i]), float(de.flows[i])
            row[f"prof{k}_me"], row[f"prof{k}_de"] = float(me.profits[i]), float(de.profits[i])
            if meu is not None:
                row[f"x{k}_meu"], row[f"prof{k}_meu"] = float(meu.flows[i]), float(meu.profits[i])
        if meu is not None:
            row["p_meu"] = float(meu.prices[0])
        table.add(**row)
    table.meta["b1"] = b1
    return table


METRIC_COLUMNS = ["s", "a2", "b1", "pocs", "pocp", "sw_me", "sw_de", "profit_me", "profit_de", "status"]


def _metrics_row(market: Market, **nominal) -> dict:
    # report the configured gains rather than their floored values
    row = dict(s=market.s, a2=market.a2, b1=market.b1)
    row.update(nominal)
    try:
        m = efficiency(market)
    except (DegenerateDuopoly, HypothesisViolated) as exc:
        nan = float("nan")
        row.update(pocs=nan, pocp=nan, sw_me=nan, sw_de=nan, profit_me=nan, profit_de=nan,
                   status=type(exc).__name__)
        return row
    row.update(pocs=m.pocs, pocp=m.pocp, sw_me=m.sw_me, sw_de=m.sw_de,
               profit_me=m.monopoly.total_profit, profit_de=m.duopoly.total_profit, status="ok")
    return row


def run_fig5(cfg: SweepConfig) -> Table:
    """PoCS and PoCP for symmetric gains ``a2 = b1`` at each ``s`` in ``s_values``."""
    table = Table("fig5", METRIC_COLUMNS, meta=_meta(cfg, figure="fig5", s_values=list(cfg.s_values)))
    for s in cfg.s_values:
        for a in _sweep_values(cfg, "a2", Range(0.0, 0.99, 0.01)):
            table.add(**_metrics_row(cfg.market(s=s, a2=a, b1=a), a2=float(a), b1=float(a)))
    return table


def run_metrics(cfg: SweepConfig) -> Table:
    """Efficiency metrics for the base market, or along a one-variable sweep."""
    table = Table("metrics", METRIC_COLUMNS, meta=_meta(cfg))
    nominal = dict(a2=cfg.gains[1][0], b1=cfg.gains[0][1]) if cfg.n == 2 else {}
    if not cfg.sweep:
        table.add(**_metrics_row(cfg.market(), **nominal))
        return table
    if len(cfg.sweep) != 1 or set(cfg.sweep) & {"p1", "p2"}:
        raise ValidationError("sweep", "metrics sweeps take exactly one of a2, b1, s")
    (var, rng), = cfg.sweep.items()
    for v in rng.values():
        over = {var: float(v)}
        table.add(**_metrics_row(cfg.market(**over), **{**nominal, **over}))
    return table


REGION_COLUMNS = ["a2", "b1", "p1", "p2", "region", "n_equilibria", "n_crossings", "d_star_list"]


def run_regions(cfg: SweepConfig) -> Table:
    """Fine region label and equilibrium count over an ``(a2, b1)`` grid at fixed prices."""
    p1, p2 = cfg.prices or (0.2, 0.4)
    table = Table("regions", REGION_COLUMNS, meta=_meta(cfg))
    for a2 in _sweep_values(cfg, "a2", Range(0.0, 3.0, 0.1)):
        for b1 in _sweep_values(cfg, "b1", Range(0.0, 3.0, 0.1)):
            market = cfg.market(a2=a2, b1=b1)
            ga2, gb1, q1, q2, _ = normalize_order(market.a2, market.b1, p1, p2)
            region = classify_region(ga2, gb1, q1, min(q2, cfg.w), cfg.w) if q1 < cfg.w else "none"
            sols = solve_lcp_enumerate(assemble_lcp(market, [p1, p2]))
            d_star = [cfg.w - cfg.s * float(np.sum(sol.x)) for sol in sols]
            crossings = demand_crossings(market.a2, market.b1, p1, p2, cfg.w, cfg.s)
            table.add(a2=float(a2), b1=float(b1), p1=p1, p2=p2, region=region, n_equilibria=len(sols),
                      n_crossings=len(crossings), d_star_list=";".join(_fmt(d) for d in d_star))
    return table


def run_fd_curve(cfg: SweepConfig, points: int = 201) -> Table:
    """Sampled total-demand correspondence ``f(d)`` for the base two-AP market."""
    p1, p2 = cfg.prices or (0.2, 0.4)
    market = cfg.market()
    a2, b1, q1, q2, _ = normalize_order(market.a2, market.b1, p1, p2)
    table = Table("fd_curve", ["d", "f_low", "f_mid", "f_high", "demand"], meta=_meta(cfg))
    branches = demand_branches(a2, b1, q1, min(q2, cfg.w), cfg.w)
    for d in np.linspace(q1, cfg.w, points)[1:-1]:
        vals = next((sorted(b.values(d)) for b in branches if b.lo < d <= b.hi), [0.0])
        lo, mid, hi = vals if len(vals) == 3 else (vals[0],) * 3
        table.add(d=float(d), f_low=float(lo), f_mid=float(mid), f_high=float(hi),
                  demand=float(market.demand.inverse(d)))
    return table


def run_we(cfg: SweepConfig) -> Table:
    market = cfg.market()
    prices = cfg.prices if cfg.prices is not None else (0.0,) * market.n
    res = wardrop_equilibrium(market, prices)
    cols = [f"p_{i + 1}" for i in range(market.n)] + [f"x_{i + 1}" for i in range(market.n)]
    table = Table("we", cols + ["total", "disutility", "unique", "n_equilibria"], meta=_meta(cfg))
    for x in res.all_equilibria:
        row = {f"p_{i + 1}": float(prices[i]) for i in range(market.n)}
        row.update({f"x_{i + 1}": float(x[i]) for i in range(market.n)})
        total = float(np.sum(x))
        row.update(total=total, disutility=float(market.demand.u(total)) if total > 0 else "none",
                   unique=res.unique, n_equilibria=res.n_equilibria)
        table.add(**row)
    return table


def _report_table(name: str, reports, cfg: SweepConfig, n: int) -> Table:
    cols = (["kind", "case_tag"] + [f"p_{i + 1}" for i in range(n)] + [f"x_{i + 1}" for i in range(n)]
            + [f"profit_{i + 1}" for i in range(n)] + ["converged", "method"])
    table = Table(name, cols, meta=_meta(cfg))
    for rep in reports:
        table.add(**rep.as_row(), method=rep.method)
    return table


def run_me(cfg: SweepConfig) -> Table:
    market = cfg.market()
    if market.weak:
        reports = [monopoly_pd(market), monopoly_uniform(market)]
    elif cfg.allow_strong:
        reports = [monopoly_search(market)]
    else:
        raise HypothesisViolated("strong interference: pass --allow-strong for the numeric search")
    return _report_table("me", reports, cfg, market.n)


def run_de(cfg: SweepConfig) -> Table:
    market = cfg.market()
    if market.n == 2 and market.weak:
        rep = duopoly(market)
    elif market.weak or cfg.allow_strong:
        rep = br_iterate(market)
    else:
        raise HypothesisViolated("strong interference: pass --allow-strong for best-response iteration")
    return _report_table("de", [rep], cfg, market.n)


def random_weak_market(rng: np.random.Generator, n: int) -> Market:
    """Random market whose gains satisfy the weak-interference condition."""
    g = rng.uniform(0.0, 1.0, (n, n))
    np.fill_diagonal(g, 0.0)
    cross = (g + g.T).sum(axis=1).max()
    if cross > 0:
        g *= 2.0 * rng.uniform(0.05, 0.999) / cross
    g = np.maximum(g, 1e-6)
    np.fill_diagonal(g, 1.0)
    return build_market(DemandCurve(rng.uniform(0.5, 2.0), rng.uniform(0.1, 3.0)), g)


def _check_lcp(rng, instances):
    worst = res = 0.0
    not_unique = not_p = 0
    for _ in range(instances):
        market = random_weak_market(rng, int(rng.integers(1, 9)))
        inst = assemble_lcp(market, rng.uniform(0.0, 1.2 * market.w, market.n))
        sols = solve_lcp_enumerate(inst)
        lem = solve_lcp_lemke(inst)
        not_unique += len(sols) != 1
        not_p += not is_p_matrix(inst.m)
        res = max(res, lem.residual)
        if sols:
            worst = max(worst, float(np.max(np.abs(sols[0].x - lem.x))))
    yield ("lcp_lemke_vs_enumeration", worst <= 1e-8 and not not_unique and res <= 1e-10,
           f"instances={instances} max_diff={worst:.3g} non_unique={not_unique} residual={res:.3g}")
    yield "weak_implies_p_matrix", not not_p, f"counterexamples={not_p}"


def _check_closed_forms(rng, markets):
    me_err = de_err = gain = 0.0
    for _ in range(markets):
        w, s = rng.uniform(0.5, 2.0), rng.uniform(0.1, 3.0)
        market = Market.two_ap(w, s, *rng.uniform(0.0, 1.0, 2))
        me_err = max(me_err, float(np.max(np.abs(monopoly_pd(market).prices - monopoly_search(market).prices))))
        de = duopoly(market)
        de_err = max(de_err, float(np.max(np.abs(de.prices - br_iterate(market).prices))))
        gain = max(gain, unilateral_gain(market, de.prices, 1e-3))
    yield ("closed_form_vs_numeric", me_err <= 1e-4 and de_err <= 1e-5 and gain <= 1e-8,
           f"markets={markets} me_pd_err={me_err:.3g} de_err={de_err:.3g} deviation_gain={gain:.3g}")


def _check_spot_values():
    market = Market.two_ap(1.0, 1.0, 0.0, 0.0)
    m = efficiency(market)
    err = max(np.max(np.abs(m.monopoly.prices - 0.5)), np.max(np.abs(m.monopoly.flows - 1 / 6)),
              np.max(np.abs(m.duopoly.prices - 1 / 3)), np.max(np.abs(m.duopoly.flows - 2 / 9)),
              abs(m.sw_me - 2 / 9), abs(m.sw_de - 20 / 81), abs(m.pocs - 0.9), abs(m.pocp - 1.125))
    yield "spot_values", err <= 1e-9, f"max_err={err:.3g}"


def _check_bounds():
    s_grid = [10.0 ** k for k in range(-3, 7)]
    a_grid = np.round(np.arange(0.0, 1.0, 0.01), 2)
    try:
        rep = verify_bounds(s_grid, a_grid, method="definitional")
    except BoundViolated as exc:
        yield "pocs_pocp_bounds", False, str(exc)
        return
    sym = lambda s, a: efficiency(Market.two_ap(1.0, s, a, a))
    tight_s = max(abs(sym(1e6, a).pocs - 0.75) for a in a_grid)
    tight_p = abs(sym(1e-6, 1e-6).pocp - 1.0)
    big_s, big_p = sym(1e-3, 0.999).pocs, sym(1.0, 0.999).pocp
    yield ("pocs_pocp_bounds", tight_s <= 1e-3 and tight_p <= 1e-3 and big_s > 10 and big_p > 10,
           f"min_pocs={rep.min_pocs:.12g} min_pocp={rep.min_pocp:.12g} pocs_1e6_gap={tight_s:.3g} "
           f"pocp_1e-6_gap={tight_p:.3g} pocs_unbounded={big_s:.4g} pocp_unbounded={big_p:.4g}")
    vals = np.array([sym(1.0, a).pocs for a in a_grid]) - 1.0
    flips = np.flatnonzero(np.sign(vals[1:]) != np.sign(vals[:-1]))
    where = float(a_grid[flips[0]] + 0.005) if flips.size else float("nan")
    yield "pocs_crosses_one", flips.size == 1 and 0.6 <= where <= 0.8, f"crossings={flips.size} near_a2={where:.3f}"


def _check_fig4():
    t = run_fig4(parse_config("", **FIG4_DEFAULTS))
    c = {k: np.array(t.column(k), dtype=float) for k in ("p1_me", "p2_me", "p1_de", "p2_de",
                                                         "x1_me", "x2_me", "x1_de", "x2_de")}
    prices = bool(np.all(c["p1_me"] >= c["p1_de"] - 1e-12) and np.all(c["p2_me"] >= c["p2_de"] - 1e-12))
    inner = (c["x1_me"] > 1e-9) & (c["x2_me"] > 1e-9)
    gap = float(np.max(np.abs(c["x1_me"] - c["x2_me"])[inner]))
    both = inner & (c["x1_de"] > 1e-9) & (c["x2_de"] > 1e-9)
    share = float(np.mean((np.abs(c["x1_me"] - c["x2_me"]) <= np.abs(c["x1_de"] - c["x2_de"]) + 1e-12)[both]))
    yield ("fig4_shape", prices and gap <= 1e-6 and share >= 0.9,
           f"rows={len(t)} me_above_de={prices} me_flow_gap={gap:.3g} equalized_share={share:.3f}")


def _check_multiplicity():
    t = run_regions(parse_config("", **REGIONS_DEFAULTS))
    rows = [dict(zip(t.columns, r)) for r in t.rows]
    wit = [r for r in rows if r["a2"] + r["b1"] > 2 and r["n_equilibria"] >= 2]
    worst = 0.0
    for r in wit:
        cross = demand_crossings(r["a2"], r["b1"], r["p1"], r["p2"], 1.0, 1.0)
        for d in r["d_star_list"].split(";"):
            worst = max(worst, min(abs(float(d) - x) for x in cross))
    yield "multiplicity_witness", bool(wit) and worst <= 1e-6, f"witnesses={len(wit)} crossing_gap={worst:.3g}"


def _check_demand_curve(rng, draws):
    bad = 0
    for _ in range(draws):
        while True:
            a2, b1 = rng.uniform(0.0, 3.0, 2)
            p1, p2 = np.sort(rng.uniform(0.0, 0.95, 2))
            if min(abs(1 - a2 * b1), abs(1 - a2), abs(1 - b1), p2 - p1) > 1e-3:
                break
        on, off = switch_on_point(b1, p1, p2), switch_off_point(a2, p1, p2)
        both = lambda d: ((2 - a2 - b1) * d + (a2 - 1) * p2 + (b1 - 1) * p1) / (1 - a2 * b1)
        bad += abs(both(on) - (on - p1)) > 1e-8 * max(1.0, abs(on))
        bad += abs(both(off) - (off - p2)) > 1e-8 * max(1.0, abs(off))
        m = np.array([[1.0, a2], [b1, 1.0]])
        for d in rng.uniform(p1, 1.0, 8):
            if min(abs(d - b) for b in (on, off, p2, 1.0)) < 1e-6:
                continue
            got = total_demand(a2, b1, p1, p2, d, 1.0)
            ref = sorted({round(float(s.x.sum()), 10) for s in solve_lcp_enumerate(LcpInstance(m, [p1 - d, p2 - d]))})
            bad += len(got) != len(ref) or not np.allclose(got, ref, atol=1e-8)
    yield "piecewise_demand", bad == 0, f"draws={draws} mismatches={bad}"


def run_verify(cfg: SweepConfig, instances: int = 1000) -> Table:
    """Randomized oracle checks, the efficiency bounds and the figure shape checks.

    ``instances`` random LCPs are drawn; a fifth as many two-AP markets go
    through the closed-form versus numeric comparison, and half as many
    parameter draws through the demand-curve check.  Raises
    :class:`~interference_pricing.errors.BoundViolated` if any check fails.
    """
    rng = np.random.default_rng(cfg.seed)
    table = Table("verify", ["check", "passed", "detail"], meta=_meta(cfg, instances=instances))
    checks = [
        _check_lcp(rng, instances),
        _check_closed_forms(rng, max(1, instances // 5)),
        _check_spot_values(),
        _check_bounds(),
        _check_fig4(),
        _check_multiplicity(),
        _check_demand_curve(rng, max(1, instances // 2)),
    ]
    for gen in checks:
        for name, ok, detail in gen:
            table.add(check=name, passed=bool(ok), detail=detail)
    failed = [r for r in table.rows if not r[1]]
    if failed:
        raise BoundViolated("; ".join(f"{r[0]}: {r[2]}" for r in failed))
    return table


RUNS = {
    "we": (run_we, {}),
    "me": (run_me, {}),
    "de": (run_de, {}),
    "metrics": (run_metrics, {}),
    "fig4": (run_fig4, FIG4_DEFAULTS),
    "fig5": (run_fig5, FIG5_DEFAULTS),
    "regions": (run_regions, REGIONS_DEFAULTS),
    "fd_curve": (run_fd_curve, {"prices": [0.1, 0.3], "gains": [[1, 0.6], [1.5, 1]]}),
    "verify": (run_verify, {}),
}
