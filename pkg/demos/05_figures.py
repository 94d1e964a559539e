"""Regenerate the figure data as CSV and plot blocks in ./figure_data."""

from pathlib import Path

from interference_pricing.experiments import (
    FIG4_DEFAULTS,
    FIG5_DEFAULTS,
    REGIONS_DEFAULTS,
    emit_csv,
    emit_plotdata,
    parse_config,
    run_fig4,
    run_fig5,
    run_regions,
)

out = Path("figure_data")
out.mkdir(exist_ok=True)
for name, run, defaults in [("fig4", run_fig4, FIG4_DEFAULTS), ("fig5", run_fig5, FIG5_DEFAULTS),
                            ("regions", run_regions, REGIONS_DEFAULTS)]:
    table = run(parse_config("", **defaults))
    emit_csv(table, out / f"{name}.csv")
    emit_plotdata(table, out / f"{name}.dat")
    print(f"{name}: {len(table)} rows -> {out / (name + '.csv')}")
