# services/kantorovich/commands/plot_script.py
"""
Prints a matplotlib script for a CSV report. The lab itself has no plotting
dependency; the script is meant to be saved and run where matplotlib exists.
"""
from typing import Dict

from core.catalog import Catalog
from schemas.run_config import RunConfig

NAME = "plot-script"
HELP = "print a matplotlib script that plots a CSV report"
DEFAULTS: Dict[str, str] = {"csv": "reports/converge.csv", "xcol": "n", "ycol": "sup_error", "group": "function"}

TEMPLATE = '''\
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

series = defaultdict(list)
with open({csv!r}, newline="", encoding="utf-8") as fh:
    for row in csv.DictReader(fh):
        if row.get({ycol!r}, "") in ("", "None"):
            continue
        series[row.get({group!r}, "")].append((float(row[{xcol!r}]), float(row[{ycol!r}])))

fig, ax = plt.subplots()
for label, points in sorted(series.items()):
    points.sort()
    ax.plot([p[0] for p in points], [p[1] for p in points], marker="o", label=label or None)
ax.set_xscale({xscale!r})
ax.set_yscale({yscale!r})
ax.set_xlabel({xcol!r})
ax.set_ylabel({ycol!r})
if len(series) > 1:
    ax.legend()
fig.tight_layout()
plt.show()
'''


def add_arguments(parser) -> None:
    parser.add_argument("--csv", default=None, help="CSV report to plot")
    parser.add_argument("--xcol", default=None)
    parser.add_argument("--ycol", default=None)
    parser.add_argument("--group", default=None, help="column that splits the series")
    parser.add_argument("--linear", action="store_const", const="true", default=None, help="linear axes")


def run(config: RunConfig, catalog: Catalog) -> str:
    scale = "linear" if config.option("linear") == "true" else "log"
    return TEMPLATE.format(
        csv=config.option("csv", DEFAULTS["csv"]),
        xcol=config.option("xcol", DEFAULTS["xcol"]),
        ycol=config.option("ycol", DEFAULTS["ycol"]),
        group=config.option("group", DEFAULTS["group"]),
        xscale=scale,
        yscale=scale,
    )
