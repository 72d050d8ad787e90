//! Standalone matplotlib script for a sweep CSV.

use std::path::Path;

/// Python source that plots mean secrecy rate with one-sigma error bars,
/// one curve per case, reading `csv_path` at run time.
pub fn plot_script(csv_path: &Path) -> String {
    let csv = csv_path
        .display()
        .to_string()
        .replace('\\', "\\\\")
        .replace('"', "\\\"");
    format!(
        r#"#!/usr/bin/env python3
import csv
import sys

import matplotlib.pyplot as plt

CSV_PATH = "{csv}"
LABELS = {{
    "no_ris": "without RIS",
    "eavesdrop_only": "eavesdropping",
    "eavesdrop_jam": "eavesdropping and jamming",
}}

curves = {{}}
var = None
with open(CSV_PATH, newline="") as f:
    for row in csv.DictReader(f):
        var = row["sweep_var"]
        xs, ys, es = curves.setdefault(row["case"], ([], [], []))
        xs.append(float(row["sweep_value"]))
        ys.append(float(row["mean_rate_bps_hz"]))
        es.append(float(row["std_rate"]))

fig, ax = plt.subplots()
for case, (xs, ys, es) in curves.items():
    ax.errorbar(xs, ys, yerr=es, marker="o", capsize=3, label=LABELS.get(case, case))
ax.set_xlabel("number of RIS elements N" if var == "N" else "RIS position y (m)")
ax.set_ylabel("secrecy rate (bits/s/Hz)")
ax.grid(True)
ax.legend()
out = sys.argv[1] if len(sys.argv) > 1 else CSV_PATH.rsplit(".", 1)[0] + ".png"
fig.savefig(out, dpi=150, bbox_inches="tight")
print(out)
"#
    )
}
