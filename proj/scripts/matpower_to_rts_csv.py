#!/usr/bin/env python3
"""Convert MATPOWER's case_RTS_GMLC.m into RTS-GMLC style bus/branch/gen CSVs.

The public RTS-GMLC release ships SourceData/{bus,branch,gen}.csv. This
script rebuilds the subset of those columns that the ingestion code reads,
starting from the MATPOWER conversion of the same system (distributed with
the `matpower` Python package, data/case_RTS_GMLC.m).

Reconstruction rules (the MATPOWER file carries no fuel column):
  * Fuel/unit type are inferred from the RTS-GMLC unit classes, which are
    uniquely identified by (PMax, PMin) for thermal units and by position in
    the generator table for the zero-cost units.
  * Generator costs are carried through exactly: the piecewise-linear
    MATPOWER cost points (MW, $/h) are written as heat-rate columns with a
    fuel price of 1 $/MMBTU, so HR[BTU/kWh] * price / 1000 reproduces $/MWh.
  * GEN UIDs follow the RTS-GMLC "<bus>_<type>_<n>" pattern with a per-bus
    counter; they may not match the official numbering.

Usage: matpower_to_rts_csv.py case_RTS_GMLC.m OUTDIR
"""
import csv
import re
import sys
from pathlib import Path


def block(text, name):
    m = re.search(r"mpc\." + name + r"\s*=\s*\[(.*?)\];", text, re.S)
    rows = []
    for line in m.group(1).strip().split("\n"):
        line = line.strip().rstrip(";")
        if line:
            rows.append([float(x) for x in line.split()])
    return rows


THERMAL = {
    (20.0, 8.0): ("CT", "Oil"),
    (12.0, 5.0): ("STEAM", "Oil"),
    (76.0, 30.0): ("STEAM", "Coal"),
    (155.0, 62.0): ("STEAM", "Coal"),
    (350.0, 140.0): ("STEAM", "Coal"),
    (355.0, 170.0): ("CC", "NG"),
    (55.0, 22.0): ("CT", "NG"),
    (400.0, 396.0): ("NUCLEAR", "Nuclear"),
}


def classify(index, gen, cost):
    pmax, pmin = gen[8], gen[9]
    if (pmax, pmin) in THERMAL and any(cost[5::2]):
        return THERMAL[(pmax, pmin)]
    if pmax == 0.0:
        return ("SYNC_COND", "Sync_Cond")
    if int(gen[0]) == 212 and pmin > 0:
        return ("CSP", "Solar")
    if int(gen[7]) == 1:
        return ("HYDRO", "Hydro")
    if index == 157:
        return ("STORAGE", "Storage")
    if 153 <= index <= 156:
        return ("WIND", "Wind")
    if index >= 122:
        return ("RTPV", "Solar")
    return ("PV", "Solar")


def fmt(x):
    r = repr(float(x))
    return r[:-2] if r.endswith(".0") else r


def main(src, outdir):
    text = Path(src).read_text()
    buses = block(text, "bus")
    gens = block(text, "gen")
    branches = block(text, "branch")
    costs = block(text, "gencost")
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)

    bus_type = {1: "PQ", 2: "PV", 3: "Ref"}
    with open(out / "bus.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["Bus ID", "Bus Type", "MW Load", "MVAR Load", "BaseKV", "Area"])
        for b in buses:
            w.writerow([int(b[0]), bus_type[int(b[1])], fmt(b[2]), fmt(b[3]), fmt(b[9]), int(b[6])])

    with open(out / "branch.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["UID", "From Bus", "To Bus", "R", "X", "B", "Cont Rating", "Tr Ratio"])
        for k, br in enumerate(branches, start=1):
            w.writerow([f"BR{k:03d}", int(br[0]), int(br[1]), fmt(br[2]), fmt(br[3]),
                        fmt(br[4]), fmt(br[5]), fmt(br[8])])

    counters = {}
    npts = 4
    header = ["GEN UID", "Bus ID", "Unit Type", "Fuel", "PMax MW", "PMin MW",
              "Fuel Price $/MMBTU"]
    header += [f"Output_pct_{k}" for k in range(npts)]
    header += ["HR_avg_0"] + [f"HR_incr_{k}" for k in range(1, npts)]
    with open(out / "gen.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for i, (g, c) in enumerate(zip(gens, costs)):
            unit_type, fuel = classify(i, g, c)
            bus = int(g[0])
            counters[bus] = counters.get(bus, 0) + 1
            uid = f"{bus}_{unit_type}_{counters[bus]}"
            row = [uid, bus, unit_type, fuel, fmt(g[8]), fmt(g[9])]
            n = int(c[3])
            xs, ys = c[4::2][:n], c[5::2][:n]
            if any(ys) and fuel not in ("Solar", "Wind", "Hydro", "Storage", "Sync_Cond"):
                pct = [x / g[8] for x in xs]
                hr = [1000.0 * ys[0] / xs[0]]
                hr += [1000.0 * (ys[k] - ys[k - 1]) / (xs[k] - xs[k - 1]) for k in range(1, n)]
                row += ["1"] + [fmt(p) for p in pct] + [fmt(h) for h in hr]
            else:
                row += [""] * (1 + 2 * npts)
            w.writerow(row)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
