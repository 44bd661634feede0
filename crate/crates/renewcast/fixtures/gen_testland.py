"""Regenerates the synthetic Testland panel, schema and overrides."""
import json
import math
import random

rng = random.Random(7)
rows = []
k = 0
for year in range(2010, 2022):
    for month in range(1, 13):
        gdp = 100.0 * 1.0025 ** k * (1 + 0.004 * math.sin(k / 6.0))
        lcoe = 120.0 - 0.45 * k + rng.gauss(0, 0.8)
        pop = 5.0 + 0.002 * k
        grid = "regulated" if (year, month) < (2015, 7) else "liberalized"
        cap = ""
        if month == 12:
            t = year - 2010
            cap = "%.3f" % (50.0 + 3.0 * t ** 1.3 + rng.gauss(0, 0.5))
        rows.append(("%04d-%02d" % (year, month), "%.4f" % gdp, "%.3f" % lcoe, "%.4f" % pop, grid, cap))
        k += 1

with open("testland.csv", "w") as f:
    f.write("month,GDP,LCOE,POP,GRID,RNCAP\n")
    for r in rows:
        f.write(",".join(r) + "\n")

with open("testland_overrides.csv", "w") as f:
    f.write("month,LCOE\n")
    for year in range(2022, 2031):
        for month in range(1, 13):
            f.write("%04d-%02d,%.3f\n" % (year, month, max(45.0, 120.0 - 0.45 * k)))
            k += 1

schema = {
    "determinants": [
        {"id": "GDP", "kind": "numeric", "projection": "historical_growth", "unit": "index"},
        {"id": "LCOE", "kind": "numeric", "projection": "official_series", "unit": "USD/MWh"},
        {"id": "POP", "kind": "numeric", "projection": "hold_constant", "unit": "million"},
        {"id": "GRID", "kind": "categorical", "projection": "hold_constant", "categories": ["regulated", "liberalized"]},
    ]
}
with open("testland_schema.json", "w") as f:
    json.dump(schema, f, indent=2)
    f.write("\n")
