"""Regenerates data/synthetic_subcatchments.geojson.

Forty sub-catchments on a jittered 8 x 5 grid. Neighbouring polygons share
their jittered vertices, so the mosaic has no gaps. TSS concentrations are
spread across both thresholds of concern (837 and 2204 mg/L) and every
feature carries a posterior standard deviation.
"""

import json
import math
import random
from pathlib import Path

COLS, ROWS = 8, 5
LON0, LAT0 = 145.10, -20.40
STEP = 0.18


def main() -> None:
    rng = random.Random(1996)
    verts = {}
    for r in range(ROWS + 1):
        for c in range(COLS + 1):
            x, y = LON0 + c * STEP, LAT0 + r * STEP
            if 0 < c < COLS and 0 < r < ROWS:
                x += rng.uniform(-0.3, 0.3) * STEP
                y += rng.uniform(-0.3, 0.3) * STEP
            verts[(r, c)] = (round(x, 6), round(y, 6))

    features = []
    for r in range(ROWS):
        for c in range(COLS):
            ring = [verts[(r, c)], verts[(r, c + 1)], verts[(r + 1, c + 1)], verts[(r + 1, c)]]
            ring.append(ring[0])
            # Concentrations rise towards the north-west with multiplicative noise.
            trend = 1.0 + 2.4 * (r / (ROWS - 1)) + 0.8 * (1 - c / (COLS - 1))
            tss = round(560 * trend * math.exp(rng.gauss(0, 0.45)), 1)
            cv = rng.uniform(0.08, 0.65)
            sd = round(tss * cv, 1)
            fid = f"SC{r * COLS + c + 1:02d}"
            features.append({
                "type": "Feature",
                "id": fid,
                "properties": {"id": fid, "TSS": tss, "TSS_sd": sd},
                "geometry": {"type": "Polygon", "coordinates": [[list(p) for p in ring]]},
            })

    out = Path(__file__).resolve().parent.parent / "data" / "synthetic_subcatchments.geojson"
    rows = ",\n".join("  " + json.dumps(f, separators=(",", ":")) for f in features)
    out.write_text('{"type":"FeatureCollection","name":"synthetic_subcatchments","features":[\n'
                   + rows + "\n]}\n")
    tss = sorted(f["properties"]["TSS"] for f in features)
    print(f"wrote {len(features)} features to {out}")
    print("below 837:", sum(v < 837 for v in tss), " 837-2204:", sum(837 <= v < 2204 for v in tss),
          " above:", sum(v >= 2204 for v in tss))


if __name__ == "__main__":
    main()
