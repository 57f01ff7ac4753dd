"""Regenerate backflow.json: grid search for the two-mode ratio with the deepest negative current."""

import json
from pathlib import Path

from stsqm.arrival import best_backflow_ratio

K1, K2 = 1.0, 2.0

if __name__ == "__main__":
    ratio, jmin = best_backflow_ratio(K1, K2, lo=0.0, hi=3.0, steps=301)
    doc = {
        "momenta": [K1, K2],
        "coefficients": [1.0, ratio],
        "search": {"lo": 0.0, "hi": 3.0, "steps": 301, "phases": 720},
        "normalized_min_current": jmin,
        "x_grid": {"n": 64, "length_over_pi": 8.0},
    }
    out = Path(__file__).with_name("backflow.json")
    out.write_text(json.dumps(doc, indent=2) + "\n")
    print(out, doc)
