"""Pairwise intertwining over the q=3 grid (depth-zero data plus positive-depth data up to r_max)."""
import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from sl2branch import branching as br


@dataclass
class GridConfig:
    q: int = 3
    max_r: str = "1"
    max_depth: int = 3
    cap: int = br.DEFAULT_CAP
    out: str | None = None


def main(cfg: GridConfig) -> int:
    data = br.grid_data(cfg.q, Fraction(cfg.max_r))
    rep = br.intertwining_matrix(data, cfg.max_depth, cfg.cap)
    print(f"{len(data)} data, {len(rep.observed)} observed / {len(rep.predicted)} predicted coincidences")
    print(f"exhaustive: {rep.exhaustive}")
    print(f"off-diagonal nonzero entries: {int(np.count_nonzero(rep.matrix - np.diag(np.diag(rep.matrix))))}")
    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump(rep.to_json(), fh, indent=1)
    return 0 if rep.exhaustive else 1


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=int, default=3)
    ap.add_argument("--max-r", default="1")
    ap.add_argument("--max-depth", type=int, default=3)
    ap.add_argument("--cap", type=int, default=br.DEFAULT_CAP)
    ap.add_argument("--out")
    sys.exit(main(GridConfig(**vars(ap.parse_args()))))
