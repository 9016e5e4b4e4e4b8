"""Certify the branching rows of a depth-2 unramified datum (Heisenberg case) up to depth d."""
import argparse
import sys
from dataclasses import dataclass

from sl2branch import branching as br
from sl2branch.yudata import data_of_depth


@dataclass
class HeisenbergConfig:
    q: int = 3
    index: int = 0
    max_depth: int = 4
    cap: int = br.DEFAULT_CAP


def main(cfg: HeisenbergConfig) -> int:
    datum = data_of_depth("u-eps", cfg.q, "2")[cfg.index]
    print(datum.label)
    t = br.positive_depth_components(datum, cfg.max_depth, cfg.cap, raise_on_failure=False, with_depth=False)
    for c in t.components:
        print(f"  d={c.d} mu={c.mu.to_json()} {c.label} deg={c.degree} {c.status}")
    return 0 if t.all_certified and not t.unverified else 1


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=int, default=3)
    ap.add_argument("--index", type=int, default=0)
    ap.add_argument("--max-depth", type=int, default=4)
    ap.add_argument("--cap", type=int, default=br.DEFAULT_CAP)
    sys.exit(main(HeisenbergConfig(**vars(ap.parse_args()))))
