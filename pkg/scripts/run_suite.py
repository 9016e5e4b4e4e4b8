"""Run the full verification suite and write PASS/FAIL lines plus a JSON summary."""
import argparse
import json
import sys
from dataclasses import asdict, dataclass

from sl2branch.suite import run_suite


@dataclass
class SuiteConfig:
    q: int = 3
    max_depth: int = 3
    name_filter: str | None = None
    heisenberg_certify: bool = True
    out: str | None = None


def main(cfg: SuiteConfig) -> int:
    results = run_suite(cfg.q, cfg.max_depth, cfg.name_filter, heisenberg_certify=cfg.heisenberg_certify)
    ok = all(r.passed for r in results)
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    if cfg.out:
        summary = {"config": asdict(cfg), "passed": ok,
                   "checks": [{"name": r.name, "passed": r.passed, "seconds": round(r.seconds, 2),
                               "detail": r.detail} for r in results]}
        with open(cfg.out, "w") as fh:
            json.dump(summary, fh, indent=2, default=str)
    return 0 if ok else 1


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--q", type=int, default=3)
    ap.add_argument("--max-depth", type=int, default=3)
    ap.add_argument("--filter", dest="name_filter")
    ap.add_argument("--no-heisenberg-certify", dest="heisenberg_certify", action="store_false")
    ap.add_argument("--out")
    sys.exit(main(SuiteConfig(**vars(ap.parse_args()))))
