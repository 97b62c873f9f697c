"""Run a configurable batch of seeded CLI campaigns and collect their reports.

    python scripts/run_campaigns.py --out reports/ --samples 2000 --seed 7

Each campaign writes ``<out>/<name>.json`` and a one-line summary goes to
stdout.  The exit code is the worst exit code of the batch.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ghx.cli import main


@dataclass
class Campaign:
    name: str
    argv: list


@dataclass
class CampaignConfig:
    out: Path = Path("reports")
    seed: int = 7
    samples: int = 1000
    torus_samples: int = 10
    random_metric: bool = True
    only: list = field(default_factory=list)

    def campaigns(self) -> list:
        common = ["--seed", str(self.seed)] + (["--random-metric"] if self.random_metric else [])
        s = str(self.samples)
        batch = [
            Campaign("garding_n4_m3", ["garding", "--random", "--n", "4", "--m", "3", "--samples", s]),
            Campaign("garding_n5_m5_proportional",
                     ["garding", "--random", "--proportional", "--n", "5", "--m", "5", "--samples", s]),
            Campaign("hodge_n4_m3", ["hodge", "--random", "--n", "4", "--m", "3", "--samples", s]),
            Campaign("hodge_n3_m3_classical",
                     ["hodge", "--random", "--classical", "--n", "3", "--m", "3", "--samples", s]),
            Campaign("logconcavity_n4", ["logconcavity", "--random", "--n", "4", "--samples", s]),
            Campaign("torus_n2", ["torus", "--random", "--n", "2", "--samples", str(self.torus_samples)]),
            Campaign("torus_n3_m3", ["torus", "--random", "--n", "3", "--m", "3",
                                     "--samples", str(self.torus_samples)]),
        ]
        for c in batch:
            c.argv += common
        return [c for c in batch if not self.only or c.name in self.only]


def run(cfg: CampaignConfig) -> int:
    cfg.out.mkdir(parents=True, exist_ok=True)
    worst = 0
    for c in cfg.campaigns():
        path = cfg.out / f"{c.name}.json"
        start = time.perf_counter()
        with contextlib.redirect_stdout(io.StringIO()):
            code = main(c.argv + ["--json-out", str(path)])
        elapsed = time.perf_counter() - start
        worst = max(worst, code)
        res = json.loads(path.read_text()).get("result", {}) if path.exists() else {}
        print(f"{c.name:32s} exit {code}  samples {res.get('samples', '-'):>6}  "
              f"violations {res.get('violations', '-'):>4}  {elapsed:7.1f}s")
    (cfg.out / "config.json").write_text(json.dumps(asdict(cfg), default=str, indent=2) + "\n")
    return worst


def parse_args(argv=None) -> CampaignConfig:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    d = CampaignConfig()
    p.add_argument("--out", type=Path, default=d.out)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--samples", type=int, default=d.samples)
    p.add_argument("--torus-samples", type=int, default=d.torus_samples)
    p.add_argument("--identity-metric", action="store_true")
    p.add_argument("--only", nargs="*", default=[])
    a = p.parse_args(argv)
    return CampaignConfig(a.out, a.seed, a.samples, a.torus_samples, not a.identity_metric, a.only)


if __name__ == "__main__":
    raise SystemExit(run(parse_args()))
