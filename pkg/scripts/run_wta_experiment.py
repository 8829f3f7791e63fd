"""Run the randomized weapon-target-assignment experiment and export CSV/JSON.

Usage: python scripts/run_wta_experiment.py [out_dir] [master_seed]
"""
import sys
from pathlib import Path

from resgames import ExperimentConfig, export_result, run_experiment


def main():
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("experiment_out")
    seed = int(sys.argv[2]) if len(sys.argv) > 2 else 1
    cfg = ExperimentConfig(master_seed=seed)
    res = run_experiment(cfg)
    paths = export_result(res, "both", out_dir)
    for s in res.summary:
        if s.round in (1, cfg.rounds):
            print(f"{s.design:16s} round {s.round}: min={s.min:.4f} median={s.median:.4f} max={s.max:.4f}")
    print("wrote:", ", ".join(str(p) for p in paths))


if __name__ == "__main__":
    main()
