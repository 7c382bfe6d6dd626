"""The command-line workflow, driven from Python for reproducibility.

Generates a synthetic corpus as TU files, validates it, trains a model,
scores the corpus, and dumps embeddings, all through the `gadkit` CLI
entry point.

Run with:  python3 demos/05_cli_workflow.py   (about a minute)
"""

import json
import tempfile
from pathlib import Path

from gadkit.cli import main

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    cfg = {
        "dataset": "synthetic",
        "synth_n_graphs": 60,
        "synth_nodes_lo": 10,
        "synth_nodes_hi": 16,
        "synth_attr_dim": 3,
        "synth_anom_frac": 0.25,
        "epochs": 20,
        "trials": 2,
        "k": 32,
        "K": 4,
        "hidden_dim": 16,
        "seed": 1,
    }
    cfg_path = tmp / "config.json"
    cfg_path.write_text(json.dumps(cfg, indent=2))

    data_dir = tmp / "data"
    steps = [
        ["synth", "--config", str(cfg_path), "--out", str(data_dir)],
        ["parse", "--dataset", str(data_dir)],
        ["train", "--config", str(cfg_path), "--out", str(tmp / "run")],
        [
            "score",
            "--config", str(cfg_path),
            "--model", str(tmp / "run" / "model.ckpt"),
            "--out", str(tmp / "scores.csv"),
        ],
        [
            "dump-embeddings",
            "--config", str(cfg_path),
            "--model", str(tmp / "run" / "model.ckpt"),
            "--out", str(tmp / "embeddings.csv"),
        ],
        ["run", "--config", str(cfg_path), "--out", str(tmp / "experiment")],
    ]
    for argv in steps:
        print(f"\n$ gadkit {' '.join(argv)}")
        code = main(argv)
        assert code == 0, f"exit code {code}"

    print("\nreport.csv:")
    print((tmp / "experiment" / "report.csv").read_text())
