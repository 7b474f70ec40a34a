"""Fixtures: a tiny checkpoint and dataset built through the command-line tool."""

import os
import shutil
import subprocess

import pytest

TINY_CONFIG = """
[synthetic]
songs_per_class = 4
seed = 3
accompaniment_rate = 0.5

[dataset]
window = 0
holdout_songs = 4
seed = 7
threshold = 0.75

[model]
layers = 1
heads = 2
hidden = 16
feed_forward = 32
attribute_embedding = [8, 8, 4, 2, 16, 8, 8]
label_embedding = 4
learning_rate = 0.001

[train]
batch_size = 4
max_steps = 20
window = 5
seed = 1
"""


def _cli():
    path = os.environ.get("MOTIFREP_CLI") or shutil.which("motifrep")
    if not path:
        pytest.skip("motifrep command-line tool not available")
    return path


@pytest.fixture(scope="session")
def trained(tmp_path_factory):
    cli = _cli()
    root = tmp_path_factory.mktemp("tiny")
    config = root / "tiny.toml"
    config.write_text(TINY_CONFIG)
    steps = [
        ["synth", "-c", config, "-o", root / "midi"],
        ["ingest", root / "midi", "-o", root / "motifs.jsonl"],
        ["build-dataset", root / "motifs.jsonl", "-c", config, "-o", root / "data"],
        ["train", root / "data", "-c", config, "-o", root / "model.ckpt"],
    ]
    for args in steps:
        subprocess.run([cli, *map(str, args)], check=True, capture_output=True)
    return {"checkpoint": root / "model.ckpt", "dataset": root / "data"}
