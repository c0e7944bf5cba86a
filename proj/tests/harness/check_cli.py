"""Drives the pnn binary end to end: exit codes, emitted files, and every
report validated against schemas/report.schema.json."""
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

PNN, ROOT = sys.argv[1], pathlib.Path(sys.argv[2])
SCHEMA = json.loads((ROOT / "schemas" / "report.schema.json").read_text())
VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)

BASE = """task: vowel
method: {method}
seed: 1
depth: 2
vowel: {{dim: 12, n_train: 120, n_test: 60}}
embed: {{mode: append}}
backend: {{kind: acoustic, seed: 100, weight_scale: 0.5, output_dim: 12}}
training: {{theta: 10.0, lr: 0.01, epochs: 3, n_inter: 10, batch_size: 0}}
bp: {{epochs: 2, lr: 0.003, batch_size: 32, surrogate: {{epochs: 10, n_pairs: 100}}}}
perturbation: {{epochs_pre: 2, epochs_post: 3, sigmas: [0.5]}}
"""

failures = []


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def pnn(*args):
    return subprocess.run([PNN, *args], capture_output=True, text=True, timeout=600)


def validate(path, what):
    try:
        VALIDATOR.validate(json.loads(path.read_text()))
        check(True, what + " validates")
    except (jsonschema.ValidationError, OSError, ValueError) as e:
        check(False, f"{what} validates: {e}")


with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    for method in ["mfff", "ideal-bp", "in-silico", "pa-bp", "perturb-recover"]:
        cfg = tmp / f"{method}.yaml"
        cfg.write_text(BASE.format(method=method))
        out = tmp / method
        r = pnn("train", "--config", str(cfg), "--out", str(out))
        check(r.returncode == 0, f"train {method} exits 0 ({r.stderr.strip()})")
        validate(out / "report.json", f"{method} report")
        check((out / "curves.csv").read_text().startswith("epoch,split,accuracy,loss\n"), f"{method} curves.csv header")
        check((out / "confusion.csv").read_text().startswith("split,true,pred,count\n"), f"{method} confusion.csv header")

    r = pnn("eval", "--config", str(tmp / "mfff.yaml"), "--out", str(tmp / "mfff"),
            "--checkpoint", str(tmp / "mfff" / "checkpoint.pnn"))
    check(r.returncode == 0, "eval exits 0")
    validate(tmp / "mfff" / "eval.json", "eval report")

    r = pnn("perturb-recover", "--config", str(tmp / "mfff.yaml"), "--out", str(tmp / "pr"), "--seed", "5")
    check(r.returncode == 0, "perturb-recover subcommand exits 0")
    report = json.loads((tmp / "pr" / "report.json").read_text())
    check(report["seed"] == 5 and len(report["traces"]) == 2, "perturb-recover honours --seed and traces both arms")

    bad = tmp / "bad.yaml"
    bad.write_text(BASE.format(method="mfff").replace("depth: 2", "depth: 0"))
    r = pnn("train", "--config", str(bad))
    check(r.returncode == 1 and "depth" in r.stderr and "bad.yaml:4" in r.stderr,
          f"depth 0 exits 1 naming line and field ({r.stderr.strip()})")

    unknown = tmp / "unknown.yaml"
    unknown.write_text(BASE.format(method="mfff") + "learning_rate: 3\n")
    r = pnn("train", "--config", str(unknown))
    check(r.returncode == 1 and "learning_rate" in r.stderr, "unknown key exits 1")

    r = pnn("train", "--config", str(tmp / "missing.yaml"))
    check(r.returncode == 1, "missing config exits 1")
    r = pnn("train", "--bogus-flag")
    check(r.returncode == 1, "bad command line exits 1")
    r = pnn("diagnose", "--config", str(tmp / "mfff.yaml"), "--out", str(tmp / "diag"))
    check(r.returncode == 1 and "microwave" in r.stderr, "diagnose on acoustic exits 1")

    # Nothing listens on port 1: connection failure is a runtime abort.
    r = pnn("train", "--config", str(tmp / "mfff.yaml"), "--out", str(tmp / "remote"),
            "--backend", "remote:127.0.0.1:1,127.0.0.1:1")
    check(r.returncode == 2, f"unreachable remote exits 2 ({r.stderr.strip()})")

sys.exit(1 if failures else 0)
