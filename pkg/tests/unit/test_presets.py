r"""Unit tests for sweep/experiment presets and option precedence.

These tests exercise the CLI argument parsing layer in `scripts/qvt.py`.
They never simulate anything; they only validate that:

- A selected preset from `configs/presets/` applies default values.
- Precedence is enforced as: base defaults < preset < --config < CLI flags.
- Missing or malformed preset/config files stop parsing with a message.

Run just these tests:
  uv run pytest -q tests/unit/test_presets.py
"""

import sys

import pytest
import yaml


def _run_parse(argv):
    # Import inside to ensure patched sys.argv is picked up by argparse
    import importlib

    sys.argv = ["pytest"] + argv
    mod = importlib.import_module("scripts.qvt")
    return mod.parse_args()


def test_defaults_without_preset(tmp_path):
    args = _run_parse(["sweep", "--out", str(tmp_path)])
    assert args.circuits == 100
    assert args.levels == ["high"]
    assert args.n_list is None


def test_quick_preset_shrinks_sweep(tmp_path):
    """`quick` preset should set a small grid and circuit count."""
    args = _run_parse(["sweep", "--out", str(tmp_path), "--preset", "quick"])
    assert args.n_list == [2, 3, 4]
    assert args.models == ["tq_depolarizing"]
    assert args.circuits == 20


def test_threshold_preset_sets_eps_grid(tmp_path):
    args = _run_parse(["sweep", "--out", str(tmp_path), "--preset", "threshold"])
    assert args.eps_list[0] == pytest.approx(1e-3)
    assert len(args.eps_list) == 8
    assert args.models == ["tq_depolarizing", "semi_realistic"]


def test_preset_applies_to_experiment(tmp_path):
    args = _run_parse(["experiment", "--n", "3", "--preset", "quick"])
    assert args.circuits == 20
    assert args.shots == 20
    assert args.n_b == 200


def test_config_overrides_preset(tmp_path):
    """A YAML `--config` must override values introduced by a preset."""
    cfg_path = tmp_path / "override.yaml"
    cfg_path.write_text(yaml.safe_dump({"circuits": 50, "levels": ["medium"]}))

    args = _run_parse(
        ["sweep", "--out", str(tmp_path), "--preset", "quick", "--config", str(cfg_path)]
    )
    assert args.circuits == 50
    assert args.levels == ["medium"]
    # untouched preset values survive
    assert args.n_list == [2, 3, 4]


def test_cli_overrides_all(tmp_path):
    """Explicit CLI flags must override both preset and `--config` values."""
    cfg_path = tmp_path / "override.yaml"
    cfg_path.write_text(yaml.safe_dump({"circuits": 50}))

    args = _run_parse(
        [
            "sweep",
            "--preset",
            "quick",
            "--config",
            str(cfg_path),
            "--circuits",
            "7",
            "--n-list",
            "5",
        ]
    )
    assert args.circuits == 7
    assert args.n_list == [5]


def test_missing_preset_raises_systemexit():
    with pytest.raises(SystemExit, match="preset file not found"):
        _run_parse(["sweep", "--preset", "does-not-exist"])


def test_config_must_be_a_mapping(tmp_path):
    cfg_path = tmp_path / "list.yaml"
    cfg_path.write_text("- 1\n- 2\n")
    with pytest.raises(SystemExit, match="mapping"):
        _run_parse(["experiment", "--config", str(cfg_path)])


def test_bad_preset_is_exit_code_one():
    import importlib

    mod = importlib.import_module("scripts.qvt")
    assert mod.main(["sweep", "--preset", "does-not-exist"]) == 1
