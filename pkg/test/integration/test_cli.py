"""Integration tests for the grsreach command line."""

import json
from unittest.mock import patch

import pytest

from grsreach import cli


def run_cli(*argv):
    with patch("sys.argv", ["grsreach", *argv]):
        cli.main()


def test_no_command_exits_2(capsys):
    """Test that a bare invocation prints help."""
    with pytest.raises(SystemExit) as excinfo:
        run_cli()
    assert excinfo.value.code == 2
    assert "usage: grsreach" in capsys.readouterr().out


def test_too_few_samples_exits_2(out_root, capsys):
    """Test that --samples below 8 is a usage error."""
    with pytest.raises(SystemExit) as excinfo:
        run_cli("grs", "--samples", "3")
    assert excinfo.value.code == 2
    assert "at least 8" in capsys.readouterr().err


def test_missing_config_exits_2(out_root, tmp_path, capsys):
    """Test that a missing config names the path."""
    missing = tmp_path / "absent.yaml"
    with pytest.raises(SystemExit) as excinfo:
        run_cli("synth", "--config", str(missing))
    assert excinfo.value.code == 2
    assert str(missing) in capsys.readouterr().out


def test_grs_is_deterministic(tmp_path):
    """Test that two grs runs write identical files."""
    run_cli("grs", "--scenario", "A", "--samples", "16", "--out", str(tmp_path / "one"))
    run_cli("grs", "--scenario", "A", "--samples", "16", "--out", str(tmp_path / "two"))
    first = (tmp_path / "one" / "grs.csv").read_bytes()
    assert first == (tmp_path / "two" / "grs.csv").read_bytes()


def test_synth_writes_under_env_root(out_root, capsys):
    """Test GRSREACH_OUT and a successful run."""
    run_cli("synth", "--scenario", "D", "--angle", "210")
    assert "Final error" in capsys.readouterr().out
    diag = json.loads((out_root / "D" / "angle210" / "diag.json").read_text())
    assert diag['termination'] == 'target_radius'


def test_synth_algorithm2(out_root):
    """Test --variant algorithm2 records gamma."""
    run_cli("synth", "--scenario", "B", "--variant", "algorithm2")
    diag = json.loads((out_root / "B" / "angle30" / "diag.json").read_text())
    assert diag['termination'] == 'horizon_reached'
    assert diag['gamma'] is not None


def test_verify_proxy_passes(capsys):
    """Test the proxy suite from the command line."""
    run_cli("verify", "--suite", "proxy")
    assert "checks passed" in capsys.readouterr().out


def test_verify_negative_tolerance_exits_1(capsys):
    """Test that a negative tolerance scale forces failures."""
    with pytest.raises(SystemExit) as excinfo:
        run_cli("verify", "--suite", "proxy", "--tolerance-scale", "-1")
    assert excinfo.value.code == 1
    assert "✗" in capsys.readouterr().out
