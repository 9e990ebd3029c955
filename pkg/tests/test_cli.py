from __future__ import annotations

from typing import TYPE_CHECKING

import pytest

from mvac import cli
from mvac.exceptions import BlowUpError

from .conftest import TINY_1D

if TYPE_CHECKING:
    from pathlib import Path


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    path = tmp_path / "run.ini"
    path.write_text(TINY_1D, encoding="utf-8")
    return path


def test_every_command_has_a_parser():
    parser = cli.build_parser()
    for name in cli.COMMANDS:
        argv = [name] if name == "selftest" else [name, "-c", "run.ini"]
        if name == "sweep":
            argv += ["--eps", "0.1,0.05"]
        assert parser.parse_args(argv).command == name


def test_sweep_eps_list():
    args = cli.build_parser().parse_args(["sweep", "-c", "x.ini", "--eps", "0.08, 0.04,"])
    assert args.eps == [0.08, 0.04]


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["simulate"],
        ["sweep", "-c", "x.ini", "--eps", "small"],
        ["selftest", "--suite", "nonexistent"],
    ],
)
def test_usage_errors_exit(argv: list[str]):
    with pytest.raises(SystemExit) as info:
        cli.main(argv)
    assert info.value.code == 2


def test_orbit_prints_csv(config_file: Path, capsys: pytest.CaptureFixture[str]):
    assert cli.main(["orbit", "-c", str(config_file)]) == 0
    header = capsys.readouterr().out.splitlines()[0]
    assert header.startswith("orbit_energy,surface_tension")


def test_simulate_honors_out_override(config_file: Path, tmp_path: Path):
    assert cli.main(["simulate", "-c", str(config_file), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "diagnostics.csv").exists()


def test_config_error_exit_code(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    path = tmp_path / "bad.ini"
    path.write_text("eps = 0\n", encoding="utf-8")
    assert cli.main(["verify-geometry", "-c", str(path)]) == cli.EXIT_CONFIG
    assert "run.eps" in capsys.readouterr().err
    assert cli.main(["orbit", "-c", str(tmp_path / "missing.ini")]) == cli.EXIT_CONFIG


def test_numerical_error_exit_code(monkeypatch: pytest.MonkeyPatch, config_file: Path):
    def blow_up(_: object) -> int:
        raise BlowUpError(3, 1.0)

    monkeypatch.setitem(cli.COMMANDS, "simulate", blow_up)
    assert cli.main(["simulate", "-c", str(config_file)]) == cli.EXIT_NUMERICAL


def test_selftest_subset(capsys: pytest.CaptureFixture[str]):
    assert cli.main(["selftest", "--suite", "quasi_potential_bound"]) == 0
    assert "quasi_potential_bound" in capsys.readouterr().out
