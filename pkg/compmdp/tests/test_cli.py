import io
import json
import shutil
import sys

import pytest
from loguru import logger

from compmdp.cli.deps import configure_logging
from compmdp.io.documents import load_document, parse_mdp
from compmdp.main import main
from compmdp.scripts.fixtures import seed_fixtures


@pytest.fixture(autouse=True)
def drop_log_sinks():
    """The CLI points loguru at the captured stderr; detach it afterwards."""
    yield
    logger.remove()


def _report(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


class TestValidateCommand:
    """Test the validate command."""

    def test_valid_document(self, capsys, fixtures_dir):
        """Test a clean MDP exits 0."""
        assert main(["validate", str(fixtures_dir / "two_cells.json")]) == 0
        assert _report(capsys)["ok"] is True

    def test_broken_mass(self, capsys, fixtures_dir):
        """Test a mass violation exits 1 and names the action."""
        assert main(["validate", str(fixtures_dir / "broken_mass.json")]) == 1
        report = _report(capsys)
        assert report["ok"] is False
        assert report["issues"][0]["code"] == "mass"
        assert "s.go" in report["issues"][0]["message"]

    def test_group_document(self, capsys, fixtures_dir):
        """Test documents without their MDP get an empty report."""
        assert main(["validate", str(fixtures_dir / "swap_group.json")]) == 0


class TestSolveCommand:
    """Test the solve command."""

    def test_self_loop(self, capsys, fixtures_dir):
        """Test the loop value at gamma 0.5."""
        assert main(["solve", str(fixtures_dir / "self_loop.json"), "--gamma", "0.5"]) == 0
        solution = _report(capsys)
        assert solution["kind"] == "solution"
        assert solution["values"]["s"] == pytest.approx(2.0)
        assert solution["policy"] == {"s": "s.loop"}

    def test_output_file(self, tmp_path, fixtures_dir):
        """Test -o writes the document to a file."""
        target = tmp_path / "solution.json"
        assert main(["solve", str(fixtures_dir / "two_cells.json"), "-o", str(target)]) == 0
        assert json.loads(target.read_text())["converged"] is True

    def test_sweep_limit(self, capsys, fixtures_dir):
        """Test hitting the sweep limit exits 1 with the partial solution."""
        assert main(["solve", str(fixtures_dir / "self_loop.json"), "--max-iter", "1"]) == 1
        assert _report(capsys)["converged"] is False

    def test_missing_file(self, capsys, tmp_path):
        """Test an unreadable file exits 1 with a message."""
        assert main(["solve", str(tmp_path / "absent.json")]) == 1
        assert capsys.readouterr().err.count("error:") == 1


class TestComposeCommand:
    """Test the compose command."""

    @pytest.fixture
    def workdir(self, tmp_path, fixtures_dir):
        shutil.copy(fixtures_dir / "two_cells.json", tmp_path / "cells.json")
        shutil.copy(fixtures_dir / "swap_group.json", tmp_path / "swap.json")
        return tmp_path

    def test_quotient_expression(self, capsys, workdir):
        """Test documents next to the expression are bound by name."""
        (workdir / "folded.expr").write_text("quotient(cells by swap)\n")
        assert main(["compose", str(workdir / "folded.expr")]) == 0
        doc = _report(capsys)
        assert doc["states"] == ["{a,b}"]
        assert len(doc["actions"]) == 2

    def test_zigzag_written_as_composite(self, capsys, workdir):
        """Test a diagram is written as its glued MDP."""
        (workdir / "chain.expr").write_text("zigzag(cells -[cells]- cells)\n")
        assert main(["compose", str(workdir / "chain.expr")]) == 0
        assert len(_report(capsys)["states"]) == 2

    def test_syntax_error(self, capsys, workdir):
        """Test a malformed expression reports its position."""
        (workdir / "bad.expr").write_text("product(cells cells)\n")
        assert main(["compose", str(workdir / "bad.expr")]) == 1
        assert "line 1, column 15" in capsys.readouterr().err

    def test_unbound_name(self, capsys, workdir):
        """Test an unknown name exits 1."""
        (workdir / "lost.expr").write_text("product(cells, ghost)\n")
        assert main(["compose", str(workdir / "lost.expr")]) == 1


class TestCheckCommand:
    """Test the check command on built-in and generated inputs."""

    def test_pushforward(self, capsys):
        """Test random cospans pass the pushforward property."""
        assert main(["check", "pushforward", "--trials", "10", "--seed", "3"]) == 0
        report = _report(capsys)
        assert report["verdict"] == "PASS"
        assert report["trials"] == 10

    def test_static_obstacles(self, capsys):
        """Test the default grid forms both squares."""
        assert main(["check", "static-obstacles"]) == 0
        assert _report(capsys)["details"]["states"] == 16

    def test_quotient_default(self, capsys):
        """Test the mirrored grid quotient."""
        assert main(["check", "quotient"]) == 0
        details = _report(capsys)["details"]
        assert details["order"] == 2
        assert details["orbits"] * 2 == details["states"]

    def test_quotient_documents(self, capsys, fixtures_dir):
        """Test the quotient check on an MDP and a group document."""
        args = ["check", "quotient", str(fixtures_dir / "two_cells.json"), str(fixtures_dir / "swap_group.json")]
        assert main(args) == 0
        assert _report(capsys)["details"]["orbits"] == 1

    def test_stitching_default(self, capsys):
        """Test the region diagram passes."""
        assert main(["check", "stitching"]) == 0
        assert _report(capsys)["verdict"] == "PASS"

    def test_theorem3_alias(self, capsys):
        """Test the older name of the stitching check still runs it."""
        assert main(["check", "theorem3"]) == 0
        assert _report(capsys)["verdict"] == "PASS"


class TestDemoCommand:
    """Test the demo command."""

    @pytest.mark.parametrize("world", ["gridworld", "regions", "fetch"])
    def test_demo_passes(self, capsys, world):
        """Test the grid demos pass the stitching check."""
        assert main(["demo", world]) == 0
        assert _report(capsys)["passed"] is True


class TestUsage:
    """Test argument errors."""

    @pytest.mark.parametrize("argv", [[], ["solve"], ["frobnicate"], ["check", "nothing"]])
    def test_usage_errors(self, capsys, argv):
        """Test bad arguments exit 2."""
        assert main(argv) == 2

    def test_help(self, capsys):
        """Test --help exits 0."""
        assert main(["--help"]) == 0
        assert "compose" in capsys.readouterr().out


class TestSeededFixtures:
    """Test the documents written by the fixture seeder."""

    def test_regions_expression_rebuilds_composite(self, capsys, tmp_path):
        """Test composing the seeded zig-zag gives the seeded composite."""
        seed_fixtures(tmp_path)
        capsys.readouterr()
        assert main(["compose", str(tmp_path / "regions.expr")]) == 0
        assert parse_mdp(capsys.readouterr().out) == load_document(tmp_path / "regions_composite.json")

    def test_seeded_quotient(self, capsys, tmp_path):
        """Test the seeded mirror grid and group pass the quotient check."""
        seed_fixtures(tmp_path)
        capsys.readouterr()
        args = ["check", "quotient", str(tmp_path / "mirror_grid.json"), str(tmp_path / "mirror_group.json")]
        assert main(args) == 0


class TestLogging:
    """Test where log records go."""

    def test_sink_follows_replaced_stderr(self, monkeypatch):
        """Test records reach whatever sys.stderr is when they are written."""
        configure_logging()
        buffer = io.StringIO()
        monkeypatch.setattr(sys, "stderr", buffer)
        logger.warning("sink follows stderr")
        assert "sink follows stderr" in buffer.getvalue()
