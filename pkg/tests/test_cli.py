"""Test the CLI functionality in the __main__ module."""

import json
from pathlib import Path
from typing import Any
from unittest.mock import patch

import pytest

from conduche.__main__ import EXIT_INPUT_ERROR, EXIT_OK, EXIT_PROPERTY_FAILED, main
from conduche.bundle import load_bundle

from .samples import V_CATEGORY


def run(capsys: pytest.CaptureFixture[str], *argv: str) -> tuple[int, dict[str, Any]]:
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else {}


def test_cli_help() -> None:
    """Test that the CLI can display help."""
    with pytest.raises(SystemExit) as excinfo:
        main(["--help"])
    assert excinfo.value.code == 0


def test_cli_missing_command() -> None:
    """Test that the CLI errors when no command is given."""
    with patch("conduche._internal.console.console.error") as mock_error:
        result = main([])
        assert result == EXIT_INPUT_ERROR
        mock_error.assert_called_once()


def test_validate_o2(capsys) -> None:
    code, payload = run(capsys, "validate", "--fibration", "catalog:o2", "--depth", "2")

    assert code == EXIT_OK
    assert payload["command"] == "validate"
    assert payload["config"]["depth"] == 2
    assert payload["flags"]["dcf"] is True
    assert "timestamp" in payload


def test_validate_two_graph(capsys) -> None:
    code, payload = run(capsys, "validate", "--fibration", "catalog:two_graph", "--depth", "1")

    assert code == EXIT_OK
    assert payload["flags"]["dcf"] is True


def test_validate_broken_two_graph(capsys) -> None:
    code, payload = run(capsys, "validate", "--fibration", "catalog:broken_two_graph", "--depth", "1")

    assert code == EXIT_PROPERTY_FAILED
    assert payload["flags"]["dcf"] is not True


def test_validate_category_that_is_not_ore(capsys, tmp_path: Path) -> None:
    path = tmp_path / "v.json"
    path.write_text(json.dumps({"category": V_CATEGORY}))

    code, payload = run(capsys, "validate", "--category", str(path))
    assert code == EXIT_PROPERTY_FAILED
    ore = next(check for check in payload["checks"] if check["name"] == "right_ore")
    assert ore["passed"] is False


def test_fiber(capsys) -> None:
    code, payload = run(capsys, "fiber", "--fibration", "catalog:o2", "--object", "v", "--base", "2")

    assert code == EXIT_OK
    assert payload["lifts"] == ["e1.e1", "e1.e2", "e2.e1", "e2.e2"]


def test_paths_evaluates_a_named_oracle(capsys) -> None:
    code, payload = run(capsys, "paths", "--fibration", "catalog:o2", "--oracle", "constant", "--eval", "3")

    assert code == EXIT_OK
    assert payload["values"] == {"3": "e1.e1.e1"}


def test_paths_reports_periodicity(capsys) -> None:
    code, payload = run(
        capsys, "paths", "--fibration", "catalog:o2", "--oracle", "periodic", "--aperiodicity", "--depth", "3"
    )

    assert code == EXIT_OK
    assert payload["aperiodicity"]["witness"] is not None
    assert payload["aperiodicity"]["depth"] == 3


def test_paths_enumerate_needs_a_target(capsys) -> None:
    with patch("conduche._internal.console.console.error") as mock_error:
        assert main(["paths", "--fibration", "catalog:z3", "--enumerate"]) == EXIT_INPUT_ERROR
        mock_error.assert_called_once()


def test_cylinder_intersection(capsys) -> None:
    code, payload = run(capsys, "cylinder", "--fibration", "catalog:o2", "--intersect", "e1", "e1.e2")

    assert code == EXIT_OK
    assert payload["cells"] == ["e1.e2"]


def test_cylinder_partition(capsys) -> None:
    code, payload = run(capsys, "cylinder", "--fibration", "catalog:o2", "--partition", "v", "1")

    assert code == EXIT_OK
    assert payload["cells"] == ["Z(e1)", "Z(e2)"]


def test_germ_product(capsys) -> None:
    code, payload = run(capsys, "germ", "--fibration", "catalog:o2", "--product", "Z(e1,v) Z(v,e1)")

    assert code == EXIT_OK
    assert payload["result"] == ["Z(e1,e1)"]


def test_germ_inclusion(capsys) -> None:
    code, payload = run(capsys, "germ", "--fibration", "catalog:o2", "--inclusion", "Z(e1.e2,e1.e2) Z(e1,e1)")

    assert code == EXIT_OK
    assert payload["inclusion"] == "subset"


def test_germ_needs_two_cells() -> None:
    with patch("conduche._internal.console.console.error") as mock_error:
        assert main(["germ", "--fibration", "catalog:o2", "--product", "Z(e1,v)"]) == EXIT_INPUT_ERROR
        mock_error.assert_called_once()


def test_algebra_compares_expressions(capsys) -> None:
    code, payload = run(
        capsys, "algebra", "--fibration", "catalog:o2", "--expr", "s(e1)^'*s(e1)", "--equal", "p(v)", "--upsilon"
    )

    assert code == EXIT_OK
    assert payload["equal"] == "equal"
    assert payload["text"] == "s(v)"
    assert "upsilon" in payload


@pytest.mark.parametrize("argv", [["--fibration", "catalog:s3", "--regular"], ["--fibration", "catalog:z3", "--paths"]])
def test_rep_check(capsys, argv: list[str]) -> None:
    code, payload = run(capsys, "rep-check", *argv)

    assert code == EXIT_OK
    assert payload["exact"] is True
    assert len(payload["checks"]) == 6


def test_rep_check_regular_needs_a_group() -> None:
    with patch("conduche._internal.console.console.error") as mock_error:
        assert main(["rep-check", "--fibration", "catalog:o2", "--regular"]) == EXIT_INPUT_ERROR
        mock_error.assert_called_once()


def test_missing_file(tmp_path: Path) -> None:
    with patch("conduche._internal.console.console.error") as mock_error:
        result = main(["validate", "--fibration", str(tmp_path / "absent.json")])
        assert result == EXIT_INPUT_ERROR
        mock_error.assert_called_once()


def test_examples_list(capsys) -> None:
    code, payload = run(capsys, "examples", "--list")

    assert code == EXIT_OK
    assert "o2" in [entry["name"] for entry in payload["examples"]]


def test_examples_export_round_trips(tmp_path: Path) -> None:
    path = tmp_path / "o2.json"

    with patch("conduche._internal.console.console.success") as mock_success:
        assert main(["examples", "--export", "o2", "--output", str(path)]) == EXIT_OK
        mock_success.assert_called_once()
    assert load_bundle(path).fibration.domain.format(load_bundle(path).oracle("constant")((2,))) == "e1.e1"


def test_text_format_renders_a_table() -> None:
    with patch("conduche._internal.console.console.table") as mock_table:
        assert main(["validate", "--fibration", "catalog:z2", "--format", "text"]) == EXIT_OK
        mock_table.assert_called_once()


def test_output_file(capsys, tmp_path: Path) -> None:
    path = tmp_path / "report.json"

    assert main(["fiber", "--fibration", "catalog:o2", "--object", "v", "--base", "1", "--output", str(path)]) == EXIT_OK
    assert capsys.readouterr().out == ""
    assert json.loads(path.read_text())["lifts"] == ["e1", "e2"]


def test_text_format_boxes_failed_checks(tmp_path: Path) -> None:
    path = tmp_path / "v.json"
    path.write_text(json.dumps({"category": V_CATEGORY}))

    with patch("conduche._internal.console.console.box") as mock_box:
        assert main(["validate", "--category", str(path), "--format", "text"]) == EXIT_PROPERTY_FAILED
    assert "right_ore" in [call.args[0] for call in mock_box.call_args_list]
