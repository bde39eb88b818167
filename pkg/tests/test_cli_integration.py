"""Integration tests for the pycoherence command line."""

from csv import reader
from inspect import stack
from json import loads
from logging import NullHandler, getLogger
from os.path import dirname, join
from typing import Any

from pytest import approx

from pycoherence.cli import EXIT_OK, EXIT_SOLVER, EXIT_STATE, EXIT_USAGE, EXIT_VERIFY, main
from pycoherence.errors import NotAStateError

_logger = getLogger(__name__)
_logger.addHandler(NullHandler())

_DATA = join(dirname(__file__), "data")


def _read_report(path: Any) -> tuple[list[dict[str, str]], dict[str, Any], str]:
    """Rows as dicts, the manifest and the CSV body text."""
    with open(path, "r", encoding="utf8") as file_ptr:
        text = file_ptr.read()
    lines = text.splitlines()
    assert lines[-1].startswith("# ")
    rows = list(reader(lines[:-1]))
    return [dict(zip(rows[0], row)) for row in rows[1:]], loads(lines[-1][2:]), "\n".join(lines[:-1])


def _measure(capsys, *argv: str) -> tuple[int, dict[str, Any] | None]:
    code = main(["measure", *argv])
    lines = capsys.readouterr().out.splitlines()
    return code, loads(lines[0]) if lines else None


def test_measure_p0(capsys) -> None:
    """C_l1 of the maximally coherent qutrit is 2."""
    _logger.debug(stack()[0][3])
    code, report = _measure(capsys, join(_DATA, "maximally_coherent_3.json"), "--measure", "l1")
    assert code == EXIT_OK
    assert report is not None
    assert report["measure"] == "l1"
    assert report["value"] == approx(2.0)


def test_measure_p1(capsys) -> None:
    """An incoherent state has zero numeric trace distance coherence."""
    _logger.debug(stack()[0][3])
    code, report = _measure(capsys, join(_DATA, "diagonal_state.json"), "--measure", "trace_dist_numeric")
    assert code == EXIT_OK
    assert report is not None
    assert report["value"] == approx(0.0, abs=1e-12)


def test_measure_p2(capsys) -> None:
    """Closed form for the family state fixture, with its argmin."""
    _logger.debug(stack()[0][3])
    code, report = _measure(capsys, join(_DATA, "family_state.json"), "--measure", "trace_dist_closed")
    assert code == EXIT_OK
    assert report is not None
    assert report["value"] == approx(0.4)
    assert report["argmin"]["p"] == approx([0.5, 0.3, 0.2])


def test_measure_p3(capsys) -> None:
    """The manifest follows the report."""
    _logger.debug(stack()[0][3])
    assert main(["measure", join(_DATA, "family_state.json"), "--measure", "rel_entropy", "--seed", "3"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    manifest = loads(lines[1][2:])
    assert manifest["command"] == "measure"
    assert manifest["seed"] == 3
    assert manifest["parameters"]["measure"] == "rel_entropy"


def test_measure_n0(capsys) -> None:
    """A family state that is not positive semidefinite is an invalid state."""
    _logger.debug(stack()[0][3])
    code, report = _measure(capsys, join(_DATA, "not_a_state.json"), "--measure", "l1")
    assert code == EXIT_STATE
    assert report is None


def test_measure_n1(capsys) -> None:
    """Malformed JSON and missing files are parse errors."""
    _logger.debug(stack()[0][3])
    assert _measure(capsys, join(_DATA, "malformed.json"), "--measure", "l1")[0] == EXIT_USAGE
    assert _measure(capsys, join(_DATA, "does_not_exist.json"), "--measure", "l1")[0] == EXIT_USAGE


def test_measure_n2(capsys) -> None:
    """One iteration per restart cannot stabilise."""
    _logger.debug(stack()[0][3])
    argv = (join(_DATA, "maximally_coherent_3.json"), "--measure", "trace_dist_numeric", "--max-iters", "1")
    assert _measure(capsys, *argv)[0] == EXIT_SOLVER


def test_measure_n3(capsys) -> None:
    """An unknown measure is a usage error."""
    _logger.debug(stack()[0][3])
    assert _measure(capsys, join(_DATA, "family_state.json"), "--measure", "fidelity")[0] == EXIT_USAGE


def test_verify_theorem2_p0(tmp_path) -> None:
    """A single qubit trial matches the qubit closed form."""
    _logger.debug(stack()[0][3])
    out = tmp_path / "qubit.csv"
    assert main(["verify-theorem2", "--d-min", "2", "--d-max", "2", "--trials", "1", "--seed", "0", "--out", str(out)]) == EXIT_OK
    rows, manifest, _ = _read_report(out)
    assert len(rows) == 1
    assert float(rows[0]["numeric"]) == approx(2 * abs(float(rows[0]["a"])), abs=1e-6)
    assert rows[0]["status"] == "ok"
    assert manifest["command"] == "verify-theorem2"
    assert manifest["parameters"]["trials"] == 1


def test_verify_theorem2_p1(tmp_path) -> None:
    """Every dimension from 2 to 8, gaps within 1e-6 and one row per trial."""
    _logger.debug(stack()[0][3])
    out = tmp_path / "theorem2.csv"
    argv = ["verify-theorem2", "--d-min", "2", "--d-max", "8", "--trials", "3", "--seed", "1", "--restarts", "2", "--out", str(out)]
    assert main(argv) == EXIT_OK
    rows, _, _ = _read_report(out)
    assert len(rows) == 21
    assert [int(row["d"]) for row in rows] == [d for d in range(2, 9) for _ in range(3)]
    assert max(float(row["abs_gap"]) for row in rows) <= 1e-6


def test_verify_theorem2_p2(tmp_path) -> None:
    """Identical flags give byte identical CSV bodies, whatever the thread count."""
    _logger.debug(stack()[0][3])
    bodies = []
    for index, threads in enumerate(("1", "1", "3")):
        out = tmp_path / f"run_{index}.csv"
        argv = ["verify-theorem2", "--d-min", "3", "--d-max", "4", "--trials", "2", "--seed", "5", "--restarts", "1"]
        assert main([*argv, "--threads", threads, "--out", str(out)]) == EXIT_OK
        bodies.append(_read_report(out)[2])
    assert bodies[0] == bodies[1] == bodies[2]


def test_verify_theorem2_n0() -> None:
    """Zero trials is a usage error."""
    _logger.debug(stack()[0][3])
    assert main(["verify-theorem2", "--trials", "0"]) == EXIT_USAGE


def test_verify_theorem2_n1() -> None:
    """d_max below d_min and d_max above 8 are usage errors."""
    _logger.debug(stack()[0][3])
    assert main(["verify-theorem2", "--d-min", "5", "--d-max", "3"]) == EXIT_USAGE
    assert main(["verify-theorem2", "--d-min", "2", "--d-max", "9"]) == EXIT_USAGE


def test_verify_monotonicity_p0(tmp_path) -> None:
    """The chain holds for every trial. At d = 2 it collapses to equality of the bounds."""
    _logger.debug(stack()[0][3])
    out = tmp_path / "c2b.csv"
    argv = ["verify-monotonicity", "--d-min", "2", "--d-max", "8", "--trials", "30", "--seed", "7", "--out", str(out)]
    assert main(argv) == EXIT_OK
    rows, manifest, _ = _read_report(out)
    assert len(rows) == 210
    assert all(row["holds"] == "true" for row in rows)
    for row in rows:
        assert float(row["avg"]) <= float(row["d_abs_a"]) + 1e-9
        d = int(row["d"])
        assert -(-d // 2) <= int(row["n_kraus"]) <= -(-d // 2) + 2
        if d == 2:
            assert float(row["d_abs_a"]) == approx(float(row["ctr"]))
    assert manifest["parameters"]["n_kraus"] == "auto"


def test_verify_monotonicity_p1(tmp_path) -> None:
    """A fixed operator count is honoured."""
    _logger.debug(stack()[0][3])
    out = tmp_path / "fixed.csv"
    argv = ["verify-monotonicity", "--d-min", "4", "--d-max", "4", "--trials", "5", "--n-kraus", "3", "--out", str(out)]
    assert main(argv) == EXIT_OK
    rows, _, _ = _read_report(out)
    assert {row["n_kraus"] for row in rows} == {"3"}


def test_verify_monotonicity_n0(tmp_path) -> None:
    """One 2 x 3 operator cannot host three columns. Failed trials are recorded."""
    _logger.debug(stack()[0][3])
    out = tmp_path / "too_few.csv"
    argv = ["verify-monotonicity", "--d-min", "3", "--d-max", "3", "--trials", "2", "--n-kraus", "1", "--out", str(out)]
    assert main(argv) == EXIT_VERIFY
    rows, _, _ = _read_report(out)
    assert [row["status"] for row in rows] == ["GenerationError", "GenerationError"]


def test_verify_monotonicity_n1() -> None:
    """The operator count policy must be 'auto' or a positive integer."""
    _logger.debug(stack()[0][3])
    assert main(["verify-monotonicity", "--n-kraus", "many"]) == EXIT_USAGE


def test_verify_monotonicity_p2(tmp_path) -> None:
    """Three row operators are explored numerically and never fail the run."""
    _logger.debug(stack()[0][3])
    out = tmp_path / "c2b_three.csv"
    argv = ["verify-monotonicity", "--d-min", "3", "--d-max", "4", "--trials", "3", "--seed", "2", "--out-dim", "3", "--restarts", "1"]
    assert main([*argv, "--out", str(out)]) == EXIT_OK
    rows, manifest, _ = _read_report(out)
    assert len(rows) == 6
    assert {row["status"] for row in rows} == {"exploratory"}
    for row in rows:
        assert float(row["avg"]) >= -1e-12
        assert float(row["d_abs_a"]) == approx(int(row["d"]) * abs(float(row["a"])))
        assert -(-int(row["d"]) // 3) <= int(row["n_kraus"]) <= -(-int(row["d"]) // 3) + 2
    assert manifest["parameters"]["out_dim"] == 3


def test_verify_monotonicity_n2(tmp_path, monkeypatch) -> None:
    """A trial that raises an invalid state error is a failed row, not a usage error."""
    _logger.debug(stack()[0][3])

    def not_a_state(*_: Any) -> None:
        raise NotAStateError(-1e-3, 1e-10)

    monkeypatch.setattr("pycoherence.cli.check_c2b_family", not_a_state)
    out = tmp_path / "not_a_state.csv"
    argv = ["verify-monotonicity", "--d-min", "2", "--d-max", "3", "--trials", "2", "--seed", "4", "--out", str(out)]
    assert main(argv) == EXIT_VERIFY
    rows, _, _ = _read_report(out)
    assert len(rows) == 4
    assert {row["status"] for row in rows} == {"NotAStateError"}
    assert {row["holds"] for row in rows} == {"false"}
    assert {row["avg"] for row in rows} == {""}


def test_ordering_p0(capsys) -> None:
    """d = 2 gives the row (2, 1, 1, 1) and is ordered."""
    _logger.debug(stack()[0][3])
    assert main(["ordering", "--d-max", "2"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "d,ctr,cr,cl1,ordered"
    assert lines[1] == "2,1,1,1,true"
    assert lines[2].startswith("# ")


def test_ordering_p1(capsys) -> None:
    """Every d up to 16 is ordered."""
    _logger.debug(stack()[0][3])
    assert main(["ordering", "--d-max", "16"]) == EXIT_OK
    rows = list(reader(capsys.readouterr().out.splitlines()[1:-1]))
    assert len(rows) == 15
    assert all(row[-1] == "true" for row in rows)


def test_ordering_n0() -> None:
    """d_max below 2 is a usage error."""
    _logger.debug(stack()[0][3])
    assert main(["ordering", "--d-max", "1"]) == EXIT_USAGE


def test_sweep_p0(tmp_path) -> None:
    """Uniform qutrit, a from 0 to 1/3: the closed form is the line 4a and a = 0 is incoherent."""
    _logger.debug(stack()[0][3])
    out = tmp_path / "sweep_a.csv"
    argv = ["sweep", "--vary", "a", "--d", "3", "--start", "0", "--stop", repr(1 / 3), "--steps", "50", "--restarts", "1", "--out", str(out)]
    assert main(argv) == EXIT_OK
    rows, _, _ = _read_report(out)
    assert len(rows) == 50
    for row in rows:
        assert row["skipped"] == "false"
        assert float(row["c_tr_closed"]) == approx(4 * float(row["value"]), abs=1e-12)
        assert float(row["c_tr_numeric"]) == approx(float(row["c_tr_closed"]), abs=1e-6)
    assert [float(rows[0][column]) for column in ("c_l1", "c_rel_entropy", "c_tr_closed", "c_tr_numeric")] == approx([0.0] * 4, abs=1e-12)


def test_sweep_p1(tmp_path) -> None:
    """Infeasible values of a are emitted as skipped rows."""
    _logger.debug(stack()[0][3])
    out = tmp_path / "sweep_skip.csv"
    argv = ["sweep", "--vary", "a", "--x", "0.5", "0.3", "0.2", "--start", "0", "--stop", "0.6", "--steps", "7", "--restarts", "1"]
    assert main([*argv, "--out", str(out)]) == EXIT_OK
    rows, _, _ = _read_report(out)
    assert rows[0]["skipped"] == "false"
    assert rows[-1]["skipped"] == "true"
    assert rows[-1]["c_l1"] == ""


def test_sweep_p2(tmp_path) -> None:
    """Varying d with a = 0.1: the uniform family stops being a state above d = 10."""
    _logger.debug(stack()[0][3])
    out = tmp_path / "sweep_d.csv"
    argv = ["sweep", "--vary", "d", "--a", "0.1", "--start", "2", "--stop", "12", "--steps", "11", "--restarts", "1"]
    assert main([*argv, "--out", str(out)]) == EXIT_OK
    rows, _, _ = _read_report(out)
    assert [row["value"] for row in rows] == [str(d) for d in range(2, 13)]
    assert [row["skipped"] for row in rows] == ["false"] * 9 + ["true"] * 2
    assert float(rows[1]["c_tr_closed"]) == approx(0.4)


def test_sweep_p3(tmp_path) -> None:
    """Uniform qutrit, a from -0.5 to 1/3: points below -1/6 are skipped, the rest are states."""
    _logger.debug(stack()[0][3])
    out = tmp_path / "sweep_low.csv"
    argv = ["sweep", "--vary", "a", "--d", "3", "--start", "-0.5", "--stop", repr(1 / 3), "--steps", "13", "--restarts", "1"]
    assert main([*argv, "--out", str(out)]) == EXIT_OK
    rows, _, _ = _read_report(out)
    assert len(rows) == 13
    below = [row for row in rows if float(row["value"]) < -1 / 6 - 1e-9]
    inside = [row for row in rows if float(row["value"]) > -1 / 6 + 1e-9]
    assert below and inside
    assert all(row["skipped"] == "true" and row["c_tr_closed"] == "" for row in below)
    assert all(row["skipped"] == "false" for row in inside)
    for row in inside:
        assert float(row["c_tr_closed"]) == approx(4 * abs(float(row["value"])), abs=1e-12)


def test_sweep_n0(tmp_path) -> None:
    """An unwritable output path is a usage error."""
    _logger.debug(stack()[0][3])
    out = join(str(tmp_path), "no_such_folder", "sweep.csv")
    assert main(["sweep", "--vary", "a", "--start", "0", "--stop", "0.1", "--out", out]) == EXIT_USAGE
