import csv
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from entroof.cli import dumps, main
from entroof.states import InvalidStateError, StateFormatError, state_from_json


def run(args, capsys=None):
    code = main([str(a) for a in args])
    out = capsys.readouterr() if capsys else None
    return code, out


def write_state(path, m, dims):
    m = np.asarray(m, dtype=complex)
    path.write_text(json.dumps({"dims": dims, "re": m.real.tolist(), "im": m.imag.tolist()}))
    return path


# ---------------------------------------------------------------------------
# serializer


def test_dumps_uses_17_significant_digits():
    text = dumps({"a": 0.1, "b": [1.0, 2], "c": {"d": True, "e": None}, "f": np.float64(1 / 3)})
    assert "0.10000000000000001" in text
    assert "0.33333333333333331" in text
    assert json.loads(text)["b"] == [1.0, 2]


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_dumps_round_trips_floats(x):
    assert json.loads(dumps([x]))[0] == x


# ---------------------------------------------------------------------------
# states


def test_states_round_trip(tmp_path, capsys):
    for name, extra in [("singlet", []), ("werner", ["--p", "0.8"]), ("tiles", []), ("isotropic", ["--p", "0.4", "--d", "3"])]:
        out = tmp_path / f"{name}.json"
        code, _ = run(["states", name, "-o", out, *extra], capsys)
        assert code == 0
        state_from_json(json.loads(out.read_text()))


def test_states_singlet_is_rank_one(tmp_path, capsys):
    out = tmp_path / "s.json"
    run(["states", "singlet", "-o", out], capsys)
    rho = state_from_json(json.loads(out.read_text()))
    assert rho.matrix.shape == (4, 4) and rho.rank() == 1


def test_states_random_separable_writes_witness(tmp_path, capsys):
    out = tmp_path / "rs.json"
    code, cap = run(["states", "random_separable", "--k", "3", "--seed", "2", "-o", out], capsys)
    assert code == 0
    w = json.loads((tmp_path / "rs.witness.json").read_text())
    assert w["type"] == "ensemble" and len(w["weights"]) == 3


def test_states_unknown_name(tmp_path, capsys):
    code, cap = run(["states", "ghz", "-o", tmp_path / "g.json"], capsys)
    assert code == 4
    assert "tiles" in cap.err


def test_states_bad_parameter(tmp_path, capsys):
    code, _ = run(["states", "werner", "--p", "2", "-o", tmp_path / "w.json"], capsys)
    assert code == 4


# ---------------------------------------------------------------------------
# compute


@pytest.fixture
def singlet_file(tmp_path, capsys):
    out = tmp_path / "singlet.json"
    run(["states", "singlet", "-o", out], capsys)
    return out


def test_compute_eof_exact(singlet_file, tmp_path, capsys):
    out = tmp_path / "r.json"
    code, cap = run(["compute", "--measure", "eof-exact", "--state", singlet_file, "--cut", "0/1", "--seed", "0", "-o", out], capsys)
    assert code == 0
    assert "1.000000 (exact)" in cap.out
    res = json.loads(out.read_text())
    assert res["value_bits"] == pytest.approx(1.0) and res["direction"] == "exact"


def test_compute_c_left_classical(tmp_path, capsys):
    cc = write_state(tmp_path / "cc.json", np.diag([0.5, 0, 0, 0.5]), [2, 2])
    out = tmp_path / "r.json"
    code, cap = run(["compute", "--measure", "c-left", "--state", cc, "--cut", "0/1", "--restarts", "16", "--seed", "1", "-o", out], capsys)
    assert code == 0
    res = json.loads(out.read_text())
    assert res["value_bits"] >= 0.999999 and res["direction"] == "lower"
    assert "(lower)" in cap.out and "converged:" in cap.out


def test_compute_ec_chain(singlet_file, tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _ = run(["compute", "--measure", "ec-chain", "--state", singlet_file, "--n", "10", "--seed", "0", "-o", out], capsys)
    assert code == 0
    res = json.loads(out.read_text())
    assert res["chain_value"] == pytest.approx(0.9, abs=2e-3)


@pytest.mark.parametrize("measure", ["entropy", "c-right", "c-max", "eof", "g-left", "g-right", "g-hv"])
def test_compute_all_measures_on_singlet(measure, singlet_file, tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _ = run(["compute", "--measure", measure, "--state", singlet_file, "--seed", "0", "--restarts", "2", "-o", out], capsys)
    assert code == 0
    assert json.loads(out.read_text())["value_bits"] == pytest.approx(1.0, abs=2e-3)


def test_compute_prints_generated_seed(singlet_file, capsys):
    code, cap = run(["compute", "--measure", "entropy", "--state", singlet_file], capsys)
    assert code == 0
    assert cap.out.startswith("seed: ")


def test_compute_mismatch_exit_4(tmp_path, capsys):
    tiles = tmp_path / "t.json"
    run(["states", "tiles", "-o", tiles], capsys)
    assert run(["compute", "--measure", "eof-exact", "--state", tiles, "--seed", "0"], capsys)[0] == 4
    w = tmp_path / "w.json"
    run(["states", "werner", "--p", "0.5", "-o", w], capsys)
    assert run(["compute", "--measure", "entropy", "--state", w, "--seed", "0"], capsys)[0] == 4
    assert run(["compute", "--measure", "entropy", "--state", w, "--cut", "0,1/2", "--seed", "0"], capsys)[0] == 4


def test_compute_invariant_exit_3(tmp_path, capsys):
    bad = write_state(tmp_path / "bad.json", np.eye(2), [2])
    code, cap = run(["compute", "--measure", "entropy", "--state", bad, "--seed", "0"], capsys)
    assert code == 3
    assert "trace" in cap.err
    neg = write_state(tmp_path / "neg.json", np.diag([1.5, -0.5]), [2])
    assert run(["compute", "--measure", "entropy", "--state", neg, "--seed", "0"], capsys)[0] == 3


def test_compute_malformed_exit_2(tmp_path, capsys):
    p = tmp_path / "m.json"
    p.write_text("{not json")
    assert run(["compute", "--measure", "entropy", "--state", p], capsys)[0] == 2
    assert run(["compute", "--measure", "entropy", "--state", tmp_path / "missing.json"], capsys)[0] == 2
    assert run(["compute", "--measure", "nope", "--state", p], capsys)[0] == 2


_json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-3, 3) | st.floats(allow_nan=False) | st.text(max_size=3),
    lambda children: st.lists(children, max_size=3) | st.dictionaries(st.sampled_from(["dims", "re", "im", "x"]), children, max_size=4),
    max_leaves=10,
)


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(obj=_json_values)
def test_crafted_files_map_to_exit_codes(obj, tmp_path_factory, capsys):
    p = tmp_path_factory.mktemp("fuzz") / "s.json"
    p.write_text(json.dumps(obj))
    code, _ = run(["compute", "--measure", "entropy", "--state", p, "--seed", "0"], capsys)
    try:
        state_from_json(obj)
    except StateFormatError:
        expected = {2}
    except InvalidStateError:
        expected = {3}
    else:
        expected = {0, 4}
    assert code in expected


@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(
    m=st.lists(st.floats(-2, 2, allow_nan=False), min_size=4, max_size=4),
)
def test_crafted_matrices_exit_3_or_4(m, tmp_path_factory, capsys):
    a = np.array(m).reshape(2, 2)
    p = tmp_path_factory.mktemp("inv") / "s.json"
    write_state(p, a, [2])
    code, _ = run(["compute", "--measure", "c-left", "--state", p, "--seed", "0"], capsys)
    herm = abs(a[0, 1] - a[1, 0]) <= 1e-10
    valid = herm and abs(np.trace(a) - 1) <= 1e-10 and np.linalg.eigvalsh((a + a.T) / 2).min() >= -1e-10
    # a valid single-qubit state has one factor, so the default cut is a dims mismatch
    assert code == (4 if valid else 3)


# ---------------------------------------------------------------------------
# verify


def test_verify_duality_campaign(tmp_path, capsys):
    out = tmp_path / "d.json"
    code, cap = run(["verify", "duality", "--samples", "3", "--dims", "2,2,2", "--seed", "1", "--restarts", "4", "-o", out], capsys)
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["samples"] == 3 and rep["max_slack_bits"] <= 1e-3


def test_verify_csv(tmp_path, capsys):
    out = tmp_path / "d.csv"
    code, _ = run(["verify", "lemma1", "--samples", "2", "--dims", "2,2,2,2", "--seed", "42", "--restarts", "4", "--format", "csv", "-o", out], capsys)
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["sample", "seed", "lhs_bits", "rhs_bits", "slack_bits", "sound"]
    assert len(rows) == 3


def test_verify_cloning_single_state(singlet_file, tmp_path, capsys):
    out = tmp_path / "c.json"
    code, cap = run(["verify", "cloning", "--state", singlet_file, "--seed", "0", "-o", out], capsys)
    assert code == 0
    assert "gap 1.0000" in cap.out
    rec = json.loads(out.read_text())["records"][0]
    assert rec["extra"]["gap_bits"] == pytest.approx(1.0, abs=1e-2)


def test_verify_unsupported_dims_exit_4(capsys):
    assert run(["verify", "lemma1", "--samples", "1", "--dims", "3,2,2,2", "--seed", "0"], capsys)[0] == 4
    assert run(["verify", "bogus", "--dims", "2,2", "--seed", "0"], capsys)[0] == 4


def test_verify_needs_input(capsys):
    assert run(["verify", "duality", "--seed", "0"], capsys)[0] == 2
    assert run(["verify", "duality", "--dims", "2,x", "--seed", "0"], capsys)[0] == 2


def test_verify_byte_identical_reports(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["verify", "duality", "--samples", "2", "--dims", "2,2,2", "--seed", "5", "--restarts", "4"]
    run([*args, "-o", a], capsys)
    run([*args, "-o", b], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_module_entry_point(tmp_path):
    out = tmp_path / "s.json"
    proc = subprocess.run([sys.executable, "-m", "entroof", "states", "singlet", "-o", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
