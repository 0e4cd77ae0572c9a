import json

import numpy as np
import pytest

from mupb import __version__
from mupb.cli import main
from mupb.constructions import canonical_qubit_triple, triple_2x5
from mupb.equivalence import fingerprint
from mupb.io import MubFileError, dumps, load_mubset, loads, mubset_from_dict, mubset_to_dict, save_mubset


def test_round_trip_exact(tmp_path):
    S = triple_2x5(True)
    p = save_mubset(S, tmp_path / "s.mub.json", seed=3)
    T = load_mubset(p)
    assert T.names == S.names and T.provenance == S.provenance
    for a, b in zip(S, T):
        for fa, fb in zip(a.factors, b.factors):
            assert np.array_equal(fa, fb)
    assert fingerprint(S) == fingerprint(T)
    assert json.loads(p.read_text())["metadata"]["seed"] == 3
    assert mubset_to_dict(T) == mubset_to_dict(S)


def test_schema_errors_have_paths():
    d = mubset_to_dict(canonical_qubit_triple(2))
    d["bases"][1]["vectors"][2][0] = [[1, 0], [0, 0], [0, 0]]
    with pytest.raises(MubFileError) as e:
        mubset_from_dict(d)
    assert e.value.path == "bases[1].vectors[2][0]"
    with pytest.raises(MubFileError, match="signature"):
        mubset_from_dict({"signature": [1], "bases": []})
    with pytest.raises(MubFileError, match="line 1"):
        loads("{not json")
    d = mubset_to_dict(canonical_qubit_triple(2))
    d["bases"][0]["vectors"].pop()
    with pytest.raises(MubFileError, match="expected 4"):
        mubset_from_dict(d)


def test_norm_policy():
    d = mubset_to_dict(canonical_qubit_triple(1))
    d["bases"][0]["vectors"][0][0] = [[2.0, 0.0], [0.0, 0.0]]
    with pytest.raises(MubFileError, match="norm"):
        mubset_from_dict(d)
    S = mubset_from_dict(d, normalize=True)
    assert np.allclose(S[0].factors[0][0], [1, 0])


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_construct_then_verify(tmp_path, capsys):
    f = str(tmp_path / "t.mub.json")
    assert run(capsys, "construct", "--family", "qubit-triple", "--n", "2", "--out", f)[0] == 0
    code, out, _ = run(capsys, "verify", f, "--format", "structured")
    data = json.loads(out)
    assert code == 0 and data["result"]["max_deviation"] < 1e-12
    assert data["version"] == __version__ and data["tol"] == 1e-9 and data["seed"] == 0


@pytest.mark.parametrize("family,n", [("qubit-triple", 1), ("qubit-triple", 3), ("qutrit-quadruple", 1),
                                      ("qutrit-quadruple", 2), ("triple-2x5-direct", 1),
                                      ("triple-2x5-distinct", 1), ("triple-2x3-direct", 1),
                                      ("triple-2x3-indirect", 1)])
def test_verify_every_family(tmp_path, capsys, family, n):
    f = str(tmp_path / "x.mub.json")
    assert run(capsys, "construct", "--family", family, "--n", str(n), "--out", f)[0] == 0
    assert run(capsys, "verify", f)[0] == 0


def test_verify_identical_bases_fails(tmp_path, capsys):
    d = mubset_to_dict(canonical_qubit_triple(2))
    d["bases"][1] = d["bases"][0]
    f = tmp_path / "same.mub.json"
    f.write_text(json.dumps(d))
    code, out, _ = run(capsys, "verify", str(f))
    assert code == 1 and "worst pair" in out and "FAIL" in out


def test_file_errors_exit_2(tmp_path, capsys):
    d = mubset_to_dict(canonical_qubit_triple(2))
    d["bases"][0]["vectors"][0][1] = [[1, 0]]
    f = tmp_path / "bad.mub.json"
    f.write_text(json.dumps(d))
    code, _, err = run(capsys, "verify", str(f))
    assert code == 2 and "bases[0].vectors[0][1]" in err
    d = mubset_to_dict(canonical_qubit_triple(2))
    d["bases"][0]["vectors"][0][1] = [[3, 0], [0, 0]]
    f.write_text(json.dumps(d))
    code, _, err = run(capsys, "verify", str(f))
    assert code == 2 and "norm" in err
    assert run(capsys, "verify", str(f), "--normalize")[0] == 0
    assert run(capsys, "verify", str(tmp_path / "missing.json"))[0] == 2


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "verify", "--no-such-flag", "x")[0] == 2
    assert run(capsys, "bound", "--signature", "1,3")[0] == 2
    assert run(capsys, "search", "--target", "conjecture1", "--signature", "2,2")[0] == 2


def test_bound(capsys):
    code, out, _ = run(capsys, "bound", "--signature", "2,3")
    assert code == 0 and out.splitlines()[0] == "3 Proven"
    code, out, _ = run(capsys, "bound", "--signature", "4,5", "--format", "structured")
    assert json.loads(out)["result"]["status"] == "conjectured"


def test_structure_commands(tmp_path, capsys):
    f = str(tmp_path / "t.mub.json")
    run(capsys, "construct", "--family", "triple-2x3-indirect", "--out", f)
    code, out, _ = run(capsys, "classify", f, "--format", "structured")
    kinds = [b["kind"] for b in json.loads(out)["result"]["bases"]]
    assert code == 0 and kinds == ["direct", "direct", "indirect"]
    assert run(capsys, "extract-ortho", f, "--basis", "2")[0] == 0
    assert run(capsys, "extract-ortho", f, "--basis", "9")[0] == 2
    assert run(capsys, "group", f)[0] == 0


def test_equiv_command(tmp_path, capsys):
    a, b = str(tmp_path / "a.mub.json"), str(tmp_path / "b.mub.json")
    run(capsys, "construct", "--family", "triple-2x5-direct", "--out", a)
    run(capsys, "construct", "--family", "triple-2x5-distinct", "--out", b)
    assert run(capsys, "equiv", a, a)[0] == 0
    code, out, _ = run(capsys, "equiv", a, b)
    assert code == 1 and "inequivalent" in out


def test_entangle_and_search_commands(tmp_path, capsys):
    f = str(tmp_path / "t.mub.json")
    run(capsys, "construct", "--family", "qubit-triple", "--n", "2", "--out", f)
    code, out, _ = run(capsys, "entangle", f, "--restarts", "10", "--format", "structured")
    data = json.loads(out)
    assert code == 0 and data["result"]["vectors"] and data["restarts"] == 10
    code, out, _ = run(capsys, "search", f, "--restarts", "3")
    assert code == 0 and "found 0" in out


def test_deterministic_reports(tmp_path, capsys):
    f = str(tmp_path / "t.mub.json")
    run(capsys, "construct", "--family", "qubit-triple", "--n", "2", "--out", f)
    _, a, _ = run(capsys, "entangle", f, "--restarts", "5", "--seed", "2", "--format", "structured")
    _, b, _ = run(capsys, "entangle", f, "--restarts", "5", "--seed", "2", "--format", "structured")
    assert a == b


def test_text_round_trip_through_strings():
    S = canonical_qubit_triple(3)
    assert dumps(loads(dumps(S))) == dumps(S)
