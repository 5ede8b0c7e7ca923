import io
import math
import json
from fractions import Fraction

import pytest

from paircorr.cli import main
from paircorr.exactreal import alpha_parse, exact_norm
from paircorr.gapgen import read_sequence, read_witness


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture
def ap_file(tmp_path):
    p = str(tmp_path / "ap.txt")
    assert run("gen", "--family", "ap", "--n", "1000", "--out", p)[0] == 0
    return p


def test_gen_primes(tmp_path):
    p = str(tmp_path / "primes.txt")
    assert run("gen", "--family", "primes", "--n", "100", "--out", p)[0] == 0
    seq = read_sequence(p)
    assert len(seq) == 100 and seq.terms[:5] == (2, 3, 5, 7, 11) and seq.terms[-1] == 541


def test_gen_quasi(tmp_path):
    p = str(tmp_path / "q.txt")
    code, _ = run("gen", "--quasi", "d=2,C=0.5,K=1", "--checkpoints", "64,128,256", "--seed", "7", "--out", p)
    assert code == 0
    seq, wit = read_sequence(p), read_witness(p + ".witness.json")
    assert sorted(wit) == [64, 128, 256]
    for N, rep in wit.items():
        assert sum(1 for a in seq.terms[:N] if a in rep.coords) >= N // 2


def test_gen_deterministic(tmp_path):
    a, b = str(tmp_path / "a.txt"), str(tmp_path / "b.txt")
    for p in (a, b):
        run("gen", "--quasi", "d=2,C=0.5,K=1", "--checkpoints", "64,128", "--seed", "3", "--out", p)
    assert open(a).read() == open(b).read()
    assert open(a + ".witness.json").read() == open(b + ".witness.json").read()


def test_gen_infeasible_range():
    assert run("gen", "--family", "random", "--n", "10", "--range", "5")[0] == 2


def test_r2_csv(ap_file):
    code, out = run("r2", "--seq", ap_file, "--alpha", "phi", "--n", "1000", "--s", "0.5,1,2", "--oracle")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "s,r2,s_exact,r2_exact" and len(lines) == 4
    assert [l.split(",")[3] for l in lines[1:]] == ["13/500", "403/500", "1793/500"]


def test_r2_empty_grid(ap_file):
    code, out = run("r2", "--seq", ap_file, "--alpha", "phi", "--n", "10", "--s", "")
    assert code == 0 and out == "s,r2,s_exact,r2_exact\n"


def test_r2_json_round_trip(ap_file):
    code, out = run("r2", "--seq", ap_file, "--alpha", "sqrt:3", "--n", "200", "--s", "1,1/3", "--format", "json")
    assert code == 2  # grid must be ascending
    code, out = run("r2", "--seq", ap_file, "--alpha", "sqrt:3", "--n", "200", "--s", "1/3,1", "--format", "json")
    doc = json.loads(out)
    assert json.dumps(doc, indent=2, sort_keys=True) + "\n" == out
    assert Fraction(doc["samples"][0]["s"]["exact"]) == Fraction(1, 3)


def test_r2_bad_alpha(ap_file):
    assert run("r2", "--seq", ap_file, "--alpha", "5/5", "--n", "10", "--s", "1")[0] == 2


def test_r2_precision_failure(tmp_path):
    # ||10946 phi|| sits 2^-100 above the threshold s/N
    p = str(tmp_path / "s.txt")
    with open(p, "w") as fh:
        fh.write("# paircorr-seq v1\n1\n10947\n")
    d = exact_norm(10946, alpha_parse("phi"))
    s = f"{2 * math.floor(d * 2**100)}/{2**100}"
    assert run("r2", "--seq", p, "--alpha", "phi", "--s", s)[1].endswith(",0/1\n")
    assert run("r2", "--seq", p, "--alpha", "phi", "--s", s, "--max-precision-bits", "90")[0] == 3


def test_energy_and_spectrum_inline():
    code, out = run("energy", "--seq", "{1,2,3}")
    assert code == 0 and json.loads(out)["energy"] == 19
    code, out = run("spectrum", "--seq", "{1,2,3}")
    assert json.loads(out)["spectrum"] == {"1": 2, "2": 1, "-1": 2, "-2": 1}


def test_spectrum_guard():
    assert run("spectrum", "--n", "50000")[0] == 2
    assert run("spectrum", "--gen", "ap", "--n", "50000")[0] == 2


def test_certify_search(ap_file):
    code, out = run("certify", "--seq", ap_file, "--alpha", "3/10", "--n", "100", "--d", "1", "--c", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["N"] == 100 and doc["multiplicity"] >= 90
    assert doc["constants"]["L"] == 6 and doc["constants"]["tau"]["exact"] == "1/36"
    assert Fraction(doc["dist"]["exact"]) <= Fraction(18, 100)


def test_certify_none(tmp_path):
    p = str(tmp_path / "lac.txt")
    run("gen", "--family", "lacunary", "--n", "1000", "--out", p)
    code, out = run("certify", "--seq", p, "--alpha", "12345678901234567891/36893488147419103232",
                    "--n", "1000", "--tau", "0.5", "--psi", "0.1")
    assert code == 1 and out == "none\n"


def test_certify_pipeline(tmp_path):
    p = str(tmp_path / "q.txt")
    run("gen", "--quasi", "d=2,C=0.5,K=1", "--checkpoints", "1000,2000", "--out", p)
    assert run("certify", "--seq", p, "--alpha", "phi", "--n", "1000", "--d", "2", "--c", "1/2", "--pipeline")[0] == 2
    code, out = run("certify", "--seq", p, "--alpha", "phi", "--n", "1000", "--d", "2", "--c", "1/2",
                    "--pipeline", "--witness", p + ".witness.json")
    assert code == 0 and json.loads(out)["method"] == "pipeline"


def test_verdict(ap_file):
    code, out = run("verdict", "--seq", ap_file, "--alpha", "1/10", "--checkpoints", "100,400,1000", "--d", "1", "--c", "1")
    assert code == 0 and json.loads(out)["branch"] == "SMALL_GAP"
    assert run("verdict", "--seq", ap_file, "--alpha", "1/10", "--checkpoints", "", "--d", "1", "--c", "1")[0] == 2
    assert run("verdict", "--seq", ap_file, "--alpha", "1/10", "--checkpoints", "400,100", "--d", "1", "--c", "1")[0] == 2


def test_verdict_random_inconclusive():
    code, out = run("verdict", "--gen", "random", "--range", "100000000", "--seed", "3", "--alpha",
                    "98765432123/274877906944", "--checkpoints", "500,1000", "--d", "1", "--c", "1")
    assert code == 1 and json.loads(out)["non_poissonian"] is False


def test_cover():
    code, out = run("cover", "--set", "{1,2,5,6,9,10}", "--d-max", "2", "--k-bound", "1")
    assert code == 0 and json.loads(out) == {"h": 1, "k": [1, 4], "s": [2, 3]}
    assert run("cover", "--set", "{1,2,4,8,16,32}", "--d-max", "1", "--k-bound", "2") == (1, "none\n")


def test_missing_sequence_and_bad_args():
    assert run("energy")[0] == 2
    assert run("nonsense")[0] == 2
    assert run("certify", "--seq", "{1,2,3}", "--alpha", "phi")[0] == 2
