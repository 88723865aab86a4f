import json

import pytest

from poissonpoly import identities as ids
from poissonpoly.cli import main, suite_plan


@pytest.fixture(autouse=True)
def _fresh_cache():
    ids.clear_cache()
    yield
    ids.clear_cache()


def test_oracle_command(capsys):
    assert main(["oracle-1d", "--t", "1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["e_mu"] == pytest.approx(0.1036383, abs=1e-7)


def test_verify_identity_with_negative_z_list(tmp_path, capsys):
    out = tmp_path / "r.jsonl"
    code = main(["verify-identity", "--id", "gf", "--d", "2", "--body", "disk", "--t", "50",
                 "--z", "-0.05,0.02,0.05", "--reps", "2000", "--seed", "7", "--output", str(out)])
    assert code == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert [r["params"]["z"] for r in records] == [-0.05, 0.02, 0.05]
    assert all(r["verdict"] == "pass" for r in records)


def test_reports_are_byte_identical_across_workers(tmp_path):
    args = ["verify-identity", "--id", "factorial_moment", "--t", "10", "--k", "2",
            "--reps", "2500", "--seed", "3"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--output", str(a), "--workers", "1"]) == 0
    ids.clear_cache()
    assert main(args + ["--output", str(b), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_usage_errors_exit_1(capsys):
    assert main(["verify-identity", "--id", "nope"]) == 1
    assert main(["verify-identity", "--id", "gf", "--t", "50", "--z", "0.5"]) == 1
    assert "exceeds" in capsys.readouterr().err
    assert main(["verify-identity", "--id", "gf", "--t", "-1", "--z", "0.1"]) == 1
    assert main(["verify-identity", "--id", "gf", "--t", "5", "--z", "0.1", "--bogus"]) == 1
    assert main(["verify-identity", "--id", "vertex_gf", "--t", "5", "--x", "2"]) == 1
    assert main(["verify-identity", "--id", "factorial_moment", "--t", "5", "--d", "3",
                 "--body", "disk"]) == 1
    assert main(["oracle-1d", "--t", "0"]) == 1
    assert main([]) == 1


def test_failure_exits_2(tmp_path):
    # a zero threshold turns any nonzero z into a failure
    code = main(["verify-identity", "--id", "vertex_expectation", "--t", "5", "--reps", "200",
                 "--z-threshold", "0", "--output", str(tmp_path / "r")])
    assert code == 2


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# run\nid = gf\nt = 20\nz = -0.1,0.1\nreps = 1000\nseed = 4\n")
    out = tmp_path / "r.jsonl"
    assert main(["verify-identity", "--config", str(cfg), "--reps", "500",
                 "--output", str(out)]) == 0
    records = [json.loads(line) for line in out.read_text().splitlines()]
    assert [r["n_reps"] for r in records] == [500, 500]
    assert records[0]["seed"] == 4
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert main(["verify-identity", "--config", str(bad), "--id", "gf"]) == 1


def test_manifest(tmp_path):
    man = tmp_path / "m.json"
    assert main(["verify-identity", "--id", "point_balance", "--t", "5", "--reps", "300",
                 "--output", str(tmp_path / "r"), "--manifest", str(man)]) == 0
    data = json.loads(man.read_text())
    assert data["verdict"] == "pass" and data["version"]
    assert data["config"]["id"] == "point_balance" and len(data["records"]) == 1


def test_scaling_command(tmp_path):
    csv_path = tmp_path / "s.csv"
    code = main(["scaling", "--functional", "EN,EVol_deficit", "--t-grid", "20,40,80,160,320",
                 "--reps", "300", "--seed", "2", "--csv", str(csv_path),
                 "--output", str(tmp_path / "s.jsonl")])
    assert code in (0, 2)
    assert csv_path.read_text().startswith("functional,body,d,t,estimate,se,n_reps")
    assert main(["scaling", "--body", "square", "--t-grid", "20,40,80,160,320"]) == 1


def test_suite_plan_covers_every_verifier():
    ids_in_plan = {p[0] for p in suite_plan("quick")}
    from poissonpoly.cli import IDENTITY_IDS
    assert ids_in_plan == set(IDENTITY_IDS)
    assert all(kw["reps"] == 10_000 for _, _, kw in suite_plan("quick"))
