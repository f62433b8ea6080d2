import json

import pytest

import paratower.certificates as certs
from paratower.cli import emit_report, main


def run_json(tmp_path, argv, name="out.json"):
    path = tmp_path / name
    code = main(argv + ["--json", str(path)])
    data = json.loads(path.read_text()) if path.exists() else None
    return code, data


def test_f2_towers_command(tmp_path):
    code, env = run_json(tmp_path, ["f2-towers", "--D", "e,a,A,b,B"])
    assert code == 0
    kind, payload = certs.parse_envelope(env)
    assert kind == "towers"
    assert certs.hash_matches(env)
    assert all(c["pass"] for c in payload["checks"].values())


def test_f2_towers_ball_mode(tmp_path):
    code, env = run_json(
        tmp_path, ["f2-towers", "--D", "e,a,A,b,B", "--mode", "ball", "--radius", "6"]
    )
    assert code == 0
    assert env["payload"]["radius"] == 6


def test_more_towers_command(tmp_path):
    code, env = run_json(
        tmp_path, ["more-towers", "--D", "e,a,A,b,B", "--copies", "2"]
    )
    assert code == 0
    assert len(env["payload"]["cover_groups"]) == 2


def test_ext_towers_commands(tmp_path):
    code, env = run_json(
        tmp_path,
        ["ext-towers", "--kind", "f2xk", "--k-order", "2",
         "--F", "e:0,a:1,A:1", "--mode", "ball", "--radius", "4"],
    )
    assert code == 0
    code, env = run_json(
        tmp_path,
        ["ext-towers", "--kind", "f2xf2", "--F", "a:b,A:B",
         "--mode", "ball", "--radius", "3"],
    )
    assert code == 0


def test_union_and_filling_towers(tmp_path):
    code, _ = run_json(tmp_path, ["union-towers", "--D", "e,a,A,b,B"])
    assert code == 0
    code, env = run_json(
        tmp_path, ["filling-towers", "--D", "e,a,A", "--radius", "6"]
    )
    assert code == 0
    assert env["payload"]["mode"] == "ball"


def test_verify_round_trip(tmp_path):
    code, env = run_json(tmp_path, ["f2-towers", "--D", "e,a,A,b,B"])
    path = tmp_path / "out.json"
    assert main(["verify", str(path)]) == 0
    assert main(["verify-towers", str(path)]) == 0


def test_verify_detects_tampering(tmp_path):
    code, env = run_json(tmp_path, ["f2-towers", "--D", "e,a,A,b,B"])
    env["payload"]["D"].append("ba")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(env))
    assert main(["verify", str(bad)]) == 2


def test_verify_malformed_input(tmp_path):
    path = tmp_path / "garbage.json"
    path.write_text("{not json")
    assert main(["verify", str(path)]) == 3
    path.write_text(json.dumps({"payload": {}}))
    assert main(["verify", str(path)]) == 3
    assert main(["verify-towers", str(path)]) == 3


def test_color_commands(tmp_path):
    code, env = run_json(
        tmp_path, ["color", "--K", "Z", "--E=-1,0,1", "--window", "50"]
    )
    assert code == 0
    assert env["payload"]["m"] == 5
    assert main(["verify", str(tmp_path / "out.json")]) == 0
    code, env = run_json(tmp_path, ["color", "--K", "Z/2", "--E", "0,1"])
    assert code == 0
    assert env["payload"]["m"] == 2


def test_compare_command(tmp_path):
    code, env = run_json(tmp_path, ["compare", "--instance", "F2", "--U", "ab"])
    assert code == 0
    kind, payload = certs.parse_envelope(env)
    assert kind == "comparison"
    assert main(["verify", str(tmp_path / "out.json")]) == 0


def _write_witness(tmp_path, name, sources, targets, entries):
    from paratower.boundary import ClopenSet
    from paratower.comparison import PlainSpace, SubeqWitness

    cyl = ClopenSet.cylinder
    w = SubeqWitness(
        PlainSpace(),
        [cyl(s) for s in sources],
        [cyl(t) for t in targets],
        [(i, cyl(p), g, c) for i, p, g, c in entries],
    )
    path = tmp_path / name
    path.write_text(json.dumps(w.to_json()))
    return path


def test_compose_command(tmp_path):
    p1 = _write_witness(tmp_path, "w1.json", ["b"], ["a"], [(0, "b", "a", 0)])
    p2 = _write_witness(tmp_path, "w2.json", ["a"], ["b"], [(0, "a", "b", 0)])
    code, env = run_json(tmp_path, ["compose", str(p1), str(p2)])
    assert code == 0
    kind, payload = certs.parse_envelope(env)
    assert kind == "witness"
    assert main(["verify", str(tmp_path / "out.json")]) == 0


def test_boost_command(tmp_path):
    entries = [
        (0, "ba", "a", 0),
        (0, "bb", "a", 1),
        (0, "bB", "a", 1),
    ]
    p = _write_witness(tmp_path, "w.json", ["b"], ["a", "a"], entries)
    code, env = run_json(tmp_path, ["boost", str(p), "--V", "a"])
    assert code == 0
    assert len(env["payload"]["targets"]) == 1


def test_isometry_command(tmp_path):
    code, env = run_json(tmp_path, ["isometry"])
    assert code == 0
    assert env["payload"]["complement_witness"] == "A"
    assert main(["verify", str(tmp_path / "out.json")]) == 0


def test_report_output(capsys):
    assert main(["f2-towers", "--D", "e,a,A,b,B"]) == 0
    out = capsys.readouterr().out
    assert "kind: towers" in out
    assert "overall: pass" in out


def test_emit_report_flags_bad_hash(tmp_path):
    cert_code, env = run_json(tmp_path, ["f2-towers", "--D", "e,a,A,b,B"])
    env["content_hash"] = "0" * 64
    assert "hash mismatch" in emit_report(env)


def test_usage_errors_exit_64(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 64
    with pytest.raises(SystemExit) as exc:
        main(["f2-towers"])  # missing --D
    assert exc.value.code == 64
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 64
    # bad letters in D are a usage error, not a crash
    assert main(["f2-towers", "--D", "a,x"]) == 64


def test_determinism_across_runs(tmp_path):
    a_code, a = run_json(tmp_path, ["f2-towers", "--D", "e,a,A,b,B"], "a.json")
    b_code, b = run_json(tmp_path, ["f2-towers", "--D", "e,a,A,b,B"], "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
