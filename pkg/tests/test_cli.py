import json

import pytest

from floorrelu.cli import make_parser, run

SUBCOMMANDS = ("build", "eval", "verify", "extract", "bounds", "demo", "probe", "targets")


def out_json(capsys):
    return json.loads(capsys.readouterr().out)


@pytest.fixture(scope="module")
def built(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    net, cert = d / "net.json", d / "cert.json"
    code = run(["build", "--target", "mean", "--d", "2", "--N", "2", "--L", "2", "--theorem", "1",
                "--out", str(net), "--cert", str(cert)])
    assert code == 0
    return d, net, cert


def test_build_writes_both_files(built):
    _, net, cert = built
    assert json.loads(net.read_text())["format"] == "floor-relu-network"
    c = json.loads(cert.read_text())
    assert c["width"] <= 23 and c["depth"] <= 259


def test_verify_passes_and_writes_report(built, capsys):
    d, net, cert = built
    rep = d / "rep.json"
    capsys.readouterr()
    assert run(["verify", "--net", str(net), "--cert", str(cert), "--grid", "32", "--report", str(rep)]) == 0
    assert json.loads(rep.read_text())["passed"] is True
    assert out_json(capsys)["passed"] is True


def test_verify_reports_are_byte_identical(built):
    d, net, cert = built
    paths = [d / "a.json", d / "b.json"]
    for p in paths:
        assert run(["verify", "--net", str(net), "--cert", str(cert), "--samples", "50", "--seed", "3",
                    "--report", str(p), "--csv", str(p.with_suffix(".csv"))]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert paths[0].with_suffix(".csv").read_text().startswith("x1,x2,f,phi,abs_err\n")


def test_verify_detects_size_mismatch(built, tmp_path):
    _, net, cert = built
    c = json.loads(cert.read_text())
    c["depth"] += 1
    bad = tmp_path / "c.json"
    bad.write_text(json.dumps(c))
    assert run(["verify", "--net", str(net), "--cert", str(bad), "--samples", "5"]) == 1


def test_extract_fitter_check(capsys):
    assert run(["extract", "--mode", "fitter", "--N", "2", "--L", "3", "--bits", "10010110", "--check"]) == 0
    out = out_json(capsys)
    assert out["check"] == "pass" and out["depth"] == 19
    assert [out["values"][str(m)] for m in range(1, 9)] == list("10010110")


def test_extract_sweep(capsys):
    assert run(["extract", "--mode", "block", "--N", "2", "--J", "2", "--check"]) == 0
    assert out_json(capsys)["patterns"] == 16


@pytest.mark.parametrize("argv", [
    ["extract", "--mode", "fitter", "--N", "2", "--L", "3", "--bits", "101"],
    ["build", "--target", "mean", "--N", "2", "--L", "1", "--out", "x.json", "--M", "3/2^1"],
    ["build", "--target", "nosuch", "--N", "2", "--L", "1", "--out", "x.json"],
    ["build", "--N", "2", "--L", "1", "--out", "x.json", "--bogus"],
    ["eval", "--net", "/nonexistent/net.json", "--samples", "1"],
    ["bounds", "--kind", "budget"],
])
def test_usage_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(argv) == 2


@pytest.mark.parametrize("cmd", SUBCOMMANDS)
def test_every_subcommand_has_help(cmd, capsys):
    assert run([cmd, "--help"]) == 0
    text = capsys.readouterr().out
    assert "usage:" in text
    for action in make_parser()._subparsers._group_actions[0].choices[cmd]._actions:
        for opt in action.option_strings:
            assert opt in text


def test_eval_modes(built, capsys):
    _, net, _ = built
    assert run(["eval", "--net", str(net), "--x", "1/2^1,1/2^2", "--mode", "exact"]) == 0
    exact = out_json(capsys)["results"][0]["y"][0]["float"]
    bound = json.loads((built[0] / "cert.json").read_text())["error_bound"]
    assert abs(exact - 0.375) <= int(bound["m"]) * 2.0 ** bound["e"]
    # float mode may legitimately disagree here: the constants carry hundreds of bits
    assert run(["eval", "--net", str(net), "--samples", "3", "--mode", "float"]) == 0
    assert len(out_json(capsys)["results"]) == 3


def test_bounds_and_targets(capsys):
    assert run(["bounds", "--kind", "theorem2", "--target", "mean", "--N", "2", "--L", "2"]) == 0
    assert out_json(capsys)["float"] == pytest.approx(0.375)
    assert run(["bounds", "--kind", "holder", "--holder", "1", "1", "--N", "2", "--L", "4"]) == 0
    assert out_json(capsys)["float"] == 0.75
    assert run(["bounds", "--kind", "budget", "--W", "1"]) == 0
    assert out_json(capsys)["depth"] == 67
    assert run(["targets"]) == 0
    assert {t["name"] for t in out_json(capsys)} >= {"mean", "product", "min", "spike", "const"}


def test_demo_and_probe(capsys):
    assert run(["demo", "--N", "2", "--L", "4", "--seed", "1"]) == 0
    out = out_json(capsys)
    assert out["points"] == 16 and out["all_exact"] and out["width"] == 6
    assert run(["probe", "--N", "2", "--L", "2"]) == 0
    assert out_json(capsys)["diverged"] == 0


def test_wrapped_domain_build_and_verify(tmp_path):
    net, cert = tmp_path / "n.json", tmp_path / "c.json"
    assert run(["build", "--target", "spike", "--d", "2", "--N", "2", "--L", "1", "--theorem", "2",
                "--M", "1/2^1", "--out", str(net), "--cert", str(cert)]) == 0
    assert run(["verify", "--net", str(net), "--cert", str(cert), "--samples", "100"]) == 0
