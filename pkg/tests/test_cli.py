import json

import pytest

from ptss.cli import main

from conftest import spec_path

BASE = spec_path("base_pa")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestCheck:
    def test_base_conforms(self, capsys):
        code, out, _ = run(capsys, "check", BASE)
        assert code == 0 and "verdict: conforms" in out

    def test_convex_violation_named(self, capsys):
        code, out, _ = run(capsys, "check", spec_path("eq1"), "--format", "convex")
        assert code == 1 and "condition 7" in out

    def test_parse_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.ptss"
        bad.write_text("spec x\nactions\n")
        code, _, err = run(capsys, "check", str(bad))
        assert code == 2 and "error" in err

    def test_missing_file(self, capsys):
        assert run(capsys, "check", "does-not-exist.ptss")[0] == 2

    def test_machine(self, capsys):
        code, out, _ = run(capsys, "check", spec_path("eq4"), "--output", "machine")
        doc = json.loads(out)
        assert code == 1 and doc["conforms"] is False


class TestDerive:
    def test_t5(self, capsys):
        code, out, _ = run(capsys, "derive", BASE, "--term", "t5")
        assert code == 0
        assert out.strip().splitlines() == ["a.(dirac(b.0) (+) 1/2 dirac(c.0)) --a--> {b.0: 1/2, c.0: 1/2}"]

    def test_stop(self, capsys):
        code, out, _ = run(capsys, "derive", BASE, "--term", "0")
        assert code == 0 and "no certain transitions" in out

    def test_incomplete_warns(self, capsys):
        code, out, _ = run(capsys, "derive", spec_path("negcycle"), "--term", "r")
        assert code == 0 and "model incomplete" in out
        assert run(capsys, "derive", spec_path("negcycle"), "--term", "r", "--require-complete")[0] == 1

    def test_needs_term(self, capsys):
        assert run(capsys, "derive", BASE)[0] == 2


class TestBisim:
    def test_convex_true(self, capsys):
        code, out, _ = run(capsys, "bisim", BASE, "t1", "t2", "--rel", "convex")
        assert code == 0 and out.strip() == "true"

    def test_reflexive(self, capsys):
        assert run(capsys, "bisim", BASE, "t4", "t4", "--rel", "strong")[0] == 0

    def test_explain(self, capsys):
        code, out, _ = run(capsys, "bisim", BASE, "t5", "t6", "--rel", "abstracted", "--explain", "--output", "machine")
        doc = json.loads(out)
        assert code == 1 and doc["verdict"] is False and doc["formula"]

    def test_incomplete_model(self, capsys):
        assert run(capsys, "bisim", spec_path("negcycle"), "r", "r")[0] == 2


class TestMc:
    def test_tt(self, capsys):
        assert run(capsys, "mc", BASE, "--term", "t3", "--formula", "tt")[0] == 0

    def test_false(self, capsys):
        assert run(capsys, "mc", BASE, "--term", "t6", "--formula", "<a>([<b>tt]_0 /\\ [<c>tt]_0)")[0] == 1

    def test_fragment_mismatch(self, capsys):
        code, _, err = run(capsys, "mc", BASE, "--term", "t5", "--formula", "<a>([<b>tt]_0 /\\ [<c>tt]_0)", "--logic", "o")
        assert code == 2 and "L_o" in err


class TestDistinguish:
    def test_found(self, capsys):
        code, out, _ = run(capsys, "distinguish", BASE, "t3", "t4", "--logic", "c", "--output", "machine")
        assert code == 0 and json.loads(out)["formula"]

    def test_bisimilar(self, capsys):
        assert run(capsys, "distinguish", BASE, "t1", "t2", "--logic", "c")[0] == 1


class TestProbe:
    def test_violation(self, capsys):
        code, out, _ = run(capsys, "probe", spec_path("eq4"), "--rel", "convex")
        assert code == 1 and "f([])" in out

    def test_vacuous(self, capsys):
        code, out, _ = run(capsys, "probe", BASE, "--trials", "0")
        assert code == 0 and "no violations in 0 trials" in out


class TestUsage:
    def test_unknown_command(self, capsys):
        assert run(capsys, "frobnicate")[0] == 2

    def test_bad_fuel(self, capsys):
        assert run(capsys, "derive", BASE, "--term", "t1", "--fuel", "0")[0] == 2

    def test_color(self, capsys, monkeypatch):
        monkeypatch.setenv("PTSS_COLOR", "1")
        _, out, _ = run(capsys, "bisim", BASE, "t1", "t2", "--rel", "convex")
        assert "\x1b[32m" in out

    @pytest.mark.parametrize("argv", [
        ("bisim", BASE, "t1", "t2", "--rel", "strong"),
        ("check", spec_path("eq2")),
        ("probe", spec_path("eq5"), "--rel", "obliterated"),
    ])
    def test_text_and_machine_agree(self, capsys, argv):
        text_code = run(capsys, *argv)[0]
        machine_code = run(capsys, *argv, "--output", "machine")[0]
        assert text_code == machine_code
