import pytest

from treeplan.cli import main

from conftest import PLAN_TEXTS


@pytest.fixture
def plan_file(tmp_path):
    def write(name):
        path = tmp_path / f"{name}.plan"
        path.write_text(PLAN_TEXTS[name] + "\n")
        return str(path)

    return write


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExpand:
    def test_single_node(self, plan_file, capsys):
        code, out, _ = run(capsys, ["expand", "--plan", plan_file("single"), "--n", "1"])
        assert code == 0
        node_lines = [l for l in out.splitlines() if l.startswith("node,")]
        assert node_lines == ["node,eps,<>"]

    def test_plan_a_three_nodes(self, plan_file, capsys):
        code, out, _ = run(capsys, ["expand", "--plan", plan_file("A"), "--n", "2"])
        assert code == 0
        node_lines = [l for l in out.splitlines() if l.startswith("node,")]
        assert len(node_lines) == 3
        assert "fiber,0,2" in out

    def test_bad_plan_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.plan"
        path.write_text("(inf)")
        code, _, err = run(capsys, ["expand", "--plan", str(path), "--n", "1"])
        assert code == 2 and "parse error" in err

    def test_budget_exits_3(self, plan_file, capsys):
        code, _, err = run(
            capsys,
            ["expand", "--plan", plan_file("B"), "--n", "5", "--budget", "10"],
        )
        assert code == 3 and "budget" in err


class TestVerify:
    def test_corpus_plan_passes(self, plan_file, capsys):
        code, out, _ = run(capsys, ["verify", "--plan", plan_file("D"), "--n", "3"])
        assert code == 0
        assert out.startswith("plan,quantity,n,observed,predicted,pass")
        assert ",false" not in out

    def test_budget(self, plan_file, capsys):
        code, _, _ = run(
            capsys, ["verify", "--plan", plan_file("B"), "--n", "6", "--budget", "20"]
        )
        assert code == 3

    def test_pretty(self, plan_file, capsys):
        code, out, _ = run(
            capsys, ["verify", "--plan", plan_file("A"), "--n", "2", "--pretty"]
        )
        assert code == 0 and "," not in out.splitlines()[0]


class TestEf:
    def test_above_threshold_duplicator_wins(self, plan_file, capsys):
        code, out, _ = run(
            capsys,
            ["ef", "--plan", plan_file("A"), "--n1", "3", "--n2", "8", "--k", "2"],
        )
        assert code == 0 and out.strip().endswith("winner=D")

    def test_zero_rounds(self, plan_file, capsys):
        code, out, _ = run(
            capsys,
            ["ef", "--plan", plan_file("A"), "--n1", "1", "--n2", "2", "--k", "0"],
        )
        assert code == 0

    def test_below_threshold_spoiler_wins(self, plan_file, capsys):
        code, out, _ = run(
            capsys,
            ["ef", "--plan", plan_file("A"), "--n1", "1", "--n2", "2", "--k", "2"],
        )
        assert code == 1 and out.strip().endswith("winner=S")

    def test_seeded_random_deterministic(self, plan_file, capsys):
        argv = [
            "ef", "--plan", plan_file("B"), "--n1", "2", "--n2", "3",
            "--k", "2", "--spoiler", "random", "--seed", "9",
        ]
        code1, out1, _ = run(capsys, argv)
        code2, out2, _ = run(capsys, argv)
        assert (code1, out1) == (code2, out2)


class TestCheck:
    def test_tautology(self, plan_file, capsys):
        code, out, _ = run(
            capsys,
            ["check", "--plan", plan_file("A"), "--n", "2", "--formula", "forall x. x = x"],
        )
        assert code == 0 and out.strip() == "true"

    def test_count(self, plan_file, capsys):
        code, out, _ = run(
            capsys,
            [
                "check", "--plan", plan_file("C"), "--n", "3",
                "--formula", "pred(x) = eps & P[0](x)",
            ],
        )
        assert code == 0 and out.strip() == "3"

    def test_false_sentence(self, plan_file, capsys):
        code, out, _ = run(
            capsys,
            ["check", "--plan", plan_file("single"), "--n", "1",
             "--formula", "exists x. !(x = eps)"],
        )
        assert code == 1 and out.strip() == "false"

    def test_syntax_error(self, plan_file, capsys):
        code, _, err = run(
            capsys,
            ["check", "--plan", plan_file("A"), "--n", "2", "--formula", "x = "],
        )
        assert code == 2 and "parse error" in err


class TestAsymptotic:
    def test_plan_c_report(self, plan_file, capsys):
        code, out, _ = run(
            capsys,
            [
                "asymptotic", "--plan", plan_file("C"), "--formula", "P[0](x)",
                "--ladder", "10,20,50", "--tol", "0.02",
            ],
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "n,observed,delta,mu,predicted,ratio,pass"
        assert len(lines) == 4
        assert lines[-1].startswith("50,50,1,0.500000")


class TestInfer:
    def test_round_trip(self, tmp_path, capsys):
        from treeplan import expand, parse_plan

        p = parse_plan(PLAN_TEXTS["D"])
        for n, name in ((2, "t1"), (3, "t2")):
            e = expand(p, n)
            lines = []
            order = {v: i for i, v in enumerate(e.nodes())}
            for v in e.nodes():
                lines.append("-1" if not v.segs else str(order[v.parent()]))
            (tmp_path / name).write_text("\n".join(lines) + "\n")
        code, out, _ = run(
            capsys, ["infer", str(tmp_path / "t1"), str(tmp_path / "t2")]
        )
        assert code == 0
        from treeplan import plan_isomorphic

        assert plan_isomorphic(parse_plan(out.strip()), p)

    def test_single_nodes(self, tmp_path, capsys):
        (tmp_path / "a").write_text("(1)")
        (tmp_path / "b").write_text("-1")
        code, out, _ = run(capsys, ["infer", str(tmp_path / "a"), str(tmp_path / "b")])
        assert code == 0 and out.strip() == "(1)"

    def test_inconsistent_exits_4(self, tmp_path, capsys):
        from treeplan import expand, parse_plan

        t1 = expand(parse_plan(PLAN_TEXTS["B"]), 2)
        t2 = expand(parse_plan(PLAN_TEXTS["C"]), 3)
        for name, e in (("t1", t1), ("t2", t2)):
            order = {v: i for i, v in enumerate(e.nodes())}
            lines = ["-1" if not v.segs else str(order[v.parent()]) for v in e.nodes()]
            (tmp_path / name).write_text("\n".join(lines))
        code, _, err = run(capsys, ["infer", str(tmp_path / "t1"), str(tmp_path / "t2")])
        assert code == 4 and "inference error" in err


class TestDividing:
    def test_spec_example(self, plan_file, capsys):
        code, out, _ = run(
            capsys,
            [
                "dividing", "--plan", plan_file("B"), "--n", "3",
                "--a", "0:0/0:1", "--b", "0:0", "--c", "",
            ],
        )
        assert code == 0
        assert "divides=true" in out
        assert "witness=0:0" in out
        assert "conjugates=0:0,0:1,0:2" in out
        assert "two_inconsistent=true" in out

    def test_not_dividing(self, plan_file, capsys):
        code, out, _ = run(
            capsys,
            [
                "dividing", "--plan", plan_file("B"), "--n", "3",
                "--a", "0:0/0:1", "--b", "", "--c", "",
            ],
        )
        assert code == 0 and out.strip() == "divides=false"

    def test_member_of_c_never_divides(self, plan_file, capsys):
        code, out, _ = run(
            capsys,
            [
                "dividing", "--plan", plan_file("B"), "--n", "3",
                "--a", "0:0", "--b", "0:0", "--c", "0:0",
            ],
        )
        assert code == 0 and out.strip() == "divides=false"


class TestOutput:
    def test_out_file(self, plan_file, tmp_path, capsys):
        target = tmp_path / "report.csv"
        code, out, _ = run(
            capsys,
            ["verify", "--plan", plan_file("A"), "--n", "2", "--out", str(target)],
        )
        assert code == 0 and out == ""
        assert target.read_text().startswith("plan,quantity")
