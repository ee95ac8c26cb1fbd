import json

import pytest

from quantalg.cli import main

MP_THEORY = "sum(sum(bary, exc{1}), contr{next, 1/2})"


@pytest.fixture
def files(tmp_path):
    (tmp_path / "S.space").write_text(
        "space S { points: x, y; d(x,y) = 1; }\n")
    (tmp_path / "t.term").write_text("conv(1/2, x, y)\n")
    (tmp_path / "s.term").write_text("y\n")
    (tmp_path / "mealy.coalg").write_text(
        "mealy M { c = 1/2; inputs: i;\n"
        "  state p on i -> (p, 1);\n"
        "  state q on i -> (q, 2);\n"
        "}\n")
    return tmp_path


def test_dist_verb(files, capsys):
    code = main(["dist", "--theory", "bary", "--space", str(files / "S.space"),
                 str(files / "t.term"), str(files / "s.term")])
    assert code == 0
    assert capsys.readouterr().out.strip() == "1/2"


def test_dist_inline_and_record(files, capsys):
    code = main(["dist", "--theory", "bary", "--space", str(files / "S.space"),
                 "--inline", "--format", "record",
                 "conv(1/2, x, y)", "y"])
    assert code == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["distance"] == "1/2"


def test_dist_inf_output(files, capsys):
    code = main(["dist", "--theory", MP_THEORY, "--inline",
                 "raise(*)", "next(raise(*))"])
    assert code == 0
    assert capsys.readouterr().out.strip() == "inf"


def test_normalize_verb(capsys):
    code = main(["normalize", "--theory", "writer{q}", "--inline",
                 "wr(2, wr(3, x))"])
    assert code == 0
    assert capsys.readouterr().out.strip() == "Pair(5, x)"


def test_bisim_verb(files, capsys):
    code = main(["bisim", "--tol", "1/1000", str(files / "mealy.coalg")])
    assert code == 0
    out = capsys.readouterr().out
    assert "d(p,q) = 2047/1024" in out
    assert "iterations=11" in out


def test_unfold_round_trip(files, tmp_path, capsys):
    code = main(["unfold", "--theory", MP_THEORY, "--inline",
                 "next(conv(1/2, raise(*), next(raise(*))))"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("# root = s0")
    coalg = tmp_path / "out.coalg"
    coalg.write_text("".join(line + "\n" for line in out.splitlines()
                             if not line.startswith("#")))
    code = main(["bisim", "--tol", "1/8", str(coalg)])
    assert code == 0
    assert "exact=yes" in capsys.readouterr().out


def test_deterministic_output(files, capsys):
    args = ["bisim", "--tol", "1/100", "--format", "record", str(files / "mealy.coalg")]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first


def test_check_model_verb(tmp_path, capsys):
    (tmp_path / "S.space").write_text("space S { points: p, q; d(p,q) = 1; }\n")
    (tmp_path / "A.alg").write_text(
        "algebra A {\n"
        "  carrier: S;\n"
        "  op union: (p, p) -> p; (p, q) -> q; (q, p) -> q; (q, q) -> q;\n"
        "  op empty: -> p;\n"
        "}\n")
    code = main(["check-model", "--theory", "semi",
                 "--space", str(tmp_path / "S.space"),
                 "--epsilons", "1", str(tmp_path / "A.alg")])
    assert code == 0
    assert "RESULT: pass" in capsys.readouterr().out


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.term"
    bad.write_text("conv(1/2, x")
    code = main(["dist", "--theory", "bary", str(bad), str(bad)])
    assert code == 2
    assert "parse error" in capsys.readouterr().err


def test_domain_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.coalg"
    bad.write_text("mp B { c = 1/2; state u: 1/2 -> u; }")
    code = main(["bisim", str(bad)])
    assert code == 1
    assert "mass" in capsys.readouterr().err


def test_ill_formed_term_rejected(capsys):
    code = main(["dist", "--theory", "bary", "--inline",
                 "union(x, y)", "x"])
    assert code == 1
    assert "not well formed" in capsys.readouterr().err


def test_unfold_round_trip_agrees_with_term_dist(tmp_path, capsys):
    from fractions import Fraction

    from quantalg import BOUNDED, parse_coalgebras, solve_bisim, term_dist
    from quantalg.bisim import disjoint_union
    from quantalg.terms import parse_term
    from quantalg.theories import markov_process_theory

    th = markov_process_theory(Fraction(1, 2))
    t = parse_term("next(conv(1/2, raise(*), next(raise(*))))", th)
    s = parse_term("next(raise(*))", th)
    texts = []
    for term_text in ("next(conv(1/2, raise(*), next(raise(*))))",
                      "next(raise(*))"):
        assert main(["unfold", "--theory", MP_THEORY, "--inline", term_text]) == 0
        out = capsys.readouterr().out
        root = out.splitlines()[0].split("=")[1].strip()
        texts.append(("".join(l + "\n" for l in out.splitlines()[1:]), root))
    A = parse_coalgebras(texts[0][0].replace("unfolded", "A"))["A"]
    B = parse_coalgebras(texts[1][0].replace("unfolded", "B"))["B"]
    U = disjoint_union(A, B)
    d, cert = solve_bisim(U, Fraction(1, 10**9), BOUNDED)
    assert cert.exact
    assert d.d(f"a.{texts[0][1]}", f"b.{texts[1][1]}") == \
        term_dist(t, s, th, None, BOUNDED)


def test_decimal_rendering_flag(files, capsys):
    code = main(["dist", "--theory", "bary", "--space", str(files / "S.space"),
                 "--inline", "--decimal", "3", "conv(1/2, x, y)", "y"])
    assert code == 0
    assert capsys.readouterr().out.strip() == "1/2 (0.500)"


def test_console_script_installed():
    import shutil
    import subprocess

    exe = shutil.which("quantalg")
    if exe is None:
        pytest.skip("entry point not on PATH")
    out = subprocess.run([exe, "normalize", "--theory", "writer{q}",
                          "--inline", "wr(2, wr(3, x))"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert out.stdout.strip() == "Pair(5, x)"


def test_unfold_is_deterministic(capsys):
    term = "next(conv(1/3, raise(*), next(conv(1/2, raise(*), next(raise(*))))))"
    outs = []
    for _ in range(2):
        assert main(["unfold", "--theory", MP_THEORY, "--inline", term]) == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_mdp_unfold_and_bisim_end_to_end(tmp_path, capsys):
    theory = "sum(tensor(tensor(bary, writer{q}), reader{a}), contr{next, 1/2})"
    (tmp_path / "S.space").write_text("space S { points: x, y; d(x,y) = 1; }\n")
    term = "rd(conv(1/2, wr(3, next(rd(wr(0, x)))), wr(0, y)))"
    code = main(["unfold", "--theory", theory, "--space", str(tmp_path / "S.space"),
                 "--inline", term])
    assert code == 0
    out = capsys.readouterr().out
    assert out.splitlines()[1].startswith("mdp ")
    coalg = tmp_path / "m.coalg"
    coalg.write_text("".join(l + "\n" for l in out.splitlines()[1:]))
    code = main(["bisim", "--tol", "1/1000", "--space", str(tmp_path / "S.space"),
                 str(coalg)])
    assert code == 0
    assert "certificate" in capsys.readouterr().out
