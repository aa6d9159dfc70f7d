import io
import subprocess
import sys

from ettx.cli import escape_line, main, unescape_line
from ettx.fixtures import SINGER_NAMES


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(map(str, argv)), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


def test_run_singers(data):
    code, out, err = run("run", "-s", data / "e1.msre", "-t", data / "t1.sst", "-i", data / "singers.txt")
    assert code == 0, err
    lines = out.splitlines()
    assert sorted(lines) == sorted(SINGER_NAMES)
    assert lines.count("Neil Young") == 2


def test_run_empty_input(data, tmp_path):
    doc = tmp_path / "empty.txt"
    doc.write_text("")
    code, out, _ = run("run", "-s", data / "one_symbol.msre", "-t", data / "first_symbol.sst", "-i", doc)
    assert code == 0 and out == ""


def test_first_symbol_program(data, tmp_path):
    doc = tmp_path / "d.txt"
    doc.write_text("xyz\n")
    code, out, _ = run("run", "-s", data / "one_symbol.msre", "-t", data / "first_symbol.sst", "-i", doc)
    assert code == 0 and out == "x\n"


def test_two_machines_vs_oracle_compose(data, tmp_path):
    doc = tmp_path / "d.txt"
    doc.write_text("abbab")
    code, out, _ = run("run", "-t", data / "garbage.sst", "-t", data / "reverse.sst", "-i", doc)
    assert code == 0
    _, ref, _ = run("oracle", "compose", "--first", data / "garbage.sst", "--second", data / "reverse.sst", "-i", doc)
    assert sorted(out.splitlines()) == sorted(ref.splitlines()) == ["bbb"]


def test_pipeline_strategies_agree(data):
    args = ["run", "-s", data / "e1.msre", "-t", data / "t1.sst", "-s", data / "reformat.msre",
            "-t", data / "reformat.sst", "-i", data / "toy.txt"]
    c1, fold, _ = run(*args)
    c2, nested, _ = run(*args, "--strategy", "nested")
    assert c1 == c2 == 0
    assert sorted(fold.splitlines()) == sorted(nested.splitlines())
    assert sorted(fold.splitlines()) == ["Bush, Kate", "Holiday, Billie", "Young, Neil", "Young, Neil"]


def test_run_with_oracle_and_stats(data):
    code, out, err = run("run", "-s", data / "e1.msre", "-t", data / "t1.sst", "-i", data / "toy.txt",
                         "--oracle", "--stats")
    assert code == 0
    assert "oracle: agree" in err
    assert "preprocessing_steps:" in err


def test_check(data, tmp_path):
    code, out, _ = run("check", data / "garbage.sst")
    assert code == 0
    assert "garbage-free: no" in out.splitlines()
    assert "branching factor: 2" in out.splitlines()
    _, out, _ = run("check", data / "t1.sst", "--alphabet", "ab;#")
    assert "copyless: yes" in out.splitlines()
    assert "garbage-free: yes" in out.splitlines()
    _, out, _ = run("check", data / "empty.sst")
    assert "branching factor: 0" in out.splitlines()


def test_errors_and_exit_codes(data, tmp_path):
    bad = tmp_path / "bad.sst"
    bad.write_text("states: q\nregisters: X\ntrans: q a nowhere\n")
    code, _, err = run("check", bad)
    assert code == 1
    assert "bad.sst:line 3" in err
    code, _, err = run("compose", "--first", data / "garbage.sst", "--second", data / "garbage.sst",
                       "--max-states", 1)
    assert code == 2
    code, _, err = run("run", "-t", data / "garbage.sst", "-i", tmp_path / "missing.txt")
    assert code == 1


def test_escaping_round_trip(data, tmp_path):
    doc = tmp_path / "d.txt"
    doc.write_text("a\\b\nc\n")
    code, out, _ = run("run", "-t", data / "copy.sst", "-i", doc)
    assert code == 0
    lines = out.split("\n")
    assert lines[-1] == "" and len(lines) == 2
    assert unescape_line(lines[0]) == "a\\b\nc"
    for s in ["", "\\", "\\n", "x\ny", "\\\\\n"]:
        assert unescape_line(escape_line(s)) == s
        assert "\n" not in escape_line(s)


def test_limit_and_config(data, tmp_path):
    conf = tmp_path / "ettx.toml"
    conf.write_text("# defaults\nlimit = 3\n")
    code, out, _ = run("--config", conf, "run", "-s", data / "e1.msre", "-t", data / "t1.sst",
                       "-i", data / "singers.txt")
    assert code == 0 and len(out.splitlines()) == 3
    code, out, _ = run("--config", conf, "run", "-s", data / "e1.msre", "-t", data / "t1.sst",
                       "-i", data / "singers.txt", "--limit", 5)
    assert len(out.splitlines()) == 5
    conf.write_text("colour = red\n")
    code, _, err = run("--config", conf, "check", data / "garbage.sst")
    assert code == 1


def test_compile_and_run_compiled(data, tmp_path):
    target = tmp_path / "prog.sst"
    code, _, _ = run("compile", "-s", data / "e1.msre", "-t", data / "t1.sst", "-i", data / "toy.txt",
                     "--garbage-free", "-o", target)
    assert code == 0
    code, out, _ = run("run", "-t", target, "-i", data / "toy.txt")
    assert code == 0
    assert sorted(out.splitlines()) == ["Billie Holiday", "Kate Bush", "Neil Young", "Neil Young"]


def test_compose_command(data, tmp_path):
    target = tmp_path / "c.sst"
    code, _, _ = run("compose", "--first", data / "garbage.sst", "--second", data / "reverse.sst", "-o", target)
    assert code == 0
    doc = tmp_path / "d.txt"
    doc.write_text("aab")
    _, out, _ = run("run", "-t", target, "-i", doc)
    assert out == "b\n"


def test_oracle_commands(data, tmp_path):
    doc = tmp_path / "d.txt"
    doc.write_text("ab")
    _, out, _ = run("oracle", "tuples", "-s", data / "one_symbol.msre", "-i", doc)
    assert out.count("\n") == 1 and "[1,2)" in out
    _, out, _ = run("oracle", "run", "-t", data / "garbage.sst", "-i", doc)
    assert out == "b\n"
    _, out, _ = run("oracle", "et", "-s", data / "one_symbol.msre", "-t", data / "first_symbol.sst", "-i", doc)
    assert out == "a\n"
    code, _, _ = run("oracle", "et", "-t", data / "first_symbol.sst", "-i", doc)
    assert code == 1


def test_dump_ecsa(data, tmp_path):
    doc = tmp_path / "d.txt"
    doc.write_text("ab")
    code, out, _ = run("dump-ecsa", "-t", data / "garbage.sst", "-i", doc)
    assert code == 0
    lines = out.splitlines()
    assert lines and all(len(line.split(maxsplit=4)) == 5 for line in lines)
    assert lines[0].split()[:4] == ["0", "nu", "-", "-"]
    dump = tmp_path / "d.dump"
    run("run", "-t", data / "garbage.sst", "-i", doc, "--dump-ecsa", dump)
    assert dump.read_text().strip()


def test_console_entry_point(data):
    proc = subprocess.run([sys.executable, "-m", "ettx", "check", str(data / "garbage.sst")],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "garbage-free: no" in proc.stdout
