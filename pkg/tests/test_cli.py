import subprocess
import sys

import pytest

from ibcnfc.cli import main


@pytest.fixture
def pkg_files(tmp_path):
    state, params = tmp_path / "pkg.state", tmp_path / "pkg.params"
    rc = main(["params", "--q-bits", "64", "--p-bits", "128", "--out", str(state),
               "--params-out", str(params), "--token", "t0k", "--seed", "1"])
    assert rc == 0
    return state, params


def test_full_pipeline(tmp_path, pkg_files, capsys):
    state, params = pkg_files
    key = tmp_path / "alice.key"
    assert main(["extract", "--identity", "+34 600-111-222", "--token", "t0k",
                 "--state", str(state), "--out", str(key)]) == 0
    msg = tmp_path / "msg.bin"
    msg.write_bytes(bytes(range(256)) * 5)
    ct, out = tmp_path / "msg.ibe", tmp_path / "msg.out"
    assert main(["encrypt", "--to", "+34600111222", "--in", str(msg), "--out", str(ct), "--params", str(params)]) == 0
    assert main(["decrypt", "--key", str(key), "--in", str(ct), "--out", str(out), "--params", str(params)]) == 0
    assert out.read_bytes() == msg.read_bytes()

    ct.write_bytes(ct.read_bytes()[:-1] + bytes([ct.read_bytes()[-1] ^ 1]))
    capsys.readouterr()
    assert main(["decrypt", "--key", str(key), "--in", str(ct), "--out", str(out), "--params", str(params)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error:") and err.count("\n") == 1


def test_extract_refusals(tmp_path, pkg_files, capsys):
    state, _ = pkg_files
    out = str(tmp_path / "k")
    assert main(["extract", "--identity", "+34600111222", "--token", "wrong", "--state", str(state), "--out", out]) == 1
    assert "authentication failed" in capsys.readouterr().err
    assert main(["extract", "--identity", "12345", "--token", "t0k", "--state", str(state), "--out", out]) == 1
    assert "invalid identity" in capsys.readouterr().err


def test_missing_file_is_domain_error(tmp_path, capsys):
    rc = main(["encrypt", "--to", "+34600111222", "--in", str(tmp_path / "nope"),
               "--out", str(tmp_path / "x"), "--params", str(tmp_path / "nope")])
    assert rc == 1 and capsys.readouterr().err.startswith("error:")


def test_usage_errors():
    for argv in ([], ["bench", "--sizes", ""], ["pair-sim", "--loss", "2"], ["frobnicate"],
                 ["pkg-serve", "--state", "x", "--listen", "nowhere"]):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2


def test_pkg_serve_and_remote_extract(tmp_path, pkg_files):
    state, params = pkg_files
    proc = subprocess.Popen(
        [sys.executable, "-m", "ibcnfc", "pkg-serve", "--state", str(state),
         "--listen", "127.0.0.1:0", "--max-requests", "2"],
        stdout=subprocess.PIPE, text=True,
    )
    try:
        line = proc.stdout.readline()
        assert line.startswith("listening on ")
        addr = line.split()[-1]
        key, fetched = tmp_path / "k", tmp_path / "p"
        assert main(["extract", "--identity", "+34600111222", "--token", "t0k", "--pkg", addr,
                     "--out", str(key), "--params-out", str(fetched)]) == 0
        assert fetched.read_bytes() == params.read_bytes()
        assert proc.wait(timeout=30) == 0
    finally:
        proc.kill()


def test_pair_sim(capsys):
    assert main(["pair-sim", "--p-bits", "128", "--q-bits", "64"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert "ESTABLISHED" in out
    fps = [line.split(": ")[1] for line in out if "key fingerprint" in line]
    assert len(fps) == 2 and fps[0] == fps[1] != "-"


def test_pair_sim_tamper(capsys):
    assert main(["pair-sim", "--p-bits", "128", "--q-bits", "64", "--tamper"]) == 0
    out = capsys.readouterr().out
    assert "FAILED (tamper detected)" in out and "\nESTABLISHED" not in out


def test_pair_sim_total_loss(capsys):
    assert main(["pair-sim", "--p-bits", "128", "--q-bits", "64", "--loss", "1"]) == 0
    assert "FAILED" in capsys.readouterr().out


def test_bench_cli(capsys):
    assert main(["bench", "--sizes", "16,64", "--p-bits", "128", "--q-bits", "64", "--iterations", "5",
                 "--decimal", ","]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("# method=median-of-5")
    rows = [line.split("\t") for line in out[2:]]
    assert [r[1] for r in rows] == ["16", "64", "128", "512"]
    assert rows[2][2] == "7497,198" and rows[3][3] == "6998,858"
    assert "," in rows[0][2]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "ibcnfc", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "pair-sim" in res.stdout
