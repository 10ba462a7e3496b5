import socket
import subprocess
import sys

import pytest

from tspa import cli
from tspa.adversary import AttackReport
from tspa.codec import ClockPolicy
from tspa.messages import Scheme
from tspa.transport import files
from tspa.transport.service import default_policy, serve


def run(*argv):
    return cli.main(list(argv))


@pytest.fixture
def keyfile(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    path = tmp_path / "kic.key"
    assert run("kic", "setup", "--bits", "128", "--seed", "3", "--key-file", str(path)) == 0
    return path


def test_setup_is_deterministic(tmp_path):
    a, b = tmp_path / "a.key", tmp_path / "b.key"
    for p in (a, b):
        assert run("kic", "setup", "--bits", "64", "--seed", "7", "--key-file", str(p)) == 0
    assert a.read_text() == b.read_text()


def test_register_login_renew(keyfile, tmp_path):
    assert run("kic", "register", "alice", "--key-file", str(keyfile), "--password", "pw") == 0
    assert (tmp_path / "alice.card").exists()
    assert run("kic", "register", "alice", "--key-file", str(keyfile), "--password", "pw") == 3
    kic = files.load_kic(keyfile)
    for scheme in Scheme:
        with serve(kic.params, scheme, default_policy(scheme, ClockPolicy(), kic.id_policy)) as h:
            addr = "%s:%d" % h.address
            assert run("login", "alice", "--scheme", scheme.label, "--addr", addr,
                       "--password", "pw") == 0
            assert run("login", "alice", "--scheme", scheme.label, "--addr", addr,
                       "--password", "bad") == 3
    assert run("kic", "renew", "alice", "--key-file", str(keyfile), "--password", "bad",
               "--new-password", "pw2") == 3
    assert run("kic", "renew", "alice", "--key-file", str(keyfile), "--password", "pw",
               "--new-password", "pw2") == 0
    with serve(kic.params, Scheme.IMPROVED, default_policy(Scheme.IMPROVED)) as h:
        addr = "%s:%d" % h.address
        assert run("login", "alice", "--addr", addr, "--password", "pw2") == 0


def test_login_network_error(keyfile, tmp_path):
    run("kic", "register", "bob", "--key-file", str(keyfile), "--password", "pw")
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    assert run("login", "bob", "--addr", f"127.0.0.1:{port}", "--password", "pw",
               "--timeout", "2") == 5


def test_missing_files_are_errors(tmp_path):
    assert run("kic", "register", "x", "--key-file", str(tmp_path / "nope"), "--password", "p") == 1


def test_usage_errors():
    with pytest.raises(SystemExit) as info:
        run("attack", "euclid")  # --scheme missing
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        run("matrix", "--toy-f", "1")
    assert info.value.code == 2


def test_attack_exit_codes(capsys, tmp_path):
    report = tmp_path / "r.txt"
    assert run("attack", "euclid", "--scheme", "shen", "--toy-f", "16", "--permissive-kic",
               "--report-file", str(report)) == 0
    assert run("attack", "inverse-id", "--scheme", "improved", "--toy-f", "16",
               "--permissive-kic", "--report-file", str(report)) == 3
    assert run("attack", "scale", "--scheme", "shen", "--toy-f", "65536",
               "--permissive-kic") == 4
    lines = report.read_text().splitlines()
    assert [AttackReport.from_line(ln).outcome for ln in lines] == ["accepted", "rejected"]


def test_matrix_output(capsys):
    assert run("matrix", "--toy-f", "16", "--permissive-kic") == 0
    out = capsys.readouterr().out
    table = out.split("\n\n")[-1].splitlines()
    assert table[0].split() == ["attack", "shen", "improved"]
    rows = {ln.split()[0]: ln.split()[1:] for ln in table[1:]}
    assert rows == {name: ["ACCEPTED", "REJECTED"]
                    for name in ("euclid", "scale", "inverse_id", "unity")}


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "tspa.cli", "--help"], capture_output=True,
                         text=True)
    assert res.returncode == 0 and "matrix" in res.stdout
