import json
import subprocess
import sys

import pytest

from zndstab import cli
from zndstab.cli import EXIT_CONFIG, EXIT_GATE, EXIT_OK, EXIT_RUNTIME, main
from zndstab.stability import ConsistencyError

BASE = {
    "model": {"gamma": 1.3, "q": 3.0, "E_act": 25.0},
    "detonation": {"mach": 3.5, "half_reaction_length": 1.0},
    "frequencies": {"zeta_i": [1.55, 1.58, 1.59], "eps_min": 10.0, "eps_max": 60.0},
    "verify": {"zeta_i": 1.59, "periods": 1, "exact": False},
    "tasks": ["profile", "classify", "sweep"],
    "output": {"formats": ["json", "csv"]},
}


def _write(tmp_path, cfg, name="run.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def _cfg(**over):
    cfg = json.loads(json.dumps(BASE))
    for k, v in over.items():
        cfg[k] = v
    return cfg


def test_profile_command(tmp_path):
    out = tmp_path / "out"
    assert main(["profile", "--config", _write(tmp_path, _cfg()), "--out", str(out)]) == EXIT_OK
    data = json.loads((out / "profile.json").read_text())
    assert data["ptype"] == "I"
    assert "frequency_classes" in data
    assert {r["class"] for r in data["frequency_classes"]["rows"]} == {"III_plus"}
    assert (out / "profile.csv").exists()


def test_sweep_is_deterministic(tmp_path):
    cfg = _write(tmp_path, _cfg())
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["sweep", "--config", cfg, "--out", str(a), "--jobs", "1"]) == EXIT_OK
    assert main(["sweep", "--config", cfg, "--out", str(b), "--jobs", "3"]) == EXIT_OK
    for name in ("stability_report.json", "stability_report.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    rep = json.loads((a / "stability_report.json").read_text())["report"]
    assert rep["rows"][-1]["verdict"] == "unstable_hf"


def test_format_flag(tmp_path):
    out = tmp_path / "out"
    argv = ["sweep", "--config", _write(tmp_path, _cfg()), "--out", str(out), "--format", "csv"]
    assert main(argv) == EXIT_OK
    assert sorted(p.name for p in out.iterdir()) == ["stability_report.csv"]


def test_verify_command(tmp_path):
    out = tmp_path / "out"
    assert main(["verify", "--config", _write(tmp_path, _cfg()), "--out", str(out)]) == EXIT_OK
    rows = json.loads((out / "verify.json").read_text())["rows"]
    assert [r["winding"] for r in rows] == [1, 0, 1, 0]


@pytest.mark.parametrize("mutate", [
    lambda c: c["model"].update(gama=1.3),
    lambda c: c.update(extra=1),
    lambda c: c["detonation"].update(mach=2.0),
    lambda c: c["detonation"].update(overdrive=2.0),
    lambda c: c.update(tasks=["dance"]),
    lambda c: c["verify"].update(control_offset=0.05),
    lambda c: c["frequencies"].update(eps_min=80.0),
])
def test_config_errors_write_nothing(tmp_path, mutate):
    cfg = _cfg()
    mutate(cfg)
    out = tmp_path / "out"
    assert main(["sweep", "--config", _write(tmp_path, cfg), "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()


def test_argument_errors(tmp_path):
    assert main(["explode"]) == EXIT_CONFIG
    assert main(["sweep"]) == EXIT_CONFIG
    assert main(["sweep", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    cfg = _write(tmp_path, _cfg())
    assert main(["sweep", "--config", cfg, "--jobs", "0"]) == EXIT_CONFIG
    (tmp_path / "bad.json").write_text("{")
    assert main(["profile", "--config", str(tmp_path / "bad.json")]) == EXIT_CONFIG


def test_runtime_failure_writes_nothing(tmp_path):
    cfg = _cfg(verify={"zeta_i": 1.0, "exact": False})
    out = tmp_path / "out"
    assert main(["verify", "--config", _write(tmp_path, cfg), "--out", str(out)]) == EXIT_RUNTIME
    assert not out.exists()


def test_consistency_gate(tmp_path, monkeypatch):
    import zndstab.stability as st

    def broken(*a, **k):
        raise ConsistencyError("L1 dual evaluation mismatch")

    monkeypatch.setattr(st, "L_dual", broken)
    out = tmp_path / "out"
    assert main(["sweep", "--config", _write(tmp_path, _cfg()), "--out", str(out)]) == EXIT_GATE
    assert not out.exists()


def test_crosscheck_gate_exit(tmp_path, monkeypatch):
    from zndstab import acceptance
    from zndstab.acceptance import CheckResult

    monkeypatch.setattr(acceptance, "ALL_CHECKS", (
        lambda: CheckResult(1, "ok", True, {}, ""),
        lambda: CheckResult(2, "bad", False, {}, "forced"),
    ))
    out = tmp_path / "out"
    assert main(["crosscheck", "--out", str(out)]) == EXIT_GATE
    res = json.loads((out / "crosscheck.json").read_text())
    assert [r["passed"] for r in res] == [True, False]


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "zndstab", "profile", "--config",
                        _write(tmp_path, _cfg()), "--out", str(tmp_path / "o"),
                        "--format", "json"], capture_output=True, text=True)
    assert r.returncode == EXIT_OK, r.stderr
    assert "profile type I" in r.stdout


def test_clean_serializes_special_values():
    assert cli._clean({"a": float("nan"), "b": 1 + 2j}) == {"a": None, "b": [1.0, 2.0]}
