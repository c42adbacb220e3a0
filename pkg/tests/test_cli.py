import json
import subprocess
import sys

import numpy as np
import pytest

from stereocue.cli import main, read_manifest
from stereocue.wavio import read_wav, write_wav


@pytest.fixture
def scene_dir(tmp_path):
    assert main(["simulate", str(tmp_path / "scenes"), "--count", "2", "--duration", "2", "--overlap", "0.2"]) == 0
    return tmp_path / "scenes"


def test_simulate_layout(scene_dir):
    pairs = read_manifest(scene_dir / "manifest.txt")
    assert len(pairs) == 2 and all(p.exists() and q.exists() for p, q in pairs)
    assert json.loads((scene_dir / "scene_000" / "metadata.json").read_text())["overlap_ratio"] == 0.2


def test_enhance_specsub(scene_dir, tmp_path):
    out, rep = tmp_path / "out.wav", tmp_path / "rep.json"
    rc = main(["enhance", "--mode", "dual-proposed", "--enhancer", "specsub",
               str(scene_dir / "scene_000" / "mixture.wav"), str(out), "--report", str(rep)])
    assert rc == 0
    y, sr = read_wav(out)
    x, _ = read_wav(scene_dir / "scene_000" / "mixture.wav")
    assert y.shape == x.shape and sr == 16000
    r = json.loads(rep.read_text())
    assert r["mode"] == "dual-proposed" and r["rtf"] > 0 and r["latency_ms"] == 40.0


def test_enhance_passthrough_identity(scene_dir, tmp_path):
    src = scene_dir / "scene_001" / "mixture.wav"
    assert main(["enhance", "--mode", "dual-proposed", "--enhancer", "passthrough", str(src), str(tmp_path / "p.wav")]) == 0
    x, _ = read_wav(src)
    y, _ = read_wav(tmp_path / "p.wav")
    assert np.max(np.abs(x - y)) <= 1e-5


def test_invalid_mode_exit_2(capsys, tmp_path):
    with pytest.raises(SystemExit) as e:
        main(["enhance", "--mode", "triple", "a.wav", "b.wav"])
    assert e.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_bad_config_exit_2(tmp_path, scene_dir, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"mode": "triple"}))
    rc = main(["enhance", "--config", str(cfg), str(scene_dir / "scene_000" / "mixture.wav"), str(tmp_path / "o.wav")])
    assert rc == 2 and "usage" in capsys.readouterr().err


def test_config_precedence(tmp_path, scene_dir):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"mode": "dual-nsv", "lookahead": 1}))
    rep = tmp_path / "r.json"
    src = str(scene_dir / "scene_000" / "mixture.wav")
    assert main(["enhance", "--config", str(cfg), src, str(tmp_path / "o.wav"), "--report", str(rep)]) == 0
    r = json.loads(rep.read_text())
    assert r["mode"] == "dual-nsv" and r["latency_ms"] == 20.0
    assert main(["enhance", "--config", str(cfg), "--mode", "discrete", src, str(tmp_path / "o.wav"), "--report", str(rep)]) == 0
    r = json.loads(rep.read_text())
    assert r["mode"] == "discrete" and r["latency_ms"] == 20.0


def test_bad_wav_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.wav"
    bad.write_bytes(b"xx")
    assert main(["enhance", str(bad), str(tmp_path / "o.wav")]) == 1
    assert "error" in capsys.readouterr().err
    write_wav(tmp_path / "mono.wav", np.zeros((1, 100)), 16000)
    assert main(["enhance", str(tmp_path / "mono.wav"), str(tmp_path / "o.wav")]) == 1


def test_evaluate_identity_and_missing(scene_dir, tmp_path, capsys):
    clean = str(scene_dir / "scene_000" / "clean.wav")
    assert main(["evaluate", clean, "--reference", clean, "--label", "x"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    row = lines[1].split(",")
    assert float(row[2]) == 0.0 and float(row[3]) == 0.0
    assert main(["evaluate", clean, "--reference", str(tmp_path / "none.wav")]) == 1
    assert main(["evaluate", clean]) == 2


def test_evaluate_channel_mismatch(scene_dir, tmp_path):
    write_wav(tmp_path / "mono.wav", np.zeros((1, 32000)), 16000)
    assert main(["evaluate", str(tmp_path / "mono.wav"), "--reference", str(scene_dir / "scene_000" / "clean.wav")]) == 1


def test_evaluate_manifest(scene_dir, tmp_path):
    rep = tmp_path / "m.json"
    rc = main(["evaluate", "--manifest", str(scene_dir / "manifest.txt"), "--modes", "discrete,dual-proposed",
               "--enhancer", "oracle", "--report", str(rep)])
    assert rc == 0
    rows = json.loads(rep.read_text())
    assert [r["mode"] for r in rows] == ["discrete", "dual-proposed"] * 2
    d = np.mean([r["ipd_error"] for r in rows if r["mode"] == "dual-proposed"])
    s = np.mean([r["ipd_error"] for r in rows if r["mode"] == "discrete"])
    assert d < s
    assert main(["evaluate", "--manifest", str(scene_dir / "manifest.txt"), "--modes", "bogus"]) == 2


def test_bench(tmp_path):
    rep = tmp_path / "b.json"
    assert main(["bench", "--duration", "2", "--report", str(rep)]) == 0
    rows = json.loads(rep.read_text())
    assert len(rows) == 5 and all(0 < r["rtf"] < 1 for r in rows)


def test_deterministic_outputs(tmp_path):
    for d in ("a", "b"):
        assert main(["simulate", str(tmp_path / d), "--duration", "1", "--seed", "3"]) == 0
    a, _ = read_wav(tmp_path / "a" / "scene_000" / "mixture.wav")
    b, _ = read_wav(tmp_path / "b" / "scene_000" / "mixture.wav")
    assert np.array_equal(a, b)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "stereocue", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "enhance" in r.stdout
    r = subprocess.run([sys.executable, "-m", "stereocue", "enhance"], capture_output=True, text=True)
    assert r.returncode == 2 and "usage" in r.stderr
