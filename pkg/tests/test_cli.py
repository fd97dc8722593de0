"""End-to-end checks of the command-line interface.

Commands run in process through `mesospin.cli.main`, which returns the
exit code that the console script would report.
"""

import hashlib
import json
import math
import os

import numpy as np
import pytest

from mesospin import kitten_state
from mesospin.cli import main
from mesospin.config import config_to_json, default_config
from mesospin.tomography import (
    dataset_to_json,
    default_equatorial_angles,
    synthesize_dataset,
)


@pytest.fixture(scope="module")
def config_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("config") / "run.json"
    path.write_text(json.dumps(config_to_json(default_config())))
    return str(path)


def _run(command, config_path, out_dir, *extra):
    return main([command, "--config", config_path, "--seed", "3",
                 "--out", str(out_dir), *extra])


def _read_manifest(out_dir):
    with open(os.path.join(str(out_dir), "manifest.json")) as handle:
        return json.load(handle)


def _tree_bytes(out_dir):
    out = {}
    for name in sorted(os.listdir(str(out_dir))):
        with open(os.path.join(str(out_dir), name), "rb") as handle:
            out[name] = handle.read()
    return out


def test_parity_artifacts_metadata_and_manifest(config_path, tmp_path):
    assert _run("parity", config_path, tmp_path, "--samples", "6") == 0
    names = sorted(os.listdir(tmp_path))
    assert names == ["fig3a.csv", "fig3a.summary.json", "fig3c.csv",
                     "fig3c.summary.json", "manifest.json"]

    lines = (tmp_path / "fig3a.csv").read_text().splitlines()
    assert lines[0] == "phi (rad),m (hbar),pi_exact (1),pi_sampled (1)"
    cells = lines[1].split(",")
    assert len(cells) == 4
    assert float(cells[0]) == 0.0

    sidecar = json.loads((tmp_path / "fig3a.summary.json").read_text())
    meta = sidecar["metadata"]
    assert set(meta) == {"config_sha256", "seed", "code_version", "rng"}
    assert meta["seed"] == 3
    assert meta["rng"] == "philox4x64x10"
    assert len(meta["config_sha256"]) == 64
    summary = sidecar["summary"]
    assert 0.8 < summary["contrast"] <= 1.0
    assert summary["period_rad"] == pytest.approx(math.pi / 8, rel=1e-2)
    assert 10.0 < summary["gain"] < 18.0

    manifest = _read_manifest(tmp_path)
    assert set(manifest["artifacts"]) == {"fig3a", "fig3c"}
    for entry in manifest["artifacts"].values():
        assert entry["metadata"] == meta
        for fname, expected in entry["files"].items():
            digest = hashlib.sha256((tmp_path / fname).read_bytes()).hexdigest()
            assert digest == expected


def test_json_format_embeds_records_and_summary(config_path, tmp_path):
    assert _run("hellinger", config_path, tmp_path, "--samples", "6",
                "--format", "json") == 0
    assert sorted(os.listdir(tmp_path)) == ["fig3d.json", "manifest.json"]
    doc = json.loads((tmp_path / "fig3d.json").read_text())
    assert doc["artifact"] == "fig3d"
    assert set(doc) == {"artifact", "metadata", "columns", "records", "summary"}
    assert doc["columns"][0] == {"name": "dphi", "unit": "rad"}
    assert len(doc["records"]) == 25
    assert doc["summary"]["sql_slope"] == pytest.approx(math.sqrt(2.0))
    assert doc["summary"]["gain_ideal"] == pytest.approx(16.0, rel=0.02)


def test_rerun_is_byte_identical(config_path, tmp_path):
    for cmd, extra in [("parity", ("--samples", "6")),
                       ("budget", ("--samples", "8"))]:
        out = tmp_path / cmd
        assert _run(cmd, config_path, out, *extra) == 0
        before = _tree_bytes(out)
        assert _run(cmd, config_path, out, *extra) == 0
        assert _tree_bytes(out) == before


def test_seed_changes_sampled_output(config_path, tmp_path):
    first = tmp_path / "a"
    second = tmp_path / "b"
    assert _run("parity", config_path, first, "--samples", "6") == 0
    assert main(["parity", "--config", config_path, "--seed", "4",
                 "--out", str(second), "--samples", "6"]) == 0
    assert (first / "fig3a.csv").read_bytes() != (second / "fig3a.csv").read_bytes()


def test_method_table_merges_across_commands(config_path, tmp_path):
    assert _run("parity", config_path, tmp_path, "--samples", "6") == 0
    assert _run("ramsey", config_path, tmp_path, "--samples", "6") == 0
    lines = (tmp_path / "fig3c.csv").read_text().splitlines()
    methods = [line.split(",")[0] for line in lines[1:]]
    assert methods == ["magnetization", "parity"]
    summary = json.loads((tmp_path / "fig3c.summary.json").read_text())["summary"]
    assert {"parity_gain", "parity_uncertainty", "magnetization_gain",
            "magnetization_uncertainty"} <= set(summary)

    # re-running one method replaces its row instead of duplicating it
    assert _run("parity", config_path, tmp_path, "--samples", "6") == 0
    lines = (tmp_path / "fig3c.csv").read_text().splitlines()
    assert [line.split(",")[0] for line in lines[1:]] == ["magnetization",
                                                         "parity"]


def test_evolve_summaries(config_path, tmp_path):
    assert _run("evolve", config_path, tmp_path, "--samples", "6") == 0
    summary = json.loads((tmp_path / "fig2.summary.json").read_text())["summary"]
    assert summary["mz_ideal_revival"] == pytest.approx(8.0, abs=1e-9)
    assert 5.5 < summary["mz_imperfect_revival"] < 7.6
    assert 33.0 < summary["plateau_varz_min"] <= summary["plateau_varz_max"] < 34.5
    side = json.loads((tmp_path / "figS1.summary.json").read_text())["summary"]
    assert side["limit_varz"] == pytest.approx(34.0)
    lines = (tmp_path / "fig2.csv").read_text().splitlines()
    assert len(lines) == 162
    assert lines[0].startswith("omega_t (rad),pi_m_-8 (1)")


def test_config_errors_exit_2(config_path, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    doc = config_to_json(default_config())
    doc["beam_power_w"] = 1.0
    bad.write_text(json.dumps(doc))
    assert main(["parity", "--config", str(bad)]) == 2
    assert "configuration error" in capsys.readouterr().err

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert main(["parity", "--config", str(broken)]) == 2
    assert main(["parity", "--config", str(tmp_path / "absent.json")]) == 2
    assert main(["parity", "--config", config_path, "--samples", "0"]) == 2

    with pytest.raises(SystemExit) as info:
        main(["parity", "--format", "parquet"])
    assert info.value.code == 2
    capsys.readouterr()


def test_dataset_errors(config_path, tmp_path, capsys):
    missing = tmp_path / "absent.json"
    assert main(["tomo", "--config", config_path, "--out", str(tmp_path),
                 "--dataset", str(missing)]) == 2
    assert "configuration error" in capsys.readouterr().err

    broken = tmp_path / "broken.json"
    broken.write_text("[not json")
    assert main(["tomo", "--config", config_path, "--out", str(tmp_path),
                 "--dataset", str(broken)]) == 2

    data = synthesize_dataset(kitten_state(8.0),
                              phis=default_equatorial_angles()[::4])
    doc = dataset_to_json(data)
    doc["settings"][0]["probs"][0] = -0.25
    corrupt = tmp_path / "corrupt.json"
    corrupt.write_text(json.dumps(doc))
    assert main(["tomo", "--config", config_path, "--out", str(tmp_path),
                 "--dataset", str(corrupt)]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_verify_reports_ok_missing_and_mismatch(config_path, tmp_path, capsys):
    assert _run("parity", config_path, tmp_path, "--samples", "6") == 0
    assert main(["verify", "--out", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [line.split()[-1] for line in lines] == [
        "fig3a.csv", "fig3a.summary.json", "fig3c.csv", "fig3c.summary.json"]
    assert all(line.startswith("ok") for line in lines)

    target = tmp_path / "fig3a.csv"
    payload = target.read_bytes()
    target.write_bytes(payload + b"tampered\n")
    assert main(["verify", "--out", str(tmp_path)]) == 3
    assert "mismatch fig3a.csv" in capsys.readouterr().out
    target.write_bytes(payload)

    (tmp_path / "fig3c.summary.json").unlink()
    assert main(["verify", "--out", str(tmp_path)]) == 3
    assert "missing" in capsys.readouterr().out

    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["verify", "--out", str(empty)]) == 2
    assert "no manifest" in capsys.readouterr().err


def test_tomo_with_external_dataset(config_path, tmp_path):
    # every second default angle still samples the outermost coherence
    # below its aliasing limit
    data = synthesize_dataset(kitten_state(8.0),
                              phis=default_equatorial_angles()[::2])
    dataset = tmp_path / "dataset.json"
    dataset.write_text(json.dumps(dataset_to_json(data)))
    out = tmp_path / "out"
    assert _run("tomo", config_path, out, "--dataset", str(dataset)) == 0

    summary = json.loads((out / "fig4.summary.json").read_text())["summary"]
    assert "fidelity_truth" not in summary
    assert summary["coherence_ratio"] == pytest.approx(1.0, abs=0.01)
    assert summary["wigner_min"] < 0.0
    assert summary["wigner_imag_residue"] < 1e-8
    assert summary["underdetermined"] is True

    decay = json.loads((out / "fig5.summary.json").read_text())["summary"]
    assert decay["enhancement_ratio"] == pytest.approx(16.0, abs=0.5)
    assert -0.1 < decay["wigner_min_dephased_70us"] < -0.01
    assert decay["wigner_min_initial"] == pytest.approx(summary["wigner_min"])

    assert (out / "fig4.wigner.csv").exists()
    manifest = _read_manifest(out)
    assert "fig4.wigner.csv" in manifest["artifacts"]["fig4"]["files"]
    wigner_lines = (out / "fig4.wigner.csv").read_text().splitlines()
    assert wigner_lines[0] == "theta (rad),phi (rad),w (1)"
    assert len(wigner_lines) == 1 + 91 * 180
