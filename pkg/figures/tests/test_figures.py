"""Figure scripts render the shipped sample CSVs and embed manifest hashes."""

import shutil
from pathlib import Path

import pytest

from dlss_figures.data import DataError, FigureSpec, manifest_hash, read_profile, read_trajectory
from dlss_figures.fronts import main as fronts_main
from dlss_figures.profiles import main as profiles_main

SAMPLES = Path(__file__).resolve().parents[1] / "sample_data"


class TestReaders:
    def test_profile_schema(self):
        path = next((SAMPLES / "profiles").glob("profile_alpha*.csv"))
        meta, y, phi = read_profile(path)
        assert "alpha" in meta and "b_star" in meta
        assert y.size == phi.size > 100

    def test_trajectory_schema(self):
        times, states = read_trajectory(SAMPLES / "fronts" / "alpha2" / "trajectory.csv")
        assert len(times) == len(states) >= 2
        assert states[0].size == 1024

    def test_front_runs_positive(self):
        # the shipped runs reflect positivity of the discrete solutions
        for a in (2, 4, 7):
            _, states = read_trajectory(SAMPLES / "fronts" / f"alpha{a}" / "trajectory.csv")
            for s in states[1:]:
                assert s.min() > 0.0

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(DataError):
            read_profile(tmp_path / "nope.csv")
        with pytest.raises(DataError):
            FigureSpec(inputs=(tmp_path / "nope.csv",), output=tmp_path / "o.svg")

    def test_empty_csv_rejected(self, tmp_path):
        bad = tmp_path / "profile_alpha1.csv"
        bad.write_text("# schema=profile v1\ny,phi\n")
        with pytest.raises(DataError):
            read_profile(bad)


class TestProfilesFigure:
    def test_panel_grid_renders_with_hash(self, tmp_path):
        rc = profiles_main(["--input-dir", str(SAMPLES / "profiles"), "--output-dir", str(tmp_path)])
        assert rc == 0
        out = tmp_path / "profiles.svg"
        assert out.exists()
        digest = manifest_hash(SAMPLES / "profiles")
        assert f"manifest-sha256={digest}" in out.read_text()

    def test_loglog_variant(self, tmp_path):
        rc = profiles_main(
            ["--input-dir", str(SAMPLES / "profiles"), "--output-dir", str(tmp_path), "--logscale"]
        )
        assert rc == 0
        assert (tmp_path / "profiles_loglog.svg").exists()

    def test_empty_input_dir_fails_cleanly(self, tmp_path):
        rc = profiles_main(["--input-dir", str(tmp_path), "--output-dir", str(tmp_path / "o")])
        assert rc == 1

    def test_invalid_csv_fails_cleanly(self, tmp_path):
        indir = tmp_path / "in"
        indir.mkdir()
        (indir / "profile_alpha1.csv").write_text("")
        (indir / "manifest.json").write_text("{}")
        rc = profiles_main(["--input-dir", str(indir), "--output-dir", str(tmp_path / "o")])
        assert rc == 1


class TestFrontsFigure:
    def test_two_row_layout_renders_with_hashes(self, tmp_path):
        rc = fronts_main(["--input-dir", str(SAMPLES / "fronts"), "--output-dir", str(tmp_path)])
        assert rc == 0
        out = tmp_path / "fronts.svg"
        assert out.exists()
        text = out.read_text()
        for a in (2, 4, 7):
            digest = manifest_hash(SAMPLES / "fronts" / f"alpha{a}")
            assert f"manifest-sha256={digest}" in text

    def test_single_snapshot_is_valid(self, tmp_path):
        src = SAMPLES / "fronts" / "alpha2"
        run = tmp_path / "in" / "single"
        run.mkdir(parents=True)
        lines = (src / "trajectory.csv").read_text().splitlines()
        header, rows = lines[:2], lines[2:]
        t0 = rows[0].split(",")[0]
        kept = [r for r in rows if r.split(",")[0] == t0]
        (run / "trajectory.csv").write_text("\n".join(header + kept) + "\n")
        shutil.copy(src / "manifest.json", run / "manifest.json")
        rc = fronts_main(["--input-dir", str(tmp_path / "in"), "--output-dir", str(tmp_path / "o")])
        assert rc == 0
        assert (tmp_path / "o" / "fronts.svg").exists()

    def test_missing_runs_fail_cleanly(self, tmp_path):
        rc = fronts_main(["--input-dir", str(tmp_path), "--output-dir", str(tmp_path / "o")])
        assert rc == 1
