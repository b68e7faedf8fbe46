import json
import math

import numpy as np
import pytest

from sigtopo.ingest import Recording
from sigtopo.pipeline import (
    TRAJECTORY_FIELDS,
    AnalysisConfig,
    AnalysisError,
    TrajectoryPoint,
    analyze_window,
    complex_report,
    emit,
    read_trajectory,
    rolling_bands,
    seizure_flags,
    sliding_analysis,
    synth_generate,
    window_ends,
)


def point(t, b1=0, pe=0.0):
    return TrajectoryPoint(float(t), 1, b1, pe, pe / 3, 0.0, 2, 0)


# --- config -----------------------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [{"window": 1}, {"stride": 0}, {"r2_threshold": 1.0},
                                    {"r2_threshold": 0.0}, {"max_dim": 3}, {"lambda1": -1.0}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        AnalysisConfig(**kwargs)


def test_config_defaults():
    cfg = AnalysisConfig()
    assert (cfg.lambda1, cfg.lambda2, cfg.window, cfg.deg, cfg.max_dim) == (1.0, 1.0, 50, 3, 2)


# --- sliding_analysis --------------------------------------------------------------------

def test_window_arithmetic():
    ends = window_ends(101, 50, 1)
    assert len(ends) == 51 and ends[0] == 50 and ends[-1] == 100
    assert window_ends(101, 50, 20) == [50, 70, 90]


def test_constant_zero_recording():
    rec = Recording(tuple("abcd"), 1.0, np.zeros((4, 101)))
    traj = sliding_analysis(rec, AnalysisConfig(), jobs=1)
    assert [p.t for p in traj] == list(range(50, 101))
    assert all(p.b0 == 4 and p.b1 == 0 and p.pe_total == 0.0 and p.edges == 0 for p in traj)


def test_too_short_recording():
    rec = Recording(("a", "b"), 1.0, np.zeros((2, 51)))
    with pytest.raises(AnalysisError):
        sliding_analysis(rec, AnalysisConfig(window=50))


def test_requires_one_hertz():
    rec = Recording(("a", "b"), 2.0, np.zeros((2, 400)))
    with pytest.raises(AnalysisError):
        sliding_analysis(rec, AnalysisConfig())


def test_window_failure_names_t():
    rec = Recording(("a", "b"), 1.0, np.random.default_rng(0).normal(size=(2, 60)))
    with pytest.raises(AnalysisError, match="t=50"):
        sliding_analysis(rec, AnalysisConfig(deg=9), jobs=1)


def test_serial_and_parallel_agree():
    rec = synth_generate(blocks=(2, 2), noise=0.3, duration=90, seed=3)
    cfg = AnalysisConfig(window=30, stride=3)
    assert sliding_analysis(rec, cfg, jobs=1) == sliding_analysis(rec, cfg, jobs=3)


def test_window_uses_trailing_samples():
    rec = synth_generate(blocks=(3,), noise=0.2, duration=80, seed=4)
    cfg = AnalysisConfig(window=40, stride=20)
    traj = sliding_analysis(rec, cfg, jobs=1)
    direct = analyze_window(np.arange(20.0, 61.0), rec.samples[:, 20:61], cfg).point
    assert traj[1] == direct


def test_pair_with_noise_free_copy_has_edge():
    rec = synth_generate(blocks=(2,), noise=0.0, duration=60, seed=5)
    traj = sliding_analysis(rec, AnalysisConfig(window=50), jobs=1)
    assert all(p.edges == 1 and p.b0 == 1 for p in traj)


def test_independent_blocks_give_two_components():
    rec = synth_generate(blocks=(3, 3), noise=0.0, duration=120, seed=0)
    traj = sliding_analysis(rec, AnalysisConfig(window=50, stride=5), jobs=1)
    assert all(p.b0 == 2 for p in traj)


def test_no_selection_reports_zero_entropy():
    rng = np.random.default_rng(1)
    result = analyze_window(np.arange(51.0), rng.normal(size=(3, 51)), AnalysisConfig(lambda1=1e9, lambda2=1e9))
    assert result.point.pe_total == 0.0 and result.point.b0 == 3
    assert len(result.filtration) == 3


def test_diagram_consistent_with_point():
    rec = synth_generate(blocks=(3, 2), noise=0.5, duration=60, seed=6)
    result = analyze_window(np.arange(51.0), rec.samples[:, :51], AnalysisConfig())
    assert result.diagram.essential_count(0) == result.point.b0
    assert result.diagram.essential_count(1) == result.point.b1
    assert result.point.pe_total >= 0
    report = json.loads(json.dumps(complex_report(result, rec.channel_names)))
    assert report["summary"]["b0"] == result.point.b0
    assert {tuple(s["vertices"]) for s in report["simplices"]} >= {(n,) for n in rec.channel_names}


# --- synth --------------------------------------------------------------------------------

def test_synth_is_deterministic():
    a, b = synth_generate(seed=7), synth_generate(seed=7)
    assert a.samples.tobytes() == b.samples.tobytes()
    assert a.channel_names == ("B0C0", "B0C1", "B0C2", "B1C0", "B1C1", "B1C2")
    assert a.n_samples == 601 and a.duration == 600.0
    assert not np.array_equal(a.samples, synth_generate(seed=8).samples)


def test_synth_members_are_affine_in_driver():
    rec = synth_generate(blocks=(3,), noise=0.0, duration=50, seed=1)
    x = rec.samples
    for row in x[1:]:
        coef = np.polyfit(x[0], row, 1)
        assert coef[0] > 0
        np.testing.assert_allclose(np.polyval(coef, x[0]), row, atol=1e-9)


# --- bands ----------------------------------------------------------------------------------

def test_bands_hand_values():
    traj = [point(t, b1) for t, b1 in enumerate([0, 0, 0, 3])]
    bands = rolling_bands(traj, "b1", 3)
    assert bands.mean[:2] == (None, None) and bands.std[:2] == (None, None)
    assert bands.mean[2] == 0.0 and bands.std[2] == 0.0
    assert bands.mean[3] == pytest.approx(1.0)
    assert bands.std[3] == pytest.approx(math.sqrt(3))


def test_bands_constant_series():
    bands = rolling_bands([point(t, 2) for t in range(10)], "b1", 4)
    assert all(s == 0.0 for s in bands.std[3:])


def test_bands_errors():
    traj = [point(t) for t in range(5)]
    with pytest.raises(ValueError):
        rolling_bands(traj, "b1", 6)
    with pytest.raises(ValueError):
        rolling_bands(traj, "b1", 1)
    with pytest.raises(ValueError):
        rolling_bands(traj, "nope", 2)


# --- emit -------------------------------------------------------------------------------------

def test_emit_empty_is_header_only(tmp_path):
    emit([], tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text() == ",".join(TRAJECTORY_FIELDS) + "\n"


def test_emit_single_point(tmp_path):
    emit([point(50, 1, 0.5)], tmp_path / "one.csv")
    lines = (tmp_path / "one.csv").read_text().splitlines()
    assert len(lines) == 2
    assert lines[1] == "50,1,1,0.5,0.166666666667,0,2,0"


def test_emit_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    traj = [point(t, int(rng.integers(0, 4)), float(rng.uniform(0, 3))) for t in range(20)]
    emit(traj, tmp_path / "t.csv")
    back = read_trajectory(tmp_path / "t.csv")
    for a, b in zip(traj, back):
        for f in TRAJECTORY_FIELDS:
            assert getattr(b, f) == pytest.approx(getattr(a, f), rel=1e-9, abs=1e-12)


def test_emit_bands_and_seizure_columns(tmp_path):
    traj = [point(t, b1) for t, b1 in zip(range(48, 52), [0, 0, 0, 3])]
    flags = seizure_flags(traj, [(49.0, 50.0)])
    assert flags == [False, True, True, False]
    emit(traj, tmp_path / "b.csv", bands=rolling_bands(traj, "b1", 3), seizure_flags=flags)
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0].endswith(",mean_b1,std_b1,in_seizure")
    assert lines[1].endswith(",,,0") and lines[2].endswith(",,,1")
    assert lines[4].endswith(",1,1.73205080757,0")


def test_emit_jsonlines_matches_csv_keys(tmp_path):
    traj = [point(50, 1, 0.25), point(51, 2, 1.0 / 3)]
    bands = rolling_bands(traj, "pe_total", 2)
    emit(traj, tmp_path / "t.jsonl", fmt="jsonlines", bands=bands)
    rows = [json.loads(line) for line in (tmp_path / "t.jsonl").read_text().splitlines()]
    assert list(rows[0]) == list(TRAJECTORY_FIELDS) + ["mean_pe_total", "std_pe_total"]
    assert rows[0]["mean_pe_total"] is None
    assert rows[1]["pe_total"] == 0.333333333333 and rows[1]["b1"] == 2


def test_emit_reports_path(tmp_path):
    with pytest.raises(OSError, match="missing"):
        emit([], tmp_path / "missing" / "x.csv")
    with pytest.raises(ValueError):
        emit([], tmp_path / "x.txt", fmt="xml")
