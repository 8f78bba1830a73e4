import json

import numpy as np
import pytest

from conftest import SEASONAL_BASE, basin_spec, write_csv
from discharge_scenarios.exceptions import AlignmentError, ConfigError, DataError, ParseError, ShapeMismatch
from discharge_scenarios.ingest import (
    DischargeHistory,
    EnsembleSet,
    ForcingSeries,
    NormStats,
    SynthSpec,
    YearWindow,
    compute_norm_stats,
    denormalize,
    load_discharge,
    load_ensemble,
    load_forcing,
    normalize,
    synth_ensemble,
    synth_generate,
    write_discharge,
    write_ensemble,
    write_forcing,
)
from discharge_scenarios.ingest.synth import apply_noise

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"


FORCING_HEADER = "year,month,row,col,precip_mm,temp_c"
DISCHARGE_HEADER = "year,month,plant_id,discharge_m3s"

MINIMAL_FORCING = """year,month,row,col,precip_mm,temp_c
2000,1,0,0,10,25.5
2000,2,0,0,0,26
"""

# Cell (1, 1) never appears, so it is outside the mask.
MASKED_FORCING = """year,month,row,col,precip_mm,temp_c
2000,12,0,0,1.5,20
2000,12,0,1,2.5,21
2000,12,1,0,3.5,22
2001,1,0,0,4.5,23
2001,1,0,1,5.5,24
2001,1,1,0,6.5,25
"""

MINIMAL_DISCHARGE = """year,month,plant_id,discharge_m3s
2000,1,FURNAS,812.5
2000,1,EMBORCACAO,455
2000,2,FURNAS,901.25
2000,2,EMBORCACAO,470
"""


def test_load_forcing_minimal(tmp_path):
    path = tmp_path / "forcing.csv"
    path.write_text(MINIMAL_FORCING)
    forcing = load_forcing(path)
    assert forcing.months == [(2000, 1), (2000, 2)]
    assert forcing.grid_shape == (1, 1)
    assert forcing.precip[:, 0, 0].tolist() == [10.0, 0.0]
    assert forcing.temp[:, 0, 0].tolist() == [25.5, 26.0]
    assert forcing.mask.tolist() == [[True]]


def test_load_forcing_infers_mask(tmp_path):
    path = tmp_path / "forcing.csv"
    path.write_text(MASKED_FORCING)
    forcing = load_forcing(path)
    assert forcing.months == [(2000, 12), (2001, 1)]
    assert forcing.mask.tolist() == [[True, True], [True, False]]
    assert forcing.n_cells == 3
    assert np.isnan(forcing.precip[:, 1, 1]).all()
    assert forcing.precip_cells().tolist() == [[1.5, 2.5, 3.5], [4.5, 5.5, 6.5]]


@pytest.mark.parametrize(
    "rows, exc_substr",
    [
        ([(2000, 1, 0, 0, 1.0, 20.0), (2000, 3, 0, 0, 1.0, 20.0)], "line 3: month gap between 2000-01 and 2000-03"),
        ([(2000, 1, 0, 0, 1.0, 20.0), (2000, 2, 0, 0, -1.0, 20.0)], "line 3: negative precipitation"),
        ([(2000, 1, 0, 0, "abc", 20.0)], "line 2: malformed row: bad precip_mm value 'abc'"),
        ([(2000, 13, 0, 0, 1.0, 20.0)], "line 2: malformed row: month 13 out of range"),
        ([(2000, 1, 0, 0, 1.0, 20.0), (2000, 1, 0, 0, 2.0, 20.0)], "line 3: malformed row: duplicate (month, cell)"),
        ([(2000, 1, 0, 0, 1.0, 20.0), (2000, 1, 0, 1, 1.0, 20.0), (2000, 2, 0, 0, 1.0, 20.0)], "cell (0, 1) is missing for month 2000-02"),
    ],
    ids=["month-gap", "negative-precip", "bad-float", "bad-month", "duplicate-cell", "incomplete-cell"],
)
def test_load_forcing_errors(tmp_path, rows, exc_substr):
    path = write_csv(tmp_path / "forcing.csv", FORCING_HEADER, rows)
    with pytest.raises(ParseError) as exc:
        load_forcing(path)
    assert exc_substr in str(exc.value)


def test_load_forcing_wrong_header(tmp_path):
    path = write_csv(tmp_path / "forcing.csv", "year,month,row,col,precip,temp", [(2000, 1, 0, 0, 1.0, 2.0)])
    with pytest.raises(ParseError) as exc:
        load_forcing(path)
    assert exc.value.line == 1
    assert "expected header year,month,row,col,precip_mm,temp_c" in str(exc.value)


def test_load_forcing_empty_file(tmp_path):
    path = tmp_path / "forcing.csv"
    path.write_text("")
    with pytest.raises(ParseError, match="file is empty"):
        load_forcing(path)


def test_forcing_reserialization_is_byte_identical(tmp_path):
    path = tmp_path / "forcing.csv"
    path.write_text(MASKED_FORCING.replace(",20\n", ",20.25\n"))
    forcing = load_forcing(path)
    out = tmp_path / "again.csv"
    write_forcing(forcing, out)
    assert load_forcing(out).precip_cells().tolist() == forcing.precip_cells().tolist()
    write_forcing(load_forcing(out), tmp_path / "third.csv")
    assert (tmp_path / "third.csv").read_bytes() == out.read_bytes()


def test_load_discharge(tmp_path):
    path = tmp_path / "discharge.csv"
    path.write_text(MINIMAL_DISCHARGE)
    history = load_discharge(path)
    assert history.plants == ["FURNAS", "EMBORCACAO"]
    assert history.months == [(2000, 1), (2000, 2)]
    assert history.values.tolist() == [[812.5, 455.0], [901.25, 470.0]]

    out = tmp_path / "again.csv"
    write_discharge(history, out)
    assert out.read_text() == MINIMAL_DISCHARGE


@pytest.mark.parametrize(
    "rows, exc_substr",
    [
        ([(2000, 1, "A", 0.0)], "line 2: non-positive discharge"),
        ([(2000, 1, "A", 1.0), (2000, 1, "A", 2.0)], "line 3: malformed row: duplicate (month, plant_id)"),
        ([(2000, 1, "A", 1.0), (2000, 1, "B", 1.0), (2000, 2, "A", 1.0)], "plant B is missing for month 2000-02"),
        ([(2000, 1, "A", 1.0), (2000, 4, "A", 1.0)], "month gap between 2000-01 and 2000-04"),
    ],
    ids=["zero", "duplicate", "missing-plant", "gap"],
)
def test_load_discharge_errors(tmp_path, rows, exc_substr):
    path = write_csv(tmp_path / "discharge.csv", DISCHARGE_HEADER, rows)
    with pytest.raises(ParseError) as exc:
        load_discharge(path)
    assert exc_substr in str(exc.value)


def test_discharge_history_invariants():
    with pytest.raises(DataError, match="strictly positive"):
        DischargeHistory(plants=["A"], months=[(2000, 1)], values=[[-3.0]])
    with pytest.raises(ShapeMismatch):
        DischargeHistory(plants=["A", "B"], months=[(2000, 1)], values=[[3.0]])
    with pytest.raises(DataError, match="duplicate plant ids"):
        DischargeHistory(plants=["A", "A"], months=[(2000, 1)], values=[[3.0, 4.0]])


def test_check_aligned(small_basin):
    forcing, history, _ = small_basin
    history.check_aligned(forcing)
    with pytest.raises(AlignmentError):
        history.slice(1, history.n_months).check_aligned(forcing)


def test_forcing_rejects_negative_precip_inside_mask():
    with pytest.raises(DataError, match="negative precipitation"):
        ForcingSeries(months=[(2000, 1)], grid_shape=(1, 1), precip=[[[-0.5]]], temp=[[[20.0]]], mask=[[True]])


@pytest.mark.parametrize(
    "value, expected",
    [
        ([1981, 2018], YearWindow(1981, 2018)),
        ((2019, 2023), YearWindow(2019, 2023)),
        (YearWindow(2000, 2000), YearWindow(2000, 2000)),
    ],
)
def test_year_window_from_value(value, expected):
    assert YearWindow.from_value(value) == expected


@pytest.mark.parametrize("value", [None, [2000], [2005, 2000]], ids=["none", "single", "reversed"])
def test_year_window_invalid(value):
    with pytest.raises(ConfigError):
        YearWindow.from_value(value)


def test_year_window_indices(small_basin):
    _, history, _ = small_basin
    assert YearWindow(2000, 2003).indices(history.months) == (0, 48)
    assert YearWindow(2004, 2005).indices(history.months) == (48, 72)
    assert YearWindow(2000, 2003).overlaps(YearWindow(2003, 2005))
    assert not YearWindow(2000, 2003).overlaps(YearWindow(2004, 2005))
    with pytest.raises(DataError, match="empty window"):
        YearWindow(1990, 1991).indices(history.months)


def _single_cell(values, temp=None):
    values = np.asarray(values, dtype=float)
    temp = np.full_like(values, 20.0) if temp is None else np.asarray(temp, dtype=float)
    months = [(2000 + i // 12, i % 12 + 1) for i in range(len(values))]
    return ForcingSeries(months=months, grid_shape=(1, 1), precip=values[:, None, None], temp=temp[:, None, None], mask=[[True]])


def test_normalize_arithmetic():
    # mean 5, std 2 over the window; raw 9 standardizes to 2.0 before the shift
    series = _single_cell([3.0, 7.0, 9.0], temp=[10.0, 14.0, 16.0])
    stats = compute_norm_stats(series.slice(0, 2))
    assert stats.precip_mean[0, 0] == 5.0
    assert stats.precip_std[0, 0] == 2.0
    out = normalize(series, stats)
    assert out.normalized
    standardized = (9.0 - 5.0) / 2.0
    assert out.precip[2, 0, 0] == pytest.approx(standardized + 5.0 / 2.0)
    assert out.temp[2, 0, 0] == pytest.approx((16.0 - 12.0) / 2.0)


def test_normalize_maps_zero_rain_to_zero():
    series = _single_cell([0.0, 4.0, 8.0, 0.0])
    out = normalize(series, compute_norm_stats(series))
    assert out.precip[0, 0, 0] == 0.0
    assert out.precip[3, 0, 0] == 0.0
    assert np.all(out.precip_cells() >= 0)


def test_normalize_constant_cell_is_finite():
    series = _single_cell([0.0, 0.0, 0.0], temp=[21.0, 21.0, 21.0])
    stats = compute_norm_stats(series)
    assert stats.precip_std[0, 0] == 1e-6
    out = normalize(series, stats)
    assert np.all(np.isfinite(out.precip_cells()))
    assert np.all(np.isfinite(out.temp_cells()))


def test_normalize_round_trip(small_basin):
    forcing, _, _ = small_basin
    stats = compute_norm_stats(forcing, YearWindow(2000, 2003))
    back = denormalize(normalize(forcing, stats), stats)
    assert np.max(np.abs(back.precip - forcing.precip)) < 1e-10
    assert np.max(np.abs(back.temp - forcing.temp)) < 1e-10


def test_norm_stats_use_training_window_only(small_basin):
    forcing, _, _ = small_basin
    train = compute_norm_stats(forcing, YearWindow(2000, 2003))
    assert np.allclose(train.precip_mean[forcing.mask], forcing.precip_cells()[:48].mean(axis=0))
    assert not np.allclose(train.precip_mean[forcing.mask], forcing.precip_cells().mean(axis=0))


def test_normalize_shape_mismatch(small_basin):
    forcing, _, _ = small_basin
    stats = NormStats(np.zeros((3, 3)), np.ones((3, 3)), np.zeros((3, 3)), np.ones((3, 3)))
    with pytest.raises(ShapeMismatch):
        normalize(forcing, stats)


def test_norm_stats_round_trip_dict(small_basin):
    forcing, _, _ = small_basin
    stats = compute_norm_stats(forcing)
    again = NormStats.from_dict(json.loads(json.dumps(stats.to_dict())))
    assert np.array_equal(again.precip_mean, stats.precip_mean)
    assert np.array_equal(again.temp_std, stats.temp_std)


def test_synth_noise_free_is_seasonal_base():
    spec = SynthSpec(grid_shape=[1, 2], n_plants=1, horizon=24, base=SEASONAL_BASE, weights=[[0.0], [0.0]], noise=1e-12)
    _, history, truth = synth_generate(spec, seed=0)
    expected = np.array([SEASONAL_BASE[m - 1] for _, m in history.months])
    assert np.allclose(history.values[:, 0], expected, rtol=1e-10)
    assert np.allclose(truth.mean[:, 0], expected)


def test_synth_is_deterministic():
    spec = basin_spec()
    first = synth_generate(spec, seed=42)
    second = synth_generate(spec, seed=42)
    assert np.array_equal(first[0].precip, second[0].precip)
    assert np.array_equal(first[1].values, second[1].values)
    assert np.array_equal(first[2].quantiles, second[2].quantiles)
    third = synth_generate(spec, seed=43)
    assert not np.array_equal(first[1].values, third[1].values)


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
@pytest.mark.parametrize("lag", [0, 1])
def test_synth_history_invariants(seed, lag):
    forcing, history, truth = synth_generate(basin_spec(lag=lag), seed)
    history.check_aligned(forcing)
    assert np.all(history.values > 0)
    assert np.all(forcing.precip_cells() >= 0)
    assert truth.quantiles.shape == history.values.shape + (4,)
    assert np.all(np.diff(truth.quantiles, axis=-1) > 0)


def test_synth_lag_uses_previous_month():
    spec = basin_spec(lag=1, noise=1e-12)
    forcing, history, truth = synth_generate(spec, seed=1)
    cal = [m - 1 for _, m in forcing.months]
    base = spec.base_matrix()[cal]
    expected = base[1:] * (1.0 + forcing.precip_cells()[:-1] @ spec.weight_matrix())
    assert np.allclose(truth.mean[1:], expected)
    # no rain before the first month
    assert np.allclose(truth.mean[0], base[0])


def test_synth_quantile_matches_monte_carlo():
    spec = basin_spec(horizon=1, n_plants=1, grid_shape=(1, 1), noise=0.4)
    _, _, truth = synth_generate(spec, seed=9)
    z = np.random.default_rng(123).standard_normal(100_000)
    draws = apply_noise(truth.mean[0, 0], spec.noise, z)
    assert np.quantile(draws, 0.95) == pytest.approx(truth.quantiles[0, 0, 3], rel=0.01)
    assert np.mean(draws) == pytest.approx(truth.mean[0, 0], rel=0.01)


@pytest.mark.parametrize(
    "overrides, exc_substr",
    [
        ({"noise": 0.0}, "noise scale must be positive"),
        ({"base": [-1.0] * 12}, "seasonal base values must be positive"),
        ({"weights": [[-0.1, 0.0]] * 4}, "sensitivity weights must be non-negative"),
        ({"lag": 2}, "lag must be 0 or 1"),
        ({"base": [1.0] * 11}, "base must have 12 values"),
    ],
    ids=["noise", "base", "weights", "lag", "base-length"],
)
def test_synth_spec_errors(overrides, exc_substr):
    data = basin_spec().to_dict()
    data.update(overrides)
    with pytest.raises(ConfigError) as exc:
        SynthSpec.from_dict(data)
    assert exc_substr in str(exc.value)


def test_synth_spec_unknown_key():
    data = basin_spec().to_dict()
    data["nosie"] = 0.1
    with pytest.raises(ConfigError, match="unknown synth spec keys: nosie"):
        SynthSpec.from_dict(data)


def test_ensemble_round_trip(tmp_path, small_spec):
    ensemble = synth_ensemble(small_spec, seed=4, n_traj=3, horizon=6, start=[2006, 1])
    assert len(ensemble) == 3
    assert ensemble.months[0] == (2006, 1)
    directory = tmp_path / "ensemble"
    write_ensemble(ensemble, directory)
    assert sorted(p.name for p in directory.iterdir()) == ["manifest.json", "traj_000.csv", "traj_001.csv", "traj_002.csv"]

    loaded = load_ensemble(directory)
    assert loaded.labels == ["traj_000", "traj_001", "traj_002"]
    assert loaded.start == (2006, 1)
    assert loaded.horizon == 6
    assert loaded.source_label == "synthetic"
    for a, b in zip(loaded.trajectories, ensemble.trajectories):
        assert np.allclose(a.precip, b.precip, rtol=1e-8)


def test_ensemble_manifest_mismatch(tmp_path, small_spec):
    directory = tmp_path / "ensemble"
    write_ensemble(synth_ensemble(small_spec, seed=4, n_traj=2, horizon=6, start=[2006, 1]), directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    manifest["horizon"] = 5
    (directory / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(DataError, match="manifest says 2006-01 \\+ 5"):
        load_ensemble(directory)


def test_ensemble_missing_manifest(tmp_path):
    with pytest.raises(DataError, match="Ensemble manifest not found"):
        load_ensemble(tmp_path)


def test_ensemble_trajectories_share_grid(small_spec):
    a = synth_ensemble(small_spec, seed=1, n_traj=1, horizon=3, start=[2006, 1]).trajectories[0]
    b = synth_ensemble(basin_spec(grid_shape=(1, 4)), seed=1, n_traj=1, horizon=3, start=[2006, 1]).trajectories[0]
    with pytest.raises(DataError, match="does not share grid"):
        EnsembleSet(trajectories=[a, b], start=(2006, 1))
