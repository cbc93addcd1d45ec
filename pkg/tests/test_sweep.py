import pytest

from taxoroll.corpus import split_dataset
from taxoroll.errors import ConfigInvalid
from taxoroll.hierarchy import BreakdownLevel, Hierarchy
from taxoroll.pipeline import ModelKind, ModelParams, build_features
from taxoroll.sweep import (
    SweepConfig,
    SweepPoint,
    argmax_point,
    run_sweep,
    select_threshold,
    write_sweep_csv,
    write_sweep_svg,
)
from taxoroll.synth import SynthConfig, generate_synthetic


def _points(values):
    return [SweepPoint(v=v, macro_f1=f, n_retained_classes=0, n_excluded_validation=0) for v, f in values]


class TestSelectThreshold:
    def test_worked_example(self):
        points = _points([(0, 0.60), (50, 0.75), (100, 0.88), (150, 0.885), (200, 0.88)])
        assert select_threshold(points, t=0.85, epsilon=0.01) == 100

    def test_all_below_target(self):
        assert select_threshold(_points([(0, 0.2), (50, 0.3)]), t=0.85) is None

    def test_single_qualifying_point(self):
        assert select_threshold(_points([(40, 0.9)]), t=0.85) == 40

    def test_later_dip_disqualifies(self):
        points = _points([(0, 0.86), (50, 0.70), (100, 0.88), (150, 0.88)])
        assert select_threshold(points, t=0.85, epsilon=0.01) == 100

    def test_dip_within_epsilon_ok(self):
        points = _points([(0, 0.86), (50, 0.855), (100, 0.88)])
        assert select_threshold(points, t=0.85, epsilon=0.01) == 0

    def test_argmax(self):
        points = _points([(0, 0.2), (50, 0.9), (100, 0.9)])
        assert argmax_point(points).v == 50


class TestSweepConfig:
    def test_grid_must_increase(self):
        with pytest.raises(ConfigInvalid):
            SweepConfig(level=BreakdownLevel.BL1, model_kind=ModelKind.NB, grid=(0, 0, 10))

    def test_empty_grid(self):
        with pytest.raises(ConfigInvalid):
            SweepConfig(level=BreakdownLevel.BL1, model_kind=ModelKind.NB, grid=())

    def test_t_range(self):
        with pytest.raises(ConfigInvalid):
            SweepConfig(level=BreakdownLevel.BL1, model_kind=ModelKind.NB, t=0.0)


@pytest.fixture(scope="module")
def small_synth():
    h = Hierarchy.from_codes_closed(
        BreakdownLevel.BL1, [r + m + l for r in "LM" for m in "AB" for l in "ABC"]
    )
    cfg = SynthConfig(
        seed=5,
        hierarchies={BreakdownLevel.BL1: h},
        n_records=800,
        head_class_share=0.4,
        zipf_exponent=0.3,
        mean_words=6.0,
        noise_rate=0.05,
        enumeration_rate=0.1,
    )
    ds = split_dataset(generate_synthetic(cfg), 0.2, seed=5)
    return h, ds, build_features(ds)


class TestRunSweep:
    def test_grid_zero_semantics(self, small_synth):
        h, ds, features = small_synth
        cfg = SweepConfig(level=BreakdownLevel.BL1, model_kind=ModelKind.NB, grid=(0,), seed=5)
        points = run_sweep(ds, h, cfg, params=ModelParams(seed=5), features=features)
        assert len(points) == 1
        from taxoroll.corpus import class_counts, Split

        counts = class_counts(ds, BreakdownLevel.BL1, Split.TRAIN)
        expected = sum(1 for n in counts.counts.values() if n >= 10)
        assert points[0].v == 0
        assert points[0].n_retained_classes == expected

    def test_retained_non_increasing_and_deterministic(self, small_synth):
        h, ds, features = small_synth
        cfg = SweepConfig(
            level=BreakdownLevel.BL1,
            model_kind=ModelKind.NB,
            grid=(0, 25, 50, 100),
            seed=5,
        )
        a = run_sweep(ds, h, cfg, params=ModelParams(seed=5), features=features)
        b = run_sweep(ds, h, cfg, params=ModelParams(seed=5), features=features)
        assert a == b
        retained = [p.n_retained_classes for p in a]
        assert retained == sorted(retained, reverse=True)

    def test_selected_threshold_satisfies_predicate(self, small_synth):
        h, ds, features = small_synth
        cfg = SweepConfig(
            level=BreakdownLevel.BL1, model_kind=ModelKind.NB, grid=(0, 30, 60), seed=5
        )
        points = run_sweep(ds, h, cfg, params=ModelParams(seed=5), features=features)
        t = max(p.macro_f1 for p in points) - 0.02
        v = select_threshold(points, t=t, epsilon=0.05)
        if v is not None:
            chosen = next(p for p in points if p.v == v)
            assert chosen.macro_f1 >= t
            later = [p for p in points if p.v > v]
            assert all(p.macro_f1 >= t - 0.05 for p in later)


class TestWriters:
    def test_csv_layout(self, tmp_path):
        p = tmp_path / "sweep.csv"
        write_sweep_csv(_points([(0, 0.5), (10, 0.75)]), p)
        lines = p.read_text().strip().splitlines()
        assert lines[0] == "v,macro_f1,n_retained_classes,n_excluded_validation"
        assert lines[1].startswith("0,0.500000")

    def test_svg_written(self, tmp_path):
        p = tmp_path / "sweep.svg"
        write_sweep_svg(_points([(0, 0.5), (10, 0.75), (20, 0.8)]), p, title="demo")
        content = p.read_text()
        assert content.startswith("<svg") and "polyline" in content
