import numpy as np
import pytest

from taxoroll.corpus import clean_text
from taxoroll.errors import ConfigInvalid
from taxoroll.hierarchy import BreakdownLevel, Hierarchy
from taxoroll.synth import SynthConfig, class_distribution, generate_synthetic, head_class


def _config(**overrides):
    params = dict(
        seed=1,
        hierarchies={
            BreakdownLevel.BL1: Hierarchy.from_codes_closed(
                BreakdownLevel.BL1,
                [r + m + l for r in "LM" for m in "AB" for l in "ABC"],
            )
        },
        n_records=1000,
        head_class_share=0.5,
        zipf_exponent=0.5,
        mean_words=6.71,
        noise_rate=0.05,
        enumeration_rate=0.1,
    )
    params.update(overrides)
    return SynthConfig(**params)


class TestConfigValidation:
    @pytest.mark.parametrize(
        "field,value",
        [
            ("n_records", 0),
            ("head_class_share", 1.0),
            ("head_class_share", -0.1),
            ("zipf_exponent", 0.0),
            ("mean_words", 0.0),
            ("noise_rate", 1.5),
            ("enumeration_rate", -0.2),
        ],
    )
    def test_rejects(self, field, value):
        with pytest.raises(ConfigInvalid):
            _config(**{field: value})


class TestDistribution:
    def test_head_share_exact(self):
        h = _config().hierarchies[BreakdownLevel.BL1]
        leaves, probs = class_distribution(h, 0.5, 0.5)
        assert leaves[0] == head_class(h)
        assert probs[0] == 0.5
        assert np.isclose(probs.sum(), 1.0)
        # zipf tail decreasing
        assert all(a >= b for a, b in zip(probs[1:], probs[2:]))

    def test_zero_head_share(self):
        h = _config().hierarchies[BreakdownLevel.BL1]
        _, probs = class_distribution(h, 0.0, 0.5)
        assert np.isclose(probs.sum(), 1.0)
        assert probs[0] == probs.max()


class TestGenerate:
    def test_deterministic(self):
        a = generate_synthetic(_config())
        b = generate_synthetic(_config())
        assert a == b

    def test_seed_changes_output(self):
        a = generate_synthetic(_config())
        b = generate_synthetic(_config(seed=2))
        assert a != b

    def test_labels_attached_at_all_levels(self):
        cfg = _config()
        ds = generate_synthetic(cfg)
        for r in ds.records:
            code = r.label(BreakdownLevel.BL1)
            assert code in cfg.hierarchies[BreakdownLevel.BL1]
            assert len(code) == 3

    def test_mean_words_target(self):
        cfg = _config(n_records=10_000, mean_words=6.71)
        ds = generate_synthetic(cfg)
        mean = np.mean([len(r.description.split()) for r in ds.records])
        assert abs(mean - 6.71) < 0.5

    def test_head_share_target(self):
        cfg = _config(n_records=10_000, head_class_share=0.7218)
        ds = generate_synthetic(cfg)
        h = cfg.hierarchies[BreakdownLevel.BL1]
        head = head_class(h)
        share = sum(1 for r in ds.records if r.label(BreakdownLevel.BL1) == head) / len(ds)
        assert abs(share - 0.7218) < 0.02

    def test_unique_keys(self):
        ds = generate_synthetic(_config())
        keys = [r.key for r in ds.records]
        assert len(keys) == len(set(keys))

    def test_descriptions_survive_cleaning(self):
        ds = generate_synthetic(_config(n_records=200))
        assert all(clean_text(r.description) for r in ds.records)
