import pytest
from fastapi.testclient import TestClient

from taxoroll.corpus import split_dataset
from taxoroll.hierarchy import BreakdownLevel, Hierarchy
from taxoroll.pipeline import ModelKind
from taxoroll.service import ServiceConfig, build_app
from taxoroll.synth import SynthConfig, generate_synthetic


@pytest.fixture(scope="module")
def setup():
    h = Hierarchy.from_codes_closed(
        BreakdownLevel.BL1, [r + m + l for r in "LM" for m in "AB" for l in "ABC"]
    )
    cfg = SynthConfig(
        seed=21,
        hierarchies={BreakdownLevel.BL1: h},
        n_records=600,
        head_class_share=0.3,
        zipf_exponent=0.3,
        mean_words=6.0,
        noise_rate=0.05,
        enumeration_rate=0.1,
    )
    ds = split_dataset(generate_synthetic(cfg), 0.2, seed=21)
    config = ServiceConfig(
        levels=(BreakdownLevel.BL1,),
        models=(ModelKind.NB,),
        v=30,
        seed=21,
    )
    app = build_app(ds, {BreakdownLevel.BL1: h}, config)
    return ds, h, app


@pytest.fixture
def client(setup):
    _, _, app = setup
    return TestClient(app)


class TestBasicEndpoints:
    def test_health(self, client):
        resp = client.get("/api/health")
        assert resp.status_code == 200
        assert resp.json()["status"] == "ok"

    def test_hierarchy(self, client):
        resp = client.get("/api/hierarchy", params={"level": "BL1"})
        assert resp.status_code == 200
        codes = resp.json()["codes"]
        assert {"code": "L", "label": None, "parent": None, "depth": 1} in codes
        assert any(c["code"] == "LAB" and c["parent"] == "LA" for c in codes)

    def test_unknown_level_404(self, client):
        resp = client.get("/api/hierarchy", params={"level": "BL9"})
        assert resp.status_code == 400
        assert resp.json()["code"] == "invalidcode"

    def test_report_modes(self, client):
        flat = client.get("/api/report", params={"level": "BL1", "model": "nb", "mode": "flat"})
        dyn = client.get("/api/report", params={"level": "BL1", "model": "nb", "mode": "dynamic"})
        assert flat.status_code == dyn.status_code == 200
        assert flat.json()["mode"] == "flat"
        assert dyn.json()["mode"] == "dynamic"
        assert "snapshot_version" in dyn.json()

    def test_report_unknown_model_404(self, client):
        resp = client.get("/api/report", params={"level": "BL1", "model": "rf"})
        assert resp.status_code == 404
        assert resp.json()["code"] == "nomodel"

    def test_sweep_absent_404(self, client):
        resp = client.get("/api/sweep", params={"level": "BL1", "model": "nb"})
        assert resp.status_code == 404


class TestPredictions:
    def test_all_predictions_ascending(self, client):
        resp = client.get(
            "/api/predictions",
            params={"level": "BL1", "model": "nb", "max_confidence": 1.0, "limit": 500},
        )
        assert resp.status_code == 200
        body = resp.json()
        confs = [item["confidence"] for item in body["items"]]
        assert confs == sorted(confs)
        assert body["total"] == len(confs)

    def test_cutoff_zero_typically_empty(self, client):
        resp = client.get(
            "/api/predictions", params={"level": "BL1", "model": "nb", "max_confidence": 0.0}
        )
        assert resp.status_code == 200
        assert all(i["confidence"] == 0.0 for i in resp.json()["items"])

    def test_pagination_stable(self, client):
        first = client.get(
            "/api/predictions",
            params={"level": "BL1", "model": "nb", "limit": 2, "offset": 0},
        ).json()
        second = client.get(
            "/api/predictions",
            params={"level": "BL1", "model": "nb", "limit": 2, "offset": 2},
        ).json()
        assert first["total"] == second["total"]
        keys = [i["record_key"] for i in first["items"] + second["items"]]
        assert len(keys) == len(set(keys)) == 4

    def test_items_have_hierarchy_path(self, client):
        item = client.get(
            "/api/predictions", params={"level": "BL1", "model": "nb", "limit": 1}
        ).json()["items"][0]
        assert item["path"][-1] == item["predicted_code"]
        assert item["description"]


class TestCorrections:
    def test_submit_and_list(self, setup, client):
        ds, _, _ = setup
        key = ds.validation_records()[0].key
        resp = client.post(
            "/api/corrections",
            json={"record_key": key, "level": "BL1", "corrected_code": "LAA", "annotator": "t"},
        )
        assert resp.status_code == 201
        seq = resp.json()["sequence"]

        resp2 = client.post(
            "/api/corrections",
            json={"record_key": key, "level": "BL1", "corrected_code": "LAB", "annotator": "t"},
        )
        assert resp2.json()["sequence"] == seq + 1

        listed = client.get("/api/corrections", params={"record": key}).json()["corrections"]
        assert len(listed) == 2
        active = [c for c in listed if c["active"]]
        assert len(active) == 1 and active[0]["corrected_code"] == "LAB"

    def test_unknown_record_404(self, client):
        resp = client.post(
            "/api/corrections",
            json={"record_key": "nope/1", "level": "BL1", "corrected_code": "LAA"},
        )
        assert resp.status_code == 404
        assert resp.json()["code"] == "unknownrecord"

    def test_invalid_code_400(self, setup, client):
        ds, _, _ = setup
        key = ds.validation_records()[0].key
        resp = client.post(
            "/api/corrections",
            json={"record_key": key, "level": "BL1", "corrected_code": "ZZZ"},
        )
        assert resp.status_code == 400

    def test_correction_shows_in_predictions(self, setup, client):
        ds, _, _ = setup
        item = client.get(
            "/api/predictions", params={"level": "BL1", "model": "nb", "limit": 1}
        ).json()["items"][0]
        client.post(
            "/api/corrections",
            json={"record_key": item["record_key"], "level": "BL1", "corrected_code": "MBA"},
        )
        again = client.get(
            "/api/predictions", params={"level": "BL1", "model": "nb", "limit": 1}
        ).json()["items"][0]
        assert again["active_correction"]["corrected_code"] == "MBA"


class TestRetrain:
    def test_retrain_no_new_corrections_deterministic(self, setup):
        # fresh app so earlier test corrections don't leak in
        ds, h, _ = setup
        config = ServiceConfig(levels=(BreakdownLevel.BL1,), models=(ModelKind.NB,), v=30, seed=21)
        app = build_app(ds, {BreakdownLevel.BL1: h}, config)
        c = TestClient(app)
        before = c.get("/api/report", params={"level": "BL1", "model": "nb"}).json()
        resp = c.post("/api/retrain", json={"level": "BL1", "model": "nb"}).json()
        assert resp["before_macro_f1"] == pytest.approx(resp["after_macro_f1"], abs=1e-12)
        assert resp["after_macro_f1"] == pytest.approx(before["macro"]["f1"], abs=1e-12)
        assert resp["snapshot_version"] > before["snapshot_version"]

    def test_busy_during_concurrent_retrain(self, setup):
        ds, h, app = setup
        state = app.state.pipeline
        client = TestClient(app)
        assert state.retrain_lock.acquire(blocking=False)
        try:
            resp = client.post("/api/retrain", json={"level": "BL1", "model": "nb"})
            assert resp.status_code == 409
            assert resp.json()["code"] == "busy"
        finally:
            state.retrain_lock.release()

    def test_corrections_enter_training(self, setup):
        ds, h, _ = setup
        config = ServiceConfig(levels=(BreakdownLevel.BL1,), models=(ModelKind.NB,), v=30, seed=21)
        app = build_app(ds, {BreakdownLevel.BL1: h}, config)
        client = TestClient(app)
        # flip a train record's label, retrain, flip it back, retrain again:
        # macro-F1 must return to the original value (labels drive training)
        base = client.post("/api/retrain", json={"level": "BL1", "model": "nb"}).json()
        key = ds.train_records()[0].key
        original = ds.train_records()[0].label(BreakdownLevel.BL1)
        other = "MBA" if original != "MBA" else "MAA"
        client.post(
            "/api/corrections",
            json={"record_key": key, "level": "BL1", "corrected_code": other},
        )
        flipped = client.post("/api/retrain", json={"level": "BL1", "model": "nb"}).json()
        client.post(
            "/api/corrections",
            json={"record_key": key, "level": "BL1", "corrected_code": original},
        )
        restored = client.post("/api/retrain", json={"level": "BL1", "model": "nb"}).json()
        assert restored["after_macro_f1"] == pytest.approx(base["after_macro_f1"], abs=1e-12)
        assert flipped["n_corrections"] == 1


class TestResponseShapes:
    EXPECTED = {
        "/api/health": {"status", "version"},
        "/api/hierarchy": {"level", "codes"},
        "/api/report": {
            "level", "model_id", "mode", "per_class", "macro", "weighted",
            "accuracy", "n_evaluated", "n_excluded", "snapshot_version",
        },
        "/api/predictions": {"snapshot_version", "total", "limit", "offset", "items"},
    }

    def test_documented_key_sets(self, client):
        params = {
            "/api/health": {},
            "/api/hierarchy": {"level": "BL1"},
            "/api/report": {"level": "BL1", "model": "nb", "mode": "dynamic"},
            "/api/predictions": {"level": "BL1", "model": "nb", "limit": 1},
        }
        for path, expected in self.EXPECTED.items():
            body = client.get(path, params=params[path]).json()
            assert set(body) == expected, path

    def test_prediction_item_shape(self, client):
        item = client.get(
            "/api/predictions", params={"level": "BL1", "model": "nb", "limit": 1}
        ).json()["items"][0]
        assert set(item) == {
            "record_key", "description", "predicted_code", "predicted_label",
            "path", "confidence", "model_id", "active_correction",
        }

    def test_error_shape(self, client):
        body = client.get("/api/report", params={"level": "BL1", "model": "rf"}).json()
        assert set(body) == {"code", "message"}


class TestCorrectionLogReplay:
    def test_order_independent_for_distinct_keys(self, tmp_path):
        from taxoroll.service import CorrectionLog

        a = CorrectionLog(tmp_path / "a.jsonl")
        a.append("p/1", BreakdownLevel.BL1, "LAA", "x")
        a.append("p/2", BreakdownLevel.BL1, "LAB", "x")

        b = CorrectionLog(tmp_path / "b.jsonl")
        b.append("p/2", BreakdownLevel.BL1, "LAB", "x")
        b.append("p/1", BreakdownLevel.BL1, "LAA", "x")

        key = lambda log: {
            (k, lv.value): c.corrected_code for (k, lv), c in log.active().items()
        }
        assert key(a) == key(b)

    def test_append_only(self, tmp_path):
        from taxoroll.service import CorrectionLog

        log = CorrectionLog(tmp_path / "c.jsonl")
        log.append("p/1", BreakdownLevel.BL1, "LAA", "x")
        log.append("p/1", BreakdownLevel.BL1, "LAB", "x")
        lines = (tmp_path / "c.jsonl").read_text().strip().splitlines()
        assert len(lines) == 2  # supersession never rewrites history
        assert log.active()[("p/1", BreakdownLevel.BL1)].corrected_code == "LAB"


class TestDurableLog:
    def test_log_replayed_on_restart(self, setup, tmp_path):
        ds, h, _ = setup
        config = ServiceConfig(
            levels=(BreakdownLevel.BL1,),
            models=(ModelKind.NB,),
            v=30,
            seed=21,
            state_dir=tmp_path,
        )
        app = build_app(ds, {BreakdownLevel.BL1: h}, config)
        client = TestClient(app)
        key = ds.validation_records()[0].key
        client.post(
            "/api/corrections",
            json={"record_key": key, "level": "BL1", "corrected_code": "LAA"},
        )
        assert (tmp_path / "corrections.jsonl").exists()

        app2 = build_app(ds, {BreakdownLevel.BL1: h}, config)
        client2 = TestClient(app2)
        listed = client2.get("/api/corrections", params={"record": key}).json()["corrections"]
        assert len(listed) == 1
        # sequence numbering continues after replay
        resp = client2.post(
            "/api/corrections",
            json={"record_key": key, "level": "BL1", "corrected_code": "LAB"},
        )
        assert resp.json()["sequence"] == 2
