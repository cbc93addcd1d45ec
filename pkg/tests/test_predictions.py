import pytest

from taxoroll.errors import MalformedCsv, MissingColumn
from taxoroll.predictions import Prediction, load_external_predictions, write_predictions_csv


def _write(path, rows):
    lines = ["record_key,predicted_code,confidence,model_id"] + rows
    path.write_text("\n".join(lines) + "\n")
    return path


class TestLoadExternalPredictions:
    def test_single_row(self, tmp_path):
        p = _write(tmp_path / "p.csv", ["p1/100,QA,0.97,bert"])
        preds = load_external_predictions(p)
        assert preds == [Prediction("p1/100", "QA", 0.97, "bert")]

    def test_confidence_out_of_range(self, tmp_path):
        p = _write(tmp_path / "p.csv", ["p1/100,QA,1.5,bert"])
        with pytest.raises(MalformedCsv, match="outside"):
            load_external_predictions(p)

    def test_empty_file_with_header(self, tmp_path):
        p = _write(tmp_path / "p.csv", [])
        assert load_external_predictions(p) == []

    def test_missing_column(self, tmp_path):
        p = tmp_path / "p.csv"
        p.write_text("record_key,predicted_code,confidence\nx,QA,0.5\n")
        with pytest.raises(MissingColumn):
            load_external_predictions(p)

    def test_bad_code(self, tmp_path):
        p = _write(tmp_path / "p.csv", ["p1/100,Q4,0.5,bert"])
        with pytest.raises(MalformedCsv, match="row 2"):
            load_external_predictions(p)

    def test_non_numeric_confidence(self, tmp_path):
        p = _write(tmp_path / "p.csv", ["p1/100,QA,high,bert"])
        with pytest.raises(MalformedCsv, match="not a number"):
            load_external_predictions(p)

    def test_roundtrip(self, tmp_path):
        preds = [Prediction("p1/1", "QA", 0.25, "m"), Prediction("p1/2", "LN", 1.0, "m")]
        path = tmp_path / "out.csv"
        assert write_predictions_csv(preds, path) == 2
        assert load_external_predictions(path) == preds
