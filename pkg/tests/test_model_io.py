"""Model file round trips and corruption handling."""

import numpy as np
import pytest

from horserule.errors import DataError
from horserule.inference import predict
from horserule.model_io import FORMAT_VERSION, load_model, save_model
from test_inference import hand_model


@pytest.fixture
def saved(tmp_path, rng):
    model = hand_model(rng.normal(size=(7, 4)), y_mean=3.25, y_sd=1.5)
    model.config = {"niter": 7, "seed": 42, "trees": {"ntree": 10}}
    model.train_rmse = 1.25
    path = tmp_path / "m.hr"
    save_model(model, path)
    return model, path


class TestRoundTrip:
    def test_fields_survive(self, saved):
        model, path = saved
        back = load_model(path)
        np.testing.assert_array_equal(back.draws.beta, model.draws.beta)
        np.testing.assert_array_equal(back.draws.sigma2, model.draws.sigma2)
        np.testing.assert_array_equal(back.draws.tau2, model.draws.tau2)
        assert back.config == model.config
        assert back.schema == model.schema
        assert back.feature_names == model.feature_names
        assert back.feature_sources == model.feature_sources
        assert back.columns == model.columns
        assert back.rules == model.rules
        assert back.train_rmse == model.train_rmse
        assert back.scaling.y_mean == model.scaling.y_mean
        assert back.scaling.y_sd == model.scaling.y_sd
        assert back.scaling.y_transform == model.scaling.y_transform
        np.testing.assert_array_equal(back.scaling.col_means, model.scaling.col_means)
        np.testing.assert_array_equal(back.scaling.kept, model.scaling.kept)
        assert back.draws.niter == model.draws.niter
        assert back.draws.seed == model.draws.seed

    def test_save_load_save_is_byte_identical(self, saved, tmp_path):
        _, path = saved
        again = tmp_path / "m2.hr"
        save_model(load_model(path), again)
        assert path.read_bytes() == again.read_bytes()

    def test_predictions_preserved_exactly(self, saved, rng):
        model, path = saved
        X = rng.normal(size=(25, 3))
        np.testing.assert_array_equal(predict(load_model(path), X),
                                      predict(model, X))

    def test_fitted_model_round_trip(self, boston, boston_model, tmp_path):
        path = tmp_path / "boston.hr"
        save_model(boston_model, path)
        back = load_model(path)
        np.testing.assert_array_equal(predict(back, boston.X),
                                      predict(boston_model, boston.X))
        assert len(back.rules) == len(boston_model.rules)
        assert back.schema == boston_model.schema


class TestCorruption:
    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="cannot read"):
            load_model(tmp_path / "nope.hr")

    def test_wrong_magic(self, tmp_path):
        p = tmp_path / "bad.hr"
        p.write_bytes(b"NOT-A-MODEL 1 10\n0123456789")
        with pytest.raises(DataError, match="not a horserule model"):
            load_model(p)

    def test_future_version(self, saved):
        _, path = saved
        raw = path.read_bytes()
        head, rest = raw.split(b"\n", 1)
        parts = head.split()
        parts[1] = str(FORMAT_VERSION + 1).encode()
        path.write_bytes(b" ".join(parts) + b"\n" + rest)
        with pytest.raises(DataError, match="newer than supported"):
            load_model(path)

    def test_truncated_header(self, saved):
        _, path = saved
        raw = path.read_bytes()
        head, _ = raw.split(b"\n", 1)
        path.write_bytes(raw[: len(head) + 1 + 20])
        with pytest.raises(DataError, match="truncated header"):
            load_model(path)

    def test_corrupt_header_json(self, saved):
        _, path = saved
        raw = path.read_bytes()
        head, rest = raw.split(b"\n", 1)
        hlen = int(head.split()[2])
        broken = head + b"\n" + b"{" * hlen + rest[hlen:]
        path.write_bytes(broken)
        with pytest.raises(DataError, match="corrupt model header"):
            load_model(path)

    def test_short_draw_block(self, saved):
        _, path = saved
        raw = path.read_bytes()
        path.write_bytes(raw[:-8])
        with pytest.raises(DataError, match="draw block has"):
            load_model(path)

    def test_extra_bytes_rejected(self, saved):
        _, path = saved
        path.write_bytes(path.read_bytes() + b"\x00" * 8)
        with pytest.raises(DataError, match="draw block has"):
            load_model(path)

    def test_garbled_first_line(self, tmp_path):
        p = tmp_path / "bad2.hr"
        p.write_bytes(b"HORSERULE-MODEL 1\n")
        with pytest.raises(DataError, match="not a horserule model"):
            load_model(p)
