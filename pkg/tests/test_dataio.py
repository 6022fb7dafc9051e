"""CSV round trips, presets, seeded generation, and model persistence."""

import json
import math

import numpy as np
import pytest

from curveclust.dataio import (
    Dataset,
    generate,
    get_preset,
    load_model,
    preset_curve_group,
    presets,
    rabbit_curve,
    read_csv,
    save_model,
    synthetic_suite,
    write_csv,
)
from curveclust.density import CurveGaussianModel, log_density
from curveclust.fourier import circle
from curveclust.mcec import McecConfig, mcec_run


def rabbit_formula(s):
    """Direct trig-sum evaluation of the rabbit coordinates (test oracle)."""
    t = 2 * math.pi * s
    x = (
        1.0 * math.cos(t) + 0.5 * math.sin(t)
        + 0.5 * math.cos(2 * t) + 0.25 * math.sin(2 * t)
        - 0.125 * math.cos(4 * t) + 0.25 * math.sin(4 * t)
        + 0.125 * math.cos(5 * t) - 0.125 * math.sin(5 * t)
    )
    y = (
        0.25 * math.cos(t) + 1.0 * math.sin(t)
        + 0.5 * math.sin(2 * t)
        - 0.125 * math.cos(3 * t) + 0.25 * math.sin(3 * t)
        + 0.125 * math.cos(5 * t) + 0.125 * math.sin(5 * t)
    )
    return np.array([x, y])


class TestPresets:
    def test_rabbit_matches_formula(self):
        curve = rabbit_curve()
        for s in (0.0, 0.25, 0.5, 0.75):
            np.testing.assert_allclose(
                curve.evaluate([s]), rabbit_formula(s), atol=1e-12
            )

    def test_preset_table(self):
        assert set(presets()) == {"rabbit", "circle", "ellipse", "two-circles"}
        assert get_preset("rabbit").default_sigma == 0.05
        with pytest.raises(KeyError):
            get_preset("dragon")

    def test_two_circles_group(self):
        group = preset_curve_group("two-circles")
        assert len(group) == 2
        centers = [curve.evaluate([0.0]) - [1.0, 0.0] for curve, _ in group]
        np.testing.assert_allclose(centers[0], [-1.5, 0.0], atol=1e-12)
        np.testing.assert_allclose(centers[1], [1.5, 0.0], atol=1e-12)


class TestCsv:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        data = Dataset(points=rng.normal(size=(100, 2)) * 1e3, name="t")
        path = tmp_path / "data.csv"
        write_csv(data, path)
        back = read_csv(path)
        np.testing.assert_array_equal(back.points, data.points)
        assert back.labels is None

    def test_labels_round_trip(self, tmp_path):
        data = Dataset(points=np.zeros((4, 3)), labels=[0, 1, 1, 2])
        path = tmp_path / "labeled.csv"
        write_csv(data, path)
        back = read_csv(path)
        np.testing.assert_array_equal(back.labels, [0, 1, 1, 2])
        assert back.dim == 3

    def test_nan_row_rejected_with_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("x1,x2\n1.0,2.0\nNaN,3.0\n")
        with pytest.raises(ValueError, match=":3"):
            read_csv(path)

    def test_ragged_row_rejected(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("x1,x2\n1.0,2.0\n1.0\n")
        with pytest.raises(ValueError, match=":3"):
            read_csv(path)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "head.csv"
        path.write_text("a,b\n1.0,2.0\n")
        with pytest.raises(ValueError, match="header"):
            read_csv(path)

    def test_byte_identical_outputs_for_equal_seeds(self, tmp_path):
        group = [(curve, sigma, 50) for curve, sigma in preset_curve_group("two-circles")]
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(generate(group, seed=12), p1)
        write_csv(generate(group, seed=12), p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestGenerate:
    def test_labels_and_counts(self):
        data = generate(
            [(circle(), 0.05, 300), (circle(1.0, (4.0, 0.0)), 0.05, 200)], seed=3
        )
        assert len(data) == 500
        counts = np.bincount(data.labels)
        np.testing.assert_array_equal(counts, [300, 200])

    def test_rabbit_points_near_curve(self):
        curve = rabbit_curve()
        data = generate([(curve, 0.05, 500)], seed=4)
        sweep = curve.evaluate(np.linspace(0, 1, 4096, endpoint=False)[:, None])
        sq = (
            np.sum(data.points**2, axis=1)[:, None]
            - 2.0 * data.points @ sweep.T
            + np.sum(sweep**2, axis=1)[None, :]
        )
        distances = np.sqrt(np.clip(np.min(sq, axis=1), 0.0, None))
        assert np.max(distances) < 6 * 0.05

    def test_prefix_stability_when_curve_added(self):
        base = [(circle(), 0.05, 100)]
        extended = base + [(circle(1.0, (5.0, 0.0)), 0.05, 100)]
        a = generate(base, seed=9)
        b = generate(extended, seed=9)
        np.testing.assert_array_equal(a.points, b.points[:100])

    def test_seed_determinism(self):
        group = [(rabbit_curve(), 0.05, 64)]
        np.testing.assert_array_equal(
            generate(group, seed=1).points, generate(group, seed=1).points
        )


class TestSyntheticSuite:
    def test_order1_composition(self):
        cases = synthetic_suite("order1", seed=0)
        assert [case.true_k for case in cases] == [2, 3]
        for case in cases:
            assert case.order == 1
            assert len(case.dataset) == 250 * case.true_k
            assert case.dataset.labels is not None

    def test_unknown_suite_rejected(self):
        with pytest.raises(KeyError):
            synthetic_suite("order9")

    def test_deterministic(self):
        a = synthetic_suite("order3", seed=5)[0]
        b = synthetic_suite("order3", seed=5)[0]
        np.testing.assert_array_equal(a.dataset.points, b.dataset.points)


class TestModelPersistence:
    def fitted_state(self):
        data = generate([(circle(), 0.05, 150)], seed=6)
        state, _ = mcec_run(data, McecConfig(k=1, order=1, seed=0, segments_K=8))
        return state, data

    def test_round_trip_density_agrees(self, tmp_path):
        state, data = self.fitted_state()
        path = tmp_path / "model.json"
        save_model(state, path)
        loaded = load_model(path)
        rng = np.random.default_rng(0)
        pts = rng.normal(scale=1.5, size=(50, 2))
        for orig, back in zip(state.active_components(), loaded.active_components()):
            np.testing.assert_allclose(
                log_density(orig.model, pts), log_density(back.model, pts), atol=1e-12
            )
            assert back.weight == pytest.approx(orig.weight, abs=1e-15)

    def test_negative_sigma_rejected(self, tmp_path):
        state, _ = self.fitted_state()
        path = tmp_path / "model.json"
        save_model(state, path)
        payload = json.loads(path.read_text())
        payload["components"][0]["sigma"] = -1.0
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="sigma"):
            load_model(path)

    def test_missing_weight_named_in_error(self, tmp_path):
        state, _ = self.fitted_state()
        path = tmp_path / "model.json"
        save_model(state, path)
        payload = json.loads(path.read_text())
        del payload["components"][0]["weight"]
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="weight"):
            load_model(path)

    def test_schema_mismatch_rejected(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"schema": "other/9", "components": []}))
        with pytest.raises(ValueError, match="schema"):
            load_model(path)

    def test_weights_must_sum_to_one(self, tmp_path):
        state, _ = self.fitted_state()
        path = tmp_path / "model.json"
        save_model(state, path)
        payload = json.loads(path.read_text())
        payload["components"][0]["weight"] = 0.25
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="sum"):
            load_model(path)


class TestDatasetValidation:
    def test_non_finite_points_rejected(self):
        with pytest.raises(ValueError):
            Dataset(points=np.array([[1.0, np.inf]]))

    def test_label_length_checked(self):
        with pytest.raises(ValueError):
            Dataset(points=np.zeros((3, 2)), labels=[0, 1])
