"""Datasets, presets, synthetic generation, and model persistence.

CSV layout: header ``x1,...,xn`` with an optional trailing ``label`` column,
comma separator, UTF-8, values written with 17 significant digits so a
write/read round trip is exact.

Model files are JSON (human-inspectable coefficients), one object per
mixture component with the coefficients listed under explicit (coordinate,
multiindex) keys and a trig-convention tag, so a file can be checked
against printed coefficient tables by eye.

All randomness flows through ``numpy.random.default_rng`` seeded
explicitly; generation uses one independent stream per curve, seeded by
(seed, curve_index), so adding a curve never perturbs the samples of the
curves before it.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .density import SIGMA_FLOOR, CurveGaussianModel, sample_points
from .fourier import FourierCurve, circle, coeff_multiindices, ellipse

MODEL_SCHEMA = "curveclust-mixture/1"
TRIG_CONVENTION = "neg-cos-pos-sin"


@dataclass
class Dataset:
    """N points in R^n with optional integer ground-truth labels."""

    points: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if not np.all(np.isfinite(self.points)):
            raise ValueError("dataset points must be finite")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int)
            if self.labels.shape != (self.points.shape[0],):
                raise ValueError("labels length must match the number of points")

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class CurvePreset:
    """A named curve with its customary noise level."""

    name: str
    curve: FourierCurve
    default_sigma: float


def rabbit_curve() -> FourierCurve:
    """Order-5 closed 2-D curve tracing a rabbit silhouette."""
    coeffs = np.zeros((2, 11))

    def put(i, l, value):
        coeffs[i, l + 5] = value

    # x coordinate: cosine amplitudes under negative indices, sine under positive
    put(0, -1, 1.0)
    put(0, 1, 0.5)
    put(0, -2, 0.5)
    put(0, 2, 0.25)
    put(0, -4, -0.125)
    put(0, 4, 0.25)
    put(0, -5, 0.125)
    put(0, 5, -0.125)
    # y coordinate
    put(1, -1, 0.25)
    put(1, 1, 1.0)
    put(1, 2, 0.5)
    put(1, -3, -0.125)
    put(1, 3, 0.25)
    put(1, -5, 0.125)
    put(1, 5, 0.125)
    return FourierCurve(coeffs=coeffs, order=5)


def presets() -> dict[str, CurvePreset]:
    two_r = 1.0
    return {
        "rabbit": CurvePreset("rabbit", rabbit_curve(), 0.05),
        "circle": CurvePreset("circle", circle(), 0.05),
        "ellipse": CurvePreset("ellipse", ellipse(2.0, 1.0), 0.05),
        "two-circles": CurvePreset("two-circles", circle(two_r, (-1.5, 0.0)), 0.05),
    }


def get_preset(name: str) -> CurvePreset:
    table = presets()
    if name not in table:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(table)}")
    return table[name]


def preset_curve_group(name: str) -> list[tuple[FourierCurve, float]]:
    """Presets may expand to several curves (multi-cluster generators)."""
    if name == "two-circles":
        return [(circle(1.0, (-1.5, 0.0)), 0.05), (circle(1.0, (1.5, 0.0)), 0.05)]
    preset = get_preset(name)
    return [(preset.curve, preset.default_sigma)]


def write_csv(dataset: Dataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = [f"x{i + 1}" for i in range(dataset.dim)]
        if dataset.labels is not None:
            header.append("label")
        writer.writerow(header)
        for idx in range(len(dataset)):
            row = [format(v, ".17g") for v in dataset.points[idx]]
            if dataset.labels is not None:
                row.append(str(int(dataset.labels[idx])))
            writer.writerow(row)


def read_csv(path, name: str | None = None) -> Dataset:
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file") from None
        has_labels = header and header[-1].strip().lower() == "label"
        coord_cols = len(header) - (1 if has_labels else 0)
        expected = [f"x{i + 1}" for i in range(coord_cols)]
        if [h.strip() for h in header[:coord_cols]] != expected:
            raise ValueError(
                f"{path}: header must be x1,...,xn[,label], got {header!r}"
            )
        points, labels = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}:{line_no}: expected {len(header)} columns, got {len(row)}"
                )
            try:
                coords = [float(v) for v in row[:coord_cols]]
            except ValueError as exc:
                raise ValueError(f"{path}:{line_no}: {exc}") from None
            if not all(np.isfinite(coords)):
                raise ValueError(f"{path}:{line_no}: non-finite coordinate")
            points.append(coords)
            if has_labels:
                try:
                    labels.append(int(row[-1]))
                except ValueError:
                    raise ValueError(
                        f"{path}:{line_no}: label {row[-1]!r} is not an integer"
                    ) from None
    return Dataset(
        points=np.asarray(points, dtype=float),
        labels=np.asarray(labels, dtype=int) if has_labels else None,
        name=name or str(path),
    )


def generate(
    curves: list[tuple[FourierCurve, float, int]], seed: int, name: str = "synthetic"
) -> Dataset:
    """Sample labeled points from several noisy curves.

    ``curves`` holds (curve, sigma, count) triples; label = position in the
    list.  Per-curve RNG streams are seeded (seed, index).
    """
    blocks, labels = [], []
    for index, (curve, sigma, count) in enumerate(curves):
        if count < 1:
            raise ValueError("per-curve count must be at least 1")
        rng = np.random.default_rng([seed, index])
        blocks.append(sample_points(curve, sigma, count, rng))
        labels.append(np.full(count, index, dtype=int))
    return Dataset(
        points=np.vstack(blocks), labels=np.concatenate(labels), name=name
    )


@dataclass(frozen=True)
class SuiteCase:
    """One synthetic clustering test case: labeled data plus its ground truth."""

    name: str
    dataset: Dataset
    true_k: int
    order: int


def _random_closed_curve(order: int, center, rng: np.random.Generator) -> FourierCurve:
    # random rotated ellipse base with higher harmonics decaying in amplitude,
    # so the curve stays closed, smooth, and roughly unit scale
    coeffs = np.zeros((2, 2 * order + 1))
    coeffs[:, order] = center
    a = rng.uniform(0.8, 1.3)
    b = rng.uniform(0.5, 0.9)
    angle = rng.uniform(0.0, np.pi)
    rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    coeffs[:, order - 1] = rot @ np.array([a, 0.0])
    coeffs[:, order + 1] = rot @ np.array([0.0, b])
    for f in range(2, order + 1):
        coeffs[:, order - f] = rng.normal(scale=0.25 / f, size=2)
        coeffs[:, order + f] = rng.normal(scale=0.25 / f, size=2)
    return FourierCurve(coeffs=coeffs, order=order)


def synthetic_suite(name: str, seed: int = 0) -> list[SuiteCase]:
    """Seeded desk-scale clustering suites, one per curve order 1..4.

    Each suite holds a two-curve and a three-curve case; curves sit on
    well-separated centers with sigma = 0.05 noise and 250 points each.
    """
    orders = {"order1": 1, "order2": 2, "order3": 3, "order4": 4}
    if name not in orders:
        raise KeyError(f"unknown suite {name!r}; available: {sorted(orders)}")
    order = orders[name]
    cases = []
    for case_idx, n_curves in enumerate((2, 3)):
        rng = np.random.default_rng([seed, order, case_idx])
        curves = []
        for c in range(n_curves):
            center = (4.0 * c, 0.0)
            curves.append((_random_closed_curve(order, center, rng), 0.05, 250))
        dataset = generate(
            curves, seed=seed + 1000 * case_idx + order, name=f"{name}-{n_curves}curves"
        )
        cases.append(
            SuiteCase(
                name=f"{name}-{n_curves}curves",
                dataset=dataset,
                true_k=n_curves,
                order=order,
            )
        )
    return cases


def _curve_to_json(curve: FourierCurve) -> list[dict]:
    entries = []
    for i in range(curve.ambient_dim):
        for l in curve.multiindices():
            entries.append({"i": i + 1, "l": list(l), "a": curve.coefficient(i, l)})
    return entries


def _curve_from_json(
    entries, order: int, intrinsic_dim: int, ambient_dim: int, where: str
) -> FourierCurve:
    coeffs = np.full((ambient_dim, (2 * order + 1) ** intrinsic_dim), np.nan)
    indices = {l: r for r, l in enumerate(coeff_multiindices(order, intrinsic_dim))}
    for pos, entry in enumerate(entries):
        for key in ("i", "l", "a"):
            if key not in entry:
                raise ValueError(f"{where}.coeffs[{pos}]: missing field {key!r}")
        l = tuple(entry["l"])
        if l not in indices:
            raise ValueError(f"{where}.coeffs[{pos}]: multiindex {l} out of range")
        i = entry["i"] - 1
        if not 0 <= i < ambient_dim:
            raise ValueError(f"{where}.coeffs[{pos}]: coordinate {entry['i']} out of range")
        coeffs[i, indices[l]] = float(entry["a"])
    if np.any(np.isnan(coeffs)):
        raise ValueError(f"{where}.coeffs: incomplete coefficient table")
    return FourierCurve(coeffs=coeffs, order=order, intrinsic_dim=intrinsic_dim)


def save_model(mixture, path) -> None:
    """Write a fitted mixture (active components only) as schema-tagged JSON."""
    components = []
    for component in mixture.active_components():
        model = component.model
        components.append(
            {
                "weight": component.weight,
                "sigma": model.sigma,
                "order": model.curve.order,
                "intrinsic_dim": model.curve.intrinsic_dim,
                "ambient_dim": model.curve.ambient_dim,
                "segments": model.segments_K,
                "coeffs": _curve_to_json(model.curve),
            }
        )
    payload = {
        "schema": MODEL_SCHEMA,
        "trig_convention": TRIG_CONVENTION,
        "components": components,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_model(path):
    """Read a mixture JSON back, validating every type invariant."""
    from .mcec import MixtureComponent, MixtureState

    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("schema") != MODEL_SCHEMA:
        raise ValueError(
            f"{path}: schema {payload.get('schema')!r} does not match {MODEL_SCHEMA!r}"
        )
    if payload.get("trig_convention") != TRIG_CONVENTION:
        raise ValueError(f"{path}: unsupported trig convention")
    raw = payload.get("components")
    if not raw:
        raise ValueError(f"{path}: components: missing or empty")
    components = []
    for pos, entry in enumerate(raw):
        where = f"{path}: components[{pos}]"
        for key in ("weight", "sigma", "order", "intrinsic_dim", "ambient_dim",
                    "segments", "coeffs"):
            if key not in entry:
                raise ValueError(f"{where}: missing field {key!r}")
        sigma = float(entry["sigma"])
        if sigma < SIGMA_FLOOR:
            raise ValueError(f"{where}.sigma: {sigma} below {SIGMA_FLOOR}")
        weight = float(entry["weight"])
        if not 0.0 <= weight <= 1.0:
            raise ValueError(f"{where}.weight: {weight} outside [0, 1]")
        curve = _curve_from_json(
            entry["coeffs"],
            order=int(entry["order"]),
            intrinsic_dim=int(entry["intrinsic_dim"]),
            ambient_dim=int(entry["ambient_dim"]),
            where=where,
        )
        model = CurveGaussianModel(
            curve=curve, sigma=sigma, segments_K=int(entry["segments"])
        )
        components.append(MixtureComponent(model=model, weight=weight, active=True))
    total = sum(c.weight for c in components)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"{path}: component weights sum to {total}, expected 1")
    return MixtureState(components=components)
