import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from barw.field import (
    FieldSample,
    class_rng,
    covariance,
    derive_seed,
    evaluate,
    evaluate_grid,
    moment_grids,
    read_grid,
    sample,
    second_moments,
    write_grid,
)
from barw.kacrice import Box


def test_sample_deterministic(spectra):
    sp = spectra(1105)
    a, b = sample(sp, 42), sample(sp, 42)
    assert np.array_equal(a.coefficients, b.coefficients)
    assert not np.array_equal(a.coefficients, sample(sp, 43).coefficients)
    assert len(sample(spectra(2), 0).coefficients) == 1


def test_sample_is_immutable(spectra):
    fs = sample(spectra(5), 1)
    with pytest.raises(ValueError):
        fs.coefficients[0] = 1.0
    with pytest.raises(ValueError):
        FieldSample(spectra(5), np.zeros(3))


def test_per_class_streams_are_independent_of_count():
    assert class_rng(9, 3).standard_normal() == class_rng(9, 3).standard_normal()
    assert derive_seed(1, 0) != derive_seed(1, 1)


def test_sample_moments(spectra):
    sp = spectra(5)
    draws = np.array([sample(sp, derive_seed(123, i)).coefficients for i in range(100_000)])
    assert np.all(np.abs(draws.mean(axis=0)) < 4 / np.sqrt(1e5))
    assert np.all(np.abs(draws.var(axis=0) - 1) < 0.05)


def test_evaluate_examples(spectra):
    sp5 = spectra(5)
    ones = FieldSample(sp5, np.ones(2))
    assert evaluate(ones, (0.25, 0.25)) == pytest.approx(2.0, abs=1e-14)
    assert evaluate(sample(sp5, 3), (0.0, 0.37)) == 0.0
    assert abs(evaluate(sample(spectra(18), 3), (1 / 3, 0.2))) < 1e-12


def test_grid_matches_pointwise(spectra):
    fs = sample(spectra(1105), 5)
    x1, x2 = np.linspace(0, 1, 7), np.linspace(0.1, 0.9, 5)
    G = evaluate_grid(fs, x1, x2)
    P = evaluate(fs, np.stack(np.meshgrid(x1, x2, indexing="ij"), axis=-1))
    assert np.allclose(G, P, atol=1e-12)


def test_covariance_examples(spectra):
    sp = spectra(5)
    assert covariance(sp, (0.25, 0.25), (0.25, 0.25)) == pytest.approx(2.0)
    assert covariance(sp, (0.3, 0.4), (1.0, 0.7)) == pytest.approx(0.0, abs=1e-14)


def test_covariance_monte_carlo(spectra):
    sp = spectra(65)
    rng = np.random.default_rng(0)
    pairs = rng.uniform(0, 1, size=(5, 2, 2))
    C = len(sp.field_classes)
    M = 200_000
    A = rng.standard_normal((M, C))
    xi = sp.field_classes
    for x, y in pairs:
        bx = 4 / np.sqrt(sp.N) * np.sin(np.pi * xi[:, 0] * x[0]) * np.sin(np.pi * xi[:, 1] * x[1])
        by = 4 / np.sqrt(sp.N) * np.sin(np.pi * xi[:, 0] * y[0]) * np.sin(np.pi * xi[:, 1] * y[1])
        prod = (A @ bx) * (A @ by)
        se = prod.std() / np.sqrt(M)
        assert abs(prod.mean() - covariance(sp, x, y)) < 4 * se


def test_second_moments_finite_differences(spectra):
    sp = spectra(65)
    h = 1e-5
    rng = np.random.default_rng(1)
    for x in rng.uniform(0.05, 0.95, size=(5, 2)):
        m = second_moments(sp, x)
        e = np.eye(2) * h
        cov = lambda a, b: covariance(sp, a, b)  # noqa: E731
        for i in range(2):
            fd = (cov(x + e[i], x) - cov(x - e[i], x)) / (2 * h)
            assert fd == pytest.approx(m.crossCov[i], rel=1e-5, abs=1e-8)
            for j in range(2):
                fd2 = (
                    cov(x + e[i], x + e[j]) - cov(x + e[i], x - e[j]) - cov(x - e[i], x + e[j]) + cov(x - e[i], x - e[j])
                ) / (4 * h * h)
                assert fd2 == pytest.approx(m.gradCov[i, j], rel=1e-5, abs=1e-4)


def test_boundary_moments(spectra):
    m = second_moments(spectra(65), (0.0, 0.4))
    assert m.varF == 0.0 and m.crossCov[1] == 0.0


def test_mean_variance_is_one(spectra):
    x = (np.arange(256) + 0.5) / 256
    v = moment_grids(spectra(1105), x, x)["var"]
    assert abs(v.mean() - 1) < 0.1


@given(st.floats(0, 1), st.floats(0, 1))
@settings(max_examples=200, deadline=None)
def test_joint_matrix_psd(spectra, a, b):
    M = second_moments(spectra(1105), (a, b)).joint()
    assert np.all(np.isfinite(M))
    assert np.linalg.eigvalsh(M).min() >= -1e-10 * max(1.0, np.abs(M).max())


def test_linear_in_coefficients(spectra):
    sp = spectra(65)
    a, b = sample(sp, 1), sample(sp, 2)
    s = FieldSample(sp, 2 * a.coefficients - b.coefficients)
    x = (0.31, 0.77)
    assert evaluate(s, x) == pytest.approx(2 * evaluate(a, x) - evaluate(b, x))


def test_grid_roundtrip(tmp_path):
    vals = np.random.default_rng(0).standard_normal((5, 3))
    p = tmp_path / "g.bin"
    write_grid(p, vals, 65, 7, 16, Box((0.25, 0.5), 0.5))
    raw = p.read_bytes()
    assert len(raw) == 32 + 8 * 15
    meta, back = read_grid(p)
    assert np.array_equal(back, vals)
    assert meta["n"] == 65 and meta["seed"] == 7 and meta["center"] == (0.25, 0.5)
