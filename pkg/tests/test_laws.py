from fractions import Fraction as F

import numpy as np
import pytest

from rifs.laws import SAMPLED, TRIANGULAR, UNIFORM, PerturbationLaw, convolve_laws, difference_law


def test_uniform_density_and_quantile():
    law = PerturbationLaw(F(1), F(3, 10))
    assert law.centered_pdf(0.0) == pytest.approx(1 / 0.6)
    assert law.centered_pdf(0.3) == 0.0
    assert law.sup_density == pytest.approx(1 / 0.6)
    q = np.linspace(0.01, 0.99, 9)
    assert np.allclose(law.centered_cdf(law.centered_quantile(q)), q)
    assert law.mass() == pytest.approx(1, abs=1e-9)


def test_triangular_closed_forms():
    law = PerturbationLaw(0.0, 0.5, TRIANGULAR)
    assert law.sup_density == pytest.approx(2.0)
    assert law.centered_cdf(0.0) == pytest.approx(0.5)
    q = np.array([0.1, 0.4, 0.9])
    assert np.allclose(law.centered_cdf(law.centered_quantile(q)), q)
    assert law.mass() == pytest.approx(1, abs=1e-9)


def test_sampled_normalised_and_samples_inside_support():
    off = np.linspace(-1, 1, 5)
    law = PerturbationLaw(2.0, 1.0, SAMPLED, off, np.array([0, 1, 2, 1, 0.0]))
    assert law.mass() == pytest.approx(1, abs=1e-9)
    x = law.sample(np.random.default_rng(0).random(1000))
    assert np.all((x > 1) & (x < 3))


def test_unknown_shape_rejected():
    with pytest.raises(ValueError):
        PerturbationLaw(0, 1, "gaussian")


def test_uniform_difference_is_exact_triangle():
    u = PerturbationLaw(F(1, 20), F(1, 200))
    d = difference_law(u, u)
    assert d.shape == TRIANGULAR and d.half_width == F(1, 100) and d.center == 0


def test_difference_of_unequal_uniforms_matches_monte_carlo():
    a, b = PerturbationLaw(0.0, 0.2), PerturbationLaw(1.0, 0.5)
    d = difference_law(a, b)
    assert d.center == pytest.approx(-1.0) and d.half_width == pytest.approx(0.7)
    gen = np.random.default_rng(1)
    z = a.sample(gen.random(200000)) - b.sample(gen.random(200000)) - d.center
    for t in (-0.5, -0.1, 0.3, 0.6):
        assert d.centered_cdf(t) == pytest.approx(np.mean(z <= t), abs=5e-3)


def test_convolution_integrates_to_one_with_exact_support():
    laws = [PerturbationLaw(0.0, 0.3), PerturbationLaw(1.0, 0.3, TRIANGULAR)]
    c = convolve_laws([(1.0, laws[0]), (0.4, laws[1])], 0.4)
    assert c.half_width == pytest.approx(0.42)
    assert c.mass() == pytest.approx(1, abs=1e-6)
    assert c.centered_pdf(0.42) == 0 and c.centered_pdf(-0.43) == 0
    assert c.centered_pdf(0.41) > 0
