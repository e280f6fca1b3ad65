import math

import mpmath as mp
import pytest
from hypothesis import given, strategies as st
from scipy import special

from casimir_pfa.errors import DomainError
from casimir_pfa.stats import (
    Measurement,
    compatibility_probability,
    one_sided_probability,
    sigma_from_ci,
    two_sided_quantile,
)

PN = 1e-12
MEASURED = Measurement(0.32 * PN, 0.077 * PN, 0.95)


def erfc_oracle(z):
    """Maclaurin series below 3, Lentz continued fraction above, 40 digits."""
    with mp.workdps(40):
        z = mp.mpf(z)
        if z < 3:
            term = z
            total = z
            n = 0
            while abs(term) > mp.mpf(10) ** -45:
                n += 1
                term *= -z * z / n
                total += term / (2 * n + 1)
            return float(1 - 2 / mp.sqrt(mp.pi) * total)
        # erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + 1/2/(z + 1/(z + 3/2/(z + ...))))
        tail = mp.mpf(0)
        for n in range(400, 0, -1):
            tail = (n / mp.mpf(2)) / (z + tail)
        return float(mp.exp(-z * z) / mp.sqrt(mp.pi) / (z + tail))


@pytest.mark.parametrize("z", [0.0, 0.3, 1.0, 1.7, 2.5, 2.99, 3.0, 3.054, 4.2, 5.5, 6.0])
def test_erfc_against_series_oracle(z):
    assert float(special.erfc(z)) == pytest.approx(erfc_oracle(z), rel=1e-12, abs=0)


def test_quantile_accuracy():
    with mp.workdps(30):
        ref = float(mp.sqrt(2) * mp.erfinv(mp.mpf("0.95")))
    assert two_sided_quantile(0.95) == pytest.approx(ref, rel=1e-10)
    assert two_sided_quantile(0.95) == pytest.approx(1.95996, abs=1e-5)


def test_sigma_examples():
    assert sigma_from_ci(MEASURED) == pytest.approx(0.077 * PN / 1.959963984540054, rel=1e-10)
    assert sigma_from_ci(MEASURED) == pytest.approx(0.03929 * PN, rel=1e-4)
    one_sigma = Measurement(1.0, 0.5, 0.6827)
    assert sigma_from_ci(one_sigma) == pytest.approx(0.5, rel=1e-4)
    doubled = Measurement(0.32 * PN, 0.154 * PN, 0.95)
    assert sigma_from_ci(doubled) == pytest.approx(2 * sigma_from_ci(MEASURED), rel=1e-15)


def test_probability_examples():
    assert compatibility_probability(MEASURED, 0.32 * PN) == 1.0
    z = 0.12 / (0.077 / 1.959963984540054)
    assert z == pytest.approx(3.054, abs=1e-3)
    assert compatibility_probability(MEASURED, 0.20 * PN) == pytest.approx(erfc_oracle(z / math.sqrt(2)), rel=1e-10)
    assert compatibility_probability(MEASURED, 0.20 * PN) == pytest.approx(0.0023, abs=1e-4)
    assert one_sided_probability(MEASURED, 0.20 * PN) == pytest.approx(0.0011, abs=1e-4)
    assert compatibility_probability(MEASURED, 0.33 * PN) == pytest.approx(0.80, abs=0.005)


def test_measurement_invariants():
    with pytest.raises(DomainError):
        Measurement(1.0, 0.0)
    with pytest.raises(DomainError):
        Measurement(1.0, 0.1, 1.0)
    with pytest.raises(DomainError):
        two_sided_quantile(0.0)


@given(st.floats(0.0, 0.5), st.floats(0.0, 0.5))
def test_symmetric_and_monotone(d1, d2):
    v = MEASURED.value
    lo, hi = sorted((d1, d2))
    assert compatibility_probability(MEASURED, v + lo * PN) == pytest.approx(
        compatibility_probability(MEASURED, v - lo * PN), rel=1e-12, abs=1e-300)
    assert compatibility_probability(MEASURED, v + lo * PN) >= compatibility_probability(MEASURED, v + hi * PN)
