"""
Kernel catalog tests
Profiles, kinetic forms, problem validation and the position-space kernel
"""

import math

import numpy as np
import pytest

from separable_salpeter.errors import InvalidParameter
from separable_salpeter.kernels import (
    Dimension,
    Exponential1D,
    Gauss3D,
    KineticForm,
    KineticVariant,
    NumericEven1D,
    NumericRadial3D,
    Problem,
    SeparableTerm,
    Yamaguchi3D,
    check_problem,
    exponential_problem,
    gauss_problem,
    nonrelativistic,
    potential_kernel,
    profile_eval,
    salpeter,
    two_term_exponential_problem,
    validate_problem,
    yamaguchi_problem,
)

WAVENUMBERS = [0.1, 0.5, 1.0, 2.0, 5.0]


@pytest.fixture
def rng():
    return np.random.default_rng(42)


# ============= UNIT TESTS =============

class TestKineticForm:
    """Test the kinetic symbols and their threshold behaviour"""

    def test_salpeter_energy(self):
        """K(k) = sqrt(m^2 + k^2)"""
        kinetic = salpeter(1.0)
        assert kinetic.energy(0.75) == pytest.approx(1.25, rel=1e-15)

    def test_excess_without_cancellation(self):
        """K(k) - m keeps full precision for k << m"""
        kinetic = salpeter(1.0)
        assert kinetic.excess(1e-8) == pytest.approx(0.5e-16, rel=1e-12)

    def test_ultrarelativistic(self):
        """m = 0 gives |k|"""
        kinetic = salpeter(0.0)
        assert kinetic.excess(3.0) == 3.0
        assert kinetic.small_k_power == 1

    def test_nonrelativistic(self):
        """m + k^2 / (2m) bounds the Salpeter form from above"""
        k = np.linspace(0.0, 10.0, 101)
        assert np.all(nonrelativistic(2.0).energy(k) >= salpeter(2.0).energy(k))
        assert nonrelativistic(2.0).small_k_power == 2

    @pytest.mark.parametrize("kinetic", [salpeter(1.0), salpeter(0.0), nonrelativistic(3.0)])
    def test_threshold_ratio(self, kinetic):
        """threshold_ratio is k^2 / (K - m)"""
        k = np.array([0.3, 1.0, 4.0])
        np.testing.assert_allclose(kinetic.threshold_ratio(k), k * k / kinetic.excess(k), rtol=1e-13)


class TestProfiles:
    """Catalog profiles agree with numeric transforms of their position forms"""

    @pytest.mark.parametrize("k", WAVENUMBERS)
    def test_exponential_matches_numeric(self, k):
        """Exponential1D against the cosine transform of exp(-|x|/a)"""
        profile = Exponential1D(1.5)
        numeric = NumericEven1D(lambda x: math.exp(-abs(x) / 1.5))
        assert numeric(k) == pytest.approx(profile(k), rel=1e-8, abs=1e-11)

    @pytest.mark.parametrize("k", WAVENUMBERS)
    def test_yamaguchi_matches_numeric(self, k):
        """Yamaguchi3D against the radial transform of exp(-beta r)/r"""
        profile = Yamaguchi3D(2.0)
        numeric = NumericRadial3D(lambda r: math.exp(-2.0 * r) / r)
        assert numeric(k) == pytest.approx(profile(k), rel=1e-8, abs=1e-11)

    @pytest.mark.parametrize("k", [0.1, 0.5, 1.0, 2.0, 5.0])
    def test_gauss_matches_numeric(self, k):
        """Gauss3D against the radial transform of exp(-beta r^2 / 2)"""
        profile = Gauss3D(1.0)
        numeric = NumericRadial3D(profile.position)
        assert numeric(k) == pytest.approx(profile(k), rel=1e-8, abs=1e-11)

    def test_vectorized_evaluation(self):
        """Profiles accept arrays"""
        values = Gauss3D(2.0)(np.array([0.0, 1.0]))
        assert values.shape == (2,)
        assert values[0] == pytest.approx(2.0 ** -1.5)

    def test_profile_eval_rejects_negative_k(self):
        """Wavenumbers are non-negative"""
        with pytest.raises(InvalidParameter):
            profile_eval(Exponential1D(1.0), -0.5)

    def test_profile_eval_scalar(self):
        """Scalar input gives a float"""
        value = profile_eval(Yamaguchi3D(1.0), 0.0)
        assert isinstance(value, float)
        assert value == pytest.approx(math.sqrt(2.0 / math.pi))


class TestProblemValidation:
    """Test check_problem and validate_problem"""

    def test_valid_catalog_problems(self):
        """Every catalog shortcut builds a valid problem"""
        for problem in (exponential_problem(), two_term_exponential_problem(),
                        yamaguchi_problem(), gauss_problem()):
            result = check_problem(problem)
            assert result['valid']
            assert result['errors'] == []

    def test_negative_coupling(self):
        """v <= 0 is reported under 'v'"""
        result = check_problem(exponential_problem(v=-1.0))
        assert not result['valid']
        assert result['errors'][0][0] == 'v'

    def test_zero_coupling_allowed_for_free_problem(self):
        """allow_free accepts v = 0 but not v < 0"""
        assert check_problem(exponential_problem(v=0.0), allow_free=True)['valid']
        assert not check_problem(exponential_problem(v=-0.1), allow_free=True)['valid']

    def test_bad_range(self):
        """a <= 0 is reported under 'a'"""
        with pytest.raises(InvalidParameter) as excinfo:
            validate_problem(exponential_problem(a=0.0))
        assert excinfo.value.field == 'a'

    def test_dimension_mismatch(self):
        """A 3D profile in a 1D problem is rejected"""
        problem = Problem(Dimension.ONE_D, salpeter(1.0), (SeparableTerm(1.0, Gauss3D(1.0)),))
        result = check_problem(problem)
        assert ('dimension' in [name for name, _ in result['errors']])

    def test_empty_terms(self):
        """A problem needs at least one term"""
        with pytest.raises(InvalidParameter) as excinfo:
            validate_problem(Problem(Dimension.THREE_D, salpeter(1.0), ()))
        assert excinfo.value.field == 'terms'

    def test_nonrelativistic_needs_mass(self):
        """k^2/(2m) is undefined at m = 0"""
        problem = exponential_problem(kinetic=KineticForm(KineticVariant.NON_RELATIVISTIC, 0.0))
        assert not check_problem(problem)['valid']

    def test_negative_mass(self):
        """m < 0 is rejected"""
        result = check_problem(gauss_problem(mass=-1.0))
        assert result['errors'][0][0] == 'mass'


class TestProblemHelpers:
    """Test derived problems"""

    def test_scaled(self):
        """scaled multiplies every coupling and leaves profiles alone"""
        problem = two_term_exponential_problem(v_a=1.0, v_b=3.0).scaled(0.5)
        np.testing.assert_allclose(problem.couplings, [0.5, 1.5])
        assert problem.terms[1].f == Exponential1D(2.0)

    def test_with_mass(self):
        """with_mass keeps the kinetic variant"""
        problem = exponential_problem(kinetic=nonrelativistic(1.0)).with_mass(4.0)
        assert problem.mass == 4.0
        assert problem.kinetic.variant is KineticVariant.NON_RELATIVISTIC

    def test_symmetric_flag(self):
        """g defaults to f; an explicit different g breaks symmetry"""
        assert two_term_exponential_problem().symmetric
        asym = Problem(Dimension.ONE_D, salpeter(1.0), (SeparableTerm(1.0, Exponential1D(1.0), Exponential1D(2.0)),))
        assert not asym.symmetric
        assert asym.terms[0].right == Exponential1D(2.0)

    def test_measure(self):
        """2 on the half line in 1D, 4 pi k^2 in 3D"""
        assert Dimension.ONE_D.measure(3.0) == 2.0
        assert Dimension.THREE_D.measure(2.0) == pytest.approx(16.0 * math.pi)


# ============= PROPERTY TESTS =============

class TestPotentialKernel:
    """Test the position-space kernel"""

    def test_symmetric_kernel(self, rng):
        """V(x, x') = V(x', x) when every g equals f"""
        problem = two_term_exponential_problem(a=1.0, b=2.0, v_a=1.0, v_b=0.7)
        x, x_prime = rng.uniform(-5.0, 5.0, size=(2, 100))
        np.testing.assert_allclose(potential_kernel(problem, x, x_prime),
                                   potential_kernel(problem, x_prime, x), rtol=1e-14)

    def test_attractive(self, rng):
        """Positive couplings with positive profiles give V < 0"""
        problem = gauss_problem(beta=1.0, v=2.0)
        r, r_prime = rng.uniform(0.0, 3.0, size=(2, 50))
        assert np.all(potential_kernel(problem, r, r_prime) < 0)

    def test_value(self):
        """Single exponential term at the origin is -v"""
        assert potential_kernel(exponential_problem(v=2.5), 0.0, 0.0) == pytest.approx(-2.5)


if __name__ == "__main__":
    pytest.main([__file__, "-v", "--tb=short"])
