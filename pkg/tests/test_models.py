import logging
import math

import numpy as np
import pytest
from pydantic import ValidationError

from core.errors import CflViolationError, ConfigError, DomainTooSmallError
from core.grid.models import GridSpec
from core.models.dogs import DogsModel, DogsParams, flux_dogs, speed_dogs
from core.models.piper import PiperModel, PiperParams, flux_piper, speed_piper
from core.models.prey import PreyModel, PreyParams, flux_prey, speed_prey
from core.models.profiles import ExponentialProfile, GaussianProfile, LorentzProfile
from core.models.registry import build_model, params_class, resolve_scenario
from core.models.shapes import InitialShape, rasterize


class TestPiper:
    def test_flux_value(self):
        f = flux_piper(0.0, np.array([0.0, 0.0]), np.array(0.5), np.array([1.0, 0.0]), PiperParams())
        np.testing.assert_allclose(f, [2.25 / math.e, 0.0])

    def test_flux_vanishes_at_vacuum_and_congestion(self):
        x = np.random.default_rng(0).uniform(-2, 2, size=(5, 2))
        p = np.array([0.3, -0.1])
        for rho in (0.0, 1.0):
            np.testing.assert_allclose(flux_piper(0.0, x, np.full(5, rho), p, PiperParams()), 0.0)

    def test_flux_vanishes_at_the_piper(self):
        p = np.array([0.3, -0.1])
        np.testing.assert_allclose(flux_piper(0.0, p, np.array(0.5), p, PiperParams()), 0.0)

    def test_speed_interpolates_between_min_and_max(self):
        params = PiperParams()
        np.testing.assert_allclose(speed_piper(0.0, np.zeros(2), 0.0, params), [1.0, 0.0])
        np.testing.assert_allclose(speed_piper(0.0, np.zeros(2), 1.0, params), [7.0, 0.0])
        np.testing.assert_allclose(speed_piper(math.pi / 2, np.zeros(2), 0.5, params), [0.0, -4.0], atol=1e-12)

    def test_heading_override(self):
        model = PiperModel().with_heading(lambda t: np.array([0.0, 1.0]))
        np.testing.assert_allclose(model.speed(0.0, np.zeros(2), np.array([0.0])), [0.0, 1.0])

    def test_v_cfl(self):
        assert PiperModel().v_cfl == pytest.approx(9.0 * math.exp(-0.5) / math.sqrt(2.0), rel=1e-6)

    def test_params_validation(self):
        with pytest.raises(ValidationError):
            PiperParams(speed_min=8.0)
        with pytest.raises(ValidationError):
            PiperParams(p0=(1.0, 2.0, 3.0))
        assert PiperParams(speed_min=0.0).speed_min == 0.0
        assert PiperParams(p0="0, 0.5").p0 == (0.0, 0.5)


class TestDogs:
    def test_flux_hand_evaluated(self):
        params = DogsParams()
        x = np.array([0.1, 0.0])
        expected = 0.1 / 1.01
        for dog in (0.7, -0.7):
            d = 0.1 - dog
            expected += 20.0 / math.sqrt(0.2) * math.exp(-d ** 2 / 0.2) * d
        f = flux_dogs(0.0, x, np.array(0.5), np.array(params.p0), params)
        np.testing.assert_allclose(f, [0.25 * expected, 0.0])

    def test_speed_is_perpendicular(self):
        params = DogsParams()
        r = np.array([1.0, 0.0, 0.0, 0.0])
        np.testing.assert_allclose(speed_dogs(0.0, np.zeros(4), r, params), [0.0, -100.0 / math.sqrt(2.0), 0.0, 0.0])
        np.testing.assert_allclose(speed_dogs(0.0, np.zeros(4), np.zeros(4), params), 0.0)

    def test_v_cfl(self):
        repulsion = 20.0 / math.sqrt(0.2) * math.sqrt(0.1) * math.exp(-0.5)
        assert DogsModel().v_cfl == pytest.approx(0.5 + 2 * repulsion, rel=1e-6)

    def test_dog_free_run_has_no_repulsion(self):
        params = DogsParams(alpha=0.0)
        x = np.array([0.4, 0.3])
        f = flux_dogs(0.0, x, np.array(0.5), np.array(params.p0), params)
        np.testing.assert_allclose(f, 0.25 * x / (1.0 + 0.25))

    def test_state_size_follows_n(self):
        assert DogsModel(DogsParams(n=3, p0=(1, 0, 0, 1, -1, 0))).state_size == 6
        with pytest.raises(ValidationError):
            DogsParams(n=3)


class TestPrey:
    def test_flux_at_the_predator(self):
        params = PreyParams()
        p = np.array([0.0, -0.8, 0.0, 1.0])
        f = flux_prey(0.0, p[:2], np.array(0.5), p, params)
        np.testing.assert_allclose(f, [0.0, -0.25])

    def test_speed_is_velocity_then_acceleration(self):
        p = np.array([0.0, -0.8, 0.0, 1.0])
        np.testing.assert_allclose(speed_prey(0.0, p, np.array([0.01, -0.02]), PreyParams()), [0.0, 1.0, 4.0, -8.0])

    def test_v_cfl(self):
        assert PreyModel().v_cfl == pytest.approx(2.0 * (0.5 + 40.0 / (5.25 * math.e)), rel=1e-6)

    def test_samples_at_predator_only(self):
        model = PreyModel()
        np.testing.assert_array_equal(model.agent_positions(model.initial_state), [[0.0, -0.8]])


class TestProfiles:
    def test_gaussian_suprema(self):
        profile = GaussianProfile(amplitude=1.0, length=1.0)
        assert profile.sup_magnitude() == pytest.approx(math.exp(-0.5) / math.sqrt(2.0), rel=1e-6)
        assert profile.sup_jacobian() == pytest.approx(math.sqrt(2.0), rel=1e-9)

    def test_lorentz_magnitude(self):
        assert LorentzProfile(amplitude=2.0).sup_magnitude() == pytest.approx(1.0, rel=1e-6)

    @pytest.mark.parametrize("profile", [
        GaussianProfile(1.0, 1.0), LorentzProfile(1.0), ExponentialProfile(40.0, 5.25),
    ])
    def test_swept_integral_grows_with_radius(self, profile):
        values = [profile.swept_grad_div_integral(r) for r in (0.0, 0.5, 1.0)]
        assert values[0] > 0
        assert values[0] <= values[1] <= values[2]


class TestShapes:
    def test_parse_text(self):
        assert InitialShape.model_validate("disc 0 0 0.3") == InitialShape(kind="disc", numbers=(0.0, 0.0, 0.3))
        assert InitialShape.model_validate("EMPTY").bounding_box() is None
        shape = InitialShape.model_validate("rectangle -0.5 0 0.35 0.85")
        assert InitialShape.model_validate(shape.to_text()) == shape

    @pytest.mark.parametrize("text", ["rectangle 1 0 0 1", "disc 0 0 -1", "disc 0 0", "triangle 0 0 1", "disc a b c"])
    def test_bad_shapes(self, text):
        with pytest.raises(ValidationError):
            InitialShape.model_validate(text)

    def test_disc_area(self):
        grid = GridSpec.from_extent(-1, 1, -1, 1, nx=200, ny=200)
        field = rasterize(InitialShape.model_validate("disc 0 0 0.5"), grid, rho_max=2.0)
        assert field.values.sum() * grid.cell_area == pytest.approx(2.0 * math.pi * 0.25, rel=1e-3)
        assert field.max == 2.0

    def test_shape_must_fit_with_margin(self):
        grid = GridSpec.from_extent(-1, 1, -1, 1, nx=20, ny=20)
        with pytest.raises(DomainTooSmallError, match="required extent"):
            rasterize(InitialShape.model_validate("rectangle -0.95 0 0 0.5"), grid, rho_max=1.0)

    def test_transport_margin_warns_or_fails(self, caplog):
        grid = GridSpec.from_extent(-1, 1, -1, 1, nx=20, ny=20)
        shape = InitialShape.model_validate("rectangle -0.5 0.5 -0.5 0.5")
        with caplog.at_level(logging.WARNING):
            rasterize(shape, grid, rho_max=1.0, transport_margin=1.0)
        assert "required extent" in caplog.text
        with pytest.raises(DomainTooSmallError):
            rasterize(shape, grid, rho_max=1.0, transport_margin=1.0, strict=True)


class TestRegistry:
    def test_aliases(self):
        assert resolve_scenario("Pied_Piper") == "piper"
        assert params_class("predator") is PreyParams

    def test_unknown_scenario_names_valid_ones(self):
        with pytest.raises(ConfigError, match="dogs, piper, prey"):
            resolve_scenario("wolf")

    def test_build_with_wrong_params(self):
        with pytest.raises(ConfigError):
            build_model("piper", DogsParams())

    def test_build_defaults(self):
        assert isinstance(build_model("dogs"), DogsModel)
        assert build_model("prey").state_size == 4


SCENARIO_MODELS = [PiperModel(), DogsModel(), PreyModel()]


def _random_states(model, rng, count=20):
    return rng.uniform(-2, 2, size=(count, model.state_size))


def _admissible_averages(model, mass, rng):
    """Averaging outputs a density of the given mass can produce at the agents."""
    points = len(model.agent_positions(model.initial_state))
    if model.mode.value == "value":
        return rng.uniform(0.0, model.rho_max, size=points)
    directions = rng.normal(size=(points, 2))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    lengths = rng.uniform(0.0, model.kernel.max_grad_norm * mass, size=(points, 1))
    return (directions * lengths).ravel()


@pytest.mark.parametrize("model", SCENARIO_MODELS, ids=lambda m: m.name)
class TestScenarioProperties:
    def test_flux_vanishes_at_vacuum_and_congestion(self, model):
        rng = np.random.default_rng(1)
        x = rng.uniform(-2, 2, size=(50, 2))
        for p in _random_states(model, rng):
            for rho in (0.0, model.rho_max):
                np.testing.assert_allclose(model.flux(0.3, x, np.full(50, rho), p), 0.0, atol=1e-12)

    def test_flux_is_lipschitz_in_rho_with_v_cfl(self, model):
        rng = np.random.default_rng(2)
        x = rng.uniform(-2, 2, size=(200, 2))
        a = rng.uniform(0.0, model.rho_max, size=200)
        b = rng.uniform(0.0, model.rho_max, size=200)
        for p in _random_states(model, rng, count=5):
            jump = np.linalg.norm(model.flux(0.0, x, a, p) - model.flux(0.0, x, b, p), axis=-1)
            assert np.all(jump <= model.v_cfl * np.abs(a - b) * (1 + 1e-6) + 1e-12)

    def test_agent_speed_is_sublinear(self, model):
        rng = np.random.default_rng(3)
        mass = 0.2
        bound = model.c_phi(mass)
        for p in _random_states(model, rng, count=100):
            r = _admissible_averages(model, mass, rng)
            for t in (0.0, 0.7, 2.5):
                assert np.linalg.norm(model.speed(t, p, r)) <= bound * (1.0 + np.linalg.norm(p)) + 1e-12

    def test_sampled_speed_bound_stays_below_v_cfl(self, model):
        grid = GridSpec.from_extent(-2, 2, -2, 2, nx=50, ny=50)
        worst = model.check_speed_bound(grid, model.initial_state)
        assert 0.0 < worst <= model.v_cfl * (1 + 1e-6)


def test_understated_speed_bound_is_rejected():
    class Understated(DogsModel):
        @property
        def v_cfl(self):
            return 0.1

    grid = GridSpec.from_extent(-1, 1, -1, 1, nx=20, ny=20)
    model = Understated()
    with pytest.raises(CflViolationError, match="exceeds V_cfl"):
        model.check_speed_bound(grid, model.initial_state)


def test_dogs_push_the_herd_inward():
    params = DogsParams()
    # between the right dog and the centre, away from the left dog's reach
    x = np.array([[0.4, 0.0], [0.3, 0.05]])
    f = flux_dogs(0.0, x, np.full(2, 0.5), np.array(params.p0), params)
    assert np.all(f[:, 0] < 0)
