import json

import numpy as np
import pytest

from uscsensor import RabiParams, RateSet, build_model
from uscsensor.cascade import SensorGrid, g2, power_spectrum
from uscsensor.oracle import (
    OracleError, SensorSpec, compare_reports, composite_liouvillian, epsilon_bound, oracle_g2,
    oracle_spectrum, sensor_populations,
)

GAMMA = 5e-3
EPS = 1e-4


def test_zero_coupling_leaves_sensor_empty(model_small):
    _, pops, joint = sensor_populations(model_small, [SensorSpec(0.78, GAMMA, 0.0)])
    assert abs(pops[0]) < 1e-14


@pytest.mark.parametrize("coupling", ["full", "rotating"])
def test_epsilon_squared_scaling(model_small, coupling):
    w = model_small.frequency(1, 0)
    _, p1, _ = sensor_populations(model_small, [SensorSpec(w, GAMMA, EPS)], coupling)
    _, p2, _ = sensor_populations(model_small, [SensorSpec(w, GAMMA, EPS / 2)], coupling)
    assert p1[0] / p2[0] == pytest.approx(4.0, rel=0.01)


@pytest.mark.parametrize("coupling", ["full", "rotating"])
def test_composite_generator_trace_preserving(model_small, coupling):
    sensors = [SensorSpec(0.7, GAMMA, EPS), SensorSpec(1.1, GAMMA, EPS)]
    L = composite_liouvillian(model_small, sensors, coupling)
    assert L.trace_violation() < 1e-10
    assert L.dim == model_small.n_levels * 4


def test_sensor_swap(model_small):
    a = oracle_g2(model_small, 0.78, 1.04, GAMMA, EPS, "rotating")
    b = oracle_g2(model_small, 1.04, 0.78, GAMMA, EPS, "rotating")
    assert a == pytest.approx(b, rel=1e-6)


def test_rotating_oracle_matches_ladder(model_small):
    m = model_small
    w10, w21 = m.frequency(1, 0), m.frequency(2, 1)
    ref = oracle_g2(m, w21, w10, GAMMA, EPS, "rotating")
    assert g2(m.L0, m.x_prime, w21, w10, GAMMA) == pytest.approx(ref, rel=0.01)
    grid = SensorGrid((w10,), GAMMA)
    rep = compare_reports(power_spectrum(m.L0, m.x_prime, grid), oracle_spectrum(m, grid, EPS), 0.02)
    assert rep.passed


def test_compare_reports_identity(model_small):
    grid = SensorGrid.uniform(0.7, 0.8, 0.02, GAMMA)
    s = power_spectrum(model_small.L0, model_small.x_prime, grid)
    rep = compare_reports(s, s, 1e-12, label="self")
    assert rep.passed and rep.max_rel_err == 0
    rep_at = compare_reports(s, s, 1e-12, at=[0.741])
    assert len(rep_at.points) == 1 and rep_at.points[0].omega == pytest.approx(0.74)


def test_compare_reports_grid_mismatch(model_small):
    a = power_spectrum(model_small.L0, model_small.x_prime, SensorGrid((0.7,), GAMMA))
    b = power_spectrum(model_small.L0, model_small.x_prime, SensorGrid((0.8,), GAMMA))
    with pytest.raises(ValueError):
        compare_reports(a, b, 0.1)


def test_wrong_generator_is_caught(model_small):
    """Negative control: flipping the commutator sign must break agreement."""
    bad = build_model(model_small.params, model_small.rates, n_fock=12, n_levels=6, commutator_sign=+1)
    grid = SensorGrid((model_small.frequency(1, 0),), GAMMA)
    rep = compare_reports(power_spectrum(bad.L0, bad.x_prime, grid), oracle_spectrum(model_small, grid, EPS), 0.02)
    assert not rep.passed


def test_epsilon_constraint(model_small):
    bound = epsilon_bound(model_small, GAMMA)
    assert bound == pytest.approx(np.sqrt(GAMMA * 5e-4 / 2))
    with pytest.raises(OracleError):
        sensor_populations(model_small, [SensorSpec(0.7, GAMMA, bound)])


def test_oracle_limits(model_sym, model_small):
    with pytest.raises(OracleError):
        composite_liouvillian(model_small, [SensorSpec(0.7, GAMMA, EPS)] * 3)
    with pytest.raises(OracleError):
        composite_liouvillian(model_small, [SensorSpec(0.7, GAMMA, EPS)], coupling="bogus")
    big = build_model(RabiParams(0.3, np.pi / 2), RateSet.reference(), n_levels=48, n_fock=40)
    with pytest.raises(OracleError):
        composite_liouvillian(big, [SensorSpec(0.7, GAMMA, EPS)] * 2)


def test_report_json(tmp_path, model_small):
    s = power_spectrum(model_small.L0, model_small.x_prime, SensorGrid((0.7,), GAMMA))
    rep = compare_reports(s, s, 0.01, label="x")
    rep.write_json(tmp_path / "r.json")
    data = json.load(open(tmp_path / "r.json"))
    assert data["schema_version"] == "1" and data["pass"] is True
    assert set(data["points"][0]) == {"omega", "perturbative", "oracle", "rel_err", "pass"}


def test_identical_sensor_frequencies(model_small):
    m = model_small
    w21 = m.frequency(2, 1)
    ref = oracle_g2(m, w21, w21, GAMMA, EPS, "rotating")
    assert g2(m.L0, m.x_prime, w21, w21, GAMMA) == pytest.approx(ref, rel=0.01)
