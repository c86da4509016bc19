import math

import numpy as np
import pytest
from conftest import random_density_matrix, random_hermitian

from fockdecay import (
    FockSpace,
    InvariantViolation,
    ModeSpec,
    MixingParams,
    build_decay_model,
    build_generator,
    build_kraus,
    apply_channel,
    build_mixed_model,
    generator_apply,
    integrate,
    number_state,
    trace_distance,
    vacuum_state,
)


def single_model(cutoff=6, mass=0.0, width=1.0):
    return build_decay_model(FockSpace(ModeSpec(mass=mass, width=width, cutoff=cutoff)))


def test_generator_vacuum_is_stationary():
    model = single_model(cutoff=3)
    gen = build_generator(model)
    rho = vacuum_state(model.space).matrix
    assert np.max(np.abs(generator_apply(gen, rho))) == 0.0


def test_generator_one_particle_rates():
    model = single_model(cutoff=3, mass=1.7)
    gen = build_generator(model)
    rho = number_state(model.space, (1,)).matrix
    dot = generator_apply(gen, rho)
    assert dot[1, 1] == pytest.approx(-1.0, abs=1e-14)
    assert dot[0, 0] == pytest.approx(1.0, abs=1e-14)
    off = dot - np.diag(np.diag(dot))
    assert np.max(np.abs(off)) <= 1e-14


def test_generator_coherence_coefficient():
    # d/dt rho_{10} = -(i m + Gamma/2) rho_{10}
    m, gamma = 0.9, 1.0
    model = single_model(cutoff=3, mass=m, width=gamma)
    gen = build_generator(model)
    rho = np.zeros((4, 4), dtype=complex)
    rho[1, 0] = 1.0
    dot = generator_apply(gen, rho)
    assert dot[1, 0] == pytest.approx(-(1j * m + gamma / 2), abs=1e-14)


def test_generator_matrix_element_system():
    # linear system for the matrix elements, checked coefficient by coefficient
    m, gamma, cutoff = 0.6, 1.3, 6
    model = single_model(cutoff=cutoff, mass=m, width=gamma)
    gen = build_generator(model)
    for k in range(6):
        for l in range(6):
            unit = np.zeros((cutoff + 1,) * 2, dtype=complex)
            unit[k, l] = 1.0
            dot = generator_apply(gen, unit)
            expected = np.zeros_like(unit)
            expected[k, l] = -1j * (k - l) * m - 0.5 * (k + l) * gamma
            if k >= 1 and l >= 1:
                expected[k - 1, l - 1] = math.sqrt(k * l) * gamma
            assert np.max(np.abs(dot - expected)) <= 1e-13


def test_generator_traceless_and_hermiticity_preserving(rng):
    model = single_model(cutoff=5, mass=0.8)
    gen = build_generator(model)
    for _ in range(5):
        omega = random_hermitian(rng, model.space).entries
        dot = generator_apply(gen, omega)
        assert abs(np.trace(dot)) <= 1e-12 * max(1.0, float(np.max(np.abs(omega))))
        assert np.max(np.abs(dot - dot.conj().T)) <= 1e-12


def test_generator_dimension_mismatch():
    gen = build_generator(single_model(cutoff=2))
    with pytest.raises(ValueError):
        generator_apply(gen, np.eye(5, dtype=complex))


def test_integrate_zero_steps_returns_input():
    model = single_model(cutoff=2)
    gen = build_generator(model)
    rho = number_state(model.space, (1,))
    out = integrate(gen, rho, [0.0], 1e-3)
    assert out == [rho]


def test_integrate_one_particle_decay():
    model = single_model(cutoff=1)
    gen = build_generator(model)
    out = integrate(gen, number_state(model.space, (1,)), [1.0], 1e-3)[0]
    expected = np.diag([1 - math.exp(-1.0), math.exp(-1.0)])
    assert np.max(np.abs(out.matrix - expected)) <= 1e-9


def test_integrate_validates_inputs():
    model = single_model(cutoff=2)
    gen = build_generator(model)
    rho = number_state(model.space, (1,))
    with pytest.raises(ValueError):
        integrate(gen, rho, [1.0], 0.0)
    with pytest.raises(ValueError):
        integrate(gen, rho, [0.00037], 1e-3)  # not a step multiple
    with pytest.raises(ValueError):
        integrate(gen, rho, [1.0, 0.5], 1e-3)


def test_trace_drift_budget():
    model = single_model(cutoff=5)
    gen = build_generator(model)
    rho = number_state(model.space, (4,))
    traj = integrate(gen, rho, [1.0, 3.0, 5.0], 1e-3)
    for state, t in zip(traj, [1.0, 3.0, 5.0]):
        drift = abs(np.trace(state.matrix) - 1.0)
        assert drift <= 1e-10 * t


def test_rk4_matches_kraus_on_mixed_model(rng):
    space = FockSpace([ModeSpec(width=0.5, cutoff=4), ModeSpec(mass=2.0, width=1.5, cutoff=4)])
    model = build_mixed_model(space, MixingParams(theta=0.9, phi=0.4, psi=1.1, chi=0.2),
                              masses=(0.0, 2.0), widths=(0.5, 1.5))
    gen = build_generator(model)
    t = 0.5
    for _ in range(3):
        rho = random_density_matrix(rng, space, max_total=4)
        ode = integrate(gen, rho, [t], 1e-3)[0]
        kraus = apply_channel(build_kraus(model, t), rho)
        assert trace_distance(ode, kraus) <= 1e-8
