import math

import numpy as np
import pytest

from longwave.errors import InvalidArgumentError, NonConvergenceError
from longwave.fem import FunctionSpace, evaluate_at_points
from longwave.mesh import build_rectangle_mesh, make_triangulation
from longwave.models import make_model
from longwave.solitary import (
    BbmWaveOperator,
    PeregrineWaveOperator,
    SolitaryWaveProblem,
    initial_guess,
    petviashvili_bbm,
    petviashvili_bbm_continuation,
    petviashvili_peregrine,
    recover_fields,
    speed_from_amplitude_peregrine,
)

# frozen high-precision oracle values (mpmath, 40 digits)
CS_A03 = 1.1337767844447539  # exact Peregrine speed at A=0.3, D0=1, g=1
LAMBDA_A03 = 0.4743416490252569


@pytest.fixture(scope="module")
def channel():
    mesh = build_rectangle_mesh((-20.0, 30.0, -1.0, 1.0), 150, 6, diagonal="crossed")
    return FunctionSpace(mesh, 1), FunctionSpace(mesh, 2, components=2)


@pytest.fixture(scope="module")
def problem():
    return SolitaryWaveProblem(amplitude=0.3, depth=1.0, gravity=1.0, tolerance=1e-5)


@pytest.fixture(scope="module")
def peregrine_state(problem, channel):
    _, Vu = channel
    return petviashvili_peregrine(problem, Vu)


@pytest.fixture(scope="module")
def bbm_state(problem, channel):
    Veta, Vu = channel
    return petviashvili_bbm(problem, Veta, Vu)


# -- construction and guesses ------------------------------------------------------


def test_problem_validation():
    with pytest.raises(InvalidArgumentError):
        SolitaryWaveProblem(amplitude=-0.1, depth=1.0)
    with pytest.raises(InvalidArgumentError):
        SolitaryWaveProblem(amplitude=0.3, depth=1.0, gamma=5.0)
    with pytest.raises(InvalidArgumentError):
        SolitaryWaveProblem(amplitude=0.3, depth=1.0, direction=(1.0, 1.0))
    with pytest.raises(InvalidArgumentError):
        SolitaryWaveProblem(amplitude=0.3, depth=1.0, gravity=1.0, speed=0.5)


def test_decay_rate_value(problem):
    assert problem.decay_rate == pytest.approx(LAMBDA_A03, abs=1e-15)


def test_guess_peak_values(problem, channel):
    # eta0(0) = A and w0(0) = c_s A / (D0 + A)
    Veta, Vu = channel
    state = initial_guess(problem, Vu, etaspace=Veta, speed=problem.guess_speed)
    mid = np.array([[0.0, 0.0]])
    eta_mid = evaluate_at_points(Veta, state.eta, mid)[0]
    assert eta_mid == pytest.approx(0.3, rel=5e-3)  # P1 projection overshoot only
    w_mid = evaluate_at_points(Vu, state.w, mid)[0, 0]
    assert w_mid == pytest.approx(problem.guess_speed * 0.3 / 1.3, rel=5e-3)


def test_guess_tail_magnitude(problem):
    # oracle: A sech^2(lambda * 20) evaluated directly
    tail = 0.3 / math.cosh(LAMBDA_A03 * 20.0) ** 2
    assert tail == pytest.approx(6.902760618e-9, rel=1e-8)
    assert tail < 1e-7 * 0.3 * 35  # comfortably below the tail tolerance scale


def test_short_channel_warns(caplog):
    mesh = build_rectangle_mesh((-5.0, 5.0, -1.0, 1.0), 20, 4)
    Vu = FunctionSpace(mesh, 1, components=2)
    prob = SolitaryWaveProblem(amplitude=0.3, depth=1.0)
    import logging

    with caplog.at_level(logging.WARNING, logger="longwave.solitary"):
        initial_guess(prob, Vu)
    assert any("too short" in rec.message for rec in caplog.records)


# -- speed-amplitude relation --------------------------------------------------------


def test_speed_frozen_value():
    assert speed_from_amplitude_peregrine(0.3, 1.0, 1.0) == pytest.approx(CS_A03, abs=1e-14)


def test_speed_small_amplitude_limit():
    # c_s -> sqrt(g D0) as A -> 0 (series oracle: value at 1e-6 within 1e-4)
    assert speed_from_amplitude_peregrine(1e-6, 1.0, 1.0) == pytest.approx(1.0, abs=1e-4)


def test_speed_monotonic_in_amplitude():
    a = np.linspace(1e-4, 0.5, 400)
    cs = np.array([speed_from_amplitude_peregrine(x, 1.0, 1.0) for x in a])
    assert np.all(np.diff(cs) > 0)


def test_speed_rejects_nonpositive():
    with pytest.raises(InvalidArgumentError):
        speed_from_amplitude_peregrine(0.0, 1.0, 1.0)


# -- Petviashvili iterations -----------------------------------------------------------


def test_peregrine_exit_contract(problem, channel, peregrine_state):
    _, Vu = channel
    st = peregrine_state
    assert st.residual < problem.tolerance
    assert st.iterations <= 25
    # recomputing the residual from the returned iterate reproduces it
    op = PeregrineWaveOperator(problem, Vu)
    _, _, _, residual = op.diagnostics(st.w)
    assert residual == pytest.approx(st.residual, abs=1e-12)


def test_peregrine_transverse_component_zero(channel, peregrine_state):
    _, Vu = channel
    assert np.abs(peregrine_state.w[Vu.n_scalar :]).max() <= 1e-12


def test_bbm_exit_contract(problem, channel, bbm_state):
    Veta, Vu = channel
    st = bbm_state
    assert st.residual < problem.tolerance
    assert st.iterations <= 25
    op = BbmWaveOperator(problem, Veta, Vu)
    vec = np.concatenate([st.eta, st.w])
    _, _, _, residual = op.diagnostics(vec)
    assert residual == pytest.approx(st.residual, abs=1e-12)


def test_bbm_transverse_zero_and_fewer_iterations(channel, peregrine_state, bbm_state):
    _, Vu = channel
    assert np.abs(bbm_state.w[Vu.n_scalar :]).max() <= 1e-12
    assert bbm_state.iterations < peregrine_state.iterations


def test_multiplier_near_one_at_tight_tolerance(channel):
    Veta, Vu = channel
    prob = SolitaryWaveProblem(amplitude=0.3, depth=1.0, gravity=1.0, tolerance=1e-8)
    st = petviashvili_peregrine(prob, Vu)
    assert abs(st.multiplier - 1.0) <= 1e-6
    st = petviashvili_bbm(prob, Veta, Vu)
    assert abs(st.multiplier - 1.0) <= 1e-6


def test_iteration_cap_raises(channel):
    _, Vu = channel
    prob = SolitaryWaveProblem(amplitude=0.3, depth=1.0, gravity=1.0, tolerance=1e-12)
    with pytest.raises(NonConvergenceError):
        petviashvili_peregrine(prob, Vu, maxiter=2)


# -- recovery ---------------------------------------------------------------------------


def test_recover_zero_iterate(problem, channel):
    from longwave.solitary import PetviashviliState

    Veta, Vu = channel
    st = PetviashviliState(
        w=np.zeros(Vu.dim), eta=None, multiplier=1.0, residual=0.0, iterations=0,
        system="peregrine", speed=CS_A03,
    )
    fields = recover_fields(problem, st, Veta, Vu)
    assert np.allclose(fields.eta, 0.0, atol=1e-12)
    assert np.all(fields.u == 0.0)


def test_recover_direction(problem, channel, peregrine_state):
    Veta, Vu = channel
    fields = recover_fields(problem, peregrine_state, Veta, Vu)
    n = Vu.n_scalar
    # alpha = (1, 0): u = (w, 0)
    assert np.array_equal(fields.u[:n], peregrine_state.w[:n])
    assert np.allclose(fields.u[n:], 0.0, atol=1e-12)


def test_recover_peak_matches_target(problem, channel, peregrine_state):
    Veta, Vu = channel
    fields = recover_fields(problem, peregrine_state, Veta, Vu)
    xs = np.linspace(-3.0, 3.0, 601)
    vals = evaluate_at_points(Veta, fields.eta, np.stack([xs, np.zeros_like(xs)], axis=1))
    assert vals.max() == pytest.approx(0.3, rel=0.01)


def test_ode_residual_decreases_under_refinement(problem):
    # Insert the converged w into the eta-relation and then the traveling-wave
    # ODE; the strong residual (second derivative included) vanishes with h.
    # On P2 the second derivative is constant per cell, so a small central
    # difference evaluated inside one cell recovers it exactly.
    res = []
    for nx in (60, 120):
        mesh = build_rectangle_mesh((-20.0, 30.0, -1.0, 1.0), nx, 3, diagonal="crossed")
        Vu = FunctionSpace(mesh, 2, components=2)
        st = petviashvili_peregrine(problem, Vu)
        scalar = FunctionSpace(mesh, 2)
        w = st.w[: Vu.n_scalar]
        cs, D0, g = st.speed, 1.0, 1.0
        centroids = mesh.vertices[mesh.triangles].mean(axis=1)
        cells = np.arange(mesh.n_triangles)
        eps = 1e-4
        shift = np.array([eps, 0.0])
        w0 = scalar.eval_cells(w, cells, centroids)
        wp = scalar.eval_cells(w, cells, centroids + shift)
        wm = scalar.eval_cells(w, cells, centroids - shift)
        wxx = (wp - 2 * w0 + wm) / eps**2
        eta = D0 * w0 / (cs - w0)
        r = cs * w0 - (1.0 / 3.0) * cs * D0**2 * wxx - 0.5 * w0**2 - g * eta
        res.append(float(np.sqrt(np.mean(r**2))))
    assert res[1] < 0.5 * res[0]


def test_peak_stable_under_refinement(problem):
    peaks = []
    for nx in (75, 150):
        mesh = build_rectangle_mesh((-20.0, 30.0, -1.0, 1.0), nx, 3, diagonal="crossed")
        Veta, Vu = FunctionSpace(mesh, 1), FunctionSpace(mesh, 2, components=2)
        st = petviashvili_peregrine(problem, Vu)
        fields = recover_fields(problem, st, Veta, Vu)
        xs = np.linspace(-2.0, 2.0, 401)
        vals = evaluate_at_points(Veta, fields.eta, np.stack([xs, np.zeros_like(xs)], axis=1))
        peaks.append(vals.max())
    assert abs(peaks[1] - peaks[0]) <= 0.01 * peaks[0]


def test_direction_equivariance(problem):
    # solve on a square channel, rotate mesh and direction by 90 degrees:
    # the solution coefficients must match (same mesh entities, rotated coords)
    bounds = (-12.0, 12.0, -12.0, 12.0)
    mesh = build_rectangle_mesh(bounds, 48, 48, diagonal="crossed")
    prob = SolitaryWaveProblem(amplitude=0.3, depth=1.0, gravity=1.0, tail_tol=1.0)
    Vu = FunctionSpace(mesh, 1, components=2)
    st_x = petviashvili_peregrine(prob, Vu)

    rot = np.stack([-mesh.vertices[:, 1], mesh.vertices[:, 0]], axis=1)
    mesh_rot = make_triangulation(rot, mesh.triangles)
    Vu_rot = FunctionSpace(mesh_rot, 1, components=2)
    prob_rot = SolitaryWaveProblem(
        amplitude=0.3, depth=1.0, gravity=1.0, direction=(0.0, 1.0), tail_tol=1.0
    )
    st_y = petviashvili_peregrine(prob_rot, Vu_rot)
    n = Vu.n_scalar
    # w is the along-track profile: values at corresponding DOFs must agree
    assert np.allclose(st_y.w[:n], st_x.w[:n], atol=1e-9)


def test_bbm_continuation_smoke(channel):
    Veta, Vu = channel
    prob = SolitaryWaveProblem(
        amplitude=0.1, depth=1.0, gravity=1.0, speed=1.03, tolerance=1e-6
    )
    st = petviashvili_bbm_continuation(prob, Veta, Vu, step_fraction=0.01)
    assert st.residual < 1e-6
    assert st.speed == pytest.approx(1.03)
