import numpy as np
import pytest

from longwave.errors import BlowUpError, InvalidArgumentError
from longwave.fem import (
    FieldState,
    FunctionSpace,
    assemble_mass_operator,
    assemble_momentum_operator,
    flat_bathymetry,
    integrate_field,
    l2_project,
)
from longwave.mesh import build_rectangle_mesh
from longwave.models import make_model
from longwave.timestep import Integrator, courant_number, rk4_step

UNIT = (0.0, 1.0, 0.0, 1.0)


def make_integrator(mesh, model, bathy, r1=1, r2=1, dt=0.01, **kw):
    Veta = FunctionSpace(mesh, r1)
    Vu = FunctionSpace(mesh, r2, components=2)
    mass_op = assemble_mass_operator(Veta, bathy, model)
    mom_op = assemble_momentum_operator(Vu, bathy, model, 50.0)
    return Veta, Vu, Integrator(dt=dt, mass_operator=mass_op, momentum_operator=mom_op, **kw)


def test_zero_state_stays_zero():
    mesh = build_rectangle_mesh(UNIT, 3, 3)
    model = make_model("bbm", gravity=1.0)
    bathy = flat_bathymetry(1.0)
    Veta, Vu, integ = make_integrator(mesh, model, bathy)
    state = rk4_step(integ, model, bathy, FieldState.zero(Veta, Vu))
    assert np.all(state.eta == 0.0) and np.all(state.u == 0.0)
    assert state.time == pytest.approx(0.01)


def test_constant_eta_flat_bottom_unchanged():
    mesh = build_rectangle_mesh(UNIT, 3, 3)
    model = make_model("classical", gravity=1.0)
    bathy = flat_bathymetry(1.0)
    Veta, Vu, integ = make_integrator(mesh, model, bathy)
    state = FieldState(Veta, Vu, np.full(Veta.n_scalar, 0.25), Vu.zeros(), 0.0)
    out = rk4_step(integ, model, bathy, state)
    assert np.array_equal(out.eta, state.eta)
    assert np.all(out.u == 0.0)


def _forced_problem(model_kind="bbm", half_length=10.0, cell=0.5, amplitude=0.2):
    # solitary bump on a flat channel; tails reach the end walls at
    # ~ sech^2(lambda * half_length) relative amplitude
    from longwave.solitary import SolitaryWaveProblem, petviashvili_bbm, recover_fields

    nx = round(2 * half_length / cell)
    mesh = build_rectangle_mesh((-half_length, half_length, -1.0, 1.0), nx, 4,
                                diagonal="crossed")
    model = make_model(model_kind, gravity=1.0)
    bathy = flat_bathymetry(1.0)
    Veta = FunctionSpace(mesh, 1)
    Vu = FunctionSpace(mesh, 1, components=2)
    prob = SolitaryWaveProblem(amplitude=amplitude, depth=1.0, gravity=1.0, tail_tol=1.0)
    st = petviashvili_bbm(prob, Veta, Vu, model=model)
    state = recover_fields(prob, st, Veta, Vu)
    return mesh, model, bathy, Veta, Vu, state


def test_rk4_temporal_order():
    # Self-convergence against a dt/8 reference on a fixed mesh: slope ~ 4.
    mesh, model, bathy, Veta, Vu, state0 = _forced_problem()
    mass_op = assemble_mass_operator(Veta, bathy, model)
    mom_op = assemble_momentum_operator(Vu, bathy, model, 50.0)
    T = 0.8

    def advance(dt):
        integ = Integrator(dt=dt, mass_operator=mass_op, momentum_operator=mom_op, tol=1e-13)
        s = state0.copy()
        for _ in range(round(T / dt)):
            s = integ.step(model, bathy, s)
        return s

    ref = advance(0.05)
    errs = [np.linalg.norm(advance(dt).eta - ref.eta) for dt in (0.4, 0.2)]
    slope = np.log2(errs[0] / errs[1])
    assert slope == pytest.approx(4.0, abs=0.2)


def test_mass_conserved_across_step():
    # Channel long enough that the wave's tails are below 1e-12 at the walls.
    # The residual per-step drift is the weakly-enforced slip trace of the
    # stage rates entering at O(dt^2), so a small dt isolates the invariant.
    mesh, model, bathy, Veta, Vu, state0 = _forced_problem(half_length=30.0, amplitude=0.3)
    mass_op = assemble_mass_operator(Veta, bathy, model)
    mom_op = assemble_momentum_operator(Vu, bathy, model, 50.0)
    integ = Integrator(dt=2e-3, mass_operator=mass_op, momentum_operator=mom_op, tol=1e-12)
    m0 = integrate_field(Veta, state0.eta)
    s1 = integ.step(model, bathy, state0)
    assert abs(integrate_field(Veta, s1.eta) - m0) <= 1e-10 * max(1.0, abs(m0))


def test_determinism_bit_identical():
    mesh, model, bathy, Veta, Vu, state0 = _forced_problem()
    mass_op = assemble_mass_operator(Veta, bathy, model)
    mom_op = assemble_momentum_operator(Vu, bathy, model, 50.0)

    def run():
        integ = Integrator(dt=0.05, mass_operator=mass_op, momentum_operator=mom_op)
        s = state0.copy()
        for _ in range(3):
            s = integ.step(model, bathy, s)
        return s

    a, b = run(), run()
    assert np.array_equal(a.eta, b.eta)
    assert np.array_equal(a.u, b.u)


def test_blowup_detection():
    mesh, model, bathy, Veta, Vu, state0 = _forced_problem()
    mass_op = assemble_mass_operator(Veta, bathy, model)
    mom_op = assemble_momentum_operator(Vu, bathy, model, 50.0)
    integ = Integrator(dt=20.0, mass_operator=mass_op, momentum_operator=mom_op, maxit=4000)
    s = state0.copy()
    with pytest.raises(BlowUpError):
        for _ in range(200):
            s = integ.step(model, bathy, s)


def test_courant_number_values():
    assert courant_number(0.0, 1.0, 1.0, 0.1, 0.1) == pytest.approx(1.0)
    assert courant_number(0.3, 1.0, 1.0, 0.09, 0.09) == pytest.approx(np.sqrt(1.3))
    with pytest.raises(InvalidArgumentError):
        courant_number(0.0, 1.0, 9.81, 0.1, 0.0)
    with pytest.raises(InvalidArgumentError):
        courant_number(-2.0, 1.0, 9.81, 0.1, 0.1)


def test_bad_dt_rejected():
    mesh = build_rectangle_mesh(UNIT, 2, 2)
    model = make_model("classical", gravity=1.0)
    bathy = flat_bathymetry(1.0)
    with pytest.raises(InvalidArgumentError):
        make_integrator(mesh, model, bathy, dt=0.0)
