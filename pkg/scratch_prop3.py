"""Scratch: full T=25 propagation study for criterion 7 calibration."""
import json
import sys
import time

import numpy as np

from longwave.fem import (FunctionSpace, assemble_mass_operator, assemble_momentum_operator,
                          evaluate_at_points, flat_bathymetry, integrate_field)
from longwave.mesh import build_rectangle_mesh
from longwave.models import make_model
from longwave.solitary import (SolitaryWaveProblem, petviashvili_bbm, petviashvili_peregrine,
                               recover_fields)
from longwave.timestep import Integrator

def run(system, r2, T=25.0, dt=0.1, nx=200, ny=8, offset=-6.0):
    from longwave.mesh import perturb_interior
    mesh = perturb_interior(build_rectangle_mesh((-20, 30, -1, 1), nx, ny, diagonal="crossed"), 0.15, seed=0)
    Veta = FunctionSpace(mesh, 1)
    Vu = FunctionSpace(mesh, r2, components=2)
    bathy = flat_bathymetry(1.0)
    model = make_model(system if system == "bbm" else "classical", gravity=1.0)
    prob = SolitaryWaveProblem(amplitude=0.3, depth=1.0, gravity=1.0, offset=offset)
    t0 = time.time()
    if system == "bbm":
        st = petviashvili_bbm(prob, Veta, Vu, model=model)
    else:
        st = petviashvili_peregrine(prob, Vu, model=model)
    state = recover_fields(prob, st, Veta, Vu)
    gen_t = time.time() - t0

    xs = np.linspace(-19.5, 29.5, 2001)
    pts = np.stack([xs, np.zeros_like(xs)], axis=1)
    vals0 = evaluate_at_points(Veta, state.eta, pts)
    a0 = float(vals0.max())

    mass_op = assemble_mass_operator(Veta, bathy, model)
    mom_op = assemble_momentum_operator(Vu, bathy, model, 50.0)
    integ = Integrator(dt=dt, mass_operator=mass_op, momentum_operator=mom_op, tol=1e-8)
    m0 = integrate_field(Veta, state.eta)
    drifts = []
    t0 = time.time()
    nsteps = round(T / dt)
    for k in range(nsteps):
        state = integ.step(model, bathy, state)
        if (k + 1) % 25 == 0:
            drifts.append(abs(integrate_field(Veta, state.eta) - m0))
    run_t = time.time() - t0

    vals = evaluate_at_points(Veta, state.eta, pts)
    i = int(vals.argmax())
    crest_x, crest = float(xs[i]), float(vals[i])
    tail_mask = xs < crest_x - 8.0
    tail_amp = float(np.abs(vals[tail_mask]).max()) if tail_mask.any() else 0.0
    out = dict(system=system, r2=r2, iters=st.iterations, a0=a0, crest=crest, crest_x=crest_x,
               tail_amp=tail_amp, tail_rel=tail_amp / a0, drift_max=float(max(drifts)),
               drift_final=float(drifts[-1]), gen_t=gen_t, run_t=run_t)
    print(json.dumps(out), flush=True)
    return out

if __name__ == "__main__":
    results = [run("bbm", 1), run("peregrine", 1), run("peregrine", 2)]
    with open("/tmp/prop_results3.json", "w") as fh:
        json.dump(results, fh, indent=1)
    p1 = results[1]["tail_amp"]; p2 = results[2]["tail_amp"]
    print("P1/P2 tail ratio:", p1 / p2)
