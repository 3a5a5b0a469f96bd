"""Smoke test for the awe_safety extension module.

Build and install first:

    cd crates/py && maturin build --release -o dist && pip install dist/*.whl

then run `python python/smoke.py`.
"""

import math
import os
import tempfile

import awe_safety as aw

SMALL_GRID = """
[synthesis]
n_alpha = 5
n_mu = 5

[synthesis.grid.s]
n = 8
min = 0.0
max = 6.283185307179586
periodic = true

[synthesis.grid.sigma]
n = 3
min = -30.0
max = 30.0
periodic = false

[synthesis.grid.h_tau]
n = 3
min = 200.0
max = 300.0
periodic = false

[synthesis.grid.v_a]
n = 3
min = 20.0
max = 40.0
periodic = false

[synthesis.grid.chi_a]
n = 6
min = -3.141592653589793
max = 3.141592653589793
periodic = true

[synthesis.grid.gamma_a]
n = 3
min = -0.8
max = 0.8
periodic = false

[synthesis.grid.delta_t]
n = 3
min = 0.0175
max = 0.0195
periodic = false

[synthesis.solver]
horizon = 0.02
"""


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def check_frames():
    m = aw.rotation("o_w", [math.pi])
    expected = [[-1, 0, 0], [0, 1, 0], [0, 0, -1]]
    assert all(close(m[i][j], expected[i][j]) for i in range(3) for j in range(3)), m
    p = aw.cart_from_spherical(0.3, 0.4, 250.0)
    lam, phi, h = aw.spherical_from_cart(p)
    assert close(lam, 0.3, 1e-9) and close(phi, 0.4, 1e-9) and close(h, 250.0, 1e-9)
    dist, _ = aw.geodesic((0.0, 0.0), (math.pi / 2, 0.0), 1.0)
    assert close(dist, math.pi / 2, 1e-12)
    doubled = aw.arc_length(500.0, a_booth=240.0, b_booth=400.0)
    assert close(doubled, 2 * aw.arc_length(250.0), 1e-6 * doubled)


def check_model(cfg):
    model = aw.SafetyModel(cfg)
    x = [0.5, 0.0, 250.0, 31.0, -0.447, 0.5205, 0.0187]
    d_turb = [1.0, -2.0, 0.5]
    full = model.f(x, 0.1, 0.3, 0.004, d_turb)
    hat = model.f_hat(x, 0.1, 0.3)
    rest = model.f_c(x, 0.004, d_turb)
    for i in range(3):
        assert close(full[3 + i], hat[i] + rest[3 + i], 1e-9 * max(1.0, abs(full[3 + i])))
    force = model.tether_force(x)
    assert close(model.h(x), (force - cfg.f_rupture) / cfg.f_rupture, 1e-12)
    alpha, mu = model.optimal_control(x, [0, 0, 0, 1.0, 0, 0, 0])
    d_dt, _ = model.optimal_disturbance(x, [0, 0, 0, 0, 0, 0, 1.0])
    assert d_dt > 0
    print(f"model: |F_t| = {force:.1f} N, h = {model.h(x):+.4f}, l = {model.l(x):+.4f}, u* = ({alpha:.3f}, {mu:.3f})")


def check_switching():
    times = [0.01 * k for k in range(40)]
    s1, s2 = aw.switch_flags(times, [1850.0] * 40)
    assert s1 and not s2
    s1, s2 = aw.switch_flags(times, [1800.0 - k for k in range(40)])
    assert not s1 and s2


def check_synthesis_and_simulation(cfg):
    value, controls = aw.synthesize(cfg)
    assert len(value) == len(controls) == math.prod(value.shape)
    x = [1.0, 0.0, 250.0, 30.0, 0.0, 0.0, 0.0185]
    v, inside = value.query(x)
    assert inside == (v <= 0.0)
    with tempfile.TemporaryDirectory() as tmp:
        vpath = os.path.join(tmp, "v.awevf")
        cpath = os.path.join(tmp, "c.awect")
        value.save(vpath)
        controls.save(cpath)
        again = aw.ValueFunction.load(vpath)
        assert again.values == value.values
        assert aw.ControlTable.load(cpath).lookup(x) == controls.lookup(x)
    print(f"synthesis: {len(value)} nodes, V(x) = {v:+.4f}")

    short = aw.Config("[sim]\nduration = 2.0\n")
    res = aw.simulate(short)
    assert res["outcome"] in ("completed", "ruptured", "out-of-envelope")
    rows = res["trace_csv"].strip().splitlines()
    assert rows[0].startswith("t,s,sigma")
    print(f"simulation: {res['outcome']} after {res['duration']:.2f} s, max |F_t| = {res['max_force']:.1f} N, {len(rows) - 1} rows")


def main():
    cfg = aw.Config(SMALL_GRID)
    check_frames()
    check_model(cfg)
    check_switching()
    check_synthesis_and_simulation(cfg)
    print("smoke test passed")


if __name__ == "__main__":
    main()
