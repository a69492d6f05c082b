"""Smoke test for the layerfv Python bindings.

Build and install first:
    pip install maturin
    pip install --no-build-isolation -e crates/python
"""

import math

import layerfv_py as lf


def main():
    cfg = lf.SimConfig(eps=1e-2, scheme="cfvm")
    assert cfg.n_steps() == 100

    try:
        lf.SimConfig(eps=-1.0)
    except ValueError as e:
        assert "eps" in str(e)
    else:
        raise AssertionError("negative eps accepted")

    grid = lf.GridSpec(10, 10, 10)
    assert grid.shape == (10, 10, 10)
    assert math.isclose(grid.spacing[2], 0.1)

    es = lf.ExactSolution(1e-3)
    u, v, w, p = es.eval(0.3, 0.7, 0.0, 0.5)
    assert u == 0.0 and v == 0.0

    res = lf.run(cfg, n=10)
    print(res)
    assert res.status == "completed" and not res.blew_up
    assert 0.032 / 3 < res.velocity_error < 0.032 * 3
    assert len(res.history) == 100

    rows = lf.run_table([6], [1e-2, 1e-5], config=lf.SimConfig(t_end=0.1), jobs=2)
    assert len(rows) == 4
    text = lf.render(rows, "csv")
    assert text.splitlines()[0] == "N,t,eps,scheme,vel_l2,p_l2,dt,theta,alpha,status,wall_clock_s"
    back = lf.parse_csv(text)
    assert [r.vel_l2 for r in back] == [r.vel_l2 for r in rows]
    print(lf.render(rows, "markdown"))

    norms, slope = lf.scaling_study("dphi3_dt", [1e-2, 1e-3, 1e-4, 1e-5])
    assert abs(slope - 0.75) < 0.1, slope

    p1, p2 = lf.tangential_corrector(1.0, 0.0, 1.0, 0.0, 0.5, 0.2)
    assert abs(p1 + math.erfc(0.2 / (2 * math.sqrt(0.5)))) < 1e-8 and p2 == 0.0

    for name, worst, tol, passed in lf.verify_correctors():
        print(f"{'PASS' if passed else 'FAIL'} {name}: {worst:.2e} < {tol:.0e}")
        assert passed

    print("smoke test passed")


if __name__ == "__main__":
    main()
