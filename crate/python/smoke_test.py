"""Smoke test for the porotopo_py extension.

Build and install first:
    pip install --no-build-isolation ./crates/python
"""

import math

import porotopo_py as pt


def main():
    opt = pt.optimal_interface_2d(0.3, 0.1, 1.0)
    assert abs(opt["xi_hat"] - math.sqrt(0.307)) < 1e-9, opt
    assert opt["verdict"] == "high-k inner"

    shell = pt.optimal_interface_3d(0.0, 0.1)
    assert abs(shell["xi_hat"] - 0.1) < 1e-12

    assert pt.lemma_gap(0.5, 0.2) >= 0.0

    sol = pt.solve_1d("darcy-forchheimer", 0.5, 1.0, 1.0, beta_f=1.0, points=[0.0, 1.0])
    assert abs(sol["constant"] - (math.sqrt(5.0) - 1.0) / 2.0) < 1e-9, sol

    names = pt.benchmark_names()
    assert "annulus-radial" in names and "rect-pressure-q0" in names

    flow = pt.solve_builtin("rect-pressure-q0")
    assert abs(flow["net_outflow"] - flow["source_total"]) <= 1e-10 * max(1.0, abs(flow["net_outflow"]))
    assert flow["phi"] > 0.0

    run = pt.optimize_builtin("annulus-radial")
    assert run["interface"] is not None
    assert abs(run["interface"] - run["oracle_interface"]) <= run["cell_width"], run["interface"]
    # Pressure-driven: Phi is maximized.
    assert run["phi_history"][-1] >= run["phi_history"][0]

    ok, csv = pt.verify("lemma", 42, 500)
    assert ok and csv.startswith("# seed=42")

    try:
        pt.optimal_interface_2d(1.5, 0.1, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")

    assert "[problem]" in pt.reference_configuration()
    print("smoke test OK")


if __name__ == "__main__":
    main()
