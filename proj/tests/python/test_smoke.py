"""Smoke tests for the python bindings: potential calculus, a small
end-to-end solve with its certificate, the reference cross-check, and the
config runners."""

import json
import math

import numpy as np
import pytest

import bevar


def test_potential_calculus():
    quad = bevar.PotentialSpec.quadratic()
    assert quad.j(0.0, [0.0], 2.0) == pytest.approx(2.0)
    assert quad.conjugate(0.0, [0.0], 3.0) == pytest.approx(4.5)

    log = bevar.PotentialSpec.log_type(bevar.CoefficientField("constant", 1.0))
    e = math.e
    assert log.j(0.0, [0.0], e - 1.0) == pytest.approx(1.0)
    g = log.beta(0.0, [0.0], e - 1.0)
    assert g.lo == pytest.approx(1.0)
    assert log.conjugate(0.0, [0.0], 1.0) == pytest.approx(e - 2.0)

    rep = bevar.check_fenchel_young(log, 2000)
    assert rep.max_inequality_violation <= 1e-10
    assert rep.max_equality_gap <= 1e-8

    reg = bevar.RegularizedPotential(quad, 0.5, 0.5)
    c = reg.conjugate(0.0, [0.0], 1.0)
    assert c.value == pytest.approx(3.0 / 7.0)
    assert c.slope == pytest.approx(6.0 / 7.0)


def test_checkers():
    assert not bevar.check_coercivity(bevar.PotentialSpec.abs_value()).weakly_coercive()
    assert bevar.check_coercivity(bevar.PotentialSpec.power(3.0)).weakly_coercive()
    cert = bevar.check_symmetry(bevar.PotentialSpec.power(2.0), 10.0, 1.0, 0.0)
    assert cert.holds


def test_grid_and_operator():
    grid = bevar.build_grid(1, [1.0], [16])
    assert grid.node_count == 17
    assert grid.domain_measure() == pytest.approx(1.0)
    op = bevar.build_robin_operator(grid, 1.0)
    z = np.sin(np.linspace(0.0, 3.0, 17))
    back = op.solve(op.apply(z))
    assert np.max(np.abs(back - z)) < 1e-10
    assert op.v_norm(np.ones(17)) == pytest.approx(math.sqrt(2.0))


def small_heat_problem():
    grid = bevar.build_grid(1, [1.0], [16])
    op = bevar.build_robin_operator(grid, 1.0)
    f = bevar.FieldPreset("constant", 0.0)
    y0 = bevar.FieldPreset("gaussian_bump", 1.0, [0.5], 0.1)
    return bevar.make_problem_data(grid, op, 0.05, 10, f, y0)


def test_end_to_end_heat_certificate():
    data = small_heat_problem()
    spec = bevar.PotentialSpec.quadratic()
    cfg = bevar.SolverConfig()
    cfg.lambda_schedule = [1e-2, 1e-4]
    cfg.sigma_schedule = [1e-2, 1e-4]
    cfg.grad_tol = 1e-10
    cfg.gap_tol = 1e-6
    traj, report = bevar.continuation_solve(data, spec, cfg)
    assert report.verdict
    assert report.pointwise_gap < 1e-6
    verify = bevar.verify_weak_solution(traj, data, spec, gap_tol=1e-6)
    assert verify.verdict

    ref = bevar.solve_reference(data, spec, 1e-6)
    yv = np.array(traj.y)
    yr = np.array(ref.y)
    rel = np.linalg.norm(yv - yr) / np.linalg.norm(yr)
    assert rel < 0.05


def test_config_runners(tmp_path):
    config = {
        "domain": {"dim": 1, "lengths": [1.0], "cells": [16]},
        "time": {"T": 0.05, "steps": 10},
        "robin_alpha": 1.0,
        "potential": {"family": "quadratic"},
        "data": {
            "f": {"preset": "constant", "amplitude": 0.0},
            "y0": {"preset": "gaussian_bump", "amplitude": 1.0,
                   "center": [0.5], "width": 0.1},
        },
        "solver": {
            "lambda_schedule": [1e-2, 1e-4],
            "sigma_schedule": [1e-2, 1e-4],
            "grad_tol": 1e-10,
            "gap_tol": 1e-6,
        },
    }
    cfg = bevar.parse_config_json(json.dumps(config))
    out = tmp_path / "run"
    assert bevar.run_solve(cfg, str(out)) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["report"]["verdict"] is True
    assert (out / "trajectory.csv").exists()

    with pytest.raises(ValueError):
        bevar.parse_config_json(json.dumps({"potential": {"family": "polytropic"}}))
