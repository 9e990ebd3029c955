from __future__ import annotations

import logging
import math

import numpy as np
import pytest

import mvac as mv
from mvac.initdata import base_reflection


@pytest.fixture
def circle() -> mv.SphereInterface:
    return mv.SphereInterface(dim=2, center=(0.0, 0.0), r0=0.3, delta_gamma=0.1)


def test_modulated_energy_terms(tiny_2d: mv.RunConfig):
    f = mv.build_well_prepared(tiny_2d)
    report = mv.modulated_energy(f, tiny_2d.interface, tiny_2d.quasi_params)
    assert report.modulated_energy == pytest.approx(
        report.dirichlet + report.potential - report.coupling
    )
    assert report.dirichlet > 0
    assert report.potential > 0
    assert report.coupling > 0
    assert report.degeneracy_count >= 0
    row = report.as_row()
    assert list(row)[:5] == ["t", "E_mod", "dirichlet", "potential", "coupling"]
    assert math.isnan(row["orth_defect"])


def test_modulated_energy_of_bulk_phase_is_floor(circle: mv.SphereInterface):
    grid = mv.GridSpec(dim=2, cells=32)
    f = mv.Field(grid, 0.0, np.broadcast_to(base_reflection(2), (*grid.shape, 2, 2)))
    p = mv.QuasiDistParams(0.125)
    report = mv.modulated_energy(f, circle, p)
    assert report.dirichlet == 0.0
    assert report.coupling == pytest.approx(0.0, abs=1e-14)
    assert report.potential == pytest.approx(4.0 * 0.125**4 / 0.125, rel=1e-12)


def test_coercivity_check(tiny_2d: mv.RunConfig):
    f = mv.build_well_prepared(tiny_2d)
    coerc = mv.coercivity_check(f, tiny_2d.interface, tiny_2d.quasi_params)
    assert coerc.lhs1 >= 0
    assert coerc.lhs2 >= 0
    energy = mv.modulated_energy(f, tiny_2d.interface, tiny_2d.quasi_params)
    assert coerc.rhs == pytest.approx(energy.modulated_energy)
    assert coerc.lhs2 <= 2.0 * coerc.rhs + 1e-6 * (1.0 + energy.potential)
    assert math.isnan(mv.CoercivityReport(1.0, 1.0, 0.0).ratio2)


def test_orthogonality_defect_is_rounding(tiny_2d: mv.RunConfig):
    f = mv.build_well_prepared(tiny_2d)
    gradient = mv.cell_gradient(f.values, f.grid)
    scale = 1.0 + float(np.max(np.sum(gradient**2, axis=(0, -2, -1))))
    assert mv.orthogonality_defect(f, tiny_2d.quasi_params) <= 1e-10 * scale


def test_curvature_identity_holds_for_euler(tiny_1d: mv.RunConfig):
    traj = mv.run_simulation(tiny_1d)
    assert mv.curvature_identity_defect(traj) <= 1e-8
    assert mv.curvature_identity_defect(traj, 0) <= mv.curvature_identity_defect(traj)


def test_extract_interface_of_well_prepared_field(tiny_2d: mv.RunConfig):
    f = mv.build_well_prepared(tiny_2d)
    points = mv.extract_interface(f, tiny_2d.quasi_params)
    assert points.shape[1] == 2
    assert points.shape[0] > 0
    assert mv.hausdorff(points, tiny_2d.interface, 0.0) < tiny_2d.grid.h


def test_extract_interface_without_crossing(caplog: pytest.LogCaptureFixture):
    grid = mv.GridSpec(dim=2, cells=16)
    f = mv.Field(grid, 0.0, np.broadcast_to(base_reflection(2), (*grid.shape, 2, 2)))
    with caplog.at_level(logging.WARNING, logger="mvac.diagnostics"):
        points = mv.extract_interface(f, mv.QuasiDistParams(0.125))
    assert points.shape == (0, 2)
    assert "no interface crossing" in caplog.text


def test_hausdorff(circle: mv.SphereInterface):
    on_circle = mv.sample_interface(circle, 0.0, 64)
    assert mv.hausdorff(on_circle, circle, 0.0) < 0.02
    assert mv.hausdorff(1.1 * on_circle, circle, 0.0) == pytest.approx(0.03, abs=0.02)
    assert mv.hausdorff([[0.0, 0.0]], circle, 0.0) == pytest.approx(0.3)
    with pytest.raises(ValueError, match="nonempty"):
        mv.hausdorff(np.zeros((0, 2)), circle, 0.0)


def test_minimal_pair_defect_of_well_prepared_field(tiny_2d: mv.RunConfig):
    f = mv.build_well_prepared(tiny_2d)
    defect, skipped = mv.minimal_pair_defect(
        f, tiny_2d.interface, 0.0, tiny_2d.effective_probe_delta, count=16
    )
    assert skipped == 0
    assert defect == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError, match="must exceed"):
        mv.minimal_pair_defect(f, tiny_2d.interface, 0.0, tiny_2d.grid.h)


def test_antisymmetric_bump():
    phi = mv.AntisymmetricBump(n=3, center=(0.1, 0.0), radius=0.2, t_final=1.0, entry=(0, 2))
    np.testing.assert_array_equal(phi.matrix, -phi.matrix.T)
    assert phi.time_factor(0.0) == 0.0
    assert phi.time_factor(0.5) == 1.0
    assert phi.space_factor([[0.1, 0.0]]).tolist() == [1.0]
    assert phi.space_factor([[0.5, 0.0]]).tolist() == [0.0]
    unbounded = mv.AntisymmetricBump(n=2, center=(0.0, 0.0), radius=math.inf, t_final=1.0)
    np.testing.assert_array_equal(unbounded.space_factor(np.zeros((3, 2))), 1.0)
    np.testing.assert_array_equal(unbounded.space_gradient(np.zeros((3, 2))), 0.0)
    assert mv.AntisymmetricBump(n=2, center=(0.0,), radius=1.0, t_final=0.0).time_factor(0.0) == 0


def test_antisymmetric_bump_gradient():
    phi = mv.AntisymmetricBump(n=2, center=(0.1, -0.1), radius=0.4, t_final=1.0)
    rng = np.random.default_rng(0)
    x = rng.uniform(-0.5, 0.5, size=(40, 2))
    grad = phi.space_gradient(x)
    h = 1e-6
    for i in range(2):
        shift = np.zeros(2)
        shift[i] = h
        numeric = (phi.space_factor(x + shift) - phi.space_factor(x - shift)) / (2 * h)
        np.testing.assert_allclose(grad[i], numeric, atol=1e-5)


@pytest.mark.parametrize(
    ("kwargs", "match"),
    [
        ({"entry": (1, 1)}, "off-diagonal"),
        ({"entry": (0, 2)}, "off-diagonal"),
        ({"radius": 0.0}, "radius"),
    ],
)
def test_antisymmetric_bump_validation(kwargs: dict, match: str):
    base = {"n": 2, "center": (0.0, 0.0), "radius": 1.0, "t_final": 1.0}
    with pytest.raises(ValueError, match=match):
        mv.AntisymmetricBump(**(base | kwargs))


def test_default_test_functions(tiny_2d: mv.RunConfig):
    inside, outside, straddling = mv.default_test_functions(tiny_2d)
    g = tiny_2d.interface
    assert inside.center == g.center
    assert inside.radius < mv.radius_at(g, tiny_2d.t_final)
    assert outside.center[0] - outside.radius > g.r0
    offset = np.subtract(straddling.center, g.center)
    assert np.linalg.norm(offset) == pytest.approx(g.r0)
    assert math.atan2(offset[1], offset[0]) == pytest.approx(math.pi / 6)
    assert straddling.radius + inside.radius <= g.r0 + 1e-12


def test_weak_residual_of_stationary_field(tiny_1d: mv.RunConfig):
    cfg, grid = tiny_1d, tiny_1d.grid
    initial = mv.Field(grid, 0.0, np.broadcast_to(base_reflection(2), (*grid.shape, 2, 2)))
    traj = mv.run_simulation(cfg, initial)
    phi = mv.AntisymmetricBump(n=2, center=(0.0,), radius=0.5, t_final=cfg.t_final)
    assert mv.weak_residual(traj, phi) == pytest.approx(0.0, abs=1e-14)
    assert mv.weak_residual(traj, phi, upto=0) == 0.0


def _rotating_axis_residual(eps: float, cells: int) -> float:
    cfg = mv.parse_config(
        f"eps = {eps}\nt_final = 0.002\nsnapshot_count = 4\nsolver.cells = {cells}\n"
        "[scenario]\nkind = rotating_axis\n"
    )
    straddling = mv.default_test_functions(cfg)[2]
    return mv.weak_residual(mv.run_simulation(cfg), straddling)


def test_weak_residual_across_rotating_interface_shrinks_with_eps():
    coarse = _rotating_axis_residual(0.08, 100)
    fine = _rotating_axis_residual(0.04, 200)
    assert coarse > 1e-12
    assert fine < coarse


def test_energy_reports(tiny_1d: mv.RunConfig):
    traj = mv.run_simulation(tiny_1d)
    reports = mv.energy_reports(traj, tiny_1d)
    assert reports.height == len(traj.snapshots)
    assert reports["t"].to_list() == pytest.approx(list(tiny_1d.snapshot_times))
    for column in ("E_mod", "coerc1_ratio", "weak_res_3", "dissip_3", "minpair_skipped"):
        assert column in reports.columns
    assert reports["weak_res_1"][0] == 0.0
    assert reports["degeneracies"].dtype.is_integer()
    assert reports["curv_defect"].max() <= 1e-8
