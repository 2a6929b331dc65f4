import math

import numpy as np
import pytest

from axicav.cavity import (
    BeamEnsemble,
    CavityConfig,
    ConfigError,
    WeightedBeam,
    build_preset,
    coalesce,
    null_field_config,
    reflect_and_conserve,
    run,
    traverse,
)
from axicav.rays import ParaxialError, RayState

THETA = 4e-10


# --- configuration ---------------------------------------------------------


def test_default_geometry_is_consistent():
    cfg = CavityConfig()
    assert cfg.field_length_m + 2 * cfg.gap_m == cfg.length_m


def test_geometry_identity_is_enforced():
    with pytest.raises(ConfigError):
        CavityConfig(length_m=14.0, field_length_m=10.0, gap_m=1.0)


def test_config_rejects_bad_values():
    with pytest.raises(ConfigError):
        CavityConfig(n_traversals=0)
    with pytest.raises(ConfigError):
        CavityConfig(theta_split_rad=-1e-10)
    with pytest.raises(ConfigError):
        CavityConfig(extraction_mirror="mirror3")
    with pytest.raises(ConfigError):
        CavityConfig(mirror1_focal_m=0.0)
    with pytest.raises(ConfigError):
        CavityConfig(coalesce_tol_position_m=0.0)
    with pytest.raises(ConfigError):
        CavityConfig(lens_focal_m=3.0, lens_offset_m=2.5, detector_distance_m=2.0)


def test_build_preset_confocal():
    cfg = build_preset("confocal")
    assert cfg.mirror1_focal_m == 12.5
    assert cfg.mirror2_focal_m == 12.5
    assert cfg.extraction_mirror == "mirror2"
    assert cfg.n_traversals == 15


def test_build_preset_planar_concave():
    cfg = build_preset("planar-concave")
    assert cfg.mirror1_focal_m == 12.5
    assert cfg.mirror2_focal_m is None
    assert cfg.extraction_mirror == "mirror1"


def test_build_preset_convex_concave():
    cfg = build_preset("convex-concave")
    assert cfg.mirror2_focal_m == -5.5
    assert cfg.extraction_mirror == "mirror1"


def test_build_preset_accepts_overrides_and_rejects_unknown_kind():
    cfg = build_preset("confocal", n_traversals=3, theta_split_rad=1e-9)
    assert cfg.n_traversals == 3
    assert cfg.theta_split_rad == 1e-9
    with pytest.raises(ConfigError):
        build_preset("hemispherical")


def test_null_field_config_only_clears_the_split():
    cfg = build_preset("confocal")
    null = null_field_config(cfg)
    assert null.theta_split_rad == 0.0
    assert null.n_traversals == cfg.n_traversals
    assert null.mirror2_focal_m == cfg.mirror2_focal_m


# --- ensembles -------------------------------------------------------------


def test_ensemble_shape_validation():
    with pytest.raises(ValueError):
        BeamEnsemble([0.0, 1.0], [0.0], [1.0])
    with pytest.raises(ValueError):
        BeamEnsemble([0.0], [0.0], [-0.5])


def test_ensemble_enforces_paraxial_window():
    with pytest.raises(ParaxialError):
        BeamEnsemble([0.0], [0.2], [1.0])


def test_ensemble_iteration_and_total_weight():
    ens = BeamEnsemble([1e-3, -1e-3], [1e-6, -1e-6], [0.25, 0.75], generation=2)
    beams = list(ens)
    assert len(beams) == 2
    assert beams[0] == WeightedBeam(RayState(1e-3, 1e-6), 0.25, 2)
    assert ens.total_weight == 1.0


def test_from_beams_requires_consistent_generation():
    good = [
        WeightedBeam(RayState(0.0, 0.0), 0.5, 1),
        WeightedBeam(RayState(1e-3, 0.0), 0.5, 1),
    ]
    ens = BeamEnsemble.from_beams(good)
    assert len(ens) == 2 and ens.generation == 1
    bad = [WeightedBeam(RayState(0.0, 0.0), 0.5, 0), good[0]]
    with pytest.raises(ValueError):
        BeamEnsemble.from_beams(bad)


def test_sorted_copy_orders_by_position_then_angle():
    ens = BeamEnsemble([1e-3, -1e-3, 1e-3], [2e-6, 0.0, -2e-6], [0.2, 0.3, 0.5])
    out = ens.sorted_copy()
    assert np.array_equal(out.positions, [-1e-3, 1e-3, 1e-3])
    assert np.array_equal(out.angles, [0.0, -2e-6, 2e-6])


# --- reflection ------------------------------------------------------------


def test_planar_reflection_keeps_the_accumulated_angle():
    ray = RayState(5.6e-9, 8e-10)
    assert reflect_and_conserve(ray, None) == ray


def test_curved_reflection_adds_focusing_kick():
    out = reflect_and_conserve(RayState(1e-3, 0.0), 12.5)
    assert out.position == 1e-3
    assert out.angle == pytest.approx(-8e-5, rel=1e-15)


# --- coalescing ------------------------------------------------------------


def test_coalesce_merges_exact_duplicates():
    ens = BeamEnsemble([1e-3, 1e-3], [1e-5, 1e-5], [0.25, 0.25])
    out = coalesce(ens, 1e-12, 1e-16)
    assert len(out) == 1
    assert out.positions[0] == 1e-3
    assert out.weights[0] == 0.5


def test_coalesce_takes_weighted_means():
    # pair separated by less than half a cell in both coordinates
    ens = BeamEnsemble([0.0, 0.4e-12], [0.0, 0.4e-16], [1.0, 3.0])
    out = coalesce(ens, 1e-12, 1e-16)
    assert len(out) == 1
    assert out.positions[0] == pytest.approx(0.3e-12, rel=1e-12)
    assert out.angles[0] == pytest.approx(0.3e-16, rel=1e-12)
    assert out.weights[0] == 4.0


def test_coalesce_keeps_separated_beams_apart():
    ens = BeamEnsemble([0.0, 2.5e-12], [0.0, 0.0], [0.5, 0.5])
    out = coalesce(ens, 1e-12, 1e-16)
    assert len(out) == 2


def test_coalesce_separated_in_angle_only_stays_apart():
    ens = BeamEnsemble([0.0, 0.0], [0.0, 3e-16], [0.5, 0.5])
    out = coalesce(ens, 1e-12, 1e-16)
    assert len(out) == 2


def test_coalesce_zero_tolerance_disables_merging():
    ens = BeamEnsemble([1e-3, 1e-3], [1e-5, 1e-5], [0.25, 0.25])
    out = coalesce(ens, 0.0, 1e-16)
    assert len(out) == 2


def test_coalesce_guards_against_index_overflow():
    ens = BeamEnsemble([1e-3, 2e-3], [0.0, 0.0], [0.5, 0.5])
    with pytest.raises(ValueError):
        coalesce(ens, 1e-300, 1e-16)


def test_coalesce_conserves_weight_exactly_for_dyadic_weights():
    rng = np.random.default_rng(7)
    n = 64
    pos = rng.normal(scale=1e-9, size=n)
    ang = rng.normal(scale=1e-12, size=n)
    w = np.full(n, 1.0 / n)
    ens = BeamEnsemble(pos, ang, w)
    out = coalesce(ens, 1e-10, 1e-13)
    assert out.total_weight == 1.0
    assert len(out) <= n


def test_coalesce_output_is_sorted():
    ens = BeamEnsemble([3e-9, -3e-9, 0.0], [0.0, 0.0, 0.0], [0.3, 0.3, 0.4])
    out = coalesce(ens, 1e-12, 1e-16)
    assert np.all(np.diff(out.positions) > 0)


# --- traversal mechanics ---------------------------------------------------


def test_traverse_validates_direction():
    cfg = build_preset("confocal")
    with pytest.raises(ValueError):
        traverse(BeamEnsemble.single(RayState(0.0, 0.0)), cfg, "sideways")


def test_single_traversal_splits_axial_beam():
    cfg = build_preset("confocal")
    out = traverse(BeamEnsemble.single(RayState(0.0, 0.0)), cfg, "forward")
    assert len(out) == 2
    assert out.generation == 1
    assert np.array_equal(out.weights, [0.5, 0.5])
    # position at the far mirror: one field passage walks the beam off axis
    # by theta * (field + 2 gap)
    expect = THETA * cfg.length_m
    assert np.allclose(np.sort(out.positions), [-expect, expect], rtol=1e-12)
    # the far mirror's focusing kick acts on the doubled exit angle
    ang = np.sort(out.angles)
    expect_ang = 2 * THETA - expect / cfg.mirror2_focal_m
    assert np.allclose(ang, [-expect_ang, expect_ang], rtol=1e-12)


def test_two_planar_traversals_build_the_four_state_pattern():
    cfg = CavityConfig(kind="planar", mirror1_focal_m=None, mirror2_focal_m=None)
    ens = BeamEnsemble.single(RayState(0.0, 0.0))
    ens = traverse(ens, cfg, "forward")
    ens = traverse(ens, cfg, "backward")
    assert ens.generation == 2
    assert len(ens) == 4
    assert np.array_equal(ens.weights, np.full(4, 0.25))
    # angles in units of the per-passage kick 2*theta
    steps = np.sort(np.round(ens.angles / (2 * THETA)).astype(int))
    assert np.array_equal(steps, [-2, 0, 0, 2])
    # the middle pair shares the angle but not the position, so it stays split
    mids = np.sort(ens.positions[np.abs(ens.angles) < THETA])
    assert mids[0] == -mids[1]
    assert mids[1] > 0


def test_split_on_backward_false_splits_half_as_often():
    cfg = CavityConfig(split_on_backward=False, n_traversals=2)
    ens = BeamEnsemble.single(RayState(0.0, 0.0))
    ens = traverse(ens, cfg, "forward")
    assert ens.generation == 1 and len(ens) == 2
    ens = traverse(ens, cfg, "backward")
    assert ens.generation == 1  # no split on the return leg
    assert len(ens) == 2


def test_traversal_count_growth_on_planar_mirrors():
    """With planar mirrors the reachable (angle, position) states form an
    integer lattice; after merging, the beam count follows
    (n^3 + 5 n + 6) / 6 exactly."""
    cfg = CavityConfig(kind="planar", mirror1_focal_m=None, mirror2_focal_m=None)
    ens = BeamEnsemble.single(RayState(0.0, 0.0))
    for n in range(1, 26):
        ens = traverse(ens, cfg, "forward" if n % 2 else "backward")
        assert len(ens) == (n**3 + 5 * n + 6) // 6, f"count law broke at n={n}"
    assert ens.total_weight == pytest.approx(1.0, abs=1e-12)


# --- full runs -------------------------------------------------------------


def test_run_snapshot_cadence_mirror2_every_traversal():
    res = run(build_preset("confocal", n_traversals=5))
    assert [s.traversal for s in res.snapshots] == [1, 2, 3, 4, 5]


def test_run_snapshot_cadence_mirror1_every_second_traversal():
    res = run(build_preset("planar-concave", n_traversals=5))
    assert [s.traversal for s in res.snapshots] == [2, 4]
    res = run(build_preset("convex-concave", n_traversals=6, theta_split_rad=1e-12))
    assert [s.traversal for s in res.snapshots] == [2, 4, 6]


def test_run_weight_is_conserved_at_every_snapshot():
    res = run(build_preset("confocal"))
    for snap in res.snapshots:
        assert abs(snap.ensemble.total_weight - 1.0) <= 1e-12


def test_run_null_field_is_a_single_undisturbed_beam():
    cfg = null_field_config(build_preset("confocal", n_traversals=8))
    res = run(cfg)
    for snap in res.snapshots:
        assert len(snap.ensemble) == 1
        assert snap.ensemble.positions[0] == 0.0
        assert snap.ensemble.angles[0] == 0.0
        assert snap.ensemble.weights[0] == 1.0


def test_run_snapshots_are_left_right_symmetric():
    """An axial input beam sees a symmetric cavity, so the weighted mean
    position and angle at the detector vanish identically."""
    res = run(build_preset("confocal"))
    for snap in (res.snapshots[0], res.snapshots[7], res.snapshots[-1]):
        e = snap.ensemble
        assert math.fsum((e.weights * e.positions).tolist()) == 0.0
        assert math.fsum((e.weights * e.angles).tolist()) == 0.0


def test_first_snapshot_matches_transfer_matrix_prediction_axial():
    """One traversal of an axial beam lands at +-theta*(length + 2*relay)
    with angle +-2*theta; the chain is short enough to write out by hand."""
    cfg = build_preset("confocal", n_traversals=1)
    res = run(cfg)
    e = res.snapshots[0].ensemble
    d = cfg.length_m + cfg.detector_distance_m + cfg.detector_distance_m
    assert np.allclose(np.sort(e.positions), [-THETA * 18.0, THETA * 18.0], rtol=1e-12)
    assert d == 18.0
    assert np.allclose(np.sort(e.angles), [-2 * THETA, 2 * THETA], rtol=1e-12)


def test_first_snapshot_matches_transfer_matrix_prediction_general():
    """Same traversal from a displaced, tilted input: the split separates the
    detector positions by theta*(length + 2*distance) around the transported
    centroid, and the angles by 2*theta around the input angle."""
    cfg = build_preset("confocal", n_traversals=1)
    r0, a0 = 1e-5, 2e-6
    res = run(cfg, initial=BeamEnsemble.single(RayState(r0, a0)))
    e = res.snapshots[0].ensemble
    centroid = r0 + a0 * (cfg.length_m + cfg.detector_distance_m)
    offsets = np.sort(e.positions) - centroid
    assert np.allclose(offsets, [-THETA * 18.0, THETA * 18.0], rtol=1e-12)
    ang_off = np.sort(e.angles) - a0
    assert np.allclose(ang_off, [-2 * THETA, 2 * THETA], rtol=1e-12)


def test_detector_lens_path():
    """With an explicit external lens the detector trip is offset, thin-lens
    kick, remainder; check one branch against the hand-computed chain."""
    cfg = build_preset("confocal", n_traversals=1, lens_focal_m=3.0)
    res = run(cfg)
    e = res.snapshots[0].ensemble
    p, a = 5.6e-9, 8e-10  # plus branch at the far mirror, pre-reflection
    p1 = p + a * cfg.lens_offset_m
    a1 = a - p1 / 3.0
    p2 = p1 + a1 * (cfg.detector_distance_m - cfg.lens_offset_m)
    assert np.max(e.positions) == pytest.approx(p2, rel=1e-12)
    assert np.min(e.angles) == pytest.approx(a1, rel=1e-12)


def test_long_run_conserves_weight_with_coarse_merging():
    """A thousand traversals with aggressive merge tolerances: the beam count
    stays tiny and the total weight never drifts."""
    cfg = build_preset(
        "confocal",
        n_traversals=1000,
        coalesce_tol_position_m=1e-8,
        coalesce_tol_angle_rad=1e-7,
    )
    res = run(cfg)
    assert abs(res.final.total_weight - 1.0) <= 1e-12
    assert len(res.final) <= 16


def test_run_accepts_convex_concave_geometry():
    cfg = build_preset("convex-concave", n_traversals=6, theta_split_rad=1e-9)
    res = run(cfg)
    assert res.snapshots
    for snap in res.snapshots:
        assert abs(snap.ensemble.total_weight - 1.0) <= 1e-12
