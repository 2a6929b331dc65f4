import pytest

from axicav.scenario import (
    AnalysisParams,
    AxionParams,
    LaserParams,
    MagnetParams,
    Scenario,
    ScenarioError,
    apply_overrides,
    dump_scenario,
    load_preset,
    load_scenario,
    loads_scenario,
    mapping_to_scenario,
    preset_names,
    preset_text,
)

MINIMAL = """
[cavity]
kind = confocal
n_traversals = 4
"""


def test_param_defaults_and_validation():
    laser = LaserParams()
    assert laser.amplitude_photons_per_s == 5e18
    assert laser.waist_m == 7.5e-4
    with pytest.raises(ScenarioError):
        LaserParams(power_w=0.0)
    with pytest.raises(ScenarioError):
        MagnetParams(grad_b_t_per_m=-1.0)
    with pytest.raises(ScenarioError):
        AxionParams(omega_ev=0.0)
    with pytest.raises(ScenarioError):
        AnalysisParams(fit_kind="cubic")
    with pytest.raises(ScenarioError):
        AnalysisParams(extraction_count=0)


def test_minimal_text_fills_defaults():
    sc = loads_scenario(MINIMAL, "mini")
    assert sc.name == "mini"
    assert sc.cavity.n_traversals == 4
    assert sc.cavity.length_m == 14.0
    assert sc.laser.wavelength_nm == 1064.0
    assert sc.analysis.fit_kind == "linear"


def test_unknown_section_and_key_are_rejected():
    with pytest.raises(ScenarioError):
        loads_scenario("[detector]\nx = 1\n", "bad")
    with pytest.raises(ScenarioError):
        loads_scenario("[laser]\ncolor = red\n", "bad")


def test_bad_values_are_rejected_with_context():
    with pytest.raises(ScenarioError):
        loads_scenario("[laser]\npower_w = strong\n", "bad")
    with pytest.raises(ScenarioError):
        loads_scenario("[magnet]\nmodulated = perhaps\n", "bad")
    with pytest.raises(ScenarioError):
        loads_scenario("[cavity]\nn_traversals = 2.5\n", "bad")


def test_inconsistent_geometry_is_rejected():
    text = "[cavity]\nlength_m = 14\nfield_length_m = 10\ngap_m = 1\n"
    with pytest.raises(ScenarioError):
        loads_scenario(text, "bad")


def test_planar_and_relay_words_mean_none():
    text = (
        "[cavity]\nmirror1_focal_m = planar\nmirror2_focal_m = planar\n"
        "lens_focal_m = relay\n"
    )
    sc = loads_scenario(text, "words")
    assert sc.cavity.mirror1_focal_m is None
    assert sc.cavity.mirror2_focal_m is None
    assert sc.cavity.lens_focal_m is None


def test_inline_comments_are_stripped():
    text = "[cavity]\nn_traversals = 7  ; keep it short\n"
    assert loads_scenario(text, "c").cavity.n_traversals == 7


def test_apply_overrides_patches_values():
    mapping = {"cavity": {"n_traversals": "4"}}
    out = apply_overrides(mapping, ["cavity.n_traversals=9", "laser.power_w=2.0"])
    assert out["cavity"]["n_traversals"] == "9"
    assert out["laser"]["power_w"] == "2.0"
    # the input mapping is not mutated
    assert mapping["cavity"]["n_traversals"] == "4"


def test_apply_overrides_validates_paths():
    with pytest.raises(ScenarioError):
        apply_overrides({}, ["cavity.n_traversals:9"])
    with pytest.raises(ScenarioError):
        apply_overrides({}, ["n_traversals=9"])
    with pytest.raises(ScenarioError):
        apply_overrides({}, ["cavity.polish=high"])


def test_loads_scenario_applies_overrides():
    sc = loads_scenario(MINIMAL, "mini", ["cavity.theta_split_rad=0"])
    assert sc.cavity.theta_split_rad == 0.0


def test_load_scenario_missing_file():
    with pytest.raises(ScenarioError):
        load_scenario("/no/such/file.ini")


def test_load_scenario_roundtrip(tmp_path):
    sc = load_preset("confocal")
    path = tmp_path / "copy.ini"
    path.write_text(dump_scenario(sc))
    again = load_scenario(str(path))
    assert again == Scenario(
        name="copy",
        cavity=sc.cavity,
        laser=sc.laser,
        magnet=sc.magnet,
        axion=sc.axion,
        analysis=sc.analysis,
    )


def test_dump_renders_none_words_back():
    sc = loads_scenario(
        "[cavity]\nmirror2_focal_m = planar\nmirror1_focal_m = 12.5\n"
        "extraction_mirror = mirror1\n",
        "pc",
    )
    text = dump_scenario(sc)
    assert "mirror2_focal_m = planar" in text
    assert "lens_focal_m = relay" in text


def test_mapping_to_scenario_rejects_unknown_section():
    with pytest.raises(ScenarioError):
        mapping_to_scenario("x", {"telescope": {}})


# --- shipped presets ---------------------------------------------------------


def test_preset_names_lists_both():
    assert preset_names() == ["bnl-quad", "confocal"]


def test_preset_text_unknown_name():
    with pytest.raises(ScenarioError):
        preset_text("nonexistent")


def test_confocal_preset_values():
    sc = load_preset("confocal")
    assert sc.cavity.kind == "confocal"
    assert sc.cavity.theta_split_rad == 4e-10
    assert sc.cavity.n_traversals == 15
    assert sc.cavity.extraction_mirror == "mirror2"
    assert sc.cavity.mirror1_focal_m == 12.5
    assert sc.magnet.grad_b_t_per_m == 200.0
    assert sc.magnet.field_length_m == 10.0
    assert sc.axion.g_a_gev == 1e-12
    assert sc.axion.b_mixing_t == 1.0
    assert sc.analysis.fit_kind == "linear"
    assert sc.analysis.extraction_count == 12000
    assert sc.analysis.integration_time_s == 3e4
    assert sc.analysis.g_ref_gev == 1e-6


def test_quad_doublet_preset_values():
    sc = load_preset("bnl-quad")
    assert sc.cavity.kind == "convex-concave"
    assert sc.cavity.mirror2_focal_m == -5.5
    assert sc.cavity.extraction_mirror == "mirror1"
    assert sc.cavity.field_length_m == 1.0
    assert sc.cavity.gap_m == 6.5
    assert sc.cavity.theta_split_rad == 2e-14
    assert sc.cavity.n_traversals == 20
    assert sc.magnet.grad_b_t_per_m == 100.0
    assert sc.magnet.field_length_m == 1.0
    assert sc.analysis.fit_kind == "power"
    assert sc.analysis.extraction_count == 15000
    assert sc.analysis.integration_time_s == 3e6
    assert sc.analysis.g_ref_gev == 1e-10


def test_preset_roundtrip_via_dump(tmp_path):
    for name in preset_names():
        sc = load_preset(name)
        path = tmp_path / f"{name}.ini"
        path.write_text(dump_scenario(sc))
        again = load_scenario(str(path))
        assert again.cavity == sc.cavity
        assert again.laser == sc.laser
        assert again.magnet == sc.magnet
        assert again.axion == sc.axion
        assert again.analysis == sc.analysis
