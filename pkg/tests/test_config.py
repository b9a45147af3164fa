import numpy as np
import pytest

from voisched.config import (
    SCHEMA,
    SimConfig,
    default_config,
    load_config,
    packaged_schema,
    schema_as_json,
)
from voisched.errors import ConfigError
from voisched.scheduler import POLICY_ORDER, Policy


class TestDefaults:
    def test_paper_constants(self):
        cfg = default_config()
        assert cfg["requirements"]["xi_sq_pos"] == 0.015
        assert cfg["requirements"]["xi_sq_vel"] == 0.005
        assert cfg["link"]["bandwidth_hz"] == 5e6
        assert cfg["link"]["rate_threshold_bps"] == 250e3
        assert cfg["link"]["rician_g_db"] == 15.0
        assert cfg["link"]["outage_eps"] == 1e-4
        # -11.5 dBm total in-band noise.
        assert cfg["link"]["noise_power_w"] == pytest.approx(7.07945784384138e-05)
        assert cfg["fleet"]["d_max_m"] == 20.0
        assert cfg["dynamics"]["mass_kg"] == 100.0
        assert cfg["dynamics"]["step_s"] == 0.2
        assert cfg["harness"]["slot_budget"] == 10

    def test_every_key_present_and_typed(self):
        cfg = default_config()
        for section, keys in SCHEMA.items():
            for key, (tag, _default, _help) in keys.items():
                value = cfg[section][key]
                if tag == "float":
                    assert type(value) is float, (section, key)
                elif tag == "int":
                    assert type(value) is int, (section, key)
                elif tag == "bool":
                    assert type(value) is bool, (section, key)

    def test_default_policy_list_is_all_five(self):
        assert default_config().policies() == list(POLICY_ORDER)


class TestLoad:
    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "nope.ini")

    def test_unknown_section(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[beacons]\nx = 1\n")
        with pytest.raises(ConfigError, match=r"\[beacons\]"):
            load_config(p)

    def test_unknown_key_names_location(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[fleet]\nn_postion = 30\n")
        with pytest.raises(ConfigError, match=r"\[fleet\] n_postion"):
            load_config(p)

    def test_bad_value_names_location(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[harness]\nruns = soon\n")
        with pytest.raises(ConfigError, match=r"\[harness\] runs"):
            load_config(p)

    def test_partial_file_keeps_other_defaults(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[harness]\nruns = 7\n")
        cfg = load_config(p)
        assert cfg["harness"]["runs"] == 7
        assert cfg["harness"]["n_qi"] == SCHEMA["harness"]["n_qi"][1]

    def test_none_path_gives_defaults(self):
        assert load_config(None).values == default_config().values


class TestOverrides:
    def test_applied_after_load(self, tmp_path):
        p = tmp_path / "c.ini"
        p.write_text("[harness]\nruns = 7\n")
        cfg = load_config(p, overrides=["harness.runs=9", "dynamics.mass_kg=50"])
        assert cfg["harness"]["runs"] == 9
        assert cfg["dynamics"]["mass_kg"] == 50.0

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            default_config().with_overrides(["fleet.bogus=1"])

    def test_malformed_rejected(self):
        with pytest.raises(ConfigError, match="section.key=value"):
            default_config().with_overrides(["runs=9"])

    def test_original_untouched(self):
        base = default_config()
        base.with_overrides(["harness.runs=3"])
        assert base["harness"]["runs"] == SCHEMA["harness"]["runs"][1]


class TestParsing:
    @pytest.mark.parametrize("raw,expect", [("true", True), ("1", True),
                                            ("off", False), ("No", False)])
    def test_bool_spellings(self, raw, expect):
        cfg = default_config().with_overrides([f"dynamics.known_input={raw}"])
        assert cfg["dynamics"]["known_input"] is expect

    def test_policies_all_expands_in_order(self):
        cfg = default_config().with_overrides(["harness.policies=all"])
        assert cfg.policies() == list(POLICY_ORDER)

    def test_policies_subset_preserves_given_order(self):
        cfg = default_config().with_overrides(["harness.policies=bcs,voi"])
        assert cfg.policies() == [Policy.BCS, Policy.VOI]

    def test_duplicate_policy_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            default_config().with_overrides(["harness.policies=voi,voi"])

    def test_unknown_policy_rejected(self):
        with pytest.raises(ConfigError):
            default_config().with_overrides(["harness.policies=greedy2"])

    def test_bad_choice_rejected(self):
        with pytest.raises(ConfigError, match="noise_dist"):
            default_config().with_overrides(["fleet.noise_dist=gaussian"])


class TestValidation:
    @pytest.mark.parametrize(
        "override",
        [
            "dynamics.mass_kg=0",
            "dynamics.step_s=-0.2",
            "fleet.pos_var_lo=0",
            "requirements.xi_sq_vel=0",
            "harness.runs=0",
            "harness.alpha=1.5",
            "harness.slot_budget=-1",
            "fleet.n_position=-3",
            "fleet.elite_frac=1.2",
            "fleet.bulk_scale=0.5",
        ],
    )
    def test_rejected(self, override):
        with pytest.raises(ConfigError):
            default_config().with_overrides([override])

    def test_var_range_ordering(self):
        with pytest.raises(ConfigError, match="pos_var_hi"):
            default_config().with_overrides(
                ["fleet.pos_var_lo=0.5", "fleet.pos_var_hi=0.1"]
            )

    def test_link_feasibility_checked(self):
        # Driving G low enough makes the outage target unreachable.
        with pytest.raises(ConfigError):
            SimConfig(
                values={"link": {"rician_g_db": -30.0, "outage_eps": 1e-4}}
            )


class TestTypedViews:
    def test_link_db_conversion(self):
        lp = default_config().link_params()
        assert lp.rician_g == pytest.approx(10.0**1.5)

    def test_requirements_vector_layout(self):
        req = default_config().requirements()
        np.testing.assert_allclose(req.xi_sq, [0.015, 0.015, 0.005, 0.005])

    def test_force_config_fields(self):
        fc = default_config().force_config()
        np.testing.assert_allclose(
            fc.amp_n,
            [SCHEMA["dynamics"]["amp_x_n"][1], SCHEMA["dynamics"]["amp_y_n"][1]],
        )
        assert fc.restore_gain_n == SCHEMA["dynamics"]["restore_gain_n"][1]

    def test_dynamics_init_belief(self):
        dc = default_config().dynamics_config()
        np.testing.assert_allclose(dc.init_mean, np.zeros(4))
        assert dc.init_var_pos == 1.0 and dc.init_var_vel == 0.1


class TestRoundTrip:
    def test_ini_text_reloads_identically(self, tmp_path):
        cfg = default_config().with_overrides(
            ["harness.runs=3", "dynamics.known_input=true", "harness.policies=voi,bcs"]
        )
        p = tmp_path / "echo.ini"
        p.write_text(cfg.to_ini_text())
        assert load_config(p).values == cfg.values

    def test_float_text_exact(self, tmp_path):
        cfg = default_config()
        p = tmp_path / "echo.ini"
        p.write_text(cfg.to_ini_text())
        reread = load_config(p)
        assert reread["link"]["noise_power_w"] == cfg["link"]["noise_power_w"]


class TestSchemaFile:
    def test_packaged_schema_matches_live(self):
        assert packaged_schema() == schema_as_json()

    def test_schema_entries_carry_help(self):
        for section, keys in schema_as_json().items():
            for key, meta in keys.items():
                assert meta["help"], (section, key)
                assert "type" in meta and "default" in meta
