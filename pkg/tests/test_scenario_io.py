import copy
import json

import pytest

from etcoord import scenario_io
from etcoord.scenario_io import apply_overrides, errors, parse_scenario, scenario_to_dict, warnings


@pytest.fixture()
def doc(bundled_path):
    return scenario_io.load_document(bundled_path)


class TestBundledScenario:
    def test_validates_clean(self, doc):
        scenario, diags = parse_scenario(doc)
        assert scenario is not None
        assert errors(diags) == []
        assert warnings(diags) == []

    def test_round_trip_value_identical(self, doc):
        s1, _ = parse_scenario(doc)
        d1 = scenario_to_dict(s1)
        s2, diags = parse_scenario(d1)
        assert s2 is not None, [str(d) for d in diags]
        assert s1 == s2
        assert json.dumps(d1, sort_keys=True) == json.dumps(scenario_to_dict(s2), sort_keys=True)

    def test_round_trip_through_json_text(self, doc):
        s1, _ = parse_scenario(doc)
        text = json.dumps(scenario_to_dict(s1))
        s2, _ = parse_scenario(json.loads(text))
        assert s1 == s2


class TestValidationErrors:
    def test_empty_edges_breaks_spanning_tree(self, doc):
        bad = copy.deepcopy(doc)
        bad["graph"]["edges"] = []
        scenario, diags = parse_scenario(bad)
        assert scenario is None
        assert any("no directed spanning tree" in d.message for d in errors(diags))

    def test_zero_threshold_floor(self, doc):
        bad = copy.deepcopy(doc)
        bad["threshold"]["c1"] = 0.0
        scenario, diags = parse_scenario(bad)
        assert scenario is None
        assert any(
            d.path == "threshold.c1" and "must be positive" in d.message for d in errors(diags)
        )

    def test_bad_agent_ids(self, doc):
        bad = copy.deepcopy(doc)
        bad["agents"][0]["id"] = 7
        scenario, diags = parse_scenario(bad)
        assert scenario is None
        assert any(d.path == "agents" for d in errors(diags))

    def test_missing_section(self, doc):
        bad = copy.deepcopy(doc)
        del bad["gains"]
        scenario, diags = parse_scenario(bad)
        assert scenario is None
        assert any(d.path == "gains" and "missing" in d.message for d in errors(diags))

    def test_nonpositive_gain(self, doc):
        bad = copy.deepcopy(doc)
        bad["gains"]["a"] = -1.0
        scenario, diags = parse_scenario(bad)
        assert scenario is None
        assert any(d.path == "gains.a" for d in errors(diags))

    def test_gamma0_outside_domain(self, doc):
        bad = copy.deepcopy(doc)
        bad["agents"][0]["gamma0"] = 30.0
        scenario, diags = parse_scenario(bad)
        assert scenario is None

    def test_overlapping_disturbances(self, doc):
        bad = copy.deepcopy(doc)
        bad["disturbances"] = [
            {"agent": 1, "window": [0.0, 2.0], "velocity": [1.0, 0.0, 0.0]},
            {"agent": 1, "window": [1.0, 3.0], "velocity": [0.0, 1.0, 0.0]},
        ]
        scenario, diags = parse_scenario(bad)
        assert scenario is None
        assert any("overlapping" in d.message for d in errors(diags))

    def test_unknown_disturbance_agent(self, doc):
        bad = copy.deepcopy(doc)
        bad["disturbances"] = [{"agent": 9, "window": [0.0, 1.0], "velocity": [1.0, 0.0, 0.0]}]
        scenario, diags = parse_scenario(bad)
        assert scenario is None

    def test_breakpoints_must_start_at_zero(self, doc):
        bad = copy.deepcopy(doc)
        bad["gamma_dot_d"]["breakpoints"] = [[1.0, 1.0]]
        scenario, diags = parse_scenario(bad)
        assert scenario is None


class TestValidationWarnings:
    def test_eta_band_warning(self, doc):
        loose = copy.deepcopy(doc)
        loose["vehicle"]["v_max"] = 30.0
        scenario, diags = parse_scenario(loose)
        assert scenario is not None
        assert any(d.path == "gains.eta" for d in warnings(diags))

    def test_coarse_dt_warning(self, doc):
        coarse = copy.deepcopy(doc)
        coarse["sim"]["dt"] = 0.02
        scenario, diags = parse_scenario(coarse)
        assert scenario is not None
        assert any(d.path == "sim.dt" and "inter-event" in d.message for d in warnings(diags))

    def test_separation_warning(self, doc):
        tight = copy.deepcopy(doc)
        # flatten all tracks onto one altitude and one lane: targets collide
        for cps in tight["trajectories"]["control_points"]:
            for p in cps:
                p[0] = 0.0
                p[2] = 10.0
        scenario, diags = parse_scenario(tight)
        assert scenario is not None
        assert any(d.path == "trajectories" and "separation" in d.message for d in warnings(diags))


class TestOverrides:
    def test_float_override(self, doc):
        out = apply_overrides(doc, ["gains.a=7.5"])
        assert out["gains"]["a"] == 7.5
        assert doc["gains"]["a"] == 3.75  # original untouched

    def test_nested_list_override(self, doc):
        out = apply_overrides(doc, ["agents.0.gamma0=0.5"])
        assert out["agents"][0]["gamma0"] == 0.5

    def test_string_override(self, doc):
        out = apply_overrides(doc, ["name=renamed"])
        assert out["name"] == "renamed"

    def test_json_value_override(self, doc):
        out = apply_overrides(doc, ['gamma_dot_d.breakpoints=[[0.0, 1.2]]'])
        assert out["gamma_dot_d"]["breakpoints"] == [[0.0, 1.2]]

    def test_malformed_override(self, doc):
        with pytest.raises(ValueError, match="key=value"):
            apply_overrides(doc, ["gains.a"])
