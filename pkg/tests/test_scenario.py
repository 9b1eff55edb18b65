from pathlib import Path

import numpy as np
import pytest

from dynagree import formats, scenario, digraph
from dynagree.errors import ConfigurationError

ROOT = Path(__file__).resolve().parent.parent
DATA = Path(__file__).resolve().parent / "data"


class TestScenario:
    @pytest.mark.parametrize("path", sorted((ROOT / "scenarios").glob("*.yaml")), ids=lambda p: p.stem)
    def test_shipped_scenarios_load(self, path):
        scenario.load(path)

    def test_defaults(self):
        s = scenario.from_dict({})
        assert s.n == 3 and s.model.kind == "complete" and s.delay.delta == 1

    def test_string_epsilon(self):
        assert scenario.from_dict({"epsilon": "1e-4"}).epsilon == 1e-4

    def test_unknown_key_path(self):
        with pytest.raises(ConfigurationError, match="model.fault"):
            scenario.from_dict({"model": {"kind": "sender_faulty", "fault": 1}})

    @pytest.mark.parametrize("data,where", [
        ({"epsilon": 0}, "epsilon"),
        ({"n": 0}, "n"),
        ({"model": {"kind": "sender_faulty", "f": 3}, "n": 3}, "model"),
        ({"rule": {"kind": "reduce", "f": 2}, "n": 4}, "rule.f"),
        ({"delay": {"delta": 0}}, "delay.delta"),
        ({"delay": {"policy": "lifo"}}, "delay.policy"),
        ({"init": {"kind": "explicit", "values": [0.1]}}, "init.values"),
        ({"model": {"kind": "async_crash", "f": 2}, "n": 4}, "model"),
        ({"rule": {"kind": "macro_round"}, "delay": {"delta": 2}}, "delay.delta"),
    ])
    def test_validation_names_field(self, data, where):
        with pytest.raises(ConfigurationError, match=where):
            scenario.from_dict(data)

    def test_butterfly_sets_n(self):
        assert scenario.from_dict({"model": {"kind": "butterfly", "m": 5}}).n == 10

    def test_seed_env_fallback(self, monkeypatch):
        monkeypatch.setenv(scenario.SEED_ENV, "41")
        assert scenario.from_dict({}).resolved_seed() == 41
        assert scenario.from_dict({"seed": 3}).resolved_seed() == 3
        monkeypatch.setenv(scenario.SEED_ENV, "x")
        with pytest.raises(ConfigurationError):
            scenario.from_dict({}).resolved_seed()

    def test_initial_values(self):
        assert scenario.from_dict({"n": 4, "init": {"kind": "split_halves"}}).initial_values().tolist() == [0, 1, 0, 1]
        s = scenario.from_dict({"n": 2, "init": {"kind": "explicit", "values": [0.25, 0.5]}})
        assert s.initial_values().tolist() == [0.25, 0.5]
        a = scenario.from_dict({"n": 5, "seed": 2}).initial_values()
        assert np.array_equal(a, scenario.from_dict({"n": 5, "seed": 2}).initial_values())

    def test_with_value_round_trip(self):
        s = scenario.from_dict({"n": 6, "model": {"kind": "sender_faulty", "f": 1}})
        t = scenario.with_value(s, "model.f", 4)
        assert t.model.f == 4 and t.n == 6
        assert scenario.from_dict(scenario.to_dict(t)) == t
        with pytest.raises(ConfigurationError):
            scenario.with_value(s, "model.nope", 1)

    def test_bad_yaml(self, tmp_path):
        p = tmp_path / "bad.yaml"
        p.write_text("n: [1,\n")
        with pytest.raises(ConfigurationError):
            scenario.load(p)


class TestEdgeList:
    def test_parse(self):
        n, graphs = formats.read_edge_list(DATA / "witness.edges")
        assert n == 4 and len(graphs) == 2
        assert graphs[0] == digraph.complete(4)
        assert not digraph.is_rooted(graphs[1])

    def test_round_trip(self):
        _, graphs = formats.read_edge_list(DATA / "rooted.edges")
        graphs.append(digraph.identity(3))
        _, again = formats.parse_edge_list(formats.format_edge_list(graphs))
        assert again == graphs

    @pytest.mark.parametrize("text,line", [
        ("m=3\n", 1),
        ("n=3\n1 2\n1 x\n", 3),
        ("n=3\n1 4\n", 2),
        ("n=3\n1 2 3\n", 2),
        ("# c\nn=-1\n", 2),
    ])
    def test_errors_carry_line(self, text, line):
        with pytest.raises(formats.ParseError) as exc:
            formats.parse_edge_list(text)
        assert exc.value.line == line

    def test_missing_header(self):
        with pytest.raises(formats.ParseError):
            formats.parse_edge_list("")
