import json

import pytest

from lacmas.config import (
    ExperimentConfig,
    build_benchmark,
    build_graph,
    build_run_config,
    build_wsn_objective,
    config_from_dict,
    load_config,
)
from lacmas.errors import ConfigError


def test_empty_config_is_runnable():
    cfg = ExperimentConfig()
    objective = build_benchmark(cfg, "sphere")
    graph = build_graph(cfg, objective.num_agents)
    run_cfg = build_run_config(cfg, objective, graph, master_seed=0)
    assert run_cfg.max_iterations > 0
    assert run_cfg.graph.num_agents == objective.num_agents


def test_load_without_file_gives_defaults():
    cfg = load_config(None)
    assert cfg.variant == "full"
    assert cfg.num_runs == 25
    assert len(cfg.suite) == 10


def test_unknown_top_level_key_rejected():
    with pytest.raises(ConfigError, match="unknow"):
        config_from_dict({"variantt": "full"})


def test_unknown_nested_key_names_the_key():
    with pytest.raises(ConfigError, match="horizon_X"):
        config_from_dict({"pcg": {"horizon_X": 5}})


def test_unknown_suite_family_rejected():
    with pytest.raises(ConfigError, match="unknown suite family"):
        config_from_dict({"suite": ["spheres"]})


def test_bad_graph_kind_rejected():
    with pytest.raises(ConfigError):
        config_from_dict({"graph": {"kind": "torus"}})


def test_nested_values_applied():
    cfg = config_from_dict(
        {
            "objective": {"num_agents": 6, "dim": 4, "hetero_sigma": 1.5},
            "pcg": {"horizon_T": 99, "alphas": [0.1, 0.4, 0.8]},
            "swarm": {"population": 7},
        }
    )
    assert cfg.objective.num_agents == 6
    assert cfg.pcg.horizon_T == 99
    assert cfg.pcg.alphas == (0.1, 0.4, 0.8)
    assert cfg.swarm.population == 7


def test_load_config_file_roundtrip(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps({"variant": "coop", "master_seed": 5}))
    cfg = load_config(path)
    assert cfg.variant == "coop"
    assert cfg.master_seed == 5


def test_invalid_json_rejected(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_file_rejected(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")


def test_build_graph_variants():
    cfg = config_from_dict({"graph": {"kind": "random", "edge_prob": 0.5, "seed": 3}})
    g = build_graph(cfg, 8)
    assert g.num_agents == 8
    cfg2 = config_from_dict({"graph": {"kind": "explicit", "edges": [[0, 1], [1, 2]]}})
    g2 = build_graph(cfg2, 3)
    assert g2.neighbors(1) == (0, 2)


def test_build_wsn_objective_dimensions():
    cfg = config_from_dict({"wsn": {"num_sensors": 5, "num_targets": 2, "seed": 1}})
    obj = build_wsn_objective(cfg)
    assert obj.num_agents == 5
    assert obj.dim == 6


def test_llm_endpoint_built_from_guidance_spec():
    cfg = config_from_dict(
        {"guidance": {"llm_url": "http://localhost:11434", "llm_model": "test"}}
    )
    objective = build_benchmark(cfg, "sphere")
    graph = build_graph(cfg, objective.num_agents)
    run_cfg = build_run_config(cfg, objective, graph, master_seed=0)
    assert run_cfg.llm is not None
    assert run_cfg.llm.base_url == "http://localhost:11434"
