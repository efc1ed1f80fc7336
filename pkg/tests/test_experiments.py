"""Config parsing, trial running, artifact writing, reproducibility."""

from __future__ import annotations

import json

import pytest

from qcs import ConfigError, generate_random_digraph, parse_config, run_experiment, run_one_trial
from qcs.experiments import (
    ExperimentConfig,
    FileGraphSpec,
    RandomGraphSpec,
    SchedulingInitial,
    UniformInitial,
    build_trial_instance,
    config_to_dict,
    fig1_config,
    fig2_grid,
    fig3_configs,
    run_sweep,
    run_trials,
    write_artifacts,
)


MINIMAL = {
    "mode": "sync",
    "graph": {"random": {"n": 10, "edge_prob": 0.5}},
    "initial": {"explicit": {"y0": [3] * 10, "z0": [1] * 10}},
}


class TestParseConfig:
    def test_minimal_with_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.mode == "sync"
        assert cfg.trials == 1
        assert cfg.seed == 0
        assert cfg.records_trajectory()  # single trial records by default

    def test_multi_trial_does_not_record_by_default(self):
        cfg = parse_config({**MINIMAL, "trials": 5})
        assert not cfg.records_trajectory()
        cfg = parse_config({**MINIMAL, "trials": 5, "record_trajectory": True})
        assert cfg.records_trajectory()

    def test_async_needs_delay(self):
        with pytest.raises(ConfigError, match="delay"):
            parse_config({**MINIMAL, "mode": "async"})

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="bogus"):
            parse_config({**MINIMAL, "bogus": 1})

    def test_unknown_initial_kind_named(self):
        with pytest.raises(ConfigError, match="initial"):
            parse_config({**MINIMAL, "initial": {"wavelet": {}}})

    def test_bad_delay_pmf_named(self):
        with pytest.raises(ConfigError, match="delay"):
            parse_config(
                {**MINIMAL, "mode": "async", "delay": {"max_delay": 2, "pmf": [0.9, 0.3]}}
            )

    def test_epsilon_range(self):
        with pytest.raises(ConfigError, match="epsilon"):
            parse_config({**MINIMAL, "epsilon": 1.5})

    def test_file_source(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(MINIMAL), encoding="utf-8")
        assert parse_config(path).graph == RandomGraphSpec(n=10, edge_prob=0.5)

    def test_invalid_json_named(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError, match="invalid JSON"):
            parse_config(path)

    def test_round_trips_through_echo(self):
        cfg = parse_config({**MINIMAL, "trials": 3, "epsilon": 0.05})
        echoed = config_to_dict(cfg)
        again = parse_config({k: v for k, v in echoed.items() if v is not None})
        assert again.trials == 3
        assert again.epsilon == 0.05


class TestTrialBuilding:
    def test_uniform_initials_are_seed_deterministic(self):
        cfg = parse_config(
            {
                **MINIMAL,
                "initial": {"uniform": {"y0_range": [0, 100], "z0_range": [1, 10]}},
                "seed": 7,
            }
        )
        a = build_trial_instance(cfg, 0)
        b = build_trial_instance(cfg, 0)
        c = build_trial_instance(cfg, 1)
        assert a.y0 == b.y0 and a.z0 == b.z0
        assert a.graph.out_neighbors == b.graph.out_neighbors
        assert (a.y0, a.graph.out_neighbors) != (c.y0, c.graph.out_neighbors)

    def test_trial_seed_offsets_compose(self):
        cfg = parse_config(
            {**MINIMAL, "initial": {"uniform": {"y0_range": [0, 9], "z0_range": [1, 3]}}}
        )
        shifted = ExperimentConfig(**{**cfg.__dict__, "seed": cfg.seed + 5})
        assert build_trial_instance(cfg, 5).y0 == build_trial_instance(shifted, 0).y0

    def test_graph_file_spec(self, tmp_path):
        g = generate_random_digraph(6, 0.5, seed=3)
        path = tmp_path / "g.txt"
        g.save(path)
        cfg = parse_config(
            {
                "mode": "sync",
                "graph": {"file": str(path)},
                "initial": {"explicit": {"y0": [2] * 6, "z0": [1] * 6}},
            }
        )
        inst = build_trial_instance(cfg, 0)
        assert inst.graph.out_neighbors == g.out_neighbors

    def test_diameter_bound_below_sampled_diameter_names_both(self):
        cfg = parse_config({**MINIMAL, "diameter_bound": 1})
        g = build_trial_instance(cfg, 0).graph
        if g.diameter > 1:
            with pytest.raises(ValueError, match="diameter_bound=1"):
                run_one_trial(cfg, 0)

    def test_initial_length_must_match_graph(self):
        cfg = parse_config(
            {**MINIMAL, "initial": {"explicit": {"y0": [1, 2], "z0": [1, 1]}}}
        )
        with pytest.raises(ConfigError, match="initial"):
            build_trial_instance(cfg, 0)


class TestRunners:
    def test_run_one_trial_contract(self):
        cfg = parse_config({**MINIMAL, "seed": 4})
        res = run_one_trial(cfg, 0)
        assert res.converged
        assert res.spread == 0
        assert res.estimate in (res.quotient_floor, res.quotient_ceil)
        assert res.error_series is not None
        assert res.error_series[0] in (0.0, 1.0)

    def test_parallel_equals_serial(self):
        cfg = parse_config(
            {
                **MINIMAL,
                "initial": {"uniform": {"y0_range": [0, 50], "z0_range": [1, 5]}},
                "trials": 6,
                "seed": 11,
            }
        )
        serial = run_trials(cfg, workers=1)
        parallel = run_trials(cfg, workers=2)
        assert [r.__dict__ for r in serial] == [r.__dict__ for r in parallel]

    def test_bound_check_attached_when_epsilon_given(self):
        cfg = parse_config({**MINIMAL, "epsilon": 0.1, "seed": 2})
        res = run_one_trial(cfg, 0)
        assert res.completion_bound is not None
        assert res.within_bound is True

    def test_max_steps_defaults(self):
        from qcs.experiments import _trial_bound, _trial_max_steps

        plain = parse_config(MINIMAL)
        inst = build_trial_instance(plain, 0)
        assert _trial_max_steps(plain, inst) == 100_000
        with_eps = parse_config({**MINIMAL, "epsilon": 0.1})
        assert _trial_max_steps(with_eps, inst) == 100 * _trial_bound(with_eps, inst)
        pinned = parse_config({**MINIMAL, "max_steps": 321})
        assert _trial_max_steps(pinned, inst) == 321


class TestArtifacts:
    def test_outcome_rows_match_trial_count(self, tmp_path):
        cfg = parse_config(
            {
                **MINIMAL,
                "initial": {"uniform": {"y0_range": [0, 40], "z0_range": [1, 4]}},
                "trials": 7,
                "seed": 3,
            }
        )
        res = run_experiment(cfg, out_dir=tmp_path, fmt="csv")
        lines = (tmp_path / "outcomes.csv").read_text().strip().splitlines()
        assert lines[0] == "trial,converged,steps,q_s,spread,censored"
        assert len(lines) == 1 + cfg.trials
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["stats"]["trials"] == 7
        assert summary["config"]["mode"] == "sync"
        assert "generated_at" in summary["meta"]

    def test_json_format(self, tmp_path):
        cfg = parse_config({**MINIMAL, "seed": 1})
        run_experiment(cfg, out_dir=tmp_path, fmt="json")
        rows = json.loads((tmp_path / "outcomes.json").read_text())
        assert len(rows) == 1 and rows[0]["converged"] == 1

    def test_error_series_written_for_recorded_trials(self, tmp_path):
        cfg = parse_config({**MINIMAL, "seed": 5})
        run_experiment(cfg, out_dir=tmp_path)
        lines = (tmp_path / "error_series.csv").read_text().strip().splitlines()
        assert lines[0] == "trial,k,e_k"
        assert len(lines) > 2

    def test_byte_identical_reruns(self, tmp_path):
        cfg = parse_config(
            {
                **MINIMAL,
                "initial": {"uniform": {"y0_range": [0, 60], "z0_range": [1, 6]}},
                "trials": 4,
                "seed": 9,
            }
        )
        run_experiment(cfg, out_dir=tmp_path / "a", workers=1)
        run_experiment(cfg, out_dir=tmp_path / "b", workers=2)
        assert (tmp_path / "a/outcomes.csv").read_bytes() == (tmp_path / "b/outcomes.csv").read_bytes()
        sa = json.loads((tmp_path / "a/summary.json").read_text())
        sb = json.loads((tmp_path / "b/summary.json").read_text())
        sa.pop("meta"), sb.pop("meta")  # timestamps confined to meta
        assert sa == sb

    def test_bad_format_rejected(self, tmp_path):
        cfg = parse_config(MINIMAL)
        res = run_experiment(cfg)
        with pytest.raises(ConfigError, match="format"):
            write_artifacts(res, tmp_path, fmt="xml")


class TestPresets:
    def test_fig1_shape(self):
        cfg = fig1_config(trials=3, seed=1)
        assert cfg.mode == "sync"
        assert isinstance(cfg.graph, RandomGraphSpec) and cfg.graph.n == 20
        inst = build_trial_instance(cfg, 0)
        assert set(inst.y0) <= {100, 300}
        assert all(1 <= z <= 100 for z in inst.z0)

    def test_fig3_matched_instances(self):
        cfgs = fig3_configs(trials=2, seed=3)
        a = build_trial_instance(cfgs["sync"], 1)
        b = build_trial_instance(cfgs["async"], 1)
        assert a.y0 == b.y0 and a.z0 == b.z0
        assert a.graph.out_neighbors == b.graph.out_neighbors
        assert cfgs["async"].delay.max_delay == 5

    def test_fig2_grid_cells(self):
        cells = fig2_grid(trials=2, seed=0)
        assert {(n, b) for n, b, _ in cells} == {
            (n, b) for n in (50, 100, 200, 300) for b in (5, 10, 15)
        }
        seeds = [cfg.seed for _, _, cfg in cells]
        assert len(set(seeds)) == len(seeds)

    def test_sweep_rows(self, tmp_path):
        cells = [
            (n, b, ExperimentConfig(
                mode="async",
                graph=RandomGraphSpec(n=n, edge_prob=0.6),
                initial=UniformInitial(y0_range=(0, 20), z0_range=(1, 3)),
                delay=__import__("qcs").DelayModel(max_delay=b),
                trials=2,
                seed=n + b,
            ))
            for n in (5, 8) for b in (2,)
        ]
        rows = run_sweep(cells, out_dir=tmp_path)
        assert len(rows) == 2
        text = (tmp_path / "sweep_summary.csv").read_text().splitlines()
        assert text[0].startswith("n,max_delay,trials")
        assert len(text) == 3
