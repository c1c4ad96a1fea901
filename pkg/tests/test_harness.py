import json

import pytest

from emdtest.errors import ParamError, ParseError
from emdtest.harness import (ExperimentConfig, calibration_table, instance_json, load_instance,
                             oracle_of, report_csv, run_experiment)


def cfg(**kw):
    base = dict(mode="test", generator="point-mass", trials=1)
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(mode="plot"), dict(trials=0), dict(eps=0.0), dict(span=-1.0),
                                    dict(delta=1.0), dict(seed=-1), dict(cluster="maybe"),
                                    dict(generator=None)])
    def test_invalid(self, kw):
        with pytest.raises(ParamError):
            cfg(**kw)

    def test_unknown_keys(self):
        with pytest.raises(ParseError):
            ExperimentConfig.from_dict({"mode": "test", "generator": "random", "colour": 1})

    def test_unknown_generator(self):
        with pytest.raises(ParamError):
            run_experiment(cfg(generator="nope"))

    def test_generator_mode_mismatch(self):
        with pytest.raises(ParamError):
            run_experiment(cfg(generator="hard-line"))


class TestRun:
    def test_single_point_mass_accepts(self):
        rep = run_experiment(cfg())
        assert [t["decision"] for t in rep.trials] == ["accept"]
        assert rep.aggregate["accept_rate"] == 1.0
        assert rep.oracle["emd_exact"] == 0.0

    def test_hard_pair_rejection_rate(self):
        rep = run_experiment(cfg(generator="hard-pair", params={"gap": 0.2}, eps=0.1, trials=200, c=16))
        assert rep.oracle["emd_exact"] == pytest.approx(0.2)
        assert rep.aggregate["reject_rate"] >= 0.60

    @pytest.mark.parametrize("kw", [
        dict(mode="test", generator="random", d=2, eps=0.5, params={"same": False}),
        dict(mode="test-known", generator="random", d=2, eps=0.5),
        dict(mode="estimate", generator="hard-pair", eps=0.3, params={"gap": 0.1}),
        dict(mode="tree", generator="random-tree", eps=0.5, params={"n": 6}),
        dict(mode="test-cluster", generator="clustered", d=2, eps=0.25),
        dict(mode="test-cluster", generator="clustered", d=2, eps=0.25, cluster="unknown"),
        dict(mode="test-cluster", generator="far-from-clusterable", d=2, eps=0.25, cluster="unknown"),
    ])
    def test_budget_accounting(self, kw):
        rep = run_experiment(cfg(trials=3, **kw))
        assert rep.aggregate["budget_matches"]
        assert all("seed" in t for t in rep.trials)
        assert [t["seed"] for t in rep.trials] == [0, 1, 2]

    def test_rates_are_means(self):
        rep = run_experiment(cfg(generator="hard-pair", params={"gap": 0.2}, eps=0.1, trials=20))
        rejects = sum(t["decision"] == "reject" for t in rep.trials)
        assert rep.aggregate["reject_rate"] == rejects / 20
        assert rep.aggregate["accept_rate"] == 1 - rejects / 20

    def test_estimate_fields(self):
        rep = run_experiment(cfg(mode="estimate", generator="hard-pair", eps=0.3, params={"gap": 0.1},
                                 trials=4))
        for t in rep.trials:
            assert t["abs_error"] == pytest.approx(abs(t["estimate"] - 0.1))
        assert 0 <= rep.aggregate["within_eps_rate"] <= 1

    def test_tree_oracle_has_flow_check(self):
        rep = run_experiment(cfg(mode="tree", generator="hard-line", eps=0.2))
        assert rep.oracle["emd_exact"] == pytest.approx(0.2)
        assert rep.oracle["emd_flow"] == pytest.approx(0.2)


class TestReproducibility:
    def test_byte_identical(self):
        c = cfg(generator="random", params={"same": False, "points": 5}, d=2, eps=0.5, trials=5, seed=7)
        assert run_experiment(c).dumps() == run_experiment(c).dumps()

    def test_workers_do_not_change_report(self):
        kw = dict(mode="estimate", generator="shifted", eps=0.3, trials=4, seed=3)
        assert run_experiment(cfg(workers=2, **kw)).dumps() == run_experiment(cfg(**kw)).dumps()

    def test_seed_changes_outcome(self):
        kw = dict(mode="estimate", generator="shifted", eps=0.3, trials=2)
        assert run_experiment(cfg(seed=0, **kw)).dumps() != run_experiment(cfg(seed=10, **kw)).dumps()

    def test_report_is_json(self):
        rep = json.loads(run_experiment(cfg()).dumps())
        assert rep["rng"] == "PCG64"
        assert set(rep) >= {"config", "instance", "oracle", "budget", "trials", "aggregate"}
        assert "workers" not in rep["config"]


class TestFiles:
    def test_roundtrip_through_instance_file(self, tmp_path):
        gen_cfg = cfg(generator="clustered", d=2, eps=0.25)
        inst = load_instance(gen_cfg)
        path = tmp_path / "inst.json"
        path.write_text(json.dumps(instance_json(inst, oracle_of(inst))))
        a = run_experiment(cfg(mode="test-cluster", generator=None, inputs=[str(path)], eps=0.25, trials=3))
        b = run_experiment(cfg(mode="test-cluster", d=2, generator="clustered", eps=0.25, trials=3))
        assert a.trials == b.trials

    def test_two_distribution_files(self, tmp_path):
        inst = load_instance(cfg(generator="hard-pair", params={"gap": 0.2}))
        (tmp_path / "p.json").write_text(json.dumps(inst.p.to_json()))
        (tmp_path / "q.json").write_text(json.dumps(inst.q.to_json()))
        rep = run_experiment(cfg(generator=None, inputs=[str(tmp_path / "p.json"), str(tmp_path / "q.json")]))
        assert rep.oracle["emd_exact"] == pytest.approx(0.2)

    def test_tree_file(self, tmp_path):
        inst = load_instance(cfg(mode="tree", generator="hard-line", eps=0.2))
        path = tmp_path / "tree.json"
        path.write_text(json.dumps(instance_json(inst, oracle_of(inst))))
        rep = run_experiment(cfg(mode="tree", generator=None, inputs=[str(path)], eps=0.2))
        assert rep.oracle["emd_exact"] == pytest.approx(0.2)

    def test_missing_file(self):
        with pytest.raises(OSError):
            run_experiment(cfg(generator=None, inputs=["/nonexistent/p.json", "/nonexistent/q.json"]))

    def test_bad_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{")
        with pytest.raises(ParseError):
            run_experiment(cfg(generator=None, inputs=[str(path)]))

    def test_single_file_without_pair(self, tmp_path):
        path = tmp_path / "one.json"
        path.write_text(json.dumps({"p": {}}))
        with pytest.raises(ParseError):
            run_experiment(cfg(generator=None, inputs=[str(path)]))


class TestOutputs:
    def test_csv(self):
        rep = run_experiment(cfg(trials=3))
        lines = report_csv(rep).splitlines()
        assert lines[0].startswith("trial,seed,decision")
        assert len(lines) == 5 and lines[-1].startswith("all,")

    def test_calibration_table(self):
        rows = calibration_table(cfg(trials=2))
        assert [r["c"] for r in rows] == [1.0, 4.0, 16.0]
        assert rows[0]["budget_p"] < rows[2]["budget_p"]
