"""Config round-trips, hashing, CSV formatting, manifests."""

import json
import math

import pytest

import conelab as cl
from conelab import config as cfgmod
from conelab import report as rep
from conelab.errors import ConfigError


def sample_dict():
    return {
        "cone": {"kind": "convex_bodies", "dim": 2, "metric": "hausdorff", "power": 2.0, "directions": 256},
        "radial": {"alpha": 1.5, "t_min": 1.0, "slowly_varying": {"kind": "constant", "c": 1.0}},
        "spectral": {"preset": "rotated-segment", "params": {}},
        "event": {"r": 1.0, "predicate": {"kind": "support_threshold", "u0": [1.0, 0.0], "c": 0.5}},
        "sigma_b": math.acos(0.5) / math.pi,
        "schedule": {"kind": "power", "exponent": 1.4, "coeff": 8.5},
        "n_grid": [20, 50],
        "trials": 1000,
        "seed": 42,
        "regime": "theorem1",
        "centering": {"kind": "zero"},
        "band": [0.7, 1.3],
    }


class TestConfigRoundTrip:
    def test_hash_stable_across_round_trips(self):
        d = sample_dict()
        cfg = cfgmod.experiment_from_dict(d)
        h1 = cfgmod.experiment_config_hash(cfg)
        cfg2 = cfgmod.experiment_from_dict(cfgmod.experiment_to_dict(cfg))
        assert cfgmod.experiment_config_hash(cfg2) == h1
        # serialization noise (key order, whitespace) does not matter
        noisy = json.loads(json.dumps(d, indent=4))
        assert cfgmod.experiment_config_hash(cfgmod.experiment_from_dict(noisy)) == h1

    def test_all_predicates_round_trip(self):
        preds = [
            cl.FullSphere(),
            cl.SupportThreshold(u0=(0.0, 1.0), c=0.25),
            cl.CoordinateThreshold(c=1.0),
            cl.CorrelationThreshold(template=cl.hat_function(1.0, 2.0), theta=0.8),
        ]
        for pred in preds:
            back = cfgmod.predicate_from_dict(cfgmod.predicate_to_dict(pred))
            assert type(back) is type(pred)

    def test_all_cones_round_trip(self):
        for cone in (cl.max_cone(), cl.convex_bodies_cone(metric="lp"), cl.functions_cone(), cl.union_cone(dim=2)):
            back = cfgmod.cone_from_dict(cfgmod.cone_to_dict(cone))
            assert back.name == cone.name

    def test_estimate_sigma_form(self):
        d = sample_dict()
        d["sigma_b"] = {"estimate": 5000}
        cfg = cfgmod.experiment_from_dict(d)
        assert cfg.sigma_b == ("estimate", 5000)
        assert cfgmod.experiment_to_dict(cfg)["sigma_b"] == {"estimate": 5000}

    def test_missing_key_is_config_error(self):
        d = sample_dict()
        del d["trials"]
        with pytest.raises(ConfigError):
            cfgmod.experiment_from_dict(d)

    def test_unknown_cone_kind(self):
        with pytest.raises(ConfigError):
            cfgmod.cone_from_dict({"kind": "wasserstein"})

    def test_axioms_config_with_override(self):
        cone, trials, tol, seed = cfgmod.axioms_from_dict(
            {"cone": {"kind": "max"}, "trials": 5, "claims_override": {"claims_invariant": True}}
        )
        assert cone.claims_invariant
        with pytest.raises(ConfigError):
            cfgmod.axioms_from_dict({"cone": {"kind": "max"}, "claims_override": {"bogus": True}})

    def test_karamata_queries_parse(self):
        ratios, moments = cfgmod.karamata_queries(
            {
                "karamata": [{"f": {"kind": "power", "rho": -1.5}, "beta": 2.0, "x": 1e6}],
                "truncated_moments": [
                    {"radial": {"alpha": 1.0, "slowly_varying": {"kind": "constant"}}, "gamma": 2.0, "T": 1e4}
                ],
            }
        )
        q, x, tol = ratios[0]
        assert q.f(2.0) == pytest.approx(2.0 ** -1.5)
        assert moments[0][1] == 2.0


class TestCsvFormat:
    def _rows(self):
        cfg = cfgmod.experiment_from_dict(sample_dict())
        import dataclasses

        cfg = dataclasses.replace(cfg, cone=cl.max_cone(),
                                  event=cl.PolarEvent(r=1.0, predicate=cl.FullSphere()),
                                  spec=cl.RegVarSpec(alpha=1.5), sigma_b=1.0,
                                  n_grid=(100, 10_000))
        return cl.theorem1_run(cfg).rows

    def test_header_and_column_order(self):
        csv = rep.rows_to_csv(self._rows())
        header = csv.splitlines()[0]
        assert header == "n,lambda_n,gamma_n,p_hat,ci_lo,ci_hi,gamma_p,mu_U,ratio,single_jump_ref,trials_used,exact"

    def test_floats_round_trip(self):
        rows = self._rows()
        csv = rep.rows_to_csv(rows)
        cells = csv.splitlines()[1].split(",")
        assert float(cells[2]) == rows[0].gamma_n
        assert cells[-1] in ("true", "false")

    def test_plot_data_two_columns(self):
        dat = rep.rows_to_plot_data(self._rows())
        lines = dat.splitlines()
        assert lines[0].startswith("#")
        assert all(len(line.split()) == 2 for line in lines[1:])


class TestManifest:
    def test_manifest_fields(self, tmp_path):
        man = rep.RunManifest(config_sha256="ab" * 32, seed=9).start().finish()
        man.outputs.append("rows.csv")
        data = man.to_jsonable()
        assert data["config_sha256"] == "ab" * 32
        assert data["tool_version"] == cl.__version__
        assert data["started_utc"] <= data["finished_utc"]
        rep.write_json(tmp_path / "manifest.json", data)
        assert json.loads((tmp_path / "manifest.json").read_text())["seed"] == 9

    def test_canonical_hash_ignores_key_order(self):
        a = {"x": 1, "y": [1, 2]}
        b = {"y": [1, 2], "x": 1}
        assert cfgmod.config_hash(a) == cfgmod.config_hash(b)


class TestFigures:
    def test_ratio_figure_written(self, tmp_path):
        cfg = cfgmod.experiment_from_dict(sample_dict())
        import dataclasses

        cfg = dataclasses.replace(cfg, cone=cl.max_cone(),
                                  event=cl.PolarEvent(r=1.0, predicate=cl.FullSphere()),
                                  spec=cl.RegVarSpec(alpha=1.5), sigma_b=1.0,
                                  n_grid=(100, 10_000))
        res = cl.theorem1_run(cfg)
        out = tmp_path / "fig.png"
        rep.render_ratio_figure(res, out)
        assert out.exists() and out.stat().st_size > 1000
