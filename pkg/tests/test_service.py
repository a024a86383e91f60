import json
import threading

import pytest
from fastapi.testclient import TestClient

from rigorscreen.cli import main as cli_main
from rigorscreen.config import PipelineConfig
from rigorscreen.pipeline import Pipeline, PipelineIncompleteError, PipelineStageError
from rigorscreen.reports import CriterionReport, render_report
from rigorscreen.webapp import create_app

from .toystudy import BLINDING_DISAGREEMENTS, build_toy_study, label_everything

TOY_TOOLS = ("pre-rob", "SciScore", "trn-scanner", "nct-naive", "opencode-screener")


@pytest.fixture
def toy_pipeline(tmp_path):
    config = build_toy_study(tmp_path)
    return Pipeline(config)


def prepare_queues(pipeline):
    pipeline.ingest()
    pipeline.detect()
    pipeline.import_adapters()
    pipeline.build_queues()


class TestPipeline:
    def test_halts_with_remaining_counts_when_unlabeled(self, toy_pipeline):
        with pytest.raises(PipelineIncompleteError) as err:
            toy_pipeline.run()
        assert err.value.remaining["blinding"] == len(BLINDING_DISAGREEMENTS)
        assert err.value.remaining["registration"] == 1  # the NCTC-lure paper

    def test_full_run_produces_reports(self, toy_pipeline):
        prepare_queues(toy_pipeline)
        label_everything(toy_pipeline)
        reports = toy_pipeline.run()
        assert set(reports) == {"registration", "blinding", "open_code"}
        blinding = reports["blinding"]
        assert blinding.tools == ("SciScore", "pre-rob")
        assert set(blinding.per_tool) == {"SciScore", "pre-rob"}
        assert blinding.ensemble_eval is not None
        for fmt in ("md", "csv", "json"):
            assert toy_pipeline.report_path("blinding", fmt).exists()

    def test_rerun_is_byte_identical(self, toy_pipeline):
        prepare_queues(toy_pipeline)
        label_everything(toy_pipeline)
        toy_pipeline.run()
        first = {
            fmt: toy_pipeline.report_path("blinding", fmt).read_bytes()
            for fmt in ("md", "csv", "json")
        }
        toy_pipeline.run()
        for fmt, blob in first.items():
            assert toy_pipeline.report_path("blinding", fmt).read_bytes() == blob

    def test_gold_files_written(self, toy_pipeline):
        prepare_queues(toy_pipeline)
        label_everything(toy_pipeline)
        toy_pipeline.run()
        lines = toy_pipeline.gold_path("blinding").read_text().splitlines()
        gold = [json.loads(l) for l in lines]
        assert len(gold) == 10
        by_pmcid = {g["pmcid"]: g for g in gold}
        assert by_pmcid["PMC8000101"]["provenance"] == "presumed_agreement"
        assert by_pmcid["PMC8000103"]["provenance"] == "curated"

    def test_complicated_pass2_flow_through_pipeline(self, toy_pipeline):
        prepare_queues(toy_pipeline)
        store = toy_pipeline.label_store()
        target = next(i for i in store.pending_items("blinding"))
        label_everything(toy_pipeline, complicated_items={target.item_id})
        reports = toy_pipeline.run()
        assert reports["blinding"].n_curated >= 1

    def test_stage_errors_carry_stage_name(self, toy_pipeline, tmp_path):
        broken = tmp_path / "adapters" / "prerob_blind.csv"
        broken.write_text("pmcid,blind\nPMC8000101,not-a-number\n",
                          encoding="utf-8")
        with pytest.raises(PipelineStageError) as err:
            toy_pipeline.run()
        assert err.value.stage == "import"
        assert "not-a-number" in str(err.value)

    def test_report_json_roundtrip(self, toy_pipeline):
        prepare_queues(toy_pipeline)
        label_everything(toy_pipeline)
        report = toy_pipeline.run()["blinding"]
        payload = json.loads(render_report(report, "json").decode("utf-8"))
        again = CriterionReport.from_dict(payload)
        assert again == report

    def test_markdown_layout(self, toy_pipeline):
        prepare_queues(toy_pipeline)
        label_everything(toy_pipeline)
        reports = toy_pipeline.run()
        md = toy_pipeline.report_path("blinding", "md").read_text()
        lines = md.splitlines()
        header_idx = lines.index("| Tool | Accuracy | Precision | Recall | F1 |")
        table = []
        for line in lines[header_idx:]:
            if not line.startswith("|"):
                break
            table.append(line)
        assert table[-1].startswith("| Ensemble |")
        assert any(l.startswith("Function learned: ") for l in lines)
        assert any(l.startswith("Percent same with 80% data splits:") for l in lines)
        reg_md = toy_pipeline.report_path("registration", "md").read_text()
        assert "## Registration identifiers" in reg_md
        assert "TRN (total)" in reg_md

    def test_registration_breakdown_counts(self, toy_pipeline):
        prepare_queues(toy_pipeline)
        label_everything(toy_pipeline)
        reports = toy_pipeline.run()
        breakdown = {r.registry: r for r in reports["registration"].registration_breakdown}
        assert breakdown["TRN (total)"].total == 3
        assert breakdown["ctgov"].total == 3
        assert breakdown["ctgov"].per_tool["trn-scanner"] == 3


def service_client(tmp_path):
    config = build_toy_study(tmp_path)
    pipeline = Pipeline(config)
    prepare_queues(pipeline)
    app = create_app(config)
    return TestClient(app), config, pipeline


class TestHttpApi:
    def test_criteria_listing(self, tmp_path):
        client, config, _ = service_client(tmp_path)
        res = client.get("/api/criteria")
        assert res.status_code == 200
        ids = [c["id"] for c in res.json()]
        assert ids == ["registration", "blinding", "open_code"]
        assert all("description" in c and "progress" in c for c in res.json())

    def test_queue_next_lease_and_done(self, tmp_path):
        client, _, _ = service_client(tmp_path)
        seen = set()
        while True:
            res = client.get("/api/queue/next",
                             params={"criterion": "blinding", "curator": "c1"})
            assert res.status_code == 200
            body = res.json()
            if body["done"]:
                break
            item = body["item"]
            assert item["item_id"] not in seen or len(seen) == 0
            seen.add(item["item_id"])
            post = client.post("/api/labels", json={
                "item_id": item["item_id"], "decision": "no",
                "curator": "c1", "pass": item["pass"],
            })
            assert post.status_code == 200
        # 3 disagreement + 4 control items
        assert len(seen) == 7

    def test_concurrent_curators_get_disjoint_items(self, tmp_path):
        client, _, _ = service_client(tmp_path)
        grabbed = {"c1": [], "c2": []}
        errors = []

        def poll(curator):
            try:
                for _ in range(500):
                    res = client.get("/api/queue/next", params={
                        "criterion": "blinding", "curator": curator,
                    })
                    body = res.json()
                    if body["done"]:
                        return
                    item = body["item"]
                    grabbed[curator].append(item["item_id"])
                    client.post("/api/labels", json={
                        "item_id": item["item_id"], "decision": "no",
                        "curator": curator, "pass": item["pass"],
                    })
            except Exception as exc:  # surface thread failures
                errors.append(exc)

        threads = [threading.Thread(target=poll, args=(c,)) for c in ("c1", "c2")]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors
        assert set(grabbed["c1"]).isdisjoint(grabbed["c2"])
        assert len(grabbed["c1"]) + len(grabbed["c2"]) == 7

    def test_duplicate_label_conflict(self, tmp_path):
        client, _, _ = service_client(tmp_path)
        res = client.get("/api/queue/next",
                         params={"criterion": "blinding", "curator": "c1"})
        item = res.json()["item"]
        body = {"item_id": item["item_id"], "decision": "yes",
                "curator": "c1", "pass": item["pass"]}
        assert client.post("/api/labels", json=body).status_code == 200
        assert client.post("/api/labels", json=body).status_code == 409

    def test_label_validation_errors(self, tmp_path):
        client, _, _ = service_client(tmp_path)
        res = client.post("/api/labels", json={"decision": "yes"})
        assert res.status_code == 400
        assert "item_id" in res.json()["fields"]
        res = client.post("/api/labels", json={
            "item_id": "x", "decision": "maybe", "curator": "c1",
        })
        assert res.status_code == 400
        assert res.json()["fields"] == ["decision"]
        res = client.post("/api/labels", json={
            "item_id": "missing-item", "decision": "yes", "curator": "c1",
        })
        assert res.status_code == 404

    def test_unknown_criterion(self, tmp_path):
        client, _, _ = service_client(tmp_path)
        res = client.get("/api/queue/next",
                         params={"criterion": "nope", "curator": "c1"})
        assert res.status_code == 404

    def test_progress_endpoint(self, tmp_path):
        client, _, _ = service_client(tmp_path)
        res = client.get("/api/progress", params={"criterion": "blinding"})
        assert res.status_code == 200
        body = res.json()
        assert body["disagreement_total"] == 3
        assert body["control_total"] == 4
        assert body["disagreement_done"] == 0

    def test_report_pending_then_built(self, tmp_path):
        client, config, pipeline = service_client(tmp_path)
        res = client.get("/api/reports/blinding", params={"format": "md"})
        assert res.status_code == 404
        assert res.json()["status"] == "pending"
        label_everything(pipeline)
        res = client.get("/api/reports/blinding", params={"format": "md"})
        assert res.status_code == 200
        assert "Function learned:" in res.json()["content"]
        res = client.get("/api/reports/blinding", params={"format": "json"})
        assert res.status_code == 200
        assert res.json()["report"]["criterion"] == "blinding"

    def test_no_tool_identity_in_queue_responses(self, tmp_path):
        client, _, _ = service_client(tmp_path)
        res = client.get("/api/queue/next",
                         params={"criterion": "blinding", "curator": "c1"})
        payload = json.dumps(res.json())
        for tool in TOY_TOOLS:
            assert tool not in payload

    def test_http_report_matches_cli_report(self, tmp_path):
        client, config, pipeline = service_client(tmp_path)
        label_everything(pipeline)
        http_md = client.get("/api/reports/blinding",
                             params={"format": "md"}).json()["content"]
        report = pipeline.load_report("blinding")
        assert render_report(report, "md").decode("utf-8") == http_md


class TestCli:
    def write_config(self, tmp_path):
        config = build_toy_study(tmp_path)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config.to_dict()), encoding="utf-8")
        return config, str(path)

    def test_ingest_detect_import_queue(self, tmp_path, capsys):
        config, config_path = self.write_config(tmp_path)
        assert cli_main(["ingest", "--config", config_path]) == 0
        assert cli_main(["detect", "--config", config_path]) == 0
        assert cli_main(["import", "--config", config_path]) == 0
        assert cli_main(["queue", "--config", config_path]) == 0
        assert cli_main(["controls", "--config", config_path]) == 0
        out = capsys.readouterr().out
        assert "ingested 10 documents" in out
        assert "control positives" in out
        assert (tmp_path / "out" / "queue" / "blinding.ndjson").exists()

    def test_evaluate_reports_incomplete_then_ok(self, tmp_path, capsys):
        config, config_path = self.write_config(tmp_path)
        for verb in ("ingest", "detect", "import", "queue"):
            cli_main([verb, "--config", config_path])
        assert cli_main(["evaluate", "--config", config_path]) == 1
        assert "curation incomplete" in capsys.readouterr().out
        label_everything(Pipeline(config))
        assert cli_main(["evaluate", "--config", config_path]) == 0
        out = capsys.readouterr().out
        assert "Function learned:" in out

    def test_report_verb_renders(self, tmp_path, capsys):
        config, config_path = self.write_config(tmp_path)
        for verb in ("ingest", "detect", "import", "queue"):
            cli_main([verb, "--config", config_path])
        label_everything(Pipeline(config))
        cli_main(["evaluate", "--config", config_path])
        capsys.readouterr()
        assert cli_main(["report", "--config", config_path,
                         "--criterion", "blinding", "--format", "md"]) == 0
        out = capsys.readouterr().out
        assert "| Tool | Accuracy | Precision | Recall | F1 |" in out

    def test_ensemble_verb_prints_rule(self, tmp_path, capsys):
        config, config_path = self.write_config(tmp_path)
        for verb in ("ingest", "detect", "import", "queue"):
            cli_main([verb, "--config", config_path])
        label_everything(Pipeline(config))
        assert cli_main(["ensemble", "--config", config_path,
                         "--criterion", "blinding"]) == 0
        out = capsys.readouterr().out
        assert "Function learned:" in out
        assert "Percent same with 80% data splits:" in out
        model_path = tmp_path / "out" / "reports" / "blinding.model.json"
        assert model_path.exists()
        from rigorscreen.ensemble import EnsembleModel
        model = EnsembleModel.from_json(model_path.read_text())
        assert model.tool_order == ("SciScore", "pre-rob")

    def test_run_verb_incomplete_exit_code(self, tmp_path, capsys):
        config, config_path = self.write_config(tmp_path)
        assert cli_main(["run", "--config", config_path]) == 1
        err = capsys.readouterr().err
        assert "items need labels" in err
