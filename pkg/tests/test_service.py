import io
import json
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from curveot.io_formats import load_matrix, save_matrix
from curveot.clustering import DistanceMatrix, pairwise_matrix
from curveot.pipeline import PipelineConfig
from curveot.service import create_app
from curveot.synthetic import profile_curve


def curve_csv_bytes(curve):
    lines = ["x1,x2"] + [f"{x},{y}" for x, y in curve.points]
    return ("\n".join(lines) + "\n").encode()


def upload_payload(curves):
    manifest = {
        "name": "demo",
        "curves": [{"id": c.id, "path": f"{c.id}.csv"} for c in curves],
    }
    files = [("manifest", ("manifest.json", json.dumps(manifest).encode(), "application/json"))]
    for c in curves:
        files.append(("curves", (f"{c.id}.csv", curve_csv_bytes(c), "text/csv")))
    return files


@pytest.fixture
def client(tmp_path):
    app = create_app(tmp_path / "data")
    with TestClient(app) as tc:
        yield tc


@pytest.fixture
def dataset(client):
    curves = [
        profile_curve("jar", n=12, id="jar-1"),
        profile_curve("jar", n=12, scale=1.06, id="jar-2"),
        profile_curve("beaker", n=10, id="beaker-1"),
    ]
    resp = client.post("/datasets", files=upload_payload(curves))
    assert resp.status_code == 200, resp.text
    return resp.json()["id"], curves


def wait_for_job(client, job_id, timeout=30.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/jobs/{job_id}").json()
        if job["state"] in ("done", "failed"):
            return job
        time.sleep(0.05)
    raise TimeoutError("job did not finish")


class TestDatasets:
    def test_upload_and_get(self, client, dataset):
        ds_id, curves = dataset
        info = client.get(f"/datasets/{ds_id}").json()
        assert info["name"] == "demo"
        assert [c["id"] for c in info["curves"]] == ["jar-1", "jar-2", "beaker-1"]
        assert [c["points"] for c in info["curves"]] == [12, 12, 10]

    def test_upload_idempotent(self, client, dataset):
        ds_id, curves = dataset
        again = client.post("/datasets", files=upload_payload(curves))
        assert again.json()["id"] == ds_id

    def test_curve_points(self, client, dataset):
        ds_id, curves = dataset
        pts = client.get(f"/datasets/{ds_id}/curves/jar-1").json()["points"]
        assert np.allclose(pts, curves[0].points)

    def test_missing_dataset_404(self, client):
        resp = client.get("/datasets/doesnotexist")
        assert resp.status_code == 404
        body = resp.json()
        assert set(body) == {"code", "message", "detail"}
        assert body["code"] == "dataset_not_found"

    def test_bad_manifest_400(self, client):
        files = [("manifest", ("m.json", b"{broken", "application/json")),
                 ("curves", ("x.csv", b"x1,x2\n0,0\n1,1\n", "text/csv"))]
        resp = client.post("/datasets", files=files)
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad_manifest"

    def test_point_cap_enforced(self, client):
        big = profile_curve("jar", n=5001, id="big")
        other = profile_curve("jar", n=10, id="small")
        resp = client.post("/datasets", files=upload_payload([big, other]))
        assert resp.status_code == 400
        assert resp.json()["code"] == "curve_too_long"


class TestSchemePreview:
    def test_uniform_preview(self, client, dataset):
        ds_id, _ = dataset
        resp = client.get(
            "/schemes/preview",
            params={"dataset": ds_id, "curve": "jar-1", "scheme": '{"kind": "uniform"}'},
        )
        body = resp.json()
        assert np.allclose(body["weights"], [1 / 12] * 12)
        assert body["total"] == pytest.approx(1.0, abs=1e-12)

    def test_binomial_presets_shift_mass(self, client, dataset):
        ds_id, _ = dataset
        def preview(p):
            return client.get(
                "/schemes/preview",
                params={
                    "dataset": ds_id,
                    "curve": "jar-1",
                    "scheme": json.dumps({"kind": "binomial", "p": p}),
                },
            ).json()["weights"]

        sharp = np.array(preview(1 / 6))
        soft = np.array(preview(1 / 3))
        assert sharp[:2].sum() > soft[:2].sum()
        idx = np.arange(1, 13)
        assert idx @ sharp < idx @ soft

    def test_support_window_reported(self, client, dataset):
        ds_id, _ = dataset
        resp = client.get(
            "/schemes/preview",
            params={
                "dataset": ds_id,
                "curve": "jar-1",
                "scheme": json.dumps(
                    {"kind": "support_uniform", "support": {"mode": "index_fraction", "value": 0.5}}
                ),
            },
        )
        body = resp.json()
        assert body["window"] == [1, 6]
        assert sum(1 for w in body["weights"] if w > 0) == 6

    def test_bad_scheme_400(self, client, dataset):
        ds_id, _ = dataset
        resp = client.get(
            "/schemes/preview",
            params={"dataset": ds_id, "curve": "jar-1", "scheme": '{"kind": "nope"}'},
        )
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad_scheme"


class TestMatrixJobs:
    def test_job_lifecycle_and_result(self, client, dataset, tmp_path):
        ds_id, curves = dataset
        config = {"version": 1, "scheme": {"kind": "uniform"}, "external_half": False}
        resp = client.post("/jobs/matrix", json={"dataset": ds_id, "config": config})
        job_id = resp.json()["id"]
        job = wait_for_job(client, job_id)
        assert job["state"] == "done", job
        assert job["progress"] == {"done": 3, "total": 3}
        assert job["result"] == job_id

        matrix = client.get(f"/matrices/{job_id}").json()
        got = np.array(matrix["entries"])
        expected = pairwise_matrix(curves, PipelineConfig.from_json(config))
        assert np.abs(got - expected.entries).max() <= 1e-12
        assert matrix["labels"] == list(expected.labels)

    def test_job_idempotent_by_content(self, client, dataset):
        ds_id, _ = dataset
        config = {"version": 1, "scheme": {"kind": "uniform"}, "external_half": False}
        first = client.post("/jobs/matrix", json={"dataset": ds_id, "config": config}).json()
        wait_for_job(client, first["id"])
        second = client.post("/jobs/matrix", json={"dataset": ds_id, "config": config}).json()
        assert second["id"] == first["id"]
        assert second["cached"] is True

    def test_unknown_job_404(self, client):
        assert client.get("/jobs/nope").status_code == 404

    def test_bad_config_400(self, client, dataset):
        ds_id, _ = dataset
        resp = client.post(
            "/jobs/matrix", json={"dataset": ds_id, "config": {"version": 1, "bogus": 1}}
        )
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad_config"

    def test_results_survive_restart(self, tmp_path):
        data_dir = tmp_path / "persist"
        curves = [
            profile_curve("jar", n=10, id="a"),
            profile_curve("beaker", n=9, id="b"),
        ]
        config = {"version": 1, "scheme": {"kind": "uniform"}, "external_half": False}
        with TestClient(create_app(data_dir)) as c1:
            ds_id = c1.post("/datasets", files=upload_payload(curves)).json()["id"]
            job_id = c1.post("/jobs/matrix", json={"dataset": ds_id, "config": config}).json()["id"]
            wait_for_job(c1, job_id)
            entries = c1.get(f"/matrices/{job_id}").json()["entries"]
        with TestClient(create_app(data_dir)) as c2:
            job = c2.get(f"/jobs/{job_id}").json()
            assert job["state"] == "done"
            again = c2.get(f"/matrices/{job_id}").json()["entries"]
            assert again == entries
            ds = c2.get(f"/datasets/{ds_id}").json()
            assert [c["id"] for c in ds["curves"]] == ["a", "b"]


class TestCluster:
    def test_cluster_endpoint(self, client, dataset):
        ds_id, _ = dataset
        config = {"version": 1, "scheme": {"kind": "uniform"}, "external_half": False}
        job_id = client.post("/jobs/matrix", json={"dataset": ds_id, "config": config}).json()["id"]
        wait_for_job(client, job_id)
        resp = client.post("/cluster", json={"matrix": job_id, "linkage": "average"})
        body = resp.json()
        assert len(body["merges"]) == 2
        assert body["newick"].endswith(";")
        assert body["labels"] == ["jar-1", "jar-2", "beaker-1"]
        # the two jars merge first
        assert sorted(body["merges"][0][:2]) == [0, 1]

    def test_bad_linkage_400(self, client):
        resp = client.post("/cluster", json={"matrix": "x", "linkage": "median"})
        assert resp.status_code == 400

    def test_missing_matrix_404(self, client):
        resp = client.post("/cluster", json={"matrix": "missing", "linkage": "average"})
        assert resp.status_code == 404


class TestPlan:
    def test_identical_pair_zero_objective(self, client, dataset):
        ds_id, _ = dataset
        config = json.dumps({"version": 1, "scheme": {"kind": "uniform"}, "external_half": False})
        resp = client.get(
            "/plan", params={"dataset": ds_id, "a": "jar-1", "b": "jar-1", "config": config}
        )
        body = resp.json()
        assert body["objective"] <= 1e-12
        coupling = np.array(body["coupling"])
        assert coupling.shape == (12, 12)
        assert abs(coupling.sum() - 1.0) <= 1e-9
        assert len(body["measure_a"]) == 12
        assert len(body["points_a"]) == 12

    def test_unknown_curve_404(self, client, dataset):
        ds_id, _ = dataset
        resp = client.get("/plan", params={"dataset": ds_id, "a": "jar-1", "b": "ghost"})
        assert resp.status_code == 404

    def test_partial_plan_respects_reduced_costs(self, client, dataset):
        ds_id, _ = dataset
        config = json.dumps(
            {
                "version": 1,
                "scheme": {"kind": "uniform"},
                "external_half": False,
                "variant": "partial",
                "penalties": {"mode": "rectangle", "t": 4, "k": 4},
            }
        )
        resp = client.get(
            "/plan", params={"dataset": ds_id, "a": "jar-1", "b": "beaker-1", "config": config}
        )
        body = resp.json()
        coupling = np.array(body["coupling"])
        assert body["objective"] <= 1e-12
        assert coupling.shape == (12, 10)
