"""HTTP API behavior: registration, leases, responses, consensus, replay."""

from __future__ import annotations

import threading

import pytest
from fastapi.testclient import TestClient

from easg_kit.consensus import QuestionKind
from easg_kit.core import structurally_equal, validate_graph
from easg_kit.formats import graph_from_jsonable, graph_to_jsonable
from easg_kit.service import EventStore, create_app, replay

from service_helpers import (
    TAX,
    FakeClock,
    clip_a_seeds,
    pick_answers,
    register_body,
    run_clip_a,
    simple_graph,
    table3_graph,
)


@pytest.fixture()
def clock():
    return FakeClock()


@pytest.fixture()
def store(tmp_path, clock):
    s = EventStore(tmp_path / "events.ndjson", clock=clock)
    yield s
    s.close()


@pytest.fixture()
def client(store):
    return TestClient(create_app(store, lease_seconds=1800.0))


def claim(client, annotator, kind="refinement"):
    return client.get("/tasks/next", params={"kind": kind, "annotator": annotator})


class TestRegistration:
    def test_register_creates_one_task_per_timestep(self, client):
        r = client.post("/clips", json=register_body("clip-a", clip_a_seeds()))
        assert r.status_code == 201
        assert r.json() == {
            "clip_id": "clip-a",
            "tasks": ["ref:clip-a:1", "ref:clip-a:2", "ref:clip-a:3"],
        }

    def test_duplicate_clip_conflicts(self, client):
        body = register_body("clip-a", clip_a_seeds())
        assert client.post("/clips", json=body).status_code == 201
        r = client.post("/clips", json=body)
        assert r.status_code == 409
        assert r.json()["detail"]["error"] == "clip-exists"

    def test_timestep_gap_rejected(self, client):
        graphs = [simple_graph("clip-a", 1), simple_graph("clip-a", 3)]
        r = client.post("/clips", json=register_body("clip-a", graphs))
        assert r.status_code == 422
        assert "timestep" in r.json()["detail"]["message"]

    def test_wrong_clip_id_rejected(self, client):
        r = client.post("/clips", json=register_body("clip-b", [simple_graph("clip-a", 1)]))
        assert r.status_code == 422

    def test_malformed_graph_rejected(self, client):
        body = register_body("clip-a", [simple_graph("clip-a", 1)])
        del body["graphs"][0]["nodes"]
        r = client.post("/clips", json=body)
        assert r.status_code == 422
        assert r.json()["detail"]["error"] == "malformed-graph"

    def test_invalid_graph_returns_the_validation_report(self, client):
        body = register_body("clip-a", [simple_graph("clip-a", 1)])
        body["graphs"][0]["edges"] = []
        r = client.post("/clips", json=body)
        assert r.status_code == 422
        detail = r.json()["detail"]
        assert detail["error"] == "invalid-graph"
        assert detail["report"]["ok"] is False
        assert detail["report"]["violations"]

    def test_narration_count_must_match(self, client):
        body = register_body("clip-a", clip_a_seeds(), narrations=["one"])
        r = client.post("/clips", json=body)
        assert r.status_code == 422
        assert "narration" in r.json()["detail"]["message"]

    def test_unknown_label_rejected_by_taxonomy(self, client):
        body = register_body("clip-a", [simple_graph("clip-a", 1)])
        body["graphs"][0]["nodes"][1]["verb"] = "reticulate"
        r = client.post("/clips", json=body)
        assert r.status_code == 422
        codes = [v["code"] for v in r.json()["detail"]["report"]["violations"]]
        assert "UNKNOWN_VERB" in codes


class TestTaxonomy:
    def test_taxonomy_endpoint_lists_the_classes(self, client):
        doc = client.get("/taxonomy").json()
        assert doc["verbs"] == list(TAX.verbs)
        assert doc["nouns"] == list(TAX.nouns)
        assert doc["relations"] == list(TAX.relations)


class TestClaims:
    def test_tasks_served_in_clip_timestep_order(self, client):
        client.post("/clips", json=register_body("clip-b", [simple_graph("clip-b", 1)]))
        client.post("/clips", json=register_body("clip-a", clip_a_seeds()))
        # active leases push later claimers to the next open task, in order
        got = [claim(client, a).json()["task_id"] for a in ("a1", "a2", "a3", "a4")]
        assert got == ["ref:clip-a:1", "ref:clip-a:2", "ref:clip-a:3", "ref:clip-b:1"]

    def test_no_tasks_means_204(self, client):
        assert claim(client, "a1").status_code == 204

    def test_active_claim_blocks_other_annotators_on_that_task(self, client):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        first = claim(client, "a1")
        assert first.status_code == 200
        assert first.json()["claim"]["annotator"] == "a1"
        assert claim(client, "a2").status_code == 204

    def test_submission_reopens_the_task_for_others(self, client):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        task = claim(client, "a1").json()
        client.post(f"/tasks/{task['task_id']}/response",
                    json={"annotator": "a1",
                          "graph": graph_to_jsonable(simple_graph("clip-a", 1))})
        r = claim(client, "a2")
        assert r.status_code == 200
        assert r.json()["task_id"] == task["task_id"]
        assert r.json()["responses"] == 1

    def test_holder_reclaim_refreshes_the_lease(self, client, clock):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        first = claim(client, "a1").json()
        clock.advance(600.0)
        second = claim(client, "a1").json()
        assert second["task_id"] == first["task_id"]
        assert second["claim"]["expires"] > first["claim"]["expires"]

    def test_expired_lease_is_reclaimable(self, client, clock):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        claim(client, "a1")
        assert claim(client, "a2").status_code == 204
        clock.advance(1801.0)
        r = claim(client, "a2")
        assert r.status_code == 200
        assert r.json()["claim"]["annotator"] == "a2"

    def test_stale_submit_after_expiry_conflicts(self, client, clock):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        task = claim(client, "a1").json()
        clock.advance(1801.0)
        r = client.post(
            f"/tasks/{task['task_id']}/response",
            json={"annotator": "a1",
                  "graph": graph_to_jsonable(simple_graph("clip-a", 1))},
        )
        assert r.status_code == 409
        assert r.json()["detail"]["error"] == "no-active-lease"

    def test_submit_by_non_holder_conflicts(self, client):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        task = claim(client, "a1").json()
        r = client.post(
            f"/tasks/{task['task_id']}/response",
            json={"annotator": "a2",
                  "graph": graph_to_jsonable(simple_graph("clip-a", 1))},
        )
        assert r.status_code == 409
        assert r.json()["detail"]["error"] == "claimed-by-other"

    def test_fifty_concurrent_claimers_get_one_winner(self, client):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        results = [None] * 50
        barrier = threading.Barrier(50)

        def worker(i):
            barrier.wait()
            results[i] = claim(client, f"racer-{i:02d}").status_code

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(50)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(results) == [200] + [204] * 49


class TestResponses:
    def test_unknown_task_404(self, client):
        r = client.post("/tasks/ref:nope:1/response", json={"annotator": "a1"})
        assert r.status_code == 404

    def test_response_requires_an_active_claim(self, client):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        r = client.post(
            "/tasks/ref:clip-a:1/response",
            json={"annotator": "a1",
                  "graph": graph_to_jsonable(simple_graph("clip-a", 1))},
        )
        assert r.status_code == 409
        assert r.json()["detail"]["error"] == "no-active-lease"

    def test_double_answer_conflicts(self, client):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        task = claim(client, "a1").json()
        doc = graph_to_jsonable(simple_graph("clip-a", 1))
        assert client.post(f"/tasks/{task['task_id']}/response",
                           json={"annotator": "a1", "graph": doc}).status_code == 200
        claim(client, "a1")  # no other task; 204, but also must not re-open this one
        r = client.post(f"/tasks/{task['task_id']}/response",
                        json={"annotator": "a1", "graph": doc})
        assert r.status_code == 409

    def test_wrong_timestep_graph_rejected(self, client):
        client.post("/clips", json=register_body("clip-a", clip_a_seeds()))
        task = claim(client, "a1").json()
        assert task["timestep"] == 1
        r = client.post(
            f"/tasks/{task['task_id']}/response",
            json={"annotator": "a1",
                  "graph": graph_to_jsonable(simple_graph("clip-a", 2))},
        )
        assert r.status_code == 422

    def test_invalid_refinement_returns_report(self, client):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        task = claim(client, "a1").json()
        doc = graph_to_jsonable(simple_graph("clip-a", 1))
        doc["edges"] = []
        r = client.post(f"/tasks/{task['task_id']}/response",
                        json={"annotator": "a1", "graph": doc})
        assert r.status_code == 422
        assert r.json()["detail"]["report"]["violations"]

    def test_task_view_never_contains_submitted_graphs(self, client):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        task = claim(client, "a1").json()
        client.post(f"/tasks/{task['task_id']}/response",
                    json={"annotator": "a1",
                          "graph": graph_to_jsonable(simple_graph("clip-a", 1))})
        view = client.get(f"/tasks/{task['task_id']}").json()
        assert view["responses"] == 1
        assert view["responded"] == ["a1"]
        assert "graph" not in str(view["responses"])
        flat = str(view)
        assert "'nodes'" not in flat or flat.count("'nodes'") == str(
            view["payload"]).count("'nodes'")


class TestConsensusFlow:
    def test_unanimity_spawns_no_validation_and_merge_echoes_input(self, client):
        g = simple_graph("clip-a", 1)
        client.post("/clips", json=register_body("clip-a", [g]))
        for a in ("a1", "a2", "a3"):
            task = claim(client, a).json()
            r = client.post(f"/tasks/{task['task_id']}/response",
                            json={"annotator": a, "graph": graph_to_jsonable(g)})
            assert r.status_code == 200
        assert claim(client, "val-1", kind="validation").status_code == 204
        merged = client.post("/clips/clip-a/merge")
        assert merged.status_code == 200
        out = graph_from_jsonable(merged.json()["graphs"][0])
        assert structurally_equal(out, g)

    def test_walkthrough_trio_produces_all_four_question_kinds(self, client):
        client.post("/clips", json=register_body("clip-a", clip_a_seeds()))
        for a in ("a1", "a2", "a3"):
            for t in (1, 2, 3):
                task = claim(client, a).json()
                graph = (table3_graph(a) if t == 3
                         else simple_graph("clip-a", t, *(("open", "drawer") if t == 1
                                                          else ("take", "bowl"))))
                client.post(f"/tasks/{task['task_id']}/response",
                            json={"annotator": a, "graph": graph_to_jsonable(graph)})
        task = claim(client, "val-1", kind="validation")
        assert task.status_code == 200
        questions = task.json()["payload"]["questions"]
        kinds = {q["kind"] for q in questions}
        assert kinds == {k.value for k in QuestionKind}

    def test_answers_resolve_to_the_published_consensus(self, client):
        run_clip_a(client)
        merged = client.get("/clips/clip-a/graphs").json()["merged"]
        out = graph_from_jsonable(merged[2])
        assert validate_graph(out, TAX).ok
        assert out.verb == "take"
        by_noun = {n.noun: n.node_id for n in out.object_nodes}
        assert set(by_noun) == {"bowl", "left hand", "flour"}
        rels = {(e.src, e.relation, e.dst) for e in out.edges}
        assert ("verb", "with", by_noun["left hand"]) in rels
        assert (by_noun["bowl"], "with", by_noun["flour"]) in rels
        assert len(out.edges) == 4

    def test_incomplete_refinement_blocks_merge(self, client):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        task = claim(client, "a1").json()
        client.post(f"/tasks/{task['task_id']}/response",
                    json={"annotator": "a1",
                          "graph": graph_to_jsonable(simple_graph("clip-a", 1))})
        r = client.post("/clips/clip-a/merge")
        assert r.status_code == 409
        detail = r.json()["detail"]
        assert detail["error"] == "incomplete"
        assert detail["responses"] == 1
        assert detail["required"] == 3

    def test_merge_is_idempotent(self, client):
        run_clip_a(client)
        first = client.post("/clips/clip-a/merge").json()
        second = client.post("/clips/clip-a/merge").json()
        assert first["created"] is False
        assert first["graphs"] == second["graphs"]

    def test_validation_answer_rules(self, client):
        client.post("/clips", json=register_body("clip-a", clip_a_seeds()))
        for a in ("a1", "a2", "a3"):
            for t in (1, 2, 3):
                task = claim(client, a).json()
                graph = (table3_graph(a) if t == 3
                         else simple_graph("clip-a", t, *(("open", "drawer") if t == 1
                                                          else ("take", "bowl"))))
                client.post(f"/tasks/{task['task_id']}/response",
                            json={"annotator": a, "graph": graph_to_jsonable(graph)})
        task = claim(client, "val-1", kind="validation").json()
        questions = task["payload"]["questions"]
        answers = pick_answers(questions)
        url = f"/tasks/{task['task_id']}/response"

        r = client.post(url, json={"annotator": "val-1",
                                   "answers": answers[:-1]})
        assert r.status_code == 422
        assert r.json()["detail"]["error"] == "unanswered-questions"

        bad_choice = [dict(a) for a in answers]
        bad_choice[0]["choice"] = "reticulate splines"
        r = client.post(url, json={"annotator": "val-1", "answers": bad_choice})
        assert r.status_code == 422
        assert r.json()["detail"]["error"] == "bad-choice"

        dup = answers + [answers[0]]
        r = client.post(url, json={"annotator": "val-1", "answers": dup})
        assert r.status_code == 422
        assert r.json()["detail"]["error"] == "duplicate-answer"

        unknown = [dict(a) for a in answers]
        unknown[0]["question_id"] = "clip-a:3:bogus"
        r = client.post(url, json={"annotator": "val-1", "answers": unknown})
        assert r.status_code == 422
        assert r.json()["detail"]["error"] == "unknown-question"

        assert client.post(url, json={"annotator": "val-1",
                                      "answers": answers}).status_code == 200

    def test_distinct_validators_excludes_refiners(self, tmp_path, clock):
        store = EventStore(tmp_path / "distinct.ndjson", clock=clock)
        client = TestClient(create_app(store, lease_seconds=1800.0,
                                       distinct_validators=True))
        client.post("/clips", json=register_body("clip-a", clip_a_seeds()))
        for a in ("a1", "a2", "a3"):
            for t in (1, 2, 3):
                task = claim(client, a).json()
                graph = (table3_graph(a) if t == 3
                         else simple_graph("clip-a", t, *(("open", "drawer") if t == 1
                                                          else ("take", "bowl"))))
                client.post(f"/tasks/{task['task_id']}/response",
                            json={"annotator": a, "graph": graph_to_jsonable(graph)})
        assert claim(client, "a1", kind="validation").status_code == 204
        assert claim(client, "val-1", kind="validation").status_code == 200
        store.close()


class TestCorrectionsAndRecollect:
    def test_verbnoun_correction_pauses_the_task(self, client):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        r = client.post("/clips/clip-a/verbnoun-correction",
                        json={"timestep": 1, "verb": "wash", "noun": "plate",
                              "annotator": "a1"})
        assert r.status_code == 200
        assert r.json()["review"] is True
        assert claim(client, "a2").status_code == 204
        view = client.get("/tasks/ref:clip-a:1").json()
        assert view["review"] is True

    def test_correction_rejects_unknown_labels(self, client):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        r = client.post("/clips/clip-a/verbnoun-correction",
                        json={"timestep": 1, "verb": "reticulate", "noun": "bowl",
                              "annotator": "a1"})
        assert r.status_code == 422
        r = client.post("/clips/clip-a/verbnoun-correction",
                        json={"timestep": 9, "verb": "wash", "noun": "plate",
                              "annotator": "a1"})
        assert r.status_code == 422

    def test_recollect_requires_merge(self, client):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        r = client.post("/clips/clip-a/recollect")
        assert r.status_code == 409
        assert r.json()["detail"]["error"] == "not-merged"

    def test_recollect_after_merge_reports_instances(self, client):
        run_clip_a(client)
        r = client.post("/clips/clip-a/recollect")
        assert r.status_code == 200
        graphs = [graph_from_jsonable(g) for g in r.json()["graphs"]]
        assert [g.timestep for g in graphs] == [1, 2, 3]
        stored = client.get("/clips/clip-a/graphs").json()
        assert stored["recollected"] == r.json()["graphs"]

    def test_override_changes_recollect_output(self, client):
        run_clip_a(client)

        def bowl_instances(graphs):
            return {
                g["timestep"]: n["instance_id"]
                for g in graphs for n in g["nodes"] if n.get("noun") == "bowl"
            }

        plain = bowl_instances(client.post("/clips/clip-a/recollect").json()["graphs"])
        assert set(plain) == {2, 3}  # timesteps 2 and 3 both take a bowl
        assert plain[2] == plain[3]  # same class, default linking joins them

        r = client.post("/clips/clip-a/override",
                        json={"splits": [[[2, "obj:0"], [3, "obj:0"]]]})
        assert r.status_code == 200
        redone = bowl_instances(client.post("/clips/clip-a/recollect").json()["graphs"])
        assert redone[2] != redone[3]

    def test_malformed_override_rejected(self, client):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        r = client.post("/clips/clip-a/override", json={"groups": [[[1, "obj:0"]]]})
        assert r.status_code == 422

    def test_frames_endpoint_rejects_unknown_stage(self, client):
        client.post("/clips", json=register_body("clip-a", [simple_graph("clip-a", 1)]))
        assert client.get("/clips/clip-a/frames/mid").status_code == 422
        r = client.get("/clips/clip-a/frames/pnr")
        assert r.status_code == 200
        assert r.json()["frames"][0]["timestep"] == 1

    def test_unknown_clip_is_404_everywhere(self, client):
        for call in (
            lambda: client.get("/clips/nope/graphs"),
            lambda: client.get("/clips/nope/frames/pnr"),
            lambda: client.post("/clips/nope/merge"),
            lambda: client.post("/clips/nope/recollect"),
            lambda: client.post("/clips/nope/override", json={"groups": []}),
            lambda: client.post("/clips/nope/verbnoun-correction",
                                json={"timestep": 1, "verb": "wash",
                                      "noun": "plate", "annotator": "a1"}),
        ):
            assert call().status_code == 404


class TestReplay:
    def test_full_pipeline_replays_byte_identically(self, tmp_path, clock):
        path = tmp_path / "pipeline.ndjson"
        store = EventStore(path, clock=clock)
        client = TestClient(create_app(store, lease_seconds=1800.0))
        run_clip_a(client)
        client.post("/clips/clip-a/recollect")
        live_digest = store.digest()
        live_bytes = store.read(lambda s: s.canonical())
        store.close()

        replayed = replay(path)
        assert replayed.digest() == live_digest
        assert replayed.canonical() == live_bytes

        reopened = EventStore(path, clock=FakeClock())
        assert reopened.digest() == live_digest
        reopened.close()
