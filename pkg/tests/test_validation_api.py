import io
import time

import pytest
from fastapi.testclient import TestClient

from scf_forge import (
    AcquisitionConfig,
    ConstraintRanking,
    LexiconStore,
    acquire,
    read_corpus,
    write_corpus,
)
from scf_forge.server import create_app

from conftest import PAPER_BLOCK


@pytest.fixture()
def toy_store(tmp_path, toy_sentences):
    """A store acquired from the toy corpus, with the corpus on disk."""
    corpus_path = tmp_path / "corpus.tsv"
    with open(corpus_path, "w", encoding="utf-8") as handle:
        write_corpus(toy_sentences, handle)
    config = AcquisitionConfig(mode="ot", min_verb_occurrences=1,
                               ranking=ConstraintRanking(tau=0.05))
    reader = read_corpus(corpus_path, "tsv", source_name="corpus.tsv")
    result = acquire(reader, config)
    store = LexiconStore(tmp_path / "store")
    store.save_base(result.lexicon)
    store.write_meta({
        "corpus_path": str(corpus_path),
        "corpus_format": "tsv",
        "config": config.semantic_dict(),
    })
    return store


@pytest.fixture()
def client(toy_store):
    app = create_app(toy_store)
    return TestClient(app)


def test_health(client, toy_store):
    response = client.get("/api/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["store_version"] == 1
    assert body["mode"] == "ot"
    assert body["corpus_fingerprint"]


def test_verbs_listing(client):
    response = client.get("/api/verbs")
    assert response.status_code == 200
    verbs = response.json()
    keys = {item["verb_key"] for item in verbs}
    assert "se|abattre" in keys
    abattre = next(item for item in verbs if item["verb_key"] == "se|abattre")
    assert abattre["display"] == "s'abattre"
    assert abattre["pending_count"] >= 1
    pendings = [item["pending_count"] for item in verbs]
    assert pendings == sorted(pendings, reverse=True)


def test_queue_sorted_by_confidence(client):
    response = client.get("/api/queue")
    assert response.status_code == 200
    items = response.json()
    assert items, "expected reviewable items on a fresh store"
    confidences = [item["entry"]["confidence"] for item in items]
    assert confidences == sorted(confidences)


def test_queue_pagination_no_repeats(client):
    first = client.get("/api/queue", params={"limit": 1}).json()
    assert len(first) == 1
    second = client.get("/api/queue", params={"limit": 1,
                                              "cursor": first[0]["cursor"]}).json()
    assert len(second) == 1
    assert second[0]["entry"]["id"] != first[0]["entry"]["id"]


def test_queue_empty_when_filtering_unknown_verb(client):
    items = client.get("/api/queue", params={"verb": "inexistant"}).json()
    assert items == []


def test_queue_rejects_bad_status(client):
    response = client.get("/api/queue", params={"status": "bogus"})
    assert response.status_code == 400


def test_queue_items_carry_evidence_and_tableau(client):
    items = client.get("/api/queue", params={"verb": "se|abattre"}).json()
    assert items
    item = items[0]
    assert item["entry"]["scf"] == "SP[sur+SN]"
    assert item["evidence"], "expected rendered evidence sentences"
    evidence = item["evidence"][0]
    roles = {tok["role"] for tok in evidence["tokens"]}
    assert "verb" in roles and "slot" in roles
    tableau = item["tableau"]
    assert tableau is not None
    assert tableau["constraints"] == list(ConstraintRanking().order)
    credited = [row for row in tableau["rows"] if row["credited"]]
    assert len(credited) == 1
    assert credited[0]["scf"] == "SP[sur+SN]"


def test_decision_roundtrip(client):
    item = client.get("/api/queue", params={"verb": "se|abattre"}).json()[0]
    entry_id = item["entry"]["id"]
    response = client.post(f"/api/entries/{entry_id}/decision",
                           json={"verdict": "accept", "note": "looks right"})
    assert response.status_code == 200
    assert response.json()["status"] == "human-accepted"
    # The entry left the review queue.
    remaining = {i["entry"]["id"] for i in client.get("/api/queue").json()}
    assert entry_id not in remaining


def test_decision_unknown_entry_404(client):
    response = client.post("/api/entries/ffffffffffff/decision",
                           json={"verdict": "accept"})
    assert response.status_code == 404


def test_edit_without_replacement_409(client):
    item = client.get("/api/queue").json()[0]
    response = client.post(f"/api/entries/{item['entry']['id']}/decision",
                           json={"verdict": "edit"})
    assert response.status_code == 409


def test_decision_idempotent_with_client_token(client, toy_store):
    item = client.get("/api/queue").json()[0]
    entry_id = item["entry"]["id"]
    for _ in range(3):
        response = client.post(f"/api/entries/{entry_id}/decision",
                               json={"verdict": "reject", "client_token": "tok-9"})
        assert response.status_code == 200
    assert len(toy_store.decisions()) == 1


def test_decisions_survive_restart(toy_store):
    client_a = TestClient(create_app(toy_store))
    item = client_a.get("/api/queue").json()[0]
    entry_id = item["entry"]["id"]
    client_a.post(f"/api/entries/{entry_id}/decision", json={"verdict": "accept"})
    # A fresh app over the same store sees the decision.
    client_b = TestClient(create_app(toy_store))
    entry = client_b.get(f"/api/entries/{entry_id}").json()
    assert entry["status"] == "human-accepted"


def wait_for_job(client, job_id, timeout=30.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        body = client.get(f"/api/jobs/{job_id}").json()
        if body["done"]:
            return body
        time.sleep(0.05)
    raise AssertionError("job did not finish in time")


def test_reacquire_lifecycle(client):
    response = client.post("/api/reacquire", json={"tau": 0.04})
    assert response.status_code == 202
    job_id = response.json()["job_id"]
    body = wait_for_job(client, job_id)
    assert body["error"] is None
    assert body["phase"] == "done"
    assert body["store_version"] == 2
    health = client.get("/api/health").json()
    assert health["store_version"] == 2


def test_reacquire_preserves_human_statuses(client):
    item = client.get("/api/queue", params={"verb": "se|abattre"}).json()[0]
    entry_id = item["entry"]["id"]
    client.post(f"/api/entries/{entry_id}/decision", json={"verdict": "accept"})
    response = client.post("/api/reacquire", json={})
    wait_for_job(client, response.json()["job_id"])
    entry = client.get(f"/api/entries/{entry_id}").json()
    assert entry["status"] == "human-accepted"


def test_reacquire_busy_returns_423(toy_store):
    app = create_app(toy_store)
    service = app.state.service
    with TestClient(app) as client:
        with service._job_lock:
            service._job = {"id": "job-0", "phase": "extracting", "counters": {},
                            "done": False, "error": None, "store_version": None}
        response = client.post("/api/reacquire", json={})
        assert response.status_code == 423
        service._job["done"] = True


def test_reacquire_without_corpus_409(tmp_path, toy_store):
    store = LexiconStore(tmp_path / "no-corpus-store")
    store.save_base(toy_store.base_lexicon())
    client = TestClient(create_app(store))
    response = client.post("/api/reacquire", json={})
    assert response.status_code == 409


def test_unknown_job_404(client):
    assert client.get("/api/jobs/job-999").status_code == 404


def test_api_state_only_in_store(toy_store, tmp_path):
    """Syntex corpora work too: build a store from the paper block."""
    corpus_path = tmp_path / "paper.syntex"
    corpus_path.write_text("\n".join(PAPER_BLOCK) + "\n", encoding="utf-8")
    config = AcquisitionConfig(mode="baseline", min_verb_occurrences=1,
                               ranking=ConstraintRanking(tau=0.05))
    result = acquire(read_corpus(corpus_path, "syntex"), config)
    store = LexiconStore(tmp_path / "paper-store")
    store.save_base(result.lexicon)
    store.write_meta({"corpus_path": str(corpus_path), "corpus_format": "syntex",
                      "config": config.semantic_dict()})
    client = TestClient(create_app(store))
    verbs = client.get("/api/verbs").json()
    assert verbs[0]["verb_key"] == "se|abattre"
