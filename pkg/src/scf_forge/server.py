"""HTTP review service for the acquired lexicon.

Serves confidence-sorted review queues with evidence sentences and the
candidate tableau behind each entry, records accept/reject/edit verdicts
through the store, and runs re-acquisition as a single background job.
All authoritative state lives in the store directory; the process can be
restarted at any time without losing a decision.
"""

import hashlib
import logging
import threading
from pathlib import Path
from typing import Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .constraints import ConstraintRanking, DEFAULT_RANKING_ORDER, build_statistics
from .corpus import read_corpus
from .evaluation import (
    MODE_BASELINE,
    AcquisitionConfig,
    acquire,
    build_tableau,
)
from .frames import build_scf, tally
from .lexicon import (
    REVIEWABLE_STATUSES,
    STATUSES,
    LexiconEntry,
    LexiconStore,
    StoreError,
    UnknownEntryError,
)
from .patterns import PatternExtractor, display_verb, sp_slot_token_indices

logger = logging.getLogger(__name__)

DEFAULT_PORT = 7474
QUEUE_STATUS_ALIAS = "pending"  # anything not yet human-decided
EVIDENCE_LIMIT = 5


def config_from_dict(data: Dict) -> AcquisitionConfig:
    """Rebuild an AcquisitionConfig from its semantic dictionary."""
    ranking = ConstraintRanking(
        order=tuple(data.get("ranking", DEFAULT_RANKING_ORDER)),
        tau=data.get("tau", 0.01),
        delta=data.get("delta", 0.6),
        kappa=data.get("kappa", 0.8),
    )
    return AcquisitionConfig(
        mode=data.get("mode", MODE_BASELINE),
        ranking=ranking,
        weights=data.get("weights"),
        theta=data.get("theta", 1.0),
        min_verb_occurrences=data.get("min_verb_occurrences", 200),
        gen_cap=data.get("gen_cap", 5),
        reliability_pivot=data.get("reliability_pivot", 15),
        evidence_cap=data.get("evidence_cap", 20),
        seed=data.get("seed", 0),
    )


class DecisionBody(BaseModel):
    verdict: str
    note: str = ""
    replacement: Optional[str] = None
    actor: str = ""
    client_token: str = ""


class ReacquireBody(BaseModel):
    mode: Optional[str] = None
    tau: Optional[float] = None
    delta: Optional[float] = None
    kappa: Optional[float] = None
    theta: Optional[float] = None
    min_verb_occurrences: Optional[int] = None
    ranking: Optional[List[str]] = None
    seed: Optional[int] = None
    client_token: str = ""


class ReviewService:
    """Store-backed state shared by the API endpoints."""

    def __init__(self, store: LexiconStore, corpus_path: Optional[str] = None,
                 corpus_format: str = "tsv"):
        self.store = store
        meta = store.meta()
        self.corpus_path = corpus_path or meta.get("corpus_path")
        self.corpus_format = meta.get("corpus_format", corpus_format) \
            if corpus_path is None else corpus_format
        self._sentences = None
        self._context = None
        self._context_key = None
        self._job_lock = threading.Lock()
        self._job: Optional[Dict] = None
        self._job_tokens: Dict[str, str] = {}
        self._job_counter = 0

    # -- corpus-backed context -------------------------------------------

    def config(self) -> AcquisitionConfig:
        return config_from_dict(self.store.meta().get("config", {}))

    def sentences(self) -> Dict[str, object]:
        if self._sentences is None:
            self._sentences = {}
            if self.corpus_path and Path(self.corpus_path).exists():
                for sentence in read_corpus(self.corpus_path, self.corpus_format):
                    self._sentences[sentence.id] = sentence
        return self._sentences

    def context(self):
        """(occurrences-by-verb, tally, stats) under the stored config."""
        config = self.config()
        key = config.fingerprint()
        if self._context is None or self._context_key != key:
            extractor = PatternExtractor(reliability_pivot=config.reliability_pivot)
            by_verb: Dict[str, list] = {}
            occurrences = []
            for sentence in self.sentences().values():
                for occurrence in extractor.extract(sentence):
                    occurrences.append(occurrence)
                    by_verb.setdefault(occurrence.verb_key, []).append(occurrence)
            full_tally = tally(occurrences, seed=config.seed,
                               evidence_cap=config.evidence_cap)
            stats = build_statistics(occurrences)
            self._context = (by_verb, full_tally, stats)
            self._context_key = key
        return self._context

    def invalidate(self) -> None:
        self._context = None
        self._context_key = None

    def corpus_fingerprint(self) -> Optional[str]:
        if not self.corpus_path or not Path(self.corpus_path).exists():
            return None
        blob = Path(self.corpus_path).read_bytes()
        return hashlib.sha256(blob).hexdigest()[:12]

    # -- rendering --------------------------------------------------------

    def render_evidence(self, entry: LexiconEntry) -> List[Dict]:
        rendered = []
        sentences = self.sentences()
        for sentence_id in entry.evidence[:EVIDENCE_LIMIT]:
            sentence = sentences.get(sentence_id)
            if sentence is None:
                continue
            roles = {}
            extractor = PatternExtractor()
            for occurrence in extractor.extract(sentence):
                if occurrence.verb_key != entry.verb_key:
                    continue
                roles[occurrence.verb_index] = "verb"
                for slot in occurrence.slots:
                    for index in sp_slot_token_indices(slot, sentence):
                        roles[index] = "slot"
                break
            rendered.append({
                "sentence_id": sentence_id,
                "text": " ".join(token.surface for token in sentence),
                "tokens": [{"text": token.surface, "role": roles.get(token.index, "")}
                           for token in sentence],
            })
        return rendered

    def render_tableau(self, entry: LexiconEntry) -> Optional[Dict]:
        by_verb, full_tally, stats = self.context()
        occurrences = by_verb.get(entry.verb_key, [])
        if not occurrences:
            return None
        config = self.config()
        chosen = None
        chosen_tableau = None
        for occurrence in occurrences:
            tableau = build_tableau(occurrence, full_tally, stats, config.ranking,
                                    config.gen_cap)
            if tableau.credited.string_form == entry.scf or \
                    build_scf(occurrence).string_form == entry.scf:
                chosen, chosen_tableau = occurrence, tableau
                break
        if chosen is None:
            chosen = occurrences[0]
            chosen_tableau = build_tableau(chosen, full_tally, stats, config.ranking,
                                           config.gen_cap)
        return {
            "sentence_id": chosen.sentence_id,
            "constraints": list(config.ranking.order),
            "rows": [{
                "scf": row.scf.string_form,
                "marks": list(row.profile.marks),
                "winner": row.winner,
                "credited": row.credited,
            } for row in chosen_tableau.rows],
        }

    # -- jobs --------------------------------------------------------------

    def start_reacquire(self, overrides: ReacquireBody) -> Dict:
        if not self.corpus_path or not Path(self.corpus_path).exists():
            raise HTTPException(status_code=409, detail="no corpus configured for this store")
        token = overrides.client_token
        with self._job_lock:
            if token and token in self._job_tokens:
                return self._job
            if self._job is not None and not self._job["done"]:
                raise HTTPException(status_code=423, detail="a re-acquisition job is already running")
            self._job_counter += 1
            job = {
                "id": f"job-{self._job_counter}",
                "phase": "starting",
                "counters": {},
                "done": False,
                "error": None,
                "store_version": None,
            }
            self._job = job
            if token:
                self._job_tokens[token] = job["id"]
        thread = threading.Thread(target=self._run_job, args=(job, overrides), daemon=True)
        thread.start()
        return job

    def _run_job(self, job: Dict, overrides: ReacquireBody) -> None:
        try:
            meta = self.store.meta()
            merged = dict(meta.get("config", {}))
            for field in ("mode", "tau", "delta", "kappa", "theta",
                          "min_verb_occurrences", "ranking", "seed"):
                value = getattr(overrides, field)
                if value is not None:
                    merged[field] = value
            config = config_from_dict(merged)
            config.validate()
            job["phase"] = "extracting"
            reader = read_corpus(self.corpus_path, self.corpus_format)
            decisions = self.store.decisions()
            result = acquire(reader, config, decisions=decisions)
            job["counters"] = dict(result.summary)
            job["phase"] = "saving"
            saved = self.store.save_base(result.lexicon, bump_version=True)
            meta["config"] = config.semantic_dict()
            self.store.write_meta(meta)
            self.invalidate()
            job["store_version"] = saved.version
            job["phase"] = "done"
        except Exception as exc:  # surfaced through the job endpoint
            logger.exception("re-acquisition failed")
            job["phase"] = "error"
            job["error"] = str(exc)
        finally:
            job["done"] = True

    def job(self, job_id: str) -> Dict:
        if self._job is None or self._job["id"] != job_id:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id}")
        return self._job


def _entry_payload(entry: LexiconEntry) -> Dict:
    return {
        "id": entry.id,
        "verb_key": entry.verb_key,
        "verb_display": display_verb(entry.verb_key),
        "scf": entry.scf,
        "raw_count": entry.raw_count,
        "weighted_count": entry.weighted_count,
        "rel_freq": entry.rel_freq,
        "confidence": entry.confidence,
        "status": entry.status,
        "mode": entry.mode,
        "mwe_flags": list(entry.mwe_flags),
        "origin": entry.origin,
    }


def _queue_sort_key(entry: LexiconEntry):
    return (entry.confidence, -entry.raw_count, entry.id)


def _cursor_of(entry: LexiconEntry) -> str:
    return f"{entry.confidence!r}|{entry.raw_count}|{entry.id}"


def create_app(store: LexiconStore, corpus_path: Optional[str] = None,
               corpus_format: str = "tsv", ui_dir: Optional[str] = None) -> FastAPI:
    service = ReviewService(store, corpus_path, corpus_format)
    app = FastAPI(title="scf-forge review service")
    app.state.service = service

    @app.get("/api/health")
    def health():
        lexicon = store.base_lexicon()
        return {
            "status": "ok",
            "store_version": lexicon.version,
            "mode": lexicon.mode,
            "config_fingerprint": lexicon.fingerprint,
            "corpus_fingerprint": service.corpus_fingerprint(),
        }

    @app.get("/api/verbs")
    def verbs():
        lexicon = store.effective_lexicon()
        by_verb: Dict[str, Dict[str, int]] = {}
        for entry in lexicon.entries:
            counts = by_verb.setdefault(entry.verb_key, {})
            counts[entry.status] = counts.get(entry.status, 0) + 1
        payload = []
        for verb_key in sorted(by_verb):
            counts = by_verb[verb_key]
            pending = sum(n for status, n in counts.items()
                          if status in REVIEWABLE_STATUSES)
            payload.append({
                "verb_key": verb_key,
                "display": display_verb(verb_key),
                "entry_counts": counts,
                "pending_count": pending,
            })
        payload.sort(key=lambda item: (-item["pending_count"], item["verb_key"]))
        return payload

    @app.get("/api/queue")
    def queue(limit: int = 50, status: str = QUEUE_STATUS_ALIAS,
              cursor: Optional[str] = None, verb: Optional[str] = None):
        if status != "all" and status != QUEUE_STATUS_ALIAS and status not in STATUSES:
            raise HTTPException(status_code=400, detail=f"unknown status filter {status!r}")
        lexicon = store.effective_lexicon()
        entries = lexicon.entries
        if verb:
            entries = [e for e in entries if e.verb_key == verb]
        if status == QUEUE_STATUS_ALIAS:
            entries = [e for e in entries if e.status in REVIEWABLE_STATUSES]
        elif status != "all":
            entries = [e for e in entries if e.status == status]
        entries.sort(key=_queue_sort_key)
        if cursor:
            entries = [e for e in entries if _cursor_of(e) > cursor]
        entries = entries[: max(0, limit)]
        items = []
        for entry in entries:
            items.append({
                "entry": _entry_payload(entry),
                "evidence": service.render_evidence(entry),
                "tableau": service.render_tableau(entry),
                "cursor": _cursor_of(entry),
            })
        return items

    @app.get("/api/entries/{entry_id}")
    def get_entry(entry_id: str):
        entry = store.effective_lexicon().by_id().get(entry_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown entry {entry_id}")
        return _entry_payload(entry)

    @app.post("/api/entries/{entry_id}/decision")
    def decide(entry_id: str, body: DecisionBody):
        if body.verdict == "edit" and not body.replacement:
            raise HTTPException(status_code=409, detail="edit requires a replacement frame")
        try:
            updated = store.record_decision(
                entry_id, body.verdict, replacement=body.replacement or "",
                actor=body.actor, note=body.note, client_token=body.client_token)
        except UnknownEntryError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except StoreError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return _entry_payload(updated)

    @app.post("/api/reacquire", status_code=202)
    def reacquire(body: ReacquireBody):
        job = service.start_reacquire(body)
        return {"job_id": job["id"], "phase": job["phase"]}

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        job = service.job(job_id)
        return {
            "id": job["id"],
            "phase": job["phase"],
            "counters": job["counters"],
            "done": job["done"],
            "error": job["error"],
            "store_version": job["store_version"],
        }

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
