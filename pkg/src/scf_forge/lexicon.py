"""Acquired lexicons, their on-disk form, and the human decision loop.

A store directory holds the pristine output of the last acquisition run
(``lexicon.tsv``), an append-only decision log (``decisions.log``), and a
small ``meta.json``.  Human decisions are never written into the pristine
lexicon; the *effective* lexicon is recomputed by replaying the log over
it, which is what makes re-acquisition safe: a fresh run overwrites the
pristine file and the replay re-imposes every human verdict.

Statuses move only forward: ``auto-*`` -> ``pending`` -> ``human-*``.
Within the human stage the latest decision wins.
"""

import fcntl
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .frames import Scf

logger = logging.getLogger(__name__)

FORMAT_VERSION = "v1"
HEADER_PREFIX = "#scf-forge"

AUTO_ACCEPTED = "auto-accepted"
AUTO_REJECTED = "auto-rejected"
PENDING = "pending"
HUMAN_ACCEPTED = "human-accepted"
HUMAN_REJECTED = "human-rejected"
HUMAN_EDITED = "human-edited"

STATUSES = (AUTO_ACCEPTED, AUTO_REJECTED, PENDING, HUMAN_ACCEPTED, HUMAN_REJECTED, HUMAN_EDITED)
HUMAN_STATUSES = (HUMAN_ACCEPTED, HUMAN_REJECTED, HUMAN_EDITED)
# Entries that count as part of the acquired resource.
ACCEPTED_STATUSES = (AUTO_ACCEPTED, HUMAN_ACCEPTED, HUMAN_EDITED)
# Entries a reviewer still has to look at.
REVIEWABLE_STATUSES = (AUTO_ACCEPTED, AUTO_REJECTED, PENDING)

_STATUS_RANK = {AUTO_ACCEPTED: 0, AUTO_REJECTED: 0, PENDING: 1,
                HUMAN_ACCEPTED: 2, HUMAN_REJECTED: 2, HUMAN_EDITED: 2}

VERDICT_ACCEPT = "accept"
VERDICT_REJECT = "reject"
VERDICT_EDIT = "edit"
VERDICTS = (VERDICT_ACCEPT, VERDICT_REJECT, VERDICT_EDIT)


class StoreError(ValueError):
    """Store-level failure (bad format, unknown entry, bad verdict)."""


class FormatError(StoreError):
    """A lexicon file does not match the expected format."""


class MigrationError(FormatError):
    """A lexicon file was written by an incompatible format version."""


class UnknownEntryError(StoreError):
    """A decision referenced an entry id that is not in the lexicon."""


def entry_id(verb_key: str, scf: str, mode: str) -> str:
    """Stable content hash identifying an entry across acquisition runs."""
    blob = "\x1f".join((verb_key, scf, mode)).encode("utf-8")
    return hashlib.sha1(blob).hexdigest()[:12]


@dataclass
class LexiconEntry:
    """One (verb, frame) row of an acquired lexicon."""

    verb_key: str
    scf: str
    raw_count: int
    weighted_count: float
    rel_freq: float
    confidence: float
    status: str
    mode: str
    evidence: Tuple[str, ...] = ()
    mwe_flags: Tuple[str, ...] = ()
    origin: str = ""

    @property
    def id(self) -> str:
        return entry_id(self.verb_key, self.scf, self.mode)

    @property
    def mean_reliability(self) -> float:
        return self.weighted_count / self.raw_count if self.raw_count > 0 else 0.0


@dataclass
class Lexicon:
    """An acquired lexicon plus the config fingerprint that produced it."""

    mode: str
    fingerprint: str
    entries: List[LexiconEntry] = field(default_factory=list)
    version: int = 1

    def sort(self) -> None:
        self.entries.sort(key=lambda e: (e.verb_key, e.scf))

    def by_id(self) -> Dict[str, LexiconEntry]:
        return {entry.id: entry for entry in self.entries}

    def verbs(self) -> List[str]:
        return sorted({entry.verb_key for entry in self.entries})

    def entries_for(self, verb_key: str) -> List[LexiconEntry]:
        return [entry for entry in self.entries if entry.verb_key == verb_key]

    def accepted(self) -> List[LexiconEntry]:
        return [entry for entry in self.entries if entry.status in ACCEPTED_STATUSES]


def _fmt_float(value: float) -> str:
    return repr(float(value))


def _fmt_list(items: Sequence[str], sep: str) -> str:
    return sep.join(items) if items else "_"


def _parse_list(text: str, sep: str) -> Tuple[str, ...]:
    return () if text == "_" else tuple(text.split(sep))


def save_lexicon(lexicon: Lexicon, path: Union[str, Path]) -> None:
    """Write a lexicon file: header, meta line, then sorted entry records."""
    lexicon.sort()
    lines = [f"{HEADER_PREFIX} {FORMAT_VERSION} {lexicon.fingerprint}",
             f"#meta version={lexicon.version} mode={lexicon.mode}"]
    for e in lexicon.entries:
        lines.append("\t".join([
            e.verb_key, e.scf, str(e.raw_count), _fmt_float(e.weighted_count),
            _fmt_float(e.rel_freq), _fmt_float(e.confidence), e.status, e.mode,
            _fmt_list(e.evidence, ","), _fmt_list(e.mwe_flags, ";"), e.origin or "_",
        ]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_lexicon(path: Union[str, Path]) -> Lexicon:
    """Read a lexicon file back; strict about header, statuses, and columns."""
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise FormatError(f"{path}: missing header")
    head = lines[0].split(" ")
    if head[0] != HEADER_PREFIX or len(head) != 3:
        raise FormatError(f"{path}: missing header (expected '{HEADER_PREFIX} {FORMAT_VERSION} <fingerprint>')")
    if head[1] != FORMAT_VERSION:
        raise MigrationError(f"{path}: unsupported format version {head[1]!r}; this build reads {FORMAT_VERSION}")
    fingerprint = head[2]
    version = 1
    mode = ""
    body_start = 1
    for i, line in enumerate(lines[1:], start=1):
        if not line.startswith("#meta "):
            body_start = i
            break
        body_start = i + 1
        for item in line[len("#meta "):].split(" "):
            key, _, value = item.partition("=")
            if key == "version":
                version = int(value)
            elif key == "mode":
                mode = value
    entries = []
    for line_no, line in enumerate(lines[body_start:], start=body_start + 1):
        if not line.strip():
            continue
        cols = line.split("\t")
        if len(cols) != 11:
            raise FormatError(f"{path}:{line_no}: expected 11 columns, got {len(cols)}")
        status = cols[6]
        if status not in STATUSES:
            raise FormatError(f"{path}:{line_no}: unknown status token {status!r}")
        entries.append(LexiconEntry(
            verb_key=cols[0], scf=cols[1], raw_count=int(cols[2]),
            weighted_count=float(cols[3]), rel_freq=float(cols[4]), confidence=float(cols[5]),
            status=status, mode=cols[7], evidence=_parse_list(cols[8], ","),
            mwe_flags=_parse_list(cols[9], ";"), origin="" if cols[10] == "_" else cols[10],
        ))
    return Lexicon(mode=mode, fingerprint=fingerprint, entries=entries, version=version)


def export_lexicon(lexicon: Lexicon) -> Iterable[str]:
    """The 8-column interchange export (no evidence columns)."""
    for e in sorted(lexicon.entries, key=lambda e: (e.verb_key, e.scf)):
        yield "\t".join([e.verb_key, e.scf, str(e.raw_count), _fmt_float(e.weighted_count),
                         _fmt_float(e.rel_freq), _fmt_float(e.confidence), e.status, e.mode])


@dataclass(frozen=True)
class DecisionRecord:
    """One human verdict on a lexicon entry (append-only log line)."""

    entry_id: str
    verdict: str
    verb_key: str = ""
    scf: str = ""
    replacement: str = ""
    actor: str = ""
    timestamp: str = ""
    note: str = ""
    client_token: str = ""

    def to_line(self) -> str:
        def clean(text: str) -> str:
            return text.replace("\t", " ").replace("\n", " ") or "_"
        return "\t".join([
            clean(self.entry_id), clean(self.verdict), clean(self.verb_key), clean(self.scf),
            clean(self.replacement), clean(self.actor), clean(self.timestamp),
            clean(self.note), clean(self.client_token),
        ])

    @classmethod
    def from_line(cls, line: str) -> "DecisionRecord":
        cols = line.rstrip("\n").split("\t")
        if len(cols) != 9:
            raise FormatError(f"decision record has {len(cols)} columns, expected 9")
        vals = [("" if c == "_" else c) for c in cols]
        return cls(entry_id=vals[0], verdict=vals[1], verb_key=vals[2], scf=vals[3],
                   replacement=vals[4], actor=vals[5], timestamp=vals[6], note=vals[7],
                   client_token=vals[8])


def _now_rfc3339() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _recompute_shares(entries: List[LexiconEntry]) -> None:
    """Renormalize rel_freq and confidence per verb, excluding suppressed rows."""
    from .evaluation import confidence as confidence_score  # local import avoids a cycle

    by_verb: Dict[str, List[LexiconEntry]] = {}
    for entry in entries:
        by_verb.setdefault(entry.verb_key, []).append(entry)
    for verb_entries in by_verb.values():
        live = [e for e in verb_entries if e.status != HUMAN_REJECTED]
        total = sum(e.weighted_count for e in live)
        for e in verb_entries:
            if e.status == HUMAN_REJECTED or total <= 0:
                e.rel_freq = 0.0
            else:
                e.rel_freq = e.weighted_count / total
            e.confidence = confidence_score(e.raw_count, e.rel_freq, e.mean_reliability)


def apply_overrides(lexicon: Lexicon, records: Sequence[DecisionRecord]) -> Lexicon:
    """Replay a decision log over a (pristine) lexicon.

    Pure and idempotent: the latest record per entry wins, human-rejected
    rows are kept but zeroed out of the per-verb shares, edits move the
    original row's counts onto the replacement frame, and acceptances
    survive even when re-acquisition no longer produces the frame.
    """
    entries: Dict[str, LexiconEntry] = {}
    for entry in lexicon.entries:
        entries[entry.id] = replace(entry)

    latest: Dict[str, DecisionRecord] = {}
    for record in records:
        latest[record.entry_id] = record

    for record in records:
        if latest[record.entry_id] is not record:
            continue
        entry = entries.get(record.entry_id)
        if record.verdict == VERDICT_ACCEPT:
            if entry is None:
                entry = LexiconEntry(record.verb_key, record.scf, 0, 0.0, 0.0, 0.0,
                                     HUMAN_ACCEPTED, lexicon.mode)
                entries[entry.id] = entry
            else:
                entry.status = HUMAN_ACCEPTED
        elif record.verdict == VERDICT_REJECT:
            if entry is not None:
                entry.status = HUMAN_REJECTED
        elif record.verdict == VERDICT_EDIT:
            if not record.replacement:
                raise StoreError("edit decision is missing its replacement frame")
            rep_scf = Scf.from_string(record.replacement).string_form
            rep_id = entry_id(record.verb_key, rep_scf, lexicon.mode)
            rep = entries.get(rep_id)
            if rep is None:
                rep = LexiconEntry(record.verb_key, rep_scf, 0, 0.0, 0.0, 0.0,
                                   HUMAN_EDITED, lexicon.mode, origin=record.entry_id)
                entries[rep_id] = rep
            else:
                rep.status = HUMAN_EDITED
                rep.origin = record.entry_id
            if entry is not None:
                # Move the counts; the original stays as a zeroed tombstone so
                # replaying the log over its own output changes nothing.
                rep.raw_count += entry.raw_count
                rep.weighted_count += entry.weighted_count
                rep.evidence = tuple(dict.fromkeys(rep.evidence + entry.evidence))[:20]
                entry.raw_count = 0
                entry.weighted_count = 0.0
                entry.status = HUMAN_REJECTED
        else:
            raise StoreError(f"unknown verdict {record.verdict!r}")

    merged = sorted(entries.values(), key=lambda e: (e.verb_key, e.scf))
    _recompute_shares(merged)
    return Lexicon(mode=lexicon.mode, fingerprint=lexicon.fingerprint,
                   entries=merged, version=lexicon.version)


class LexiconStore:
    """File-backed store: pristine lexicon + decision log + metadata.

    Single-writer by design; the decision log is appended under an
    exclusive advisory lock and flushed per record.
    """

    LEXICON_FILE = "lexicon.tsv"
    DECISIONS_FILE = "decisions.log"
    META_FILE = "meta.json"

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.lexicon_path = self.root / self.LEXICON_FILE
        self.decisions_path = self.root / self.DECISIONS_FILE
        self.meta_path = self.root / self.META_FILE

    def exists(self) -> bool:
        return self.lexicon_path.exists()

    def base_lexicon(self) -> Lexicon:
        return load_lexicon(self.lexicon_path)

    def effective_lexicon(self) -> Lexicon:
        return apply_overrides(self.base_lexicon(), self.decisions())

    def save_base(self, lexicon: Lexicon, bump_version: bool = False) -> Lexicon:
        self.root.mkdir(parents=True, exist_ok=True)
        if bump_version and self.exists():
            lexicon.version = self.base_lexicon().version + 1
        save_lexicon(lexicon, self.lexicon_path)
        return lexicon

    def meta(self) -> Dict:
        if self.meta_path.exists():
            return json.loads(self.meta_path.read_text(encoding="utf-8"))
        return {}

    def write_meta(self, meta: Dict) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                  encoding="utf-8")

    def decisions(self) -> List[DecisionRecord]:
        if not self.decisions_path.exists():
            return []
        records = []
        with open(self.decisions_path, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    records.append(DecisionRecord.from_line(line))
        return records

    def append_decision(self, record: DecisionRecord) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        with open(self.decisions_path, "a", encoding="utf-8") as handle:
            fcntl.flock(handle.fileno(), fcntl.LOCK_EX)
            try:
                handle.write(record.to_line() + "\n")
                handle.flush()
                os.fsync(handle.fileno())
            finally:
                fcntl.flock(handle.fileno(), fcntl.LOCK_UN)

    def record_decision(self, entry_id_: str, verdict: str, replacement: str = "",
                        actor: str = "", note: str = "",
                        client_token: str = "") -> LexiconEntry:
        """Validate, log, and apply one decision; returns the updated entry.

        With a ``client_token`` the call is idempotent: a token already in
        the log short-circuits to the current state of the entry.
        """
        if verdict not in VERDICTS:
            raise StoreError(f"unknown verdict {verdict!r} (expected one of {VERDICTS})")
        existing = self.decisions()
        if client_token:
            for record in existing:
                if record.client_token == client_token:
                    return self._entry_after(record)
        base = self.base_lexicon()
        entry = apply_overrides(base, existing).by_id().get(entry_id_)
        if entry is None:
            raise UnknownEntryError(f"unknown entry id {entry_id_!r}")
        if verdict == VERDICT_EDIT:
            if not replacement:
                raise StoreError("edit verdict requires a replacement frame")
            replacement = Scf.from_string(replacement).string_form
        record = DecisionRecord(entry_id=entry_id_, verdict=verdict,
                                verb_key=entry.verb_key, scf=entry.scf,
                                replacement=replacement, actor=actor,
                                timestamp=_now_rfc3339(), note=note,
                                client_token=client_token)
        self.append_decision(record)
        return self._entry_after(record)

    def _entry_after(self, record: DecisionRecord) -> LexiconEntry:
        effective = self.effective_lexicon().by_id()
        if record.verdict == VERDICT_EDIT and record.replacement:
            rep_id = entry_id(record.verb_key, record.replacement, self.base_lexicon().mode)
            if rep_id in effective:
                return effective[rep_id]
        updated = effective.get(record.entry_id)
        if updated is None:
            raise UnknownEntryError(f"entry {record.entry_id!r} vanished while applying a decision")
        return updated
