import json
import os
import signal
import socket
import subprocess
import sys
import time
import urllib.request

import pytest

from scf_forge import load_lexicon
from scf_forge.cli import main

from conftest import golden_corpus_text, recovery_spec


@pytest.fixture()
def golden_corpus(tmp_path):
    path = tmp_path / "golden.syntex"
    path.write_text(golden_corpus_text(), encoding="utf-8")
    return path


def spec_file(tmp_path, seed=1):
    spec = recovery_spec(seed)
    data = {
        "seed": spec.seed,
        "occurrences_per_verb": 40,
        "padding_min": spec.padding_min,
        "padding_max": spec.padding_max,
        "argument_infinitives": spec.argument_infinitives,
        "verbs": [{"verb_key": v.verb_key, "frames": v.frames} for v in spec.verbs[:4]],
        "adjunct_preps": [{"prep": a.prep, "attach_prob": a.attach_prob,
                           "heads": a.heads} for a in spec.adjunct_preps],
    }
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(data, ensure_ascii=False), encoding="utf-8")
    return path


def test_acquire_golden_pipeline(golden_corpus, tmp_path, capsys):
    out = tmp_path / "lexicon.tsv"
    code = main(["acquire", "--corpus", str(golden_corpus), "--format", "syntex",
                 "--mode", "baseline", "--tau", "0.6", "--min-occ", "1",
                 "--out", str(out)])
    assert code == 0
    lexicon = load_lexicon(out)
    accepted = {(e.verb_key, e.scf) for e in lexicon.entries if e.status == "auto-accepted"}
    assert ("se|abattre", "SP[sur+SN]") in accepted
    assert all(scf != "SP[en+SN]_SP[sur+SN]" for _, scf in accepted)
    err = capsys.readouterr().err
    assert "effective-config" in err
    assert "verbs processed" in err


def test_acquire_is_byte_deterministic(golden_corpus, tmp_path):
    out_a = tmp_path / "a.tsv"
    out_b = tmp_path / "b.tsv"
    argv = ["acquire", "--corpus", str(golden_corpus), "--format", "syntex",
            "--mode", "ot", "--tau", "0.05", "--min-occ", "1"]
    assert main(argv + ["--out", str(out_a)]) == 0
    assert main(argv + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_acquire_missing_corpus_exits_2(tmp_path, capsys):
    code = main(["acquire", "--corpus", str(tmp_path / "nope.syntex"),
                 "--out", str(tmp_path / "x.tsv")])
    assert code == 2
    assert "--corpus" in capsys.readouterr().err


def test_acquire_unknown_ranking_id_exits_2(golden_corpus, tmp_path, capsys):
    code = main(["acquire", "--corpus", str(golden_corpus), "--out", str(tmp_path / "x.tsv"),
                 "--mode", "ot", "--ranking", "FREQ-FLOOR,FAITH-ARG,NOT-REAL"])
    assert code == 2
    assert "NOT-REAL" in capsys.readouterr().err


def test_acquire_empty_corpus_exits_3(tmp_path):
    empty = tmp_path / "empty.syntex"
    empty.write_text("", encoding="utf-8")
    code = main(["acquire", "--corpus", str(empty), "--out", str(tmp_path / "x.tsv"),
                 "--min-occ", "1"])
    assert code == 3


def test_acquire_verbless_corpus_exits_3(tmp_path):
    corpus = tmp_path / "nouns.syntex"
    corpus.write_text("NomFS|x|x|1||\n\nNomFS|y|y|1||\n", encoding="utf-8")
    code = main(["acquire", "--corpus", str(corpus), "--out", str(tmp_path / "x.tsv"),
                 "--min-occ", "1"])
    assert code == 3


def test_acquire_parallel_jobs_match_sequential(golden_corpus, tmp_path):
    out_a = tmp_path / "seq.tsv"
    out_b = tmp_path / "par.tsv"
    argv = ["acquire", "--corpus", str(golden_corpus), "--format", "syntex",
            "--mode", "baseline", "--tau", "0.6", "--min-occ", "1"]
    assert main(argv + ["--out", str(out_a), "--jobs", "1"]) == 0
    assert main(argv + ["--out", str(out_b), "--jobs", "2"]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_acquire_config_file_precedence(golden_corpus, tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"tau": 0.9, "min_occ": 1}), encoding="utf-8")
    out = tmp_path / "lex.tsv"
    code = main(["acquire", "--corpus", str(golden_corpus), "--format", "syntex",
                 "--config", str(config), "--tau", "0.6", "--out", str(out)])
    assert code == 0
    echoed = capsys.readouterr().err.splitlines()[0]
    effective = json.loads(echoed.split(" ", 1)[1])
    assert effective["tau"] == 0.6  # flag beats config file
    assert effective["min_verb_occurrences"] == 1  # config file beats default


def test_acquire_rejects_unknown_config_key(golden_corpus, tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"tua": 0.9}), encoding="utf-8")
    code = main(["acquire", "--corpus", str(golden_corpus), "--config", str(config),
                 "--out", str(tmp_path / "x.tsv")])
    assert code == 2
    assert "tua" in capsys.readouterr().err


def test_acquire_dump_files(golden_corpus, tmp_path):
    out = tmp_path / "lex.tsv"
    tableaux = tmp_path / "tableaux.tsv"
    stats = tmp_path / "dispersion.tsv"
    mwe = tmp_path / "mwe.tsv"
    tally = tmp_path / "tally.tsv"
    code = main(["acquire", "--corpus", str(golden_corpus), "--format", "syntex",
                 "--mode", "ot", "--tau", "0.05", "--min-occ", "1", "--out", str(out),
                 "--dump-tableaux", str(tableaux), "--stats-out", str(stats),
                 "--mwe-out", str(mwe), "--tally-out", str(tally)])
    assert code == 0
    dump = tableaux.read_text(encoding="utf-8").splitlines()
    assert any(line.split("\t")[2] == "SP[sur+SN]" and line.endswith("\t1\t1")
               for line in dump)
    assert any(line.startswith("sur\t") for line in stats.read_text(encoding="utf-8").splitlines())
    tally_lines = tally.read_text(encoding="utf-8").splitlines()
    assert "se|abattre\tSP[sur+SN]\t3\t3.0" in tally_lines
    assert "se|abattre\tSP[en+SN]_SP[sur+SN]\t1\t1.0" in tally_lines


def test_gen_score_compare_round_trip(tmp_path, capsys):
    spec = spec_file(tmp_path)
    corpus = tmp_path / "corpus.tsv"
    gold = tmp_path / "gold.tsv"
    assert main(["gen", "--spec", str(spec), "--out-corpus", str(corpus),
                 "--out-gold", str(gold)]) == 0

    corpus_b = tmp_path / "corpus_b.tsv"
    gold_b = tmp_path / "gold_b.tsv"
    assert main(["gen", "--spec", str(spec), "--out-corpus", str(corpus_b),
                 "--out-gold", str(gold_b)]) == 0
    assert corpus.read_bytes() == corpus_b.read_bytes()
    assert gold.read_bytes() == gold_b.read_bytes()

    acquired = tmp_path / "acquired.tsv"
    assert main(["acquire", "--corpus", str(corpus), "--format", "tsv",
                 "--mode", "baseline", "--tau", "0.05", "--min-occ", "30",
                 "--out", str(acquired)]) == 0
    capsys.readouterr()

    assert main(["score", "--acquired", str(gold), "--gold", str(gold)]) == 0
    out = capsys.readouterr().out
    assert "1.000" in out

    assert main(["compare", "--spec", str(spec), "--modes", "baseline,ot",
                 "--tau", "0.05", "--min-occ", "30"]) == 0
    table = capsys.readouterr().out.strip().splitlines()
    assert len(table) == 3  # header + one row per mode
    assert table[1].startswith("baseline") and table[2].startswith("ot")


def test_gen_bad_spec_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"verbs": [{"verb_key": "v", "frames": {"SN": 0.5}}]}),
                   encoding="utf-8")
    code = main(["gen", "--spec", str(bad), "--out-corpus", str(tmp_path / "c.tsv"),
                 "--out-gold", str(tmp_path / "g.tsv")])
    assert code == 2
    assert "sum" in capsys.readouterr().err


def test_export_columns(golden_corpus, tmp_path, capsys):
    out = tmp_path / "lex.tsv"
    main(["acquire", "--corpus", str(golden_corpus), "--format", "syntex",
          "--mode", "baseline", "--tau", "0.6", "--min-occ", "1", "--out", str(out)])
    capsys.readouterr()
    assert main(["export", "--lexicon", str(out)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines
    assert all(len(line.split("\t")) == 8 for line in lines)


def free_port():
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    return port


def test_serve_port_in_use_exits_4(golden_corpus, tmp_path):
    store_dir = tmp_path / "store"
    main(["acquire", "--corpus", str(golden_corpus), "--format", "syntex",
          "--mode", "baseline", "--tau", "0.6", "--min-occ", "1",
          "--out", str(tmp_path / "l.tsv"), "--store", str(store_dir)])
    holder = socket.socket()
    holder.bind(("127.0.0.1", 0))
    port = holder.getsockname()[1]
    try:
        code = main(["serve", "--store", str(store_dir), "--port", str(port)])
        assert code == 4
    finally:
        holder.close()


def test_serve_requires_existing_store(tmp_path):
    assert main(["serve", "--store", str(tmp_path / "ghost"), "--port", str(free_port())]) == 2


def _wait_health(port, deadline=15.0):
    end = time.monotonic() + deadline
    url = f"http://127.0.0.1:{port}/api/health"
    while time.monotonic() < end:
        try:
            with urllib.request.urlopen(url, timeout=1) as response:
                return json.loads(response.read())
        except OSError:
            time.sleep(0.1)
    raise AssertionError("server did not come up")


def _post(port, path, body):
    data = json.dumps(body).encode("utf-8")
    request = urllib.request.Request(f"http://127.0.0.1:{port}{path}", data=data,
                                     headers={"Content-Type": "application/json"})
    with urllib.request.urlopen(request, timeout=5) as response:
        return json.loads(response.read())


def _get(port, path):
    with urllib.request.urlopen(f"http://127.0.0.1:{port}{path}", timeout=5) as response:
        return json.loads(response.read())


def test_serve_decisions_survive_restart(golden_corpus, tmp_path):
    store_dir = tmp_path / "store"
    main(["acquire", "--corpus", str(golden_corpus), "--format", "syntex",
          "--mode", "baseline", "--tau", "0.6", "--min-occ", "1",
          "--out", str(tmp_path / "l.tsv"), "--store", str(store_dir)])
    port = free_port()

    def start():
        return subprocess.Popen(
            [sys.executable, "-m", "scf_forge.cli", "serve", "--store", str(store_dir),
             "--port", str(port)],
            stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)

    proc = start()
    try:
        _wait_health(port)
        queue = _get(port, "/api/queue")
        entry_id = queue[0]["entry"]["id"]
        updated = _post(port, f"/api/entries/{entry_id}/decision", {"verdict": "accept"})
        assert updated["status"] == "human-accepted"
    finally:
        proc.send_signal(signal.SIGINT)
        proc.wait(timeout=10)

    proc = start()
    try:
        _wait_health(port)
        entry = _get(port, f"/api/entries/{entry_id}")
        assert entry["status"] == "human-accepted"
    finally:
        proc.send_signal(signal.SIGINT)
        proc.wait(timeout=10)
