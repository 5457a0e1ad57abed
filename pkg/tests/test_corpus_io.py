import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scf_forge import (
    CorpusError,
    LineParseError,
    Sentence,
    SentenceError,
    Token,
    parse_sentence,
    parse_syntex_line,
    read_corpus,
    to_canonical_tsv,
    write_corpus,
)
from scf_forge.corpus import parse_tsv_line

from conftest import PAPER_BLOCK


def test_parse_line_with_governor_and_dependent():
    token = parse_syntex_line("Prep|sur|sur|5|PREP;4|NOMPREP;7")
    assert token.index == 5
    assert token.lemma == "sur"
    assert token.surface == "sur"
    assert token.pos == "Prep"
    assert token.governor == ("PREP", 4)
    assert token.dependents == (("NOMPREP", 7),)


def test_parse_line_with_no_links():
    token = parse_syntex_line("Typo|.|.|10||")
    assert token.index == 10
    assert token.pos == "Typo"
    assert token.governor is None
    assert token.dependents == ()


def test_parse_line_five_fields_empty_tail():
    token = parse_syntex_line("X|a|a|1|")
    assert token.index == 1
    assert token.governor is None
    assert token.dependents == ()


def test_parse_line_five_fields_comma_list_is_dependents():
    token = parse_syntex_line("VCONJS|abattre|abattit|4|SUJ;2,REF;3,PREP;5,PREP;8")
    assert token.governor is None
    assert token.dependents == (("SUJ", 2), ("REF", 3), ("PREP", 5), ("PREP", 8))


@pytest.mark.parametrize("line", [
    "only|three|fields",
    "A|b|c|notanint|",
    "A|b|c|1|BROKEN|",
    "A|b|c|1|REL;x|",
    "A|b|c|1|REL;2|X;y",
])
def test_parse_line_errors(line):
    with pytest.raises(LineParseError):
        parse_syntex_line(line, line_no=7)


def test_parse_line_error_carries_line_number():
    with pytest.raises(LineParseError) as err:
        parse_syntex_line("A|b|c|zz|", line_no=42)
    assert err.value.line_no == 42
    assert "zz" in str(err.value)


def test_paper_sentence_parses_as_rooted_analysis(paper_sentence):
    assert paper_sentence.length == 10
    verb = paper_sentence.token(4)
    assert verb.lemma == "abattre"
    assert verb.governor is None
    assert set(verb.dependents) == {("SUJ", 2), ("REF", 3), ("PREP", 5), ("PREP", 8)}
    # One-sided links are symmetric after normalization.
    assert paper_sentence.token(2).governor == ("SUJ", 4)
    assert ("DET", 1) in paper_sentence.token(2).dependents
    assert paper_sentence.token(9).governor == ("NOMPREP", 8)


def test_singleton_sentence():
    sentence = parse_sentence(["NomFS|x|x|1||"], "s")
    assert sentence.length == 1
    assert sentence.token(1).governor is None


def test_index_gap_rejected():
    lines = ["NomFS|a|a|1||", "NomFS|b|b|3||"]
    with pytest.raises(SentenceError, match="gap"):
        parse_sentence(lines, "s")


def test_duplicate_index_rejected():
    lines = ["NomFS|a|a|1||", "NomFS|b|b|1||"]
    with pytest.raises(SentenceError, match="duplicate"):
        parse_sentence(lines, "s")


def test_dangling_link_rejected():
    with pytest.raises(SentenceError, match="dangling"):
        parse_sentence(["NomFS|a|a|1|REL;9|"], "s")


def test_self_link_rejected():
    with pytest.raises(SentenceError, match="itself"):
        parse_sentence(["NomFS|a|a|1|REL;1|"], "s")


def test_cycle_rejected():
    lines = ["A|a|a|1|R;2|", "B|b|b|2|R;1|"]
    with pytest.raises(SentenceError, match="cycle"):
        parse_sentence(lines, "s")


def test_conflicting_governors_rejected():
    # Tokens 1 and 2 both claim token 3 as a dependent under different relations.
    lines = ["A|a|a|1||R;3", "B|b|b|2||S;3", "C|c|c|3||"]
    with pytest.raises(SentenceError, match="conflicting"):
        parse_sentence(lines, "s")


def test_ambiguous_five_field_single_pair_defaults_to_governor():
    lines = ["NomFS|chat|chat|1|SUJ;2|", "VCONJS|dormir|dort|2|OBJ;3", "NomFS|lit|lit|3||"]
    sentence = parse_sentence(lines, "s")
    # Unresolvable single pair stays a governor link.
    assert sentence.token(2).governor == ("OBJ", 3)


def test_ambiguous_five_field_flips_when_target_claims_this_governor():
    # The verb's 5-field line would make the noun its governor, but the noun
    # already declares the verb as governor: the pair is a dependent list.
    lines = ["NomFS|chat|chat|1|SUJ;2|", "VCONJS|dormir|dort|2|SUJ;1"]
    sentence = parse_sentence(lines, "s")
    assert sentence.token(2).governor is None
    assert sentence.token(2).dependents == (("SUJ", 1),)
    assert sentence.token(1).governor == ("SUJ", 2)


def test_read_corpus_empty_stream():
    reader = read_corpus(io.StringIO(""), fmt="syntex")
    assert list(reader) == []
    assert reader.sentences_read == 0
    assert reader.sentences_skipped == 0
    assert reader.tokens_read == 0


def test_read_corpus_two_blocks():
    text = "NomFS|x|x|1||\n\nNomFS|y|y|1||\n\n"
    reader = read_corpus(io.StringIO(text), fmt="syntex", source_name="mini")
    sentences = list(reader)
    assert [s.id for s in sentences] == ["mini:1", "mini:2"]
    assert reader.sentences_read == 2
    assert reader.tokens_read == 2


def test_read_corpus_skips_bad_sentences():
    good = "NomFS|x|x|1||"
    cyclic = "A|a|a|1|R;2|\nB|b|b|2|R;1|"
    reader = read_corpus(io.StringIO(good + "\n\n" + cyclic + "\n"), fmt="syntex")
    sentences = list(reader)
    assert len(sentences) == 1
    assert reader.sentences_read == 1
    assert reader.sentences_skipped == 1


def test_parsing_is_total_over_blocks():
    blocks = ["NomFS|x|x|1||", "A|a|a|1|R;2|\nB|b|b|2|R;1|", "NomFS|b|b|1||", "bad line"]
    text = "\n\n".join(blocks)
    reader = read_corpus(io.StringIO(text), fmt="syntex")
    list(reader)
    assert reader.sentences_read + reader.sentences_skipped == len(blocks)


def test_unknown_format_rejected():
    with pytest.raises(CorpusError):
        read_corpus(io.StringIO(""), fmt="conllu")


def test_tsv_line_parses():
    token = parse_tsv_line("2\tSahel\tsahel\tNomMS\t1\tNOMPREP")
    assert token.governor == ("NOMPREP", 1)
    token = parse_tsv_line("1\tx\tx\tNomFS\t_\t_")
    assert token.governor is None


def test_tsv_line_rejects_half_empty_governor():
    with pytest.raises(LineParseError):
        parse_tsv_line("1\tx\tx\tNomFS\t_\tSUJ")


def test_round_trip_paper_sentence(paper_sentence):
    text = to_canonical_tsv(paper_sentence)
    again = parse_sentence(text.splitlines(), paper_sentence.id, fmt="tsv")
    assert again.tokens == paper_sentence.tokens


def test_write_corpus_round_trip(paper_sentence):
    out = io.StringIO()
    write_corpus([paper_sentence, paper_sentence], out)
    reader = read_corpus(io.StringIO(out.getvalue()), fmt="tsv", source_name="x")
    sentences = list(reader)
    assert len(sentences) == 2
    assert all(s.tokens == paper_sentence.tokens for s in sentences)


@st.composite
def random_sentences(draw):
    n = draw(st.integers(min_value=1, max_value=12))
    # Governor indices drawn against a random topological rank keep the graph acyclic.
    rank = draw(st.permutations(list(range(1, n + 1))))
    tokens = []
    for i in range(1, n + 1):
        higher = [j for j in range(1, n + 1) if rank[j - 1] < rank[i - 1]]
        gov = draw(st.sampled_from(higher + [None] * 3)) if higher else None
        rel = draw(st.sampled_from(["SUJ", "OBJ", "PREP", "DET", "MOD"]))
        tokens.append((f"w{i}", f"l{i}", "NomFS", gov, rel))
    return tokens


@settings(max_examples=60, deadline=None)
@given(random_sentences())
def test_random_wellformed_sentences_validate_and_round_trip(specs):
    from conftest import make_sentence

    sentence = make_sentence("prop:1", specs)
    # Link consistency: every governor link is mirrored by a dependent link.
    for token in sentence:
        if token.governor is not None:
            rel, gov = token.governor
            assert (rel, token.index) in sentence.token(gov).dependents
    text = to_canonical_tsv(sentence)
    again = parse_sentence(text.splitlines(), "prop:1", fmt="tsv")
    assert again.tokens == sentence.tokens
