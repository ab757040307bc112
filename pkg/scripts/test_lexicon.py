"""Tests for PMI seed words and majority-seed labelling."""

import math
import sys
from pathlib import Path

import pytest

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from app.errors import InputError
from app.fairness.lexicon import (
    ArticleLabel,
    SeedLexicon,
    SeedWord,
    Side,
    build_lexicon,
    count_seed_hits,
    label_article,
    label_corpus,
    read_labels,
    read_lexicon,
    tokenize,
    write_labels,
    write_lexicon,
)
from app.ingestion.corpus import ArticleDoc


def docs(*bodies: str, prefix: str = "d") -> list[ArticleDoc]:
    return [ArticleDoc(article_id=f"{prefix}{i}", body=body) for i, body in enumerate(bodies)]


def lexicon(left: list[str], right: list[str]) -> SeedLexicon:
    return SeedLexicon(
        left=[SeedWord(word=w, pmi=1.0) for w in left],
        right=[SeedWord(word=w, pmi=1.0) for w in right],
        top_n=max(len(left), len(right), 1),
    )


def test_tokenize_keeps_norwegian_letters():
    assert tokenize("Rød, HØYRE og 2024-valget! Æ") == ["rød", "høyre", "og", "valget"]
    assert tokenize("Erna_Solberg") == ["erna", "solberg"]


def test_tokenize_is_deterministic():
    body = "Siv og Erna i Høyre; Rødt og Ap."
    assert tokenize(body) == tokenize(body)


def test_tiny_corpus_pmi_by_hand():
    lex = build_lexicon(docs("rød rød"), docs("høyre"), top_n=5, min_count=1)

    assert [s.word for s in lex.left] == ["rød"]
    assert [s.word for s in lex.right] == ["høyre"]
    assert lex.left[0].pmi == pytest.approx(math.log2(1.5))
    assert lex.right[0].pmi == pytest.approx(math.log2(3))
    assert lex.incomplete


def test_independent_word_never_selected():
    lex = build_lexicon(
        docs("felles venstre felles"), docs("felles felles høyre"), top_n=5, min_count=1
    )

    assert "felles" not in lex.words(Side.LEFT)
    assert "felles" not in lex.words(Side.RIGHT)
    assert lex.words(Side.LEFT) == {"venstre"}
    assert lex.words(Side.RIGHT) == {"høyre"}


def test_min_count_drops_rare_words():
    lex = build_lexicon(docs("rød rød rød sjelden"), docs("høyre høyre høyre"), top_n=5, min_count=3)

    assert lex.words(Side.LEFT) == {"rød"}
    assert "sjelden" not in lex.words(Side.LEFT)


def test_sides_are_disjoint_and_positive():
    left = docs("rød arbeid skatt skatt arbeid rød velferd", "rød velferd skatt")
    right = docs("høyre skatt erna siv marked", "høyre marked erna skatt siv")
    lex = build_lexicon(left, right, top_n=10, min_count=1)

    assert not lex.words(Side.LEFT) & lex.words(Side.RIGHT)
    assert all(s.pmi > 0 for s in lex.left + lex.right)
    pmis = [s.pmi for s in lex.left]
    assert pmis == sorted(pmis, reverse=True)


def test_swapping_corpora_swaps_sides():
    left = docs("rød arbeid velferd rød", "arbeid skatt")
    right = docs("høyre erna siv skatt", "høyre marked")
    forward = build_lexicon(left, right, top_n=10, min_count=1)
    backward = build_lexicon(right, left, top_n=10, min_count=1)

    assert forward.left == backward.right
    assert forward.right == backward.left


def test_one_class_word_has_positive_pmi():
    lex = build_lexicon(docs("unik felles"), docs("felles annen"), top_n=5, min_count=1)
    assert "unik" in lex.words(Side.LEFT)


def test_top_n_truncates():
    lex = build_lexicon(docs("aa bb cc dd"), docs("ee ff"), top_n=2, min_count=1)

    assert len(lex.left) == 2
    assert [s.word for s in lex.left] == ["aa", "bb"]
    assert not lex.incomplete


def test_empty_training_corpus_rejected():
    with pytest.raises(InputError):
        build_lexicon([], docs("høyre"))


def test_label_majority():
    lex = lexicon(["rød"], ["høyre"])
    label = label_article(ArticleDoc(article_id="a", body="rød rød rød høyre"), lex)

    assert label.label is Side.LEFT
    assert (label.left_hits, label.right_hits) == (3, 1)


def test_label_without_seeds_is_neutral():
    label = label_article(ArticleDoc(article_id="a", body="været er fint"), lexicon(["rød"], ["høyre"]))
    assert label.label is Side.NEUTRAL
    assert (label.left_hits, label.right_hits) == (0, 0)


def test_label_tie_is_neutral():
    label = label_article(ArticleDoc(article_id="a", body="rød høyre rød høyre"), lexicon(["rød"], ["høyre"]))
    assert label.label is Side.NEUTRAL
    assert (label.left_hits, label.right_hits) == (2, 2)


def test_count_seed_hits_is_additive():
    lex = lexicon(["rød"], ["høyre"])
    pair = docs("rød rød rød høyre", "høyre høyre")

    assert count_seed_hits([], lex) == (0, 0)
    assert count_seed_hits(pair, lex) == (3, 3)
    for doc in pair:
        label = label_article(doc, lex)
        assert count_seed_hits([doc], lex) == (label.left_hits, label.right_hits)


def test_lexicon_and_labels_files_round_trip(tmp_path):
    lex = build_lexicon(docs("rød rød"), docs("høyre"), top_n=5, min_count=1)
    write_lexicon(lex, tmp_path / "lexicon.json")
    assert read_lexicon(tmp_path / "lexicon.json") == lex

    labels = label_corpus(docs("rød", "høyre høyre", "nøytral", prefix="a"), lex)
    write_labels(labels, tmp_path / "labels.csv")

    assert read_labels(tmp_path / "labels.csv") == labels
    assert [label.label for label in labels] == [Side.LEFT, Side.RIGHT, Side.NEUTRAL]
    assert (tmp_path / "labels.csv").read_text().splitlines()[0] == "article_id,label,left_hits,right_hits"
    assert isinstance(labels[0], ArticleLabel)
