import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import write_jsonl
from eventir.corpus import (
    load_corpus,
    load_entity_sidecar,
    load_ground_truth,
    load_queries,
    save_corpus,
)
from eventir.entities import EntityType
from eventir.errors import (
    DanglingReferenceError,
    DuplicateIdError,
    EmptyRelevantSetError,
    MalformedRecordError,
)


def _article(aid, images=(), **extra):
    return {"id": aid, "title": f"title {aid}", "body": f"body {aid}", "image_ids": list(images), **extra}


def test_load_small_corpus(tmp_path):
    arts = write_jsonl(tmp_path / "a.jsonl", [_article("A1", ["i1"]), _article("A2")])
    imgs = write_jsonl(tmp_path / "i.jsonl", [{"id": "i1", "article_ids": ["A1"]}])
    corpus = load_corpus(arts, imgs)
    assert len(corpus.articles) == 2
    assert len(corpus.images) == 1
    assert corpus.images["i1"].article_ids == ("A1",)


def test_dangling_reference_names_missing_article(tmp_path):
    arts = write_jsonl(tmp_path / "a.jsonl", [_article("A1")])
    imgs = write_jsonl(tmp_path / "i.jsonl", [{"id": "i1", "article_ids": ["A9"]}])
    with pytest.raises(DanglingReferenceError) as exc:
        load_corpus(arts, imgs)
    assert exc.value.missing_id == "A9"
    assert "A9" in str(exc.value)


def test_empty_articles_then_image_dangles(tmp_path):
    arts = tmp_path / "a.jsonl"
    arts.write_text("")
    empty_imgs = tmp_path / "none.jsonl"
    empty_imgs.write_text("")
    assert len(load_corpus(arts, empty_imgs).articles) == 0
    imgs = write_jsonl(tmp_path / "i.jsonl", [{"id": "i1", "article_ids": ["A1"]}])
    with pytest.raises(DanglingReferenceError):
        load_corpus(arts, imgs)


def test_malformed_line_reports_line_number(tmp_path):
    arts = tmp_path / "a.jsonl"
    arts.write_text('{"id": "A1", "title": "t", "body": "b", "image_ids": []}\n{not json\n')
    imgs = tmp_path / "i.jsonl"
    imgs.write_text("")
    with pytest.raises(MalformedRecordError) as exc:
        load_corpus(arts, imgs)
    assert exc.value.line_no == 2


@pytest.mark.parametrize("record", [
    {"title": "t", "body": "b", "image_ids": []},
    {"id": "A1", "title": "t", "body": "b", "image_ids": "i1"},
    {"id": "A1", "title": 3, "body": "b", "image_ids": []},
    {"id": "A1", "title": "t", "body": "b", "image_ids": ["i1", "i1"]},
    {"id": "", "title": "t", "body": "b", "image_ids": []},
    {"id": "A1", "title": "t", "body": "b", "image_ids": [], "entities": [{"text": "x"}]},
    ["not", "an", "object"],
])
def test_malformed_article_records(tmp_path, record):
    arts = write_jsonl(tmp_path / "a.jsonl", [record])
    imgs = tmp_path / "i.jsonl"
    imgs.write_text("")
    with pytest.raises(MalformedRecordError):
        load_corpus(arts, imgs)


def test_duplicate_ids(tmp_path):
    imgs = tmp_path / "i.jsonl"
    imgs.write_text("")
    arts = write_jsonl(tmp_path / "a.jsonl", [_article("A1"), _article("A1")])
    with pytest.raises(DuplicateIdError):
        load_corpus(arts, imgs)
    arts = write_jsonl(tmp_path / "a.jsonl", [_article("A1")])
    imgs = write_jsonl(tmp_path / "i.jsonl", [{"id": "i1", "article_ids": ["A1"]}] * 2)
    with pytest.raises(DuplicateIdError):
        load_corpus(arts, imgs)


def test_image_without_articles_is_malformed(tmp_path):
    arts = write_jsonl(tmp_path / "a.jsonl", [_article("A1")])
    imgs = write_jsonl(tmp_path / "i.jsonl", [{"id": "i1", "article_ids": []}])
    with pytest.raises(MalformedRecordError):
        load_corpus(arts, imgs)


def test_multi_article_image_is_one_record(tmp_path):
    arts = write_jsonl(tmp_path / "a.jsonl", [_article("A1", ["i1"]), _article("A2", ["i1"])])
    imgs = write_jsonl(tmp_path / "i.jsonl", [{"id": "i1", "article_ids": ["A1", "A2"], "caption": "c"}])
    corpus = load_corpus(arts, imgs)
    assert corpus.images["i1"].article_ids == ("A1", "A2")
    assert corpus.images["i1"].caption == "c"


def test_sidecar_wins_over_embedded(tmp_path):
    arts = write_jsonl(tmp_path / "a.jsonl", [
        _article("A1", entities=[{"text": "Berlin", "type": "GPE"}]),
        _article("A2", entities=[{"text": "Paris", "type": "GPE"}]),
    ])
    imgs = tmp_path / "i.jsonl"
    imgs.write_text("")
    side = write_jsonl(tmp_path / "e.jsonl", [
        {"owner_id": "A1", "entities": [{"text": "Angela Merkel", "type": "PERSON"}]},
        {"owner_id": "Q1", "entities": [{"text": "UN", "type": "ORG"}]},
    ])
    corpus = load_corpus(arts, imgs, side)
    assert [e.canonical for e in corpus.articles["A1"].entities] == ["angela merkel"]
    assert [e.canonical for e in corpus.articles["A2"].entities] == ["paris"]
    assert corpus.articles["A1"].entities[0].type is EntityType.PERSON


def test_sidecar_repeated_owner_accumulates(tmp_path):
    side = write_jsonl(tmp_path / "e.jsonl", [
        {"owner_id": "A1", "entities": [{"text": "x", "type": "GPE"}]},
        {"owner_id": "A1", "entities": [{"text": "y", "type": "GPE"}, {"text": "X", "type": "GPE"}]},
    ])
    assert [e.canonical for e in load_entity_sidecar(side)["A1"]] == ["x", "y"]


def test_queries_and_sidecar(tmp_path):
    qs = write_jsonl(tmp_path / "q.jsonl", [{"id": "q1", "text": "hello"}, {"id": "q2", "text": "world"}])
    side = write_jsonl(tmp_path / "e.jsonl", [{"owner_id": "q2", "entities": [{"text": "W", "type": "LOC"}]}])
    queries = load_queries(qs, side)
    assert [q.id for q in queries] == ["q1", "q2"]
    assert queries[1].entities[0].canonical == "w"
    dup = write_jsonl(tmp_path / "dup.jsonl", [{"id": "q1", "text": "a"}, {"id": "q1", "text": "b"}])
    with pytest.raises(DuplicateIdError):
        load_queries(dup)


def test_ground_truth_single_line(tmp_path):
    gt = write_jsonl(tmp_path / "gt.jsonl", [{"query_id": "q1", "image_ids": ["i1", "i2"]}])
    truth = load_ground_truth(gt)
    assert truth == {"q1": frozenset({"i1", "i2"})}


def test_ground_truth_merges_duplicate_queries(tmp_path):
    gt = write_jsonl(tmp_path / "gt.jsonl", [
        {"query_id": "q1", "image_ids": ["i1"]},
        {"query_id": "q1", "image_ids": ["i2"]},
    ])
    assert load_ground_truth(gt) == {"q1": frozenset({"i1", "i2"})}


def test_ground_truth_empty_set_is_an_error(tmp_path):
    gt = write_jsonl(tmp_path / "gt.jsonl", [{"query_id": "q1", "image_ids": []}])
    with pytest.raises(EmptyRelevantSetError):
        load_ground_truth(gt)


def test_ground_truth_malformed(tmp_path):
    gt = tmp_path / "gt.jsonl"
    gt.write_text('{"query_id": "q1"}\n')
    with pytest.raises(MalformedRecordError):
        load_ground_truth(gt)


_ids = st.text(alphabet="abcdefgh0123456789", min_size=1, max_size=6)


@st.composite
def corpora(draw):
    article_ids = draw(st.lists(_ids, min_size=1, max_size=8, unique=True))
    image_ids = draw(st.lists(_ids.map(lambda s: "img" + s), max_size=8, unique=True))
    articles = {aid: {"id": aid, "title": draw(st.text(max_size=10)), "body": draw(st.text(max_size=20)),
                      "image_ids": []} for aid in article_ids}
    images = []
    for iid in image_ids:
        owners = draw(st.lists(st.sampled_from(article_ids), min_size=1, max_size=3, unique=True))
        for aid in owners:
            articles[aid]["image_ids"].append(iid)
        images.append({"id": iid, "article_ids": owners})
    return list(articles.values()), images


@settings(max_examples=50, deadline=None)
@given(corpora())
def test_round_trip_and_link_closure(tmp_path_factory, data):
    d = tmp_path_factory.mktemp("rt")
    articles, images = data
    corpus = load_corpus(write_jsonl(d / "a.jsonl", articles), write_jsonl(d / "i.jsonl", images))
    for img in corpus.images.values():
        assert all(aid in corpus.articles for aid in img.article_ids)
    save_corpus(corpus, d / "a2.jsonl", d / "i2.jsonl")
    again = load_corpus(d / "a2.jsonl", d / "i2.jsonl")
    assert dict(again.articles) == dict(corpus.articles)
    assert dict(again.images) == dict(corpus.images)
