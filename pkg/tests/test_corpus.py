from startflow.corpus import render_errors, verify_corpus


def test_bundled_corpus_matches_goldens(corpus):
    report = verify_corpus(corpus.root)
    assert report.ok, report.render_text()
    kinds = {(result.fixture, result.kind) for result in report.results}
    assert ("caa", "fmt.sfw") in kinds
    assert ("defects8", "check.json") in kinds
    assert ("broken", "errors.txt") in kinds
    assert ("forms", "eval.json") in kinds
    assert ("tam", "tam.json") in kinds


def test_changed_label_breaks_format_golden(corpus_copy):
    source = corpus_copy.valid_dir / "caa.sfw"
    text = source.read_text(encoding="utf-8")
    source.write_text(text.replace('"Add certificate"', '"Add a certificate"'), encoding="utf-8")

    report = verify_corpus(corpus_copy.root)
    assert [(result.fixture, result.kind) for result in report.failures] == [("caa", "fmt.sfw")]
    assert '+  button add-cert "Add a certificate"' in report.failures[0].diff
    assert "FAIL caa fmt.sfw" in report.render_text()

    updated = verify_corpus(corpus_copy.root, update=True)
    assert updated.ok
    assert "Add a certificate" in corpus_copy.golden("caa", "fmt.sfw").read_text(encoding="utf-8")
    assert verify_corpus(corpus_copy.root).ok


def test_unparseable_valid_fixture_fails(corpus_copy):
    (corpus_copy.valid_dir / "clean.sfw").write_text("screen {\n", encoding="utf-8")
    report = verify_corpus(corpus_copy.root)
    assert ("clean", "parse") in {(result.fixture, result.kind) for result in report.failures}


def test_missing_goldens_are_skipped(corpus_copy):
    corpus_copy.golden("clean", "metrics.json").unlink()
    report = verify_corpus(corpus_copy.root)
    assert report.ok
    assert ("clean", "metrics.json") not in {(r.fixture, r.kind) for r in report.results}


def test_render_errors(corpus):
    assert render_errors(corpus.invalid_dir / "ghost.sfw") == (
        "E-REF F1/ghost: feature uses unknown screen 'ghost'\n"
        "E-REF F1/c1: connector 'c1' targets screen 'ghost' outside the feature\n"
    )
    assert render_errors(corpus.valid_dir / "clean.sfw") == ""
