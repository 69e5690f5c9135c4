import json

import numpy as np
import pytest

from embed_extract.cli import main as cli_main
from embed_extract.extract import (
    ExtractError,
    ExtractJob,
    extract_embeddings,
    read_manifest,
    split_sentences,
)


class TestManifest:
    def test_inline_and_path_modes(self, tmp_path):
        (tmp_path / "doc.txt").write_text("From a file.", encoding="utf-8")
        m = tmp_path / "m.csv"
        m.write_text("id,label,path\nx,easy,doc.txt\n", encoding="utf-8")
        assert read_manifest(m) == [("x", "From a file.")]

    def test_missing_file_errors(self, tmp_path):
        m = tmp_path / "m.csv"
        m.write_text("id,label,path\nx,easy,gone.txt\n", encoding="utf-8")
        with pytest.raises(ExtractError, match="row 1"):
            read_manifest(m)

    def test_duplicate_id_errors(self, tmp_path):
        m = tmp_path / "m.csv"
        m.write_text("id,label,text\nx,easy,One.\nx,easy,Two.\n", encoding="utf-8")
        with pytest.raises(ExtractError, match="duplicate"):
            read_manifest(m)


def test_split_sentences_rule():
    assert split_sentences("One here. Two there! Three?") == [
        "One here.",
        "Two there!",
        "Three?",
    ]
    assert split_sentences("no terminal punctuation") == ["no terminal punctuation"]
    assert split_sentences("   ") == []


class TestExtraction:
    def test_output_validates_against_primary_loader(
        self, tiny_model_dir, three_doc_manifest, tmp_path
    ):
        # [SECONDARY] acceptance: 3-document manifest, dim 768, ids intact
        from readability_lab.embeddings import load_embeddings

        out = tmp_path / "doc.jsonl"
        summary = extract_embeddings(
            ExtractJob(
                manifest=str(three_doc_manifest),
                model=tiny_model_dir,
                granularity="document",
                output=str(out),
            )
        )
        assert summary["documents"] == 3
        table = load_embeddings(out)
        assert table.dim == 768
        assert table.granularity == "document"
        assert sorted(table.doc_ids()) == ["a", "b", "c"]

    def test_document_vectors_equal_mean_of_sentence_vectors(
        self, tiny_model_dir, three_doc_manifest, tmp_path
    ):
        # [SECONDARY] acceptance: pooled consistency across granularities
        from readability_lab.embeddings import load_embeddings, mean_pool

        doc_out = tmp_path / "doc.jsonl"
        sent_out = tmp_path / "sent.jsonl"
        for granularity, out in (("document", doc_out), ("sentence", sent_out)):
            extract_embeddings(
                ExtractJob(
                    manifest=str(three_doc_manifest),
                    model=tiny_model_dir,
                    granularity=granularity,
                    output=str(out),
                )
            )
        doc_table = load_embeddings(doc_out)
        sent_table = load_embeddings(sent_out)
        assert sent_table.granularity == "sentence"
        for doc_id, sents in sent_table.vectors.items():
            pooled = mean_pool([vec for _, vec in sorted(sents.items())])
            np.testing.assert_allclose(
                doc_table.vectors[doc_id], pooled, atol=1e-5
            )
        # three sentences for document c
        assert len(sent_table.vectors["c"]) == 3

    def test_two_runs_are_identical(self, tiny_model_dir, three_doc_manifest, tmp_path):
        outs = []
        for name in ("r1.jsonl", "r2.jsonl"):
            out = tmp_path / name
            extract_embeddings(
                ExtractJob(
                    manifest=str(three_doc_manifest),
                    model=tiny_model_dir,
                    output=str(out),
                )
            )
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_header_records_model_and_pooling(
        self, tiny_model_dir, three_doc_manifest, tmp_path
    ):
        out = tmp_path / "doc.jsonl"
        extract_embeddings(
            ExtractJob(
                manifest=str(three_doc_manifest), model=tiny_model_dir, output=str(out)
            )
        )
        header = json.loads(out.read_text().splitlines()[0])
        assert header["model"] == tiny_model_dir
        assert header["pooling"] == "mean"
        assert header["dim"] == 768

    def test_truncation_recorded_in_header(self, tiny_model_dir, tmp_path):
        long_sentence = "cat " * 200  # far beyond the 48-token window
        m = tmp_path / "m.csv"
        m.write_text(
            f"id,label,text\nlong,easy,{long_sentence.strip()}.\nshort,easy,A cat.\n",
            encoding="utf-8",
        )
        out = tmp_path / "t.jsonl"
        extract_embeddings(
            ExtractJob(manifest=str(m), model=tiny_model_dir, output=str(out))
        )
        header = json.loads(out.read_text().splitlines()[0])
        assert header["truncated_docs"] == ["long"]

    def test_bad_model_errors(self, three_doc_manifest, tmp_path):
        with pytest.raises(ExtractError, match="could not load model"):
            extract_embeddings(
                ExtractJob(
                    manifest=str(three_doc_manifest),
                    model=str(tmp_path / "no-model-here"),
                    output=str(tmp_path / "x.jsonl"),
                )
            )


class TestCli:
    def test_success(self, tiny_model_dir, three_doc_manifest, tmp_path, capsys):
        out = tmp_path / "cli.jsonl"
        code = cli_main(
            [
                "--manifest", str(three_doc_manifest),
                "--model", tiny_model_dir,
                "--granularity", "document",
                "--out", str(out),
            ]
        )
        assert code == 0
        assert "3 documents" in capsys.readouterr().out
        assert out.exists()

    def test_empty_manifest_header_only_nonzero_exit(
        self, tiny_model_dir, tmp_path, capsys
    ):
        m = tmp_path / "empty.csv"
        m.write_text("id,label,text\n", encoding="utf-8")
        out = tmp_path / "empty.jsonl"
        code = cli_main(
            ["--manifest", str(m), "--model", tiny_model_dir, "--out", str(out)]
        )
        assert code == 1
        assert "empty manifest" in capsys.readouterr().err
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0])["dim"] == 768

    def test_manifest_error_exit_2(self, tiny_model_dir, tmp_path, capsys):
        code = cli_main(
            [
                "--manifest", str(tmp_path / "missing.csv"),
                "--model", tiny_model_dir,
                "--out", str(tmp_path / "x.jsonl"),
            ]
        )
        assert code == 2
        assert "error" in capsys.readouterr().err
