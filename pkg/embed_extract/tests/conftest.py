from pathlib import Path

import pytest


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory) -> str:
    """A local 768-dim transformer checkpoint so tests never touch a hub.

    sentence-transformers wraps a plain transformers checkpoint with mean
    pooling, which is exactly the production code path.
    """
    import torch
    from transformers import BertConfig, BertModel, BertTokenizer

    out = tmp_path_factory.mktemp("tiny-model")
    words = [
        "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
        "the", "cat", "sat", "on", "a", "mat", "it", "was", "warm",
        "dog", "ran", "to", "tree", "sun", "is", "big", "sky", "blue",
        "##s", "##ing", "##ed", ".", "!", "?",
    ]
    words += sorted(set("abcdefghijklmnopqrstuvwxyz") - set(words))
    (out / "vocab.txt").write_text("\n".join(dict.fromkeys(words)), encoding="utf-8")
    torch.manual_seed(20260809)
    config = BertConfig(
        vocab_size=len(words),
        hidden_size=768,
        num_hidden_layers=1,
        num_attention_heads=4,
        intermediate_size=128,
        max_position_embeddings=48,
    )
    BertModel(config).save_pretrained(out)
    BertTokenizer(str(out / "vocab.txt"), model_max_length=48).save_pretrained(out)
    return str(out)


@pytest.fixture()
def three_doc_manifest(tmp_path) -> Path:
    path = tmp_path / "manifest.csv"
    path.write_text(
        "id,label,text\n"
        "a,easy,The cat sat on a mat. It was warm.\n"
        "b,easy,A dog ran to the tree.\n"
        "c,hard,The sun is big. The sky is blue. It was warm.\n",
        encoding="utf-8",
    )
    return path
