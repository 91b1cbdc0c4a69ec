"""End-to-end model contracts not covered by the trainer tests."""

import numpy as np
import pytest

from signet.data_io import CorpusExample
from signet.gradcheck import fixture_config, fixture_corpus
from signet.model import SignedAttentionModel, TrainConfig, build_model
from synthetic import separable_corpus


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(state_dim=0)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=-1.0)
    with pytest.raises(ValueError):
        TrainConfig(attention_mode="sideways")
    with pytest.raises(ValueError):
        TrainConfig.from_dict({"bogus": 1})


def test_config_round_trip():
    cfg = TrainConfig(state_dim=4, epochs=3, attention_mode="co")
    assert TrainConfig.from_dict(cfg.to_dict()) == cfg


def test_probabilities_and_prediction_semantics():
    corpus = fixture_corpus()
    model = build_model(fixture_config(), corpus)
    result = model.forward(corpus[0])
    assert result.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
    # index 0 is the false class; prediction maps back to corpus labels
    expected = 1 if result.probabilities[0] > result.probabilities[1] else 0
    assert result.prediction == expected
    assert result.p_false == pytest.approx(result.probabilities[0])


def test_unknown_tokens_fall_back_to_reserved_row():
    corpus = fixture_corpus()
    model = build_model(fixture_config(), corpus)
    unseen = CorpusExample(
        id="u", label=0, post=("entirely novel words",), comments=("zzz qqq xxx",)
    )
    result = model.forward(unseen)
    assert np.all(np.isfinite(result.probabilities))


def test_caps_apply_to_sentences_comments_tokens():
    cfg = fixture_config()
    long_example = CorpusExample(
        id="long",
        label=0,
        post=tuple(f"sentence {i} three words" for i in range(10)),
        comments=tuple(f"comment number {i} here" for i in range(10)),
    )
    model = build_model(cfg, [long_example])
    sent, com = model.encode_example_nodes(long_example)
    assert len(sent) == cfg.max_sentences
    assert len(com) == cfg.max_comments
    many_tokens = " ".join(f"tok{i}" for i in range(50))
    assert len(model._token_ids(many_tokens)) == cfg.max_tokens


def test_empty_text_maps_to_unk():
    corpus = fixture_corpus()
    model = build_model(fixture_config(), corpus)
    assert model._token_ids("!!! ...") == [0]


def test_forward_deterministic_bitwise():
    corpus = separable_corpus(0, 4)
    model = build_model(fixture_config(seed=11), corpus)
    r1 = model.forward(corpus[0])
    r2 = model.forward(corpus[0])
    np.testing.assert_array_equal(r1.probabilities, r2.probabilities)
    assert r1.loss.value[0, 0] == r2.loss.value[0, 0]


def test_same_seed_same_init_different_seed_differs():
    corpus = separable_corpus(0, 4)
    m1 = build_model(fixture_config(seed=1), corpus)
    m2 = build_model(fixture_config(seed=1), corpus)
    m3 = build_model(fixture_config(seed=2), corpus)
    for name, t in m1.graph.parameters.items():
        np.testing.assert_array_equal(t.value, m2.graph.parameters[name].value)
    assert any(
        not np.array_equal(t.value, m3.graph.parameters[name].value)
        for name, t in m1.graph.parameters.items()
    )


def test_real_mode_has_no_phase_gru_and_zero_phases():
    corpus = separable_corpus(0, 4)
    cfg = fixture_config(seed=1)
    cfg = TrainConfig(**{**cfg.to_dict(), "embedding_mode": "real"})
    model = build_model(cfg, corpus)
    assert model.gru.phase is None
    assert np.all(model.graph.parameters["embedding.phase"].value == 0.0)
    result = model.forward(corpus[0])
    # real embeddings give real density matrices, so the forward is finite
    # and the bundle's overlap is still within quantum bounds
    assert np.all(result.bundle.overlap >= -1e-10)
    assert np.all(result.bundle.overlap <= 1 + 1e-9)


def test_embedding_table_used_for_known_tokens():
    corpus = [
        CorpusExample(id="t", label=0, post=("alpha beta",), comments=("gamma delta",))
    ]
    cfg = fixture_config()
    d = cfg.state_dim
    table = {"alpha": np.arange(1.0, d + 1.0)}
    model = build_model(cfg, corpus, embedding_table=table)
    row = model.graph.parameters["embedding.amplitude"].value[model.token_index["alpha"]]
    expected = np.arange(1.0, d + 1.0)
    np.testing.assert_allclose(row, expected / np.linalg.norm(expected), atol=1e-12)


def test_checkpoint_includes_config_and_vocab(tmp_path):
    corpus = fixture_corpus()
    model = build_model(fixture_config(seed=5), corpus)
    path = str(tmp_path / "m.ckpt")
    model.save(path)
    loaded = SignedAttentionModel.from_checkpoint(path)
    assert loaded.config == model.config
    assert loaded.vocab == model.vocab
