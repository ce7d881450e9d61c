import numpy as np
import pytest

from kpgen import autodiff as ad
from kpgen import encoder as enc
from kpgen.graph import adjacency, build_graph, build_merge_map
from kpgen.nn import sinusoid_positions
from conftest import make_model
from gradcheck import check_gradients


class TestEmbed:
    def test_dimension_is_sum_of_parts(self, tiny_model, tiny_docs):
        cache = enc.build_cache(tiny_model, tiny_docs[0])
        e = enc.embed(tiny_model, cache)
        cfg = tiny_model.cfg
        assert e.shape == (len(tiny_docs[0].tokens), cfg.token_dim)
        assert cfg.token_dim == cfg.word_dim + cfg.pos_dim + cfg.position_dim

    def test_sinusoid_at_position_zero(self):
        enc0 = sinusoid_positions(3, 6)[0]
        np.testing.assert_allclose(enc0[0::2], 0.0)
        np.testing.assert_allclose(enc0[1::2], 1.0)

    def test_identical_words_differ_only_in_position_slice(self, tiny_docs):
        model = make_model(tiny_docs)
        doc = tiny_docs[0]
        # find two positions with identical (form, upos)
        pair = None
        seen = {}
        for i, t in enumerate(doc.tokens):
            key = (t.form, t.upos)
            if key in seen:
                pair = (seen[key], i)
                break
            seen[key] = i
        assert pair is not None, "fixture should repeat a token"
        cache = enc.build_cache(model, doc)
        e = enc.embed(model, cache).data
        w_p = model.cfg.word_dim + model.cfg.pos_dim
        np.testing.assert_allclose(e[pair[0], :w_p], e[pair[1], :w_p])
        assert not np.allclose(e[pair[0], w_p:], e[pair[1], w_p:])

    def test_unknown_pos_uses_unk_row(self, tiny_docs):
        model = make_model(tiny_docs)
        assert model.pos_inv.index("NO-SUCH-TAG") == 0


class TestBiGRU:
    def test_single_token_shape(self, tiny_model):
        e = ad.Tensor(np.random.default_rng(0).normal(size=(1, tiny_model.cfg.token_dim)))
        out = enc.bigru(tiny_model, e)
        assert out.shape == (1, 2 * tiny_model.cfg.gru_hidden)

    def test_reversal_swaps_direction_roles(self, tiny_model):
        rng = np.random.default_rng(1)
        e = ad.Tensor(rng.normal(size=(5, tiny_model.cfg.token_dim)))
        rows = [ad.gather_rows(e, np.array([i])) for i in range(5)]
        # backward-direction outputs inside bigru == reversed scan of the
        # backward cell over the reversed sequence
        h = enc.bigru(tiny_model, e).data[:, tiny_model.cfg.gru_hidden:]
        scan = tiny_model.gru_bwd.run(list(reversed(rows)))
        manual = np.concatenate([t.data for t in reversed(scan)], axis=0)
        np.testing.assert_allclose(h, manual, atol=1e-12)

    def test_zero_parameters_give_input_independent_output(self, tiny_docs):
        model = make_model(tiny_docs)
        for cell in (model.gru_fwd, model.gru_bwd):
            for p in (cell.w_r, cell.u_r, cell.b_r, cell.w_z, cell.u_z, cell.b_z,
                      cell.w_n, cell.u_n, cell.b_n):
                p.data[:] = 0.0
        rng = np.random.default_rng(2)
        a = enc.bigru(model, ad.Tensor(rng.normal(size=(3, model.cfg.token_dim))))
        b = enc.bigru(model, ad.Tensor(rng.normal(size=(3, model.cfg.token_dim))))
        np.testing.assert_allclose(a.data, b.data)
        # with all-zero gates: z = 0.5, n = 0, h' = 0.5 h = 0 from h0 = 0
        np.testing.assert_allclose(a.data, 0.0)


class TestGcnLayer:
    def test_isolated_node_reduces_to_dense_layer(self):
        rng = np.random.default_rng(3)
        h = ad.Tensor(rng.normal(size=(1, 4)))
        w = ad.Tensor(rng.normal(size=(4, 4)))
        b = ad.Tensor(rng.normal(size=(1, 4)))
        a_norm = ad.Tensor(np.eye(1))  # self-loop only, degree 1
        out = enc.gcn_layer(h, a_norm, w, b)
        expected = np.maximum(h.data @ w.data + b.data, 0.0)
        np.testing.assert_allclose(out.data, expected)

    def test_zero_weights_give_relu_bias(self):
        h = ad.Tensor(np.random.default_rng(4).normal(size=(3, 4)))
        w = ad.zeros((4, 4))
        b = ad.Tensor([[0.5, -0.5, 1.0, -1.0]])
        a_norm = ad.Tensor(np.eye(3))
        out = enc.gcn_layer(h, a_norm, w, b)
        np.testing.assert_allclose(out.data, np.tile([0.5, 0.0, 1.0, 0.0], (3, 1)))

    def test_matches_dense_bruteforce_evaluation(self, tiny_model, tiny_docs):
        # independent dense evaluation of the aggregation rule on a real graph
        rng = np.random.default_rng(5)
        doc = tiny_docs[0]
        cache = enc.build_cache(tiny_model, doc)
        n = len(doc.tokens)
        scores = tiny_model.scorer.score(cache.graph, ad.Tensor(
            rng.normal(size=(n, tiny_model.cfg.token_dim))), ad.zeros((1, tiny_model.cfg.word_dim)))
        a = adjacency(cache.graph, scores)
        a_norm = ad.mul(a, ad.broadcast_to(cache.dinv, a.shape))
        h = ad.Tensor(rng.normal(size=(n, tiny_model.cfg.hidden_dim)))
        w, b = tiny_model.gcn_layers[0]
        out = enc.gcn_layer(h, a_norm, w, b).data

        dense_a = a.data
        expected = np.zeros_like(out)
        for i in range(n):
            acc = np.zeros(tiny_model.cfg.hidden_dim)
            for j in range(n):
                acc += (1.0 / cache.graph.degree[i]) * dense_a[i, j] * \
                    (h.data[j] @ w.data + b.data[0])
            expected[i] = np.maximum(acc, 0.0)
        np.testing.assert_allclose(out, expected, atol=1e-12)


class TestMergeAndGlu:
    def test_identity_map_keeps_h(self):
        h = ad.Tensor(np.random.default_rng(6).normal(size=(4, 3)))
        m = build_merge_map(["a", "b", "c", "d"])
        out = enc.merge_rows(h, ad.constant(m.matrix()))
        np.testing.assert_allclose(out.data, h.data)

    def test_identical_rows_merge_to_same_row(self):
        h = ad.Tensor(np.array([[1.0, 3.0], [1.0, 3.0]]))
        m = build_merge_map(["x", "x"])
        out = enc.merge_rows(h, ad.constant(m.matrix()))
        np.testing.assert_allclose(out.data, [[1.0, 3.0]])

    def test_group_mean(self):
        h = ad.Tensor(np.array([[1.0, 3.0], [3.0, 1.0]]))
        m = build_merge_map(["x", "x"])
        out = enc.merge_rows(h, ad.constant(m.matrix()))
        np.testing.assert_allclose(out.data, [[2.0, 2.0]])

    def test_zero_glu_parameters_pass_through(self):
        h = ad.Tensor(np.random.default_rng(7).normal(size=(3, 4)))
        gated, c = enc.glu_context(h, ad.zeros((4, 4)), ad.zeros((4, 4)))
        np.testing.assert_allclose(gated.data, h.data)
        np.testing.assert_allclose(c.data[0], h.data.mean(axis=0))

    def test_single_row_context(self):
        rng = np.random.default_rng(8)
        h = ad.Tensor(rng.normal(size=(1, 4)))
        wk = ad.Tensor(rng.normal(size=(4, 4)))
        wl = ad.Tensor(rng.normal(size=(4, 4)))
        gated, c = enc.glu_context(h, wk, wl)
        np.testing.assert_allclose(c.data, gated.data)

    def test_glu_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(9)
        h = ad.Tensor(rng.normal(size=(3, 4)), requires_grad=True)
        wk = ad.Tensor(rng.uniform(-0.5, 0.5, (4, 4)), requires_grad=True)
        wl = ad.Tensor(rng.uniform(-0.5, 0.5, (4, 4)), requires_grad=True)
        check_gradients(lambda: enc.glu_context(h, wk, wl)[1].sum(), [h, wk, wl],
                        tol=1e-5)


class TestEncodePipeline:
    def test_shape_chain(self, tiny_model, tiny_docs):
        doc = tiny_docs[0]
        cache = enc.build_cache(tiny_model, doc)
        state = enc.encode(tiny_model, cache,
                           ad.zeros((1, tiny_model.cfg.word_dim)))
        l = len(doc.tokens)
        lp = cache.merge.merged_count
        d = tiny_model.cfg
        assert state.e_tokens.shape == (l, d.token_dim)
        assert state.h0.shape == (l, d.hidden_dim)
        assert state.h_gcn.shape == (l, d.hidden_dim)
        assert state.h_merged.shape == (lp, d.hidden_dim)
        assert state.h_glu.shape == (lp, d.hidden_dim)
        assert state.c.shape == (1, d.hidden_dim)
        assert lp <= l

    def test_bigru_outputs_cached_across_phrases(self, tiny_model, tiny_docs):
        cache = enc.build_cache(tiny_model, tiny_docs[0])
        zero = ad.zeros((1, tiny_model.cfg.word_dim))
        s1 = enc.encode(tiny_model, cache, zero)
        h0_first = s1.h0
        s2 = enc.encode(tiny_model, cache,
                        ad.Tensor(np.random.default_rng(0).normal(
                            size=(1, tiny_model.cfg.word_dim))))
        assert s2.h0 is h0_first  # same cached node, no recompute

    def test_cached_reencode_bit_identical(self, tiny_model, tiny_docs):
        cache = enc.build_cache(tiny_model, tiny_docs[0])
        phr = ad.Tensor(np.random.default_rng(1).normal(size=(1, tiny_model.cfg.word_dim)))
        a = enc.encode(tiny_model, cache, phr)
        b = enc.encode(tiny_model, cache, phr)
        assert np.array_equal(a.c.data, b.c.data)
        assert np.array_equal(a.h_glu.data, b.h_glu.data)

    def test_phrase_embedding_changes_context(self, tiny_model, tiny_docs):
        cache = enc.build_cache(tiny_model, tiny_docs[0])
        base = enc.encode(tiny_model, cache, ad.zeros((1, tiny_model.cfg.word_dim)))
        moved = enc.encode(tiny_model, cache,
                           ad.Tensor(np.random.default_rng(2).normal(
                               size=(1, tiny_model.cfg.word_dim))))
        assert np.linalg.norm(base.c.data - moved.c.data) > 0

    def test_dropout_only_in_training(self, tiny_docs):
        model = make_model(tiny_docs, dropout=0.5)
        cache = enc.build_cache(model, tiny_docs[0])
        state = enc.encode(model, cache, ad.zeros((1, model.cfg.word_dim)),
                           training=False)
        cache2 = enc.build_cache(model, tiny_docs[0])
        state2 = enc.encode(model, cache2, ad.zeros((1, model.cfg.word_dim)),
                            training=True, rng=np.random.default_rng(3))
        np.testing.assert_allclose(state.e_tokens.data, enc.embed(model, cache).data)
        assert not np.allclose(state.h_gcn.data, state2.h_gcn.data)

    def test_end_to_end_encoder_gradients(self, tiny_docs):
        # toy dims, finite-difference oracle across the whole encoder; the
        # parameter scale-up keeps ReLU pre-activations away from the kink
        # relative to the finite-difference step
        model = make_model(tiny_docs, seed=2, word_dim=4, pos_dim=2, position_dim=2,
                           gru_hidden=3, hidden_dim=4, gcn_layers=2,
                           edge_type_dim=2)
        for p in model.parameters().values():
            p.data *= 4.0
        doc = tiny_docs[0]
        # shrink to first sentence to keep the check fast
        from kpgen.deptrees import AnnotatedDocument
        first = AnnotatedDocument(doc.id, [t for t in doc.tokens if t.sent == 0],
                                  doc.sentences[:1], doc.keyphrases)
        first.validate()
        params = {n: p for n, p in model.parameters().items()
                  if n.startswith(("enc.gcn", "enc.glu", "edge."))}

        def build():
            cache = enc.build_cache(model, first)
            state = enc.encode(model, cache, ad.zeros((1, model.cfg.word_dim)))
            return state.c.sum()

        check_gradients(build, list(params.values()), tol=1e-4)
