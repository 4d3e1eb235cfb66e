#include "symnet/losses.hpp"

#include <stdexcept>

namespace symnet {

namespace {

void check_labels(const LabeledBatch& b, int num_categories) {
    if (static_cast<int>(b.y.size()) != b.x.rows()) {
        throw std::invalid_argument("batch: label count does not match row count");
    }
    if (b.x.rows() == 0) throw std::invalid_argument("batch: empty");
    for (int y : b.y) {
        if (y < 0 || y >= num_categories) {
            throw std::invalid_argument("batch: label " + std::to_string(y) + " outside [0, K)");
        }
    }
}

void check_inputs(const Matrix& x, int input_dim) {
    if (x.cols() != input_dim) throw std::invalid_argument("batch: input width does not match model");
    if (x.rows() == 0) throw std::invalid_argument("batch: empty");
}

/// One-hot selection mask; an extra `offset` shifts the hot column (used to
/// address the paired neuron y+K in the joint classifier).
Matrix onehot_mask(const std::vector<int>& labels, int cols, int offset = 0) {
    Matrix m(static_cast<int>(labels.size()), cols);
    for (std::size_t i = 0; i < labels.size(); ++i) m(static_cast<int>(i), labels[i] + offset) = 1.0;
    return m;
}

/// -1/B * sum(logp .* mask): batch-mean negative log-likelihood of the
/// selected entries.
NodeId masked_nll(Tape& t, NodeId logp, const Matrix& mask, double denom) {
    NodeId sel = t.mul(logp, t.constant(mask));
    return t.scale(t.sum_all(sel), -1.0 / denom);
}

/// log of the half mass log(sum_{k<=K} p_st) as lse(half logits) - lse(all),
/// exact in log space (no exp/underflow round trip).
NodeId log_half_mass(Tape& t, NodeId v_half, NodeId v_all) {
    return t.sub(t.logsumexp_rows(v_half), t.logsumexp_rows(v_all));
}

NodeId mean_rows(Tape& t, NodeId col, int rows) {
    return t.scale(t.sum_all(col), 1.0 / rows);
}


NodeId ensure_features(Tape& t, const std::vector<NodeId>& g_w, const std::vector<NodeId>& g_b,
                       const Matrix& x, NodeId provided) {
    if (provided >= 0) return provided;
    return graph::features(t, g_w, g_b, t.constant(x));
}

/// softplus(z) = log(1 + e^z), built as lse over [0, z] per row.
NodeId softplus(Tape& t, NodeId z, int rows) {
    NodeId zeros = t.constant(Matrix(rows, 1));
    return t.logsumexp_rows(t.concat_cols(zeros, z));
}

struct HeadPair {
    NodeId v_s;  // B x K source-head logits
    NodeId v_t;  // B x K target-head logits
    NodeId v_all;  // B x 2K concatenation
};

HeadPair both_heads(Tape& t, const SymNetBinding& m, NodeId f, bool detach_heads = false) {
    HeadPair h;
    h.v_s = graph::head_logits(t, f, m.cs_w, m.cs_b, detach_heads);
    h.v_t = graph::head_logits(t, f, m.ct_w, m.ct_b, detach_heads);
    h.v_all = t.concat_cols(h.v_s, h.v_t);
    return h;
}

}  // namespace

SymNetBinding bind_params(Tape& t, const SymNet& m) {
    SymNetBinding b;
    b.model = &m;
    for (std::size_t i = 0; i < m.g.layers.size(); ++i) {
        b.g_w.push_back(t.leaf(m.g.layers[i].W));
        b.g_b.push_back(t.leaf(m.g.layers[i].b));
        const std::string base = "G.layer" + std::to_string(i);
        b.by_name[base + ".W"] = b.g_w.back();
        b.by_name[base + ".b"] = b.g_b.back();
    }
    b.cs_w = t.leaf(m.cs.W);
    b.cs_b = t.leaf(m.cs.b);
    b.ct_w = t.leaf(m.ct.W);
    b.ct_b = t.leaf(m.ct.b);
    b.by_name["Cs.W"] = b.cs_w;
    b.by_name["Cs.b"] = b.cs_b;
    b.by_name["Ct.W"] = b.ct_w;
    b.by_name["Ct.b"] = b.ct_b;
    return b;
}

BaselineBinding bind_params(Tape& t, const BaselineNet& m) {
    BaselineBinding b;
    b.model = &m;
    for (std::size_t i = 0; i < m.g.layers.size(); ++i) {
        b.g_w.push_back(t.leaf(m.g.layers[i].W));
        b.g_b.push_back(t.leaf(m.g.layers[i].b));
        const std::string base = "G.layer" + std::to_string(i);
        b.by_name[base + ".W"] = b.g_w.back();
        b.by_name[base + ".b"] = b.g_b.back();
    }
    b.c_w = t.leaf(m.c.W);
    b.c_b = t.leaf(m.c.b);
    b.d_w = t.leaf(m.d.W);
    b.d_b = t.leaf(m.d.b);
    b.by_name["C.W"] = b.c_w;
    b.by_name["C.b"] = b.c_b;
    b.by_name["D.W"] = b.d_w;
    b.by_name["D.b"] = b.d_b;
    return b;
}

namespace graph {

NodeId features(Tape& t, const std::vector<NodeId>& g_w, const std::vector<NodeId>& g_b, NodeId x) {
    NodeId h = x;
    for (std::size_t i = 0; i < g_w.size(); ++i) {
        h = t.relu(t.add_rowvec(t.matmul_nt(h, g_w[i]), g_b[i]));
    }
    return h;
}

NodeId head_logits(Tape& t, NodeId f, NodeId w, NodeId b, bool detach_head) {
    if (detach_head) {
        w = t.detach(w);
        b = t.detach(b);
    }
    return t.add_rowvec(t.matmul_nt(f, w), b);
}

NodeId loss_task_source(Tape& t, const SymNetBinding& m, const LabeledBatch& src, NodeId f_src) {
    const int k = m.model->config.num_categories;
    check_labels(src, k);
    check_inputs(src.x, m.model->config.input_dim);
    NodeId f = ensure_features(t, m.g_w, m.g_b, src.x, f_src);
    NodeId logp = t.log_softmax_rows(head_logits(t, f, m.cs_w, m.cs_b));
    return masked_nll(t, logp, onehot_mask(src.y, k), src.x.rows());
}

NodeId loss_task_target_crossdomain(Tape& t, const SymNetBinding& m, const LabeledBatch& src,
                                    NodeId f_src) {
    const int k = m.model->config.num_categories;
    check_labels(src, k);
    check_inputs(src.x, m.model->config.input_dim);
    NodeId f = ensure_features(t, m.g_w, m.g_b, src.x, f_src);
    NodeId logp = t.log_softmax_rows(head_logits(t, f, m.ct_w, m.ct_b));
    return masked_nll(t, logp, onehot_mask(src.y, k), src.x.rows());
}

NodeId loss_domain_discrimination(Tape& t, const SymNetBinding& m, const LabeledBatch& src,
                                  const UnlabeledBatch& tgt, NodeId f_src, NodeId f_tgt) {
    check_labels(src, m.model->config.num_categories);
    check_inputs(src.x, m.model->config.input_dim);
    check_inputs(tgt.x, m.model->config.input_dim);
    NodeId f_s = ensure_features(t, m.g_w, m.g_b, src.x, f_src);
    NodeId f_t = ensure_features(t, m.g_w, m.g_b, tgt.x, f_tgt);
    HeadPair hs = both_heads(t, m, f_s);
    HeadPair ht = both_heads(t, m, f_t);
    // -mean_t log(target half mass) - mean_s log(source half mass)
    NodeId tgt_term = t.scale(mean_rows(t, log_half_mass(t, ht.v_t, ht.v_all), tgt.x.rows()), -1.0);
    NodeId src_term = t.scale(mean_rows(t, log_half_mass(t, hs.v_s, hs.v_all), src.x.rows()), -1.0);
    return t.add(tgt_term, src_term);
}

NodeId loss_category_confusion(Tape& t, const SymNetBinding& m, const LabeledBatch& src, NodeId f_src) {
    const int k = m.model->config.num_categories;
    check_labels(src, k);
    check_inputs(src.x, m.model->config.input_dim);
    NodeId f = ensure_features(t, m.g_w, m.g_b, src.x, f_src);
    HeadPair h = both_heads(t, m, f);
    NodeId logp = t.log_softmax_rows(h.v_all);
    // -(1/2B) sum log p_st[y+K] - (1/2B) sum log p_st[y]; one mask covers
    // both neurons of each sample's pair.
    Matrix mask = symnet::add(onehot_mask(src.y, 2 * k), onehot_mask(src.y, 2 * k, k));
    return masked_nll(t, logp, mask, 2.0 * src.x.rows());
}

NodeId loss_domain_confusion_target(Tape& t, const SymNetBinding& m, const UnlabeledBatch& tgt,
                                    NodeId f_tgt) {
    check_inputs(tgt.x, m.model->config.input_dim);
    NodeId f = ensure_features(t, m.g_w, m.g_b, tgt.x, f_tgt);
    HeadPair h = both_heads(t, m, f);
    NodeId tgt_half = mean_rows(t, log_half_mass(t, h.v_t, h.v_all), tgt.x.rows());
    NodeId src_half = mean_rows(t, log_half_mass(t, h.v_s, h.v_all), tgt.x.rows());
    return t.scale(t.add(tgt_half, src_half), -0.5);
}

NodeId loss_entropy_min(Tape& t, const SymNetBinding& m, const UnlabeledBatch& tgt, NodeId f_tgt) {
    check_inputs(tgt.x, m.model->config.input_dim);
    NodeId f = ensure_features(t, m.g_w, m.g_b, tgt.x, f_tgt);
    // Head parameters detached: the entropy objective shapes G only.
    HeadPair h = both_heads(t, m, f, /*detach_heads=*/true);
    NodeId logp = t.log_softmax_rows(h.v_all);
    NodeId q = t.add_halves(t.exp(logp));
    NodeId plogp = t.mul(q, t.log(q));
    return t.scale(t.sum_all(plogp), -1.0 / tgt.x.rows());
}

NodeId loss_domain_confusion_source_degenerate(Tape& t, const SymNetBinding& m, const LabeledBatch& src,
                                               NodeId f_src) {
    check_labels(src, m.model->config.num_categories);
    check_inputs(src.x, m.model->config.input_dim);
    NodeId f = ensure_features(t, m.g_w, m.g_b, src.x, f_src);
    HeadPair h = both_heads(t, m, f);
    NodeId src_half = mean_rows(t, log_half_mass(t, h.v_s, h.v_all), src.x.rows());
    NodeId tgt_half = mean_rows(t, log_half_mass(t, h.v_t, h.v_all), src.x.rows());
    return t.scale(t.add(src_half, tgt_half), -0.5);
}

NodeId loss_two_head_supervised_degenerate(Tape& t, const SymNetBinding& m, const LabeledBatch& src,
                                           NodeId f_src) {
    const int k = m.model->config.num_categories;
    check_labels(src, k);
    check_inputs(src.x, m.model->config.input_dim);
    NodeId f = ensure_features(t, m.g_w, m.g_b, src.x, f_src);
    NodeId logp_s = t.log_softmax_rows(head_logits(t, f, m.cs_w, m.cs_b));
    NodeId logp_t = t.log_softmax_rows(head_logits(t, f, m.ct_w, m.ct_b));
    const Matrix mask = onehot_mask(src.y, k);
    return t.add(masked_nll(t, logp_s, mask, 2.0 * src.x.rows()),
                 masked_nll(t, logp_t, mask, 2.0 * src.x.rows()));
}

NodeId baseline_dc_task(Tape& t, const BaselineBinding& m, const LabeledBatch& src, NodeId f_src) {
    const int k = m.model->config.num_categories;
    check_labels(src, k);
    check_inputs(src.x, m.model->config.input_dim);
    NodeId f = ensure_features(t, m.g_w, m.g_b, src.x, f_src);
    NodeId logp = t.log_softmax_rows(head_logits(t, f, m.c_w, m.c_b));
    return masked_nll(t, logp, onehot_mask(src.y, k), src.x.rows());
}

NodeId baseline_dc_discriminator(Tape& t, const BaselineBinding& m, NodeId f_src, NodeId f_tgt) {
    const int bs = t.value(f_src).rows();
    const int bt = t.value(f_tgt).rows();
    NodeId z_s = head_logits(t, f_src, m.d_w, m.d_b);
    NodeId z_t = head_logits(t, f_tgt, m.d_w, m.d_b);
    // -mean_s log(1 - D) - mean_t log(D) with log sigmoid in softplus form
    NodeId src_term = mean_rows(t, softplus(t, z_s, bs), bs);
    NodeId tgt_term = mean_rows(t, softplus(t, t.scale(z_t, -1.0), bt), bt);
    return t.add(src_term, tgt_term);
}

NodeId baseline_dc_confusion(Tape& t, const BaselineBinding& m, NodeId f_src, NodeId f_tgt) {
    const int bs = t.value(f_src).rows();
    const int bt = t.value(f_tgt).rows();
    NodeId half_disc = t.scale(baseline_dc_discriminator(t, m, f_src, f_tgt), 0.5);
    NodeId z_s = head_logits(t, f_src, m.d_w, m.d_b);
    NodeId z_t = head_logits(t, f_tgt, m.d_w, m.d_b);
    // -(1/2) mean_s log D - (1/2) mean_t log(1 - D)
    NodeId src_term = t.scale(mean_rows(t, softplus(t, t.scale(z_s, -1.0), bs), bs), 0.5);
    NodeId tgt_term = t.scale(mean_rows(t, softplus(t, z_t, bt), bt), 0.5);
    return t.add(half_disc, t.add(src_term, tgt_term));
}

NodeId baseline_entropy_min(Tape& t, const BaselineBinding& m, const UnlabeledBatch& tgt,
                            NodeId f_tgt) {
    check_inputs(tgt.x, m.model->config.input_dim);
    NodeId f = ensure_features(t, m.g_w, m.g_b, tgt.x, f_tgt);
    NodeId logp = t.log_softmax_rows(head_logits(t, f, m.c_w, m.c_b, /*detach_head=*/true));
    NodeId plogp = t.mul(t.exp(logp), logp);
    return t.scale(t.sum_all(plogp), -1.0 / tgt.x.rows());
}

}  // namespace graph

// ---------------------------------------------------------------------------
// value-only wrappers
// ---------------------------------------------------------------------------

namespace {

template <typename Build>
double eval_scalar(Build&& build) {
    Tape t;
    return t.scalar(build(t));
}

}  // namespace

double loss_task_source(const SymNet& m, const LabeledBatch& src) {
    return eval_scalar([&](Tape& t) { return graph::loss_task_source(t, bind_params(t, m), src); });
}

double loss_task_target_crossdomain(const SymNet& m, const LabeledBatch& src) {
    return eval_scalar([&](Tape& t) { return graph::loss_task_target_crossdomain(t, bind_params(t, m), src); });
}

double loss_domain_discrimination(const SymNet& m, const LabeledBatch& src, const UnlabeledBatch& tgt) {
    return eval_scalar([&](Tape& t) { return graph::loss_domain_discrimination(t, bind_params(t, m), src, tgt); });
}

double loss_category_confusion(const SymNet& m, const LabeledBatch& src) {
    return eval_scalar([&](Tape& t) { return graph::loss_category_confusion(t, bind_params(t, m), src); });
}

double loss_domain_confusion_target(const SymNet& m, const UnlabeledBatch& tgt) {
    return eval_scalar([&](Tape& t) { return graph::loss_domain_confusion_target(t, bind_params(t, m), tgt); });
}

double loss_entropy_min(const SymNet& m, const UnlabeledBatch& tgt) {
    return eval_scalar([&](Tape& t) { return graph::loss_entropy_min(t, bind_params(t, m), tgt); });
}

double loss_domain_confusion_source_degenerate(const SymNet& m, const LabeledBatch& src) {
    return eval_scalar(
        [&](Tape& t) { return graph::loss_domain_confusion_source_degenerate(t, bind_params(t, m), src); });
}

double loss_two_head_supervised_degenerate(const SymNet& m, const LabeledBatch& src) {
    return eval_scalar(
        [&](Tape& t) { return graph::loss_two_head_supervised_degenerate(t, bind_params(t, m), src); });
}

double baseline_dc_task(const BaselineNet& m, const LabeledBatch& src) {
    return eval_scalar([&](Tape& t) { return graph::baseline_dc_task(t, bind_params(t, m), src); });
}

double baseline_dc_discriminator(const BaselineNet& m, const LabeledBatch& src, const UnlabeledBatch& tgt) {
    return eval_scalar([&](Tape& t) {
        BaselineBinding b = bind_params(t, m);
        check_inputs(src.x, m.config.input_dim);
        check_inputs(tgt.x, m.config.input_dim);
        NodeId f_s = graph::features(t, b.g_w, b.g_b, t.constant(src.x));
        NodeId f_t = graph::features(t, b.g_w, b.g_b, t.constant(tgt.x));
        return graph::baseline_dc_discriminator(t, b, f_s, f_t);
    });
}

double baseline_dc_confusion(const BaselineNet& m, const LabeledBatch& src, const UnlabeledBatch& tgt) {
    return eval_scalar([&](Tape& t) {
        BaselineBinding b = bind_params(t, m);
        check_inputs(src.x, m.config.input_dim);
        check_inputs(tgt.x, m.config.input_dim);
        NodeId f_s = graph::features(t, b.g_w, b.g_b, t.constant(src.x));
        NodeId f_t = graph::features(t, b.g_w, b.g_b, t.constant(tgt.x));
        return graph::baseline_dc_confusion(t, b, f_s, f_t);
    });
}

double baseline_entropy_min(const BaselineNet& m, const UnlabeledBatch& tgt) {
    return eval_scalar([&](Tape& t) { return graph::baseline_entropy_min(t, bind_params(t, m), tgt); });
}

}  // namespace symnet
