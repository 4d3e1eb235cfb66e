#pragma once

#include <map>
#include <string>
#include <vector>

#include "symnet/data.hpp"
#include "symnet/model.hpp"
#include "symnet/tape.hpp"

namespace symnet {

/// Per-tape leaf handles for a SymNet's parameters. Bind once per tape; all
/// losses built on that tape then share the same forward leaves.
struct SymNetBinding {
    const SymNet* model = nullptr;
    std::vector<NodeId> g_w, g_b;
    NodeId cs_w = -1, cs_b = -1, ct_w = -1, ct_b = -1;
    std::map<std::string, NodeId> by_name;
};

struct BaselineBinding {
    const BaselineNet* model = nullptr;
    std::vector<NodeId> g_w, g_b;
    NodeId c_w = -1, c_b = -1, d_w = -1, d_b = -1;
    std::map<std::string, NodeId> by_name;
};

SymNetBinding bind_params(Tape& t, const SymNet& m);
BaselineBinding bind_params(Tape& t, const BaselineNet& m);

namespace graph {

/// G forward on the tape: relu(x W^T + b) through every layer.
NodeId features(Tape& t, const std::vector<NodeId>& g_w, const std::vector<NodeId>& g_b, NodeId x);

/// Head logits f W^T + b. When detach_head is set the parameter leaves are
/// wrapped in detach so they receive exactly zero adjoint while the value
/// and the gradient path into f stay intact.
NodeId head_logits(Tape& t, NodeId f, NodeId w, NodeId b, bool detach_head = false);

// SymNet losses. Each returns a 1x1 node: the batch-mean scalar objective.
// The optional f_src/f_tgt arguments pass an already-built feature node so
// several losses on one tape can share a single G forward; -1 builds one.
NodeId loss_task_source(Tape& t, const SymNetBinding& m, const LabeledBatch& src, NodeId f_src = -1);
NodeId loss_task_target_crossdomain(Tape& t, const SymNetBinding& m, const LabeledBatch& src,
                                    NodeId f_src = -1);
NodeId loss_domain_discrimination(Tape& t, const SymNetBinding& m, const LabeledBatch& src,
                                  const UnlabeledBatch& tgt, NodeId f_src = -1, NodeId f_tgt = -1);
NodeId loss_category_confusion(Tape& t, const SymNetBinding& m, const LabeledBatch& src, NodeId f_src = -1);
NodeId loss_domain_confusion_target(Tape& t, const SymNetBinding& m, const UnlabeledBatch& tgt,
                                    NodeId f_tgt = -1);
NodeId loss_entropy_min(Tape& t, const SymNetBinding& m, const UnlabeledBatch& tgt, NodeId f_tgt = -1);
NodeId loss_domain_confusion_source_degenerate(Tape& t, const SymNetBinding& m, const LabeledBatch& src,
                                               NodeId f_src = -1);
NodeId loss_two_head_supervised_degenerate(Tape& t, const SymNetBinding& m, const LabeledBatch& src,
                                           NodeId f_src = -1);

// Domain-confusion baseline losses.
NodeId baseline_dc_task(Tape& t, const BaselineBinding& m, const LabeledBatch& src, NodeId f_src = -1);
/// Two-way discriminator loss over already-computed feature nodes.
NodeId baseline_dc_discriminator(Tape& t, const BaselineBinding& m, NodeId f_src, NodeId f_tgt);
/// Confusion-to-uniform loss, evaluated literally including its leading
/// half-weighted discriminator term.
NodeId baseline_dc_confusion(Tape& t, const BaselineBinding& m, NodeId f_src, NodeId f_tgt);
/// Entropy of the single task head's predictions on target samples, with the
/// head parameters detached (updates reach only G).
NodeId baseline_entropy_min(Tape& t, const BaselineBinding& m, const UnlabeledBatch& tgt,
                            NodeId f_tgt = -1);

}  // namespace graph

// Value-only wrappers over the graph builders (fresh tape per call).
double loss_task_source(const SymNet& m, const LabeledBatch& src);
double loss_task_target_crossdomain(const SymNet& m, const LabeledBatch& src);
double loss_domain_discrimination(const SymNet& m, const LabeledBatch& src, const UnlabeledBatch& tgt);
double loss_category_confusion(const SymNet& m, const LabeledBatch& src);
double loss_domain_confusion_target(const SymNet& m, const UnlabeledBatch& tgt);
double loss_entropy_min(const SymNet& m, const UnlabeledBatch& tgt);
double loss_domain_confusion_source_degenerate(const SymNet& m, const LabeledBatch& src);
double loss_two_head_supervised_degenerate(const SymNet& m, const LabeledBatch& src);
double baseline_dc_task(const BaselineNet& m, const LabeledBatch& src);
double baseline_dc_discriminator(const BaselineNet& m, const LabeledBatch& src, const UnlabeledBatch& tgt);
double baseline_dc_confusion(const BaselineNet& m, const LabeledBatch& src, const UnlabeledBatch& tgt);
double baseline_entropy_min(const BaselineNet& m, const UnlabeledBatch& tgt);

}  // namespace symnet
