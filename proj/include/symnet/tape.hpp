#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "symnet/matrix.hpp"

namespace symnet {

using NodeId = int;

/// Which training group a parameter leaf belongs to. Every trainable leaf is
/// in exactly one group; updates are applied per group.
enum class ParamGroup : std::uint8_t { FeatureExtractor, Classifiers, Discriminator };

/// Append-only reverse-mode tape. Nodes are created in topological order, so
/// the backward pass is a single reverse sweep that visits each node once.
/// A tape instance is single-threaded; independent tapes may run concurrently.
class Tape {
public:
    enum class Op : std::uint8_t {
        Leaf,
        MatMul,          // a * b
        MatMulNT,        // a * b^T
        Add,
        Sub,
        AddRowVec,       // a + broadcast row bias
        Mul,             // elementwise
        Scale,           // a * aux
        Relu,            // max(0, a); gradient 0 at exactly 0
        Exp,
        Log,             // log(max(a, 1e-300)); zero gradient below the floor
        ConcatCols,
        AddHalves,       // [B x 2K] -> [B x K], left half + right half
        LogSoftmaxRows,
        LogSumExpRows,   // [B x C] -> [B x 1]
        SumAll,          // -> 1 x 1
        Detach,          // identity value, blocks adjoint flow
    };

    NodeId leaf(Matrix value, bool requires_grad = true);
    NodeId constant(Matrix value) { return leaf(std::move(value), false); }

    NodeId matmul(NodeId a, NodeId b);
    NodeId matmul_nt(NodeId a, NodeId b);
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId add_rowvec(NodeId a, NodeId bias);
    NodeId mul(NodeId a, NodeId b);
    NodeId scale(NodeId a, double s);
    NodeId relu(NodeId a);
    NodeId exp(NodeId a);
    NodeId log(NodeId a);
    NodeId concat_cols(NodeId a, NodeId b);
    NodeId add_halves(NodeId a);
    NodeId log_softmax_rows(NodeId a);
    NodeId logsumexp_rows(NodeId a);
    NodeId sum_all(NodeId a);
    NodeId detach(NodeId a);

    /// mean of all entries, as a 1x1 node
    NodeId mean_all(NodeId a);

    const Matrix& value(NodeId id) const { return nodes_[id].value; }
    double scalar(NodeId id) const;

    /// Runs reverse-mode accumulation from a 1x1 loss node. Leaves not on any
    /// path to the loss keep a zero adjoint. May be called repeatedly; each
    /// call recomputes adjoints from scratch.
    void backward(NodeId loss);

    /// Adjoint of a node after backward(); zeros if the node was unreachable.
    const Matrix& grad(NodeId id);

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;  // empty until touched by backward
        Op op = Op::Leaf;
        NodeId a = -1;
        NodeId b = -1;
        double aux = 0.0;
        bool requires_grad = false;
    };

    NodeId push(Node n);
    Matrix& grad_buf(NodeId id);
    void check_id(NodeId id) const;

    std::vector<Node> nodes_;
};

/// Central finite-difference check of an analytic gradient.
///
/// `f(grads)` evaluates the scalar under the current parameter values; when
/// `grads` is non-null it must also write d(f)/d(param) for each entry of
/// `params`, in order and shape-aligned. Returns the max over coordinates of
/// |analytic - central| / max(1, |central|).
double grad_check(const std::function<double(std::vector<Matrix>*)>& f,
                  std::span<Matrix* const> params, double step);

}  // namespace symnet
