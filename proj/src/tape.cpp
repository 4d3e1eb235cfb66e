#include "symnet/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace symnet {

namespace {
constexpr double kLogFloor = 1e-300;
}

NodeId Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::check_id(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
        throw std::invalid_argument("Tape: invalid node id");
    }
}

NodeId Tape::leaf(Matrix value, bool requires_grad) {
    Node n;
    n.value = std::move(value);
    n.op = Op::Leaf;
    n.requires_grad = requires_grad;
    return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    Node n;
    n.value = symnet::matmul(nodes_[a].value, nodes_[b].value);
    n.op = Op::MatMul;
    n.a = a;
    n.b = b;
    n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
    return push(std::move(n));
}

NodeId Tape::matmul_nt(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    Node n;
    n.value = symnet::matmul_nt(nodes_[a].value, nodes_[b].value);
    n.op = Op::MatMulNT;
    n.a = a;
    n.b = b;
    n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
    return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    Node n;
    n.value = symnet::add(nodes_[a].value, nodes_[b].value);
    n.op = Op::Add;
    n.a = a;
    n.b = b;
    n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
    return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    Node n;
    n.value = symnet::sub(nodes_[a].value, nodes_[b].value);
    n.op = Op::Sub;
    n.a = a;
    n.b = b;
    n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
    return push(std::move(n));
}

NodeId Tape::add_rowvec(NodeId a, NodeId bias) {
    check_id(a);
    check_id(bias);
    Node n;
    n.value = symnet::add_rowvec(nodes_[a].value, nodes_[bias].value);
    n.op = Op::AddRowVec;
    n.a = a;
    n.b = bias;
    n.requires_grad = nodes_[a].requires_grad || nodes_[bias].requires_grad;
    return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    Node n;
    n.value = symnet::hadamard(nodes_[a].value, nodes_[b].value);
    n.op = Op::Mul;
    n.a = a;
    n.b = b;
    n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
    return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double s) {
    check_id(a);
    Node n;
    n.value = symnet::scale(nodes_[a].value, s);
    n.op = Op::Scale;
    n.a = a;
    n.aux = s;
    n.requires_grad = nodes_[a].requires_grad;
    return push(std::move(n));
}

NodeId Tape::relu(NodeId a) {
    check_id(a);
    Node n;
    n.value = symnet::relu(nodes_[a].value);
    n.op = Op::Relu;
    n.a = a;
    n.requires_grad = nodes_[a].requires_grad;
    return push(std::move(n));
}

NodeId Tape::exp(NodeId a) {
    check_id(a);
    Node n;
    n.value = exp_elem(nodes_[a].value);
    n.op = Op::Exp;
    n.a = a;
    n.requires_grad = nodes_[a].requires_grad;
    return push(std::move(n));
}

NodeId Tape::log(NodeId a) {
    check_id(a);
    const Matrix& x = nodes_[a].value;
    Matrix v(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        v.data()[i] = std::log(x.data()[i] > kLogFloor ? x.data()[i] : kLogFloor);
    }
    Node n;
    n.value = std::move(v);
    n.op = Op::Log;
    n.a = a;
    n.requires_grad = nodes_[a].requires_grad;
    return push(std::move(n));
}

NodeId Tape::concat_cols(NodeId a, NodeId b) {
    check_id(a);
    check_id(b);
    Node n;
    n.value = hconcat(nodes_[a].value, nodes_[b].value);
    n.op = Op::ConcatCols;
    n.a = a;
    n.b = b;
    n.aux = nodes_[a].value.cols();  // split point
    n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
    return push(std::move(n));
}

NodeId Tape::add_halves(NodeId a) {
    check_id(a);
    const Matrix& x = nodes_[a].value;
    if (x.cols() % 2 != 0) throw std::invalid_argument("add_halves: odd column count");
    const int k = x.cols() / 2;
    Matrix v(x.rows(), k);
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < k; ++j) v(i, j) = x(i, j) + x(i, j + k);
    Node n;
    n.value = std::move(v);
    n.op = Op::AddHalves;
    n.a = a;
    n.requires_grad = nodes_[a].requires_grad;
    return push(std::move(n));
}

NodeId Tape::log_softmax_rows(NodeId a) {
    check_id(a);
    Node n;
    n.value = symnet::log_softmax_rows(nodes_[a].value);
    n.op = Op::LogSoftmaxRows;
    n.a = a;
    n.requires_grad = nodes_[a].requires_grad;
    return push(std::move(n));
}

NodeId Tape::logsumexp_rows(NodeId a) {
    check_id(a);
    Node n;
    n.value = symnet::logsumexp_rows(nodes_[a].value);
    n.op = Op::LogSumExpRows;
    n.a = a;
    n.requires_grad = nodes_[a].requires_grad;
    return push(std::move(n));
}

NodeId Tape::sum_all(NodeId a) {
    check_id(a);
    const Matrix& x = nodes_[a].value;
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x.data()[i];
    Matrix v(1, 1);
    v(0, 0) = s;
    Node n;
    n.value = std::move(v);
    n.op = Op::SumAll;
    n.a = a;
    n.requires_grad = nodes_[a].requires_grad;
    return push(std::move(n));
}

NodeId Tape::detach(NodeId a) {
    check_id(a);
    Node n;
    n.value = nodes_[a].value;  // bit-identical copy
    n.op = Op::Detach;
    n.a = a;
    n.requires_grad = false;
    return push(std::move(n));
}

NodeId Tape::mean_all(NodeId a) {
    check_id(a);
    const auto numel = nodes_[a].value.size();
    if (numel == 0) throw std::invalid_argument("mean_all: empty input");
    return scale(sum_all(a), 1.0 / static_cast<double>(numel));
}

double Tape::scalar(NodeId id) const {
    check_id(id);
    const Matrix& v = nodes_[id].value;
    if (v.rows() != 1 || v.cols() != 1) throw std::invalid_argument("scalar: node is not 1x1");
    return v(0, 0);
}

Matrix& Tape::grad_buf(NodeId id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
    return n.grad;
}

const Matrix& Tape::grad(NodeId id) {
    check_id(id);
    return grad_buf(id);
}

void Tape::backward(NodeId loss) {
    check_id(loss);
    const Matrix& lv = nodes_[loss].value;
    if (lv.rows() != 1 || lv.cols() != 1) {
        throw std::invalid_argument("backward: loss must be a 1x1 scalar node");
    }
    for (Node& n : nodes_) n.grad = Matrix();
    grad_buf(loss)(0, 0) = 1.0;

    for (NodeId id = loss; id >= 0; --id) {
        Node& n = nodes_[id];
        if (n.grad.empty() || !n.requires_grad) continue;
        const Matrix& g = n.grad;
        switch (n.op) {
            case Op::Leaf:
            case Op::Detach:
                break;
            case Op::MatMul: {
                if (nodes_[n.a].requires_grad) {
                    Matrix da = symnet::matmul_nt(g, nodes_[n.b].value);
                    Matrix& acc = grad_buf(n.a);
                    acc = symnet::add(acc, da);
                }
                if (nodes_[n.b].requires_grad) {
                    Matrix db = symnet::matmul_tn(nodes_[n.a].value, g);
                    Matrix& acc = grad_buf(n.b);
                    acc = symnet::add(acc, db);
                }
                break;
            }
            case Op::MatMulNT: {
                if (nodes_[n.a].requires_grad) {
                    Matrix da = symnet::matmul(g, nodes_[n.b].value);
                    Matrix& acc = grad_buf(n.a);
                    acc = symnet::add(acc, da);
                }
                if (nodes_[n.b].requires_grad) {
                    Matrix db = symnet::matmul_tn(g, nodes_[n.a].value);
                    Matrix& acc = grad_buf(n.b);
                    acc = symnet::add(acc, db);
                }
                break;
            }
            case Op::Add: {
                if (nodes_[n.a].requires_grad) {
                    Matrix& acc = grad_buf(n.a);
                    acc = symnet::add(acc, g);
                }
                if (nodes_[n.b].requires_grad) {
                    Matrix& acc = grad_buf(n.b);
                    acc = symnet::add(acc, g);
                }
                break;
            }
            case Op::Sub: {
                if (nodes_[n.a].requires_grad) {
                    Matrix& acc = grad_buf(n.a);
                    acc = symnet::add(acc, g);
                }
                if (nodes_[n.b].requires_grad) {
                    Matrix& acc = grad_buf(n.b);
                    acc = symnet::sub(acc, g);
                }
                break;
            }
            case Op::AddRowVec: {
                if (nodes_[n.a].requires_grad) {
                    Matrix& acc = grad_buf(n.a);
                    acc = symnet::add(acc, g);
                }
                if (nodes_[n.b].requires_grad) {
                    Matrix& acc = grad_buf(n.b);
                    acc = symnet::add(acc, colsum(g));
                }
                break;
            }
            case Op::Mul: {
                if (nodes_[n.a].requires_grad) {
                    Matrix& acc = grad_buf(n.a);
                    acc = symnet::add(acc, hadamard(g, nodes_[n.b].value));
                }
                if (nodes_[n.b].requires_grad) {
                    Matrix& acc = grad_buf(n.b);
                    acc = symnet::add(acc, hadamard(g, nodes_[n.a].value));
                }
                break;
            }
            case Op::Scale: {
                Matrix& acc = grad_buf(n.a);
                acc = symnet::add(acc, symnet::scale(g, n.aux));
                break;
            }
            case Op::Relu: {
                const Matrix& x = nodes_[n.a].value;
                Matrix da(x.rows(), x.cols());
                for (std::size_t i = 0; i < x.size(); ++i) {
                    da.data()[i] = x.data()[i] > 0.0 ? g.data()[i] : 0.0;
                }
                Matrix& acc = grad_buf(n.a);
                acc = symnet::add(acc, da);
                break;
            }
            case Op::Exp: {
                Matrix& acc = grad_buf(n.a);
                acc = symnet::add(acc, hadamard(g, n.value));
                break;
            }
            case Op::Log: {
                const Matrix& x = nodes_[n.a].value;
                Matrix da(x.rows(), x.cols());
                for (std::size_t i = 0; i < x.size(); ++i) {
                    da.data()[i] = x.data()[i] > kLogFloor ? g.data()[i] / x.data()[i] : 0.0;
                }
                Matrix& acc = grad_buf(n.a);
                acc = symnet::add(acc, da);
                break;
            }
            case Op::ConcatCols: {
                const int split = static_cast<int>(n.aux);
                if (nodes_[n.a].requires_grad) {
                    Matrix& acc = grad_buf(n.a);
                    for (int i = 0; i < g.rows(); ++i)
                        for (int j = 0; j < split; ++j) acc(i, j) += g(i, j);
                }
                if (nodes_[n.b].requires_grad) {
                    Matrix& acc = grad_buf(n.b);
                    for (int i = 0; i < g.rows(); ++i)
                        for (int j = 0; j < acc.cols(); ++j) acc(i, j) += g(i, split + j);
                }
                break;
            }
            case Op::AddHalves: {
                Matrix& acc = grad_buf(n.a);
                const int k = n.value.cols();
                for (int i = 0; i < g.rows(); ++i)
                    for (int j = 0; j < k; ++j) {
                        acc(i, j) += g(i, j);
                        acc(i, j + k) += g(i, j);
                    }
                break;
            }
            case Op::LogSoftmaxRows: {
                // y = x - lse(x);  dx = dy - softmax(x) * rowsum(dy)
                Matrix& acc = grad_buf(n.a);
                for (int i = 0; i < g.rows(); ++i) {
                    double rs = 0.0;
                    for (int j = 0; j < g.cols(); ++j) rs += g(i, j);
                    for (int j = 0; j < g.cols(); ++j) {
                        acc(i, j) += g(i, j) - std::exp(n.value(i, j)) * rs;
                    }
                }
                break;
            }
            case Op::LogSumExpRows: {
                // y_i = lse(x_i,:);  dx_ij = exp(x_ij - y_i) * dy_i
                const Matrix& x = nodes_[n.a].value;
                Matrix& acc = grad_buf(n.a);
                for (int i = 0; i < x.rows(); ++i) {
                    const double gi = g(i, 0);
                    for (int j = 0; j < x.cols(); ++j) {
                        acc(i, j) += std::exp(x(i, j) - n.value(i, 0)) * gi;
                    }
                }
                break;
            }
            case Op::SumAll: {
                const double gs = g(0, 0);
                Matrix& acc = grad_buf(n.a);
                for (std::size_t i = 0; i < acc.size(); ++i) acc.data()[i] += gs;
                break;
            }
        }
    }
}

double grad_check(const std::function<double(std::vector<Matrix>*)>& f,
                  std::span<Matrix* const> params, double step) {
    if (step <= 0.0) throw std::invalid_argument("grad_check: step must be positive");
    std::vector<Matrix> analytic;
    f(&analytic);
    if (analytic.size() != params.size()) {
        throw std::invalid_argument("grad_check: gradient count does not match parameter count");
    }
    double max_err = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Matrix& w = *params[p];
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double saved = w.data()[i];
            w.data()[i] = saved + step;
            const double fp = f(nullptr);
            w.data()[i] = saved - step;
            const double fm = f(nullptr);
            w.data()[i] = saved;
            const double central = (fp - fm) / (2.0 * step);
            const double err = std::abs(analytic[p].data()[i] - central) / std::max(1.0, std::abs(central));
            max_err = std::max(max_err, err);
        }
    }
    return max_err;
}

}  // namespace symnet
