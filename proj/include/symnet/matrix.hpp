#pragma once

#include <cstddef>
#include <vector>

namespace symnet {

/// Dense row-major 2-D array of doubles. Batches are rows everywhere in this
/// codebase; there is deliberately no column-major or strided view support.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols);                          // zero-filled
    Matrix(int rows, int cols, std::vector<double> data);

    static Matrix filled(int rows, int cols, double v);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool empty() const { return data_.empty(); }

    void fill(double v);
    bool all_finite() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

// Parallel kernels. Heavy loops are OpenMP `parallel for` over output rows;
// every output element is produced by exactly one thread with a fixed
// summation order, so results are bit-identical for any thread count.
Matrix matmul(const Matrix& a, const Matrix& b);     // a * b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T * b
Matrix softmax_rows(const Matrix& v);                // max-subtracted, rows sum to 1
Matrix log_softmax_rows(const Matrix& v);            // v_ij - logSumExp(row i)
Matrix logsumexp_rows(const Matrix& v);              // B x 1

// Serial reference implementations of the same kernels, kept as the test
// oracle and as the baseline for the kernel benchmark.
namespace reference {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix matmul_tn(const Matrix& a, const Matrix& b);
Matrix softmax_rows(const Matrix& v);
Matrix log_softmax_rows(const Matrix& v);
Matrix logsumexp_rows(const Matrix& v);
}  // namespace reference

// Cheap elementwise helpers (serial; O(n) work does not pay for a fork/join).
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix relu(const Matrix& a);
Matrix exp_elem(const Matrix& a);
Matrix transpose(const Matrix& a);
Matrix add_rowvec(const Matrix& a, const Matrix& row);  // row is 1 x a.cols
Matrix hconcat(const Matrix& a, const Matrix& b);
Matrix colsum(const Matrix& a);  // 1 x cols

}  // namespace symnet
