#include "symnet/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace symnet {

namespace {

// Below this many multiply-adds the fork/join overhead dominates on the
// small per-step matrices, so the kernels fall back to the serial path.
constexpr long kParallelWorkThreshold = 65536;

void check_dims(int rows, int cols) {
    if (rows < 0 || cols < 0) {
        throw std::invalid_argument("Matrix: negative dimensions");
    }
}

[[noreturn]] void dim_error(const char* op, const Matrix& a, const Matrix& b) {
    throw std::invalid_argument(std::string(op) + ": dimension mismatch (" +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                                std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + ")");
}

}  // namespace

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols) {
    check_dims(rows, cols);
    data_.assign(static_cast<std::size_t>(rows) * cols, 0.0);
}

Matrix::Matrix(int rows, int cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    check_dims(rows, cols);
    if (data_.size() != static_cast<std::size_t>(rows) * cols) {
        throw std::invalid_argument("Matrix: data length does not match rows*cols");
    }
}

Matrix Matrix::filled(int rows, int cols, double v) {
    Matrix m(rows, cols);
    m.fill(v);
    return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
    for (double x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// matmul family
// ---------------------------------------------------------------------------

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) dim_error("matmul", a, b);
    const int m = a.rows(), k = a.cols(), n = b.cols();
    Matrix c(m, n);
    const long work = static_cast<long>(m) * k * n;
#pragma omp parallel for schedule(static) if (work >= kParallelWorkThreshold)
    for (int i = 0; i < m; ++i) {
        double* ci = c.data() + static_cast<std::size_t>(i) * n;
        const double* ai = a.data() + static_cast<std::size_t>(i) * k;
        for (int p = 0; p < k; ++p) {
            const double aip = ai[p];
            const double* bp = b.data() + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) dim_error("matmul_nt", a, b);
    const int m = a.rows(), k = a.cols(), n = b.rows();
    Matrix c(m, n);
    const long work = static_cast<long>(m) * k * n;
#pragma omp parallel for schedule(static) if (work >= kParallelWorkThreshold)
    for (int i = 0; i < m; ++i) {
        const double* ai = a.data() + static_cast<std::size_t>(i) * k;
        double* ci = c.data() + static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const double* bj = b.data() + static_cast<std::size_t>(j) * k;
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
            ci[j] = acc;
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) dim_error("matmul_tn", a, b);
    const int m = a.rows(), k = a.cols(), n = b.cols();
    Matrix c(k, n);
    const long work = static_cast<long>(m) * k * n;
#pragma omp parallel for schedule(static) if (work >= kParallelWorkThreshold)
    for (int i = 0; i < k; ++i) {
        double* ci = c.data() + static_cast<std::size_t>(i) * n;
        for (int p = 0; p < m; ++p) {
            const double api = a(p, i);
            const double* bp = b.data() + static_cast<std::size_t>(p) * n;
            for (int j = 0; j < n; ++j) ci[j] += api * bp[j];
        }
    }
    return c;
}

// ---------------------------------------------------------------------------
// row-wise softmax family
// ---------------------------------------------------------------------------

namespace {

inline double row_max(const double* row, int n) {
    double m = row[0];
    for (int j = 1; j < n; ++j) m = std::max(m, row[j]);
    return m;
}

inline double row_lse(const double* row, int n) {
    const double m = row_max(row, n);
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += std::exp(row[j] - m);
    return m + std::log(s);
}

}  // namespace

Matrix softmax_rows(const Matrix& v) {
    if (v.cols() == 0 || v.rows() == 0) throw std::invalid_argument("softmax_rows: empty input");
    Matrix out(v.rows(), v.cols());
    const int n = v.cols();
    const long work = static_cast<long>(v.rows()) * n;
#pragma omp parallel for schedule(static) if (work >= kParallelWorkThreshold)
    for (int i = 0; i < v.rows(); ++i) {
        const double* row = v.data() + static_cast<std::size_t>(i) * n;
        double* o = out.data() + static_cast<std::size_t>(i) * n;
        const double m = row_max(row, n);
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
            o[j] = std::exp(row[j] - m);
            s += o[j];
        }
        const double inv = 1.0 / s;
        for (int j = 0; j < n; ++j) o[j] *= inv;
    }
    return out;
}

Matrix log_softmax_rows(const Matrix& v) {
    if (v.cols() == 0 || v.rows() == 0) throw std::invalid_argument("log_softmax_rows: empty input");
    Matrix out(v.rows(), v.cols());
    const int n = v.cols();
    const long work = static_cast<long>(v.rows()) * n;
#pragma omp parallel for schedule(static) if (work >= kParallelWorkThreshold)
    for (int i = 0; i < v.rows(); ++i) {
        const double* row = v.data() + static_cast<std::size_t>(i) * n;
        double* o = out.data() + static_cast<std::size_t>(i) * n;
        const double lse = row_lse(row, n);
        for (int j = 0; j < n; ++j) o[j] = row[j] - lse;
    }
    return out;
}

Matrix logsumexp_rows(const Matrix& v) {
    if (v.cols() == 0 || v.rows() == 0) throw std::invalid_argument("logsumexp_rows: empty input");
    Matrix out(v.rows(), 1);
    const int n = v.cols();
    const long work = static_cast<long>(v.rows()) * n;
#pragma omp parallel for schedule(static) if (work >= kParallelWorkThreshold)
    for (int i = 0; i < v.rows(); ++i) {
        out(i, 0) = row_lse(v.data() + static_cast<std::size_t>(i) * n, n);
    }
    return out;
}

// ---------------------------------------------------------------------------
// serial reference kernels
// ---------------------------------------------------------------------------

namespace reference {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) dim_error("reference::matmul", a, b);
    Matrix c(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (int p = 0; p < a.cols(); ++p) acc += a(i, p) * b(p, j);
            c(i, j) = acc;
        }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) dim_error("reference::matmul_nt", a, b);
    Matrix c(a.rows(), b.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < b.rows(); ++j) {
            double acc = 0.0;
            for (int p = 0; p < a.cols(); ++p) acc += a(i, p) * b(j, p);
            c(i, j) = acc;
        }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) dim_error("reference::matmul_tn", a, b);
    Matrix c(a.cols(), b.cols());
    for (int i = 0; i < a.cols(); ++i)
        for (int j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (int p = 0; p < a.rows(); ++p) acc += a(p, i) * b(p, j);
            c(i, j) = acc;
        }
    return c;
}

Matrix softmax_rows(const Matrix& v) {
    Matrix out(v.rows(), v.cols());
    for (int i = 0; i < v.rows(); ++i) {
        double m = v(i, 0);
        for (int j = 1; j < v.cols(); ++j) m = std::max(m, v(i, j));
        double s = 0.0;
        for (int j = 0; j < v.cols(); ++j) {
            out(i, j) = std::exp(v(i, j) - m);
            s += out(i, j);
        }
        for (int j = 0; j < v.cols(); ++j) out(i, j) /= s;
    }
    return out;
}

Matrix log_softmax_rows(const Matrix& v) {
    Matrix out(v.rows(), v.cols());
    for (int i = 0; i < v.rows(); ++i) {
        double m = v(i, 0);
        for (int j = 1; j < v.cols(); ++j) m = std::max(m, v(i, j));
        double s = 0.0;
        for (int j = 0; j < v.cols(); ++j) s += std::exp(v(i, j) - m);
        const double lse = m + std::log(s);
        for (int j = 0; j < v.cols(); ++j) out(i, j) = v(i, j) - lse;
    }
    return out;
}

Matrix logsumexp_rows(const Matrix& v) {
    Matrix out(v.rows(), 1);
    for (int i = 0; i < v.rows(); ++i) {
        double m = v(i, 0);
        for (int j = 1; j < v.cols(); ++j) m = std::max(m, v(i, j));
        double s = 0.0;
        for (int j = 0; j < v.cols(); ++j) s += std::exp(v(i, j) - m);
        out(i, 0) = m + std::log(s);
    }
    return out;
}

}  // namespace reference

// ---------------------------------------------------------------------------
// elementwise helpers
// ---------------------------------------------------------------------------

Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) dim_error("add", a, b);
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] + b.data()[i];
    return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) dim_error("sub", a, b);
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] - b.data()[i];
    return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) dim_error("hadamard", a, b);
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] * b.data()[i];
    return c;
}

Matrix scale(const Matrix& a, double s) {
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] * s;
    return c;
}

Matrix relu(const Matrix& a) {
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] > 0.0 ? a.data()[i] : 0.0;
    return c;
}

Matrix exp_elem(const Matrix& a) {
    Matrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = std::exp(a.data()[i]);
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix c(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) c(j, i) = a(i, j);
    return c;
}

Matrix add_rowvec(const Matrix& a, const Matrix& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) dim_error("add_rowvec", a, row);
    Matrix c(a.rows(), a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + row(0, j);
    return c;
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) dim_error("hconcat", a, b);
    Matrix c(a.rows(), a.cols() + b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
        for (int j = 0; j < b.cols(); ++j) c(i, a.cols() + j) = b(i, j);
    }
    return c;
}

Matrix colsum(const Matrix& a) {
    Matrix c(1, a.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) c(0, j) += a(i, j);
    return c;
}

}  // namespace symnet
