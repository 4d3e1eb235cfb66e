// Times the OpenMP kernels against the serial reference implementations and
// reports GFLOP/s, speedup, and the max element difference between the two.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "symnet/matrix.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using symnet::Matrix;

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.data()[i] - b.data()[i]));
    return d;
}

double time_best_ms(const std::function<Matrix()>& fn, int reps, Matrix& last) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        last = fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void bench(const char* name, double flops, const std::function<Matrix()>& serial,
           const std::function<Matrix()>& parallel, int reps) {
    Matrix ref_out, par_out;
    const double t_ref = time_best_ms(serial, reps, ref_out);
    const double t_par = time_best_ms(parallel, reps, par_out);
    std::printf("%-18s serial %8.3f ms (%6.2f GF/s)   omp %8.3f ms (%6.2f GF/s)   speedup %5.2fx   max|diff| %.3g\n",
                name, t_ref, flops / t_ref * 1e-6, t_par, flops / t_par * 1e-6, t_ref / t_par,
                max_abs_diff(ref_out, par_out));
}

}  // namespace

int main(int argc, char** argv) {
    int size = 384;
    int reps = 5;
    CLI::App app{"serial-vs-OpenMP kernel benchmark"};
    app.add_option("--size", size, "square matrix dimension")->capture_default_str();
    app.add_option("--reps", reps, "repetitions (best time wins)")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    std::printf("threads: %d, size: %d\n", omp_get_max_threads(), size);
#else
    std::printf("threads: 1 (OpenMP disabled), size: %d\n", size);
#endif

    std::mt19937_64 rng(12345);
    const Matrix a = random_matrix(size, size, rng);
    const Matrix b = random_matrix(size, size, rng);
    const double mm_flops = 2.0 * size * size * size;
    const double row_flops = 5.0 * size * size;

    bench("matmul", mm_flops, [&] { return symnet::reference::matmul(a, b); },
          [&] { return symnet::matmul(a, b); }, reps);
    bench("matmul_nt", mm_flops, [&] { return symnet::reference::matmul_nt(a, b); },
          [&] { return symnet::matmul_nt(a, b); }, reps);
    bench("matmul_tn", mm_flops, [&] { return symnet::reference::matmul_tn(a, b); },
          [&] { return symnet::matmul_tn(a, b); }, reps);
    bench("softmax_rows", row_flops, [&] { return symnet::reference::softmax_rows(a); },
          [&] { return symnet::softmax_rows(a); }, reps);
    bench("log_softmax_rows", row_flops, [&] { return symnet::reference::log_softmax_rows(a); },
          [&] { return symnet::log_softmax_rows(a); }, reps);
    bench("logsumexp_rows", row_flops, [&] { return symnet::reference::logsumexp_rows(a); },
          [&] { return symnet::logsumexp_rows(a); }, reps);
    return 0;
}
