#include "symnet/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "symnet/rng.hpp"

namespace symnet {

void Dataset::validate() const {
    const int n = size();
    if (static_cast<int>(labels.size()) != n) {
        throw std::invalid_argument("Dataset: label count does not match row count");
    }
    if (num_categories < 1) throw std::invalid_argument("Dataset: num_categories must be >= 1");
    if (n < num_categories) throw std::invalid_argument("Dataset: fewer samples than categories");
    std::vector<int> seen(num_categories, 0);
    for (int y : labels) {
        if (y < 0 || y >= num_categories) {
            throw std::invalid_argument("Dataset: label " + std::to_string(y) + " outside [0, K)");
        }
        seen[y] = 1;
    }
    for (int k = 0; k < num_categories; ++k) {
        if (!seen[k]) throw std::invalid_argument("Dataset: category " + std::to_string(k) + " missing");
    }
}

Dataset gen_two_moons(int n, double noise_std, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("gen_two_moons: need n >= 2");
    if (noise_std < 0.0) throw std::invalid_argument("gen_two_moons: negative noise_std");
    const int n0 = (n + 1) / 2;
    const int n1 = n - n0;
    std::mt19937_64 rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    Dataset ds;
    ds.inputs = Matrix(n, 2);
    ds.labels.resize(n);
    ds.num_categories = 2;
    ds.domain_tag = Domain::Source;

    auto angle = [](int i, int m) {
        return m > 1 ? std::numbers::pi * i / (m - 1) : 0.0;
    };
    for (int i = 0; i < n0; ++i) {
        const double t = angle(i, n0);
        ds.inputs(i, 0) = std::cos(t) + noise_std * noise(rng);
        ds.inputs(i, 1) = std::sin(t) + noise_std * noise(rng);
        ds.labels[i] = 0;
    }
    for (int i = 0; i < n1; ++i) {
        const double t = angle(i, n1);
        ds.inputs(n0 + i, 0) = 1.0 - std::cos(t) + noise_std * noise(rng);
        ds.inputs(n0 + i, 1) = 0.5 - std::sin(t) + noise_std * noise(rng);
        ds.labels[n0 + i] = 1;
    }
    return ds;
}

Dataset gen_blobs(int k, int dim, int n, double separation, double noise_std, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("gen_blobs: need k >= 2");
    if (dim < 2) throw std::invalid_argument("gen_blobs: need dim >= 2");
    if (n < k) throw std::invalid_argument("gen_blobs: need n >= k");
    if (separation <= 0.0) throw std::invalid_argument("gen_blobs: separation must be positive");
    if (noise_std < 0.0) throw std::invalid_argument("gen_blobs: negative noise_std");

    // Centers on a circle in the first two coordinates; the adjacent-center
    // chord is exactly `separation`, so all pairwise distances are >= it.
    const double radius = separation / (2.0 * std::sin(std::numbers::pi / k));
    std::vector<std::vector<double>> centers(k, std::vector<double>(dim, 0.0));
    for (int j = 0; j < k; ++j) {
        const double a = 2.0 * std::numbers::pi * j / k;
        centers[j][0] = radius * std::cos(a);
        centers[j][1] = radius * std::sin(a);
    }

    std::mt19937_64 rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    Dataset ds;
    ds.inputs = Matrix(n, dim);
    ds.labels.resize(n);
    ds.num_categories = k;
    ds.domain_tag = Domain::Source;

    int row = 0;
    for (int cls = 0; cls < k; ++cls) {
        const int count = n / k + (cls < n % k ? 1 : 0);
        for (int i = 0; i < count; ++i, ++row) {
            for (int c = 0; c < dim; ++c) {
                ds.inputs(row, c) = centers[cls][c] + noise_std * noise(rng);
            }
            ds.labels[row] = cls;
        }
    }
    return ds;
}

Dataset apply_shift(const Dataset& ds, const ShiftSpec& spec, std::uint64_t seed) {
    if (spec.scale <= 0.0) throw std::invalid_argument("apply_shift: scale must be positive");
    if (spec.noise_std < 0.0) throw std::invalid_argument("apply_shift: negative noise_std");
    if (static_cast<int>(spec.translation.size()) > ds.dim()) {
        throw std::invalid_argument("apply_shift: translation longer than input dim");
    }
    if (ds.dim() < 2) throw std::invalid_argument("apply_shift: rotation needs at least 2 coordinates");

    const double c = std::cos(spec.rotation);
    const double s = std::sin(spec.rotation);
    std::vector<double> shift(ds.dim(), 0.0);
    std::copy(spec.translation.begin(), spec.translation.end(), shift.begin());

    std::mt19937_64 rng = make_rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    Dataset out = ds;
    out.domain_tag = Domain::Target;
    for (int i = 0; i < ds.size(); ++i) {
        const double x0 = ds.inputs(i, 0);
        const double x1 = ds.inputs(i, 1);
        out.inputs(i, 0) = c * x0 - s * x1;
        out.inputs(i, 1) = s * x0 + c * x1;
        for (int j = 0; j < ds.dim(); ++j) {
            out.inputs(i, j) = spec.scale * out.inputs(i, j) + shift[j] + spec.noise_std * noise(rng);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// paired mini-batch sampling
// ---------------------------------------------------------------------------

PairSampler::PairSampler(const Dataset& src, const Dataset& tgt, int batch_size, std::uint64_t seed)
    : src_(&src), tgt_(&tgt), batch_size_(batch_size), rng_(make_rng(seed)) {
    if (batch_size < 1) throw std::invalid_argument("PairSampler: batch_size must be >= 1");
    if (batch_size > std::min(src.size(), tgt.size())) {
        throw std::invalid_argument("PairSampler: batch_size exceeds a dataset size");
    }
    src_stream_.order.resize(src.size());
    tgt_stream_.order.resize(tgt.size());
    for (int i = 0; i < src.size(); ++i) src_stream_.order[i] = i;
    for (int i = 0; i < tgt.size(); ++i) tgt_stream_.order[i] = i;
    std::shuffle(src_stream_.order.begin(), src_stream_.order.end(), rng_);
    std::shuffle(tgt_stream_.order.begin(), tgt_stream_.order.end(), rng_);
}

std::vector<int> PairSampler::take(Stream& s, int want) {
    if (s.cursor == s.order.size()) {
        std::shuffle(s.order.begin(), s.order.end(), rng_);
        s.cursor = 0;
    }
    const int avail = static_cast<int>(s.order.size() - s.cursor);
    const int count = std::min(want, avail);
    std::vector<int> out(s.order.begin() + s.cursor, s.order.begin() + s.cursor + count);
    s.cursor += count;
    return out;
}

std::pair<LabeledBatch, UnlabeledBatch> PairSampler::sample_pair() {
    const std::vector<int> si = take(src_stream_, batch_size_);
    const std::vector<int> ti = take(tgt_stream_, batch_size_);

    LabeledBatch lb;
    lb.x = Matrix(static_cast<int>(si.size()), src_->dim());
    lb.y.resize(si.size());
    for (std::size_t r = 0; r < si.size(); ++r) {
        for (int c = 0; c < src_->dim(); ++c) lb.x(static_cast<int>(r), c) = src_->inputs(si[r], c);
        lb.y[r] = src_->labels[si[r]];
    }
    UnlabeledBatch ub;
    ub.x = Matrix(static_cast<int>(ti.size()), tgt_->dim());
    for (std::size_t r = 0; r < ti.size(); ++r) {
        for (int c = 0; c < tgt_->dim(); ++c) ub.x(static_cast<int>(r), c) = tgt_->inputs(ti[r], c);
    }
    return {std::move(lb), std::move(ub)};
}

int PairSampler::steps_per_epoch() const {
    return (src_->size() + batch_size_ - 1) / batch_size_;
}

// ---------------------------------------------------------------------------
// CSV persistence
// ---------------------------------------------------------------------------

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

[[noreturn]] void parse_error(const std::string& path, int line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& s, const std::string& path, int line_no) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') parse_error(path, line_no, "bad numeric field '" + s + "'");
    return v;
}

int parse_label(const std::string& s, const std::string& path, int line_no) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') parse_error(path, line_no, "bad label field '" + s + "'");
    if (v < 0) parse_error(path, line_no, "label " + s + " outside [0, K)");
    return static_cast<int>(v);
}

}  // namespace

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv: cannot open '" + path + "' for writing");
    for (int c = 0; c < ds.dim(); ++c) out << "x" << c << ",";
    out << "label,domain\n";
    const char* domain = ds.domain_tag == Domain::Source ? "source" : "target";
    for (int i = 0; i < ds.size(); ++i) {
        for (int c = 0; c < ds.dim(); ++c) out << fmt17(ds.inputs(i, c)) << ",";
        out << ds.labels[i] << "," << domain << "\n";
    }
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) parse_error(path, 1, "empty file");
    const std::vector<std::string> header = split_line(line);
    if (header.size() < 3) parse_error(path, 1, "header needs x0,...,label,domain");
    const int dim = static_cast<int>(header.size()) - 2;
    for (int c = 0; c < dim; ++c) {
        if (header[c] != "x" + std::to_string(c)) parse_error(path, 1, "unexpected header column '" + header[c] + "'");
    }
    if (header[dim] != "label" || header[dim + 1] != "domain") {
        parse_error(path, 1, "header must end with label,domain");
    }

    std::vector<double> values;
    std::vector<int> labels;
    bool any_target = false, any_source = false;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::vector<std::string> f = split_line(line);
        if (static_cast<int>(f.size()) != dim + 2) {
            parse_error(path, line_no, "expected " + std::to_string(dim + 2) + " columns, got " +
                                           std::to_string(f.size()));
        }
        for (int c = 0; c < dim; ++c) values.push_back(parse_double(f[c], path, line_no));
        labels.push_back(parse_label(f[dim], path, line_no));
        if (f[dim + 1] == "source") any_source = true;
        else if (f[dim + 1] == "target") any_target = true;
        else parse_error(path, line_no, "domain must be 'source' or 'target', got '" + f[dim + 1] + "'");
    }
    if (labels.empty()) parse_error(path, line_no, "no data rows");
    if (any_source && any_target) parse_error(path, line_no, "mixed domain tags in one file");

    Dataset ds;
    const int n = static_cast<int>(labels.size());
    ds.inputs = Matrix(n, dim, std::move(values));
    ds.labels = std::move(labels);
    ds.domain_tag = any_target ? Domain::Target : Domain::Source;
    ds.num_categories = *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
    ds.validate();
    return ds;
}

std::pair<Dataset, Dataset> split_holdout(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("split_holdout: test_fraction must be in (0, 1)");
    }
    ds.validate();
    std::vector<std::vector<int>> by_class(ds.num_categories);
    for (int i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

    std::mt19937_64 rng = make_rng(seed);
    std::vector<int> train_idx, test_idx;
    for (auto& idx : by_class) {
        if (idx.size() < 2) throw std::invalid_argument("split_holdout: need >= 2 samples per class");
        std::shuffle(idx.begin(), idx.end(), rng);
        int n_test = static_cast<int>(std::lround(test_fraction * static_cast<double>(idx.size())));
        n_test = std::clamp(n_test, 1, static_cast<int>(idx.size()) - 1);
        test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + n_test);
        train_idx.insert(train_idx.end(), idx.begin() + n_test, idx.end());
    }

    auto gather = [&](const std::vector<int>& rows) {
        Dataset out;
        out.inputs = Matrix(static_cast<int>(rows.size()), ds.dim());
        out.labels.resize(rows.size());
        out.domain_tag = ds.domain_tag;
        out.num_categories = ds.num_categories;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (int c = 0; c < ds.dim(); ++c) out.inputs(static_cast<int>(r), c) = ds.inputs(rows[r], c);
            out.labels[r] = ds.labels[rows[r]];
        }
        return out;
    };
    return {gather(train_idx), gather(test_idx)};
}

}  // namespace symnet
