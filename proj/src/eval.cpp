#include "symnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace symnet {

namespace {

std::vector<int> argmax_rows(const Matrix& v) {
    std::vector<int> out(v.rows());
    for (int i = 0; i < v.rows(); ++i) {
        int best = 0;
        for (int j = 1; j < v.cols(); ++j) {
            if (v(i, j) > v(i, best)) best = j;  // strict: ties keep the lowest index
        }
        out[i] = best;
    }
    return out;
}

double fraction_correct(const std::vector<int>& pred, const std::vector<int>& labels) {
    int hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == labels[i];
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::vector<int> predict(const SymNet& m, const Matrix& x, EvalHead head) {
    if (head == EvalHead::C) throw std::invalid_argument("predict: SymNet has heads Cs and Ct");
    const Matrix f = forward_features(m.g, x);
    return argmax_rows(logits(head == EvalHead::Cs ? m.cs : m.ct, f));
}

std::vector<int> predict(const BaselineNet& m, const Matrix& x) {
    return argmax_rows(logits(m.c, forward_features(m.g, x)));
}

double accuracy(const SymNet& m, const Dataset& ds, EvalHead head) {
    if (ds.labels.empty() || ds.size() == 0) throw std::invalid_argument("accuracy: dataset has no labels");
    return fraction_correct(predict(m, ds.inputs, head), ds.labels);
}

double accuracy(const BaselineNet& m, const Dataset& ds) {
    if (ds.labels.empty() || ds.size() == 0) throw std::invalid_argument("accuracy: dataset has no labels");
    return fraction_correct(predict(m, ds.inputs), ds.labels);
}

double accuracy(const AnyModel& m, const Dataset& ds, EvalHead head) {
    if (std::holds_alternative<SymNet>(m)) return accuracy(std::get<SymNet>(m), ds, head);
    return accuracy(std::get<BaselineNet>(m), ds);
}

// ---------------------------------------------------------------------------
// ablation driver
// ---------------------------------------------------------------------------

void ExperimentSpec::validate() const {
    if (methods.empty()) throw std::invalid_argument("ExperimentSpec: no methods");
    if (seeds.empty()) throw std::invalid_argument("ExperimentSpec: no seeds");
    std::set<std::uint64_t> uniq(seeds.begin(), seeds.end());
    if (uniq.size() != seeds.size()) throw std::invalid_argument("ExperimentSpec: seeds must be distinct");
}

std::string ResultTable::cells_csv() const {
    std::ostringstream out;
    out << "method,seed,head,src_acc,tgt_acc\n";
    for (const CellResult& c : cells) {
        out << to_string(c.method) << "," << c.seed << "," << c.head << "," << fmt17(c.src_acc) << ","
            << fmt17(c.tgt_acc) << "\n";
    }
    return out.str();
}

std::string ResultTable::aggregate_csv() const {
    std::ostringstream out;
    out << "method,mean_tgt_acc,stderr_tgt_acc\n";
    for (const MethodAggregate& a : aggregates) {
        out << to_string(a.method) << "," << fmt17(a.mean_tgt_acc) << "," << fmt17(a.stderr_tgt_acc) << "\n";
    }
    return out.str();
}

double ResultTable::mean_tgt(Method m) const {
    for (const MethodAggregate& a : aggregates) {
        if (a.method == m) return a.mean_tgt_acc;
    }
    throw std::invalid_argument("ResultTable: method not present");
}

namespace {

const char* head_name(EvalHead h) {
    switch (h) {
        case EvalHead::Cs: return "Cs";
        case EvalHead::Ct: return "Ct";
        case EvalHead::C: return "C";
    }
    throw std::logic_error("bad head");
}

struct CellOutput {
    std::vector<CellResult> rows;
    double reporting_tgt_acc = 0.0;
    TrainReport report;
};

CellOutput run_cell(Method method, std::uint64_t seed, const ExperimentSpec& spec, const Dataset& src,
                    const Dataset& tgt, const std::string& out_dir) {
    TrainOptions opts = spec.base;
    opts.method = method;
    opts.seed = seed;
    TrainOutcome res = train(src, tgt, opts);

    CellOutput cell;
    auto push = [&](EvalHead h) {
        CellResult r{method, seed, head_name(h), accuracy(res.model, res.src_test, h),
                     accuracy(res.model, res.tgt_test, h)};
        if (h == reporting_head(method)) cell.reporting_tgt_acc = r.tgt_acc;
        cell.rows.push_back(r);
    };
    if (is_symnet_method(method)) {
        push(EvalHead::Cs);
        if (symnet_variant(method).task_t) push(EvalHead::Ct);
    } else {
        push(EvalHead::C);
    }

    cell.report = std::move(res.report);

    if (!out_dir.empty()) {
        namespace fs = std::filesystem;
        const fs::path dir = fs::path(out_dir) / to_string(method) / ("seed_" + std::to_string(seed));
        fs::create_directories(dir);
        std::ofstream rep(dir / "report.csv");
        rep << cell.report.to_csv();
        if (std::holds_alternative<SymNet>(res.model)) {
            save_checkpoint(std::get<SymNet>(res.model), (dir / "checkpoint.json").string());
        } else {
            save_checkpoint(std::get<BaselineNet>(res.model), (dir / "checkpoint.json").string());
        }
    }
    return cell;
}

}  // namespace

ResultTable run_ablation(const ExperimentSpec& spec, const Dataset& src, const Dataset& tgt,
                         const std::string& out_dir) {
    spec.validate();
    const int n_methods = static_cast<int>(spec.methods.size());
    const int n_seeds = static_cast<int>(spec.seeds.size());
    const int n_cells = n_methods * n_seeds;
    std::vector<CellOutput> outputs(n_cells);

    // Cells are fully isolated (own model, RNG streams, splits), so the grid
    // is safe to run in parallel; outputs land in fixed slots.
#pragma omp parallel for schedule(dynamic)
    for (int cell = 0; cell < n_cells; ++cell) {
        const Method method = spec.methods[cell / n_seeds];
        const std::uint64_t seed = spec.seeds[cell % n_seeds];
        outputs[cell] = run_cell(method, seed, spec, src, tgt, out_dir);
    }

    ResultTable table;
    for (const CellOutput& c : outputs) {
        table.cells.insert(table.cells.end(), c.rows.begin(), c.rows.end());
    }
    for (int mi = 0; mi < n_methods; ++mi) {
        table.first_seed_reports.emplace_back(spec.methods[mi], outputs[mi * n_seeds].report);
    }
    for (int mi = 0; mi < n_methods; ++mi) {
        double sum = 0.0, sum2 = 0.0;
        for (int si = 0; si < n_seeds; ++si) {
            const double a = outputs[mi * n_seeds + si].reporting_tgt_acc;
            sum += a;
            sum2 += a * a;
        }
        const double mean = sum / n_seeds;
        double stderr_ = 0.0;
        if (n_seeds > 1) {
            const double var = std::max(0.0, (sum2 - n_seeds * mean * mean) / (n_seeds - 1));
            stderr_ = std::sqrt(var / n_seeds);
        }
        table.aggregates.push_back({spec.methods[mi], mean, stderr_});
    }
    return table;
}

// ---------------------------------------------------------------------------
// feature export and convergence curves
// ---------------------------------------------------------------------------

void export_features(const FeatureExtractor& g, const Dataset& ds, const std::string& path) {
    const Matrix f = forward_features(g, ds.inputs);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_features: cannot open '" + path + "' for writing");
    for (int c = 0; c < f.cols(); ++c) out << "f" << c << ",";
    out << "label,domain\n";
    const char* domain = ds.domain_tag == Domain::Source ? "source" : "target";
    for (int i = 0; i < f.rows(); ++i) {
        for (int c = 0; c < f.cols(); ++c) out << fmt17(f(i, c)) << ",";
        out << ds.labels[i] << "," << domain << "\n";
    }
}

void convergence_curves(const std::vector<NamedReport>& reports, const std::string& path) {
    if (reports.empty()) throw std::invalid_argument("convergence_curves: no reports");
    const TrainReport& first = *reports.front().report;
    const int epoch_col = first.column_index("epoch");
    if (epoch_col < 0) throw std::invalid_argument("convergence_curves: report lacks epoch column");
    for (const NamedReport& nr : reports) {
        const TrainReport& r = *nr.report;
        if (r.rows.size() != first.rows.size()) {
            throw std::invalid_argument("convergence_curves: checkpoint grids differ");
        }
        const int ec = r.column_index("epoch");
        for (std::size_t i = 0; i < r.rows.size(); ++i) {
            if (r.rows[i][ec] != first.rows[i][epoch_col]) {
                throw std::invalid_argument("convergence_curves: checkpoint grids differ");
            }
        }
    }

    std::ofstream out(path);
    if (!out) throw std::runtime_error("convergence_curves: cannot open '" + path + "' for writing");
    out << "method,epoch,p,tgt_err_cs,tgt_err_ct,tgt_err_c\n";
    for (const NamedReport& nr : reports) {
        const TrainReport& r = *nr.report;
        const int ec = r.column_index("epoch");
        const int pc = r.column_index("p");
        const int cs = r.column_index("acc_cs_tgt");
        const int ct = r.column_index("acc_ct_tgt");
        const int c = r.column_index("acc_c_tgt");
        for (const auto& row : r.rows) {
            out << nr.method << "," << fmt17(row[ec]) << "," << fmt17(row[pc]) << ",";
            out << (cs >= 0 ? fmt17(1.0 - row[cs]) : "") << ",";
            out << (ct >= 0 ? fmt17(1.0 - row[ct]) : "") << ",";
            out << (c >= 0 ? fmt17(1.0 - row[c]) : "") << "\n";
        }
    }
}

}  // namespace symnet
