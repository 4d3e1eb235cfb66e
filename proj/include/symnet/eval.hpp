#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "symnet/data.hpp"
#include "symnet/model.hpp"
#include "symnet/training.hpp"

namespace symnet {

/// Argmax class predictions; ties resolve to the lowest category index.
std::vector<int> predict(const SymNet& m, const Matrix& x, EvalHead head);
std::vector<int> predict(const BaselineNet& m, const Matrix& x);

double accuracy(const SymNet& m, const Dataset& ds, EvalHead head);
double accuracy(const BaselineNet& m, const Dataset& ds);
double accuracy(const AnyModel& m, const Dataset& ds, EvalHead head);

struct ExperimentSpec {
    std::vector<Method> methods;
    std::vector<std::uint64_t> seeds;  // nonempty, distinct
    TrainOptions base;                 // method/seed overridden per cell

    void validate() const;
};

struct CellResult {
    Method method;
    std::uint64_t seed;
    std::string head;  // "Cs", "Ct", or "C"
    double src_acc;
    double tgt_acc;
};

struct MethodAggregate {
    Method method;
    double mean_tgt_acc;
    double stderr_tgt_acc;  // standard error over seeds
};

struct ResultTable {
    std::vector<CellResult> cells;          // one row per (method, seed, available head)
    std::vector<MethodAggregate> aggregates;  // over each method's reporting head
    std::vector<std::pair<Method, TrainReport>> first_seed_reports;  // for convergence curves

    std::string cells_csv() const;      // method,seed,head,src_acc,tgt_acc
    std::string aggregate_csv() const;  // method,mean_tgt_acc,stderr_tgt_acc

    double mean_tgt(Method m) const;
};

/// Trains every (method, seed) cell and aggregates final accuracies. Cells
/// are independent and run in parallel; when out_dir is nonempty each cell's
/// raw TrainReport and final checkpoint are persisted under
/// out_dir/<method>/seed_<s>/.
ResultTable run_ablation(const ExperimentSpec& spec, const Dataset& src, const Dataset& tgt,
                         const std::string& out_dir = "");

/// CSV of G outputs: f0,...,f{d-1},label,domain.
void export_features(const FeatureExtractor& g, const Dataset& ds, const std::string& path);

/// Merged per-checkpoint target-test error curves, one row per checkpoint per
/// method. Symnet rows carry both per-head error columns.
struct NamedReport {
    std::string method;
    const TrainReport* report;
};
void convergence_curves(const std::vector<NamedReport>& reports, const std::string& path);

}  // namespace symnet
