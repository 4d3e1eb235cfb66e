#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "symnet/data.hpp"
#include "symnet/losses.hpp"
#include "symnet/model.hpp"

namespace symnet {

struct ScheduleConfig {
    double eta0 = 0.01;
    double alpha = 10.0;
    double beta = 0.75;
    double gamma = 10.0;
    double momentum = 0.9;
    int batch_size = 128;
    double classifier_lr_multiplier = 10.0;
    int total_epochs = 200;
    double fixed_lambda = -1.0;  // >= 0 pins lambda instead of the schedule

    void validate() const;
};

/// Annealed learning rate eta0 / (1 + alpha p)^beta for progress p in [0,1].
double lr_at(double p, const ScheduleConfig& cfg);

/// Confusion trade-off 2 / (1 + exp(-gamma p)) - 1, rising from 0 toward 1.
double lambda_at(double p, const ScheduleConfig& cfg);

double effective_lambda(double p, const ScheduleConfig& cfg);

/// Classical momentum: v <- momentum v + grad; param <- param - lr v.
void sgd_step(Matrix& param, const Matrix& grad, Matrix& velocity, double lr, double momentum);

struct OptimizerState {
    std::map<std::string, Matrix> velocity;
    Matrix& vel(const std::string& name, int rows, int cols);
};

enum class Method {
    SourceOnly,
    SourceOnlyEm,
    DomainConfusion,
    DomainConfusionEm,
    Symnet,
    SymnetWoEtaskT,
    SymnetWoM,
    SymnetWoConfusion,
    SymnetWoCategoryConfusion,
};

std::string to_string(Method m);
Method method_from_string(const std::string& s);
std::vector<Method> all_methods();
bool is_symnet_method(Method m);

/// Which classifier's accuracy a method reports (C^t by default; C^s when the
/// cross-domain task loss is ablated; the single head for baselines).
enum class EvalHead { Cs, Ct, C };
EvalHead reporting_head(Method m);

/// Which loss the feature-extractor update uses in place of the category
/// confusion term.
enum class CategoryTermKind { PairConfusion, DomainConfusionSource, SupervisedTwoHead };

struct SymNetVariant {
    bool task_t = true;                 // cross-domain loss on C^t in the classifier phase
    CategoryTermKind category = CategoryTermKind::PairConfusion;
    bool domain_confusion_tgt = true;   // target-side domain confusion in the G phase
    bool entropy = true;                // category-marginal entropy in the G phase
};
SymNetVariant symnet_variant(Method m);

struct BaselineVariant {
    bool adversarial = false;  // discriminator + confusion phases
    bool entropy = false;
};
BaselineVariant baseline_variant(Method m);

/// Scalar values of the loss terms evaluated in one update, keyed by their
/// report column names.
struct StepLosses {
    std::vector<std::pair<std::string, double>> terms;
};

// The two halves of a SymNet iteration. Each runs its own forward pass; the
// classifier phase touches only C^s/C^t parameters (plus G when
// update_extractor is set) and the extractor phase touches only G.
StepLosses classifier_update(SymNet& m, OptimizerState& opt, const LabeledBatch& src,
                             const UnlabeledBatch& tgt, double p, const ScheduleConfig& cfg,
                             const SymNetVariant& variant, bool update_extractor = false);
StepLosses extractor_update(SymNet& m, OptimizerState& opt, const LabeledBatch& src,
                            const UnlabeledBatch& tgt, double p, const ScheduleConfig& cfg,
                            const SymNetVariant& variant);
StepLosses symnet_step(SymNet& m, OptimizerState& opt, const LabeledBatch& src, const UnlabeledBatch& tgt,
                       double p, const ScheduleConfig& cfg, const SymNetVariant& variant,
                       bool classifier_loss_updates_g = false);

StepLosses baseline_step(BaselineNet& m, OptimizerState& opt, const LabeledBatch& src,
                         const UnlabeledBatch& tgt, double p, const ScheduleConfig& cfg,
                         const BaselineVariant& variant);

struct TrainReport {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string to_csv() const;
    int column_index(const std::string& name) const;  // -1 when absent
    bool has_column(const std::string& name) const { return column_index(name) >= 0; }
};

struct TrainOptions {
    ModelConfig model;  // input_dim and num_categories are taken from the data
    ScheduleConfig sched;
    Method method = Method::Symnet;
    double test_fraction = 0.3;
    bool transductive = false;  // evaluate on the full training pools instead of a held-out split
    int eval_every = 5;
    std::uint64_t seed = 1;
    bool classifier_loss_updates_g = false;
    bool verbose = false;
};

struct TrainOutcome {
    TrainReport report;
    AnyModel model;
    Dataset src_test;
    Dataset tgt_test;
};

std::vector<std::string> report_columns(Method m);

TrainOutcome train(const Dataset& src, const Dataset& tgt, const TrainOptions& opts);

}  // namespace symnet
