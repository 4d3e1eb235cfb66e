#include "symnet/training.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "symnet/eval.hpp"
#include "symnet/rng.hpp"

namespace symnet {

void ScheduleConfig::validate() const {
    if (eta0 <= 0.0) throw std::invalid_argument("ScheduleConfig: eta0 must be positive");
    if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("ScheduleConfig: momentum in [0,1)");
    if (gamma <= 0.0) throw std::invalid_argument("ScheduleConfig: gamma must be positive");
    if (batch_size < 1) throw std::invalid_argument("ScheduleConfig: batch_size must be >= 1");
    if (total_epochs < 0) throw std::invalid_argument("ScheduleConfig: total_epochs must be >= 0");
    if (classifier_lr_multiplier <= 0.0) {
        throw std::invalid_argument("ScheduleConfig: classifier_lr_multiplier must be positive");
    }
}

namespace {
void check_progress(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("progress p must be in [0, 1]");
}
}  // namespace

double lr_at(double p, const ScheduleConfig& cfg) {
    check_progress(p);
    return cfg.eta0 / std::pow(1.0 + cfg.alpha * p, cfg.beta);
}

double lambda_at(double p, const ScheduleConfig& cfg) {
    check_progress(p);
    return 2.0 / (1.0 + std::exp(-cfg.gamma * p)) - 1.0;
}

double effective_lambda(double p, const ScheduleConfig& cfg) {
    return cfg.fixed_lambda >= 0.0 ? cfg.fixed_lambda : lambda_at(p, cfg);
}

void sgd_step(Matrix& param, const Matrix& grad, Matrix& velocity, double lr, double momentum) {
    if (!param.same_shape(grad) || !param.same_shape(velocity)) {
        throw std::invalid_argument("sgd_step: shape mismatch");
    }
    for (std::size_t i = 0; i < param.size(); ++i) {
        velocity.data()[i] = momentum * velocity.data()[i] + grad.data()[i];
        param.data()[i] -= lr * velocity.data()[i];
    }
}

Matrix& OptimizerState::vel(const std::string& name, int rows, int cols) {
    auto it = velocity.find(name);
    if (it == velocity.end()) it = velocity.emplace(name, Matrix(rows, cols)).first;
    return it->second;
}

// ---------------------------------------------------------------------------
// method table
// ---------------------------------------------------------------------------

std::string to_string(Method m) {
    switch (m) {
        case Method::SourceOnly: return "source_only";
        case Method::SourceOnlyEm: return "source_only_em";
        case Method::DomainConfusion: return "domain_confusion";
        case Method::DomainConfusionEm: return "domain_confusion_em";
        case Method::Symnet: return "symnet";
        case Method::SymnetWoEtaskT: return "symnet_wo_Etask_t";
        case Method::SymnetWoM: return "symnet_wo_M";
        case Method::SymnetWoConfusion: return "symnet_wo_confusion";
        case Method::SymnetWoCategoryConfusion: return "symnet_wo_category_confusion";
    }
    throw std::logic_error("to_string: bad method");
}

Method method_from_string(const std::string& s) {
    for (Method m : all_methods()) {
        if (to_string(m) == s) return m;
    }
    throw std::invalid_argument("unknown method '" + s + "'");
}

std::vector<Method> all_methods() {
    return {Method::SourceOnly,       Method::SourceOnlyEm,
            Method::DomainConfusion,  Method::DomainConfusionEm,
            Method::Symnet,           Method::SymnetWoEtaskT,
            Method::SymnetWoM,        Method::SymnetWoConfusion,
            Method::SymnetWoCategoryConfusion};
}

bool is_symnet_method(Method m) {
    switch (m) {
        case Method::Symnet:
        case Method::SymnetWoEtaskT:
        case Method::SymnetWoM:
        case Method::SymnetWoConfusion:
        case Method::SymnetWoCategoryConfusion: return true;
        default: return false;
    }
}

EvalHead reporting_head(Method m) {
    if (!is_symnet_method(m)) return EvalHead::C;
    return m == Method::SymnetWoEtaskT ? EvalHead::Cs : EvalHead::Ct;
}

SymNetVariant symnet_variant(Method m) {
    SymNetVariant v;
    switch (m) {
        case Method::Symnet: break;
        case Method::SymnetWoEtaskT: v.task_t = false; break;
        case Method::SymnetWoM: v.entropy = false; break;
        case Method::SymnetWoConfusion:
            v.category = CategoryTermKind::SupervisedTwoHead;
            v.domain_confusion_tgt = false;
            break;
        case Method::SymnetWoCategoryConfusion:
            v.category = CategoryTermKind::DomainConfusionSource;
            break;
        default: throw std::invalid_argument("symnet_variant: not a symnet method");
    }
    return v;
}

BaselineVariant baseline_variant(Method m) {
    switch (m) {
        case Method::SourceOnly: return {false, false};
        case Method::SourceOnlyEm: return {false, true};
        case Method::DomainConfusion: return {true, false};
        case Method::DomainConfusionEm: return {true, true};
        default: throw std::invalid_argument("baseline_variant: not a baseline method");
    }
}

namespace {

const char* category_term_column(CategoryTermKind k) {
    switch (k) {
        case CategoryTermKind::PairConfusion: return "loss_cat_conf";
        case CategoryTermKind::DomainConfusionSource: return "loss_dom_conf_src";
        case CategoryTermKind::SupervisedTwoHead: return "loss_two_head_sup";
    }
    throw std::logic_error("bad category term");
}

void apply_group(SymNet& m, Tape& t, const SymNetBinding& bind, OptimizerState& opt, ParamGroup group,
                 double lr, double momentum) {
    for (const ParamRef& p : named_params(m)) {
        if (p.group != group) continue;
        const Matrix& g = t.grad(bind.by_name.at(p.name));
        sgd_step(*p.value, g, opt.vel(p.name, p.value->rows(), p.value->cols()), lr, momentum);
    }
}

void apply_group(BaselineNet& m, Tape& t, const BaselineBinding& bind, OptimizerState& opt,
                 ParamGroup group, double lr, double momentum) {
    for (const ParamRef& p : named_params(m)) {
        if (p.group != group) continue;
        const Matrix& g = t.grad(bind.by_name.at(p.name));
        sgd_step(*p.value, g, opt.vel(p.name, p.value->rows(), p.value->cols()), lr, momentum);
    }
}

}  // namespace

StepLosses classifier_update(SymNet& m, OptimizerState& opt, const LabeledBatch& src,
                             const UnlabeledBatch& tgt, double p, const ScheduleConfig& cfg,
                             const SymNetVariant& variant, bool update_extractor) {
    const double lr = lr_at(p, cfg);
    Tape t;
    SymNetBinding bind = bind_params(t, m);
    NodeId f_s = graph::features(t, bind.g_w, bind.g_b, t.constant(src.x));
    NodeId f_t = graph::features(t, bind.g_w, bind.g_b, t.constant(tgt.x));

    StepLosses out;
    NodeId task_s = graph::loss_task_source(t, bind, src, f_s);
    out.terms.emplace_back("loss_task_s", t.scalar(task_s));
    NodeId total = task_s;
    if (variant.task_t) {
        NodeId task_t = graph::loss_task_target_crossdomain(t, bind, src, f_s);
        out.terms.emplace_back("loss_task_t", t.scalar(task_t));
        total = t.add(total, task_t);
    }
    NodeId disc = graph::loss_domain_discrimination(t, bind, src, tgt, f_s, f_t);
    out.terms.emplace_back("loss_domain_disc", t.scalar(disc));
    total = t.add(total, disc);

    t.backward(total);
    apply_group(m, t, bind, opt, ParamGroup::Classifiers, lr * cfg.classifier_lr_multiplier, cfg.momentum);
    if (update_extractor) {
        apply_group(m, t, bind, opt, ParamGroup::FeatureExtractor, lr, cfg.momentum);
    }
    return out;
}

StepLosses extractor_update(SymNet& m, OptimizerState& opt, const LabeledBatch& src,
                            const UnlabeledBatch& tgt, double p, const ScheduleConfig& cfg,
                            const SymNetVariant& variant) {
    const double lr = lr_at(p, cfg);
    const double lambda = effective_lambda(p, cfg);
    Tape t;
    SymNetBinding bind = bind_params(t, m);
    NodeId f_s = graph::features(t, bind.g_w, bind.g_b, t.constant(src.x));
    NodeId f_t = (variant.domain_confusion_tgt || variant.entropy)
                     ? graph::features(t, bind.g_w, bind.g_b, t.constant(tgt.x))
                     : -1;

    StepLosses out;
    NodeId category = -1;
    switch (variant.category) {
        case CategoryTermKind::PairConfusion:
            category = graph::loss_category_confusion(t, bind, src, f_s);
            break;
        case CategoryTermKind::DomainConfusionSource:
            category = graph::loss_domain_confusion_source_degenerate(t, bind, src, f_s);
            break;
        case CategoryTermKind::SupervisedTwoHead:
            category = graph::loss_two_head_supervised_degenerate(t, bind, src, f_s);
            break;
    }
    out.terms.emplace_back(category_term_column(variant.category), t.scalar(category));

    NodeId weighted = -1;
    if (variant.domain_confusion_tgt) {
        NodeId conf = graph::loss_domain_confusion_target(t, bind, tgt, f_t);
        out.terms.emplace_back("loss_dom_conf", t.scalar(conf));
        weighted = conf;
    }
    if (variant.entropy) {
        NodeId ent = graph::loss_entropy_min(t, bind, tgt, f_t);
        out.terms.emplace_back("loss_entropy", t.scalar(ent));
        weighted = weighted >= 0 ? t.add(weighted, ent) : ent;
    }
    NodeId total = weighted >= 0 ? t.add(category, t.scale(weighted, lambda)) : category;

    t.backward(total);
    apply_group(m, t, bind, opt, ParamGroup::FeatureExtractor, lr, cfg.momentum);
    return out;
}

StepLosses symnet_step(SymNet& m, OptimizerState& opt, const LabeledBatch& src, const UnlabeledBatch& tgt,
                       double p, const ScheduleConfig& cfg, const SymNetVariant& variant,
                       bool classifier_loss_updates_g) {
    StepLosses a = classifier_update(m, opt, src, tgt, p, cfg, variant, classifier_loss_updates_g);
    StepLosses b = extractor_update(m, opt, src, tgt, p, cfg, variant);
    a.terms.insert(a.terms.end(), b.terms.begin(), b.terms.end());
    return a;
}

StepLosses baseline_step(BaselineNet& m, OptimizerState& opt, const LabeledBatch& src,
                         const UnlabeledBatch& tgt, double p, const ScheduleConfig& cfg,
                         const BaselineVariant& variant) {
    const double lr = lr_at(p, cfg);
    const double lambda = effective_lambda(p, cfg);
    StepLosses out;

    if (variant.adversarial) {
        // Discriminator phase: only D moves.
        Tape t;
        BaselineBinding bind = bind_params(t, m);
        NodeId f_s = graph::features(t, bind.g_w, bind.g_b, t.constant(src.x));
        NodeId f_t = graph::features(t, bind.g_w, bind.g_b, t.constant(tgt.x));
        NodeId disc = graph::baseline_dc_discriminator(t, bind, f_s, f_t);
        out.terms.emplace_back("loss_domain_disc", t.scalar(disc));
        t.backward(disc);
        apply_group(m, t, bind, opt, ParamGroup::Discriminator, lr * cfg.classifier_lr_multiplier,
                    cfg.momentum);
    }

    // Task phase: G and the task head move, D stays frozen.
    Tape t;
    BaselineBinding bind = bind_params(t, m);
    NodeId f_s = graph::features(t, bind.g_w, bind.g_b, t.constant(src.x));
    NodeId task = graph::baseline_dc_task(t, bind, src, f_s);
    out.terms.emplace_back("loss_task_s", t.scalar(task));
    NodeId total = task;
    NodeId f_t = -1;
    if (variant.adversarial || variant.entropy) {
        f_t = graph::features(t, bind.g_w, bind.g_b, t.constant(tgt.x));
    }
    if (variant.adversarial) {
        NodeId conf = graph::baseline_dc_confusion(t, bind, f_s, f_t);
        out.terms.emplace_back("loss_dom_conf", t.scalar(conf));
        total = t.add(total, t.scale(conf, lambda));
    }
    if (variant.entropy) {
        NodeId ent = graph::baseline_entropy_min(t, bind, tgt, f_t);
        out.terms.emplace_back("loss_entropy", t.scalar(ent));
        total = t.add(total, t.scale(ent, lambda));
    }
    t.backward(total);
    apply_group(m, t, bind, opt, ParamGroup::FeatureExtractor, lr, cfg.momentum);
    apply_group(m, t, bind, opt, ParamGroup::Classifiers, lr * cfg.classifier_lr_multiplier, cfg.momentum);
    return out;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

namespace {

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string TrainReport::to_csv() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        out << columns[i] << (i + 1 < columns.size() ? "," : "");
    }
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << fmt17(row[i]) << (i + 1 < row.size() ? "," : "");
        }
        out << "\n";
    }
    return out.str();
}

int TrainReport::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == name) return static_cast<int>(i);
    }
    return -1;
}

std::vector<std::string> report_columns(Method m) {
    std::vector<std::string> cols = {"epoch", "p", "lambda", "lr", "loss_task_s"};
    if (is_symnet_method(m)) {
        const SymNetVariant v = symnet_variant(m);
        if (v.task_t) cols.push_back("loss_task_t");
        cols.push_back("loss_domain_disc");
        cols.push_back(category_term_column(v.category));
        if (v.domain_confusion_tgt) cols.push_back("loss_dom_conf");
        if (v.entropy) cols.push_back("loss_entropy");
        cols.push_back("acc_cs_src");
        cols.push_back("acc_cs_tgt");
        if (v.task_t) {
            cols.push_back("acc_ct_src");
            cols.push_back("acc_ct_tgt");
        }
    } else {
        const BaselineVariant v = baseline_variant(m);
        if (v.adversarial) {
            cols.push_back("loss_domain_disc");
            cols.push_back("loss_dom_conf");
        }
        if (v.entropy) cols.push_back("loss_entropy");
        cols.push_back("acc_c_src");
        cols.push_back("acc_c_tgt");
    }
    return cols;
}

// ---------------------------------------------------------------------------
// training loop
// ---------------------------------------------------------------------------

TrainOutcome train(const Dataset& src, const Dataset& tgt, const TrainOptions& opts) {
    src.validate();
    tgt.validate();
    if (src.num_categories != tgt.num_categories) {
        throw std::invalid_argument("train: source and target category counts differ");
    }
    if (src.dim() != tgt.dim()) {
        throw std::invalid_argument("train: source and target input dims differ");
    }
    opts.sched.validate();
    if (opts.eval_every < 1) throw std::invalid_argument("train: eval_every must be >= 1");
    if (!opts.transductive && !(opts.test_fraction > 0.0 && opts.test_fraction < 1.0)) {
        throw std::invalid_argument("train: test_fraction must be in (0, 1)");
    }

    ModelConfig mc = opts.model;
    mc.input_dim = src.dim();
    mc.num_categories = src.num_categories;
    mc.validate();

    Dataset src_train, src_test, tgt_train, tgt_test;
    if (opts.transductive) {
        src_train = src;
        src_test = src;
        tgt_train = tgt;
        tgt_test = tgt;
    } else {
        std::tie(src_train, src_test) = split_holdout(src, opts.test_fraction, derive_seed(opts.seed, "split.source"));
        std::tie(tgt_train, tgt_test) = split_holdout(tgt, opts.test_fraction, derive_seed(opts.seed, "split.target"));
    }

    const int max_batch = std::min(src_train.size(), tgt_train.size());
    if (opts.sched.batch_size > max_batch) {
        throw std::invalid_argument("train: batch_size " + std::to_string(opts.sched.batch_size) +
                                    " exceeds training pool size " + std::to_string(max_batch));
    }

    const bool symnet_mode = is_symnet_method(opts.method);
    const std::uint64_t init_seed = derive_seed(opts.seed, "init");

    TrainOutcome out{TrainReport{report_columns(opts.method), {}},
                     symnet_mode ? AnyModel(init_params(mc, init_seed))
                                 : AnyModel(init_baseline_params(mc, init_seed)),
                     std::move(src_test), std::move(tgt_test)};

    const int total = opts.sched.total_epochs;
    if (total == 0) return out;

    PairSampler sampler(src_train, tgt_train, opts.sched.batch_size, derive_seed(opts.seed, "sampler"));
    OptimizerState opt_state;
    const SymNetVariant sv = symnet_mode ? symnet_variant(opts.method) : SymNetVariant{};
    const BaselineVariant bv = symnet_mode ? BaselineVariant{} : baseline_variant(opts.method);

    for (int epoch = 0; epoch < total; ++epoch) {
        const double p = total > 1 ? static_cast<double>(epoch) / (total - 1) : 0.0;
        std::map<std::string, double> sums;
        const int steps = sampler.steps_per_epoch();
        for (int step = 0; step < steps; ++step) {
            auto [lb, ub] = sampler.sample_pair();
            StepLosses losses;
            if (symnet_mode) {
                losses = symnet_step(std::get<SymNet>(out.model), opt_state, lb, ub, p, opts.sched, sv,
                                     opts.classifier_loss_updates_g);
            } else {
                losses = baseline_step(std::get<BaselineNet>(out.model), opt_state, lb, ub, p, opts.sched, bv);
            }
            for (const auto& [name, value] : losses.terms) sums[name] += value;
        }

        const bool eval_point = ((epoch + 1) % opts.eval_every == 0) || (epoch == total - 1);
        if (!eval_point) continue;

        std::vector<double> row;
        row.reserve(out.report.columns.size());
        for (const std::string& col : out.report.columns) {
            if (col == "epoch") row.push_back(epoch);
            else if (col == "p") row.push_back(p);
            else if (col == "lambda") row.push_back(effective_lambda(p, opts.sched));
            else if (col == "lr") row.push_back(lr_at(p, opts.sched));
            else if (col.rfind("loss_", 0) == 0) row.push_back(sums.at(col) / steps);
            else if (col == "acc_cs_src") row.push_back(accuracy(std::get<SymNet>(out.model), out.src_test, EvalHead::Cs));
            else if (col == "acc_cs_tgt") row.push_back(accuracy(std::get<SymNet>(out.model), out.tgt_test, EvalHead::Cs));
            else if (col == "acc_ct_src") row.push_back(accuracy(std::get<SymNet>(out.model), out.src_test, EvalHead::Ct));
            else if (col == "acc_ct_tgt") row.push_back(accuracy(std::get<SymNet>(out.model), out.tgt_test, EvalHead::Ct));
            else if (col == "acc_c_src") row.push_back(accuracy(std::get<BaselineNet>(out.model), out.src_test));
            else if (col == "acc_c_tgt") row.push_back(accuracy(std::get<BaselineNet>(out.model), out.tgt_test));
            else throw std::logic_error("train: unhandled report column " + col);
        }
        out.report.rows.push_back(std::move(row));

        if (opts.verbose) {
            const auto& r = out.report.rows.back();
            std::cout << to_string(opts.method) << " epoch " << epoch << ":";
            for (std::size_t i = 4; i < out.report.columns.size(); ++i) {
                std::cout << " " << out.report.columns[i] << "=" << r[i];
            }
            std::cout << "\n";
        }
    }
    return out;
}

}  // namespace symnet
