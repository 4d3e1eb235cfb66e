// Command-line front end: dataset generation, training, the ablation grid,
// checkpoint evaluation, and feature export. All outputs land under --out,
// together with a resolved-config JSON that reproduces the run bit-exactly.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "symnet/data.hpp"
#include "symnet/eval.hpp"
#include "symnet/losses.hpp"
#include "symnet/model.hpp"
#include "symnet/rng.hpp"
#include "symnet/training.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// CLI11 config reader for flat JSON files ({"flag": value, ...}).
class ConfigJson : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
        json j;
        for (const CLI::Option* opt : app->get_options({})) {
            if (!opt->get_lnames().empty() && opt->get_configurable()) {
                const std::string name = opt->get_lnames()[0];
                if (opt->get_type_size() != 0) {
                    if (opt->count() == 1) j[name] = opt->results().at(0);
                    else if (opt->count() > 1) j[name] = opt->results();
                    else if (default_also && !opt->get_default_str().empty()) j[name] = opt->get_default_str();
                } else if (opt->count() > 0) {
                    j[name] = true;
                }
            }
        }
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json j;
        input >> j;
        if (!j.is_object()) throw CLI::FileError("config file must hold a JSON object");
        std::vector<CLI::ConfigItem> out;
        for (auto it = j.begin(); it != j.end(); ++it) {
            CLI::ConfigItem item;
            item.name = it.key();
            const json& v = it.value();
            if (v.is_boolean()) {
                item.inputs = {v.get<bool>() ? "true" : "false"};
            } else if (v.is_array()) {
                for (const json& e : v) item.inputs.push_back(e.is_string() ? e.get<std::string>() : e.dump());
            } else if (v.is_string()) {
                item.inputs = {v.get<std::string>()};
            } else {
                item.inputs = {v.dump()};
            }
            out.push_back(std::move(item));
        }
        return out;
    }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << text;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(std::stod(field));
    return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
    std::vector<std::uint64_t> out;
    const auto dots = s.find("..");
    if (dots != std::string::npos) {
        const std::uint64_t lo = std::stoull(s.substr(0, dots));
        const std::uint64_t hi = std::stoull(s.substr(dots + 2));
        if (hi < lo) throw std::runtime_error("seed range '" + s + "' is empty");
        for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(v);
        return out;
    }
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(std::stoull(field));
    return out;
}

std::vector<symnet::Method> parse_methods(const std::string& s) {
    if (s == "all") return symnet::all_methods();
    std::vector<symnet::Method> out;
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(symnet::method_from_string(field));
    return out;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenArgs {
    std::string task = "two-moons";
    int n = 500;
    double noise = 0.1;
    double rotation = 30.0;  // degrees
    std::string translation;
    double scale = 1.0;
    double shift_noise = 0.0;
    int k = 3;
    int dim = 2;
    double separation = 10.0;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_gen(const GenArgs& a) {
    const std::uint64_t seed_src = symnet::derive_seed(a.seed, "gen.source");
    const std::uint64_t seed_tgt = symnet::derive_seed(a.seed, "gen.target");
    const std::uint64_t seed_shift = symnet::derive_seed(a.seed, "gen.shift");

    symnet::Dataset src, tgt_base;
    if (a.task == "two-moons") {
        src = symnet::gen_two_moons(a.n, a.noise, seed_src);
        tgt_base = symnet::gen_two_moons(a.n, a.noise, seed_tgt);
    } else if (a.task == "blobs") {
        src = symnet::gen_blobs(a.k, a.dim, a.n, a.separation, a.noise, seed_src);
        tgt_base = symnet::gen_blobs(a.k, a.dim, a.n, a.separation, a.noise, seed_tgt);
    } else {
        throw CLI::ValidationError("--task", "unknown task '" + a.task + "' (two-moons or blobs)");
    }

    symnet::ShiftSpec spec;
    spec.rotation = a.rotation * std::numbers::pi / 180.0;
    if (!a.translation.empty()) spec.translation = parse_double_list(a.translation);
    spec.scale = a.scale;
    spec.noise_std = a.shift_noise;
    const symnet::Dataset tgt = symnet::apply_shift(tgt_base, spec, seed_shift);

    fs::create_directories(a.out);
    symnet::save_csv(src, (fs::path(a.out) / "source.csv").string());
    symnet::save_csv(tgt, (fs::path(a.out) / "target.csv").string());

    json manifest{{"task", a.task},
                  {"n", a.n},
                  {"noise", a.noise},
                  {"rotation_deg", a.rotation},
                  {"translation", a.translation},
                  {"scale", a.scale},
                  {"shift_noise", a.shift_noise},
                  {"seed", a.seed},
                  {"derived_seeds",
                   {{"gen.source", seed_src}, {"gen.target", seed_tgt}, {"gen.shift", seed_shift}}},
                  {"seed_scheme", "splitmix64(seed ^ fnv1a(label))"},
                  {"files", {"source.csv", "target.csv"}}};
    if (a.task == "blobs") {
        manifest["k"] = a.k;
        manifest["dim"] = a.dim;
        manifest["separation"] = a.separation;
    }
    write_text(fs::path(a.out) / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << a.out << "/source.csv, target.csv, manifest.json\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train / ablation shared knobs
// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string method = "symnet";
    std::string src;
    std::string tgt;
    int epochs = 200;
    int batch = 64;
    double eta0 = 0.01;
    double alpha = 10.0;
    double beta = 0.75;
    double gamma = 10.0;
    double momentum = 0.9;
    double cls_lr_mult = 10.0;
    double fixed_lambda = -1.0;
    std::vector<int> hidden = {64, 64};
    int feature_dim = 64;
    double test_fraction = 0.3;
    bool transductive = false;
    int eval_every = 5;
    std::uint64_t seed = 1;
    bool cls_updates_g = false;
    bool verbose = false;
    std::string out;
};

void add_train_options(CLI::App* cmd, TrainArgs& a, bool with_method_and_seed) {
    if (with_method_and_seed) {
        cmd->add_option("--method", a.method, "training method")->capture_default_str();
        cmd->add_option("--seed", a.seed, "master seed")->capture_default_str();
    }
    cmd->add_option("--src", a.src, "source dataset CSV")->required();
    cmd->add_option("--tgt", a.tgt, "target dataset CSV")->required();
    cmd->add_option("--epochs", a.epochs, "total training epochs")->capture_default_str();
    cmd->add_option("--batch", a.batch, "per-domain mini-batch size")->capture_default_str();
    cmd->add_option("--eta0", a.eta0, "base learning rate")->capture_default_str();
    cmd->add_option("--alpha", a.alpha, "lr annealing alpha")->capture_default_str();
    cmd->add_option("--beta", a.beta, "lr annealing beta")->capture_default_str();
    cmd->add_option("--gamma", a.gamma, "lambda ramp gamma")->capture_default_str();
    cmd->add_option("--momentum", a.momentum, "SGD momentum")->capture_default_str();
    cmd->add_option("--cls-lr-mult", a.cls_lr_mult, "classifier lr multiplier")->capture_default_str();
    cmd->add_option("--fixed-lambda", a.fixed_lambda, "pin lambda (< 0 uses the schedule)")
        ->capture_default_str();
    cmd->add_option("--hidden", a.hidden, "hidden layer widths")->capture_default_str();
    cmd->add_option("--feature-dim", a.feature_dim, "feature width d")->capture_default_str();
    cmd->add_option("--test-fraction", a.test_fraction, "held-out fraction per domain")
        ->capture_default_str();
    cmd->add_flag("--transductive", a.transductive, "evaluate on the full training pools");
    cmd->add_option("--eval-every", a.eval_every, "epochs between report rows")->capture_default_str();
    cmd->add_flag("--cls-updates-g", a.cls_updates_g,
                  "let the classifier-phase loss also update the feature extractor");
    cmd->add_flag("--verbose", a.verbose, "print per-checkpoint metrics");
    cmd->add_option("--out", a.out, "output directory")->required();
}

symnet::TrainOptions to_train_options(const TrainArgs& a) {
    symnet::TrainOptions opts;
    opts.model.hidden_dims = a.hidden;
    opts.model.feature_dim = a.feature_dim;
    opts.sched.eta0 = a.eta0;
    opts.sched.alpha = a.alpha;
    opts.sched.beta = a.beta;
    opts.sched.gamma = a.gamma;
    opts.sched.momentum = a.momentum;
    opts.sched.batch_size = a.batch;
    opts.sched.classifier_lr_multiplier = a.cls_lr_mult;
    opts.sched.total_epochs = a.epochs;
    opts.sched.fixed_lambda = a.fixed_lambda;
    opts.method = symnet::method_from_string(a.method);
    opts.test_fraction = a.test_fraction;
    opts.transductive = a.transductive;
    opts.eval_every = a.eval_every;
    opts.seed = a.seed;
    opts.classifier_loss_updates_g = a.cls_updates_g;
    opts.verbose = a.verbose;
    return opts;
}

json resolved_config(const TrainArgs& a) {
    return json{{"method", a.method},
                {"src", a.src},
                {"tgt", a.tgt},
                {"epochs", a.epochs},
                {"batch", a.batch},
                {"eta0", a.eta0},
                {"alpha", a.alpha},
                {"beta", a.beta},
                {"gamma", a.gamma},
                {"momentum", a.momentum},
                {"cls-lr-mult", a.cls_lr_mult},
                {"fixed-lambda", a.fixed_lambda},
                {"hidden", a.hidden},
                {"feature-dim", a.feature_dim},
                {"test-fraction", a.test_fraction},
                {"transductive", a.transductive},
                {"eval-every", a.eval_every},
                {"seed", a.seed},
                {"cls-updates-g", a.cls_updates_g},
                {"seed_scheme", "splitmix64(seed ^ fnv1a(label))"}};
}

int cmd_train(const TrainArgs& a) {
    const symnet::Dataset src = symnet::load_csv(a.src);
    const symnet::Dataset tgt = symnet::load_csv(a.tgt);
    const symnet::TrainOptions opts = to_train_options(a);

    symnet::TrainOutcome res = symnet::train(src, tgt, opts);

    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "report.csv", res.report.to_csv());
    const std::string ckpt = (fs::path(a.out) / "checkpoint.json").string();
    if (std::holds_alternative<symnet::SymNet>(res.model)) {
        symnet::save_checkpoint(std::get<symnet::SymNet>(res.model), ckpt);
    } else {
        symnet::save_checkpoint(std::get<symnet::BaselineNet>(res.model), ckpt);
    }
    write_text(fs::path(a.out) / "config.json", resolved_config(a).dump(2) + "\n");

    if (!res.report.rows.empty()) {
        const auto& row = res.report.rows.back();
        const symnet::EvalHead head = symnet::reporting_head(opts.method);
        const char* col = head == symnet::EvalHead::C ? "acc_c_tgt"
                          : head == symnet::EvalHead::Cs ? "acc_cs_tgt"
                                                         : "acc_ct_tgt";
        std::cout << a.method << ": final target accuracy " << row[res.report.column_index(col)] << "\n";
    }
    std::cout << "wrote " << a.out << "/report.csv, checkpoint.json, config.json\n";
    return 0;
}

// ---------------------------------------------------------------------------
// ablation
// ---------------------------------------------------------------------------

struct AblationArgs {
    TrainArgs train;
    std::string methods = "all";
    std::string seeds = "1..10";
    int threads = 0;
};

int cmd_ablation(const AblationArgs& a) {
#ifdef _OPENMP
    if (a.threads > 0) omp_set_num_threads(a.threads);
#endif
    const symnet::Dataset src = symnet::load_csv(a.train.src);
    const symnet::Dataset tgt = symnet::load_csv(a.train.tgt);

    symnet::ExperimentSpec spec;
    spec.methods = parse_methods(a.methods);
    spec.seeds = parse_seeds(a.seeds);
    spec.base = to_train_options(a.train);

    fs::create_directories(a.train.out);
    const symnet::ResultTable table = symnet::run_ablation(spec, src, tgt, a.train.out);

    write_text(fs::path(a.train.out) / "results.csv", table.cells_csv());
    write_text(fs::path(a.train.out) / "aggregate.csv", table.aggregate_csv());

    std::vector<symnet::NamedReport> reports;
    for (const auto& [method, report] : table.first_seed_reports) {
        reports.push_back({symnet::to_string(method), &report});
    }
    symnet::convergence_curves(reports, (fs::path(a.train.out) / "convergence.csv").string());

    json cfg = resolved_config(a.train);
    cfg["methods"] = a.methods;
    cfg["seeds"] = a.seeds;
    write_text(fs::path(a.train.out) / "config.json", cfg.dump(2) + "\n");

    std::cout << table.aggregate_csv();
    std::cout << "wrote " << a.train.out << "/results.csv, aggregate.csv, convergence.csv\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval / export-features
// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    std::string head = "auto";
    std::string out;
};

int cmd_eval(const EvalArgs& a) {
    const symnet::AnyModel model = symnet::load_checkpoint(a.checkpoint);
    const symnet::Dataset ds = symnet::load_csv(a.data);

    std::string head = a.head;
    if (head == "auto") head = std::holds_alternative<symnet::SymNet>(model) ? "ct" : "c";
    double acc = 0.0;
    if (head == "cs") acc = symnet::accuracy(model, ds, symnet::EvalHead::Cs);
    else if (head == "ct") acc = symnet::accuracy(model, ds, symnet::EvalHead::Ct);
    else if (head == "c") acc = symnet::accuracy(model, ds, symnet::EvalHead::C);
    else throw CLI::ValidationError("--head", "must be cs, ct, c, or auto");

    std::cout << "head=" << head << " dataset=" << a.data << " accuracy=" << acc << "\n";
    if (!a.out.empty()) {
        std::ostringstream csv;
        csv << "head,dataset,accuracy\n" << head << "," << a.data << "," << acc << "\n";
        write_text(a.out, csv.str());
    }
    return 0;
}

struct ExportArgs {
    std::string checkpoint;
    std::string data;
    std::string out;
};

int cmd_export_features(const ExportArgs& a) {
    const symnet::AnyModel model = symnet::load_checkpoint(a.checkpoint);
    const symnet::Dataset ds = symnet::load_csv(a.data);
    const symnet::FeatureExtractor& g = std::holds_alternative<symnet::SymNet>(model)
                                            ? std::get<symnet::SymNet>(model).g
                                            : std::get<symnet::BaselineNet>(model).g;
    symnet::export_features(g, ds, a.out);
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Domain-symmetric network laboratory"};
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<ConfigJson>());

    GenArgs gen;
    CLI::App* cgen = app.add_subcommand("gen", "generate a domain-shifted dataset pair");
    cgen->set_config("--config", "", "JSON config file");
    cgen->add_option("--task", gen.task, "two-moons or blobs")->capture_default_str();
    cgen->add_option("--n", gen.n, "samples per domain")->capture_default_str();
    cgen->add_option("--noise", gen.noise, "generator noise std")->capture_default_str();
    cgen->add_option("--rotation", gen.rotation, "target rotation, degrees")->capture_default_str();
    cgen->add_option("--translation", gen.translation, "target translation, comma-separated");
    cgen->add_option("--scale", gen.scale, "target scale factor")->capture_default_str();
    cgen->add_option("--shift-noise", gen.shift_noise, "extra noise added by the shift")
        ->capture_default_str();
    cgen->add_option("--k", gen.k, "blob classes")->capture_default_str();
    cgen->add_option("--dim", gen.dim, "blob input dimension")->capture_default_str();
    cgen->add_option("--separation", gen.separation, "blob center separation")->capture_default_str();
    cgen->add_option("--seed", gen.seed, "master seed")->capture_default_str();
    cgen->add_option("--out", gen.out, "output directory")->required();

    TrainArgs train;
    CLI::App* ctrain = app.add_subcommand("train", "train one method on a dataset pair");
    ctrain->set_config("--config", "", "JSON config file");
    add_train_options(ctrain, train, true);

    AblationArgs ablation;
    CLI::App* cabl = app.add_subcommand("ablation", "run a methods x seeds grid");
    cabl->set_config("--config", "", "JSON config file");
    add_train_options(cabl, ablation.train, false);
    cabl->add_option("--methods", ablation.methods, "comma list or 'all'")->capture_default_str();
    cabl->add_option("--seeds", ablation.seeds, "comma list or lo..hi range")->capture_default_str();
    cabl->add_option("--threads", ablation.threads, "parallel cells (0 = library default)")
        ->capture_default_str();

    EvalArgs eval;
    CLI::App* ceval = app.add_subcommand("eval", "accuracy of a checkpoint on a dataset");
    ceval->add_option("--checkpoint", eval.checkpoint, "checkpoint JSON")->required();
    ceval->add_option("--data", eval.data, "dataset CSV")->required();
    ceval->add_option("--head", eval.head, "cs, ct, c, or auto")->capture_default_str();
    ceval->add_option("--out", eval.out, "optional result CSV");

    ExportArgs exp;
    CLI::App* cexp = app.add_subcommand("export-features", "dump feature-extractor outputs to CSV");
    cexp->add_option("--checkpoint", exp.checkpoint, "checkpoint JSON")->required();
    cexp->add_option("--data", exp.data, "dataset CSV")->required();
    cexp->add_option("--out", exp.out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (cgen->parsed()) return cmd_gen(gen);
        if (ctrain->parsed()) return cmd_train(train);
        if (cabl->parsed()) return cmd_ablation(ablation);
        if (ceval->parsed()) return cmd_eval(eval);
        if (cexp->parsed()) return cmd_export_features(exp);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
