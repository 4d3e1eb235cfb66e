#include "symnet/model.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "symnet/rng.hpp"

namespace symnet {

void ModelConfig::validate() const {
    if (input_dim < 1) throw std::invalid_argument("ModelConfig: input_dim must be >= 1");
    if (feature_dim < 1) throw std::invalid_argument("ModelConfig: feature_dim must be >= 1");
    for (int h : hidden_dims) {
        if (h < 1) throw std::invalid_argument("ModelConfig: hidden dims must be >= 1");
    }
    if (num_categories < 2) throw std::invalid_argument("ModelConfig: num_categories must be >= 2");
}

namespace {

Matrix gaussian_matrix(int rows, int cols, double stddev, std::uint64_t seed) {
    std::mt19937_64 rng = make_rng(seed);
    std::normal_distribution<double> dist(0.0, stddev);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
    return m;
}

DenseLayer init_layer(int out, int in, std::uint64_t seed, const std::string& name) {
    DenseLayer l;
    l.W = gaussian_matrix(out, in, std::sqrt(2.0 / in), derive_seed(seed, name + ".W"));
    l.b = Matrix(1, out);
    return l;
}

FeatureExtractor init_extractor(const ModelConfig& cfg, std::uint64_t seed) {
    FeatureExtractor g;
    int in = cfg.input_dim;
    int idx = 0;
    for (int h : cfg.hidden_dims) {
        g.layers.push_back(init_layer(h, in, seed, "G.layer" + std::to_string(idx++)));
        in = h;
    }
    g.layers.push_back(init_layer(cfg.feature_dim, in, seed, "G.layer" + std::to_string(idx)));
    return g;
}

ClassifierHead init_head(const ModelConfig& cfg, std::uint64_t seed, const std::string& name) {
    ClassifierHead h;
    h.W = gaussian_matrix(cfg.num_categories, cfg.feature_dim, std::sqrt(2.0 / cfg.feature_dim),
                          derive_seed(seed, name + ".W"));
    h.b = Matrix(1, cfg.num_categories);
    return h;
}

}  // namespace

SymNet init_params(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    SymNet m;
    m.config = config;
    m.g = init_extractor(config, seed);
    m.cs = init_head(config, seed, "Cs");
    m.ct = init_head(config, seed, "Ct");
    return m;
}

BaselineNet init_baseline_params(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    BaselineNet m;
    m.config = config;
    m.g = init_extractor(config, seed);
    m.c = init_head(config, seed, "C");
    m.d.W = gaussian_matrix(1, config.feature_dim, std::sqrt(2.0 / config.feature_dim),
                            derive_seed(seed, "D.W"));
    m.d.b = Matrix(1, 1);
    return m;
}

Matrix forward_features(const FeatureExtractor& g, const Matrix& x) {
    if (x.cols() != g.input_dim()) {
        throw std::invalid_argument("forward_features: input width does not match extractor");
    }
    Matrix h = x;
    for (const DenseLayer& l : g.layers) {
        h = relu(add_rowvec(matmul_nt(h, l.W), l.b));
    }
    return h;
}

Matrix logits(const ClassifierHead& head, const Matrix& f) {
    if (f.cols() != head.W.cols()) {
        throw std::invalid_argument("logits: feature width does not match head");
    }
    return add_rowvec(matmul_nt(f, head.W), head.b);
}

Matrix concat_probs(const Matrix& v_s, const Matrix& v_t) {
    if (!v_s.same_shape(v_t)) {
        throw std::invalid_argument("concat_probs: head output shapes differ");
    }
    return softmax_rows(hconcat(v_s, v_t));
}

Matrix category_marginal(const Matrix& p_st) {
    if (p_st.cols() % 2 != 0) {
        throw std::invalid_argument("category_marginal: odd column count");
    }
    const int k = p_st.cols() / 2;
    Matrix q(p_st.rows(), k);
    for (int i = 0; i < p_st.rows(); ++i)
        for (int j = 0; j < k; ++j) q(i, j) = p_st(i, j) + p_st(i, j + k);
    return q;
}

DomainMass domain_mass(const Matrix& p_st) {
    if (p_st.cols() % 2 != 0) {
        throw std::invalid_argument("domain_mass: odd column count");
    }
    const int k = p_st.cols() / 2;
    DomainMass m;
    m.source_prob.resize(p_st.rows());
    m.target_prob.resize(p_st.rows());
    for (int i = 0; i < p_st.rows(); ++i) {
        double s = 0.0, t = 0.0;
        for (int j = 0; j < k; ++j) {
            s += p_st(i, j);
            t += p_st(i, j + k);
        }
        m.source_prob[i] = s;
        m.target_prob[i] = t;
    }
    return m;
}

Matrix discriminator_prob(const DomainDiscriminator& d, const Matrix& f) {
    Matrix z = add_rowvec(matmul_nt(f, d.W), d.b);
    Matrix p(z.rows(), 1);
    for (int i = 0; i < z.rows(); ++i) p(i, 0) = 1.0 / (1.0 + std::exp(-z(i, 0)));
    return p;
}

std::vector<ParamRef> named_params(SymNet& m) {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < m.g.layers.size(); ++i) {
        const std::string base = "G.layer" + std::to_string(i);
        out.push_back({base + ".W", ParamGroup::FeatureExtractor, &m.g.layers[i].W});
        out.push_back({base + ".b", ParamGroup::FeatureExtractor, &m.g.layers[i].b});
    }
    out.push_back({"Cs.W", ParamGroup::Classifiers, &m.cs.W});
    out.push_back({"Cs.b", ParamGroup::Classifiers, &m.cs.b});
    out.push_back({"Ct.W", ParamGroup::Classifiers, &m.ct.W});
    out.push_back({"Ct.b", ParamGroup::Classifiers, &m.ct.b});
    return out;
}

std::vector<ParamRef> named_params(BaselineNet& m) {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < m.g.layers.size(); ++i) {
        const std::string base = "G.layer" + std::to_string(i);
        out.push_back({base + ".W", ParamGroup::FeatureExtractor, &m.g.layers[i].W});
        out.push_back({base + ".b", ParamGroup::FeatureExtractor, &m.g.layers[i].b});
    }
    out.push_back({"C.W", ParamGroup::Classifiers, &m.c.W});
    out.push_back({"C.b", ParamGroup::Classifiers, &m.c.b});
    out.push_back({"D.W", ParamGroup::Discriminator, &m.d.W});
    out.push_back({"D.b", ParamGroup::Discriminator, &m.d.b});
    return out;
}

// ---------------------------------------------------------------------------
// checkpoint IO: flat key -> nested row-major arrays
// ---------------------------------------------------------------------------

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& key) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        throw std::runtime_error("checkpoint: key '" + key + "' is not a nested array");
    }
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        if (static_cast<int>(j[i].size()) != cols) {
            throw std::runtime_error("checkpoint: ragged rows under key '" + key + "'");
        }
        for (int c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
    }
    return m;
}

template <typename Model>
void save_params(Model& m, const std::string& path) {
    nlohmann::json j;
    for (const ParamRef& p : named_params(m)) j[p.name] = matrix_to_json(*p.value);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    out << j.dump(1) << "\n";
}

Matrix require_key(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key)) throw std::runtime_error("checkpoint: missing key '" + key + "'");
    return matrix_from_json(j.at(key), key);
}

FeatureExtractor extractor_from_json(const nlohmann::json& j) {
    FeatureExtractor g;
    for (int i = 0;; ++i) {
        const std::string base = "G.layer" + std::to_string(i);
        if (!j.contains(base + ".W")) break;
        DenseLayer l;
        l.W = require_key(j, base + ".W");
        l.b = require_key(j, base + ".b");
        g.layers.push_back(std::move(l));
    }
    if (g.layers.empty()) throw std::runtime_error("checkpoint: no G.layer0.W key found");
    return g;
}

ModelConfig config_from_shapes(const FeatureExtractor& g, const ClassifierHead& head) {
    ModelConfig cfg;
    cfg.input_dim = g.input_dim();
    cfg.hidden_dims.clear();
    for (std::size_t i = 0; i + 1 < g.layers.size(); ++i) cfg.hidden_dims.push_back(g.layers[i].W.rows());
    cfg.feature_dim = g.feature_dim();
    cfg.num_categories = head.W.rows();
    return cfg;
}

}  // namespace

void save_checkpoint(const SymNet& m, const std::string& path) {
    save_params(const_cast<SymNet&>(m), path);
}

void save_checkpoint(const BaselineNet& m, const std::string& path) {
    save_params(const_cast<BaselineNet&>(m), path);
}

AnyModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("checkpoint: parse failure in '" + path + "': " + e.what());
    }
    FeatureExtractor g = extractor_from_json(j);
    if (j.contains("Cs.W")) {
        SymNet m;
        m.g = std::move(g);
        m.cs.W = require_key(j, "Cs.W");
        m.cs.b = require_key(j, "Cs.b");
        m.ct.W = require_key(j, "Ct.W");
        m.ct.b = require_key(j, "Ct.b");
        m.config = config_from_shapes(m.g, m.cs);
        return m;
    }
    if (j.contains("C.W")) {
        BaselineNet m;
        m.g = std::move(g);
        m.c.W = require_key(j, "C.W");
        m.c.b = require_key(j, "C.b");
        m.d.W = require_key(j, "D.W");
        m.d.b = require_key(j, "D.b");
        m.config = config_from_shapes(m.g, m.c);
        return m;
    }
    throw std::runtime_error("checkpoint: '" + path + "' has neither Cs.W nor C.W");
}

}  // namespace symnet
