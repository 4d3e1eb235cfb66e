#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "symnet/matrix.hpp"
#include "symnet/tape.hpp"

namespace symnet {

struct ModelConfig {
    int input_dim = 2;
    std::vector<int> hidden_dims = {64, 64};
    int feature_dim = 64;
    int num_categories = 2;

    void validate() const;  // all dims >= 1, num_categories >= 2
};

struct DenseLayer {
    Matrix W;  // out x in
    Matrix b;  // 1 x out
};

/// Fully connected feature extractor with ReLU after every layer, including
/// the final feature layer (features are post-activation, hence nonnegative).
struct FeatureExtractor {
    std::vector<DenseLayer> layers;

    int input_dim() const { return layers.front().W.cols(); }
    int feature_dim() const { return layers.back().W.rows(); }
};

/// Single FC layer producing K logits per row: f * W^T + b.
struct ClassifierHead {
    Matrix W;  // K x d
    Matrix b;  // 1 x K
};

/// Logistic-output domain head used only by the adversarial baseline.
struct DomainDiscriminator {
    Matrix W;  // 1 x d
    Matrix b;  // 1 x 1
};

/// Feature extractor plus the two symmetric task heads. The 2K-way joint
/// classifier owns no parameters of its own; it is a construction over the
/// concatenated head logits (see concat_probs).
struct SymNet {
    ModelConfig config;
    FeatureExtractor g;
    ClassifierHead cs;
    ClassifierHead ct;
};

/// Feature extractor, one task head, and a domain discriminator.
struct BaselineNet {
    ModelConfig config;
    FeatureExtractor g;
    ClassifierHead c;
    DomainDiscriminator d;
};

/// He-style Gaussian init: W ~ N(0, 2/fan_in), biases zero. Each parameter
/// matrix gets its own stream derived from (seed, parameter name), so two
/// models sharing a seed get identical common parameters regardless of which
/// extra heads exist.
SymNet init_params(const ModelConfig& config, std::uint64_t seed);
BaselineNet init_baseline_params(const ModelConfig& config, std::uint64_t seed);

Matrix forward_features(const FeatureExtractor& g, const Matrix& x);
Matrix logits(const ClassifierHead& head, const Matrix& f);

/// Softmax over the concatenated 2K logits [v_s ; v_t]. Columns 0..K-1 are
/// the source-classifier neurons, K..2K-1 the target-classifier neurons.
Matrix concat_probs(const Matrix& v_s, const Matrix& v_t);

/// q_k = p_k + p_{k+K}: per-category mass summed over the paired neurons.
Matrix category_marginal(const Matrix& p_st);

struct DomainMass {
    std::vector<double> source_prob;
    std::vector<double> target_prob;
};

/// Aggregated probability mass of the first K vs last K joint-classifier
/// neurons, read as the probability of the sample being source vs target.
DomainMass domain_mass(const Matrix& p_st);

/// Logistic probability of the target domain, strictly inside (0,1).
Matrix discriminator_prob(const DomainDiscriminator& d, const Matrix& f);

struct ParamRef {
    std::string name;
    ParamGroup group;
    Matrix* value;
};

/// Ordered parameter registry. Names double as checkpoint keys:
/// G.layer{i}.W, G.layer{i}.b, Cs.W, Cs.b, Ct.W, Ct.b (and C.*, D.* for the
/// baseline).
std::vector<ParamRef> named_params(SymNet& m);
std::vector<ParamRef> named_params(BaselineNet& m);

using AnyModel = std::variant<SymNet, BaselineNet>;

void save_checkpoint(const SymNet& m, const std::string& path);
void save_checkpoint(const BaselineNet& m, const std::string& path);
AnyModel load_checkpoint(const std::string& path);

}  // namespace symnet
