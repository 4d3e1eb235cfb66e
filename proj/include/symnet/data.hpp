#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "symnet/matrix.hpp"

namespace symnet {

enum class Domain { Source, Target };

/// Immutable sample collection. Target-domain labels are generated and kept
/// (shifts preserve labels) but the training path never reads them; only the
/// evaluation interface does.
struct Dataset {
    Matrix inputs;            // N x dim
    std::vector<int> labels;  // N entries in [0, num_categories)
    Domain domain_tag = Domain::Source;
    int num_categories = 0;

    int size() const { return inputs.rows(); }
    int dim() const { return inputs.cols(); }
    void validate() const;  // labels in range, every category present, N >= K
};

/// Affine domain shift: x -> scale * R(rotation) * x + translation + noise.
/// The rotation acts on the first two input coordinates only.
struct ShiftSpec {
    double rotation = 0.0;  // radians
    std::vector<double> translation;  // padded with zeros to the input dim
    double scale = 1.0;
    double noise_std = 0.0;
};

/// Two interleaved half-circles (K=2, dim=2) on an even angular grid with
/// Gaussian noise. Class centers are (0,0) and (1, 0.5).
Dataset gen_two_moons(int n, double noise_std, std::uint64_t seed);

/// K Gaussian clusters in R^dim, centers placed on a circle in the first two
/// coordinates so that adjacent centers are exactly `separation` apart.
Dataset gen_blobs(int k, int dim, int n, double separation, double noise_std, std::uint64_t seed);

Dataset apply_shift(const Dataset& ds, const ShiftSpec& spec, std::uint64_t seed);

struct LabeledBatch {
    Matrix x;
    std::vector<int> y;
};

struct UnlabeledBatch {
    Matrix x;
};

/// Draws paired per-domain mini-batches. Each domain keeps its own epoch
/// shuffle: samples are visited without replacement, the final batch of an
/// epoch may be short, then a fresh permutation starts.
class PairSampler {
public:
    PairSampler(const Dataset& src, const Dataset& tgt, int batch_size, std::uint64_t seed);

    std::pair<LabeledBatch, UnlabeledBatch> sample_pair();

    /// Steps for one full pass over the source dataset.
    int steps_per_epoch() const;

private:
    struct Stream {
        std::vector<int> order;
        std::size_t cursor = 0;
    };
    std::vector<int> take(Stream& s, int want);

    const Dataset* src_;
    const Dataset* tgt_;
    int batch_size_;
    Stream src_stream_;
    Stream tgt_stream_;
    std::mt19937_64 rng_;
};

/// CSV with header x0,...,x{d-1},label,domain; values at 17 significant
/// digits so the round trip is lossless.
void save_csv(const Dataset& ds, const std::string& path);
Dataset load_csv(const std::string& path);

/// Deterministic stratified split; the test part holds ~test_fraction of
/// each class. Both parts keep the source dataset's domain tag and K.
std::pair<Dataset, Dataset> split_holdout(const Dataset& ds, double test_fraction, std::uint64_t seed);

}  // namespace symnet
