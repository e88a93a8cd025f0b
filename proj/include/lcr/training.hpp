#pragma once

#include "lcr/error.hpp"
#include "lcr/eval.hpp"
#include "lcr/querygen.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lcr {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

using ChargeSet = std::set<std::string>;

// ---------------------------------------------------------------------------
// Similarity

/// Row-wise cosine similarity: entry (i, j) compares queries.row(i) with
/// candidates.row(j). Throws ZeroVector naming the first zero row.
template <typename DerivedQ, typename DerivedC>
Matrix<typename DerivedQ::Scalar> cosine_matrix(const Eigen::MatrixBase<DerivedQ>& queries,
                                                const Eigen::MatrixBase<DerivedC>& candidates)
{
    using Scalar = typename DerivedQ::Scalar;
    static_assert(std::is_same_v<Scalar, typename DerivedC::Scalar>, "scalar types must match");
    if (queries.cols() != candidates.cols()) fail(ErrorKind::usage, "dimension mismatch in cosine_matrix");

    auto normalized = [](const auto& m, const char* which) {
        Matrix<Scalar> out = m;
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            Scalar n = out.row(i).norm();
            if (n == Scalar(0)) fail(ErrorKind::zero_vector, std::string(which) + " row " + std::to_string(i));
            out.row(i) /= n;
        }
        return out;
    };
    Matrix<Scalar> qn = normalized(queries, "query");
    Matrix<Scalar> cn = normalized(candidates, "candidate");
    Matrix<Scalar> sim = qn * cn.transpose();
    return sim.cwiseMax(Scalar(-1)).cwiseMin(Scalar(1));
}

// ---------------------------------------------------------------------------
// False-negative masking

enum class MaskRule {
    overlap,     // any shared charge
    exact_set,   // identical charge sets
};

/// mask(i, j) marks candidate j as a false negative for row i. Columns beyond
/// the row count are extra negatives; column i is row i's positive and is
/// never masked.
BoolMatrix false_negative_mask(std::span<const ChargeSet> row_charges, std::span<const ChargeSet> column_charges,
                               MaskRule rule = MaskRule::overlap);

inline BoolMatrix false_negative_mask(std::span<const ChargeSet> positive_charges, MaskRule rule = MaskRule::overlap)
{
    return false_negative_mask(positive_charges, positive_charges, rule);
}

// ---------------------------------------------------------------------------
// In-batch contrastive loss

struct LossConfig {
    double temperature = 1.0;
    bool masking_enabled = true;
    MaskRule mask_rule = MaskRule::overlap;

    /// Softmax temperature used for the large generative encoder variant.
    static LossConfig low_temperature()
    {
        LossConfig c;
        c.temperature = 0.2;
        return c;
    }
};

template <typename Scalar>
struct LossResult {
    Scalar loss;
    Matrix<Scalar> grad;  // d loss / d sim
};

/// Stand-in for -inf on masked logits. The softmax weight of a masked entry
/// underflows to exactly zero.
inline constexpr double kMaskedLogit = -1e9;

/// Mean softmax cross-entropy of each row against its diagonal entry, with
/// masked entries pushed to kMaskedLogit. sim is N x M with M >= N.
template <typename Derived>
LossResult<typename Derived::Scalar> in_batch_loss(const Eigen::MatrixBase<Derived>& sim, const BoolMatrix& mask,
                                                   const LossConfig& cfg)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = sim.rows();
    const Eigen::Index m = sim.cols();
    if (n < 1 || m < n) fail(ErrorKind::usage, "similarity matrix must be N x M with M >= N >= 1");
    if (!(cfg.temperature > 0.0)) fail(ErrorKind::usage, "temperature must be positive");
    const bool use_mask = cfg.masking_enabled && mask.size() > 0;
    if (use_mask && (mask.rows() != n || mask.cols() != m)) fail(ErrorKind::usage, "mask shape mismatch");

    const Scalar inv_t = Scalar(1) / Scalar(cfg.temperature);
    Matrix<Scalar> logits = sim * inv_t;
    if (use_mask) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (mask(i, i)) fail(ErrorKind::degenerate_row, "row " + std::to_string(i) + " masks its positive");
            for (Eigen::Index j = 0; j < m; ++j) {
                if (mask(i, j)) logits(i, j) += Scalar(kMaskedLogit);
            }
        }
    }

    LossResult<Scalar> out{Scalar(0), Matrix<Scalar>::Zero(n, m)};
    for (Eigen::Index i = 0; i < n; ++i) {
        Scalar top = logits.row(i).maxCoeff();
        Eigen::Matrix<Scalar, 1, Eigen::Dynamic> w = (logits.row(i).array() - top).exp().matrix();
        Scalar z = w.sum();
        out.loss += std::log(z) + top - logits(i, i);
        out.grad.row(i) = w / z;
        out.grad(i, i) -= Scalar(1);
    }
    out.loss /= Scalar(n);
    out.grad *= inv_t / Scalar(n);
    return out;
}

/// Same loss computed by physically dropping masked entries from each row
/// before the softmax. Masked entries get zero gradient.
template <typename Derived>
LossResult<typename Derived::Scalar> in_batch_loss_filtered(const Eigen::MatrixBase<Derived>& sim,
                                                            const BoolMatrix& mask, const LossConfig& cfg)
{
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = sim.rows();
    const Eigen::Index m = sim.cols();
    if (n < 1 || m < n) fail(ErrorKind::usage, "similarity matrix must be N x M with M >= N >= 1");
    const bool use_mask = cfg.masking_enabled && mask.size() > 0;
    const Scalar inv_t = Scalar(1) / Scalar(cfg.temperature);

    LossResult<Scalar> out{Scalar(0), Matrix<Scalar>::Zero(n, m)};
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<Eigen::Index> kept;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (j == i || !use_mask || !mask(i, j)) kept.push_back(j);
        }
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row(static_cast<Eigen::Index>(kept.size()));
        for (std::size_t k = 0; k < kept.size(); ++k) row(static_cast<Eigen::Index>(k)) = sim(i, kept[k]) * inv_t;
        Scalar top = row.maxCoeff();
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w = (row.array() - top).exp().matrix();
        Scalar z = w.sum();
        out.loss += std::log(z) + top - sim(i, i) * inv_t;
        for (std::size_t k = 0; k < kept.size(); ++k) {
            out.grad(i, kept[k]) = w(static_cast<Eigen::Index>(k)) / z;
        }
        out.grad(i, i) -= Scalar(1);
    }
    out.loss /= Scalar(n);
    out.grad *= inv_t / Scalar(n);
    return out;
}

// ---------------------------------------------------------------------------
// Embedders

class Embedder {
  public:
    virtual ~Embedder() = default;
    /// One row per input text.
    virtual Eigen::MatrixXd embed(const std::vector<std::string>& texts) const = 0;
    virtual Eigen::Index dim() const noexcept = 0;
};

struct SparseFeatures {
    std::vector<std::pair<Eigen::Index, double>> entries;  // bucket, weight; L2-normalized
};

/// Hashed character n-gram counts followed by a trainable linear map.
class ToyEmbedder final : public Embedder {
  public:
    struct Options {
        Eigen::Index dim = 64;
        Eigen::Index buckets = 8192;
        int ngram_min = 2;
        int ngram_max = 3;
        std::uint64_t seed = 0;
    };

    ToyEmbedder() : ToyEmbedder(Options{}) {}
    explicit ToyEmbedder(Options opts);

    SparseFeatures featurize(std::string_view text) const;
    Eigen::VectorXd embed_features(const SparseFeatures& f) const;

    Eigen::MatrixXd embed(const std::vector<std::string>& texts) const override;
    Eigen::Index dim() const noexcept override { return m_opts.dim; }

    const Options& options() const noexcept { return m_opts; }
    /// dim x buckets; column b is the image of hash bucket b.
    const Eigen::MatrixXd& weights() const noexcept { return m_weights; }
    Eigen::MatrixXd& weights() noexcept { return m_weights; }
    Eigen::Index parameter_count() const noexcept { return m_weights.size(); }

    /// Little-endian binary: "LCRT", u32 version, u32 dim, u32 buckets,
    /// u32 ngram_min, u32 ngram_max, u64 seed, then dim*buckets f64 in
    /// column-major order.
    void save(const std::filesystem::path& path) const;
    static ToyEmbedder load(const std::filesystem::path& path);

  private:
    Options m_opts;
    Eigen::MatrixXd m_weights;
};

// ---------------------------------------------------------------------------
// Training

struct TrainingExample {
    std::string query;
    std::string positive;
    ChargeSet positive_charges;
    /// Optional explicit negative (benchmark triplets).
    std::string negative;
    ChargeSet negative_charges;
};

struct TrainSchedule {
    int epochs = 30;
    std::size_t batch_size = 32;
    double learning_rate = 5e-3;
    double warmup_fraction = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    LossConfig loss;
    /// Candidate texts are cut to this many characters for training.
    std::size_t max_input_chars = 2048;
    /// Early stopping on development loss; 0 disables it.
    int patience = 0;

    /// Batch 128, learning rate 1e-5, up to 80 epochs.
    static TrainSchedule encoder_preset();
};

struct TrainResult {
    std::vector<double> loss_curve;  // per step
    std::vector<double> dev_curve;   // per epoch, when a dev set is given
    int epochs_run = 0;
};

/// Adam with linear warm-up then linear decay on in_batch_loss. Deterministic
/// for a fixed seed. Throws NonFiniteLoss.
TrainResult train_toy(const std::vector<TrainingExample>& examples, ToyEmbedder& model, const TrainSchedule& schedule,
                      const std::vector<TrainingExample>* dev = nullptr);

/// Mean in-batch loss over consecutive batches, without updates.
double evaluate_loss(const std::vector<TrainingExample>& examples, const ToyEmbedder& model,
                     const TrainSchedule& schedule);

void write_loss_curve(const std::filesystem::path& path, const std::vector<double>& curve);

// ---------------------------------------------------------------------------
// Benchmark triplets

struct Triplet {
    std::string query_id;
    std::string positive_case_id;
    std::string negative_case_id;
    bool operator==(const Triplet&) const = default;
};

struct TripletResult {
    std::vector<Triplet> triplets;
    std::vector<std::string> no_positives;  // queries skipped (NoPositives)
    std::vector<std::string> short_negatives;  // not enough negatives even after top-up
};

/// Label-3 cases are positives. Each positive is paired with a distinct
/// negative, drawn from the annotated non-3 cases and then, when those run
/// out, from the unannotated part of the query's candidate pool.
TripletResult triplets_from_qrels(const std::vector<QueryRecord>& queries, const RelevanceJudgments& qrels,
                                  const std::map<std::string, std::vector<std::string>>& candidate_pools,
                                  std::uint64_t seed);

void write_triplets(const std::filesystem::path& path, const std::vector<Triplet>& triplets);
std::vector<Triplet> read_triplets(const std::filesystem::path& path);

}  // namespace lcr
