#include "lcr/training.hpp"

#include "lcr/io.hpp"
#include "lcr/text.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_map>

namespace lcr {

BoolMatrix false_negative_mask(std::span<const ChargeSet> row_charges, std::span<const ChargeSet> column_charges,
                               MaskRule rule)
{
    const auto n = static_cast<Eigen::Index>(row_charges.size());
    const auto m = static_cast<Eigen::Index>(column_charges.size());
    BoolMatrix mask = BoolMatrix::Constant(n, m, false);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& a = row_charges[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i == j) continue;
            const auto& b = column_charges[static_cast<std::size_t>(j)];
            if (rule == MaskRule::exact_set) {
                mask(i, j) = !a.empty() && a == b;
            } else {
                mask(i, j) = std::any_of(a.begin(), a.end(), [&](const std::string& c) { return b.count(c) > 0; });
            }
        }
    }
    return mask;
}

// ---------------------------------------------------------------------------

ToyEmbedder::ToyEmbedder(Options opts) : m_opts(opts)
{
    if (m_opts.dim < 1 || m_opts.buckets < 1 || m_opts.ngram_min < 1 || m_opts.ngram_max < m_opts.ngram_min) {
        fail(ErrorKind::usage, "invalid toy embedder options");
    }
    std::mt19937_64 rng(m_opts.seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    m_weights.resize(m_opts.dim, m_opts.buckets);
    for (Eigen::Index c = 0; c < m_weights.cols(); ++c) {
        for (Eigen::Index r = 0; r < m_weights.rows(); ++r) m_weights(r, c) = uniform(rng);
    }
}

SparseFeatures ToyEmbedder::featurize(std::string_view s) const
{
    auto offsets = text::char_offsets(s);
    const std::size_t n = offsets.size() - 1;
    std::unordered_map<Eigen::Index, double> counts;
    auto add = [&](std::size_t first, std::size_t len) {
        auto gram = s.substr(offsets[first], offsets[first + len] - offsets[first]);
        auto h = text::fnv1a(gram, text::mix64(static_cast<std::uint64_t>(len)));
        counts[static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(m_opts.buckets))] += 1.0;
    };
    if (n > 0 && n < static_cast<std::size_t>(m_opts.ngram_min)) add(0, n);
    for (int g = m_opts.ngram_min; g <= m_opts.ngram_max; ++g) {
        auto len = static_cast<std::size_t>(g);
        for (std::size_t i = 0; i + len <= n; ++i) add(i, len);
    }
    SparseFeatures f;
    f.entries.assign(counts.begin(), counts.end());
    std::sort(f.entries.begin(), f.entries.end());
    double norm = 0.0;
    for (const auto& [b, v] : f.entries) norm += v * v;
    norm = std::sqrt(norm);
    for (auto& [b, v] : f.entries) v /= norm;
    return f;
}

Eigen::VectorXd ToyEmbedder::embed_features(const SparseFeatures& f) const
{
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m_opts.dim);
    for (const auto& [b, v] : f.entries) e.noalias() += v * m_weights.col(b);
    return e;
}

Eigen::MatrixXd ToyEmbedder::embed(const std::vector<std::string>& texts) const
{
    Eigen::MatrixXd out(static_cast<Eigen::Index>(texts.size()), m_opts.dim);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = embed_features(featurize(texts[i])).transpose();
    }
    return out;
}

namespace {

constexpr char kMagic[4] = {'L', 'C', 'R', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::string& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
    const std::string& data;
    std::size_t pos = 0;

    std::uint64_t le(int bytes)
    {
        if (pos + static_cast<std::size_t>(bytes) > data.size()) fail(ErrorKind::malformed_record, "truncated checkpoint");
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + static_cast<std::size_t>(i)])) << (8 * i);
        }
        pos += static_cast<std::size_t>(bytes);
        return v;
    }
};

}  // namespace

void ToyEmbedder::save(const std::filesystem::path& path) const
{
    std::string out(kMagic, 4);
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(m_opts.dim));
    put_u32(out, static_cast<std::uint32_t>(m_opts.buckets));
    put_u32(out, static_cast<std::uint32_t>(m_opts.ngram_min));
    put_u32(out, static_cast<std::uint32_t>(m_opts.ngram_max));
    put_u64(out, m_opts.seed);
    out.reserve(out.size() + static_cast<std::size_t>(m_weights.size()) * 8);
    const double* p = m_weights.data();
    for (Eigen::Index i = 0; i < m_weights.size(); ++i) put_u64(out, std::bit_cast<std::uint64_t>(p[i]));
    io::write_atomic(path, out);
}

ToyEmbedder ToyEmbedder::load(const std::filesystem::path& path)
{
    auto data = io::read_file(path);
    if (data.size() < 4 || std::memcmp(data.data(), kMagic, 4) != 0) {
        fail(ErrorKind::malformed_record, path.string() + ": not a toy embedder checkpoint");
    }
    Reader r{data, 4};
    auto version = r.le(4);
    if (version != kCheckpointVersion) {
        fail(ErrorKind::malformed_record, path.string() + ": unsupported checkpoint version " + std::to_string(version));
    }
    Options opts;
    opts.dim = static_cast<Eigen::Index>(r.le(4));
    opts.buckets = static_cast<Eigen::Index>(r.le(4));
    opts.ngram_min = static_cast<int>(r.le(4));
    opts.ngram_max = static_cast<int>(r.le(4));
    opts.seed = r.le(8);
    ToyEmbedder model(opts);
    if (data.size() - r.pos != static_cast<std::size_t>(model.m_weights.size()) * 8) {
        fail(ErrorKind::malformed_record, path.string() + ": parameter block size mismatch");
    }
    double* p = model.m_weights.data();
    for (Eigen::Index i = 0; i < model.m_weights.size(); ++i) p[i] = std::bit_cast<double>(r.le(8));
    return model;
}

// ---------------------------------------------------------------------------

TrainSchedule TrainSchedule::encoder_preset()
{
    TrainSchedule s;
    s.epochs = 80;
    s.batch_size = 128;
    s.learning_rate = 1e-5;
    return s;
}

namespace {

struct FeaturizedExample {
    SparseFeatures query;
    SparseFeatures positive;
    const ChargeSet* positive_charges;
    bool has_negative;
    SparseFeatures negative;
    const ChargeSet* negative_charges;
};

std::vector<FeaturizedExample> featurize_all(const std::vector<TrainingExample>& examples, const ToyEmbedder& model,
                                             std::size_t max_chars)
{
    std::vector<FeaturizedExample> out;
    out.reserve(examples.size());
    for (const auto& e : examples) {
        FeaturizedExample f{model.featurize(e.query),
                            model.featurize(text::char_substr(e.positive, 0, max_chars)),
                            &e.positive_charges,
                            !e.negative.empty(),
                            {},
                            &e.negative_charges};
        if (f.has_negative) f.negative = model.featurize(text::char_substr(e.negative, 0, max_chars));
        out.push_back(std::move(f));
    }
    return out;
}

// Rows of L2-normalized embeddings plus the pre-normalization norms.
struct Encoded {
    Eigen::MatrixXd unit;
    Eigen::VectorXd norms;
};

Encoded encode(const std::vector<const SparseFeatures*>& feats, const ToyEmbedder& model)
{
    Encoded e{Eigen::MatrixXd(static_cast<Eigen::Index>(feats.size()), model.dim()),
              Eigen::VectorXd(static_cast<Eigen::Index>(feats.size()))};
    for (std::size_t i = 0; i < feats.size(); ++i) {
        auto row = static_cast<Eigen::Index>(i);
        Eigen::VectorXd v = model.embed_features(*feats[i]);
        double n = v.norm();
        if (n == 0.0) fail(ErrorKind::zero_vector, "embedding of batch text " + std::to_string(i));
        e.norms(row) = n;
        e.unit.row(row) = (v / n).transpose();
    }
    return e;
}

// Backpropagates d loss / d unit-embedding rows into the weight gradient.
void accumulate(const Encoded& enc, const Eigen::MatrixXd& d_unit, const std::vector<const SparseFeatures*>& feats,
                Eigen::MatrixXd& grad)
{
    for (Eigen::Index i = 0; i < enc.unit.rows(); ++i) {
        Eigen::VectorXd u = enc.unit.row(i).transpose();
        Eigen::VectorXd g = d_unit.row(i).transpose();
        Eigen::VectorXd d_raw = (g - g.dot(u) * u) / enc.norms(i);
        for (const auto& [b, v] : feats[static_cast<std::size_t>(i)]->entries) grad.col(b).noalias() += v * d_raw;
    }
}

double batch_step(const std::vector<FeaturizedExample>& data, std::span<const std::size_t> batch,
                  const ToyEmbedder& model, const LossConfig& loss_cfg, Eigen::MatrixXd* grad)
{
    std::vector<const SparseFeatures*> q_feats;
    std::vector<const SparseFeatures*> c_feats;
    std::vector<ChargeSet> row_charges;
    std::vector<ChargeSet> col_charges;
    for (std::size_t i : batch) {
        q_feats.push_back(&data[i].query);
        c_feats.push_back(&data[i].positive);
        row_charges.push_back(*data[i].positive_charges);
        col_charges.push_back(*data[i].positive_charges);
    }
    for (std::size_t i : batch) {
        if (!data[i].has_negative) continue;
        c_feats.push_back(&data[i].negative);
        col_charges.push_back(*data[i].negative_charges);
    }

    auto q = encode(q_feats, model);
    auto c = encode(c_feats, model);
    Eigen::MatrixXd sim = q.unit * c.unit.transpose();
    BoolMatrix mask;
    if (loss_cfg.masking_enabled) mask = false_negative_mask(row_charges, col_charges, loss_cfg.mask_rule);
    auto result = in_batch_loss(sim, mask, loss_cfg);
    if (!std::isfinite(result.loss)) {
        fail(ErrorKind::non_finite_loss, "loss " + std::to_string(result.loss) + " on a batch of "
                                             + std::to_string(batch.size()));
    }
    if (grad) {
        Eigen::MatrixXd d_q = result.grad * c.unit;
        Eigen::MatrixXd d_c = result.grad.transpose() * q.unit;
        accumulate(q, d_q, q_feats, *grad);
        accumulate(c, d_c, c_feats, *grad);
    }
    return result.loss;
}

std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& order, std::size_t batch_size)
{
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        auto end = std::min(order.size(), start + batch_size);
        if (end - start < 2) break;  // a lone pair has no in-batch negative
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

}  // namespace

double evaluate_loss(const std::vector<TrainingExample>& examples, const ToyEmbedder& model,
                     const TrainSchedule& schedule)
{
    auto data = featurize_all(examples, model, schedule.max_input_chars);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto batches = make_batches(order, std::max<std::size_t>(2, schedule.batch_size));
    if (batches.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& b : batches) sum += batch_step(data, b, model, schedule.loss, nullptr);
    return sum / static_cast<double>(batches.size());
}

TrainResult train_toy(const std::vector<TrainingExample>& examples, ToyEmbedder& model, const TrainSchedule& schedule,
                      const std::vector<TrainingExample>* dev)
{
    if (examples.empty()) fail(ErrorKind::usage, "no training pairs");
    if (schedule.batch_size < 2) fail(ErrorKind::usage, "batch size must be at least 2");

    auto data = featurize_all(examples, model, schedule.max_input_chars);
    const std::size_t steps_per_epoch = make_batches(std::vector<std::size_t>(data.size()), schedule.batch_size).size();
    if (steps_per_epoch == 0) fail(ErrorKind::usage, "need at least two training pairs");
    const std::size_t total_steps = steps_per_epoch * static_cast<std::size_t>(std::max(0, schedule.epochs));
    const auto warmup_steps = static_cast<std::size_t>(std::ceil(schedule.warmup_fraction * static_cast<double>(total_steps)));

    auto& w = model.weights();
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(w.rows(), w.cols());
    Eigen::ArrayXXd m1 = Eigen::ArrayXXd::Zero(w.rows(), w.cols());
    Eigen::ArrayXXd m2 = Eigen::ArrayXXd::Zero(w.rows(), w.cols());

    TrainResult result;
    Eigen::MatrixXd best_weights;
    double best_dev = std::numeric_limits<double>::infinity();
    int bad_epochs = 0;

    std::vector<std::size_t> order(data.size());
    std::size_t step = 0;
    for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(text::mix64(schedule.seed + static_cast<std::uint64_t>(epoch)));
        std::shuffle(order.begin(), order.end(), rng);
        for (const auto& batch : make_batches(order, schedule.batch_size)) {
            grad.setZero();
            double loss = batch_step(data, batch, model, schedule.loss, &grad);
            result.loss_curve.push_back(loss);

            double lr = schedule.learning_rate;
            if (step < warmup_steps) {
                lr *= static_cast<double>(step + 1) / static_cast<double>(warmup_steps);
            } else if (total_steps > warmup_steps) {
                lr *= static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warmup_steps);
            }
            ++step;
            const double t = static_cast<double>(step);
            m1 = schedule.beta1 * m1 + (1.0 - schedule.beta1) * grad.array();
            m2 = schedule.beta2 * m2 + (1.0 - schedule.beta2) * grad.array().square();
            const double c1 = 1.0 - std::pow(schedule.beta1, t);
            const double c2 = 1.0 - std::pow(schedule.beta2, t);
            w.array() -= lr * (m1 / c1) / ((m2 / c2).sqrt() + schedule.epsilon);
        }
        ++result.epochs_run;
        if (dev && !dev->empty() && schedule.patience > 0) {
            double dev_loss = evaluate_loss(*dev, model, schedule);
            result.dev_curve.push_back(dev_loss);
            if (dev_loss < best_dev) {
                best_dev = dev_loss;
                best_weights = w;
                bad_epochs = 0;
            } else if (++bad_epochs >= schedule.patience) {
                break;
            }
        }
    }
    if (best_weights.size() > 0) w = best_weights;
    return result;
}

void write_loss_curve(const std::filesystem::path& path, const std::vector<double>& curve)
{
    std::string out;
    char buf[64];
    for (std::size_t i = 0; i < curve.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu\t%.17g\n", i, curve[i]);
        out += buf;
    }
    io::write_atomic(path, out);
}

// ---------------------------------------------------------------------------

TripletResult triplets_from_qrels(const std::vector<QueryRecord>& queries, const RelevanceJudgments& qrels,
                                  const std::map<std::string, std::vector<std::string>>& candidate_pools,
                                  std::uint64_t seed)
{
    TripletResult result;
    for (const auto& q : queries) {
        const auto* pool = qrels.pool(q.query_id);
        std::vector<std::string> positives;
        std::vector<std::string> negatives;
        if (pool) {
            for (const auto& [cid, label] : pool ? *pool : RelevanceJudgments::Pool{}) {
                (label == RelevanceJudgments::kRelevantLabel ? positives : negatives).push_back(cid);
            }
        }
        if (positives.empty()) {
            result.no_positives.push_back(q.query_id);
            continue;
        }
        std::mt19937_64 rng(text::derive_seed(seed, q.query_id));
        std::shuffle(negatives.begin(), negatives.end(), rng);
        const std::size_t n = positives.size();
        if (negatives.size() > n) negatives.resize(n);
        if (negatives.size() < n) {
            std::vector<std::string> unannotated;
            if (auto it = candidate_pools.find(q.query_id); it != candidate_pools.end()) {
                for (const auto& cid : it->second) {
                    if (!pool->count(cid)) unannotated.push_back(cid);
                }
            }
            std::shuffle(unannotated.begin(), unannotated.end(), rng);
            for (const auto& cid : unannotated) {
                if (negatives.size() == n) break;
                negatives.push_back(cid);
            }
            if (negatives.size() < n) result.short_negatives.push_back(q.query_id);
        }
        for (std::size_t j = 0; j < negatives.size(); ++j) {
            result.triplets.push_back({q.query_id, positives[j], negatives[j]});
        }
    }
    return result;
}

void write_triplets(const std::filesystem::path& path, const std::vector<Triplet>& triplets)
{
    std::string out;
    for (const auto& t : triplets) {
        out += io::join_tsv({t.query_id, t.positive_case_id, t.negative_case_id});
        out += '\n';
    }
    io::write_atomic(path, out);
}

std::vector<Triplet> read_triplets(const std::filesystem::path& path)
{
    std::vector<Triplet> out;
    io::for_each_line(path, [&](std::string_view line, std::size_t number) {
        auto f = io::split_tsv(line);
        if (f.size() != 3) {
            fail(ErrorKind::malformed_record, path.string() + ":" + std::to_string(number) + ": expected 3 fields");
        }
        out.push_back({f[0], f[1], f[2]});
    });
    return out;
}

}  // namespace lcr
