#include "partune/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "partune/rng.hpp"

namespace partune {

namespace {

constexpr double kMinLabelSeconds = 1e-6;  // log-label floor for near-zero runtimes

double encode_slot(const Parameter& p, const Value& v) {
    if (const auto* r = std::get_if<IntegerRange>(&p.domain)) {
        if (r->hi == r->lo) return 0.0;
        return static_cast<double>(std::get<int64_t>(v) - r->lo) /
               static_cast<double>(r->hi - r->lo);
    }
    if (const auto* rr = std::get_if<RealRange>(&p.domain)) {
        if (rr->hi == rr->lo) return 0.0;
        if (rr->log_scale)
            return (std::log10(std::get<double>(v)) - std::log10(rr->lo)) /
                   (std::log10(rr->hi) - std::log10(rr->lo));
        return (std::get<double>(v) - rr->lo) / (rr->hi - rr->lo);
    }
    const auto& cat = std::get<Categorical>(p.domain);
    const auto& s = std::get<std::string>(v);
    auto it = std::find(cat.values.begin(), cat.values.end(), s);
    return static_cast<double>(it - cat.values.begin());
}

}  // namespace

FeatureEncoding FeatureEncoding::make(const ParameterSpace& space) {
    FeatureEncoding enc;
    enc.activity_slot_.assign(space.parameters().size(), SIZE_MAX);
    size_t next = space.parameters().size();
    for (size_t i = 0; i < space.parameters().size(); ++i)
        if (space.condition_of(space.parameters()[i].name)) enc.activity_slot_[i] = next++;
    enc.dim_ = next;
    return enc;
}

std::vector<double> FeatureEncoding::encode(const ParameterSpace& space,
                                            const Configuration& config) const {
    std::vector<double> x(dim_, 0.0);
    const auto& params = space.parameters();
    for (size_t i = 0; i < params.size(); ++i) {
        const Parameter& p = params[i];
        const Value* v = config.find(p.name);
        x[i] = encode_slot(p, v ? *v : p.default_value);
        if (activity_slot_[i] != SIZE_MAX) x[activity_slot_[i]] = v ? 1.0 : 0.0;
    }
    return x;
}

std::vector<double> encode_features(const ParameterSpace& space, const Configuration& config) {
    return FeatureEncoding::make(space).encode(space, config);
}

double PerformanceModel::Tree::predict(const std::vector<double>& x) const {
    int n = 0;
    while (nodes[n].feature >= 0)
        n = x[static_cast<size_t>(nodes[n].feature)] <= nodes[n].threshold ? nodes[n].left
                                                                           : nodes[n].right;
    return nodes[n].value;
}

PerformanceModel PerformanceModel::fit(const ParameterSpace& space, const RunHistory& history,
                                       const ObjectiveSpec& spec, const ForestOptions& options) {
    if (history.run_count() == 0 || history.distinct_configs() < 2)
        throw std::invalid_argument("model fitting needs runs of at least two distinct configurations");

    PerformanceModel model;
    model.space_ = space;
    model.encoding_ = FeatureEncoding::make(space);

    std::vector<std::vector<double>> features;
    std::vector<double> labels;
    features.reserve(history.run_count());
    labels.reserve(history.run_count());
    std::string fp;
    for (const RunResult& r : history.runs()) {
        if (r.outcome == Outcome::HarnessError) continue;
        features.push_back(model.encoding_.encode(space, r.spec.config));
        labels.push_back(std::log10(std::max(par_contribution(r, spec), kMinLabelSeconds)));
        fp += r.spec.config.id();
        fp += ';';
    }
    model.fingerprint_ = hex64(fnv1a64(fp + std::to_string(labels.size())));

    const size_t n = labels.size();
    const size_t d = model.encoding_.dim();
    const size_t features_per_split =
        std::max<size_t>(1, static_cast<size_t>(std::ceil(options.feature_frac * static_cast<double>(d))));

    Rng rng(derive_seed(options.seed, 0x6f7265737401ull));

    // recursive variance-minimizing splitter over an index set
    struct Frame {
        std::vector<size_t> idx;
        int node;
    };

    for (int t = 0; t < options.trees; ++t) {
        Tree tree;
        std::vector<size_t> sample(n);
        if (options.bootstrap) {
            for (size_t i = 0; i < n; ++i) sample[i] = rng.next_index(n);
        } else {
            std::iota(sample.begin(), sample.end(), size_t{0});
        }

        tree.nodes.push_back({});
        std::vector<Frame> stack;
        stack.push_back({std::move(sample), 0});
        while (!stack.empty()) {
            Frame frame = std::move(stack.back());
            stack.pop_back();
            auto& idx = frame.idx;

            double sum = 0, sum2 = 0;
            for (size_t i : idx) {
                sum += labels[i];
                sum2 += labels[i] * labels[i];
            }
            const double m = idx.size();
            const double node_sse = sum2 - sum * sum / m;
            auto make_leaf = [&] {
                tree.nodes[static_cast<size_t>(frame.node)] = {-1, 0, -1, -1, sum / m};
            };
            if (idx.size() < 2 * static_cast<size_t>(options.leaf_min) || node_sse <= 1e-12) {
                make_leaf();
                continue;
            }

            // random feature subset, scanned in ascending id for determinism
            std::vector<size_t> pool(d);
            std::iota(pool.begin(), pool.end(), size_t{0});
            for (size_t i = 0; i < features_per_split && i + 1 < d; ++i) {
                size_t j = i + rng.next_index(d - i);
                std::swap(pool[i], pool[j]);
            }
            pool.resize(std::min(features_per_split, d));
            std::sort(pool.begin(), pool.end());

            int best_feature = -1;
            double best_threshold = 0, best_sse = node_sse;
            std::vector<size_t> order(idx);
            for (size_t f : pool) {
                std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                    double va = features[a][f], vb = features[b][f];
                    return va != vb ? va < vb : a < b;
                });
                double left_sum = 0, left_sum2 = 0;
                for (size_t i = 0; i + 1 < order.size(); ++i) {
                    double y = labels[order[i]];
                    left_sum += y;
                    left_sum2 += y * y;
                    size_t nl = i + 1, nr = order.size() - nl;
                    if (nl < static_cast<size_t>(options.leaf_min) ||
                        nr < static_cast<size_t>(options.leaf_min))
                        continue;
                    if (features[order[i]][f] == features[order[i + 1]][f]) continue;
                    double right_sum = sum - left_sum, right_sum2 = sum2 - left_sum2;
                    double sse = (left_sum2 - left_sum * left_sum / static_cast<double>(nl)) +
                                 (right_sum2 - right_sum * right_sum / static_cast<double>(nr));
                    if (sse < best_sse - 1e-15) {
                        best_sse = sse;
                        best_feature = static_cast<int>(f);
                        best_threshold = features[order[i]][f];  // left: value <= threshold
                    }
                }
            }
            if (best_feature < 0) {
                make_leaf();
                continue;
            }

            std::vector<size_t> left, right;
            for (size_t i : idx)
                (features[i][static_cast<size_t>(best_feature)] <= best_threshold ? left : right)
                    .push_back(i);
            int l = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({});
            int r = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back({});
            tree.nodes[static_cast<size_t>(frame.node)] = {best_feature, best_threshold, l, r, 0};
            stack.push_back({std::move(right), r});
            stack.push_back({std::move(left), l});
        }
        model.trees_.push_back(std::move(tree));
    }
    return model;
}

std::pair<double, double> PerformanceModel::predict(const Configuration& config) const {
    for (const auto& [name, value] : config.values())
        if (!space_.find_parameter(name))
            throw ConfigError(ConfigError::Kind::SpaceMismatch,
                              "configuration parameter '" + name + "' unknown to the model's space");
    std::vector<double> x = encoding_.encode(space_, config);
    double log_sum = 0;
    std::vector<double> secs(trees_.size());
    for (size_t t = 0; t < trees_.size(); ++t) {
        double l = trees_[t].predict(x);
        log_sum += l;
        secs[t] = std::pow(10.0, l);
    }
    const double n = static_cast<double>(trees_.size());
    double mean = std::pow(10.0, log_sum / n);
    double var = 0;
    for (double s : secs) var += (s - mean) * (s - mean);
    var /= n;
    // across-tree spread around the reported mean; exactly 0 when trees agree
    if (trees_.size() == 1) var = 0;
    return {mean, var};
}

PerformanceModel fit_model(const ParameterSpace& space, const RunHistory& history,
                           const ObjectiveSpec& spec, const ForestOptions& options) {
    return PerformanceModel::fit(space, history, spec, options);
}

double expected_improvement(double mean, double variance, double f_star) {
    if (variance < 0) throw std::invalid_argument("negative variance");
    const double sigma = std::sqrt(variance);
    if (sigma == 0) return std::max(f_star - mean, 0.0);
    const double z = (f_star - mean) / sigma;
    const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    const double Phi = 0.5 * std::erfc(-z / std::sqrt(2.0));
    return (f_star - mean) * Phi + sigma * phi;
}

}  // namespace partune
