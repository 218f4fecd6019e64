#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "partune/history.hpp"
#include "partune/objective.hpp"
#include "partune/space.hpp"

namespace partune {

// Fixed-length real encoding of a configuration: one value slot per parameter
// (category index, or value normalized to [0,1] over its range, log-space for
// log-scaled reals), then one activity slot per conditional parameter.
// Inactive parameters carry their default's encoding with activity 0.
class FeatureEncoding {
public:
    static FeatureEncoding make(const ParameterSpace& space);

    std::vector<double> encode(const ParameterSpace& space, const Configuration& config) const;
    size_t dim() const { return dim_; }

private:
    size_t dim_ = 0;
    std::vector<size_t> activity_slot_;  // per parameter index; SIZE_MAX = unconditional
};

std::vector<double> encode_features(const ParameterSpace& space, const Configuration& config);

struct ForestOptions {
    int trees = 40;
    int leaf_min = 3;
    double feature_frac = 5.0 / 6.0;  // features considered per split
    bool bootstrap = true;
    uint64_t seed = 0;
};

// Bootstrap ensemble of variance-minimizing regression trees over
// log10(per-run PAR contribution). Deterministic given history and seed.
class PerformanceModel {
public:
    static PerformanceModel fit(const ParameterSpace& space, const RunHistory& history,
                                const ObjectiveSpec& spec, const ForestOptions& options = {});

    // (mean, variance) in seconds: trees average in log space, the mean is
    // mapped back to seconds, the variance is across per-tree second-space
    // predictions.
    std::pair<double, double> predict(const Configuration& config) const;

    size_t tree_count() const { return trees_.size(); }
    const std::string& training_fingerprint() const { return fingerprint_; }
    const ParameterSpace& space() const { return space_; }

private:
    struct Node {
        int feature = -1;  // -1: leaf
        double threshold = 0;
        int left = -1;
        int right = -1;
        double value = 0;  // leaf mean, log10 seconds
    };
    struct Tree {
        std::vector<Node> nodes;
        double predict(const std::vector<double>& x) const;
    };

    ParameterSpace space_;
    FeatureEncoding encoding_;
    std::vector<Tree> trees_;
    std::string fingerprint_;
};

// fit_model precondition: at least two distinct configurations in the history.
PerformanceModel fit_model(const ParameterSpace& space, const RunHistory& history,
                           const ObjectiveSpec& spec, const ForestOptions& options = {});

// EI of a Gaussian belief (mean, variance) against the incumbent score f*.
// Degenerate at sigma=0: max(f* - mean, 0).
double expected_improvement(double mean, double variance, double f_star);

}  // namespace partune
