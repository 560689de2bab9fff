#include "cpd/rng.hpp"
#include "cpd/signal.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace cpd {

void validate(const GeneratorSpec& spec) {
    if (spec.n_samples < 1 || spec.n_dims < 1) {
        throw std::invalid_argument("generator needs T >= 1 and d >= 1");
    }
    if (spec.min_spacing < 1) {
        throw std::invalid_argument("min_spacing must be >= 1");
    }
    if (!(spec.noise_std >= 0.0)) {
        throw std::invalid_argument("noise_std must be >= 0");
    }
    if (!(spec.jump_lo >= 0.0) || spec.jump_hi < spec.jump_lo) {
        throw std::invalid_argument("jump range must satisfy 0 <= lo <= hi");
    }
    if ((spec.n_bkps + 1) * spec.min_spacing > spec.n_samples) {
        throw std::invalid_argument("infeasible spacing: (n_bkps + 1) * min_spacing > T");
    }
}

std::vector<Index> draw_breakpoints(Index n_samples, Index n_bkps, Index min_spacing,
                                    std::uint64_t seed) {
    if (min_spacing < 1 || (n_bkps + 1) * min_spacing > n_samples) {
        throw std::invalid_argument("infeasible spacing: (n_bkps + 1) * min_spacing > T");
    }
    // Parts x_i >= m summing to T map to parts x_i - m + 1 >= 1 summing to
    // N = T - (n_bkps + 1)(m - 1), i.e. to an n_bkps-subset of {1, .., N - 1}.
    const Index reduced = n_samples - (n_bkps + 1) * (min_spacing - 1);
    Rng rng(seed);
    std::set<Index> cuts;
    // Floyd's sampling of an n_bkps-subset of {1, .., reduced - 1}.
    for (Index j = reduced - n_bkps; j < reduced; ++j) {
        const Index candidate = 1 + rng.below(j);
        if (!cuts.insert(candidate).second) {
            cuts.insert(j);
        }
    }
    std::vector<Index> bkps;
    bkps.reserve(n_bkps + 1);
    Index k = 1;
    for (Index c : cuts) {
        bkps.push_back(c + k * (min_spacing - 1));
        ++k;
    }
    bkps.push_back(n_samples);
    return bkps;
}

namespace {

// Distinct streams for breakpoints and values, so changing T does not
// reshuffle the breakpoint draw for a given seed and vice versa.
constexpr std::uint64_t kValueStream = 0x9E3779B97F4A7C15ULL;

} // namespace

std::pair<Signal, Segmentation> generate_pw_constant(const GeneratorSpec& spec) {
    validate(spec);
    auto bkps = draw_breakpoints(spec.n_samples, spec.n_bkps, spec.min_spacing, spec.seed);
    Rng rng(spec.seed ^ kValueStream);

    const auto rows = static_cast<Eigen::Index>(spec.n_samples);
    const auto cols = static_cast<Eigen::Index>(spec.n_dims);
    Eigen::MatrixXd data(rows, cols);
    Eigen::VectorXd level = Eigen::VectorXd::Zero(cols);
    Index start = 0;
    for (std::size_t k = 0; k < bkps.size(); ++k) {
        if (k > 0) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                const double jump = rng.uniform(spec.jump_lo, spec.jump_hi);
                level(j) += rng.coin() ? jump : -jump;
            }
        }
        for (Index t = start; t < bkps[k]; ++t) {
            data.row(static_cast<Eigen::Index>(t)) = level.transpose();
        }
        start = bkps[k];
    }
    if (spec.noise_std > 0.0) {
        for (Eigen::Index t = 0; t < rows; ++t) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                data(t, j) += spec.noise_std * rng.normal();
            }
        }
    }
    auto seg = Segmentation::make(bkps, spec.n_samples);
    return {Signal(std::move(data)), std::move(seg)};
}

std::pair<Signal, Segmentation> generate_pw_scale(const GeneratorSpec& spec) {
    validate(spec);
    if (spec.jump_lo <= 0.0) {
        throw std::invalid_argument("scale factors must be positive");
    }
    auto bkps = draw_breakpoints(spec.n_samples, spec.n_bkps, spec.min_spacing, spec.seed);
    Rng rng(spec.seed ^ kValueStream);

    const auto rows = static_cast<Eigen::Index>(spec.n_samples);
    const auto cols = static_cast<Eigen::Index>(spec.n_dims);
    Eigen::MatrixXd data(rows, cols);
    Eigen::VectorXd scale = Eigen::VectorXd::Constant(cols, spec.noise_std > 0.0 ? spec.noise_std : 1.0);
    Index start = 0;
    for (std::size_t k = 0; k < bkps.size(); ++k) {
        if (k > 0) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                const double factor = rng.uniform(spec.jump_lo, spec.jump_hi);
                scale(j) = (k % 2 == 1) ? scale(j) * factor : scale(j) / factor;
            }
        }
        for (Index t = start; t < bkps[k]; ++t) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                data(static_cast<Eigen::Index>(t), j) = scale(j) * rng.normal();
            }
        }
        start = bkps[k];
    }
    auto seg = Segmentation::make(bkps, spec.n_samples);
    return {Signal(std::move(data)), std::move(seg)};
}

} // namespace cpd
