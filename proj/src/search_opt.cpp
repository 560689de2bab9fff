#include "cpd/search.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace cpd {

StoppingRule StoppingRule::fixed_k(Index n_bkps) { return StoppingRule(FixedCount{n_bkps}); }

StoppingRule StoppingRule::penalty_threshold(double beta) {
    if (!(beta > 0.0)) {
        throw std::invalid_argument("penalty threshold must be > 0");
    }
    return StoppingRule(PenaltyThreshold{beta});
}

Index effective_min_size(const CostModel& cost, const SearchOptions& opts) {
    if (opts.jump < 1) {
        throw std::invalid_argument("jump must be >= 1");
    }
    return std::max<Index>({opts.min_size, cost.min_size(), 1});
}

std::vector<Index> candidate_breakpoints(const CostModel& cost, const SearchOptions& opts) {
    const Index m = effective_min_size(cost, opts);
    const Index n = cost.n_samples();
    std::vector<Index> out;
    if (n < 2 * m) {
        return out;
    }
    const Index first = ((m + opts.jump - 1) / opts.jump) * opts.jump;
    for (Index t = first; t + m <= n; t += opts.jump) {
        out.push_back(t);
    }
    return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Suffix dynamic programme over positions {0} + candidates:
// best[k][i] is the minimal cost of splitting (pos_i, T] with k breakpoints.
class SuffixTable {
public:
    SuffixTable(const CostModel& cost, const SearchOptions& opts, Index k_max)
        : cost_(cost), min_size_(effective_min_size(cost, opts)) {
        positions_.push_back(0);
        for (Index t : candidate_breakpoints(cost, opts)) {
            positions_.push_back(t);
        }
        const std::size_t g = positions_.size();
        // Pair costs are reused across layers from K = 2 on.
        if (k_max >= 2 && g * g <= (std::size_t{1} << 22)) {
            pair_cache_.assign(g * g, std::numeric_limits<double>::quiet_NaN());
        }

        best_.assign(k_max + 1, std::vector<double>(g, kInf));
        next_.assign(k_max + 1, std::vector<std::size_t>(g, g));
        const Index n = cost.n_samples();
        for (std::size_t i = 0; i < g; ++i) {
            if (cost.admissible(positions_[i], n)) {
                best_[0][i] = cost.eval(positions_[i], n);
            }
        }
        for (Index k = 1; k <= k_max; ++k) {
            // The top layer is only read at position 0.
            const std::size_t last = k == k_max ? 1 : g;
            for (std::size_t i = 0; i < last; ++i) {
                double best = kInf;
                std::size_t arg = g;
                for (std::size_t j = i + 1; j < g; ++j) {
                    const double tail = best_[k - 1][j];
                    if (tail == kInf || positions_[j] - positions_[i] < min_size_) {
                        continue;
                    }
                    if (!cost.admissible(positions_[i], positions_[j])) {
                        continue;
                    }
                    const double total = pair(i, j) + tail;
                    if (total < best) {
                        best = total;
                        arg = j;
                    }
                }
                best_[k][i] = best;
                next_[k][i] = arg;
            }
        }
    }

    bool feasible(Index k) const { return k < best_.size() && best_[k][0] < kInf; }

    Segmentation reconstruct(Index k) const {
        std::vector<Index> bkps;
        std::size_t i = 0;
        for (Index layer = k; layer > 0; --layer) {
            i = next_[layer][i];
            bkps.push_back(positions_[i]);
        }
        return Segmentation::make(std::move(bkps), cost_.n_samples());
    }

private:
    double pair(std::size_t i, std::size_t j) const {
        if (pair_cache_.empty()) {
            return cost_.eval(positions_[i], positions_[j]);
        }
        double& slot = pair_cache_[i * positions_.size() + j];
        if (slot != slot) {
            slot = cost_.eval(positions_[i], positions_[j]);
        }
        return slot;
    }

    const CostModel& cost_;
    Index min_size_;
    std::vector<Index> positions_;
    mutable std::vector<double> pair_cache_;
    std::vector<std::vector<double>> best_;
    std::vector<std::vector<std::size_t>> next_;
};

} // namespace

Segmentation opt_segment(const CostModel& cost, Index n_bkps, const SearchOptions& opts) {
    SuffixTable table(cost, opts, n_bkps);
    if (!table.feasible(n_bkps)) {
        throw std::invalid_argument("infeasible: cannot place " + std::to_string(n_bkps) +
                                    " change points with min_size " +
                                    std::to_string(effective_min_size(cost, opts)) + " and jump " +
                                    std::to_string(opts.jump));
    }
    return table.reconstruct(n_bkps);
}

std::vector<std::optional<Segmentation>> opt_path(const CostModel& cost, Index k_max, const SearchOptions& opts) {
    SuffixTable table(cost, opts, k_max);
    std::vector<std::optional<Segmentation>> out(k_max + 1);
    for (Index k = 0; k <= k_max; ++k) {
        if (table.feasible(k)) {
            out[k] = table.reconstruct(k);
        }
    }
    return out;
}

} // namespace cpd
