#pragma once

#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "cpd/costs.hpp"
#include "cpd/signal.hpp"

namespace cpd {

/// Candidate-grid controls shared by every search method.
///
/// Interior breakpoints must be multiples of `jump` and leave at least
/// `min_size` samples on both sides; the effective minimum segment length is
/// max(min_size, cost.min_size()).
struct SearchOptions {
    Index min_size = 1;
    Index jump = 1;
};

struct FixedCount {
    Index n_bkps;
};
struct PenaltyThreshold {
    double beta;
};

/// Stopping rule for the sequential methods.
class StoppingRule {
public:
    static StoppingRule fixed_k(Index n_bkps);
    static StoppingRule penalty_threshold(double beta);

    bool is_fixed() const { return std::holds_alternative<FixedCount>(rule_); }
    Index n_bkps() const { return std::get<FixedCount>(rule_).n_bkps; }
    double beta() const { return std::get<PenaltyThreshold>(rule_).beta; }

private:
    explicit StoppingRule(std::variant<FixedCount, PenaltyThreshold> rule) : rule_(rule) {}
    std::variant<FixedCount, PenaltyThreshold> rule_;
};

/// Admissible breakpoint positions for a cost under the given options, in
/// increasing order (0 and T excluded).
std::vector<Index> candidate_breakpoints(const CostModel& cost, const SearchOptions& opts);
Index effective_min_size(const CostModel& cost, const SearchOptions& opts);

/// Exact minimiser of the sum of costs with exactly `n_bkps` change points.
/// Ties resolve to the lexicographically smallest breakpoint sequence.
Segmentation opt_segment(const CostModel& cost, Index n_bkps, const SearchOptions& opts = {});

/// Optimal segmentations for every K in 0..k_max, from a single dynamic
/// programme. Entry K is missing when K changes do not fit.
std::vector<std::optional<Segmentation>> opt_path(const CostModel& cost, Index k_max,
                                                  const SearchOptions& opts = {});

struct PeltResult {
    Segmentation seg;
    /// V + beta * K at the optimum.
    double objective;
    /// Cost evaluations performed.
    std::size_t n_evals;
};

/// Exact minimiser of V + beta * K.
PeltResult pelt(const CostModel& cost, double beta, const SearchOptions& opts = {}, bool prune = true);
Segmentation pelt_segment(const CostModel& cost, double beta, const SearchOptions& opts = {});

struct ScorePoint {
    Index index;
    double score;
};

/// Sliding-window discrepancy c(t-w, t+w) - c(t-w, t) - c(t, t+w) for every
/// candidate t in [w, T - w].
std::vector<ScorePoint> window_scores(const CostModel& cost, Index width, const SearchOptions& opts = {});

Segmentation win_segment(const CostModel& cost, Index width, const StoppingRule& stop,
                         const SearchOptions& opts = {});

/// Peak picking used by win_segment: repeatedly take the largest remaining
/// score (smallest index on ties) and discard candidates within `width`.
std::vector<Index> pick_peaks(const std::vector<ScorePoint>& scores, Index width, const StoppingRule& stop);

struct SplitStep {
    Index breakpoint;
    double gain;
};

Segmentation binseg_segment(const CostModel& cost, const StoppingRule& stop, const SearchOptions& opts = {},
                            std::vector<SplitStep>* trace = nullptr);

Segmentation botup_segment(const CostModel& cost, Index delta, const StoppingRule& stop,
                           const SearchOptions& opts = {});

} // namespace cpd
