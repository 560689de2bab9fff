#include "cpd/search.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cpd {

namespace {

struct Candidate {
    Index start;
    /// End time at which the candidate was found dominated, if any.
    Index dominated_at;
};

constexpr Index kNever = std::numeric_limits<Index>::max();

} // namespace

PeltResult pelt(const CostModel& cost, double beta, const SearchOptions& opts, bool prune) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("pelt requires a finite penalty beta > 0");
    }
    const Index n = cost.n_samples();
    const Index m = effective_min_size(cost, opts);
    constexpr double inf = std::numeric_limits<double>::infinity();

    std::vector<Index> ends = candidate_breakpoints(cost, opts);
    ends.push_back(n);

    // Objective and last change point of the best segmentation of (0, t].
    std::vector<double> best(n + 1, inf);
    std::vector<Index> parent(n + 1, 0);
    best[0] = -beta;

    std::vector<Candidate> admissible{{0, kNever}};
    std::vector<double> totals;
    std::size_t n_evals = 0;

    for (Index t : ends) {
        // A dominated start s can only be discarded once its dominating end
        // point t0 is itself a legal start, i.e. for t >= t0 + m. With m = 1
        // this is the usual immediate pruning.
        if (prune) {
            std::erase_if(admissible, [&](const Candidate& c) {
                return c.dominated_at != kNever && t >= c.dominated_at + m;
            });
        }
        totals.assign(admissible.size(), inf);
        double best_total = inf;
        Index best_start = 0;
        for (std::size_t i = 0; i < admissible.size(); ++i) {
            const Index s = admissible[i].start;
            if (t - s < m || !cost.admissible(s, t)) {
                continue;
            }
            totals[i] = best[s] + cost.eval(s, t);
            ++n_evals;
            const double candidate = totals[i] + beta;
            if (candidate < best_total) {
                best_total = candidate;
                best_start = s;
            }
        }
        if (best_total == inf) {
            continue;
        }
        best[t] = best_total;
        parent[t] = best_start;
        if (t == n) {
            break;
        }
        for (std::size_t i = 0; i < admissible.size(); ++i) {
            if (totals[i] < inf && totals[i] > best[t] && admissible[i].dominated_at == kNever) {
                admissible[i].dominated_at = t;
            }
        }
        admissible.push_back({t, kNever});
    }

    if (best[n] == inf) {
        throw std::invalid_argument("infeasible: no admissible segmentation");
    }
    std::vector<Index> bkps;
    for (Index t = n; t > 0; t = parent[t]) {
        bkps.push_back(t);
    }
    return {Segmentation::make(std::move(bkps), n), best[n], n_evals};
}

Segmentation pelt_segment(const CostModel& cost, double beta, const SearchOptions& opts) {
    return pelt(cost, beta, opts).seg;
}

} // namespace cpd
