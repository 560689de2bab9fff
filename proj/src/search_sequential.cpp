#include "cpd/search.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace cpd {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

[[noreturn]] void infeasible(const std::string& what) {
    throw std::invalid_argument("infeasible: " + what);
}

} // namespace

// ---------------------------------------------------------------- Win

std::vector<ScorePoint> window_scores(const CostModel& cost, Index width, const SearchOptions& opts) {
    const Index n = cost.n_samples();
    const Index m = effective_min_size(cost, opts);
    if (width < 1 || 2 * width > n) {
        throw std::invalid_argument("window wider than signal: 2w=" + std::to_string(2 * width) +
                                    " > T=" + std::to_string(n));
    }
    if (width < m) {
        throw std::invalid_argument("window half-width must be >= min_size (" + std::to_string(m) + ")");
    }
    std::vector<ScorePoint> scores;
    for (Index t : candidate_breakpoints(cost, opts)) {
        if (t < width || t + width > n) {
            continue;
        }
        const Index a = t - width;
        const Index b = t + width;
        if (!cost.admissible(a, b) || !cost.admissible(a, t) || !cost.admissible(t, b)) {
            continue;
        }
        scores.push_back({t, cost.eval(a, b) - cost.eval(a, t) - cost.eval(t, b)});
    }
    return scores;
}

std::vector<Index> pick_peaks(const std::vector<ScorePoint>& scores, Index width, const StoppingRule& stop) {
    std::vector<bool> alive(scores.size(), true);
    std::vector<Index> peaks;
    while (true) {
        if (stop.is_fixed() && peaks.size() == stop.n_bkps()) {
            break;
        }
        std::size_t arg = scores.size();
        double top = kNegInf;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (alive[i] && (arg == scores.size() || scores[i].score > top)) {
                top = scores[i].score;
                arg = i;
            }
        }
        if (arg == scores.size()) {
            if (stop.is_fixed()) {
                infeasible("only " + std::to_string(peaks.size()) + " separated peaks available, " +
                           std::to_string(stop.n_bkps()) + " requested");
            }
            break;
        }
        if (!stop.is_fixed() && top < stop.beta()) {
            break;
        }
        const Index peak = scores[arg].index;
        peaks.push_back(peak);
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const Index t = scores[i].index;
            if ((t > peak ? t - peak : peak - t) <= width) {
                alive[i] = false;
            }
        }
    }
    std::sort(peaks.begin(), peaks.end());
    return peaks;
}

Segmentation win_segment(const CostModel& cost, Index width, const StoppingRule& stop, const SearchOptions& opts) {
    return Segmentation::make(pick_peaks(window_scores(cost, width, opts), width, stop), cost.n_samples());
}

// ---------------------------------------------------------------- BinSeg

namespace {

struct Split {
    Index at = 0;
    double gain = kNegInf;
    bool valid = false;
};

Split best_split(const CostModel& cost, Index a, Index b, const std::vector<Index>& grid, Index m) {
    Split out;
    if (!cost.admissible(a, b)) {
        return out;
    }
    const double whole = cost.eval(a, b);
    double best = std::numeric_limits<double>::infinity();
    for (auto it = std::upper_bound(grid.begin(), grid.end(), a); it != grid.end() && *it < b; ++it) {
        const Index t = *it;
        if (t - a < m || b - t < m || !cost.admissible(a, t) || !cost.admissible(t, b)) {
            continue;
        }
        const double total = cost.eval(a, t) + cost.eval(t, b);
        if (total < best) {
            best = total;
            out.at = t;
            out.valid = true;
        }
    }
    if (out.valid) {
        out.gain = whole - best;
    }
    return out;
}

} // namespace

Segmentation binseg_segment(const CostModel& cost, const StoppingRule& stop, const SearchOptions& opts,
                            std::vector<SplitStep>* trace) {
    const Index n = cost.n_samples();
    const Index m = effective_min_size(cost, opts);
    const auto grid = candidate_breakpoints(cost, opts);

    // segment start -> (end, best split)
    std::map<Index, std::pair<Index, Split>> segments;
    segments[0] = {n, best_split(cost, 0, n, grid, m)};
    std::vector<Index> bkps;
    while (!(stop.is_fixed() && bkps.size() == stop.n_bkps())) {
        auto chosen = segments.end();
        for (auto it = segments.begin(); it != segments.end(); ++it) {
            const Split& s = it->second.second;
            if (s.valid && (chosen == segments.end() || s.gain > chosen->second.second.gain)) {
                chosen = it;
            }
        }
        if (chosen == segments.end()) {
            if (stop.is_fixed()) {
                infeasible("binseg found only " + std::to_string(bkps.size()) + " admissible splits, " +
                           std::to_string(stop.n_bkps()) + " requested");
            }
            break;
        }
        const Split split = chosen->second.second;
        if (!stop.is_fixed() && split.gain < stop.beta()) {
            break;
        }
        const Index a = chosen->first;
        const Index b = chosen->second.first;
        bkps.push_back(split.at);
        if (trace) {
            trace->push_back({split.at, split.gain});
        }
        segments[a] = {split.at, best_split(cost, a, split.at, grid, m)};
        segments[split.at] = {b, best_split(cost, split.at, b, grid, m)};
    }
    return Segmentation::make(std::move(bkps), n);
}

// ---------------------------------------------------------------- BotUp

Segmentation botup_segment(const CostModel& cost, Index delta, const StoppingRule& stop, const SearchOptions& opts) {
    const Index n = cost.n_samples();
    const Index m = effective_min_size(cost, opts);
    if (delta <= 2) {
        throw std::invalid_argument("botup grid size delta must be > 2");
    }
    if (delta < m) {
        throw std::invalid_argument("botup grid size delta must be >= min_size (" + std::to_string(m) + ")");
    }
    if (delta % opts.jump != 0) {
        throw std::invalid_argument("botup grid size delta must be a multiple of jump");
    }
    // bkps holds 0, the interior points, and n.
    std::vector<Index> bkps{0};
    for (Index t = delta; t + delta <= n; t += delta) {
        bkps.push_back(t);
    }
    bkps.push_back(n);
    if (stop.is_fixed() && stop.n_bkps() > bkps.size() - 2) {
        infeasible("botup initial grid has " + std::to_string(bkps.size() - 2) + " points, " +
                   std::to_string(stop.n_bkps()) + " requested");
    }

    auto merge_gain = [&](std::size_t i) {
        const Index a = bkps[i - 1];
        const Index t = bkps[i];
        const Index b = bkps[i + 1];
        return cost.eval(a, b) - cost.eval(a, t) - cost.eval(t, b);
    };
    // gains[i] belongs to bkps[i]; entries 0 and n are unused.
    std::vector<double> gains(bkps.size(), 0.0);
    for (std::size_t i = 1; i + 1 < bkps.size(); ++i) {
        gains[i] = merge_gain(i);
    }

    while (bkps.size() > 2) {
        if (stop.is_fixed() && bkps.size() - 2 == stop.n_bkps()) {
            break;
        }
        std::size_t arg = 1;
        for (std::size_t i = 2; i + 1 < bkps.size(); ++i) {
            if (gains[i] < gains[arg]) {
                arg = i;
            }
        }
        if (!stop.is_fixed() && gains[arg] > stop.beta()) {
            break;
        }
        bkps.erase(bkps.begin() + static_cast<std::ptrdiff_t>(arg));
        gains.erase(gains.begin() + static_cast<std::ptrdiff_t>(arg));
        if (arg - 1 >= 1) {
            gains[arg - 1] = merge_gain(arg - 1);
        }
        if (arg + 1 < bkps.size()) {
            gains[arg] = merge_gain(arg);
        }
    }
    std::vector<Index> interior(bkps.begin() + 1, bkps.end() - 1);
    return Segmentation::make(std::move(interior), n);
}

} // namespace cpd
