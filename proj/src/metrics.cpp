#include "cpd/metrics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace cpd {

namespace {

void require_same_length(const Segmentation& truth, const Segmentation& pred) {
    if (truth.n_samples() != pred.n_samples()) {
        throw std::invalid_argument("segmentations refer to different lengths (T=" +
                                    std::to_string(truth.n_samples()) + " vs " +
                                    std::to_string(pred.n_samples()) + ")");
    }
}

Index distance(Index a, Index b) { return a > b ? a - b : b - a; }

Index directed(std::span<const Index> from, std::span<const Index> to) {
    Index worst = 0;
    for (Index x : from) {
        // `to` is sorted: the nearest point is next to the insertion position.
        const auto it = std::lower_bound(to.begin(), to.end(), x);
        Index nearest = std::numeric_limits<Index>::max();
        if (it != to.end()) {
            nearest = distance(*it, x);
        }
        if (it != to.begin()) {
            nearest = std::min(nearest, distance(*std::prev(it), x));
        }
        worst = std::max(worst, nearest);
    }
    return worst;
}

double pairs(Index n) { return 0.5 * static_cast<double>(n) * static_cast<double>(n > 0 ? n - 1 : 0); }

} // namespace

Index annotation_error(const Segmentation& truth, const Segmentation& pred) {
    require_same_length(truth, pred);
    return distance(truth.n_changes(), pred.n_changes());
}

Index hausdorff(const Segmentation& truth, const Segmentation& pred) {
    require_same_length(truth, pred);
    const auto t = truth.change_points();
    const auto p = pred.change_points();
    if (t.empty() || p.empty()) {
        throw std::invalid_argument("hausdorff is undefined for empty change set");
    }
    return std::max(directed(t, p), directed(p, t));
}

double rand_index(const Segmentation& truth, const Segmentation& pred) {
    require_same_length(truth, pred);
    const Index n = truth.n_samples();
    if (n < 2) {
        throw std::invalid_argument("rand index needs T >= 2");
    }
    // Walk both breakpoint lists at once; every step is one cell of the
    // truth-segment x pred-segment overlap table.
    const auto& tb = truth.bkps();
    const auto& pb = pred.bkps();
    double grouped_both = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    Index start = 0;
    while (i < tb.size() && j < pb.size()) {
        const Index end = std::min(tb[i], pb[j]);
        grouped_both += pairs(end - start);
        start = end;
        if (tb[i] == end) {
            ++i;
        }
        if (pb[j] == end) {
            ++j;
        }
    }
    double grouped_truth = 0.0;
    for (const auto& [a, b] : truth.segments()) {
        grouped_truth += pairs(b - a);
    }
    double grouped_pred = 0.0;
    for (const auto& [a, b] : pred.segments()) {
        grouped_pred += pairs(b - a);
    }
    const double total = pairs(n);
    const double separated_both = total - grouped_truth - grouped_pred + grouped_both;
    return (grouped_both + separated_both) / total;
}

PrecisionRecall precision_recall_f1(const Segmentation& truth, const Segmentation& pred, Index margin) {
    require_same_length(truth, pred);
    const auto t = truth.change_points();
    const auto p = pred.change_points();
    if (t.empty() || p.empty()) {
        throw std::invalid_argument("precision/recall need nonempty change sets");
    }
    if (margin < 1) {
        throw std::invalid_argument("margin must be > 0");
    }
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (margin >= t[k] - t[k - 1]) {
            throw std::invalid_argument("margin must be smaller than the minimum spacing of true change points");
        }
    }
    std::vector<bool> used(p.size(), false);
    std::size_t hits = 0;
    for (Index target : t) {
        std::size_t arg = p.size();
        Index best = margin;
        for (std::size_t k = 0; k < p.size(); ++k) {
            const Index dist = distance(p[k], target);
            if (!used[k] && dist < best) {
                best = dist;
                arg = k;
            }
        }
        if (arg != p.size()) {
            used[arg] = true;
            ++hits;
        }
    }
    PrecisionRecall out;
    out.precision = static_cast<double>(hits) / static_cast<double>(p.size());
    out.recall = static_cast<double>(hits) / static_cast<double>(t.size());
    const double denom = out.precision + out.recall;
    out.f1 = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
    return out;
}

MetricReport evaluate(const Segmentation& truth, const Segmentation& pred, Index margin) {
    require_same_length(truth, pred);
    MetricReport report;
    report.margin = margin;
    report.annotation_error = annotation_error(truth, pred);
    auto attempt = [&](const char* name, auto&& fn) {
        try {
            fn();
        } catch (const std::invalid_argument& e) {
            report.skipped.emplace_back(name, e.what());
        }
    };
    attempt("hausdorff", [&] { report.hausdorff = hausdorff(truth, pred); });
    attempt("rand_index", [&] { report.rand_index = rand_index(truth, pred); });
    attempt("f1", [&] { report.scores = precision_recall_f1(truth, pred, margin); });
    return report;
}

} // namespace cpd
