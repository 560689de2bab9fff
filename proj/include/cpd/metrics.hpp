#pragma once

#include <optional>
#include <string>

#include "cpd/signal.hpp"

namespace cpd {

/// |K_pred - K_true| over interior breakpoints.
Index annotation_error(const Segmentation& truth, const Segmentation& pred);

/// Largest distance from a change point of either set to the nearest one of
/// the other. Both interior sets must be nonempty.
Index hausdorff(const Segmentation& truth, const Segmentation& pred);

/// Fraction of sample pairs s < t on which the two segmentations agree
/// (both grouped or both separated), over T(T-1)/2 pairs.
double rand_index(const Segmentation& truth, const Segmentation& pred);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// A true change point counts as detected when an unused prediction lies at
/// distance strictly below `margin`; predictions are matched one-to-one,
/// nearest first, scanning true points in increasing order.
PrecisionRecall precision_recall_f1(const Segmentation& truth, const Segmentation& pred, Index margin);

struct MetricReport {
    Index margin = 0;
    std::optional<Index> annotation_error;
    std::optional<Index> hausdorff;
    std::optional<double> rand_index;
    std::optional<PrecisionRecall> scores;
    /// metric name -> why it could not be computed
    std::vector<std::pair<std::string, std::string>> skipped;
};

/// Computes every metric whose preconditions hold.
MetricReport evaluate(const Segmentation& truth, const Segmentation& pred, Index margin);

} // namespace cpd
