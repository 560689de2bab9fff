#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "cpd/costs.hpp"
#include "cpd/report.hpp"
#include "cpd/search.hpp"

namespace cpd {

/// Complexity charge on a segmentation. l0, bic, bic_l2 and aic_l2 are
/// linear in the number of change points; mbic and leb are not.
class Penalty {
public:
    enum class Kind { l0, bic, bic_l2, aic_l2, mbic, leb };

    static Penalty l0(double beta);
    static Penalty bic(double n_params);
    static Penalty bic_l2(double sigma);
    static Penalty aic_l2(double sigma);
    static Penalty mbic();
    static Penalty leb(double sigma, double a1, double a2);

    Kind kind() const { return kind_; }
    bool is_linear() const { return kind_ != Kind::mbic && kind_ != Kind::leb; }

    /// Per-change-point charge of a linear penalty for a signal of length T.
    double linear_beta(Index n_samples) const;

    /// Identifier in the command-line syntax, e.g. "l0:10" or "leb:1,2,5".
    std::string to_string() const;

    double value(const Segmentation& seg) const;

private:
    Penalty(Kind kind, double p0, double p1 = 0.0, double p2 = 0.0)
        : kind_(kind), p0_(p0), p1_(p1), p2_(p2) {}

    Kind kind_;
    double p0_; // beta | n_params | sigma
    double p1_; // a1
    double p2_; // a2
};

/// Parses "l0:<beta>", "bic:<p>", "bic_l2:<sigma>", "aic_l2:<sigma>", "mbic",
/// "leb:<sigma>,<a1>,<a2>".
Penalty parse_penalty(std::string_view text);

double pen_value(const Penalty& pen, const Segmentation& seg);

/// Parameter count of the MLE family behind a cost, for the BIC penalty.
std::optional<double> default_bic_params(CostKind kind, Index n_dims);

/// Robust noise level: median absolute deviation of first differences,
/// scaled to a Gaussian standard deviation and divided by sqrt(2). For d > 1
/// the per-dimension variances are averaged.
double estimate_noise_std(const Signal& signal);

/// Runs Opt for K = 0..k_max and keeps the smallest V + pen (smallest K on
/// ties). Works for any penalty.
DetectionReport sweep_penalty(const CostModel& cost, const Penalty& pen, Index k_max,
                              const SearchOptions& opts = {});

/// Unknown-K detection. Linear penalties go through Pelt with the equivalent
/// beta; the others sweep Opt over K = 0..k_max and keep the smallest
/// V + pen (smallest K on ties).
DetectionReport detect_with_penalty(const CostModel& cost, const Penalty& pen, Index k_max,
                                    const SearchOptions& opts = {});

} // namespace cpd
