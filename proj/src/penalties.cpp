#include "cpd/penalties.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <charconv>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cpd {

namespace {

void require_positive(double value, const char* what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw std::invalid_argument(std::string(what) + " must be a finite value > 0");
    }
}

double parse_double(std::string_view text, const char* what) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc() || ptr != end) {
        throw std::invalid_argument(std::string("cannot parse ") + what + " from '" + std::string(text) + "'");
    }
    return value;
}

std::string format(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

double median(std::vector<double> values) {
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    if (values.size() % 2 == 1) {
        return *mid;
    }
    const double upper = *mid;
    const double lower = *std::max_element(values.begin(), mid);
    return 0.5 * (lower + upper);
}

} // namespace

Penalty Penalty::l0(double beta) {
    require_positive(beta, "l0 penalty beta");
    return {Kind::l0, beta};
}

Penalty Penalty::bic(double n_params) {
    if (!(n_params >= 1.0) || !std::isfinite(n_params)) {
        throw std::invalid_argument("bic parameter count must be >= 1");
    }
    return {Kind::bic, n_params};
}

Penalty Penalty::bic_l2(double sigma) {
    require_positive(sigma, "bic_l2 sigma");
    return {Kind::bic_l2, sigma};
}

Penalty Penalty::aic_l2(double sigma) {
    require_positive(sigma, "aic_l2 sigma");
    return {Kind::aic_l2, sigma};
}

Penalty Penalty::mbic() { return {Kind::mbic, 0.0}; }

Penalty Penalty::leb(double sigma, double a1, double a2) {
    require_positive(sigma, "leb sigma");
    require_positive(a1, "leb a1");
    require_positive(a2, "leb a2");
    return {Kind::leb, sigma, a1, a2};
}

double Penalty::linear_beta(Index n_samples) const {
    const double log_t = std::log(static_cast<double>(n_samples));
    switch (kind_) {
    case Kind::l0:
        return p0_;
    case Kind::bic:
        return 0.5 * p0_ * log_t;
    case Kind::bic_l2:
        return p0_ * p0_ * log_t;
    case Kind::aic_l2:
        return p0_ * p0_;
    case Kind::mbic:
    case Kind::leb:
        break;
    }
    throw std::logic_error("penalty " + to_string() + " is not linear");
}

std::string Penalty::to_string() const {
    switch (kind_) {
    case Kind::l0:
        return "l0:" + format(p0_);
    case Kind::bic:
        return "bic:" + format(p0_);
    case Kind::bic_l2:
        return "bic_l2:" + format(p0_);
    case Kind::aic_l2:
        return "aic_l2:" + format(p0_);
    case Kind::mbic:
        return "mbic";
    case Kind::leb:
        return "leb:" + format(p0_) + "," + format(p1_) + "," + format(p2_);
    }
    return "unknown";
}

double Penalty::value(const Segmentation& seg) const {
    const double k = static_cast<double>(seg.n_changes());
    const double n = static_cast<double>(seg.n_samples());
    if (is_linear()) {
        return linear_beta(seg.n_samples()) * k;
    }
    if (kind_ == Kind::mbic) {
        // Sum over all K + 1 segments, t_0 = 0 and t_{K+1} = T.
        double acc = 3.0 * k * std::log(n);
        for (const auto& [a, b] : seg.segments()) {
            acc += std::log(static_cast<double>(b - a) / n);
        }
        return acc;
    }
    const double ratio = (k + 1.0) / n;
    return ratio * p0_ * p0_ * (p1_ * std::log(ratio) + p2_);
}

Penalty parse_penalty(std::string_view text) {
    const auto colon = text.find(':');
    const std::string_view name = text.substr(0, colon);
    const std::string_view args = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
    auto single = [&](const char* what) {
        if (colon == std::string_view::npos) {
            throw std::invalid_argument("penalty '" + std::string(name) + "' needs a parameter");
        }
        return parse_double(args, what);
    };
    if (name == "l0") {
        return Penalty::l0(single("beta"));
    }
    if (name == "bic") {
        return Penalty::bic(single("p"));
    }
    if (name == "bic_l2") {
        return Penalty::bic_l2(single("sigma"));
    }
    if (name == "aic_l2") {
        return Penalty::aic_l2(single("sigma"));
    }
    if (name == "mbic") {
        if (colon != std::string_view::npos) {
            throw std::invalid_argument("mbic takes no parameters");
        }
        return Penalty::mbic();
    }
    if (name == "leb") {
        std::vector<double> parts;
        std::size_t start = 0;
        while (colon != std::string_view::npos) {
            const auto comma = args.find(',', start);
            parts.push_back(parse_double(args.substr(start, comma - start), "leb parameter"));
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        if (parts.size() != 3) {
            throw std::invalid_argument("leb penalty expects leb:<sigma>,<a1>,<a2>");
        }
        return Penalty::leb(parts[0], parts[1], parts[2]);
    }
    throw std::invalid_argument("unknown penalty '" + std::string(text) + "'");
}

double pen_value(const Penalty& pen, const Segmentation& seg) { return pen.value(seg); }

std::optional<double> default_bic_params(CostKind kind, Index n_dims) {
    const auto d = static_cast<double>(n_dims);
    switch (kind) {
    case CostKind::l2:
    case CostKind::poisson:
        return d;
    case CostKind::normal:
        return d * (d + 3.0) / 2.0;
    default:
        return std::nullopt;
    }
}

double estimate_noise_std(const Signal& signal) {
    const auto& y = signal.data();
    if (y.rows() < 2) {
        throw std::invalid_argument("noise estimate needs at least two samples");
    }
    // 1.4826 * MAD estimates a Gaussian std.
    constexpr double kMadToStd = 1.4826;
    double variance = 0.0;
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
        std::vector<double> diffs(static_cast<std::size_t>(y.rows() - 1));
        for (Eigen::Index t = 1; t < y.rows(); ++t) {
            diffs[static_cast<std::size_t>(t - 1)] = y(t, j) - y(t - 1, j);
        }
        const double center = median(diffs);
        for (double& v : diffs) {
            v = std::abs(v - center);
        }
        const double sigma = kMadToStd * median(diffs) / std::sqrt(2.0);
        variance += sigma * sigma;
    }
    return std::sqrt(variance / static_cast<double>(y.cols()));
}

DetectionReport sweep_penalty(const CostModel& cost, const Penalty& pen, Index k_max, const SearchOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    const auto path = opt_path(cost, k_max, opts);
    if (!path[k_max]) {
        throw std::invalid_argument("infeasible: k_max=" + std::to_string(k_max) +
                                    " change points do not fit with min_size " +
                                    std::to_string(effective_min_size(cost, opts)));
    }
    DetectionReport report{.method = "opt",
                           .cost = std::string(to_string(cost.kind())),
                           .breakpoints = *path[0]};
    double best = std::numeric_limits<double>::infinity();
    for (const auto& seg : path) {
        if (!seg) {
            continue;
        }
        const double v = sum_of_costs(cost, *seg);
        const double total = v + pen.value(*seg);
        if (total < best) {
            best = total;
            report.breakpoints = *seg;
            report.sum_of_costs = v;
        }
    }
    report.penalized_objective = best;
    report.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report.config_echo = {{"penalty", pen.to_string()},
                          {"k_max", k_max},
                          {"min_size", effective_min_size(cost, opts)},
                          {"jump", opts.jump}};
    return report;
}

DetectionReport detect_with_penalty(const CostModel& cost, const Penalty& pen, Index k_max, const SearchOptions& opts) {
    if (k_max < 1) {
        throw std::invalid_argument("k_max must be >= 1");
    }
    if (!pen.is_linear()) {
        return sweep_penalty(cost, pen, k_max, opts);
    }
    const auto start = std::chrono::steady_clock::now();
    DetectionReport report{.method = "pelt",
                           .cost = std::string(to_string(cost.kind())),
                           .breakpoints = pelt_segment(cost, pen.linear_beta(cost.n_samples()), opts)};
    report.sum_of_costs = sum_of_costs(cost, report.breakpoints);
    report.penalized_objective = report.sum_of_costs + pen.value(report.breakpoints);
    report.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report.config_echo = {{"penalty", pen.to_string()},
                          {"beta", pen.linear_beta(cost.n_samples())},
                          {"min_size", effective_min_size(cost, opts)},
                          {"jump", opts.jump}};
    return report;
}

} // namespace cpd
