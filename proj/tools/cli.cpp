#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpd/costs.hpp"
#include "cpd/metrics.hpp"
#include "cpd/penalties.hpp"
#include "cpd/report.hpp"
#include "cpd/rng.hpp"
#include "cpd/search.hpp"
#include "cpd/signal.hpp"

namespace cpd::cli {

namespace {

using nlohmann::json;

/// Flag misuse that CLI11 cannot see on its own (exit code 2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr Index kDefaultKMax = 20;

struct DetectArgs {
    std::string input;
    std::string method;
    std::string cost;
    std::optional<Index> n_bkps;
    std::optional<std::string> pen;
    std::optional<Index> min_size;
    Index jump = 1;
    std::optional<Index> window;
    std::optional<Index> delta;
    double gamma = 1.0;
    int degree = 2;
    double constant = 1.0;
    int order = 1;
    std::optional<std::string> covariates;
    std::optional<std::string> metric_matrix;
    std::optional<std::string> curve_out;
    std::optional<std::string> out;
};

struct GenerateArgs {
    std::string kind;
    Index n_samples = 0;
    Index n_dims = 1;
    Index n_bkps = 0;
    double noise_std = 1.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string bkps_out;
};

struct EvaluateArgs {
    std::string truth;
    std::string pred;
    Index margin = 5;
    std::optional<Index> n_samples;
};

struct BenchArgs {
    std::string method;
    std::string cost;
    std::string sizes;
    Index trials = 5;
    std::uint64_t seed = 0;
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream file(path);
    if (!file) {
        throw std::runtime_error("cannot write " + path);
    }
    file << text;
}

void emit(const json& doc, const std::optional<std::string>& path, std::ostream& out) {
    const std::string text = doc.dump(2) + "\n";
    if (path) {
        write_text(*path, text);
    } else {
        out << text;
    }
}

json read_json(const std::string& path) {
    std::ifstream file(path);
    if (!file) {
        throw std::runtime_error("cannot open " + path);
    }
    try {
        return json::parse(file);
    } catch (const json::parse_error& e) {
        throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
    }
}

Index round_up(Index value, Index step) { return ((value + step - 1) / step) * step; }

// ---------------------------------------------------------------- detect

int cmd_detect(const DetectArgs& args, std::ostream& out) {
    if (args.n_bkps.has_value() == args.pen.has_value()) {
        throw UsageError("detect needs exactly one of --n-bkps or --pen");
    }
    const CostKind kind = parse_cost_kind(args.cost);
    std::optional<Penalty> pen;
    if (args.pen) {
        try {
            pen = parse_penalty(*args.pen);
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--pen: ") + e.what());
        }
    }
    if (args.method == "pelt" && !pen) {
        throw UsageError("--method pelt requires --pen, not --n-bkps");
    }
    if (pen && !pen->is_linear() && args.method != "opt") {
        throw UsageError(args.method + " requires a linear penalty (--pen " + pen->to_string() +
                         " is only supported with --method opt)");
    }
    if (args.curve_out && args.method != "win" && args.method != "binseg") {
        throw UsageError("--curve-out is only available with --method win or binseg");
    }
    if ((kind == CostKind::linear || kind == CostKind::linear_l1) && !args.covariates) {
        throw UsageError("--cost " + args.cost + " requires --covariates");
    }
    if (kind == CostKind::mahalanobis && !args.metric_matrix) {
        throw UsageError("--cost mahalanobis requires --metric-matrix");
    }

    const Signal signal = load_csv(args.input);
    CostOptions options;
    options.gamma = args.gamma;
    options.poly_degree = args.degree;
    options.poly_constant = args.constant;
    options.ar_order = args.order;
    if (args.covariates) {
        const Signal x = load_csv(*args.covariates);
        options.covariates = Covariates{x.data(), Eigen::MatrixXd(x.data().rows(), 0)};
    }
    if (args.metric_matrix) {
        options.metric = load_csv(*args.metric_matrix).data();
    }

    const auto start = std::chrono::steady_clock::now();
    const auto cost = fit(kind, signal, options);
    SearchOptions opts;
    opts.jump = args.jump;
    opts.min_size = args.min_size.value_or(cost->min_size());
    const Index m = effective_min_size(*cost, opts);
    const Index n = signal.n_samples();

    json echo = {{"input", args.input},
                 {"method", args.method},
                 {"cost", args.cost},
                 {"n_samples", n},
                 {"n_dims", signal.n_dims()},
                 {"min_size", m},
                 {"jump", opts.jump}};
    if (args.n_bkps) {
        echo["n_bkps"] = *args.n_bkps;
    }
    if (pen) {
        echo["pen"] = pen->to_string();
    }
    switch (kind) {
    case CostKind::kernel_rbf:
    case CostKind::kernel_chi2:
        echo["gamma"] = args.gamma;
        break;
    case CostKind::kernel_poly:
        echo["deg"] = args.degree;
        echo["const"] = args.constant;
        break;
    case CostKind::ar:
        echo["order"] = args.order;
        break;
    case CostKind::normal:
        echo["regularize"] = options.regularize;
        break;
    case CostKind::linear:
    case CostKind::linear_l1:
        echo["covariates"] = *args.covariates;
        break;
    case CostKind::mahalanobis:
        echo["metric_matrix"] = *args.metric_matrix;
        break;
    default:
        break;
    }
    if (kind == CostKind::kernel_linear || kind == CostKind::kernel_rbf || kind == CostKind::kernel_poly ||
        kind == CostKind::kernel_chi2) {
        echo["gram_cap"] = options.gram_cap;
    }

    std::optional<StoppingRule> stop;
    if (args.n_bkps) {
        stop = StoppingRule::fixed_k(*args.n_bkps);
    } else if (pen->is_linear()) {
        stop = StoppingRule::penalty_threshold(pen->linear_beta(n));
        echo["beta"] = pen->linear_beta(n);
    }

    std::optional<Segmentation> seg;
    std::optional<double> objective;
    std::ostringstream curve;
    curve.precision(17);
    if (args.method == "opt") {
        if (args.n_bkps) {
            seg = opt_segment(*cost, *args.n_bkps, opts);
        } else {
            // Greedy packing on the grid gives the largest feasible K.
            Index feasible = 0;
            Index prev = 0;
            for (Index c : candidate_breakpoints(*cost, opts)) {
                if (c >= prev + m) {
                    ++feasible;
                    prev = c;
                }
            }
            const Index k_max = std::min(kDefaultKMax, feasible);
            echo["k_max"] = k_max;
            auto report = sweep_penalty(*cost, *pen, k_max, opts);
            seg = report.breakpoints;
        }
    } else if (args.method == "pelt") {
        seg = pelt_segment(*cost, pen->linear_beta(n), opts);
    } else if (args.method == "win") {
        const Index width = args.window.value_or(std::max(m, std::min<Index>(100, n / 10)));
        echo["window"] = width;
        const auto scores = window_scores(*cost, width, opts);
        seg = Segmentation::make(pick_peaks(scores, width, *stop), n);
        curve << "index,score\n";
        for (const auto& s : scores) {
            curve << s.index << ',' << s.score << '\n';
        }
    } else if (args.method == "binseg") {
        std::vector<SplitStep> trace;
        seg = binseg_segment(*cost, *stop, opts, &trace);
        curve << "iteration,breakpoint,gain\n";
        for (std::size_t i = 0; i < trace.size(); ++i) {
            curve << i + 1 << ',' << trace[i].breakpoint << ',' << trace[i].gain << '\n';
        }
    } else {
        const Index delta = args.delta.value_or(round_up(std::max<Index>(m, 10), opts.jump));
        echo["delta"] = delta;
        seg = botup_segment(*cost, delta, *stop, opts);
    }
    const double total = sum_of_costs(*cost, *seg);
    if (pen) {
        objective = total + pen->value(*seg);
    }
    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    DetectionReport report{.method = args.method,
                           .cost = args.cost,
                           .breakpoints = *seg,
                           .sum_of_costs = total,
                           .penalized_objective = objective,
                           .elapsed_ms = elapsed,
                           .config_echo = echo};
    if (args.curve_out) {
        write_text(*args.curve_out, curve.str());
    }
    emit(to_json(report), args.out, out);
    return 0;
}

// ---------------------------------------------------------------- generate

int cmd_generate(const GenerateArgs& args, std::ostream& out) {
    GeneratorSpec spec;
    spec.n_samples = args.n_samples;
    spec.n_dims = args.n_dims;
    spec.n_bkps = args.n_bkps;
    spec.noise_std = args.noise_std;
    spec.seed = args.seed;
    spec.min_spacing = std::max<Index>(1, args.n_samples / (5 * (args.n_bkps + 1)));
    if (args.kind == "pw_scale") {
        spec.jump_lo = 2.0;
        spec.jump_hi = 5.0;
    }
    auto [signal, seg] = args.kind == "pw_constant" ? generate_pw_constant(spec) : generate_pw_scale(spec);

    std::ostringstream csv;
    write_csv(csv, signal);
    write_text(args.out, csv.str());
    write_text(args.bkps_out, breakpoints_json(seg).dump() + "\n");
    json summary = {{"kind", args.kind},
                    {"T", spec.n_samples},
                    {"d", spec.n_dims},
                    {"n_bkps", spec.n_bkps},
                    {"min_spacing", spec.min_spacing},
                    {"noise_std", spec.noise_std},
                    {"jump_range", {spec.jump_lo, spec.jump_hi}},
                    {"seed", spec.seed},
                    {"prng", std::string(Rng::kAlgorithm)},
                    {"out", args.out},
                    {"bkps_out", args.bkps_out}};
    out << summary.dump() << "\n";
    return 0;
}

// ---------------------------------------------------------------- evaluate

int cmd_evaluate(const EvaluateArgs& args, std::ostream& out) {
    const Segmentation truth = segmentation_from_json(read_json(args.truth));
    const Segmentation pred = segmentation_from_json(read_json(args.pred));
    if (args.n_samples && (truth.n_samples() != *args.n_samples || pred.n_samples() != *args.n_samples)) {
        throw std::runtime_error("--T " + std::to_string(*args.n_samples) +
                                 " does not match the breakpoint files (T=" + std::to_string(truth.n_samples()) +
                                 ", " + std::to_string(pred.n_samples()) + ")");
    }
    const MetricReport report = evaluate(truth, pred, args.margin);
    json doc;
    doc["T"] = truth.n_samples();
    doc["margin"] = report.margin;
    doc["annotation_error"] = *report.annotation_error;
    doc["hausdorff"] = report.hausdorff ? json(*report.hausdorff) : json(nullptr);
    doc["rand_index"] = report.rand_index ? json(*report.rand_index) : json(nullptr);
    if (report.scores) {
        doc["precision"] = report.scores->precision;
        doc["recall"] = report.scores->recall;
        doc["f1"] = report.scores->f1;
    } else {
        doc["precision"] = nullptr;
        doc["recall"] = nullptr;
        doc["f1"] = nullptr;
    }
    json reasons = json::object();
    for (const auto& [name, why] : report.skipped) {
        reasons[name] = why;
    }
    doc["reasons"] = reasons;
    out << doc.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------- bench

std::vector<Index> parse_sizes(const std::string& text) {
    std::vector<Index> sizes;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        try {
            std::size_t used = 0;
            const long long value = std::stoll(item, &used);
            if (used != item.size() || value < 2) {
                throw std::invalid_argument(item);
            }
            sizes.push_back(static_cast<Index>(value));
        } catch (const std::exception&) {
            throw UsageError("--sizes expects a comma list of integers >= 2, got '" + item + "'");
        }
    }
    if (sizes.empty()) {
        throw UsageError("--sizes is empty");
    }
    return sizes;
}

int cmd_bench(const BenchArgs& args, std::ostream& out) {
    const auto sizes = parse_sizes(args.sizes);
    const CostKind kind = parse_cost_kind(args.cost);
    if (kind == CostKind::linear || kind == CostKind::linear_l1 || kind == CostKind::mahalanobis) {
        throw UsageError("bench supports costs without auxiliary inputs only");
    }
    if (args.trials < 1) {
        throw UsageError("--trials must be >= 1");
    }
    out << "T,mean_ms,std_ms\n";
    for (Index n : sizes) {
        std::vector<double> times;
        for (Index trial = 0; trial < args.trials; ++trial) {
            auto spec = bench_spec(n, args.seed, trial);
            auto [signal, truth] = generate_pw_constant(spec);
            const auto start = std::chrono::steady_clock::now();
            const auto cost = fit(kind, signal);
            const Index m = cost->min_size();
            if (args.method == "opt") {
                opt_segment(*cost, std::min<Index>(2, spec.n_bkps));
            } else if (args.method == "pelt") {
                pelt_segment(*cost, 3.0 * std::log(static_cast<double>(n)));
            } else if (args.method == "win") {
                win_segment(*cost, std::max(m, spec.min_spacing / 2), StoppingRule::fixed_k(spec.n_bkps));
            } else if (args.method == "binseg") {
                binseg_segment(*cost, StoppingRule::fixed_k(spec.n_bkps));
            } else {
                botup_segment(*cost, std::max<Index>(m, 10), StoppingRule::fixed_k(spec.n_bkps));
            }
            times.push_back(
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
        }
        double mean = 0.0;
        for (double t : times) {
            mean += t;
        }
        mean /= static_cast<double>(times.size());
        double var = 0.0;
        for (double t : times) {
            var += (t - mean) * (t - mean);
        }
        const double sd = times.size() > 1 ? std::sqrt(var / static_cast<double>(times.size() - 1)) : 0.0;
        out << n << ',' << mean << ',' << sd << '\n';
    }
    return 0;
}

} // namespace

GeneratorSpec bench_spec(Index n_samples, std::uint64_t seed, Index trial) {
    GeneratorSpec spec;
    spec.n_samples = n_samples;
    spec.n_bkps = std::max<Index>(1, n_samples / 100);
    spec.min_spacing = std::max<Index>(1, n_samples / (4 * (spec.n_bkps + 1)));
    spec.noise_std = 1.0;
    spec.jump_lo = 2.0;
    spec.jump_hi = 5.0;
    spec.seed = seed * 1000003ULL + n_samples * 7919ULL + trial;
    return spec;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Offline change point detection"};
    app.require_subcommand(1);

    DetectArgs detect;
    auto* d = app.add_subcommand("detect", "Detect change points in a CSV signal");
    d->add_option("--input", detect.input, "Signal CSV (rows = time steps)")->required()->check(CLI::ExistingFile);
    d->add_option("--method", detect.method, "Search method")
        ->required()
        ->check(CLI::IsMember({"opt", "pelt", "win", "binseg", "botup"}));
    d->add_option("--cost", detect.cost, "Cost function")
        ->required()
        ->check(CLI::IsMember({"l2", "normal", "poisson", "linear", "linear_l1", "ar", "mahalanobis", "rank",
                               "ecdf", "kernel_linear", "kernel_rbf", "kernel_poly", "kernel_chi2"}));
    auto* nb = d->add_option("--n-bkps", detect.n_bkps, "Number of change points");
    auto* pe = d->add_option("--pen", detect.pen, "Penalty, e.g. l0:10, bic:1, mbic, leb:1,2,5");
    nb->excludes(pe);
    d->add_option("--min-size", detect.min_size, "Minimum segment length")->check(CLI::PositiveNumber);
    d->add_option("--jump", detect.jump, "Candidate grid step")->check(CLI::PositiveNumber);
    d->add_option("--window", detect.window, "Half-window width (win)")->check(CLI::PositiveNumber);
    d->add_option("--delta", detect.delta, "Initial grid size (botup)")->check(CLI::PositiveNumber);
    d->add_option("--gamma", detect.gamma, "Kernel bandwidth (rbf, chi2)");
    d->add_option("--deg", detect.degree, "Polynomial kernel degree");
    d->add_option("--const", detect.constant, "Polynomial kernel constant");
    d->add_option("--order", detect.order, "AR order");
    d->add_option("--covariates", detect.covariates, "Covariate CSV (linear costs)")->check(CLI::ExistingFile);
    d->add_option("--metric-matrix", detect.metric_matrix, "d x d metric CSV (mahalanobis)")
        ->check(CLI::ExistingFile);
    d->add_option("--curve-out", detect.curve_out, "Write the win score curve or binseg gain trace as CSV");
    d->add_option("--out", detect.out, "Write the JSON report here instead of stdout");

    GenerateArgs generate;
    auto* g = app.add_subcommand("generate", "Generate a synthetic signal with known breakpoints");
    g->add_option("--kind", generate.kind)->required()->check(CLI::IsMember({"pw_constant", "pw_scale"}));
    g->add_option("--T", generate.n_samples, "Number of samples")->required()->check(CLI::PositiveNumber);
    g->add_option("--d", generate.n_dims, "Number of dimensions")->check(CLI::PositiveNumber);
    g->add_option("--n-bkps", generate.n_bkps, "Number of change points");
    g->add_option("--noise-std", generate.noise_std, "Noise standard deviation")->check(CLI::NonNegativeNumber);
    g->add_option("--seed", generate.seed, "PRNG seed");
    g->add_option("--out", generate.out, "Signal CSV path")->required();
    g->add_option("--bkps-out", generate.bkps_out, "Breakpoints JSON path")->required();

    EvaluateArgs evaluate_args;
    auto* e = app.add_subcommand("evaluate", "Compare predicted and true breakpoints");
    e->add_option("--truth", evaluate_args.truth, "True breakpoints JSON")->required();
    e->add_option("--pred", evaluate_args.pred, "Predicted breakpoints JSON")->required();
    e->add_option("--margin", evaluate_args.margin, "F1 margin in samples")->check(CLI::PositiveNumber);
    e->add_option("--T", evaluate_args.n_samples, "Expected signal length");

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "Time a method over signal sizes");
    b->add_option("--method", bench.method)->required()->check(CLI::IsMember({"opt", "pelt", "win", "binseg", "botup"}));
    b->add_option("--cost", bench.cost)->default_val("l2");
    b->add_option("--sizes", bench.sizes, "Comma-separated signal lengths")->required();
    b->add_option("--trials", bench.trials, "Trials per size");
    b->add_option("--seed", bench.seed, "PRNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        if (error.get_exit_code() == 0) {
            app.exit(error, out, err);
            return 0;
        }
        err << "error: " << error.what() << "\n";
        return 2;
    }

    try {
        if (d->parsed()) {
            return cmd_detect(detect, out);
        }
        if (g->parsed()) {
            return cmd_generate(generate, out);
        }
        if (e->parsed()) {
            return cmd_evaluate(evaluate_args, out);
        }
        return cmd_bench(bench, out);
    } catch (const UsageError& error) {
        err << "error: " << error.what() << "\n";
        return 2;
    } catch (const std::exception& error) {
        err << "error: " << error.what() << "\n";
        return 1;
    }
}

} // namespace cpd::cli
