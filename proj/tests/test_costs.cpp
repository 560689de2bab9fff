#include <doctest.h>

#include <cmath>
#include <thread>

#include "cpd/costs.hpp"
#include "oracles.hpp"

using cpd::CostKind;
using cpd::CostOptions;
using cpd::Index;
using cpd::Signal;

namespace {

Signal exp_signal(const Signal& s) { return Signal(s.data().array().exp().matrix()); }

Signal counts(Index n, Index d, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::poisson_distribution<int> dist(3.0);
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            m(t, j) = dist(gen);
        }
    }
    return Signal(m);
}

template <class Oracle>
void check_all_intervals(const cpd::CostModel& cost, Oracle oracle, double rel = 1e-9) {
    const Index n = cost.n_samples();
    for (Index a = 0; a < n; ++a) {
        for (Index b = a + 1; b <= n; ++b) {
            if (!cost.admissible(a, b)) {
                continue;
            }
            const double got = cost.eval(a, b);
            const double want = oracle(a, b);
            INFO("interval (" << a << ", " << b << "]: " << got << " vs " << want);
            CHECK(oracle::close(got, want, rel));
        }
    }
}

} // namespace

TEST_CASE("cost identifiers round trip") {
    for (auto kind : {CostKind::l2, CostKind::normal, CostKind::poisson, CostKind::linear, CostKind::linear_l1,
                      CostKind::ar, CostKind::mahalanobis, CostKind::rank, CostKind::ecdf, CostKind::kernel_linear,
                      CostKind::kernel_rbf, CostKind::kernel_poly, CostKind::kernel_chi2}) {
        CHECK(cpd::parse_cost_kind(cpd::to_string(kind)) == kind);
    }
    CHECK(cpd::to_string(CostKind::kernel_rbf) == "kernel_rbf");
    CHECK_THROWS_AS(cpd::parse_cost_kind("l3"), std::invalid_argument);
}

TEST_CASE("eval domain") {
    const auto s = oracle::gaussian(10, 1, 1);
    const auto cost = cpd::fit(CostKind::l2, s);
    CHECK(cost->min_size() == 1);
    CHECK_THROWS_AS(cost->eval(3, 3), std::out_of_range);
    CHECK_THROWS_AS(cost->eval(4, 3), std::out_of_range);
    CHECK_THROWS_AS(cost->eval(0, 11), std::out_of_range);
    const auto normal = cpd::fit(CostKind::normal, oracle::gaussian(10, 3, 1));
    CHECK(normal->min_size() == 4);
    CHECK_THROWS_AS(normal->eval(0, 3), std::out_of_range);
}

TEST_CASE("l2 hand values and oracle") {
    const auto cost = cpd::fit(CostKind::l2, oracle::column({0, 1, 1, 2, 3, 5, 5, 5}));
    CHECK(cost->eval(0, 2) == doctest::Approx(0.5));
    CHECK(cost->eval(2, 5) == doctest::Approx(2.0));
    CHECK(cost->eval(5, 8) == 0.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto s = oracle::noisy_steps(40, 1 + seed % 3, 3, seed);
        check_all_intervals(*cpd::fit(CostKind::l2, s), [&](Index a, Index b) { return oracle::l2(s, a, b); });
    }
}

TEST_CASE("l2 prefix sums survive a large offset") {
    Eigen::MatrixXd m = oracle::gaussian(200, 1, 4).data().array() + 1e6;
    const Signal s(m);
    const auto cost = cpd::fit(CostKind::l2, s);
    CHECK(oracle::close(cost->eval(17, 183), oracle::l2(s, 17, 183), 1e-9));
}

TEST_CASE("normal cost") {
    const auto flat = cpd::fit(CostKind::normal, oracle::column({0, 2}));
    CHECK(flat->eval(0, 2) == doctest::Approx(2.0));

    // identity covariance: whiten random data exactly
    Eigen::MatrixXd raw = oracle::gaussian(30, 2, 8).data();
    raw.rowwise() -= raw.colwise().mean();
    const Eigen::MatrixXd cov = raw.transpose() * raw / 30.0;
    const Eigen::MatrixXd white = raw * Eigen::LLT<Eigen::MatrixXd>(cov).matrixU().toDenseMatrix().inverse();
    const auto id = cpd::fit(CostKind::normal, Signal(white));
    CHECK(id->eval(0, 30) == doctest::Approx(60.0).epsilon(1e-9));

    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto s = oracle::noisy_steps(30, 1 + seed % 3, 2, seed);
        CostOptions strict;
        strict.regularize = false;
        check_all_intervals(*cpd::fit(CostKind::normal, s, strict),
                            [&](Index a, Index b) { return oracle::normal(s, a, b); });
    }
}

TEST_CASE("normal cost on singular segments") {
    const auto s = oracle::column({1, 1, 1, 4, 5, 7});
    CostOptions strict;
    strict.regularize = false;
    try {
        cpd::fit(CostKind::normal, s, strict)->eval(0, 3);
        FAIL("expected an error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("singular covariance") != std::string::npos);
    }
    const double reg = cpd::fit(CostKind::normal, s)->eval(0, 3);
    CHECK(std::isfinite(reg));
    // a degenerate segment is extremely cheap, but not -inf
    CHECK(reg < cpd::fit(CostKind::normal, s)->eval(3, 6));

    // d+1 samples of continuous data are generically nonsingular
    const auto three = oracle::gaussian(4, 3, 11);
    auto strict_cost = cpd::fit(CostKind::normal, three, strict);
    CHECK(std::isfinite(strict_cost->eval(0, 4)));
    CHECK(oracle::covariance(three, 0, 4).determinant() > 0.0);
}

TEST_CASE("poisson cost") {
    const auto cost = cpd::fit(CostKind::poisson, oracle::column({1, 1, 1, 2, 2, 0, 0}));
    CHECK(cost->eval(0, 3) == doctest::Approx(0.0));
    CHECK(cost->eval(3, 5) == doctest::Approx(-4.0 * std::log(2.0)));
    CHECK(cost->eval(5, 7) == 0.0);
    CHECK_THROWS_AS(cpd::fit(CostKind::poisson, oracle::column({1, -1, 2})), std::invalid_argument);
    const auto s = counts(40, 2, 3);
    check_all_intervals(*cpd::fit(CostKind::poisson, s), [&](Index a, Index b) { return oracle::poisson(s, a, b); });
}

TEST_CASE("linear regression cost") {
    const Index n = 30;
    Eigen::MatrixXd x(n, 2);
    Eigen::MatrixXd y(n, 1);
    std::mt19937_64 gen(5);
    std::normal_distribution<double> z;
    for (Index t = 0; t < n; ++t) {
        x(t, 0) = 1.0;
        x(t, 1) = z(gen);
        y(t, 0) = 2.0 - 3.0 * x(t, 1);
    }
    CostOptions opt;
    opt.covariates = cpd::Covariates{x, Eigen::MatrixXd(n, 0)};
    const auto exact = cpd::fit(CostKind::linear, Signal(y), opt);
    CHECK(exact->min_size() == 2);
    CHECK(exact->eval(0, n) == doctest::Approx(0.0).epsilon(1e-9));

    // intercept only is the L2 cost
    const auto noisy = oracle::gaussian(n, 1, 6);
    CostOptions ones;
    ones.covariates = cpd::Covariates{Eigen::MatrixXd::Ones(n, 1), Eigen::MatrixXd(n, 0)};
    const auto lin = cpd::fit(CostKind::linear, noisy, ones);
    const auto l2 = cpd::fit(CostKind::l2, noisy);
    for (Index b = 2; b <= n; b += 3) {
        CHECK(oracle::close(lin->eval(0, b), l2->eval(0, b), 1e-9));
    }

    // random design; x and z stacked
    Eigen::MatrixXd xr = oracle::gaussian(n, 2, 7).data();
    Eigen::MatrixXd zr = oracle::gaussian(n, 1, 8).data();
    CostOptions both;
    both.covariates = cpd::Covariates{xr, zr};
    Eigen::MatrixXd stacked(n, 3);
    stacked << xr, zr;
    check_all_intervals(*cpd::fit(CostKind::linear, noisy, both),
                        [&](Index a, Index b) { return oracle::linear(noisy, stacked, a, b); }, 1e-8);
}

TEST_CASE("linear cost with a duplicated regressor") {
    Eigen::MatrixXd x(5, 3);
    x << 1, 0.5, 0.5, 1, -1, -1, 1, 2, 2, 1, 0.1, 0.1, 1, 3, 3;
    const auto y = oracle::column({1.0, -2.0, 0.3, 4.0, 2.5});
    CostOptions opt;
    opt.covariates = cpd::Covariates{x, Eigen::MatrixXd(5, 0)};
    const double got = cpd::fit(CostKind::linear, y, opt)->eval(0, 5);
    CHECK(std::isfinite(got));
    CHECK(got == doctest::Approx(oracle::linear(y, x, 0, 5)).epsilon(1e-9));
}

TEST_CASE("least absolute deviations") {
    // 1-D median fit: any u in the median set minimises sum |y - u|
    const auto y = oracle::column({0, 0, 10});
    CostOptions opt;
    opt.covariates = cpd::Covariates{Eigen::MatrixXd::Ones(3, 1), Eigen::MatrixXd(3, 0)};
    const auto cost = cpd::fit(CostKind::linear_l1, y, opt);
    double best = 1e300;
    for (double u : {0.0, 10.0}) {
        best = std::min(best, std::abs(0 - u) * 2 + std::abs(10 - u));
    }
    CHECK(best == 10.0);
    CHECK(cost->eval(0, 3) == doctest::Approx(best).epsilon(1e-6));

    // noiseless line
    Eigen::MatrixXd x(20, 2);
    Eigen::MatrixXd line(20, 1);
    for (int t = 0; t < 20; ++t) {
        x(t, 0) = 1.0;
        x(t, 1) = t * 0.3 - 2.0;
        line(t, 0) = 1.5 + 0.7 * x(t, 1);
    }
    CostOptions lo;
    lo.covariates = cpd::Covariates{x, Eigen::MatrixXd(20, 0)};
    CHECK(cpd::fit(CostKind::linear_l1, Signal(line), lo)->eval(0, 20) < 1e-8);

    // univariate: the optimum of sum |y - u| is attained at a sample, so
    // enumerating the samples gives the exact minimum
    const auto noisy = oracle::gaussian(15, 1, 21);
    CostOptions ones;
    ones.covariates = cpd::Covariates{Eigen::MatrixXd::Ones(15, 1), Eigen::MatrixXd(15, 0)};
    const auto lad = cpd::fit(CostKind::linear_l1, noisy, ones);
    for (Index a = 0; a < 15; a += 2) {
        for (Index b = a + 1; b <= 15; ++b) {
            double exact = 1e300;
            for (Index c = a; c < b; ++c) {
                double acc = 0.0;
                for (Index t = a; t < b; ++t) {
                    acc += std::abs(noisy(t, 0) - noisy(c, 0));
                }
                exact = std::min(exact, acc);
            }
            CHECK(lad->eval(a, b) >= exact - 1e-9);
            CHECK(lad->eval(a, b) == doctest::Approx(exact).epsilon(1e-6));
        }
    }
}

TEST_CASE("lad objective trace is monotone") {
    const Eigen::MatrixXd x = oracle::gaussian(40, 3, 2).data();
    const Eigen::VectorXd y = oracle::gaussian(40, 1, 3).data().col(0);
    const auto fitres = cpd::fit_lad(x, y);
    REQUIRE(!fitres.trace.empty());
    for (std::size_t i = 1; i < fitres.trace.size(); ++i) {
        CHECK(fitres.trace[i] <= fitres.trace[i - 1]);
    }
    CHECK(fitres.objective == fitres.trace.back());
    CHECK(fitres.objective == doctest::Approx((y - x * fitres.coef).cwiseAbs().sum()));
}

TEST_CASE("autoregressive cost") {
    std::vector<double> v{1.0};
    for (int t = 1; t < 30; ++t) {
        v.push_back(0.5 * v.back());
    }
    const auto exact = cpd::fit(CostKind::ar, oracle::column(v));
    CHECK(exact->min_size() == 2);
    CHECK(exact->eval(0, 30) == doctest::Approx(0.0).epsilon(1e-12));

    CostOptions zero;
    zero.ar_order = 0;
    CHECK_THROWS_AS(cpd::fit(CostKind::ar, oracle::column(v), zero), std::invalid_argument);
    CostOptions huge;
    huge.ar_order = 30;
    CHECK_THROWS_AS(cpd::fit(CostKind::ar, oracle::column(v), huge), std::invalid_argument);

    for (int p : {1, 2, 3}) {
        const auto s = oracle::noisy_steps(35, 1, 2, static_cast<std::uint64_t>(p));
        CostOptions opt;
        opt.ar_order = p;
        const auto cost = cpd::fit(CostKind::ar, s, opt);
        CHECK(!cost->admissible(1, 10 + static_cast<Index>(p)) == (p > 1));
        CHECK(!cost->admissible(0, static_cast<Index>(p)));
        check_all_intervals(*cost, [&](Index a, Index b) { return oracle::ar(s, p, a, b); }, 1e-8);
    }
}

TEST_CASE("mahalanobis cost") {
    const auto s = oracle::noisy_steps(30, 3, 2, 12);
    const auto l2 = cpd::fit(CostKind::l2, s);
    CostOptions opt;
    opt.metric = Eigen::MatrixXd::Identity(3, 3);
    const auto id = cpd::fit(CostKind::mahalanobis, s, opt);
    opt.metric = 2.0 * Eigen::MatrixXd::Identity(3, 3);
    const auto twice = cpd::fit(CostKind::mahalanobis, s, opt);
    for (Index a = 0; a < 30; a += 3) {
        for (Index b = a + 1; b <= 30; ++b) {
            CHECK(id->eval(a, b) == l2->eval(a, b));
            CHECK(twice->eval(a, b) == doctest::Approx(2.0 * l2->eval(a, b)).epsilon(1e-12));
        }
    }

    // inverse covariance of the whole signal, 10 samples
    const auto small = oracle::gaussian(10, 2, 13);
    const Eigen::MatrixXd metric = oracle::covariance(small, 0, 10).inverse();
    opt.metric = metric;
    check_all_intervals(*cpd::fit(CostKind::mahalanobis, small, opt),
                        [&](Index a, Index b) { return oracle::mahalanobis(small, metric, a, b); });

    Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(3, 3);
    asym(0, 1) = 0.5;
    opt.metric = asym;
    CHECK_THROWS_AS(cpd::fit(CostKind::mahalanobis, s, opt), std::invalid_argument);
    opt.metric = -Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(cpd::fit(CostKind::mahalanobis, s, opt), std::invalid_argument);
    opt.metric = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(cpd::fit(CostKind::mahalanobis, s, opt), std::invalid_argument);
}

TEST_CASE("rank cost") {
    // y = [3, 1, 2]: centred ranks [1, -1, 0]; shifted by 1/2 their second
    // moment is (2.25 + 0.25 + 0.25) / 3 = 11/12
    const auto s = oracle::column({3, 1, 2});
    const auto cost = cpd::fit(CostKind::rank, s);
    CHECK(cost->eval(0, 3) == doctest::Approx(0.0));
    CHECK(cost->eval(0, 1) == doctest::Approx(-12.0 / 11.0));
    CHECK(cost->eval(0, 2) == doctest::Approx(0.0));
    CHECK(cost->eval(1, 2) == doctest::Approx(-12.0 / 11.0));

    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const auto x = oracle::noisy_steps(25, 1 + seed % 3, 2, seed + 40);
        check_all_intervals(*cpd::fit(CostKind::rank, x), [&](Index a, Index b) { return oracle::rank(x, a, b); });
        // full interval of a tie-free signal
        CHECK(std::abs(cpd::fit(CostKind::rank, x)->eval(0, 25)) < 1e-9);
    }

    // invariant under strictly increasing transforms
    const auto x = oracle::gaussian(30, 2, 77);
    const auto c1 = cpd::fit(CostKind::rank, x);
    const auto c2 = cpd::fit(CostKind::rank, exp_signal(x));
    CHECK(c1->eval(3, 17) == c2->eval(3, 17));
}

TEST_CASE("ecdf cost") {
    // all values tied: the mid-cdf is 1/2 at every order statistic, so each
    // term contributes -log 2 / w_j
    const auto flat = cpd::fit(CostKind::ecdf, oracle::column({2, 2, 2, 2}));
    double inv_weights = 0.0;
    for (int j = 1; j <= 4; ++j) {
        inv_weights += 1.0 / ((j - 0.5) * (4 - j + 0.5));
    }
    CHECK(flat->eval(0, 2) == doctest::Approx(2.0 * std::log(2.0) * inv_weights));
    CHECK(flat->eval(1, 4) == doctest::Approx(3.0 * std::log(2.0) * inv_weights));

    // single-sample segments: F is 0, 1/2 or 1 at every order statistic
    const auto five = oracle::column({0.3, -1.0, 2.0, 0.7, 1.1});
    const auto c5 = cpd::fit(CostKind::ecdf, five);
    for (Index a = 0; a < 5; ++a) {
        CHECK(std::isfinite(c5->eval(a, a + 1)));
        CHECK(c5->eval(a, a + 1) == doctest::Approx(oracle::ecdf(five, a, a + 1)).epsilon(1e-12));
    }

    const auto s = oracle::column({1, 2, 3, 4});
    const auto cost = cpd::fit(CostKind::ecdf, s);
    CHECK(cost->eval(0, 2) == doctest::Approx(oracle::ecdf(s, 0, 2)).epsilon(1e-12));

    const auto ties = oracle::column({1, 3, 3, 2, 1, 5, 3, 0, 2, 2});
    check_all_intervals(*cpd::fit(CostKind::ecdf, ties), [&](Index a, Index b) { return oracle::ecdf(ties, a, b); });
    const auto x = oracle::noisy_steps(40, 1, 3, 5);
    check_all_intervals(*cpd::fit(CostKind::ecdf, x), [&](Index a, Index b) { return oracle::ecdf(x, a, b); });
    CHECK_THROWS_AS(cpd::fit(CostKind::ecdf, oracle::gaussian(10, 2, 1)), std::invalid_argument);
}

TEST_CASE("kernel costs") {
    const auto two = cpd::fit(CostKind::kernel_rbf, oracle::column({0, 1}));
    CHECK(two->eval(0, 2) == doctest::Approx(1.0 - std::exp(-1.0)));
    CHECK(cpd::fit(CostKind::kernel_rbf, oracle::column({4, 4, 4}))->eval(0, 3) == doctest::Approx(0.0));

    const auto s = oracle::noisy_steps(30, 2, 2, 31);
    CostOptions opt;
    opt.gamma = 0.3;
    opt.poly_degree = 3;
    opt.poly_constant = 0.5;
    check_all_intervals(*cpd::fit(CostKind::kernel_rbf, s, opt), [&](Index a, Index b) {
        return oracle::kernel(s, {cpd::KernelSpec::Kind::rbf, 0.3, 0.5, 3}, a, b);
    });
    check_all_intervals(*cpd::fit(CostKind::kernel_poly, s, opt), [&](Index a, Index b) {
        return oracle::kernel(s, {cpd::KernelSpec::Kind::polynomial, 0.3, 0.5, 3}, a, b);
    }, 1e-8);
    check_all_intervals(*cpd::fit(CostKind::kernel_linear, s, opt), [&](Index a, Index b) {
        return oracle::l2(s, a, b);
    }, 1e-8);

    const auto c = counts(25, 3, 8);
    check_all_intervals(*cpd::fit(CostKind::kernel_chi2, c, opt), [&](Index a, Index b) {
        return oracle::kernel(c, {cpd::KernelSpec::Kind::chi2, 0.3, 0.5, 3}, a, b);
    });
    CHECK_THROWS_AS(cpd::fit(CostKind::kernel_chi2, oracle::column({1, -1})), std::invalid_argument);
    Eigen::MatrixXd dead(3, 2);
    dead << 1, 0, 2, 0, 3, 0;
    CHECK_THROWS_AS(cpd::fit(CostKind::kernel_chi2, Signal(dead)), std::invalid_argument);
    opt.gamma = 0.0;
    CHECK_THROWS_AS(cpd::fit(CostKind::kernel_rbf, s, opt), std::invalid_argument);
}

TEST_CASE("kernel on-demand rows match the full Gram summary") {
    const auto s = oracle::noisy_steps(60, 2, 3, 4);
    CostOptions full;
    CostOptions lazy;
    lazy.gram_cap = 10;
    lazy.gram_row_cache = 7;
    const auto a = cpd::fit(CostKind::kernel_rbf, s, full);
    const auto b = cpd::fit(CostKind::kernel_rbf, s, lazy);
    CHECK(dynamic_cast<const cpd::KernelCost&>(*a).full_gram());
    CHECK(!dynamic_cast<const cpd::KernelCost&>(*b).full_gram());
    for (Index x = 0; x < 60; x += 5) {
        for (Index y = x + 1; y <= 60; y += 2) {
            CHECK(oracle::close(a->eval(x, y), b->eval(x, y), 1e-10));
        }
    }

    // concurrent readers of the row cache
    std::vector<std::thread> pool;
    std::vector<double> sums(4, 0.0);
    for (int w = 0; w < 4; ++w) {
        pool.emplace_back([&, w] {
            for (Index x = 0; x + 10 <= 60; ++x) {
                sums[static_cast<std::size_t>(w)] += b->eval(x, x + 10);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    for (int w = 1; w < 4; ++w) {
        CHECK(sums[static_cast<std::size_t>(w)] == sums[0]);
    }
}

TEST_CASE("sum of costs") {
    const auto s = oracle::noisy_steps(50, 2, 3, 9);
    const auto cost = cpd::fit(CostKind::l2, s);
    CHECK(cpd::sum_of_costs(*cost, cpd::Segmentation::make({}, 50)) == cost->eval(0, 50));
    const auto seg = cpd::Segmentation::make({7, 22, 41}, 50);
    CHECK(cpd::sum_of_costs(*cost, seg) ==
          doctest::Approx(oracle::l2(s, 0, 7) + oracle::l2(s, 7, 22) + oracle::l2(s, 22, 41) + oracle::l2(s, 41, 50)));
    CHECK_THROWS(cpd::sum_of_costs(*cost, cpd::Segmentation::make({}, 40)));
    const auto normal = cpd::fit(CostKind::normal, s);
    CHECK_THROWS_AS(cpd::sum_of_costs(*normal, cpd::Segmentation::make({2}, 50)), std::out_of_range);
}
