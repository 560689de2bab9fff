#include <doctest.h>

#include <cmath>
#include <limits>

#include "cpd/penalties.hpp"
#include "oracles.hpp"

using cpd::CostKind;
using cpd::Index;
using cpd::Penalty;
using cpd::Segmentation;

TEST_CASE("penalty values") {
    CHECK(Penalty::l0(2.0).value(Segmentation::make({10, 20, 30}, 100)) == 6.0);
    CHECK(Penalty::bic(1.0).value(Segmentation::make({30, 60}, 100)) == doctest::Approx(4.605170186));
    CHECK(Penalty::mbic().value(Segmentation::make({50}, 100)) ==
          doctest::Approx(3.0 * std::log(100.0) + 2.0 * std::log(0.5)));
    CHECK(Penalty::mbic().value(Segmentation::make({50}, 100)) == doctest::Approx(12.429).epsilon(1e-4));
    CHECK(Penalty::bic_l2(2.0).value(Segmentation::make({50}, 100)) == doctest::Approx(4.0 * std::log(100.0)));
    CHECK(Penalty::aic_l2(2.0).value(Segmentation::make({25, 50}, 100)) == doctest::Approx(8.0));

    // leb: ((K+1)/T) s^2 (a1 log((K+1)/T) + a2)
    const double r = 3.0 / 100.0;
    CHECK(Penalty::leb(2.0, 1.5, 7.0).value(Segmentation::make({25, 50}, 100)) ==
          doctest::Approx(r * 4.0 * (1.5 * std::log(r) + 7.0)));

    // no changes: linear penalties vanish, mbic keeps the log(T/T) term
    const auto none = Segmentation::make({}, 100);
    CHECK(Penalty::l0(5.0).value(none) == 0.0);
    CHECK(Penalty::mbic().value(none) == 0.0);
}

TEST_CASE("linear penalties increase with the change count") {
    for (const auto& pen : {Penalty::l0(0.1), Penalty::bic(2.0), Penalty::bic_l2(0.5), Penalty::aic_l2(0.5)}) {
        CHECK(pen.is_linear());
        double prev = -1.0;
        for (Index k = 0; k < 6; ++k) {
            std::vector<Index> b;
            for (Index i = 1; i <= k; ++i) {
                b.push_back(i * 10);
            }
            const double v = pen.value(Segmentation::make(b, 100));
            CHECK(v > prev);
            prev = v;
        }
    }
    CHECK(!Penalty::mbic().is_linear());
    CHECK(!Penalty::leb(1, 1, 1).is_linear());
    CHECK_THROWS_AS(Penalty::mbic().linear_beta(10), std::logic_error);
}

TEST_CASE("penalty parsing") {
    CHECK(cpd::parse_penalty("l0:10").linear_beta(50) == 10.0);
    CHECK(cpd::parse_penalty("bic:2").linear_beta(100) == doctest::Approx(std::log(100.0)));
    CHECK(cpd::parse_penalty("bic_l2:0.5").kind() == Penalty::Kind::bic_l2);
    CHECK(cpd::parse_penalty("aic_l2:3").linear_beta(7) == 9.0);
    CHECK(cpd::parse_penalty("mbic").kind() == Penalty::Kind::mbic);
    CHECK(cpd::parse_penalty("leb:1,2,5").to_string() == "leb:1,2,5");
    CHECK(cpd::parse_penalty("l0:2.5").to_string() == "l0:2.5");
    for (const char* bad : {"l0", "l0:", "l0:-1", "l0:abc", "l0:0", "bic:0.5", "mbic:3", "leb:1,2", "leb:1,2,0",
                            "foo:1", "", "l0:nan", "l0:inf"}) {
        INFO(bad);
        CHECK_THROWS_AS(cpd::parse_penalty(bad), std::invalid_argument);
    }
}

TEST_CASE("default bic parameter counts") {
    CHECK(*cpd::default_bic_params(CostKind::l2, 3) == 3.0);
    CHECK(*cpd::default_bic_params(CostKind::poisson, 2) == 2.0);
    CHECK(*cpd::default_bic_params(CostKind::normal, 2) == 5.0);
    CHECK(!cpd::default_bic_params(CostKind::kernel_rbf, 2).has_value());
}

TEST_CASE("noise estimate") {
    // pure Gaussian noise with sd 2 and a few mean shifts: the difference
    // based estimate ignores the shifts
    std::mt19937_64 gen(3);
    std::normal_distribution<double> noise(0.0, 2.0);
    Eigen::MatrixXd m(20000, 1);
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
        m(t, 0) = noise(gen) + (t / 2000 % 2 == 0 ? 0.0 : 50.0);
    }
    CHECK(cpd::estimate_noise_std(cpd::Signal(m)) == doctest::Approx(2.0).epsilon(0.05));
    CHECK_THROWS_AS(cpd::estimate_noise_std(oracle::column({1.0})), std::invalid_argument);
}

TEST_CASE("detection with a complex penalty") {
    const auto step = oracle::step(100, 50, 0.0, 5.0);
    const auto cost = cpd::fit(CostKind::l2, step);
    const auto mbic = cpd::detect_with_penalty(*cost, Penalty::mbic(), 3);
    CHECK(mbic.breakpoints.bkps() == std::vector<Index>{50, 100});
    CHECK(mbic.sum_of_costs == 0.0);
    CHECK(*mbic.penalized_objective == doctest::Approx(Penalty::mbic().value(mbic.breakpoints)));

    const auto leb = cpd::detect_with_penalty(*cost, Penalty::leb(1.0, 1.0, 1e12), 3);
    CHECK(leb.breakpoints.n_changes() == 0);

    CHECK_THROWS_AS(cpd::detect_with_penalty(*cost, Penalty::mbic(), 0), std::invalid_argument);
    CHECK_THROWS_AS(cpd::detect_with_penalty(*cost, Penalty::mbic(), 5, {30, 1}), std::invalid_argument);
}

TEST_CASE("the K-sweep equals the brute-force argmin") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = oracle::noisy_steps(14, 1, 2, seed);
        const auto cost = cpd::fit(CostKind::l2, s);
        for (const auto& pen : {Penalty::mbic(), Penalty::leb(1.0, 2.0, 5.0), Penalty::l0(1.0)}) {
            const auto got = cpd::sweep_penalty(*cost, pen, 4);
            double best = std::numeric_limits<double>::infinity();
            for (Index k = 0; k <= 4; ++k) {
                oracle::enumerate(*cost, k, 1, 1, [&](const std::vector<Index>& b) {
                    best = std::min(best, oracle::segmentation_cost(*cost, b) +
                                              pen.value(Segmentation::make(b, 14)));
                });
            }
            CHECK(oracle::close(*got.penalized_objective, best, 1e-9));
        }
    }
}

TEST_CASE("linear penalties route through pelt and match the sweep") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto s = oracle::noisy_steps(150 + 5 * seed, 1, 3, seed);
        const auto cost = cpd::fit(CostKind::l2, s);
        const double sigma = cpd::estimate_noise_std(s);
        for (const auto& pen : {Penalty::bic_l2(sigma), Penalty::aic_l2(sigma * 2), Penalty::l0(8.0),
                                Penalty::bic(1.0)}) {
            const auto direct = cpd::detect_with_penalty(*cost, pen, 40);
            CHECK(direct.method == "pelt");
            CHECK(direct.breakpoints == cpd::pelt_segment(*cost, pen.linear_beta(s.n_samples())));
            const auto sweep = cpd::sweep_penalty(*cost, pen, 40);
            CHECK(oracle::close(*direct.penalized_objective, *sweep.penalized_objective, 1e-9));
        }
    }
}

TEST_CASE("opt objective is non-increasing in K for subadditive costs") {
    const auto s = oracle::noisy_steps(80, 2, 4, 6);
    for (auto kind : {CostKind::l2, CostKind::kernel_rbf}) {
        const auto cost = cpd::fit(kind, s);
        const auto path = cpd::opt_path(*cost, 10);
        double prev = std::numeric_limits<double>::infinity();
        for (const auto& seg : path) {
            const double v = cpd::sum_of_costs(*cost, *seg);
            CHECK(v <= prev + 1e-9);
            prev = v;
        }
    }
}
