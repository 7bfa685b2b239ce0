#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gwalk/asymptotics.hpp"

using namespace gwalk;
using Catch::Approx;

namespace {
const double kHF2 = 0.5 * std::log(3.0);
const double kHF3 = (2.0 / 3.0) * std::log(5.0);
}  // namespace

TEST_CASE("speed estimate: checkpoints, sharing, and exact limits") {
    auto f2 = free_group(2);
    auto m = srw(f2);

    SECTION("deterministic one-way walk has speed exactly 1") {
        auto z = lattice(1);
        Element up = identity(z);
        up.data[0] = 1;
        StepMeasure det(z, {{up, 1.0}});
        Rng rng(1);
        auto est = speed_estimate(z, det, word_metric(z), 100, 5, rng);
        CHECK(est.extrapolated == Approx(1.0).margin(1e-12));
        CHECK(est.uncertainty == Approx(0.0).margin(1e-12));
        for (auto& [n, v] : est.per_n) CHECK(v == Approx(1.0).margin(1e-12));
    }

    SECTION("word speed on F2 approaches 1/2 from above") {
        Rng rng(33);
        auto est = speed_estimate(f2, m, word_metric(f2), 2000, 2000, rng);
        CHECK(est.per_n.size() == 10);
        CHECK(est.per_n.back().first == 2000);
        CHECK(est.per_n.front().first == 200);
        // every checkpoint mean sits above the limit (the 1/n correction is
        // positive) but within sampling noise of it
        for (auto& [n, v] : est.per_n) {
            CHECK(v > 0.499);
            CHECK(v < 0.51);
        }
        CHECK(std::abs(est.extrapolated - 0.5) < 0.002);
        CHECK(est.hull_ok());
        CHECK(est.extrapolation_method == "speed-inverse-n-fit");
    }

    SECTION("Green metric ladder is ln3 times the word ladder, path for path") {
        Rng r1(77), r2(77);
        auto o = GreenOracle::make(f2, m, GreenMethod::closed_form);
        auto w = speed_estimate(f2, m, word_metric(f2), 500, 300, r1);
        auto gmet = speed_estimate(f2, m, green_metric(o), 500, 300, r2);
        REQUIRE(w.per_n.size() == gmet.per_n.size());
        for (size_t i = 0; i < w.per_n.size(); ++i) {
            CHECK(w.per_n[i].first == gmet.per_n[i].first);
            CHECK(gmet.per_n[i].second ==
                  Approx(w.per_n[i].second * std::log(3.0)).margin(1e-12));
        }
    }

    SECTION("same seed, same estimate") {
        Rng r1(5), r2(5);
        auto a = speed_estimate(f2, m, word_metric(f2), 300, 200, r1);
        auto b = speed_estimate(f2, m, word_metric(f2), 300, 200, r2);
        CHECK(a.extrapolated == b.extrapolated);
        CHECK(a.per_n == b.per_n);
    }

    SECTION("metric failures drop trials and are reported") {
        int calls = 0;
        MetricFn flaky = [&calls, &f2](const Element& x) {
            if (++calls % 3 == 0) throw std::runtime_error("no value");
            return double(word_length(f2, x));
        };
        Rng rng(9);
        auto est = speed_estimate(f2, m, flaky, 100, 50, rng);
        CHECK(est.extrapolation_method.find("dropped=") != std::string::npos);

        MetricFn broken = [](const Element&) -> double {
            throw std::runtime_error("always fails");
        };
        Rng rng2(10);
        CHECK_THROWS_AS(speed_estimate(f2, m, broken, 100, 50, rng2),
                        std::runtime_error);
    }

    SECTION("input validation") {
        Rng rng(2);
        CHECK_THROWS_AS(
            speed_estimate(lattice(1), m, word_metric(f2), 100, 10, rng),
            std::invalid_argument);
        CHECK_THROWS_AS(speed_estimate(f2, m, word_metric(f2), 5, 10, rng),
                        std::invalid_argument);
        CHECK_THROWS_AS(speed_estimate(f2, m, word_metric(f2), 100, 1, rng),
                        std::invalid_argument);
    }
}

TEST_CASE("entropy ladders: radial fast path equals direct convolution") {
    auto f2 = free_group(2);
    auto m = srw(f2);

    auto fast = entropy_ladder(m, 8);
    REQUIRE(fast.size() == 8);
    CHECK(fast[0].second == Approx(std::log(4.0)).margin(1e-12));

    std::vector<std::pair<int, double>> direct;
    convolution_power(m, 8, {}, [&direct](int n, const StepMeasure& p) {
        direct.emplace_back(n, entropy(p));
    });
    for (int i = 0; i < 8; ++i) {
        CHECK(fast[i].first == direct[i].first);
        CHECK(fast[i].second == Approx(direct[i].second).margin(1e-10));
    }

    SECTION("increments and averages decrease") {
        auto rows = entropy_ladder(biased_z(2.0 / 3.0), 14);
        for (size_t i = 2; i < rows.size(); ++i) {
            double inc_prev = rows[i - 1].second - rows[i - 2].second;
            double inc = rows[i].second - rows[i - 1].second;
            CHECK(inc <= inc_prev + 1e-9);
        }
        for (size_t i = 1; i < rows.size(); ++i)
            CHECK(rows[i].second / rows[i].first <=
                  rows[i - 1].second / rows[i - 1].first + 1e-9);
    }

    SECTION("budget exhaustion yields the partial ladder") {
        MeasureLimits tight;
        tight.budget_atoms = 100;
        auto z3 = lattice(3);
        auto rows = entropy_ladder(srw(z3), 12, tight);
        CHECK(rows.size() >= 1);
        CHECK(rows.size() < 12);

        MeasureLimits mid;
        mid.budget_atoms = 2000;
        auto est = entropy_estimate_convolution(srw(z3), 30, mid);
        CHECK(est.extrapolation_method.find("partial-ladder") !=
              std::string::npos);

        MeasureLimits tiny;
        tiny.budget_atoms = 30;
        CHECK_THROWS_AS(entropy_estimate_convolution(srw(z3), 12, tiny),
                        std::invalid_argument);
    }
}

TEST_CASE("convolution entropy extrapolates to the known limits") {
    auto estF2 = entropy_estimate_convolution(srw(free_group(2)), 12);
    CHECK(std::abs(estF2.extrapolated - kHF2) < 0.03);
    CHECK(estF2.hull_ok());
    for (size_t i = 1; i < estF2.per_n.size(); ++i)
        CHECK(estF2.per_n[i].second <= estF2.per_n[i - 1].second + 1e-9);

    auto estF3 = entropy_estimate_convolution(srw(free_group(3)), 12);
    CHECK(std::abs(estF3.extrapolated - kHF3) < 0.04);

    auto estZb = entropy_estimate_convolution(biased_z(2.0 / 3.0), 12);
    CHECK(std::abs(estZb.extrapolated) < 0.05);

    auto estZ3 = entropy_estimate_convolution(srw(lattice(3)), 12);
    CHECK(std::abs(estZ3.extrapolated) < 0.05);

    // laziness scales the entropy by the active fraction
    auto estLazy = entropy_estimate_convolution(lazy(0.3, srw(free_group(2))), 12);
    CHECK(std::abs(estLazy.extrapolated - 0.7 * kHF2) < 0.03);
}

TEST_CASE("pointwise entropy: unbiased rows and extrapolated ladder") {
    auto f2 = free_group(2);
    auto m = srw(f2);
    auto exact = entropy_ladder(m, 10);

    SECTION("single-n estimate sits on the exact ladder row") {
        Rng rng(404);
        auto est = entropy_estimate_pointwise(f2, m, 10, 20000, rng);
        CHECK(est.method == "mc-pointwise-entropy");
        CHECK(est.n_samples == 20000);
        CHECK(std::abs(est.value - exact[9].second / 10.0) <= 4.0 * est.sigma);
        CHECK(est.sigma > 0.0);
    }

    SECTION("lattice lookups agree with their exact rows too") {
        auto zb = biased_z(2.0 / 3.0);
        auto exz = entropy_ladder(zb, 8);
        Rng rng(405);
        auto est = entropy_estimate_pointwise(lattice(1), zb, 8, 20000, rng);
        CHECK(std::abs(est.value - exz[7].second / 8.0) <= 4.0 * est.sigma);

        auto z3 = lattice(3);
        auto ex3 = entropy_ladder(srw(z3), 6);
        Rng rng3(406);
        auto est3 = entropy_estimate_pointwise(z3, srw(z3), 6, 20000, rng3);
        CHECK(std::abs(est3.value - ex3[5].second / 6.0) <= 4.0 * est3.sigma);
    }

    SECTION("matched-trajectory ladder reproduces the exact ladder row by row") {
        Rng rng(617);
        auto est = pointwise_entropy_ladder(f2, m, 10, 10000, rng);
        CHECK(est.extrapolation_method == "pointwise-tail-lsq");
        CHECK(est.hull_ok());
        CHECK(std::abs(est.extrapolated - kHF2) < 0.03);
        CHECK(est.uncertainty >= kPointwiseBiasAllowance);

        // per_n rows are the sampled increments H(n) − H(n−1) for n = 4..10;
        // each is unbiased for its exact counterpart
        for (auto& [n, inc] : est.per_n) {
            double exact_inc = exact[n - 1].second - exact[n - 2].second;
            CHECK(std::abs(inc - exact_inc) < 0.05);
        }

        Rng r2(617);
        auto again = pointwise_entropy_ladder(f2, m, 10, 10000, r2);
        CHECK(again.extrapolated == est.extrapolated);
    }

    SECTION("degenerate laws extrapolate near zero") {
        Rng rng(311);
        auto est = pointwise_entropy_ladder(lattice(1), biased_z(2.0 / 3.0), 10,
                                            10000, rng);
        CHECK(std::abs(est.extrapolated) < 0.05);
    }

    SECTION("validation") {
        Rng rng(1);
        CHECK_THROWS_AS(pointwise_entropy_ladder(f2, m, 5, 100, rng),
                        std::invalid_argument);
        CHECK_THROWS_AS(entropy_estimate_pointwise(f2, m, 0, 100, rng),
                        std::invalid_argument);
        CHECK_THROWS_AS(
            entropy_estimate_pointwise(lattice(2), m, 5, 100, rng),
            std::invalid_argument);
    }
}

TEST_CASE("order and inequality checks judge estimates, not wishes") {
    Estimate speed(0.5493, 0.0002, 1000, "mc-speed");
    Estimate ent(0.5417, 0.0076, 1, "entropy-tail-lsq");

    auto ok = speed_entropy_order_check(speed, ent);
    CHECK(ok.pass);
    CHECK(ok.lhs == speed.value);
    CHECK(ok.rhs == ent.value);

    // synthetic violation must fail: the check has teeth
    auto bad = speed_entropy_order_check(Estimate(1.0, 0.001, 10, "mc-x"),
                                         Estimate(0.5, 0.001, 10, "mc-y"));
    CHECK_FALSE(bad.pass);

    SECTION("fundamental inequality verdicts") {
        // equality case: slack straddles zero within noise
        auto eq = fundamental_inequality_check(
            Estimate(kHF2, 0.005, 1, "h"), Estimate(0.5, 0.001, 1, "l"),
            Estimate(std::log(3.0), 0.002, 1, "v"));
        CHECK(eq.verdict != InequalityVerdict::fail);
        CHECK(std::abs(eq.slack) <= 3.0 * eq.sigma);

        // strict pass: volume estimated against the larger ball
        auto strict = fundamental_inequality_check(
            Estimate(kHF2, 0.005, 1, "h"), Estimate(0.5, 0.001, 1, "l"),
            Estimate(std::log(4.0), 0.002, 1, "v"));
        CHECK(strict.verdict == InequalityVerdict::pass);
        CHECK(strict.slack > 0.0);

        // proxy caveat: slightly negative slack inside 3 sigma
        auto caveat = fundamental_inequality_check(
            Estimate(0.55, 0.002, 1, "h"), Estimate(0.5, 0.0, 1, "l"),
            Estimate(1.09, 0.0, 1, "v"));
        CHECK(caveat.verdict == InequalityVerdict::pass_with_proxy_caveat);

        // clear failure
        auto fail = fundamental_inequality_check(
            Estimate(1.0, 0.001, 1, "h"), Estimate(0.1, 0.001, 1, "l"),
            Estimate(0.1, 0.001, 1, "v"));
        CHECK(fail.verdict == InequalityVerdict::fail);
        CHECK(std::string(verdict_name(fail.verdict)) == "fail");
    }
}

TEST_CASE("speed/entropy table: estimators overlap where the limits coincide") {
    auto f2 = free_group(2);
    auto m = srw(f2);
    auto o = GreenOracle::make(f2, m, GreenMethod::closed_form);
    ReportConfig cfg;
    cfg.speed_n = 2000;
    cfg.speed_trials = 2000;
    cfg.pointwise_trials = 4000;
    cfg.integral_samples = 20000;
    Rng rng(2718);
    auto rep = entropy_speed_report(f2, m, o, cfg, rng);
    REQUIRE(rep.rows.size() == 5);
    CHECK(rep.checks.size() == 6);  // 2 speed x 3 entropy
    CHECK(rep.pass);
    for (auto& row : rep.rows) {
        INFO(row.name << " = " << row.est.value << " +- " << row.est.sigma);
        CHECK(std::abs(row.est.value - kHF2) < 0.05);
    }

    SECTION("no boundary rows off free groups") {
        auto zb = biased_z(2.0 / 3.0);
        auto ob = GreenOracle::make(lattice(1), zb, GreenMethod::closed_form);
        ReportConfig c2;
        c2.speed_n = 2000;
        c2.speed_trials = 1000;
        c2.pointwise_trials = 2000;
        Rng r(999);
        auto rb = entropy_speed_report(lattice(1), zb, ob, c2, r);
        CHECK(rb.rows.size() == 3);
        CHECK(rb.checks.size() == 2);
        CHECK(rb.pass);
    }
}

TEST_CASE("conditional entropy restricts and renormalizes") {
    auto f2 = free_group(2);
    auto m = srw(f2);
    CHECK(conditional_entropy(m, [](const Element&) { return true; }) ==
          Approx(std::log(4.0)).margin(1e-12));
    CHECK(conditional_entropy(m, [](const Element& x) {
              return std::abs(x.data[0]) == 1;
          }) == Approx(std::log(2.0)).margin(1e-12));
    CHECK(conditional_entropy(m, [](const Element& x) {
              return x.data[0] == 2;
          }) == Approx(0.0).margin(1e-12));
    CHECK_THROWS_AS(conditional_entropy(m, [](const Element&) { return false; }),
                    std::invalid_argument);
}

TEST_CASE("entropy decomposition is an exact identity with certified cells") {
    auto f2 = free_group(2);
    auto m = srw(f2);
    auto w = word_metric(f2);

    auto rep = entropy_decomposition(m, 8, w, 0.5);
    CHECK(rep.eps == Approx(0.05));
    CHECK(rep.K == Approx(2.0));  // max(2(l+eps), 2 mean step) = 2
    CHECK(rep.mean_step == Approx(1.0));

    auto ladder = entropy_ladder(m, 8);
    CHECK(rep.exact_entropy == Approx(ladder[7].second).margin(1e-10));
    CHECK(std::abs(rep.identity_residual) <= 1e-9);
    CHECK(rep.total == Approx(rep.ball_term + rep.first_annulus_term +
                              rep.annuli_sum + rep.h_prime).margin(1e-12));

    // the ball holds the mass majority but not the entropy majority
    CHECK(rep.ball_mass > 0.5);
    CHECK(rep.ball_term / rep.total < 0.5);
    CHECK(rep.ball_term / rep.total == Approx(0.3558).margin(0.01));

    // support reaches only to distance n, so K = 2 leaves no dyadic cells
    CHECK(rep.annuli.empty());
    CHECK(rep.bounds_ok);

    SECTION("smaller K populates dyadic cells with certified Markov bounds") {
        auto r2 = entropy_decomposition(m, 8, w, 0.5,
                                        DecompositionParams{-1.0, 0.8});
        CHECK(std::abs(r2.identity_residual) <= 1e-9);
        REQUIRE(r2.annuli.size() == 1);
        const auto& row = r2.annuli[0];
        CHECK(row.lo == Approx(6.4));
        CHECK(row.hi == Approx(12.8));
        // only distance 8 lands there (odd radii are off-parity at n = 8),
        // so the mass is exactly the top-radius probability (3/4)^7
        double top = std::pow(0.75, 7);
        CHECK(row.mass == Approx(top).margin(1e-12));
        CHECK(row.markov_bound == Approx(8.0 * top / 6.4).margin(1e-12));
        CHECK(row.within);
        CHECK(r2.bounds_ok);
        // label entropy is bounded by the log cell count (3 nonempty cells)
        CHECK(r2.h_prime <= std::log(3.0) + 1e-12);
    }

    SECTION("degenerate-speed laws use the absolute ball width") {
        auto z3 = lattice(3);
        auto r3 = entropy_decomposition(srw(z3), 8, word_metric(z3), 0.0);
        CHECK(r3.eps == Approx(0.1));
        CHECK(std::abs(r3.identity_residual) <= 1e-9);
        CHECK(r3.bounds_ok);
        // the ball cell is the origin alone: conditioning on a single atom
        // contributes no entropy
        CHECK(r3.ball_term == Approx(0.0).margin(1e-12));
        CHECK(r3.ball_mass > 0.0);
    }

    SECTION("asymmetric laws decompose exactly as well") {
        auto zb = biased_z(2.0 / 3.0);
        auto rb = entropy_decomposition(zb, 10, word_metric(lattice(1)),
                                        1.0 / 3.0);
        CHECK(std::abs(rb.identity_residual) <= 1e-9);
        CHECK(rb.h_prime <= std::log(2.0) + 1e-12);
    }

    SECTION("K must clear the bridge cell") {
        CHECK_THROWS_AS(entropy_decomposition(m, 8, w, 0.5,
                                              DecompositionParams{-1.0, 0.5}),
                        std::invalid_argument);
        CHECK_THROWS_AS(entropy_decomposition(m, 0, w, 0.5),
                        std::invalid_argument);
        CHECK_THROWS_AS(entropy_decomposition(m, 8, w, -1.0),
                        std::invalid_argument);
    }
}
