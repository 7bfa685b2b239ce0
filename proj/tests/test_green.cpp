#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gwalk/green.hpp"

using namespace gwalk;
using Catch::Approx;

namespace {
const GroupSpec F2 = free_group(2);
const GroupSpec Z1 = lattice(1);
const GroupSpec Z3 = lattice(3);

Element zel(int64_t v) {
    Element e = identity(Z1);
    e.data[0] = int32_t(v);
    return e;
}
Element z3el(int x, int y, int z) {
    Element e = identity(Z3);
    e.data = {int32_t(x), int32_t(y), int32_t(z)};
    return e;
}
}  // namespace

TEST_CASE("trajectories replay deterministically") {
    StepMeasure m = srw(F2);
    Rng rng(7);
    Trajectory t0 = simulate(F2, m, identity(F2), 0, rng);
    REQUIRE(t0.positions().size() == 1);
    REQUIRE(t0.positions()[0] == identity(F2));

    Rng r1(99), r2(99);
    Trajectory a = simulate(F2, m, identity(F2), 200, r1);
    Trajectory b = simulate(F2, m, identity(F2), 200, r2);
    REQUIRE(a.seed() == b.seed());
    REQUIRE(a.positions() == b.positions());
    // positions[k] = positions[k-1] * increments[k]
    for (size_t k = 1; k < a.positions().size(); ++k)
        REQUIRE(a.positions()[k] ==
                mul(F2, a.positions()[k - 1], a.increments()[k - 1]));
}

TEST_CASE("deterministic one-way walk marches along Z") {
    StepMeasure always_up(Z1, {{zel(1), 1.0}});
    Rng rng(3);
    Trajectory t = simulate(Z1, always_up, identity(Z1), 10, rng);
    for (int k = 0; k <= 10; ++k) REQUIRE(t.positions()[k] == zel(k));
}

TEST_CASE("free-group walk escapes at the birth-death drift") {
    StepMeasure m = srw(F2);
    Walker w(F2, m);
    Rng rng(derive_stream(2024, "drift-test"));
    const int trials = 10000, n = 100;
    double sum = 0.0;
    for (int t = 0; t < trials; ++t) {
        w.reset();
        for (int k = 0; k < n; ++k) w.step(rng);
        sum += double(w.length()) / n;
    }
    double mean = sum / trials;
    double sigma = std::sqrt(0.75 / n / trials);
    REQUIRE(std::abs(mean - 0.5) < 3.0 * sigma + 1.0 / n);
}

TEST_CASE("closed-form hitting probabilities and Green values") {
    auto o2 = GreenOracle::make(F2, srw(F2), GreenMethod::closed_form);
    Element a = parse_element(F2, "a");
    REQUIRE(o2.hitting_prob(a, a).value == 1.0);
    REQUIRE(o2.hitting_prob(identity(F2), a).value == Approx(1.0 / 3.0));
    REQUIRE(o2.hitting_prob(identity(F2), parse_element(F2, "ab'a")).value ==
            Approx(std::pow(3.0, -3.0)));
    REQUIRE(o2.green_at_origin().value == Approx(1.5));
    REQUIRE(o2.green_at_origin().sigma == 0.0);

    auto o3 = GreenOracle::make(free_group(3), srw(free_group(3)),
                                GreenMethod::closed_form);
    REQUIRE(o3.hitting_prob(identity(free_group(3)),
                            parse_element(free_group(3), "c")).value ==
            Approx(0.2));
    REQUIRE(o3.green_at_origin().value == Approx(5.0 / 4.0));

    auto ob = GreenOracle::make(Z1, biased_z(2.0 / 3.0),
                                GreenMethod::closed_form);
    REQUIRE(ob.green_at_origin().value == Approx(3.0));
    REQUIRE(ob.hitting_prob(zel(0), zel(1)).value == 1.0);
    REQUIRE(ob.hitting_prob(zel(0), zel(-1)).value == Approx(0.5));
    REQUIRE(ob.hitting_prob(zel(0), zel(-4)).value == Approx(1.0 / 16.0));

    // laziness leaves F alone and inflates G by the holding time
    auto ol = GreenOracle::make(F2, lazy(0.3, srw(F2)),
                                GreenMethod::closed_form);
    REQUIRE(ol.hitting_prob(identity(F2), a).value == Approx(1.0 / 3.0));
    REQUIRE(ol.green_at_origin().value == Approx(1.5 / 0.7));
}

TEST_CASE("oracle availability is policed") {
    REQUIRE_THROWS_AS(GreenOracle::make(Z1, srw(Z1), GreenMethod::closed_form),
                      std::invalid_argument);  // recurrent
    REQUIRE_THROWS_AS(
        GreenOracle::make(lattice(2), srw(lattice(2)), GreenMethod::monte_carlo),
        std::invalid_argument);  // recurrent
    REQUIRE_THROWS_AS(GreenOracle::make(Z3, srw(Z3), GreenMethod::closed_form),
                      std::invalid_argument);  // no exact Green data
    REQUIRE_THROWS_AS(GreenOracle::make(F2, srw(F2), GreenMethod::lattice_dp),
                      std::invalid_argument);
    auto of = GreenOracle::make(Z3, srw(Z3), GreenMethod::fourier_integral);
    REQUIRE_THROWS_AS(of.green_function(identity(Z3), z3el(60, 0, 0)),
                      std::invalid_argument);  // beyond the integral's radius cap
}

TEST_CASE("fourier oracle reproduces reference lattice Green values") {
    auto o = GreenOracle::make(Z3, srw(Z3), GreenMethod::fourier_integral);
    const struct { int x, y, z; double ref; } table[] = {
        {0, 0, 0, 1.516386059151978}, {1, 0, 0, 0.516386059151977},
        {1, 1, 0, 0.331148602126423}, {1, 1, 1, 0.261470126386353},
        {2, 1, 0, 0.215589620840941}, {3, 2, 1, 0.126945971807377},
        {5, 4, 3, 0.067339176682662}, {10, 0, 0, 0.047869569251576},
        {7, 7, 7, 0.039335852122718}, {2, 0, 0, 0.257335887254194},
    };
    for (const auto& t : table) {
        Estimate g = o.green_function(identity(Z3), z3el(t.x, t.y, t.z));
        REQUIRE(std::abs(g.value - t.ref) <= kBesselGreenBound);
        REQUIRE(std::abs(g.value - t.ref) <= g.sigma);
    }
}

TEST_CASE("dp oracle agrees with the fourier oracle within bounds") {
    auto odp = GreenOracle::make(Z3, srw(Z3), GreenMethod::lattice_dp);
    auto of = GreenOracle::make(Z3, srw(Z3), GreenMethod::fourier_integral);
    for (auto [x, y, z] : {std::tuple{0, 0, 0}, {1, 0, 0}, {2, 2, 1},
                           {4, 0, 3}, {10, 10, 10}, {25, 5, 1}}) {
        Estimate a = odp.green_function(identity(Z3), z3el(x, y, z));
        Estimate b = of.green_function(identity(Z3), z3el(x, y, z));
        REQUIRE(std::abs(a.value - b.value) <= a.sigma + b.sigma);
    }
    // G(e,e) = 1 + G(e, neighbor) for the unit-step walk (first-step relation)
    Estimate g0 = odp.green_at_origin();
    Estimate g1 = odp.green_function(identity(Z3), z3el(1, 0, 0));
    REQUIRE(std::abs(g0.value - 1.0 - g1.value) <= g0.sigma + g1.sigma);
}

TEST_CASE("visit-count identity links G and F across oracles") {
    // |G(x,y) − G(e,e) F(x,y)| small: exact on closed forms, bounded on Z^3
    auto o2 = GreenOracle::make(F2, srw(F2), GreenMethod::closed_form);
    Rng rng(11);
    auto ball = ball_enumerate(F2, 3);
    for (int i = 0; i < 300; ++i) {
        const Element& x = ball[rng.uniform_below(ball.size())];
        const Element& y = ball[rng.uniform_below(ball.size())];
        double g = o2.green_function(x, y).value;
        double f = o2.hitting_prob(x, y).value;
        REQUIRE(std::abs(g - o2.green_at_origin().value * f) <= 1e-9);
    }
    auto odp = GreenOracle::make(Z3, srw(Z3), GreenMethod::lattice_dp);
    auto of = GreenOracle::make(Z3, srw(Z3), GreenMethod::fourier_integral);
    for (auto [x, y, z] : {std::tuple{1, 1, 0}, {3, 1, 2}, {7, 0, 1}}) {
        Estimate g = odp.green_function(identity(Z3), z3el(x, y, z));
        Estimate f = of.hitting_prob(identity(Z3), z3el(x, y, z));
        Estimate g0 = odp.green_at_origin();
        double bound = g.sigma + g0.value * f.sigma + f.value * g0.sigma;
        REQUIRE(std::abs(g.value - g0.value * f.value) <= bound);
    }
}

TEST_CASE("monte carlo hitting is downward and converges with the horizon") {
    StepMeasure m = srw(F2);
    Element gen = parse_element(F2, "a");
    Rng r1(505), r2(505), r3(505);
    Estimate short_h = monte_carlo_hitting(F2, m, identity(F2), gen, 20000, 20, r1);
    Estimate long_h = monte_carlo_hitting(F2, m, identity(F2), gen, 20000, 200, r2);
    REQUIRE(short_h.bias == Bias::downward);
    REQUIRE(short_h.value <= long_h.value);  // same streams, nested events
    REQUIRE(long_h.value <= 1.0 / 3.0 + 3.0 * long_h.sigma);
    REQUIRE(long_h.value >= 1.0 / 3.0 - 3.0 * long_h.sigma - 0.01);
    Estimate same = monte_carlo_hitting(F2, m, gen, gen, 10, 5, r3);
    REQUIRE(same.value == 1.0);
}

TEST_CASE("green distance behaves as a (quasi-)metric") {
    auto o2 = GreenOracle::make(F2, srw(F2), GreenMethod::closed_form);
    Element a = parse_element(F2, "a");
    REQUIRE(o2.green_distance(a, a) == 0.0);
    REQUIRE(o2.green_distance(identity(F2), parse_element(F2, "ab'ab")) ==
            Approx(4.0 * std::log(3.0)));
    auto ball = ball_enumerate(F2, 3);
    Rng rng(13);
    for (int i = 0; i < 2000; ++i) {
        const Element& x = ball[rng.uniform_below(ball.size())];
        const Element& y = ball[rng.uniform_below(ball.size())];
        const Element& z = ball[rng.uniform_below(ball.size())];
        double dxz = o2.green_distance(x, z);
        double dxy = o2.green_distance(x, y);
        double dyz = o2.green_distance(y, z);
        REQUIRE(dxz <= dxy + dyz + 1e-12);
        REQUIRE(dxy == Approx(o2.green_distance(y, x)));  // symmetric measure
        // left invariance
        const Element& g = ball[rng.uniform_below(ball.size())];
        REQUIRE(o2.green_distance(mul(F2, g, x), mul(F2, g, y)) == Approx(dxy));
    }
    // drift direction collapses the quasi-metric on biased Z
    auto ob = GreenOracle::make(Z1, biased_z(2.0 / 3.0), GreenMethod::closed_form);
    REQUIRE(ob.green_distance(zel(0), zel(1)) == 0.0);
    REQUIRE(ob.green_distance(zel(0), zel(-1)) == Approx(std::log(2.0)));
    REQUIRE(ob.green_distance_sym(zel(0), zel(1)) == Approx(std::log(2.0)));
}

TEST_CASE("green balls on the free group have exact counts") {
    auto o2 = GreenOracle::make(F2, srw(F2), GreenMethod::closed_form);
    double ln3 = std::log(3.0);
    BallCount b0 = green_ball_count(o2, 0.0);
    REQUIRE(b0.lower == 1);
    REQUIRE(b0.exact);
    REQUIRE(green_ball_count(o2, ln3).lower == 5);
    REQUIRE(green_ball_count(o2, 2 * ln3).lower == 17);
    REQUIRE(green_ball_count(o2, 1.5 * ln3).lower == 5);  // floor between shells
    REQUIRE_THROWS_AS(green_ball_count(o2, 40 * ln3), std::length_error);

    std::vector<std::pair<double, double>> counts;
    for (int k = 1; k <= 8; ++k)
        counts.emplace_back(k * ln3,
                            double(green_ball_count(o2, k * ln3).lower));
    double slope = log_volume_growth(counts);
    REQUIRE(std::abs(slope - 1.0) < 0.1);
    std::vector<std::pair<double, double>> flat{{1.0, 7.0}, {2.0, 7.0}, {3.0, 7.0}};
    REQUIRE(log_volume_growth(flat) == Approx(0.0));
}

TEST_CASE("green balls on Z^3 are bracketed and grow at degree three") {
    auto o = GreenOracle::make(Z3, srw(Z3), GreenMethod::fourier_integral);
    std::vector<std::tuple<double, double, double>> brackets;
    uint64_t prev_upper = 0;
    for (double R : {3.0, 3.4, 3.8, 4.2, 4.6, 5.0}) {
        BallCount b = green_ball_count(o, R);
        REQUIRE(b.lower <= b.upper);
        REQUIRE_FALSE(b.exact);
        REQUIRE(b.lower > 0);
        REQUIRE(b.upper >= prev_upper);
        prev_upper = b.upper;
        brackets.emplace_back(R, double(b.lower), double(b.upper));
    }
    auto [lo, hi] = log_volume_growth_bracket(brackets);
    REQUIRE(lo <= hi);
    REQUIRE(lo >= 2.5);
    REQUIRE(hi <= 3.3);
}

TEST_CASE("return probabilities are exact and decay at the lattice rate") {
    HeatKernelReport rep = heat_kernel_decay(Z3, srw(Z3), 200);
    REQUIRE(rep.values[0].second == 1.0);
    REQUIRE(rep.values[1].second == 0.0);
    REQUIRE(rep.values[7].second == 0.0);
    REQUIRE(rep.values[2].second == Approx(1.0 / 6.0).epsilon(1e-13));
    REQUIRE(rep.values[4].second == Approx(5.0 / 72.0).epsilon(1e-13));
    REQUIRE(rep.slope > -1.6);
    REQUIRE(rep.slope < -1.4);
    for (auto& [k, p] : rep.values)
        if (k >= 1)
            REQUIRE(p <= rep.c_fit * std::pow(double(k), -1.5) + 1e-15);

    HeatKernelReport z1 = heat_kernel_decay(Z1, biased_z(2.0 / 3.0), 50);
    REQUIRE(z1.values[2].second == Approx(4.0 / 9.0));
    HeatKernelReport z1lazy = heat_kernel_decay(Z1, lazy(0.5, srw(Z1)), 10);
    REQUIRE(z1lazy.values[1].second == Approx(0.5));
    REQUIRE_THROWS_AS(heat_kernel_decay(Z3, srw(Z3), 500), std::length_error);
    REQUIRE_THROWS_AS(heat_kernel_decay(F2, srw(F2), 10), std::invalid_argument);
}
