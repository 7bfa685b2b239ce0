#include "gwalk/free_radial.hpp"
#include "gwalk/measure.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace gwalk;
using Catch::Approx;

TEST_CASE("entropy of catalog measures") {
    REQUIRE(entropy(srw(free_group(2))) == Approx(std::log(4.0)).epsilon(1e-14));
    REQUIRE(entropy(dirac(lattice(3), identity(lattice(3)))) == 0.0);
    GroupSpec z = lattice(1);
    Element p1 = parse_element(z, "1"), m1 = parse_element(z, "-1"), zero = identity(z);
    StepMeasure m(z, {{zero, 0.5}, {p1, 0.25}, {m1, 0.25}});
    REQUIRE(entropy(m) == Approx(1.5 * std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("mass must sum to one") {
    GroupSpec z = lattice(1);
    Element p1 = parse_element(z, "1"), m1 = parse_element(z, "-1");
    REQUIRE_THROWS_AS(StepMeasure(z, {{p1, 0.6}, {m1, 0.5}}), std::invalid_argument);
    REQUIRE_THROWS_AS(StepMeasure(z, {{p1, -0.2}, {m1, 1.2}}), std::invalid_argument);
}

TEST_CASE("convolution on Z matches path enumeration") {
    StepMeasure m = srw(lattice(1));
    StepMeasure m2 = convolve(m, m);
    GroupSpec z = lattice(1);
    REQUIRE(m2.mass_of(parse_element(z, "-2")) == Approx(0.25));
    REQUIRE(m2.mass_of(identity(z)) == Approx(0.5));
    REQUIRE(m2.mass_of(parse_element(z, "2")) == Approx(0.25));
    StepMeasure m4 = convolution_power(m, 4);
    REQUIRE(m4.mass_of(identity(z)) == Approx(6.0 / 16.0));
}

TEST_CASE("dirac is the convolution identity") {
    StepMeasure m = srw(free_group(2));
    StepMeasure d = dirac(m.group(), identity(m.group()));
    REQUIRE(convolve(d, m) == m);
    REQUIRE(convolve(m, d) == m);
}

TEST_CASE("free group two-step support and return mass") {
    StepMeasure m2 = convolution_power(srw(free_group(2)), 2);
    REQUIRE(m2.support_size() == 13);
    REQUIRE(m2.mass_of(identity(free_group(2))) == Approx(0.25));
}

TEST_CASE("reversed negates supports and preserves entropy") {
    StepMeasure b = biased_z(2.0 / 3.0);
    StepMeasure rb = reversed(b);
    GroupSpec z = lattice(1);
    REQUIRE(rb.mass_of(parse_element(z, "-1")) == Approx(2.0 / 3.0));
    REQUIRE(rb.mass_of(parse_element(z, "1")) == Approx(1.0 / 3.0));
    REQUIRE(reversed(rb) == b);
    REQUIRE(entropy(rb) == Approx(entropy(b)).epsilon(1e-14));
    StepMeasure sym = srw(free_group(2));
    REQUIRE(reversed(sym) == sym);
}

TEST_CASE("convolution is associative") {
    StepMeasure a = srw(free_group(2));
    StepMeasure b = lazy(0.25, a);
    StepMeasure lhs = convolve(convolve(a, b), a);
    StepMeasure rhs = convolve(a, convolve(b, a));
    REQUIRE(lhs.support_size() == rhs.support_size());
    for (auto& [x, p] : lhs.atoms())
        REQUIRE(rhs.mass_of(x) == Approx(p).epsilon(1e-12));
}

TEST_CASE("entropy subadditivity and nonincreasing increments") {
    for (auto g : {free_group(2), lattice(3)}) {
        StepMeasure m = srw(g);
        std::vector<double> H{0.0};
        convolution_power(m, 10, {}, [&](int, const StepMeasure& mk) {
            H.push_back(entropy(mk));
        });
        for (int n = 1; n + 1 <= 6; ++n)
            for (int k = 1; n + k <= 6; ++k)
                REQUIRE(H[n + k] <= H[n] + H[k] + 1e-11);
        for (int n = 1; n + 2 <= 10; ++n) {
            double inc1 = H[n + 1] - H[n];
            double inc2 = H[n + 2] - H[n + 1];
            REQUIRE(inc2 <= inc1 + 1e-11);
        }
    }
}

TEST_CASE("sampling matches atom frequencies") {
    StepMeasure m = srw(free_group(2));
    Rng rng(31);
    std::unordered_map<Element, int, ElementHash> counts;
    const int n = 100000;
    for (int i = 0; i < n; ++i) counts[m.sample(rng)]++;
    for (auto& [x, p] : m.atoms())
        REQUIRE(std::abs(counts[x] - n * p) < 3 * std::sqrt(n * p * (1 - p)));
    Rng r1(12), r2(12);
    for (int i = 0; i < 100; ++i) REQUIRE(m.sample(r1) == m.sample(r2));
}

TEST_CASE("first moment under word and custom metrics") {
    GroupSpec f2 = free_group(2);
    StepMeasure m = srw(f2);
    MetricFn word = [&](const Element& x) { return double(word_length(f2, x)); };
    REQUIRE(first_moment(m, word) == Approx(1.0));
    MetricFn scaled = [&](const Element& x) {
        return std::log(3.0) * double(word_length(f2, x));
    };
    REQUIRE(first_moment(m, scaled) == Approx(std::log(3.0)));
}

TEST_CASE("measure text round-trip") {
    StepMeasure m = convolution_power(srw(free_group(2)), 3);
    std::stringstream ss;
    serialize_measure(m, ss);
    StepMeasure back = deserialize_measure(free_group(2), ss);
    REQUIRE(back == m);
}

TEST_CASE("catalog parser") {
    REQUIRE(parse_measure(lattice(1), "biased(0.6666666666666666)")
                .mass_of(parse_element(lattice(1), "1")) == Approx(2.0 / 3.0));
    StepMeasure lz = parse_measure(free_group(2), "lazy(0.3, srw)");
    REQUIRE(lz.mass_of(identity(free_group(2))) == Approx(0.3));
    REQUIRE(lz.support_size() == 5);
    REQUIRE_THROWS_AS(parse_measure(free_group(2), "biased(0.7)"), std::invalid_argument);
    REQUIRE_THROWS_AS(parse_measure(free_group(2), "whatever"), std::invalid_argument);
}

TEST_CASE("pruning records discarded mass with an entropy certificate") {
    StepMeasure m = srw(lattice(1));
    MeasureLimits tight;
    tight.budget_atoms = 40;
    tight.prune_eps = 1e-4;
    StepMeasure m60 = convolution_power(m, 60, tight);
    REQUIRE(m60.prune().delta > 0.0);
    REQUIRE(m60.prune().delta < 0.05);
    double total = 0.0;
    for (auto& [x, p] : m60.atoms()) total += p;
    REQUIRE(total == Approx(1.0 - m60.prune().delta).epsilon(1e-12));
    // exact entropy must sit within the certificate of the pruned one
    double Hexact = entropy(convolution_power(m, 60));
    double Hpruned = entropy(m60);
    REQUIRE(std::abs(Hexact - Hpruned) <=
            m60.prune().entropy_error_bound() + m60.prune().delta * Hexact + 1e-9);
    MeasureLimits hard = tight;
    hard.allow_prune = false;
    REQUIRE_THROWS_AS(convolution_power(m, 60, hard), std::length_error);
}

TEST_CASE("radial engine agrees with generic convolution") {
    FreeRadial rad(2, 8);
    StepMeasure m = srw(free_group(2));
    std::vector<double> H{0.0};
    convolution_power(m, 8, {}, [&](int, const StepMeasure& mk) {
        H.push_back(entropy(mk));
    });
    for (int n = 1; n <= 8; ++n)
        REQUIRE(rad.entropy(n) == Approx(H[n]).epsilon(1e-11));
    // point masses: mu^4 at a fixed radius-2 word equals the radial value
    StepMeasure m4 = convolution_power(m, 4);
    Element ab = parse_element(free_group(2), "ab");
    REQUIRE(std::log(m4.mass_of(ab)) == Approx(rad.log_point_mass(4, 2)).epsilon(1e-12));
    FreeRadial rad3(3, 8);
    StepMeasure m3 = convolution_power(srw(free_group(3)), 6);
    REQUIRE(rad3.entropy(6) == Approx(entropy(m3)).epsilon(1e-11));
}

TEST_CASE("radial golden entropies") {
    FreeRadial rad(2, 12);
    REQUIRE(rad.entropy(1) == Approx(std::log(4.0)).epsilon(1e-12));
    REQUIRE(rad.entropy(2) == Approx(2.426015131960).epsilon(1e-10));
    REQUIRE(rad.entropy(10) == Approx(8.131784965595).epsilon(1e-10));
    REQUIRE(rad.entropy(12) == Approx(9.359358601418).epsilon(1e-10));
    FreeRadial rad3(3, 12);
    REQUIRE(rad3.entropy(12) == Approx(15.280932842545).epsilon(1e-10));
}
