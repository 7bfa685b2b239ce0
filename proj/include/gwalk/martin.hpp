#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwalk/estimate.hpp"
#include "gwalk/green.hpp"
#include "gwalk/group.hpp"
#include "gwalk/measure.hpp"
#include "gwalk/rng.hpp"

namespace gwalk {

struct KernelValue {
    double value;
    double log_value;
    static KernelValue from_log(double lv) { return {std::exp(lv), lv}; }
};

// K(x,y) = F(x,y)/F(e,y) = G(x,y)/G(e,y).
inline KernelValue martin_kernel(const GreenOracle& o, const Element& x,
                                 const Element& y) {
    double fx = o.hitting_prob(x, y).value;
    double fe = o.hitting_prob(identity(o.group()), y).value;
    if (!(fx > 0.0) || !(fe > 0.0))
        throw std::domain_error("martin_kernel: vanishing hitting probability");
    double lv = std::log(fx) - std::log(fe);
    return {fx / fe, lv};
}

// ---------------------------------------------------------------------------
// boundary model for free groups
//
// A walk with uniform generator steps on Free(k) escapes linearly, so its
// reduced word converges letter by letter to an infinite reduced word ξ.
// A BoundaryPoint is that limit, represented by the letters confirmed so far
// plus the full walk state, so the materialized prefix can be extended on
// demand.  A prefix of length L is confirmed once the word length has stayed
// >= L for `window` consecutive steps (the first L letters cannot change
// while the length stays above L, since steps edit the word at its end).
// Regression after confirmation is possible in principle but exponentially
// unlikely in the window; it is detected and reported, never silently
// accepted.
class BoundaryPoint {
public:
    BoundaryPoint(const GroupSpec& g, const StepMeasure& m, uint64_t seed,
                  uint32_t window = 50, uint64_t step_budget = 1'000'000)
        : group_(g), measure_(m), rng_(seed), seed_(seed), window_(window),
          budget_(step_budget), pos_(identity(g)) {
        if (g.kind != GroupKind::Free)
            throw std::invalid_argument("boundary model needs a free group");
    }

    const GroupSpec& group() const { return group_; }
    uint64_t seed() const { return seed_; }
    const std::vector<int32_t>& prefix() const { return confirmed_; }

    // Extend the confirmed prefix to at least `len` letters.
    void extend(size_t len) {
        while (confirmed_.size() < len) {
            uint64_t stable = 0;
            while (stable < window_) {
                if (steps_ >= budget_)
                    throw std::runtime_error(
                        "boundary sampling: stabilization not reached within "
                        "step budget");
                step();
                stable = pos_.data.size() >= len ? stable + 1 : 0;
            }
            for (size_t i = 0; i < len; ++i) {
                int32_t letter = pos_.data[i];
                if (i < confirmed_.size()) {
                    if (confirmed_[i] != letter)
                        throw std::runtime_error(
                            "boundary sampling: confirmed prefix regressed");
                } else {
                    confirmed_.push_back(letter);
                }
            }
        }
    }

    // walk endpoint at the time materialization last paused (agrees with the
    // confirmed prefix on its first prefix().size() letters)
    const Element& last_position() const { return pos_; }
    uint64_t steps_taken() const { return steps_; }

private:
    void step() {
        int32_t l = measure_.sample_letter(rng_);
        if (l != 0) mul_gen_inplace(group_, pos_, l);
        ++steps_;
    }

    GroupSpec group_;
    StepMeasure measure_;
    Rng rng_;
    uint64_t seed_;
    uint32_t window_;
    uint64_t budget_;
    Element pos_;
    uint64_t steps_ = 0;
    std::vector<int32_t> confirmed_;
};

// Draw ξ distributed as the exit law of the walk, with one letter
// materialized (callers extend as needed).
inline BoundaryPoint sample_boundary(const GroupSpec& g, const StepMeasure& m,
                                     Rng& rng, uint32_t stabilization = 50) {
    MeasureProfile pr = profile_measure(g, m);
    if (pr.kind != MeasureProfile::Kind::free_uniform)
        throw std::invalid_argument(
            "boundary sampling implemented for uniform (possibly lazy) "
            "generator steps on free groups");
    BoundaryPoint xi(g, m, rng.next_u64(), stabilization);
    xi.extend(1);
    return xi;
}

// number of common leading letters of the reduced word x and the prefix
inline size_t common_prefix_letters(const Element& x,
                                    const std::vector<int32_t>& prefix) {
    size_t n = std::min(x.data.size(), prefix.size());
    size_t c = 0;
    while (c < n && x.data[c] == prefix[c]) ++c;
    return c;
}

// K(x, ξ) = (2k−1)^{−b_ξ(x)}, b_ξ(x) = |x| − 2·(common prefix of x and ξ).
// Requires the materialized prefix to be longer than 2|x| (extend and retry).
inline KernelValue boundary_kernel(const GroupSpec& g, const StepMeasure& m,
                                   const Element& x, const BoundaryPoint& xi) {
    MeasureProfile pr = profile_measure(g, m);
    if (pr.kind != MeasureProfile::Kind::free_uniform)
        throw std::invalid_argument("boundary kernel needs uniform generator "
                                    "steps on a free group");
    if (!(g == xi.group()))
        throw std::invalid_argument("boundary point from a different group");
    if (xi.prefix().size() <= 2 * x.data.size())
        throw std::invalid_argument(
            "boundary kernel: insufficient materialized prefix");
    double b = double(x.data.size()) -
               2.0 * double(common_prefix_letters(x, xi.prefix()));
    return KernelValue::from_log(-b * std::log(2.0 * g.param - 1.0));
}

// ---------------------------------------------------------------------------
// integral representations
//
// Both the Green speed and the entropy equal EẼ[−ln K(X̃₁, Z∞)] with
// X̃₁ ~ μ̃ independent of Z∞ ~ ν.  The two operations share one integrand and
// one sampler — calling them with the same seed yields identical estimates,
// which is exactly the point: the two limits are computed by the same number.

namespace detail {
struct IntegralOutcome {
    Estimate est;
    uint64_t failures = 0;
};

inline IntegralOutcome boundary_integral_core(const GroupSpec& g,
                                              const StepMeasure& m,
                                              uint64_t samples,
                                              uint64_t master,
                                              const char* method) {
    if (samples < 1) throw std::invalid_argument("samples >= 1 required");
    if (profile_measure(g, m).kind != MeasureProfile::Kind::free_uniform)
        throw std::invalid_argument("boundary integrals need uniform "
                                    "generator steps on a free group");
    StepMeasure rev = reversed(m);
    double sum = 0.0, sumsq = 0.0;
    uint64_t failures = 0, kept = 0;
    for (uint64_t s = 0; s < samples; ++s) {
        Rng stream(derive_stream(master, "boundary-integral", s));
        Element x1 = rev.sample(stream);
        try {
            BoundaryPoint xi(g, m, stream.next_u64());
            xi.extend(2 * x1.data.size() + 1);
            double v = -boundary_kernel(g, m, x1, xi).log_value;
            sum += v;
            sumsq += v * v;
            ++kept;
        } catch (const std::runtime_error&) {
            ++failures;  // stabilization budget exhausted; trial dropped
        }
    }
    if (kept == 0) throw std::runtime_error("all boundary samples failed");
    double mean = sum / double(kept);
    double var = std::max(0.0, sumsq / double(kept) - mean * mean);
    std::string tag = method;
    if (failures > 0) tag += "(failures=" + std::to_string(failures) + ")";
    return {Estimate(mean, std::sqrt(var / double(kept)), kept, tag), failures};
}
}  // namespace detail

inline Estimate green_speed_integral(const GroupSpec& g, const StepMeasure& m,
                                     uint64_t samples, Rng& rng) {
    return detail::boundary_integral_core(g, m, samples, rng.next_u64(),
                                          "green-speed-integral").est;
}

inline Estimate entropy_integral(const GroupSpec& g, const StepMeasure& m,
                                 uint64_t samples, Rng& rng) {
    return detail::boundary_integral_core(g, m, samples, rng.next_u64(),
                                          "entropy-integral").est;
}

// ---------------------------------------------------------------------------
// maximal inequality

struct MaximalInequalityRow {
    double a;
    double empirical;  // P[sup_{n<=horizon} K(X̃₁, Z_n) >= a], finite-horizon
    double bound;      // 1/a
    double sigma;      // binomial standard error
    bool ok;           // empirical <= bound + 3 sigma
};

struct MaximalInequalityReport {
    std::vector<MaximalInequalityRow> rows;
    uint64_t trajectories = 0;
    uint64_t horizon = 0;
    // the finite-horizon sup only underestimates the true sup, so `ok`
    // failures falsify the bound; passes are one-sided evidence
    bool one_sided = true;
    bool all_ok() const {
        for (auto& r : rows)
            if (!r.ok) return false;
        return true;
    }
};

// Empirical tail of sup_n K(X̃₁, Z_n) against the 1/a bound, for independent
// X̃₁ ~ μ̃ and walk (Z_n).  Exact kernels on free groups:
// K(x, Z_n) = (2k−1)^{2c − |x|} with c the common-prefix length of x and Z_n.
inline MaximalInequalityReport maximal_inequality_check(
    const GroupSpec& g, const StepMeasure& m, std::vector<double> a_grid,
    uint64_t trajectories, uint64_t horizon, Rng& rng) {
    MeasureProfile pr = profile_measure(g, m);
    if (pr.kind != MeasureProfile::Kind::free_uniform)
        throw std::invalid_argument("maximal-inequality check needs the exact "
                                    "free-group kernel");
    if (trajectories < 1) throw std::invalid_argument("trajectories >= 1");
    for (double a : a_grid)
        if (!(a > 0.0)) throw std::invalid_argument("a_grid entries must be > 0");
    const uint64_t master = rng.next_u64();
    StepMeasure rev = reversed(m);
    const double lnq = std::log(2.0 * g.param - 1.0);
    std::vector<uint64_t> counts(a_grid.size(), 0);
    Element pos = identity(g);
    for (uint64_t t = 0; t < trajectories; ++t) {
        Rng stream(derive_stream(master, "maximal-pair", t));
        Element x1 = rev.sample(stream);
        const auto& xw = x1.data;
        pos.data.clear();
        // sup over n <= horizon of (2c_n − |x|); n = 0 gives −|x| (Z_0 = e)
        int64_t best = -int64_t(xw.size());
        for (uint64_t n = 0; n < horizon; ++n) {
            int32_t l = m.sample_letter(stream);
            if (l != 0) mul_gen_inplace(g, pos, l);
            size_t c = 0, lim = std::min(xw.size(), pos.data.size());
            while (c < lim && pos.data[c] == xw[c]) ++c;
            best = std::max(best, 2 * int64_t(c) - int64_t(xw.size()));
        }
        double sup_log = double(best) * lnq;
        for (size_t i = 0; i < a_grid.size(); ++i)
            if (sup_log >= std::log(a_grid[i]) - 1e-12) ++counts[i];
    }
    MaximalInequalityReport rep;
    rep.trajectories = trajectories;
    rep.horizon = horizon;
    for (size_t i = 0; i < a_grid.size(); ++i) {
        double p = double(counts[i]) / double(trajectories);
        double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / double(trajectories)) /
                              double(trajectories));
        double bound = 1.0 / a_grid[i];
        rep.rows.push_back({a_grid[i], p, bound, se, p <= bound + 3.0 * se});
    }
    return rep;
}

}  // namespace gwalk
