#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gwalk/estimate.hpp"
#include "gwalk/group.hpp"
#include "gwalk/lattice_green.hpp"
#include "gwalk/measure.hpp"
#include "gwalk/rng.hpp"

namespace gwalk {

// ---------------------------------------------------------------------------
// trajectories

// A random-walk trajectory Z_0 = start, Z_k = Z_{k-1}·X_k with i.i.d. steps
// X_k ~ m.  The object is defined by (start, seed, steps); increments and
// positions are materialized lazily and replaying the same seed reproduces
// the identical trajectory.
class Trajectory {
public:
    Trajectory(GroupSpec g, StepMeasure m, Element start, uint64_t steps,
               uint64_t seed)
        : group_(g), measure_(std::move(m)), start_(std::move(start)),
          steps_(steps), seed_(seed) {}

    const GroupSpec& group() const { return group_; }
    const Element& start() const { return start_; }
    uint64_t steps() const { return steps_; }
    uint64_t seed() const { return seed_; }

    const std::vector<Element>& increments() const {
        if (increments_.empty() && steps_ > 0) {
            Rng rng(seed_);
            increments_.reserve(steps_);
            for (uint64_t k = 0; k < steps_; ++k)
                increments_.push_back(measure_.sample(rng));
        }
        return increments_;
    }

    const std::vector<Element>& positions() const {
        if (positions_.empty()) {
            positions_.reserve(steps_ + 1);
            positions_.push_back(start_);
            for (const Element& x : increments())
                positions_.push_back(mul(group_, positions_.back(), x));
        }
        return positions_;
    }

private:
    GroupSpec group_;
    StepMeasure measure_;
    Element start_;
    uint64_t steps_;
    uint64_t seed_;
    mutable std::vector<Element> increments_;
    mutable std::vector<Element> positions_;
};

inline Trajectory simulate(const GroupSpec& g, const StepMeasure& m,
                           const Element& start, uint64_t steps, Rng& rng) {
    if (!(g == m.group()))
        throw std::invalid_argument("measure lives on a different group");
    return Trajectory(g, m, start, steps, rng.next_u64());
}

// Incremental walker that keeps only the current position, for tight loops.
// Free groups maintain the reduced word; lattices the coordinate vector.
class Walker {
public:
    Walker(const GroupSpec& g, const StepMeasure& m)
        : group_(g), measure_(&m), pos_(identity(g)),
          letters_only_(true) {
        for (auto& [x, p] : m.atoms()) {
            if (!(x.data.empty() || m.letter_of(x) != 0)) {
                letters_only_ = false;
                break;
            }
        }
    }

    void reset() { pos_ = identity(group_); }

    void step(Rng& rng) {
        if (letters_only_) {
            int32_t l = measure_->sample_letter(rng);
            if (l != 0) mul_gen_inplace(group_, pos_, l);
        } else {
            pos_ = mul(group_, pos_, measure_->sample(rng));
        }
    }

    const Element& position() const { return pos_; }
    uint32_t length() const { return word_length(group_, pos_); }
    // first letter of the reduced word (free groups; 0 at identity)
    int32_t first_letter() const {
        return pos_.data.empty() ? 0 : pos_.data[0];
    }

private:
    GroupSpec group_;
    const StepMeasure* measure_;
    Element pos_;
    bool letters_only_;
};

// ---------------------------------------------------------------------------
// measure profiles

// The deterministic oracles cover the measure catalog: uniform generator
// steps (plus optional laziness) on free groups, nearest-neighbor steps on Z,
// uniform nearest-neighbor steps on Z^3.  Anything else falls back to Monte
// Carlo or is refused, since transience cannot be certified generically.
struct MeasureProfile {
    enum class Kind { free_uniform, z_nearest, z3_uniform, other };
    Kind kind = Kind::other;
    double alpha = 0.0;  // mass held at the identity
    double p_up = 0.5;   // Z only: P[+1] within the moving part
};

inline MeasureProfile profile_measure(const GroupSpec& g,
                                      const StepMeasure& m) {
    MeasureProfile out;
    if (!(g == m.group()))
        throw std::invalid_argument("measure lives on a different group");
    double alpha = m.mass_of(identity(g));
    double move = 1.0 - alpha;
    if (move <= 0.0) return out;
    if (g.kind == GroupKind::Free) {
        uint32_t k = g.param;
        double want = move / (2.0 * k);
        size_t seen = 0;
        for (auto& [x, p] : m.atoms()) {
            if (x.data.empty()) continue;
            if (x.data.size() != 1 || std::abs(p - want) > 1e-12) return out;
            ++seen;
        }
        if (seen != 2 * k) return out;
        out.kind = MeasureProfile::Kind::free_uniform;
        out.alpha = alpha;
        return out;
    }
    if (g.kind == GroupKind::Lattice && g.param == 1) {
        double up = 0.0, down = 0.0;
        for (auto& [x, p] : m.atoms()) {
            if (x.data[0] == 0) continue;
            if (x.data[0] == 1) up = p;
            else if (x.data[0] == -1) down = p;
            else return out;
        }
        if (std::abs(up + down - move) > 1e-12) return out;
        out.kind = MeasureProfile::Kind::z_nearest;
        out.alpha = alpha;
        out.p_up = up / move;
        return out;
    }
    if (g.kind == GroupKind::Lattice && g.param == 3) {
        double want = move / 6.0;
        size_t seen = 0;
        for (auto& [x, p] : m.atoms()) {
            int32_t s = 0;
            for (int32_t c : x.data) s += std::abs(c);
            if (s == 0) continue;
            if (s != 1 || std::abs(p - want) > 1e-12) return out;
            ++seen;
        }
        if (seen != 6) return out;
        out.kind = MeasureProfile::Kind::z3_uniform;
        out.alpha = alpha;
        return out;
    }
    return out;
}

inline bool profile_transient(const MeasureProfile& pr) {
    switch (pr.kind) {
        case MeasureProfile::Kind::free_uniform: return true;
        case MeasureProfile::Kind::z_nearest:
            return std::abs(pr.p_up - 0.5) > 1e-12;
        case MeasureProfile::Kind::z3_uniform: return true;
        default: return false;
    }
}

// ---------------------------------------------------------------------------
// Green oracle

enum class GreenMethod { closed_form, lattice_dp, fourier_integral, monte_carlo };

inline const char* method_name(GreenMethod m) {
    switch (m) {
        case GreenMethod::closed_form: return "closed-form";
        case GreenMethod::lattice_dp: return "lattice-dp";
        case GreenMethod::fourier_integral: return "fourier-integral";
        case GreenMethod::monte_carlo: return "monte-carlo";
    }
    return "?";
}

struct McParams {
    uint64_t trials = 100000;
    uint64_t horizon = 400;
    uint64_t seed = 1;
};

// Direct simulation estimate of the hitting probability F(x,y): the fraction
// of `trials` walks from x that visit y within `horizon` steps.  The finite
// horizon can only miss hits, so the estimate is downward-biased; binomial
// standard error attached.
inline Estimate monte_carlo_hitting(const GroupSpec& g, const StepMeasure& m,
                                    const Element& x, const Element& y,
                                    uint64_t trials, uint64_t horizon,
                                    Rng& rng) {
    if (trials < 1 || (horizon < 1 && !(x == y)))
        throw std::invalid_argument("monte_carlo_hitting needs trials, horizon >= 1");
    if (x == y) return Estimate(1.0, 0.0, trials, "mc-hitting", Bias::downward);
    uint64_t hits = 0;
    const uint64_t master = rng.next_u64();
    for (uint64_t t = 0; t < trials; ++t) {
        Rng stream(derive_stream(master, "mc-hit-trial", t));
        Element pos = x;
        for (uint64_t k = 0; k < horizon; ++k) {
            pos = mul(g, pos, m.sample(stream));
            if (pos == y) {
                ++hits;
                break;
            }
        }
    }
    double p = double(hits) / double(trials);
    double se = std::sqrt(std::max(p * (1.0 - p), 1.0 / double(trials)) /
                          double(trials));
    return Estimate(p, se, trials, "mc-hitting", Bias::downward);
}

class GreenOracle {
public:
    static GreenOracle make(const GroupSpec& g, const StepMeasure& m,
                            GreenMethod method, McParams mc = {}) {
        MeasureProfile pr = profile_measure(g, m);
        if (!profile_transient(pr))
            throw std::invalid_argument(
                "no transient catalog profile for this (group, measure); "
                "Green quantities diverge or are not certified");
        switch (method) {
            case GreenMethod::closed_form:
                if (!g.exact_green())
                    throw std::invalid_argument(
                        "closed form unavailable: group lacks exact Green data");
                if (pr.kind != MeasureProfile::Kind::free_uniform &&
                    pr.kind != MeasureProfile::Kind::z_nearest)
                    throw std::invalid_argument(
                        "closed form unavailable for this measure");
                break;
            case GreenMethod::lattice_dp:
            case GreenMethod::fourier_integral:
                if (pr.kind != MeasureProfile::Kind::z3_uniform)
                    throw std::invalid_argument(
                        "lattice oracles implemented for Z^3 uniform steps only");
                break;
            case GreenMethod::monte_carlo:
                break;
        }
        return GreenOracle(g, m, pr, method, mc);
    }

    const GroupSpec& group() const { return group_; }
    GreenMethod method() const { return method_; }
    const MeasureProfile& profile() const { return profile_; }

    // G(e,e): expected visits to the start, including the visit at time 0.
    Estimate green_at_origin() const {
        double hold = 1.0 / (1.0 - profile_.alpha);
        switch (method_) {
            case GreenMethod::closed_form:
                if (profile_.kind == MeasureProfile::Kind::free_uniform) {
                    double q = 2.0 * group_.param - 1.0;
                    return Estimate(hold * q / (q - 1.0), 0.0, 1, "closed-form");
                } else {
                    double drift = std::abs(2.0 * profile_.p_up - 1.0);
                    return Estimate(hold / drift, 0.0, 1, "closed-form");
                }
            case GreenMethod::lattice_dp: {
                auto v = z3_green(0, 0, 0);
                return Estimate(hold * v.value, hold * v.bound, 1, "lattice-dp");
            }
            case GreenMethod::fourier_integral: {
                double v = bessel_green_z3(0, 0, 0);
                return Estimate(hold * v, hold * kBesselGreenBound, 1,
                                "fourier-integral");
            }
            case GreenMethod::monte_carlo:
                return mc_green(identity(group_), identity(group_));
        }
        throw std::logic_error("unreachable");
    }

    // F(x,y): probability that a walk from x ever hits y.
    Estimate hitting_prob(const Element& x, const Element& y) const {
        if (x == y) return Estimate(1.0, 0.0, 1, method_name(method_));
        switch (method_) {
            case GreenMethod::closed_form:
                if (profile_.kind == MeasureProfile::Kind::free_uniform) {
                    double q = 2.0 * group_.param - 1.0;
                    uint32_t d = word_length(group_, mul(group_, inv(group_, x), y));
                    return Estimate(std::pow(q, -double(d)), 0.0, 1, "closed-form");
                } else {
                    int64_t mdist = int64_t(y.data[0]) - int64_t(x.data[0]);
                    double p = profile_.p_up, q = 1.0 - p;
                    bool with_drift = (p > q) == (mdist > 0);
                    if (with_drift) return Estimate(1.0, 0.0, 1, "closed-form");
                    double ratio = std::min(p, q) / std::max(p, q);
                    return Estimate(std::pow(ratio, double(std::llabs(mdist))),
                                    0.0, 1, "closed-form");
                }
            case GreenMethod::lattice_dp:
            case GreenMethod::fourier_integral: {
                auto gxy = lattice_green_between(x, y);
                auto g0 = lattice_green_between(identity(group_), identity(group_));
                double f = gxy.value / g0.value;
                double bound = (gxy.bound + f * g0.bound) / (g0.value - g0.bound);
                return Estimate(f, bound, 1, method_name(method_));
            }
            case GreenMethod::monte_carlo: {
                Rng rng(derive_stream(mc_.seed, "oracle-hit", ElementHash{}(x),
                                      ElementHash{}(y)));
                return monte_carlo_hitting(group_, measure_, x, y, mc_.trials,
                                           mc_.horizon, rng);
            }
        }
        throw std::logic_error("unreachable");
    }

    // G(x,y): expected visits to y from x.
    Estimate green_function(const Element& x, const Element& y) const {
        switch (method_) {
            case GreenMethod::closed_form: {
                Estimate f = hitting_prob(x, y);
                Estimate g0 = green_at_origin();
                return Estimate(g0.value * f.value, 0.0, 1, "closed-form");
            }
            case GreenMethod::lattice_dp:
            case GreenMethod::fourier_integral: {
                auto v = lattice_green_between(x, y);
                double hold = 1.0 / (1.0 - profile_.alpha);
                return Estimate(hold * v.value, hold * v.bound, 1,
                                method_name(method_));
            }
            case GreenMethod::monte_carlo:
                return mc_green(x, y);
        }
        throw std::logic_error("unreachable");
    }

    // d_G(x,y) = −ln F(x,y); quasi-metric when the measure is asymmetric
    // (directed value; see green_distance_sym for the symmetrized diagnostic).
    // Closed forms are evaluated in log space so large distances don't
    // underflow through F.
    double green_distance(const Element& x, const Element& y) const {
        if (x == y) return 0.0;
        if (method_ == GreenMethod::closed_form) {
            if (profile_.kind == MeasureProfile::Kind::free_uniform) {
                double q = 2.0 * group_.param - 1.0;
                uint32_t d = word_length(group_, mul(group_, inv(group_, x), y));
                return double(d) * std::log(q);
            }
            int64_t mdist = int64_t(y.data[0]) - int64_t(x.data[0]);
            double p = profile_.p_up, q = 1.0 - p;
            if ((p > q) == (mdist > 0)) return 0.0;
            return double(std::llabs(mdist)) *
                   std::log(std::max(p, q) / std::min(p, q));
        }
        double f = hitting_prob(x, y).value;
        if (!(f > 0.0))
            throw std::domain_error("hitting probability 0: distance infinite");
        return std::max(0.0, -std::log(f));
    }

    double green_distance_sym(const Element& x, const Element& y) const {
        return std::max(green_distance(x, y), green_distance(y, x));
    }

private:
    GreenOracle(const GroupSpec& g, StepMeasure m, MeasureProfile pr,
                GreenMethod method, McParams mc)
        : group_(g), measure_(std::move(m)), profile_(pr), method_(method),
          mc_(mc) {}

    BoundedValue lattice_green_between(const Element& x, const Element& y) const {
        int64_t a = int64_t(y.data[0]) - int64_t(x.data[0]);
        int64_t b = int64_t(y.data[1]) - int64_t(x.data[1]);
        int64_t c = int64_t(y.data[2]) - int64_t(x.data[2]);
        if (method_ == GreenMethod::fourier_integral) {
            if (a * a + b * b + c * c > 2500)
                throw std::invalid_argument(
                    "fourier oracle capped at |x| <= 50 (cost grows like r^4); "
                    "use lattice_dp");
            return {bessel_green_z3(a, b, c), kBesselGreenBound};
        }
        return z3_green(a, b, c);
    }

    Estimate mc_green(const Element& x, const Element& y) const {
        const uint64_t master = derive_stream(mc_.seed, "oracle-green",
                                              ElementHash{}(x), ElementHash{}(y));
        double sum = 0.0, sumsq = 0.0;
        for (uint64_t t = 0; t < mc_.trials; ++t) {
            Rng stream(derive_stream(master, "mc-green-trial", t));
            Element pos = x;
            uint64_t visits = (pos == y) ? 1 : 0;
            for (uint64_t k = 0; k < mc_.horizon; ++k) {
                pos = mul(group_, pos, measure_.sample(stream));
                if (pos == y) ++visits;
            }
            sum += double(visits);
            sumsq += double(visits) * double(visits);
        }
        double n = double(mc_.trials);
        double mean = sum / n;
        double var = std::max(0.0, sumsq / n - mean * mean);
        return Estimate(mean, std::sqrt(var / n), mc_.trials, "mc-green",
                        Bias::downward);
    }

    GroupSpec group_;
    StepMeasure measure_;
    MeasureProfile profile_;
    GreenMethod method_;
    McParams mc_;
};

// free-function forms matching the operation names
inline Estimate hitting_prob(const GreenOracle& o, const Element& x,
                             const Element& y) {
    return o.hitting_prob(x, y);
}
inline Estimate green_function(const GreenOracle& o, const Element& x,
                               const Element& y) {
    return o.green_function(x, y);
}
inline double green_distance(const GreenOracle& o, const Element& x,
                             const Element& y) {
    return o.green_distance(x, y);
}

// ---------------------------------------------------------------------------
// Green-ball volumes

struct BallCount {
    uint64_t lower = 0;
    uint64_t upper = 0;
    bool exact = false;
};

// Count of {x : d_G(e,x) <= R}.  Exact on free groups with the closed form
// (the Green metric is word length times ln(2k−1)); on Z^3 each lattice point
// is classified by interval arithmetic against the threshold
// G(0,x) >= G(0,0)·e^{−R}, giving a certified [lower, upper] bracket.
inline BallCount green_ball_count(const GreenOracle& o, double R,
                                  uint64_t search_cap = 10'000'000) {
    if (R < 0.0) throw std::invalid_argument("negative radius");
    const GroupSpec& g = o.group();
    if (g.kind == GroupKind::Free &&
        o.method() == GreenMethod::closed_form) {
        double base = std::log(2.0 * g.param - 1.0);
        uint64_t r = uint64_t((R + 1e-12) / base);
        // |B_w(r)| = 1 + 2k((2k−1)^r − 1)/(2k−2)
        double q = 2.0 * g.param - 1.0;
        double count = 1.0 + 2.0 * g.param * (std::pow(q, double(r)) - 1.0) /
                                 (q - 1.0);
        if (count > double(search_cap))
            throw std::length_error("ball count beyond search cap");
        uint64_t c = uint64_t(std::llround(count));
        return {c, c, true};
    }
    if (g.kind == GroupKind::Lattice && g.param == 3) {
        Estimate g0 = o.green_at_origin();
        double hold = 1.0 / (1.0 - o.profile().alpha);
        // threshold on the unlazified G (laziness cancels in the F ratio)
        double t_mid = (g0.value / hold) * std::exp(-R);
        double t_rad = (g0.sigma / hold) * std::exp(-R);
        double t_lo = t_mid - t_rad, t_hi = t_mid + t_rad;
        // outer radius: above it even the inflated asymptotic is below t_lo
        double rmax = (3.0 / (2.0 * M_PI)) * 1.01 / t_lo;
        int lim = int(std::ceil(rmax));
        double pts = std::pow(2.0 * lim + 1.0, 3.0);
        if (pts > double(search_cap))
            throw std::length_error("ball count beyond search cap");
        uint64_t lower = 0, upper = 0;
        for (int x = -lim; x <= lim; ++x)
            for (int y = -lim; y <= lim; ++y)
                for (int z = -lim; z <= lim; ++z) {
                    if (double(x) * x + double(y) * y + double(z) * z >
                        rmax * rmax)
                        continue;
                    BoundedValue v = (x == 0 && y == 0 && z == 0)
                                         ? BoundedValue{t_hi + 1.0, 0.0}
                                         : z3_green(x, y, z);
                    if (v.value - v.bound >= t_hi) ++lower;
                    if (v.value + v.bound >= t_lo) ++upper;
                }
        return {lower, upper, false};
    }
    throw std::invalid_argument("green_ball_count: no enumeration strategy "
                                "for this oracle");
}

// Least-squares slope of ln(count) against R over the largest radii (top
// half of the points, at least 3).  The result is a finite-radius estimate
// of the exponential growth rate, i.e. a proxy for the limsup.
inline double log_volume_growth(std::vector<std::pair<double, double>> counts) {
    if (counts.size() < 3)
        throw std::invalid_argument("log_volume_growth needs >= 3 radii");
    std::sort(counts.begin(), counts.end());
    size_t keep = std::max<size_t>(3, counts.size() / 2);
    std::vector<double> xs, ys;
    for (size_t i = counts.size() - keep; i < counts.size(); ++i) {
        if (counts[i].second <= 0.0)
            throw std::invalid_argument("nonpositive count");
        xs.push_back(counts[i].first);
        ys.push_back(std::log(counts[i].second));
    }
    if (xs.front() == xs.back()) return 0.0;
    return fit_linear(xs, ys).first;
}

// Sound slope bracket from per-radius count intervals: the least-squares
// slope is monotone in each ln-count with sign equal to the centered-radius
// weight, so the extreme slopes are attained at the interval corners.
inline std::pair<double, double> log_volume_growth_bracket(
    std::vector<std::tuple<double, double, double>> counts) {
    if (counts.size() < 3)
        throw std::invalid_argument("bracket needs >= 3 radii");
    std::sort(counts.begin(), counts.end());
    size_t keep = std::max<size_t>(3, counts.size() / 2);
    std::vector<std::tuple<double, double, double>> tail(
        counts.end() - keep, counts.end());
    double xbar = 0.0;
    for (auto& [R, lo, hi] : tail) xbar += R;
    xbar /= double(tail.size());
    std::vector<double> xs, ylo, yhi;
    for (auto& [R, lo, hi] : tail) {
        if (lo <= 0.0) throw std::invalid_argument("nonpositive lower count");
        xs.push_back(R);
        double w = R - xbar;
        // minimal slope: small counts at large R, large counts at small R
        ylo.push_back(std::log(w > 0 ? lo : hi));
        yhi.push_back(std::log(w > 0 ? hi : lo));
    }
    return {fit_linear(xs, ylo).first, fit_linear(xs, yhi).first};
}

// ---------------------------------------------------------------------------
// heat kernel

struct HeatKernelReport {
    std::vector<std::pair<int, double>> values;  // (k, P[Z_k = e]), exact
    double slope = 0.0;   // log-log fit over the top decade of k
    double c_fit = 0.0;   // minimal C with P[Z_k = e] <= C·k^{slope_model}
    double slope_model = 0.0;  // −d/2 for the lattice dimension
};

// Exact return probabilities for nearest-neighbor (possibly lazy) walks on
// Z^d, d ∈ {1,2,3}, by dynamic programming sized so no contributing path is
// truncated.  Reports the fitted log-log decay slope and the smallest
// constant making P[Z_k = e] <= C·k^{−d/2} over k >= 1.
inline HeatKernelReport heat_kernel_decay(const GroupSpec& g,
                                          const StepMeasure& m, int k_max) {
    if (g.kind != GroupKind::Lattice)
        throw std::invalid_argument("heat_kernel_decay needs a lattice group");
    if (k_max < 1) throw std::invalid_argument("k_max >= 1 required");
    MeasureProfile pr = profile_measure(g, m);
    std::vector<double> probs;
    if (g.param == 1 && pr.kind == MeasureProfile::Kind::z_nearest) {
        if (k_max > 100000) throw std::length_error("k_max beyond DP budget");
        double move = 1.0 - pr.alpha;
        probs = z1_return_probabilities(k_max, move * pr.p_up,
                                        move * (1.0 - pr.p_up));
    } else if (g.param == 3 && pr.kind == MeasureProfile::Kind::z3_uniform) {
        if (pr.alpha != 0.0)
            throw std::invalid_argument("Z^3 heat-kernel DP covers the pure "
                                        "uniform step law");
        probs = z3_return_probabilities(k_max);
    } else {
        throw std::invalid_argument(
            "heat-kernel DP implemented for nearest-neighbor laws on Z and "
            "the uniform law on Z^3");
    }
    HeatKernelReport rep;
    rep.slope_model = -double(g.param) / 2.0;
    for (int k = 0; k <= k_max; ++k) rep.values.emplace_back(k, probs[k]);
    std::vector<double> xs, ys;
    double cmax = 0.0;
    for (int k = 1; k <= k_max; ++k) {
        if (probs[k] <= 0.0) continue;
        cmax = std::max(cmax,
                        probs[k] * std::pow(double(k), double(g.param) / 2.0));
        if (k >= std::max(2, k_max / 10)) {
            xs.push_back(std::log(double(k)));
            ys.push_back(std::log(probs[k]));
        }
    }
    if (xs.size() >= 3) rep.slope = fit_linear(xs, ys).first;
    rep.c_fit = cmax;
    return rep;
}

}  // namespace gwalk
