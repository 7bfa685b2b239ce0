#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gwalk {

// A single scalar estimate with an attached error model.  `sigma` is one
// standard error for Monte Carlo methods and a certified absolute bound for
// deterministic ones (sigma = 0 means exact).  `bias` records one-sidedness:
// a "downward" estimate can only be below the true value (e.g. a hitting
// probability truncated at a finite horizon).
enum class Bias { two_sided, downward, upward };

struct Estimate {
    double value = 0.0;
    double sigma = 0.0;
    uint64_t n_samples = 0;
    std::string method;
    Bias bias = Bias::two_sided;

    Estimate() = default;
    Estimate(double v, double s, uint64_t n, std::string meth,
             Bias b = Bias::two_sided)
        : value(v), sigma(s), n_samples(n), method(std::move(meth)), bias(b) {
        if (!(sigma >= 0.0)) throw std::invalid_argument("negative sigma");
        if (method.rfind("mc", 0) == 0 && n_samples < 1)
            throw std::invalid_argument("Monte Carlo estimate without samples");
    }
};

// An estimate of a limit of a sequence.  `per_n` keeps the actual tail of the
// sequence that was extrapolated, so monotonicity and sandwich claims stay
// testable after the fact.  The reported `uncertainty` always covers the
// distance from the extrapolated value to the convex hull of the tail values,
// so extrapolated ∈ [min(tail), max(tail)] ± uncertainty by construction.
struct LimitEstimate {
    std::vector<std::pair<int, double>> per_n;
    double extrapolated = 0.0;
    std::string extrapolation_method;
    double uncertainty = 0.0;

    double hull_gap() const {
        if (per_n.empty()) return 0.0;
        double lo = per_n.front().second, hi = lo;
        for (auto& [n, v] : per_n) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (extrapolated < lo) return lo - extrapolated;
        if (extrapolated > hi) return extrapolated - hi;
        return 0.0;
    }
    bool hull_ok() const { return hull_gap() <= uncertainty + 1e-12; }

    Estimate as_estimate(uint64_t n_samples = 1) const {
        return Estimate(extrapolated, uncertainty, n_samples,
                        extrapolation_method);
    }
};

// ---------------------------------------------------------------------------
// small least-squares kernels

// Ordinary least squares y ≈ a·x + b.  Returns {a, b}.
inline std::pair<double, double> fit_linear(const std::vector<double>& xs,
                                            const std::vector<double>& ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("fit_linear needs >= 2 points");
    double n = double(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-300) throw std::invalid_argument("degenerate fit_linear");
    double a = (n * sxy - sx * sy) / det;
    double b = (sy - a * sx) / n;
    return {a, b};
}

// Solve a symmetric positive 3x3 system by Gaussian elimination with partial
// pivoting; used for the 3-parameter entropy tail model below.
inline void solve3(double A[3][3], double b[3], double out[3]) {
    int idx[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(A[idx[r]][col]) > std::abs(A[idx[piv]][col])) piv = r;
        std::swap(idx[col], idx[piv]);
        double d = A[idx[col]][col];
        if (std::abs(d) < 1e-300) throw std::invalid_argument("singular 3x3 system");
        for (int r = col + 1; r < 3; ++r) {
            double f = A[idx[r]][col] / d;
            for (int c = col; c < 3; ++c) A[idx[r]][c] -= f * A[idx[col]][c];
            b[idx[r]] -= f * b[idx[col]];
        }
    }
    for (int col = 2; col >= 0; --col) {
        double s = b[idx[col]];
        for (int c = col + 1; c < 3; ++c) s -= A[idx[col]][c] * out[c];
        out[col] = s / A[idx[col]][col];
    }
}

// Tail model for cumulative entropy ladders: H(n) ≈ h·n + α·ln(n − 1/2) + c.
// The half-shift centers the logarithmic correction between increments; the
// linear coefficient h is the extrapolated limit of H(n+1) − H(n).  Fitted by
// least squares over the supplied (n, H(n)) grid.  Returns h.
inline double fit_entropy_tail(const std::vector<std::pair<int, double>>& ladder) {
    if (ladder.size() < 3)
        throw std::invalid_argument("fit_entropy_tail needs >= 3 points");
    double A[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double rhs[3] = {0, 0, 0};
    for (auto& [n, H] : ladder) {
        if (n < 2) throw std::invalid_argument("fit_entropy_tail needs n >= 2");
        double row[3] = {double(n), std::log(n - 0.5), 1.0};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) A[i][j] += row[i] * row[j];
            rhs[i] += row[i] * H;
        }
    }
    double sol[3];
    solve3(A, rhs, sol);
    return sol[0];
}

// Independent cross-extrapolator: model the entropy increments
// d_m = H(m) − H(m−1) as h + C·(m − 1/2)^{−β} and fit (h, C, β) through the
// last three increments.  β is found by bisection on the increment-ratio
// equation.  Returns nullopt when the increments are not strictly decreasing
// or no β in (0.05, 6) matches, in which case the caller should fall back to
// the last increment.
inline std::optional<double>
fit_increment_power(const std::vector<std::pair<int, double>>& ladder) {
    size_t s = ladder.size();
    if (s < 4) return std::nullopt;
    auto H = [&](size_t i) { return ladder[i].second; };
    double i0 = H(s - 3) - H(s - 4);
    double i1 = H(s - 2) - H(s - 3);
    double i2 = H(s - 1) - H(s - 2);
    double m0 = ladder[s - 3].first - 0.5;
    double m1 = ladder[s - 2].first - 0.5;
    double m2 = ladder[s - 1].first - 0.5;
    if (!(i0 > i1 && i1 > i2)) return std::nullopt;
    double target = (i2 - i1) / (i1 - i0);
    auto f = [&](double beta) {
        double p0 = std::pow(m0, -beta), p1 = std::pow(m1, -beta),
               p2 = std::pow(m2, -beta);
        return target - (p2 - p1) / (p1 - p0);
    };
    double lo = 0.05, hi = 6.0;
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) hi = lo;
    else if (fhi == 0.0) lo = hi;
    else if ((flo > 0) == (fhi > 0)) return std::nullopt;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) { lo = hi = mid; break; }
        if ((fm > 0) == (flo > 0)) lo = mid, flo = fm;
        else hi = mid;
    }
    double beta = 0.5 * (lo + hi);
    double C = (i2 - i1) / (std::pow(m2, -beta) - std::pow(m1, -beta));
    return i2 - C * std::pow(m2, -beta);
}

// Speed tail model value(n) = ℓ + c/n fitted over the given points (callers
// pass the top decade of n).  Returns {ℓ, c}.
inline std::pair<double, double>
fit_speed_tail(const std::vector<std::pair<int, double>>& tail) {
    std::vector<double> xs, ys;
    xs.reserve(tail.size());
    ys.reserve(tail.size());
    for (auto& [n, v] : tail) {
        xs.push_back(1.0 / double(n));
        ys.push_back(v);
    }
    auto [c, ell] = fit_linear(xs, ys);
    return {ell, c};
}

// Assemble a LimitEstimate from a cumulative entropy ladder (n, H(n)).
// Primary extrapolation: the 3-parameter tail model above over n ≥ 3;
// the per_n tail stored is the increment sequence (what actually converges to
// the limit).  Uncertainty = |primary − power-law cross-fit| + hull gap
// + extra (caller-supplied Monte Carlo noise / bias allowance).
inline LimitEstimate
extrapolate_entropy(const std::vector<std::pair<int, double>>& ladder,
                    double extra_uncertainty = 0.0) {
    if (ladder.size() < 4)
        throw std::invalid_argument("entropy ladder too short to extrapolate");
    std::vector<std::pair<int, double>> grid;
    for (auto& [n, H] : ladder)
        if (n >= 3) grid.emplace_back(n, H);
    LimitEstimate out;
    for (size_t i = 1; i < ladder.size(); ++i) {
        if (ladder[i].first != ladder[i - 1].first + 1) continue;
        out.per_n.emplace_back(ladder[i].first,
                               ladder[i].second - ladder[i - 1].second);
    }
    if (grid.size() >= 3) {
        out.extrapolated = fit_entropy_tail(grid);
        out.extrapolation_method = "entropy-tail-lsq";
    } else {
        out.extrapolated = out.per_n.back().second;
        out.extrapolation_method = "last-increment";
    }
    double cross = fit_increment_power(ladder).value_or(out.per_n.back().second);
    out.uncertainty = std::abs(out.extrapolated - cross) + extra_uncertainty;
    out.uncertainty = std::max(out.uncertainty, out.hull_gap());
    return out;
}

}  // namespace gwalk
