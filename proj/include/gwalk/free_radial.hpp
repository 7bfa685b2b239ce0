#pragma once

#include "gwalk/group.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace gwalk {

// Exact distributions of SRW convolution powers on a free group, exploiting
// that mu^n is constant on word-metric spheres. The word length |Z_n| is a
// birth-death chain (up with probability (2k-1)/2k away from 0, always up at
// 0), so the full radial law at every n costs O(n^2) instead of materializing
// exponentially many atoms. Masses here track the radius chain: row n maps
// radius m to P[|Z_n| = m]; dividing by the sphere size gives mu^n(x).
class FreeRadial {
public:
    FreeRadial(int k, int n_max) : k_(k), n_max_(n_max) {
        if (k < 2) throw std::invalid_argument("free rank must be >= 2");
        int cols = n_max + 1;
        log_sphere_.resize(cols);
        log_sphere_[0] = 0.0;
        double q = 2.0 * k, qm = q - 1.0;
        for (int m = 1; m < cols; ++m)
            log_sphere_[m] = std::log(q) + (m - 1) * std::log(qm);
        double up = qm / q;
        rows_.assign(n_max + 1, std::vector<double>(cols, 0.0));
        rows_[0][0] = 1.0;
        for (int n = 1; n <= n_max; ++n) {
            const auto& prev = rows_[n - 1];
            auto& cur = rows_[n];
            cur[1] += prev[0];
            for (int m = 1; m < cols; ++m) {
                if (prev[m] == 0.0) continue;
                if (m + 1 < cols) cur[m + 1] += prev[m] * up;
                cur[m - 1] += prev[m] * (1.0 - up);
            }
        }
    }

    int rank() const { return k_; }
    int n_max() const { return n_max_; }

    // P[|Z_n| = m]
    double radius_mass(int n, int m) const {
        if (n < 0 || n > n_max_ || m < 0 || m > n_max_) return 0.0;
        return rows_[n][m];
    }

    double log_sphere_size(int m) const { return log_sphere_[m]; }

    // ln mu^n(x) for |x| = m; -inf when the radius is unreachable at time n
    double log_point_mass(int n, int m) const {
        double r = radius_mass(n, m);
        if (r <= 0.0) return -std::numeric_limits<double>::infinity();
        return std::log(r) - log_sphere_[m];
    }

    // H(mu^n), exactly
    double entropy(int n) const {
        const auto& row = rows_.at(n);
        double s = 0.0, comp = 0.0;
        for (int m = 0; m <= n_max_; ++m) {
            if (row[m] <= 0.0) continue;
            double term = row[m] * (log_sphere_[m] - std::log(row[m]));
            double y = term - comp, t = s + y;
            comp = (t - s) - y;
            s = t;
        }
        return s;
    }

    double mean_radius(int n) const {
        const auto& row = rows_.at(n);
        double s = 0.0;
        for (int m = 0; m <= n_max_; ++m) s += m * row[m];
        return s;
    }

private:
    int k_;
    int n_max_;
    std::vector<double> log_sphere_;
    std::vector<std::vector<double>> rows_;
};

} // namespace gwalk
