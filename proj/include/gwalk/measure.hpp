#pragma once

#include "gwalk/group.hpp"
#include "gwalk/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace gwalk {

struct PruneInfo {
    double delta = 0.0;          // total discarded mass
    size_t dropped_atoms = 0;
    // Upper bound on the entropy contribution of the discarded atoms: among
    // nonnegative masses summing to delta spread over n atoms, -sum p ln p is
    // maximal for the uniform split, giving delta*(ln n - ln delta).
    double entropy_error_bound() const {
        if (delta <= 0.0) return 0.0;
        double n = static_cast<double>(std::max<size_t>(dropped_atoms, 1));
        return delta * (std::log(n) - std::log(delta));
    }
};

struct MeasureLimits {
    size_t budget_atoms = 20'000'000;
    double prune_eps = 1e-15;
    bool allow_prune = true;
};

// Finitely supported probability measure on a catalog group. Atoms are kept
// sorted by element so that equality, serialization, and accumulation order
// are all deterministic.
class StepMeasure {
public:
    StepMeasure(GroupSpec g, std::vector<std::pair<Element, double>> atoms,
                PruneInfo prune = {})
        : group_(g), atoms_(std::move(atoms)), prune_(prune) {
        std::sort(atoms_.begin(), atoms_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        size_t w = 0;
        for (size_t i = 0; i < atoms_.size(); ++i) {
            if (w > 0 && atoms_[w - 1].first == atoms_[i].first) {
                atoms_[w - 1].second += atoms_[i].second;
            } else {
                if (w != i) atoms_[w] = std::move(atoms_[i]);
                ++w;
            }
        }
        atoms_.resize(w);
        double mass = 0.0, comp = 0.0;
        for (auto& [el, p] : atoms_) {
            if (p < 0.0) throw std::invalid_argument("negative atom mass");
            double y = p - comp, t = mass + y;
            comp = (t - mass) - y;
            mass = t;
        }
        std::erase_if(atoms_, [](const auto& a) { return a.second == 0.0; });
        if (std::abs(mass + prune_.delta - 1.0) > 1e-12)
            throw std::invalid_argument("atom masses sum to " + std::to_string(mass) +
                                        ", not 1");
        cum_.reserve(atoms_.size());
        double c = 0.0;
        for (auto& [el, p] : atoms_) {
            c += p;
            cum_.push_back(c);
        }
        if (!cum_.empty()) cum_.back() = std::max(cum_.back(), mass);
    }

    const GroupSpec& group() const { return group_; }
    const std::vector<std::pair<Element, double>>& atoms() const { return atoms_; }
    const PruneInfo& prune() const { return prune_; }
    size_t support_size() const { return atoms_.size(); }

    double mass_of(const Element& x) const {
        auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                                   [](const auto& a, const Element& e) { return a.first < e; });
        if (it != atoms_.end() && it->first == x) return it->second;
        return 0.0;
    }

    bool operator==(const StepMeasure& o) const {
        return group_ == o.group_ && atoms_ == o.atoms_;
    }

    Element sample(Rng& rng) const {
        double u = rng.uniform() * cum_.back();
        size_t i = std::lower_bound(cum_.begin(), cum_.end(), u) - cum_.begin();
        if (i >= atoms_.size()) i = atoms_.size() - 1;
        return atoms_[i].first;
    }

    // signed-letter form of sample for tight walk loops; only meaningful when
    // every atom is a single generator step
    int32_t sample_letter(Rng& rng) const {
        double u = rng.uniform() * cum_.back();
        size_t i = std::lower_bound(cum_.begin(), cum_.end(), u) - cum_.begin();
        if (i >= atoms_.size()) i = atoms_.size() - 1;
        return letter_of(atoms_[i].first);
    }

    int32_t letter_of(const Element& e) const {
        if (group_.kind == GroupKind::Free) {
            if (e.data.size() != 1) return 0;
            return e.data[0];
        }
        int32_t letter = 0;
        for (size_t i = 0; i < e.data.size(); ++i) {
            if (e.data[i] == 0) continue;
            if (letter != 0 || std::abs(static_cast<long>(e.data[i])) != 1) return 0;
            letter = e.data[i] > 0 ? static_cast<int32_t>(i + 1)
                                   : -static_cast<int32_t>(i + 1);
        }
        return letter;
    }

private:
    GroupSpec group_;
    std::vector<std::pair<Element, double>> atoms_;
    std::vector<double> cum_;
    PruneInfo prune_;
};

inline double entropy(const StepMeasure& m) {
    double s = 0.0, comp = 0.0;
    for (auto& [el, p] : m.atoms()) {
        double term = -p * std::log(p);
        double y = term - comp, t = s + y;
        comp = (t - s) - y;
        s = t;
    }
    return s;
}

inline StepMeasure dirac(const GroupSpec& g, const Element& x) {
    return StepMeasure(g, {{x, 1.0}});
}

inline StepMeasure convolve(const StepMeasure& m1, const StepMeasure& m2,
                            const MeasureLimits& limits = {}) {
    if (!(m1.group() == m2.group()))
        throw std::invalid_argument("convolve: group mismatch");
    const GroupSpec& g = m1.group();
    std::unordered_map<Element, double, ElementHash> acc;
    acc.reserve(m1.support_size() * 2);
    for (auto& [x, p] : m1.atoms()) {
        for (auto& [y, q] : m2.atoms()) {
            acc[mul(g, x, y)] += p * q;
        }
    }
    PruneInfo prune = m1.prune();
    prune.delta += m2.prune().delta;
    prune.dropped_atoms += m2.prune().dropped_atoms;
    if (acc.size() > limits.budget_atoms) {
        if (!limits.allow_prune)
            throw std::length_error("convolution support " + std::to_string(acc.size()) +
                                    " exceeds budget with pruning disabled");
        for (auto it = acc.begin(); it != acc.end();) {
            if (it->second < limits.prune_eps) {
                prune.delta += it->second;
                prune.dropped_atoms += 1;
                it = acc.erase(it);
            } else {
                ++it;
            }
        }
        if (acc.size() > limits.budget_atoms)
            throw std::length_error("convolution support " + std::to_string(acc.size()) +
                                    " exceeds budget even after pruning");
    }
    std::vector<std::pair<Element, double>> atoms(acc.begin(), acc.end());
    return StepMeasure(g, std::move(atoms), prune);
}

// mu^n by iterated single-step convolution; visit(k, mu^k) sees every
// intermediate power (the increment estimators need the full sequence).
inline StepMeasure convolution_power(
    const StepMeasure& m, int n, const MeasureLimits& limits = {},
    const std::function<void(int, const StepMeasure&)>& visit = nullptr) {
    if (n < 1) throw std::invalid_argument("convolution power needs n >= 1");
    StepMeasure acc = m;
    if (visit) visit(1, acc);
    for (int k = 2; k <= n; ++k) {
        acc = convolve(acc, m, limits);
        if (visit) visit(k, acc);
    }
    return acc;
}

inline StepMeasure reversed(const StepMeasure& m) {
    std::vector<std::pair<Element, double>> atoms;
    atoms.reserve(m.support_size());
    for (auto& [x, p] : m.atoms()) atoms.emplace_back(inv(m.group(), x), p);
    return StepMeasure(m.group(), std::move(atoms), m.prune());
}

using MetricFn = std::function<double(const Element&)>;

inline double first_moment(const StepMeasure& m, const MetricFn& metric) {
    double s = 0.0;
    for (auto& [x, p] : m.atoms()) s += p * metric(x);
    return s;
}

// --- catalog constructors ---

inline StepMeasure srw(const GroupSpec& g) {
    auto gens = generators(g);
    std::vector<std::pair<Element, double>> atoms;
    double p = 1.0 / static_cast<double>(gens.size());
    for (auto& s : gens) atoms.emplace_back(std::move(s), p);
    return StepMeasure(g, std::move(atoms));
}

inline StepMeasure biased_z(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("biased(p) needs 0 < p < 1");
    GroupSpec g = lattice(1);
    Element up = identity(g), down = identity(g);
    up.data[0] = 1;
    down.data[0] = -1;
    return StepMeasure(g, {{up, p}, {down, 1.0 - p}});
}

inline StepMeasure lazy(double alpha, const StepMeasure& base) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("lazy(alpha) needs 0 <= alpha < 1");
    std::vector<std::pair<Element, double>> atoms;
    atoms.emplace_back(identity(base.group()), alpha);
    for (auto& [x, p] : base.atoms()) atoms.emplace_back(x, (1.0 - alpha) * p);
    return StepMeasure(base.group(), std::move(atoms));
}

// "srw" | "biased(p)" | "lazy(alpha, inner)"
inline StepMeasure parse_measure(const GroupSpec& g, const std::string& spec) {
    auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t");
        size_t b = s.find_last_not_of(" \t");
        if (a == std::string::npos) return std::string{};
        return s.substr(a, b - a + 1);
    };
    std::string s = trim(spec);
    if (s == "srw") return srw(g);
    if (s.rfind("biased(", 0) == 0 && s.back() == ')') {
        if (!(g.kind == GroupKind::Lattice && g.param == 1))
            throw std::invalid_argument("biased(p) is defined on Z^1 only");
        return biased_z(std::stod(s.substr(7, s.size() - 8)));
    }
    if (s.rfind("lazy(", 0) == 0 && s.back() == ')') {
        std::string inner = s.substr(5, s.size() - 6);
        size_t comma = inner.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("lazy(alpha, base): missing base: " + spec);
        double alpha = std::stod(trim(inner.substr(0, comma)));
        return lazy(alpha, parse_measure(g, trim(inner.substr(comma + 1))));
    }
    throw std::invalid_argument("unknown measure constructor: " + spec);
}

// --- serialization: one "element<TAB>mass" line per atom ---

inline void serialize_measure(const StepMeasure& m, std::ostream& out) {
    char buf[64];
    for (auto& [x, p] : m.atoms()) {
        std::snprintf(buf, sizeof buf, "%.17g", p);
        out << format_element(m.group(), x) << '\t' << buf << '\n';
    }
}

inline StepMeasure deserialize_measure(const GroupSpec& g, std::istream& in) {
    std::vector<std::pair<Element, double>> atoms;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        size_t tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::invalid_argument("bad measure line: " + line);
        atoms.emplace_back(parse_element(g, line.substr(0, tab)),
                           std::stod(line.substr(tab + 1)));
    }
    return StepMeasure(g, std::move(atoms));
}

} // namespace gwalk
