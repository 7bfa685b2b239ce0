#pragma once

#include <cstdint>
#include <cstdlib>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

namespace gwalk {

enum class GroupKind : uint8_t { Lattice, Free };

enum class GrowthClass : uint8_t { Polynomial, Superpolynomial };

// A catalog group: Z^d with the standard generators, or the free group F_k
// with its k free generators and their inverses.
struct GroupSpec {
    GroupKind kind;
    int param; // d for Lattice, k for Free

    bool exact_green() const {
        // closed-form F is available for free-group SRW and for biased Z;
        // symmetric Z^d relies on numerical oracles
        return kind == GroupKind::Free || (kind == GroupKind::Lattice && param == 1);
    }
    bool boundary_model() const { return kind == GroupKind::Free; }
    GrowthClass growth() const {
        return kind == GroupKind::Lattice ? GrowthClass::Polynomial
                                          : GrowthClass::Superpolynomial;
    }
    // polynomial growth degree; only meaningful for lattices
    int poly_degree() const { return kind == GroupKind::Lattice ? param : -1; }
    uint32_t id() const {
        return (static_cast<uint32_t>(kind) << 16) | static_cast<uint32_t>(param);
    }
    int generator_count() const { return 2 * param; }

    bool operator==(const GroupSpec&) const = default;

    std::string name() const {
        if (kind == GroupKind::Lattice) return "Z^" + std::to_string(param);
        return "F_" + std::to_string(param);
    }
};

inline GroupSpec lattice(int d) {
    if (d < 1) throw std::invalid_argument("lattice dimension must be >= 1");
    return {GroupKind::Lattice, d};
}

inline GroupSpec free_group(int k) {
    if (k < 2) throw std::invalid_argument("free rank must be >= 2");
    return {GroupKind::Free, k};
}

// "Z^3" or "F_2"
inline GroupSpec parse_group(const std::string& s) {
    auto num = [&](size_t off) {
        if (off >= s.size()) throw std::invalid_argument("bad group string: " + s);
        char* end = nullptr;
        long v = std::strtol(s.c_str() + off, &end, 10);
        if (end != s.c_str() + s.size())
            throw std::invalid_argument("bad group string: " + s);
        return static_cast<int>(v);
    };
    if (s.rfind("Z^", 0) == 0) return lattice(num(2));
    if (s.rfind("F_", 0) == 0) return free_group(num(2));
    throw std::invalid_argument("bad group string: " + s);
}

// Canonical element: lattice coordinates, or a reduced word of signed
// generator indices (+i for the i-th generator, -i for its inverse, 1-based).
struct Element {
    uint32_t gid = 0;
    std::vector<int32_t> data;

    bool operator==(const Element&) const = default;
    bool operator<(const Element& o) const {
        if (gid != o.gid) return gid < o.gid;
        return data < o.data;
    }
};

struct ElementHash {
    size_t operator()(const Element& e) const {
        uint64_t h = 0x9e3779b97f4a7c15ULL ^ e.gid;
        for (int32_t v : e.data) {
            h ^= static_cast<uint64_t>(static_cast<uint32_t>(v)) + 0x9e3779b97f4a7c15ULL +
                 (h << 6) + (h >> 2);
        }
        return static_cast<size_t>(h);
    }
};

inline Element identity(const GroupSpec& g) {
    Element e;
    e.gid = g.id();
    if (g.kind == GroupKind::Lattice) e.data.assign(g.param, 0);
    return e;
}

inline void check_same_group(const Element& a, const Element& b) {
    if (a.gid != b.gid) throw std::invalid_argument("elements from different groups");
}

inline Element mul(const GroupSpec& g, const Element& a, const Element& b) {
    check_same_group(a, b);
    Element r;
    r.gid = a.gid;
    if (g.kind == GroupKind::Lattice) {
        r.data.resize(a.data.size());
        for (size_t i = 0; i < a.data.size(); ++i) r.data[i] = a.data[i] + b.data[i];
        return r;
    }
    r.data = a.data;
    for (int32_t letter : b.data) {
        if (!r.data.empty() && r.data.back() == -letter)
            r.data.pop_back();
        else
            r.data.push_back(letter);
    }
    return r;
}

inline Element inv(const GroupSpec& g, const Element& a) {
    Element r;
    r.gid = a.gid;
    r.data.reserve(a.data.size());
    if (g.kind == GroupKind::Lattice) {
        for (int32_t v : a.data) r.data.push_back(-v);
    } else {
        for (auto it = a.data.rbegin(); it != a.data.rend(); ++it) r.data.push_back(-*it);
    }
    return r;
}

inline int64_t word_length(const GroupSpec& g, const Element& x) {
    if (g.kind == GroupKind::Free) return static_cast<int64_t>(x.data.size());
    int64_t s = 0;
    for (int32_t v : x.data) s += std::abs(static_cast<long>(v));
    return s;
}

// The 2k generators as elements: +1..+k then -1..-k (lattice: +-e_i).
inline std::vector<Element> generators(const GroupSpec& g) {
    std::vector<Element> out;
    for (int sign : {+1, -1}) {
        for (int i = 1; i <= g.param; ++i) {
            Element e = identity(g);
            if (g.kind == GroupKind::Lattice)
                e.data[i - 1] = sign;
            else
                e.data.push_back(sign * i);
            out.push_back(std::move(e));
        }
    }
    return out;
}

// Right-multiplication by a single signed generator index (free groups), or
// by +-e_i (lattices); avoids building a temporary Element.
inline void mul_gen_inplace(const GroupSpec& g, Element& x, int32_t letter) {
    if (g.kind == GroupKind::Lattice) {
        int i = std::abs(static_cast<long>(letter)) - 1;
        x.data[i] += letter > 0 ? 1 : -1;
        return;
    }
    if (!x.data.empty() && x.data.back() == -letter)
        x.data.pop_back();
    else
        x.data.push_back(letter);
}

// {x : d_w(e,x) <= r} by breadth-first generation with dedup.
inline std::vector<Element> ball_enumerate(const GroupSpec& g, int r,
                                           size_t cap = 10'000'000) {
    std::vector<Element> out;
    std::unordered_set<Element, ElementHash> seen;
    std::deque<std::pair<Element, int>> queue;
    Element e = identity(g);
    seen.insert(e);
    queue.emplace_back(e, 0);
    auto gens = generators(g);
    while (!queue.empty()) {
        auto [x, d] = std::move(queue.front());
        queue.pop_front();
        out.push_back(x);
        if (d == r) continue;
        for (const auto& s : gens) {
            Element y = mul(g, x, s);
            if (seen.insert(y).second) {
                if (seen.size() > cap)
                    throw std::length_error(
                        "ball enumeration cap exceeded near size " +
                        std::to_string(seen.size()));
                queue.emplace_back(std::move(y), d + 1);
            }
        }
    }
    return out;
}

// Element text form: "1,-2,3" for lattices; generator letters a,b,c,... with
// a trailing apostrophe for inverses ("ab'a") for free groups.
inline std::string format_element(const GroupSpec& g, const Element& x) {
    std::string s;
    if (g.kind == GroupKind::Lattice) {
        for (size_t i = 0; i < x.data.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(x.data[i]);
        }
        return s;
    }
    if (x.data.empty()) return "e";
    for (int32_t letter : x.data) {
        s += static_cast<char>('a' + std::abs(static_cast<long>(letter)) - 1);
        if (letter < 0) s += '\'';
    }
    return s;
}

inline Element parse_element(const GroupSpec& g, const std::string& s) {
    Element e = identity(g);
    if (g.kind == GroupKind::Lattice) {
        size_t pos = 0;
        int idx = 0;
        while (pos < s.size()) {
            size_t comma = s.find(',', pos);
            if (comma == std::string::npos) comma = s.size();
            if (idx >= g.param) throw std::invalid_argument("too many coordinates: " + s);
            e.data[idx++] = std::stoi(s.substr(pos, comma - pos));
            pos = comma + 1;
        }
        if (idx != g.param) throw std::invalid_argument("expected " +
            std::to_string(g.param) + " coordinates: " + s);
        return e;
    }
    if (s == "e") return e;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c < 'a' || c >= 'a' + g.param)
            throw std::invalid_argument("bad generator letter in: " + s);
        int32_t letter = c - 'a' + 1;
        if (i + 1 < s.size() && s[i + 1] == '\'') {
            letter = -letter;
            ++i;
        }
        mul_gen_inplace(g, e, letter);
    }
    return e;
}

} // namespace gwalk
