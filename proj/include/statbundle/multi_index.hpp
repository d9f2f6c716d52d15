#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace statbundle {

/// Multi-index alpha in N^n addressing the Hermite basis element H_alpha.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
        for (int e : entries_)
            if (e < 0) throw std::invalid_argument("multi-index entries must be non-negative");
    }
    MultiIndex(std::initializer_list<int> entries) : MultiIndex(std::vector<int>(entries)) {}

    static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(static_cast<size_t>(n), 0)); }
    /// k on axis i (1-based), zero elsewhere.
    static MultiIndex axis(int n, int i, int k) {
        std::vector<int> e(static_cast<size_t>(n), 0);
        e.at(static_cast<size_t>(i - 1)) = k;
        return MultiIndex(std::move(e));
    }

    int length() const { return static_cast<int>(entries_.size()); }
    int operator[](int i) const { return entries_[static_cast<size_t>(i)]; }
    const std::vector<int>& entries() const { return entries_; }

    /// |alpha| = sum of entries.
    int order() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }

    /// alpha! = prod alpha_i!
    double factorial() const {
        double f = 1.0;
        for (int e : entries_)
            for (int k = 2; k <= e; ++k) f *= k;
        return f;
    }

    bool is_zero() const { return order() == 0; }

    /// alpha + e_i (axis 0-based here).
    MultiIndex raised(int i) const {
        auto e = entries_;
        e[static_cast<size_t>(i)] += 1;
        return MultiIndex(std::move(e));
    }
    /// alpha - e_i; requires alpha_i >= 1.
    MultiIndex lowered(int i) const {
        auto e = entries_;
        if (e[static_cast<size_t>(i)] == 0) throw std::invalid_argument("cannot lower zero entry");
        e[static_cast<size_t>(i)] -= 1;
        return MultiIndex(std::move(e));
    }

    auto operator<=>(const MultiIndex&) const = default;

private:
    std::vector<int> entries_;
};

/// All alpha of length n with |alpha| <= max_order, lexicographic.
inline std::vector<MultiIndex> multi_indices_up_to(int n, int max_order) {
    std::vector<MultiIndex> out;
    std::vector<int> cur(static_cast<size_t>(n), 0);
    const auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == n) {
            out.emplace_back(cur);
            return;
        }
        for (int k = 0; k <= remaining; ++k) {
            cur[static_cast<size_t>(pos)] = k;
            self(self, pos + 1, remaining - k);
        }
        cur[static_cast<size_t>(pos)] = 0;
    };
    rec(rec, 0, max_order);
    return out;
}

}  // namespace statbundle
