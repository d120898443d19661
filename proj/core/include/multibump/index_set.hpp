#pragma once

#include <compare>
#include <initializer_list>
#include <string>
#include <vector>

namespace multibump {

/// A subset of the positivity-interval labels {1, ..., n}. Members are kept
/// sorted and unique.
class IndexSet {
public:
    IndexSet() = default;
    IndexSet(std::initializer_list<int> members);
    explicit IndexSet(std::vector<int> members);

    const std::vector<int>& members() const noexcept { return members_; }
    std::size_t cardinality() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    bool contains(int i) const;
    bool is_subset_of(const IndexSet& other) const;

    /// Throws unless every member lies in [1, n].
    void check_range(int n) const;

    /// "{}" or "{1,3}".
    std::string to_string() const;
    static IndexSet parse(const std::string& text);

    /// Bitmask with bit (i-1) set for each member.
    unsigned mask() const;
    static IndexSet from_mask(unsigned mask);

    /// Ordered by cardinality, then lexicographically.
    std::strong_ordering operator<=>(const IndexSet& other) const;
    bool operator==(const IndexSet& other) const = default;

private:
    std::vector<int> members_;
};

/// All 2^n subsets of {1..n}, ordered by (cardinality, lexicographic).
std::vector<IndexSet> all_index_sets(int n);

/// The 2^n - 1 nonempty subsets, same ordering.
std::vector<IndexSet> nonempty_index_sets(int n);

}  // namespace multibump
