#include "multibump/index_set.hpp"

#include <algorithm>
#include <sstream>

#include "multibump/errors.hpp"

namespace multibump {

IndexSet::IndexSet(std::initializer_list<int> members) : IndexSet(std::vector<int>(members)) {}

IndexSet::IndexSet(std::vector<int> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    if (!members_.empty() && members_.front() < 1)
        throw spec_error("index set members must be positive, got " + std::to_string(members_.front()));
}

bool IndexSet::contains(int i) const {
    return std::binary_search(members_.begin(), members_.end(), i);
}

bool IndexSet::is_subset_of(const IndexSet& other) const {
    return std::includes(other.members_.begin(), other.members_.end(), members_.begin(), members_.end());
}

void IndexSet::check_range(int n) const {
    if (!members_.empty() && members_.back() > n)
        throw spec_error("index " + std::to_string(members_.back()) + " outside {1.." + std::to_string(n) + "}");
}

std::string IndexSet::to_string() const {
    std::string out = "{";
    for (std::size_t k = 0; k < members_.size(); ++k) {
        if (k) out += ',';
        out += std::to_string(members_[k]);
    }
    return out + "}";
}

IndexSet IndexSet::parse(const std::string& text) {
    std::string body = text;
    body.erase(std::remove_if(body.begin(), body.end(), [](char c) { return c == '{' || c == '}' || c == ' '; }),
               body.end());
    std::vector<int> members;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            members.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw spec_error("cannot parse index set '" + text + "'");
        }
    }
    return IndexSet(std::move(members));
}

unsigned IndexSet::mask() const {
    unsigned m = 0;
    for (int i : members_) m |= 1u << (i - 1);
    return m;
}

IndexSet IndexSet::from_mask(unsigned mask) {
    std::vector<int> members;
    for (int i = 0; mask >> i; ++i)
        if ((mask >> i) & 1u) members.push_back(i + 1);
    return IndexSet(std::move(members));
}

std::strong_ordering IndexSet::operator<=>(const IndexSet& other) const {
    if (auto c = members_.size() <=> other.members_.size(); c != 0) return c;
    return members_ <=> other.members_;
}

std::vector<IndexSet> all_index_sets(int n) {
    if (n < 0 || n > 20) throw spec_error("number of positivity intervals out of range");
    std::vector<IndexSet> sets;
    sets.reserve(std::size_t{1} << n);
    for (unsigned m = 0; m < (1u << n); ++m) sets.push_back(IndexSet::from_mask(m));
    std::sort(sets.begin(), sets.end());
    return sets;
}

std::vector<IndexSet> nonempty_index_sets(int n) {
    auto sets = all_index_sets(n);
    sets.erase(sets.begin());
    return sets;
}

}  // namespace multibump
