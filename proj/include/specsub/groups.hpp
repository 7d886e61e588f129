#ifndef SPECSUB_GROUPS_HPP
#define SPECSUB_GROUPS_HPP

#include "specsub/error.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace specsub {

/// Partition of the term indices {0, ..., n_terms - 1} into cells.
class GroupIndex {
public:
  GroupIndex(std::vector<std::vector<std::size_t>> cells, std::size_t n_terms)
      : cells_(std::move(cells)), n_terms_(n_terms) {
    if (cells_.empty())
      fail(ErrorCategory::domain, "partition needs at least one group");
    std::vector<char> seen(n_terms_, 0);
    std::size_t covered = 0;
    for (const auto &cell : cells_) {
      if (cell.empty())
        fail(ErrorCategory::domain, "partition has an empty group");
      for (std::size_t i : cell) {
        if (i >= n_terms_ || seen[i])
          fail(ErrorCategory::domain,
               "groups must be disjoint and within range (index " +
                   std::to_string(i) + ")");
        seen[i] = 1;
        ++covered;
      }
    }
    if (covered != n_terms_)
      fail(ErrorCategory::domain, "groups do not cover every term");
  }

  std::size_t count() const { return cells_.size(); }
  std::size_t n_terms() const { return n_terms_; }
  const std::vector<std::size_t> &cell(std::size_t k) const {
    if (k >= cells_.size())
      fail(ErrorCategory::domain, "group index " + std::to_string(k) +
                                      " out of range");
    return cells_[k];
  }
  const std::vector<std::vector<std::size_t>> &cells() const { return cells_; }

  std::size_t max_cell_size() const {
    std::size_t m = 0;
    for (const auto &c : cells_)
      m = std::max(m, c.size());
    return m;
  }

private:
  std::vector<std::vector<std::size_t>> cells_;
  std::size_t n_terms_;
};

/// Systematic grouping: group k holds {k, k + G, k + 2G, ...}, so every group
/// spans the whole frequency range. When G does not divide n the leftover
/// terms land one each in groups 0, 1, ...
inline GroupIndex make_groups(std::size_t n_terms, std::size_t group_count) {
  if (group_count < 1 || group_count > n_terms)
    fail(ErrorCategory::domain,
         "group count must lie in [1, " + std::to_string(n_terms) + "], got " +
             std::to_string(group_count));
  std::vector<std::vector<std::size_t>> cells(group_count);
  for (auto &c : cells)
    c.reserve(n_terms / group_count + 1);
  for (std::size_t i = 0; i < n_terms; ++i)
    cells[i % group_count].push_back(i);
  return GroupIndex(std::move(cells), n_terms);
}

} // namespace specsub

#endif
