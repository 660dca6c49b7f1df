#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "phbf/hbf.hpp"
#include "phbf/temporal.hpp"

namespace phbf {

//! Match count of one canonical-cover node for a queried signature.
struct NodeMatch {
  std::uint64_t node_index;
  std::uint32_t match_count;

  friend bool operator==(const NodeMatch&, const NodeMatch&) = default;
};

//! Persistent hierarchical filter: one HBF per time-tree node. Enrolling at
//! day t writes the signature into every HBF on the root-to-leaf path of t;
//! a range query ORs the thresholded HBF tests over the canonical cover of
//! the range. Membership therefore survives both bounded signature noise
//! and any g-aligned re-slicing of the time axis.
class PersistentFilter {
 public:
  PersistentFilter(const TimeTree& tree, const HbfParams& params) : tree_(tree) {
    params.validate();
    nodes_.reserve(tree_.node_count());
    for (std::uint64_t i = 0; i < tree_.node_count(); ++i) {
      nodes_.emplace_back(params);
    }
  }

  const TimeTree& tree() const { return tree_; }
  const HbfParams& params() const { return nodes_.front().params(); }

  void enroll(const Signature& s, std::uint64_t day) {
    for (auto idx : tree_.leaf_path(day)) node(idx).enroll(s);
  }

  bool query(const Signature& s, std::uint64_t start, std::uint64_t end,
             bool expand = false) const {
    for (auto idx : tree_.canonical_cover(start, end, expand)) {
      if (node(idx).query(s)) return true;
    }
    return false;
  }

  //! Per-cover-node match counts; query() is any(count >= threshold).
  std::vector<NodeMatch> match_report(const Signature& s, std::uint64_t start,
                                      std::uint64_t end, bool expand = false) const {
    std::vector<NodeMatch> report;
    for (auto idx : tree_.canonical_cover(start, end, expand)) {
      report.push_back({idx, node(idx).match_count(s)});
    }
    return report;
  }

  //! 1-based level-order node access.
  HierarchicalFilter& node(std::uint64_t index) { return nodes_.at(index - 1); }
  const HierarchicalFilter& node(std::uint64_t index) const { return nodes_.at(index - 1); }

 private:
  TimeTree tree_;
  std::vector<HierarchicalFilter> nodes_;
};

}  // namespace phbf
