#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace phbf {

//! One node of the time tree: its 1-based level-order index and the
//! inclusive day range it spans.
struct Interval {
  std::uint64_t index;
  std::uint64_t start;
  std::uint64_t end;

  std::uint64_t length() const { return end - start + 1; }
  bool contains(std::uint64_t day) const { return start <= day && day <= end; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

//! Binary decomposition of the day span [1, T] with leaf granularity g.
//! Level l holds 2^l intervals of length T/2^l; the leaf level holds T/g
//! intervals of length g. Nodes are indexed 1..u in level order, so node j
//! has children 2j and 2j+1. Immutable after construction.
class TimeTree {
 public:
  TimeTree(std::uint64_t total_days, std::uint64_t granularity)
      : total_days_(total_days), granularity_(granularity) {
    if (total_days < 1 || granularity < 1) {
      throw std::invalid_argument("TimeTree: T and g must be >= 1");
    }
    if (total_days % granularity != 0 || !std::has_single_bit(total_days / granularity)) {
      throw std::invalid_argument(
          "TimeTree: T/g must be a whole power of two; round T up before construction");
    }
    leaf_count_ = total_days / granularity;
    levels_ = static_cast<std::uint32_t>(std::bit_width(leaf_count_));
    node_count_ = 2 * leaf_count_ - 1;
  }

  std::uint64_t total_days() const { return total_days_; }    // T
  std::uint64_t granularity() const { return granularity_; }  // g
  std::uint32_t levels() const { return levels_; }
  std::uint64_t node_count() const { return node_count_; }    // u
  std::uint64_t leaf_count() const { return leaf_count_; }

  //! Interval of node `index`: with l = floor(log2(index)) and
  //! offset = index - 2^l, the range [offset*(T/2^l) + 1, (offset+1)*(T/2^l)].
  Interval interval(std::uint64_t index) const {
    if (index < 1 || index > node_count_) {
      throw std::invalid_argument("TimeTree: node index out of [1, u]");
    }
    const auto level = static_cast<unsigned>(std::bit_width(index)) - 1;
    const std::uint64_t len = total_days_ >> level;
    const std::uint64_t offset = index - (std::uint64_t{1} << level);
    return {index, offset * len + 1, (offset + 1) * len};
  }

  //! Indices of the nodes whose intervals contain `day`, exactly one per
  //! level, root first. Descends by child index arithmetic, which visits
  //! the same nodes a depth-first search would.
  std::vector<std::uint64_t> leaf_path(std::uint64_t day) const {
    check_day(day);
    std::vector<std::uint64_t> path;
    path.reserve(levels_);
    std::uint64_t node = 1;
    path.push_back(node);
    while (node < leaf_count_) {
      const std::uint64_t left = 2 * node;
      node = interval(left).contains(day) ? left : left + 1;
      path.push_back(node);
    }
    return path;
  }

  //! Leaf node index whose interval contains `day`.
  std::uint64_t leaf_index(std::uint64_t day) const {
    check_day(day);
    return leaf_count_ + (day - 1) / granularity_;
  }

  bool aligned(std::uint64_t start, std::uint64_t end) const {
    return (start - 1) % granularity_ == 0 && end % granularity_ == 0;
  }

  //! The unique minimal set of node indices whose intervals are disjoint
  //! and union to exactly [start, end]: a node is taken iff its interval
  //! fits inside the range and its parent's does not. The range must be
  //! g-aligned unless `expand` widens it to the smallest aligned superrange
  //! (a superset query can only add false positives, never lose members).
  std::vector<std::uint64_t> canonical_cover(std::uint64_t start, std::uint64_t end,
                                             bool expand = false) const {
    if (start < 1 || end > total_days_ || start > end) {
      throw std::invalid_argument("TimeTree: query range must satisfy 1 <= start <= end <= T");
    }
    if (!aligned(start, end)) {
      if (!expand) {
        throw std::invalid_argument(
            "TimeTree: range not g-aligned; pass expand to widen to the aligned superrange");
      }
      start = ((start - 1) / granularity_) * granularity_ + 1;
      end = ((end + granularity_ - 1) / granularity_) * granularity_;
    }
    std::vector<std::uint64_t> cover;
    collect_cover(1, start, end, cover);
    return cover;
  }

 private:
  void check_day(std::uint64_t day) const {
    if (day < 1 || day > total_days_) {
      throw std::invalid_argument("TimeTree: day out of [1, T]");
    }
  }

  void collect_cover(std::uint64_t node, std::uint64_t start, std::uint64_t end,
                     std::vector<std::uint64_t>& out) const {
    const Interval iv = interval(node);
    if (iv.end < start || iv.start > end) return;
    if (start <= iv.start && iv.end <= end) {
      out.push_back(node);
      return;
    }
    // Partial overlap never reaches the leaf level on an aligned range.
    collect_cover(2 * node, start, end, out);
    collect_cover(2 * node + 1, start, end, out);
  }

  std::uint64_t total_days_;
  std::uint64_t granularity_;
  std::uint64_t leaf_count_;
  std::uint32_t levels_;
  std::uint64_t node_count_;
};

}  // namespace phbf
