#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phbf/bloom.hpp"
#include "phbf/hbf.hpp"
#include "phbf/phbf.hpp"
#include "phbf/temporal.hpp"

namespace phbf {

//! An IC as it appears at a checkpoint: its external marking and the PUF
//! response to the fixed challenge set.
struct Chip {
  std::string marking;
  Signature response;
};

//! One expected stage of a chip's journey: a registered location and a
//! g-aligned day range.
struct TrajectoryLeg {
  std::string location;
  std::uint64_t start;
  std::uint64_t end;
};

struct LegResult {
  TrajectoryLeg leg;
  bool found;
  std::vector<NodeMatch> matches;
};

struct TheftReport {
  std::vector<LegResult> legs;

  bool stolen() const {
    for (const auto& l : legs) {
      if (!l.found) return true;
    }
    return false;
  }

  std::vector<std::string> missing_locations() const {
    std::vector<std::string> out;
    for (const auto& l : legs) {
      if (!l.found) out.push_back(l.leg.location);
    }
    return out;
  }
};

enum class CloneVerdict { AuthenticAtOem, ClonedOrOverproduced, UnknownMarking };
enum class RemarkVerdict { ConsistentMarking, Remarked, UnknownResponse };
enum class RecycleVerdict { Recycled, NotRecycled };

//! The L-location supply-chain model: one persistent filter per location,
//! plus three OEM-side structures: a Bloom filter of markings, an HBF
//! binding each response to its marking (the marking is salted into every
//! block's hashed message), and an HBF of sold-chip responses. Location 0
//! is the OEM; observations there register the marking and the binding.
//! Distinct location filters may be written from different threads;
//! detection queries are read-only and freely concurrent with each other.
class SupplyChain {
 public:
  SupplyChain(std::vector<std::string> locations, const TimeTree& tree,
              const HbfParams& params)
      : locations_(std::move(locations)),
        marking_set_(params.filter_bits, params.hash_count),
        binding_filter_(params),
        sold_filter_(params) {
    if (locations_.empty()) {
      throw std::invalid_argument("SupplyChain: at least one location (the OEM) required");
    }
    location_filters_.reserve(locations_.size());
    for (std::size_t i = 0; i < locations_.size(); ++i) {
      location_filters_.emplace_back(tree, params);
    }
  }

  const std::vector<std::string>& locations() const { return locations_; }
  const TimeTree& tree() const { return location_filters_.front().tree(); }
  const HbfParams& params() const { return location_filters_.front().params(); }

  std::optional<std::size_t> location_index(std::string_view name) const {
    for (std::size_t i = 0; i < locations_.size(); ++i) {
      if (locations_[i] == name) return i;
    }
    return std::nullopt;
  }

  //! Records a sighting of `chip` at a location on a given day. At the OEM
  //! this additionally registers the marking and the marking-response
  //! binding.
  void observe(const Chip& chip, std::string_view location, std::uint64_t day) {
    check_chip(chip);
    const auto loc = location_index(location);
    if (!loc) throw std::invalid_argument("SupplyChain: unknown location");
    location_filters_[*loc].enroll(chip.response, day);
    if (*loc == 0) {
      marking_set_.insert(as_bytes(chip.marking));
      binding_filter_.enroll(chip.response, as_bytes(chip.marking));
    }
  }

  //! Records the sale of a chip to an end user.
  void mark_sold(const Chip& chip) {
    check_chip(chip);
    sold_filter_.enroll(chip.response);
  }

  //! Checks the chip's response against every leg of its presumed
  //! trajectory; a chip found at every leg is not missing or stolen.
  TheftReport detect_theft(const Chip& chip, const std::vector<TrajectoryLeg>& trajectory,
                           bool expand = false) const {
    check_chip(chip);
    TheftReport report;
    report.legs.reserve(trajectory.size());
    for (const auto& leg : trajectory) {
      const auto loc = location_index(leg.location);
      if (!loc) throw std::invalid_argument("SupplyChain: unknown location in trajectory");
      const auto& filter = location_filters_[*loc];
      auto matches = filter.match_report(chip.response, leg.start, leg.end, expand);
      bool found = false;
      for (const auto& nm : matches) {
        if (nm.match_count >= params().threshold) {
          found = true;
          break;
        }
      }
      report.legs.push_back({leg, found, std::move(matches)});
    }
    return report;
  }

  //! Marking known but response absent from the OEM's full history means
  //! the marking was copied onto a different die.
  CloneVerdict detect_clone(const Chip& chip) const {
    check_chip(chip);
    if (!marking_set_.contains(as_bytes(chip.marking))) {
      return CloneVerdict::UnknownMarking;
    }
    return oem_query(chip.response) ? CloneVerdict::AuthenticAtOem
                                    : CloneVerdict::ClonedOrOverproduced;
  }

  //! Response known at the OEM but inconsistent with the presented marking
  //! means the part was remarked.
  RemarkVerdict detect_remarked(const Chip& chip) const {
    check_chip(chip);
    if (!oem_query(chip.response)) return RemarkVerdict::UnknownResponse;
    return binding_filter_.query(chip.response, as_bytes(chip.marking))
               ? RemarkVerdict::ConsistentMarking
               : RemarkVerdict::Remarked;
  }

  //! A response already in the sold registry belongs to a previously
  //! purchased chip.
  RecycleVerdict detect_recycled(const Signature& response) const {
    return sold_filter_.query(response) ? RecycleVerdict::Recycled
                                        : RecycleVerdict::NotRecycled;
  }

  PersistentFilter& location_filter(std::size_t i) { return location_filters_.at(i); }
  const PersistentFilter& location_filter(std::size_t i) const {
    return location_filters_.at(i);
  }
  BloomFilter& marking_set() { return marking_set_; }
  const BloomFilter& marking_set() const { return marking_set_; }
  HierarchicalFilter& binding_filter() { return binding_filter_; }
  const HierarchicalFilter& binding_filter() const { return binding_filter_; }
  HierarchicalFilter& sold_filter() { return sold_filter_; }
  const HierarchicalFilter& sold_filter() const { return sold_filter_; }

 private:
  void check_chip(const Chip& chip) const {
    if (chip.marking.empty()) throw std::invalid_argument("SupplyChain: empty chip marking");
    if (chip.response.size() != params().signature_bits()) {
      throw std::invalid_argument("SupplyChain: chip response length mismatch");
    }
  }

  bool oem_query(const Signature& response) const {
    const auto& oem = location_filters_.front();
    return oem.query(response, 1, oem.tree().total_days());
  }

  std::vector<std::string> locations_;
  std::vector<PersistentFilter> location_filters_;
  BloomFilter marking_set_;
  HierarchicalFilter binding_filter_;
  HierarchicalFilter sold_filter_;
};

inline std::string_view to_string(CloneVerdict v) {
  switch (v) {
    case CloneVerdict::AuthenticAtOem: return "AuthenticAtOem";
    case CloneVerdict::ClonedOrOverproduced: return "ClonedOrOverproduced";
    case CloneVerdict::UnknownMarking: return "UnknownMarking";
  }
  return "?";
}

inline std::string_view to_string(RemarkVerdict v) {
  switch (v) {
    case RemarkVerdict::ConsistentMarking: return "ConsistentMarking";
    case RemarkVerdict::Remarked: return "Remarked";
    case RemarkVerdict::UnknownResponse: return "UnknownResponse";
  }
  return "?";
}

inline std::string_view to_string(RecycleVerdict v) {
  switch (v) {
    case RecycleVerdict::Recycled: return "Recycled";
    case RecycleVerdict::NotRecycled: return "NotRecycled";
  }
  return "?";
}

}  // namespace phbf
