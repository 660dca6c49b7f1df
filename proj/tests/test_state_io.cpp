#include "phbf/state_io.hpp"

#include <gtest/gtest.h>

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "phbf/eval.hpp"

namespace {

using phbf::Chip;
using phbf::HbfParams;
using phbf::SupplyChain;
using phbf::TimeTree;
using phbf::eval::random_signature;
using phbf::eval::SplitMix64;

SupplyChain random_chain(std::uint64_t seed) {
  SplitMix64 rng(seed);
  const std::uint64_t g = 1 + rng.below(8);
  const std::uint64_t leaves = std::uint64_t{1} << rng.below(4);
  std::vector<std::string> locations = {"OEM"};
  const std::uint64_t extra = rng.below(3);
  for (std::uint64_t i = 0; i < extra; ++i) locations.push_back("L" + std::to_string(i));
  SupplyChain chain(locations, TimeTree(g * leaves, g),
                    HbfParams::sized_for(8, 8, 20 + rng.below(50), 0.1, 3));
  const std::uint64_t chips = 1 + rng.below(40);
  for (std::uint64_t i = 0; i < chips; ++i) {
    const Chip chip{"chip-" + std::to_string(i), random_signature(64, rng)};
    chain.observe(chip, chain.locations()[rng.below(chain.locations().size())],
                  1 + rng.below(chain.tree().total_days()));
    if (rng.next() % 4 == 0) chain.mark_sold(chip);
  }
  return chain;
}

TEST(StateIo, MagicAndVersionLeadTheFile) {
  const auto chain = random_chain(1);
  const std::string bytes = phbf::io::to_bytes(chain);
  ASSERT_GE(bytes.size(), 5u);
  EXPECT_EQ(bytes.substr(0, 4), "PHBF");
  EXPECT_EQ(bytes[4], 1);
}

TEST(StateIo, PayloadSizeMatchesDocumentedLayout) {
  const SupplyChain chain({"OEM", "Fab"}, TimeTree(32, 4),
                          HbfParams{8, 8, 100, 3, 3});
  const std::string bytes = phbf::io::to_bytes(chain);
  const std::uint64_t filter_bytes = (100 + 7) / 8;  // ceil(m/8)
  const std::uint64_t u = 15;
  const std::uint64_t hbf_count = 2 * u + 2;  // per-location nodes + binding + sold
  const std::uint64_t expected = 4 + 1 + 8 * 8            // magic, version, header
                                 + 8 + (8 + 3) + (8 + 3)  // name table
                                 + (hbf_count * 8 + 1) * filter_bytes;
  EXPECT_EQ(bytes.size(), expected);
}

TEST(StateIo, RoundTripIsByteIdentical) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto chain = random_chain(seed);
    const std::string first = phbf::io::to_bytes(chain);
    std::istringstream in(first, std::ios::binary);
    const auto reloaded = phbf::io::load_chain(in);
    EXPECT_EQ(phbf::io::to_bytes(reloaded), first) << "seed " << seed;
  }
}

TEST(StateIo, ReloadedChainAnswersIdentically) {
  SplitMix64 rng(77);
  auto chain = random_chain(99);
  std::istringstream in(phbf::io::to_bytes(chain), std::ios::binary);
  const auto reloaded = phbf::io::load_chain(in);

  EXPECT_EQ(reloaded.locations(), chain.locations());
  EXPECT_EQ(reloaded.params(), chain.params());
  EXPECT_EQ(reloaded.tree().total_days(), chain.tree().total_days());
  EXPECT_EQ(reloaded.tree().granularity(), chain.tree().granularity());

  for (int probe = 0; probe < 200; ++probe) {
    const auto s = random_signature(64, rng);
    const Chip chip{"probe-" + std::to_string(probe), s};
    EXPECT_EQ(reloaded.detect_clone(chip), chain.detect_clone(chip));
    EXPECT_EQ(reloaded.detect_remarked(chip), chain.detect_remarked(chip));
    EXPECT_EQ(reloaded.detect_recycled(s), chain.detect_recycled(s));
    const std::uint64_t g = chain.tree().granularity();
    const std::uint64_t a = 1 + g * rng.below(chain.tree().leaf_count());
    for (std::size_t loc = 0; loc < chain.locations().size(); ++loc) {
      EXPECT_EQ(reloaded.location_filter(loc).query(s, a, a + g - 1),
                chain.location_filter(loc).query(s, a, a + g - 1));
    }
  }
}

TEST(StateIo, FileRoundTrip) {
  const auto chain = random_chain(5);
  const auto path = std::filesystem::temp_directory_path() / "phbf_state_test.bin";
  phbf::io::save_chain_file(path, chain);
  const auto reloaded = phbf::io::load_chain_file(path);
  EXPECT_EQ(phbf::io::to_bytes(reloaded), phbf::io::to_bytes(chain));
  std::filesystem::remove(path);
}

TEST(StateIo, BadMagicRejected) {
  std::istringstream in(std::string("NOPE") + std::string(200, '\0'), std::ios::binary);
  EXPECT_THROW(phbf::io::load_chain(in), std::runtime_error);
}

TEST(StateIo, WrongVersionRejected) {
  auto bytes = phbf::io::to_bytes(random_chain(6));
  bytes[4] = 2;
  std::istringstream in(bytes, std::ios::binary);
  EXPECT_THROW(phbf::io::load_chain(in), std::runtime_error);
}

TEST(StateIo, TruncationRejected) {
  const auto bytes = phbf::io::to_bytes(random_chain(7));
  for (std::size_t cut : {bytes.size() / 4, bytes.size() / 2, bytes.size() - 1}) {
    std::istringstream in(bytes.substr(0, cut), std::ios::binary);
    EXPECT_THROW(phbf::io::load_chain(in), std::runtime_error) << "cut " << cut;
  }
}

}  // namespace
