#include <catch_amalgamated.hpp>

#include <random>

#include "dare/classifier.hpp"
#include "dare/error.hpp"

using namespace dare;
using namespace dare::sim;

namespace {

// Hand-rolled reference of the three-step update, recomputed from scratch.
std::optional<uint64_t> reference_threshold(const std::vector<uint64_t>& window, std::optional<uint64_t> prev) {
  std::vector<uint32_t> bins(64, 0);
  for (uint64_t l : window) ++bins[std::min<uint64_t>(l / 8, 63)];
  std::vector<uint32_t> peaks;
  for (uint32_t b = 0; b < 64; ++b)
    if (bins[b] * 5 > window.size()) peaks.push_back(b);
  if (peaks.empty() || peaks.back() - peaks.front() <= 4) return prev;
  uint32_t best = peaks.front() + 1;
  for (uint32_t b = best; b < peaks.back(); ++b)
    if (bins[b] < bins[best]) best = b;
  return best * 8 + 32;
}

}  // namespace

TEST_CASE("classifier worked example gives threshold 56") {
  LatencyClassifier c;
  for (int i = 0; i < 16; ++i) c.observe(20);
  for (int i = 0; i < 16; ++i) c.observe(110);
  REQUIRE(c.threshold());
  CHECK(*c.threshold() == 56);
  CHECK(c.predict(110) == Prediction::Miss);
  CHECK(c.predict(20) == Prediction::Hit);
  CHECK(c.histogram()[2] == 16);
  CHECK(c.histogram()[13] == 16);
}

TEST_CASE("classifier stays absent on a unimodal stream") {
  LatencyClassifier c;
  for (int i = 0; i < 32; ++i) c.observe(20);
  CHECK_FALSE(c.threshold());
  CHECK(c.predict(20) == Prediction::Miss);
}

TEST_CASE("peaks within the margin do not update") {
  LatencyClassifier c;
  for (int i = 0; i < 16; ++i) c.observe(20);  // bin 2
  for (int i = 0; i < 16; ++i) c.observe(44);  // bin 5
  CHECK_FALSE(c.threshold());
  // Once a threshold exists, a close pair leaves it unchanged.
  for (int i = 0; i < 16; ++i) c.observe(20);
  for (int i = 0; i < 16; ++i) c.observe(110);
  REQUIRE(c.threshold() == 56u);
  for (int i = 0; i < 32; ++i) c.observe(i % 2 ? 20 : 44);
  CHECK(c.threshold() == 56u);
}

TEST_CASE("ring buffer keeps the most recent 32 samples") {
  LatencyClassifier c;
  for (int i = 0; i < 100; ++i) c.observe(i);
  REQUIRE(c.samples().size() == 32);
  std::vector<uint64_t> s = c.samples();
  std::sort(s.begin(), s.end());
  CHECK(s.front() == 68);
  CHECK(s.back() == 99);
  c.observe(100000);
  CHECK(c.histogram().back() == 1);
}

TEST_CASE("classifier matches a from-scratch reference on random streams") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    LatencyClassifier c;
    std::vector<uint64_t> window;
    std::optional<uint64_t> ref;
    for (int i = 0; i < 300; ++i) {
      const uint64_t l = rng() % 3 ? 18 + rng() % 20 : 90 + rng() % 120;
      c.observe(l);
      window.push_back(l);
      if (window.size() > 32) window.erase(window.begin());
      ref = reference_threshold(window, ref);
      REQUIRE(c.threshold() == ref);
    }
  }
}

TEST_CASE("classifier separates well-spaced modes") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const uint64_t h = 10 + rng() % 100;
    const uint64_t m = h + 41 + rng() % 200;
    LatencyClassifier c;
    auto draw = [&](bool miss) { return miss ? m + rng() % 8 : h - rng() % 8; };
    // Warm up with both modes well represented.
    for (int i = 0; i < 32; ++i) c.observe(draw(i % 2));
    REQUIRE(c.threshold());
    CHECK(*c.threshold() > h);
    CHECK(*c.threshold() < m);
    for (int i = 0; i < 200; ++i) {
      const bool miss = rng() % 2;
      const uint64_t l = draw(miss);
      CHECK(c.predict(l) == (miss ? Prediction::Miss : Prediction::Hit));
    }
  }
}

TEST_CASE("classifier config is validated") {
  ClassifierConfig cfg;
  cfg.bin_width = 0;
  CHECK_THROWS_AS(LatencyClassifier(cfg), ConfigError);
}
