#pragma once

// Unsupervised hit/miss classifier over recently observed uop latencies.

#include <cstdint>
#include <optional>
#include <vector>

namespace dare::sim {

struct ClassifierConfig {
  uint32_t window = 32;      // samples kept
  uint32_t bin_width = 8;    // cycles per histogram bin
  uint32_t peak_percent = 20;  // a bin is a peak above this share of samples
  uint32_t margin_bins = 4;  // peaks must be further apart than this
  uint32_t slack = 32;       // added to the valley's lower edge
  uint32_t max_bins = 64;    // larger latencies clamp into the top bin
};

enum class Prediction : uint8_t { Hit, Miss };

class LatencyClassifier {
 public:
  explicit LatencyClassifier(ClassifierConfig cfg = {});

  // Records a sample and re-derives the threshold from the current window.
  void observe(uint64_t latency);
  // Miss iff a threshold exists and latency exceeds it; Miss while warming up.
  Prediction predict(uint64_t latency) const;

  std::optional<uint64_t> threshold() const { return threshold_; }
  std::vector<uint32_t> histogram() const;
  const std::vector<uint64_t>& samples() const { return ring_; }
  const ClassifierConfig& config() const { return cfg_; }

 private:
  void update();

  ClassifierConfig cfg_;
  std::vector<uint64_t> ring_;
  std::size_t next_ = 0;
  std::optional<uint64_t> threshold_;
};

}  // namespace dare::sim
