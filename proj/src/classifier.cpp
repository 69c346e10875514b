#include "dare/classifier.hpp"

#include <algorithm>

#include "dare/error.hpp"

namespace dare::sim {

LatencyClassifier::LatencyClassifier(ClassifierConfig cfg) : cfg_(cfg) {
  if (cfg_.window == 0 || cfg_.bin_width == 0 || cfg_.max_bins < 2)
    throw ConfigError("classifier window, bin width and bin count must be positive");
}

void LatencyClassifier::observe(uint64_t latency) {
  if (ring_.size() < cfg_.window) {
    ring_.push_back(latency);
  } else {
    ring_[next_] = latency;
    next_ = (next_ + 1) % cfg_.window;
  }
  update();
}

std::vector<uint32_t> LatencyClassifier::histogram() const {
  std::vector<uint32_t> bins(cfg_.max_bins, 0);
  for (uint64_t l : ring_) ++bins[std::min<uint64_t>(l / cfg_.bin_width, cfg_.max_bins - 1)];
  return bins;
}

void LatencyClassifier::update() {
  const auto bins = histogram();
  const uint64_t n = ring_.size();
  // count / n > peak_percent / 100, in integers.
  auto is_peak = [&](uint32_t c) { return uint64_t{c} * 100 > n * cfg_.peak_percent; };
  std::optional<uint32_t> lo, hi;
  for (uint32_t b = 0; b < bins.size(); ++b) {
    if (!is_peak(bins[b])) continue;
    if (!lo) lo = b;
    hi = b;
  }
  if (!lo || *hi - *lo <= cfg_.margin_bins) return;
  uint32_t valley = *lo + 1;
  for (uint32_t b = *lo + 1; b < *hi; ++b)
    if (bins[b] < bins[valley]) valley = b;
  threshold_ = uint64_t{valley} * cfg_.bin_width + cfg_.slack;
}

Prediction LatencyClassifier::predict(uint64_t latency) const {
  if (!threshold_) return Prediction::Miss;
  return latency > *threshold_ ? Prediction::Miss : Prediction::Hit;
}

}  // namespace dare::sim
