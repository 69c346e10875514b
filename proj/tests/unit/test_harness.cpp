#include <catch_amalgamated.hpp>

#include "dare/error.hpp"
#include "dare/harness.hpp"

using namespace dare;
using namespace dare::harness;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

ExperimentConfig small(Variant v = Variant::Full) {
  ExperimentConfig c;
  c.variant = v;
  c.rows = 48;
  c.cols = 40;
  c.dense_dim = 32;
  c.sparsity = 0.9;
  c.seed = 4;
  if (v == Variant::Nvr) c.rfu = sim::RfuMode::Off;
  return c;
}

ojson fake_report(Variant v, uint32_t block, uint64_t cycles) {
  ExperimentConfig c;
  c.variant = v;
  c.block = block;
  if (v == Variant::Nvr) c.rfu = sim::RfuMode::Off;
  ojson r;
  r["config"] = c.to_json();
  r["counters"] = {{"cycles", cycles}};
  return r;
}

}  // namespace

TEST_CASE("config documents round-trip") {
  ExperimentConfig c = small(Variant::Fre);
  c.llc.hit_latency = 33;
  c.dram.latency = 150;
  c.rfu = sim::RfuMode::Static;
  const auto back = ExperimentConfig::from_json(json::parse(c.to_json().dump()));
  CHECK(back.to_json() == c.to_json());
  CHECK(ExperimentConfig::from_json(json::object()).to_json() == ExperimentConfig{}.to_json());
}

TEST_CASE("config contradictions and bad values") {
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"bogus", 1}}), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"llc", {{"size", 1}}}}), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"variant", "nvr"}, {"rfu", "dynamic"}}), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"variant", "fre"}, {"lowering", "gsa"}}), UsageError);
  CHECK_NOTHROW(ExperimentConfig::from_json({{"variant", "full"}, {"lowering", "gsa"}}));
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"variant", "turbo"}}), UsageError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"block", 3}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"sparsity", 1.5}}), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_json({{"rows", "many"}}), UsageError);
  // NVR defaults to no filter.
  CHECK(ExperimentConfig::from_json({{"variant", "nvr"}}).rfu == sim::RfuMode::Off);
}

TEST_CASE("overrides reach nested fields and reset the filter on a variant change") {
  ExperimentConfig c = small(Variant::Fre);
  c = with_override(c, "llc.hit_latency", 70);
  CHECK(c.llc.hit_latency == 70);
  c = with_override(c, "dram.latency", 300);
  CHECK(c.dram.latency == 300);
  CHECK_THROWS_AS(with_override(c, "llc.colour", 1), UsageError);
  CHECK_THROWS_AS(with_override(c, "nothing", 1), UsageError);
  c = with_override(c, "variant", "nvr");
  CHECK(c.variant == Variant::Nvr);
  CHECK(c.rfu == sim::RfuMode::Off);
  c = with_override(c, "variant", "fre");
  CHECK(c.rfu == sim::RfuMode::Dynamic);
}

TEST_CASE("variants map onto lowering, runahead and cache") {
  CHECK(variant_lowering(Variant::Baseline) == kernel::Lowering::Baseline);
  CHECK(variant_lowering(Variant::Full) == kernel::Lowering::Gsa);
  CHECK(variant_lowering(Variant::Nvr) == kernel::Lowering::Baseline);
  CHECK_FALSE(variant_runahead(Variant::Gsa));
  CHECK(variant_runahead(Variant::Nvr));
  CHECK(small(Variant::Oracle).llc_config().oracle);
  CHECK_FALSE(small(Variant::Baseline).llc_config().oracle);
  const auto nvr = small(Variant::Nvr).sim_config();
  CHECK(nvr.riq_size == 0);
  CHECK(nvr.rfu == sim::RfuMode::Off);
  for (Variant v : {Variant::Baseline, Variant::Fre, Variant::Gsa, Variant::Full, Variant::Nvr, Variant::Oracle})
    CHECK(parse_variant(variant_name(v)) == v);
}

TEST_CASE("a run is verified, reproducible and describes its workload") {
  const auto a = run(small(Variant::Full));
  const auto b = run(small(Variant::Full));
  CHECK(a.report.dump() == b.report.dump());
  CHECK(a.report.at("verified") == true);
  CHECK(a.report.at("workload").at("mgather").get<int>() > 0);
  CHECK(a.report.at("counters").at("cycles") == a.cycles);
  CHECK(run(small(Variant::Baseline)).report.at("workload").at("mgather") == 0);
  const auto o = run(small(Variant::Oracle));
  CHECK(stats::miss_rate(o.ledger) == 0.0);
  auto other = small(Variant::Full);
  other.seed = 5;
  CHECK(run(other).report.at("config_hash") != a.report.at("config_hash"));
}

TEST_CASE("every variant verifies on both kernels") {
  for (auto k : {kernel::KernelKind::Sddmm, kernel::KernelKind::Spmm})
    for (Variant v : {Variant::Baseline, Variant::Fre, Variant::Gsa, Variant::Full, Variant::Nvr, Variant::Oracle}) {
      auto c = small(v);
      c.kernel = k;
      c.block = 2;
      CAPTURE(kernel::kernel_name(k), variant_name(v));
      CHECK_NOTHROW(run(c));
    }
}

TEST_CASE("sweeps") {
  CHECK_THROWS_AS(sweep(small(), "riq", {8}), UsageError);
  CHECK_THROWS_AS(sweep(small(), "nothing", {1, 2}), UsageError);
  const auto s = sweep(small(Variant::Fre), "riq", {4, 32});
  REQUIRE(s.rows.size() == 2);
  CHECK_FALSE(s.error);
  const auto lo = std::min(s.rows[0].normalized, s.rows[1].normalized);
  const auto hi = std::max(s.rows[0].normalized, s.rows[1].normalized);
  if (s.rows[0].result.cycles != s.rows[1].result.cycles) {
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
  }
  const auto csv = sweep_csv(s);
  CHECK(csv.rfind("riq,normalized_cycles,version,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK_THROWS_AS(sweep(small(), "block", {1, 3}), ConfigError);  // rejected before anything runs
  // A point that fails while running stops the sweep but keeps what ran.
  const auto bad = sweep(small(Variant::Fre), "mtx", {"", "/nonexistent/m.mtx"});
  CHECK(bad.rows.size() == 1);
  REQUIRE(bad.error);
  CHECK_FALSE(bad.verification_failed);
}

TEST_CASE("choosing between FRE and FULL") {
  std::vector<ojson> reports{fake_report(Variant::Fre, 1, 300), fake_report(Variant::Full, 1, 200),
                             fake_report(Variant::Fre, 4, 100), fake_report(Variant::Full, 4, 100),
                             fake_report(Variant::Fre, 8, 100), fake_report(Variant::Full, 8, 150),
                             fake_report(Variant::Baseline, 8, 999)};
  const auto c = choose_variant(reports);
  CHECK(c.per_block.at(1) == Variant::Full);
  CHECK(c.per_block.at(4) == Variant::Fre);  // tie
  CHECK(c.per_block.at(8) == Variant::Fre);
  REQUIRE(c.crossover);
  CHECK(*c.crossover == std::pair<uint32_t, uint32_t>{1, 4});
  const auto j = choice_json(c);
  CHECK(j.at("blocks").size() == 3);
  CHECK(j.at("crossover") == ojson{1, 4});

  reports.pop_back();
  reports.pop_back();
  CHECK_THROWS_AS(choose_variant(reports), Error);
  CHECK_THROWS_AS(choose_variant({}), Error);
  const auto none = choose_variant({fake_report(Variant::Fre, 2, 5), fake_report(Variant::Full, 2, 9)});
  CHECK_FALSE(none.crossover);
  CHECK(choice_json(none).at("crossover").is_null());
}
