// Command-line driver: run, sweep, choose, gen.
//
// Exit codes: 0 success (and verification passed), 1 usage or runtime error,
// 2 verification failure.

#include <CLI11.hpp>

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "dare/error.hpp"
#include "dare/harness.hpp"

namespace fs = std::filesystem;
using dare::harness::ExperimentConfig;
using json = nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kVerify = 2;

// Flags that mirror config fields. Values are kept as text and parsed as JSON
// when possible, so "--block 8" and "--variant fre" both work.
struct Overrides {
  std::deque<std::pair<std::string, std::string>> flags;  // field, raw value; deque keeps references stable
  std::vector<std::string> sets;                            // field=value

  void add(CLI::App* app, const std::string& field, const std::string& help) {
    auto& slot = flags.emplace_back(field, std::string{});
    app->add_option("--" + field, slot.second, help);
  }
};

json parse_value(const std::string& raw) {
  try {
    return json::parse(raw);
  } catch (const json::exception&) {
    return raw;
  }
}

ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) throw dare::UsageError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw dare::UsageError("config " + path + " is not valid JSON: " + e.what());
  }
  return ExperimentConfig::from_json(j);
}

ExperimentConfig resolve(const std::string& path, const Overrides& o) {
  ExperimentConfig c = load_config(path);
  // Variant first: switching variant resets the filter mode to its default.
  auto order = o.flags;
  std::stable_partition(order.begin(), order.end(), [](const auto& f) { return f.first == "variant"; });
  for (const auto& [field, raw] : order) {
    if (raw.empty()) continue;
    if (field == "out") c.out = raw;
    else if (field == "mtx") c = dare::harness::with_override(c, field, raw);
    else c = dare::harness::with_override(c, field, parse_value(raw));
  }
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw dare::UsageError("--set expects field=value, got '" + s + "'");
    c = dare::harness::with_override(c, s.substr(0, eq), parse_value(s.substr(eq + 1)));
  }
  return c;
}

void add_config_flags(CLI::App* app, Overrides& o) {
  o.add(app, "kernel", "spmm or sddmm");
  o.add(app, "variant", "baseline, fre, gsa, full, nvr or oracle");
  o.add(app, "block", "blockification size (1, 2, 4, 8, 16)");
  o.add(app, "sparsity", "synthetic sparsity in [0, 1]");
  o.add(app, "seed", "synthetic matrix and operand seed");
  o.add(app, "rows", "synthetic rows");
  o.add(app, "cols", "synthetic columns");
  o.add(app, "dense_dim", "SDDMM reduction length / SpMM output columns");
  o.add(app, "mtx", "Matrix Market file instead of a synthetic matrix");
  o.add(app, "riq", "runahead issue queue entries");
  o.add(app, "vmr", "vector matrix register entries");
  o.add(app, "rfu", "dynamic, static or off");
  o.add(app, "static_threshold", "cycle threshold for rfu=static");
  o.add(app, "prefetch_width", "runahead uops per cycle");
  app->add_option("--set", o.sets, "any config field, e.g. llc.hit_latency=40");
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path);
  if (!out) throw dare::Error("cannot write " + path);
  out << text;
}

int cmd_run(const std::string& config, const Overrides& o, const std::string& trace_path) {
  const ExperimentConfig c = resolve(config, o);
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw dare::Error("cannot write " + trace_path);
  }
  const auto r = dare::harness::run(c, trace_path.empty() ? nullptr : &trace);
  if (c.out.size() >= 4 && c.out.substr(c.out.size() - 4) == ".csv")
    write_text(c.out, dare::stats::csv_header() + "\n" + dare::stats::csv_row(r.ledger, r.report.at("config")) + "\n");
  else
    write_text(c.out, r.report.dump(2) + "\n");
  return kOk;
}

std::vector<json> split_values(const std::string& list) {
  std::vector<json> v;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (!item.empty()) v.push_back(parse_value(item));
  }
  return v;
}

int cmd_sweep(const std::string& config, const Overrides& o, const std::string& axis, const std::string& values) {
  const ExperimentConfig c = resolve(config, o);
  const auto s = dare::harness::sweep(c, axis, split_values(values));
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
      std::ofstream f(fs::path(c.out) / ("point_" + std::to_string(i) + ".json"));
      f << s.rows[i].result.report.dump(2) << "\n";
    }
    write_text((fs::path(c.out) / "sweep.csv").string(), dare::harness::sweep_csv(s));
  }
  std::cout << dare::harness::sweep_csv(s);
  if (s.error) {
    std::cerr << "sweep stopped after " << s.rows.size() << " point(s): " << *s.error << "\n";
    return s.verification_failed ? kVerify : kUsage;
  }
  return kOk;
}

int cmd_choose(const std::string& dir) {
  if (!fs::is_directory(dir)) throw dare::UsageError(dir + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<nlohmann::ordered_json> reports;
  for (const auto& f : files) {
    std::ifstream in(f);
    auto j = nlohmann::ordered_json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("config") || !j.contains("counters")) continue;
    reports.push_back(std::move(j));
  }
  const auto choice = dare::harness::choose_variant(reports);
  std::cout << dare::harness::choice_json(choice).dump(2) << "\n";
  return kOk;
}

int cmd_gen(const std::string& config, const Overrides& o, const std::string& asm_path, const std::string& manifest_path) {
  const ExperimentConfig c = resolve(config, o);
  c.validate();
  const auto w = dare::harness::build_workload(c);
  std::ostringstream text;
  nlohmann::ordered_json manifest;
  dare::kernel::dump_program(w.program, text, manifest);
  write_text(asm_path, text.str());
  if (!manifest_path.empty()) write_text(manifest_path, manifest.dump(2) + "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle-level matrix-unit runahead simulator"};
  app.require_subcommand(1);

  std::string config, trace, axis, values, reports, asm_path, manifest_path;
  Overrides run_o, sweep_o, gen_o;

  auto* run = app.add_subcommand("run", "generate, simulate, verify and report one configuration");
  run->add_option("--config", config, "JSON config file");
  add_config_flags(run, run_o);
  run->add_option("--out", run_o.flags.emplace_back("out", "").second, "report path (.json or .csv; stdout if empty)");
  run->add_option("--trace", trace, "write the LLC request/response trace as CSV");

  auto* sweep = app.add_subcommand("sweep", "run one configuration per value of an axis");
  sweep->add_option("--config", config, "JSON config file");
  add_config_flags(sweep, sweep_o);
  sweep->add_option("--out", sweep_o.flags.emplace_back("out", "").second, "directory for per-point reports");
  sweep->add_option("--axis", axis, "config field to vary (dotted for llc.* / dram.*)")->required();
  sweep->add_option("--values", values, "comma-separated values")->required();

  auto* choose = app.add_subcommand("choose", "pick FRE or FULL per block size from reports");
  choose->add_option("--reports", reports, "directory of run reports")->required();

  auto* gen = app.add_subcommand("gen", "write the generated kernel as assembly plus a layout manifest");
  gen->add_option("--config", config, "JSON config file");
  add_config_flags(gen, gen_o);
  gen->add_option("--asm", asm_path, "assembly output (stdout if empty)");
  gen->add_option("--manifest", manifest_path, "manifest output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*run) return cmd_run(config, run_o, trace);
    if (*sweep) return cmd_sweep(config, sweep_o, axis, values);
    if (*choose) return cmd_choose(reports);
    if (*gen) return cmd_gen(config, gen_o, asm_path, manifest_path);
  } catch (const dare::VerificationError& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return kVerify;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
