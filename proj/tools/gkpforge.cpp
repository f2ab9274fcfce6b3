// gkpforge: run protocols, sweep a parameter, sample Wigner functions and run
// the acceptance checks.
//
// Exit codes: 0 ok, 1 internal error, 2 bad config or arguments, 3 truncation
// did not converge, 4 validation failed, 5 zero-probability branch.
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "gkpforge/config.hpp"
#include "gkpforge/validation.hpp"

using namespace gkpforge;

namespace {

enum Exit { kOk = 0, kInternal = 1, kBadConfig = 2, kUnconverged = 3, kValidation = 4, kZeroProbability = 5 };

struct Source {
  std::string config;
  std::string preset;
  PresetArgs args;
  std::string engine;
  std::optional<int> cutoff;
  std::optional<std::uint64_t> seed;
};

void add_source_options(CLI::App* cmd, Source& s) {
  cmd->add_option("--config", s.config, "Protocol config (JSON)");
  cmd->add_option("--preset", s.preset, "Named preset, see preset-list");
  cmd->add_option("--m", s.args.m, "Preset size (m, or N_e for rows 5 and 8)");
  cmd->add_option("--N", s.args.N, "Cat component count");
  cmd->add_option("--g", s.args.g, "Coupling for cat and bell presets")->each([&s](const std::string&) {
    s.args.has_g = true;
  });
  cmd->add_option("--k", s.args.k, "Cat order, or Bell residue");
  cmd->add_option("--db", s.args.db, "Bell input squeezing in dB");
  cmd->add_option("--engine", s.engine, "analytic, ladder or fourier");
  cmd->add_option("--cutoff", s.cutoff, "Fixed Fock cutoff");
  cmd->add_option("--seed", s.seed, "RNG seed for jitter sampling");
}

json source_document(const Source& s) {
  if (!s.config.empty() && !s.preset.empty()) throw ConfigError("give either --config or --preset");
  json doc;
  if (!s.config.empty()) {
    std::ifstream in(s.config);
    if (!in) throw ConfigError("cannot open config " + s.config);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config " + s.config + ": " + e.what());
    }
  } else if (!s.preset.empty()) {
    doc = preset_from_cli(s.preset, s.args);
  } else {
    doc = json::object();
  }
  if (!doc.is_object()) throw ConfigError("config: expected an object");
  if (!s.engine.empty()) doc["engine"] = s.engine;
  if (s.cutoff) doc["cutoff_policy"] = {{"mode", "fixed"}, {"cutoff", *s.cutoff}};
  if (s.seed) doc["seed"] = *s.seed;
  return doc;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kBadConfig;
  if (dynamic_cast<const UnconvergedError*>(&e)) return kUnconverged;
  if (dynamic_cast<const ZeroProbabilityError*>(&e)) return kZeroProbability;
  if (dynamic_cast<const json::exception*>(&e)) return kBadConfig;
  return kInternal;
}

std::string error_class(int code) {
  switch (code) {
    case kBadConfig: return "config";
    case kUnconverged: return "unconverged";
    case kZeroProbability: return "zero_probability";
    default: return "internal";
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Full report for one config document; throws on failure.
json run_document(const json& doc) {
  const RunConfig rc = parse_config(doc);
  const Outcome outcome = run_protocol(rc.protocol);
  const MetricsBundle metrics = evaluate_metrics(outcome, rc.protocol);
  json report = run_report(rc, outcome, metrics);
  if (!rc.jitter.is_null()) {
    const JitterResult jr = jitter_robustness(rc.protocol, rc.jitter["delta_g"].get<double>(),
                                              rc.jitter["samples"].get<int>(), rc.seed);
    report["robustness"] = {{"delta_g", rc.jitter["delta_g"]}, {"samples", jr.samples},
                            {"seed", rc.seed}, {"mean_fidelity", jr.mean}, {"stddev", jr.stddev}};
  }
  return report;
}

int report_failure(const std::exception& e, const std::string& out) {
  const int code = exit_code(e);
  std::fprintf(stderr, "gkpforge: %s\n", e.what());
  if (!out.empty() && out != "-") {
    try {
      write_text(out, dump(error_report(error_class(code), e.what())));
    } catch (const std::exception&) {
    }
  }
  return code;
}

// Commands -----------------------------------------------------------------------

int cmd_run(const Source& src, const std::string& out) {
  try {
    const auto t0 = std::chrono::steady_clock::now();
    json report = run_document(source_document(src));
    report["timing"] = {{"seconds", seconds_since(t0)}};
    write_text(out, dump(report));
    return kOk;
  } catch (const std::exception& e) {
    return report_failure(e, out);
  }
}

int worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GKPFORGE_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string csv_quote(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

int cmd_sweep(const Source& src, const std::string& axis, const std::string& values_spec,
              const std::string& out, const std::string& report_path) {
  json base;
  std::vector<double> values;
  try {
    base = source_document(src);
    values = parse_axis_values(values_spec);
    parse_config(with_parameter(parse_config(base).document, axis, values.front()));
  } catch (const std::exception& e) {
    return report_failure(e, report_path);
  }
  const json canonical = parse_config(base).document;

  std::vector<json> points(values.size());
  std::vector<int> codes(values.size(), kOk);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < values.size(); i = next++) {
      try {
        points[i] = run_document(with_parameter(canonical, axis, values[i]));
      } catch (const std::exception& e) {
        codes[i] = exit_code(e);
        points[i] = {{"error", {{"class", error_class(codes[i])}, {"message", e.what()}}}};
      }
    }
  };
  const auto t0 = std::chrono::steady_clock::now();
  const int workers = worker_count(values.size());
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::string csv = "value,status,probability,cutoff,squeezing_min_db,squeezing_max_db,fidelity,reference,"
                    "max_norm_leak,error\n";
  json rows = json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const json& r = points[i];
    csv += csv_number(values[i]) + ",";
    if (codes[i] != kOk) {
      csv += error_class(codes[i]) + ",,,,,,,," + csv_quote(r["error"]["message"].get<std::string>()) + "\n";
    } else {
      double lo = INFINITY, hi = -INFINITY;
      for (const auto& s : r["metrics"]["squeezing_db"]) {
        lo = std::min(lo, s["db"].get<double>());
        hi = std::max(hi, s["db"].get<double>());
      }
      // The target reference when it was evaluated, otherwise the best one.
      std::string fid, label;
      const json* pick = nullptr;
      for (const auto& f : r["metrics"]["fidelities"]) {
        if (f["reference"] == r["protocol"]["target"]) {
          pick = &f;
          break;
        }
        if (!pick || f["value"].get<double>() > (*pick)["value"].get<double>()) pick = &f;
      }
      if (pick) {
        fid = csv_number((*pick)["value"].get<double>());
        label = (*pick)["reference"].get<std::string>();
      }
      csv += "ok," + csv_number(r["outcome"]["probability"].get<double>()) + "," +
             std::to_string(r["provenance"]["cutoff"].get<int>()) + "," +
             (std::isfinite(lo) ? csv_number(lo) : "") + "," + (std::isfinite(hi) ? csv_number(hi) : "") + "," +
             fid + "," + csv_quote(label) + "," + csv_number(r["provenance"]["max_norm_leak"].get<double>()) +
             ",\n";
    }
    rows.push_back({{"value", values[i]}, {"result", r}});
  }
  json report = {{"schema_version", kSweepSchema}, {"version", kVersion}, {"config", canonical},
                 {"axis", axis},  {"values", values},     {"points", rows}};
  report["timing"] = {{"seconds", seconds_since(t0)}, {"workers", workers}};
  try {
    write_text(out, csv);
    if (!report_path.empty()) write_text(report_path, dump(report));
  } catch (const std::exception& e) {
    return report_failure(e, "");
  }
  const bool any_failed = std::any_of(codes.begin(), codes.end(), [](int c) { return c != kOk; });
  if (any_failed) std::fprintf(stderr, "gkpforge: some sweep points failed, see the error column\n");
  return kOk;
}

int cmd_wigner(const Source& src, const GridSpec& grid, const std::string& out) {
  try {
    if (out.empty() || out == "-") throw ConfigError("wigner needs --out for the CSV and its sidecar");
    if (grid.nx < 1 || grid.np < 1 || grid.x_max < grid.x_min || grid.p_max < grid.p_min) {
      throw ConfigError("bad Wigner grid");
    }
    const RunConfig rc = parse_config(source_document(src));
    const Outcome o = run_protocol(rc.protocol);
    if (o.modes != 1) throw ConfigError("wigner needs a single-mode protocol");

    WignerGrid w;
    for (const auto& [weight, v] : o.ensemble) {
      PhotonState s;
      s.amplitudes = v;
      WignerGrid part = wigner(s, grid);
      if (w.values.size() == 0) {
        w = part;
        w.values *= weight;
      } else {
        w.values += weight * part.values;
      }
    }

    std::string text = "p\\x";
    char buf[40];
    for (double x : w.x) {
      std::snprintf(buf, sizeof buf, ",%.17e", x);
      text += buf;
    }
    text += "\n";
    for (std::size_t i = 0; i < w.p.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17e", w.p[i]);
      text += buf;
      for (std::size_t j = 0; j < w.x.size(); ++j) {
        std::snprintf(buf, sizeof buf, ",%.17e", w.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        text += buf;
      }
      text += "\n";
    }
    write_text(out, text);

    json warnings = json::array();
    const double integral = w.integral();
    if (grid.nx > 1 && grid.np > 1 && std::abs(integral - 1.0) > 1e-2) {
      warnings.push_back("grid integral " + csv_number(integral) + " differs from 1; widen or refine the grid");
    }
    if (o.mixed()) warnings.push_back("mixed outcome: weighted sum over " + std::to_string(o.ensemble.size()) + " components");
    for (const auto& d : o.diagnostics) warnings.push_back(d);
    write_text(out + ".warnings.json",
               dump({{"schema_version", kReportSchema}, {"integral", integral}, {"warnings", warnings},
                     {"probability", o.probability}, {"cutoff", o.cutoff}}));
    return kOk;
  } catch (const std::exception& e) {
    return report_failure(e, "");
  }
}

int cmd_validate(const std::string& tier, const std::vector<std::string>& faults, const std::vector<int>& only,
                 const std::string& out) {
  ValidationOptions options;
  if (tier == "extended") {
    options.tier = Tier::kExtended;
  } else if (tier != "default") {
    std::fprintf(stderr, "gkpforge: --tier must be default or extended\n");
    return kBadConfig;
  }
  const auto names = fault_names();
  for (const auto& f : faults) {
    const auto eq = f.find('=');
    const std::string name = f.substr(0, eq);
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      std::fprintf(stderr, "gkpforge: unknown fault '%s'\n", name.c_str());
      return kBadConfig;
    }
    try {
      options.faults[name] = eq == std::string::npos ? 1.0 : std::stod(f.substr(eq + 1));
    } catch (const std::exception&) {
      std::fprintf(stderr, "gkpforge: bad fault value in '%s'\n", f.c_str());
      return kBadConfig;
    }
  }
  options.only = only;
  options.on_result = [](const CheckResult& r) {
    std::printf("%s\n", format_result(r).c_str());
    for (const auto& d : r.details) std::printf("       %s\n", d.c_str());
    std::fflush(stdout);
  };
  const auto results = run_validation(options);
  if (!out.empty()) {
    json arr = json::array();
    for (const auto& r : results) {
      arr.push_back({{"criterion", r.criterion}, {"name", r.name}, {"passed", r.passed},
                     {"diagnostic", r.diagnostic}, {"measured", r.measured}, {"expected", r.expected},
                     {"details", r.details}});
    }
    write_text(out, dump({{"schema_version", kReportSchema}, {"version", kVersion}, {"tier", tier},
                          {"faults", options.faults}, {"results", arr}, {"passed", all_passed(results)}}));
  }
  return all_passed(results) ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gkpforge: GKP state preparation by free-electron scattering"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Source run_src;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Run one protocol and write a JSON report");
  add_source_options(run, run_src);
  run->add_option("--out", run_out, "Report path (default stdout)");

  Source sweep_src;
  std::string axis, values, sweep_out, sweep_report;
  auto* sweep = app.add_subcommand("sweep", "Run a protocol over a list of parameter values");
  add_source_options(sweep, sweep_src);
  sweep->add_option("--axis", axis, "JSON pointer or alias (size, r, sigma, delta, db, cutoff)")->required();
  sweep->add_option("--values", values, "Comma list or start:stop:step")->required();
  sweep->add_option("--out", sweep_out, "CSV path (default stdout)");
  sweep->add_option("--report", sweep_report, "Full JSON report path");

  Source w_src;
  GridSpec grid;
  std::string w_out;
  auto* wig = app.add_subcommand("wigner", "Sample the output Wigner function on a grid");
  add_source_options(wig, w_src);
  wig->add_option("--x-min", grid.x_min);
  wig->add_option("--x-max", grid.x_max);
  wig->add_option("--p-min", grid.p_min);
  wig->add_option("--p-max", grid.p_max);
  wig->add_option("--nx", grid.nx);
  wig->add_option("--np", grid.np);
  wig->add_option("--out", w_out, "CSV path; warnings go to <out>.warnings.json")->required();

  std::string tier = "default", v_out;
  std::vector<std::string> faults;
  std::vector<int> only;
  auto* val = app.add_subcommand("validate", "Run the acceptance checks");
  val->add_option("--tier", tier, "default or extended");
  val->add_option("--fault", faults, "Inject name=value into one check");
  val->add_option("--only", only, "Criterion numbers to run")->delimiter(',');
  val->add_option("--out", v_out, "JSON summary path");

  auto* list = app.add_subcommand("preset-list", "List named presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadConfig;
  }

  try {
    if (*run) return cmd_run(run_src, run_out);
    if (*sweep) return cmd_sweep(sweep_src, axis, values, sweep_out, sweep_report);
    if (*wig) return cmd_wigner(w_src, grid, w_out);
    if (*val) return cmd_validate(tier, faults, only, v_out);
    if (*list) {
      for (const auto& p : preset_list()) std::printf("%-12s  %s\n", p.name.c_str(), p.description.c_str());
      return kOk;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gkpforge: %s\n", e.what());
    return kInternal;
  }
  return kOk;
}
