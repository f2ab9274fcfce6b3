#include "gkpforge/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace gkpforge {

namespace {

const double kQ = std::sqrt(kPi / 2.0);

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError((path.empty() ? std::string("config") : path) + ": " + what);
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) fail(path + "/" + key, "unknown field");
  }
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "not finite");
  return v;
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

template <typename F>
auto optional_field(const json& j, const char* key, const std::string& path, F&& read,
                    decltype(read(json(), std::string())) fallback) {
  return j.contains(key) ? read(j.at(key), path + "/" + key) : fallback;
}

double opt_number(const json& j, const char* key, const std::string& path, double fallback) {
  return optional_field(j, key, path, number, fallback);
}

int opt_integer(const json& j, const char* key, const std::string& path, int fallback) {
  return optional_field(j, key, path, integer, fallback);
}

std::string opt_string(const json& j, const char* key, const std::string& path, std::string fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) fail(path + "/" + key, "expected a string");
  return j.at(key).get<std::string>();
}

/// number, [re, im], {"re", "im"} or {"abs", "phase"}.
cplx complex_value(const json& j, const std::string& path) {
  if (j.is_number()) return number(j, path);
  if (j.is_array()) {
    if (j.size() != 2) fail(path, "complex arrays are [re, im]");
    return {number(j[0], path + "/0"), number(j[1], path + "/1")};
  }
  if (j.is_object()) {
    if (j.contains("abs") || j.contains("phase")) {
      check_keys(j, {"abs", "phase"}, path);
      return std::polar(opt_number(j, "abs", path, 0.0), opt_number(j, "phase", path, 0.0));
    }
    check_keys(j, {"re", "im"}, path);
    return {opt_number(j, "re", path, 0.0), opt_number(j, "im", path, 0.0)};
  }
  fail(path, "expected a complex number");
}

json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

Engine engine_from(const std::string& s, const std::string& path) {
  if (s == "analytic") return Engine::kAnalytic;
  if (s == "ladder") return Engine::kLadder;
  if (s == "fourier") return Engine::kFourier;
  fail(path, "engine must be analytic, ladder or fourier");
}

// Initial state ------------------------------------------------------------------

InitialState parse_initial(const json& j, const std::string& path) {
  InitialState init;
  const std::string kind = opt_string(j, "kind", path, "vacuum");
  if (kind == "vacuum") {
    check_keys(j, {"kind"}, path);
  } else if (kind == "squeezed") {
    check_keys(j, {"kind", "r", "theta"}, path);
    init.kind = InitialKind::kSqueezed;
    init.squeeze = {opt_number(j, "r", path, 0.0), opt_number(j, "theta", path, 0.0)};
    if (init.squeeze.r < 0.0) fail(path + "/r", "must be >= 0");
  } else if (kind == "square_gkp") {
    check_keys(j, {"kind", "logical", "delta", "db"}, path);
    init.kind = InitialKind::kSquareGkp;
    init.logical = opt_integer(j, "logical", path, 0);
    if (init.logical != 0 && init.logical != 1) fail(path + "/logical", "must be 0 or 1");
    if (j.contains("db") && j.contains("delta")) fail(path, "give either delta or db");
    init.delta = j.contains("db") ? std::pow(10.0, -number(j.at("db"), path + "/db") / 20.0)
                                  : opt_number(j, "delta", path, 0.3);
    if (!(init.delta > 0.0)) fail(path + "/delta", "must be > 0");
  } else {
    fail(path + "/kind", "must be vacuum, squeezed or square_gkp");
  }
  return init;
}

json initial_json(const InitialState& init) {
  switch (init.kind) {
    case InitialKind::kVacuum: return {{"kind", "vacuum"}};
    case InitialKind::kSqueezed:
      return {{"kind", "squeezed"}, {"r", init.squeeze.r}, {"theta", init.squeeze.theta}};
    case InitialKind::kSquareGkp:
      return {{"kind", "square_gkp"}, {"logical", init.logical}, {"delta", init.delta}};
  }
  return nullptr;
}

// Steps --------------------------------------------------------------------------

/// Applies the fields present in `j` to `comb`.
void parse_comb(const json& j, const std::string& path, CombSpec& comb) {
  check_keys(j, {"spacing", "envelope", "sigma", "shift", "window", "dispersion"}, path);
  comb.spacing = opt_integer(j, "spacing", path, comb.spacing);
  if (comb.spacing < 1) fail(path + "/spacing", "must be >= 1");
  const std::string env = opt_string(j, "envelope", path, comb.ideal() ? "ideal" : "gaussian");
  if (env == "ideal") {
    comb.envelope = EnvelopeKind::kIdeal;
  } else if (env == "gaussian") {
    comb.envelope = EnvelopeKind::kGaussian;
  } else {
    fail(path + "/envelope", "must be ideal or gaussian");
  }
  comb.sigma = opt_number(j, "sigma", path, comb.sigma);
  comb.shift = opt_integer(j, "shift", path, comb.shift);
  comb.window = opt_integer(j, "window", path, comb.window);
  if (comb.window < 0) fail(path + "/window", "must be >= 0");
  if (j.contains("dispersion")) {
    const json& d = j.at("dispersion");
    const std::string dp = path + "/dispersion";
    check_keys(d, {"beta", "z", "kinetic_energy_ev", "photon_energy_ev"}, dp);
    if (d.contains("beta") && (d.contains("kinetic_energy_ev") || d.contains("photon_energy_ev"))) {
      fail(dp, "give either beta or the electron and photon energies");
    }
    if (d.contains("beta")) {
      comb.dispersion_beta = number(d.at("beta"), dp + "/beta");
    } else {
      DispersionParams params;
      params.kinetic_energy_ev = opt_number(d, "kinetic_energy_ev", dp, params.kinetic_energy_ev);
      params.photon_energy_ev = opt_number(d, "photon_energy_ev", dp, params.photon_energy_ev);
      comb.dispersion_beta = dispersion_beta(params);
    }
    comb.dispersion_z = opt_number(d, "z", dp, 0.0);
  }
}

json comb_json(const CombSpec& c) {
  json j = {{"spacing", c.spacing}, {"envelope", c.ideal() ? "ideal" : "gaussian"}, {"shift", c.shift},
            {"window", c.window}};
  if (!c.ideal()) j["sigma"] = c.sigma;
  if (c.dispersion_beta != 0.0 || c.dispersion_z != 0.0) {
    j["dispersion"] = {{"beta", c.dispersion_beta}, {"z", c.dispersion_z}};
  }
  return j;
}

PostSelection parse_post(const json& j, const std::string& path, int spacing) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "even") return PostSelection::parity(false);
    if (s == "odd") return PostSelection::parity(true);
    fail(path, "shorthand must be even or odd");
  }
  const std::string rule = opt_string(j, "rule", path, "residue");
  if (rule == "residue") {
    check_keys(j, {"rule", "k", "modulus"}, path);
    const int modulus = opt_integer(j, "modulus", path, spacing);
    const int k = opt_integer(j, "k", path, 0);
    if (modulus < 1 || k < 0 || k >= modulus) fail(path, "residue needs 0 <= k < modulus");
    return PostSelection::residue(k, modulus);
  }
  if (rule == "parity") {
    check_keys(j, {"rule", "odd"}, path);
    if (j.contains("odd") && !j.at("odd").is_boolean()) fail(path + "/odd", "expected a boolean");
    return PostSelection::parity(j.value("odd", false));
  }
  if (rule == "exact") {
    check_keys(j, {"rule", "n"}, path);
    return PostSelection::exact(opt_integer(j, "n", path, 0));
  }
  fail(path + "/rule", "must be residue, parity or exact");
}

json post_json(const PostSelection& p) {
  switch (p.rule) {
    case PostSelection::Rule::kResidue: return {{"rule", "residue"}, {"k", p.k}, {"modulus", p.modulus}};
    case PostSelection::Rule::kParity: return {{"rule", "parity"}, {"odd", p.k == 1}};
    case PostSelection::Rule::kExact: return {{"rule", "exact"}, {"n", p.k}};
  }
  return nullptr;
}

json step_json(const InteractionStep& s, int repeat) {
  json j = {{"g", complex_json(s.g)}, {"comb", comb_json(s.comb)}, {"post", post_json(s.post)},
            {"repeat", repeat}};
  if (s.g2 != 0.0) j["g2"] = complex_json(s.g2);
  return j;
}

bool same_step(const InteractionStep& a, const InteractionStep& b) {
  return step_json(a, 1) == step_json(b, 1);
}

json steps_json(const std::vector<InteractionStep>& steps) {
  json out = json::array();
  for (std::size_t i = 0; i < steps.size();) {
    std::size_t j = i + 1;
    while (j < steps.size() && same_step(steps[i], steps[j])) ++j;
    out.push_back(step_json(steps[i], static_cast<int>(j - i)));
    i = j;
  }
  return out;
}

std::vector<InteractionStep> parse_steps(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  std::vector<InteractionStep> steps;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string sp = path + "/" + std::to_string(i);
    const json& e = j[i];
    check_keys(e, {"g", "g2", "comb", "post", "repeat"}, sp);
    if (!e.contains("g")) fail(sp + "/g", "required");
    InteractionStep s;
    s.g = complex_value(e.at("g"), sp + "/g");
    if (e.contains("g2")) s.g2 = complex_value(e.at("g2"), sp + "/g2");
    if (e.contains("comb")) parse_comb(e.at("comb"), sp + "/comb", s.comb);
    s.post = e.contains("post") ? parse_post(e.at("post"), sp + "/post", s.comb.spacing)
                                : PostSelection::residue(0, s.comb.spacing);
    const int repeat = opt_integer(e, "repeat", sp, 1);
    if (repeat < 0) fail(sp + "/repeat", "must be >= 0");
    steps.insert(steps.end(), repeat, s);
  }
  return steps;
}

// Presets ------------------------------------------------------------------------

/// Builds the preset protocol and returns its canonical argument object.
Protocol build_preset(const json& j, const std::string& path, json& canonical) {
  const std::string name = opt_string(j, "name", path, "");
  if (name == "table1") {
    check_keys(j, {"name", "row", "size"}, path);
    const int row = opt_integer(j, "row", path, 0), size = opt_integer(j, "size", path, 1);
    canonical = {{"name", name}, {"row", row}, {"size", size}};
    return table1_preset(row, size);
  }
  if (name == "cat") {
    check_keys(j, {"name", "N", "g", "k"}, path);
    const int N = opt_integer(j, "N", path, 2), k = opt_integer(j, "k", path, 0);
    const cplx g = j.contains("g") ? complex_value(j.at("g"), path + "/g") : cplx(kQ);
    canonical = {{"name", name}, {"N", N}, {"g", complex_json(g)}, {"k", k}};
    return cat_preset(N, g, k);
  }
  if (name == "bell") {
    check_keys(j, {"name", "g1", "g2", "db", "residue"}, path);
    const cplx g1 = j.contains("g1") ? complex_value(j.at("g1"), path + "/g1") : cplx(kQ);
    const cplx g2 = j.contains("g2") ? complex_value(j.at("g2"), path + "/g2") : cplx(kQ);
    const double db = opt_number(j, "db", path, 10.0);
    const int residue = opt_integer(j, "residue", path, 0);
    canonical = {{"name", name}, {"g1", complex_json(g1)}, {"g2", complex_json(g2)}, {"db", db},
                 {"residue", residue}};
    return bell_preset(g1, g2, db, residue);
  }
  fail(path + "/name", "must be table1, cat or bell");
}

void check_target(const std::string& t, const std::string& path) {
  if (t.empty() || t == "bell") return;
  if (t.rfind("cat:", 0) == 0) {
    int N = 0, k = 0;
    char tail = 0;
    if (std::sscanf(t.c_str(), "cat:%d:%d%c", &N, &k, &tail) != 2 || N < 1 || k < 0 || k >= N) {
      fail(path, "cat targets read cat:N:k");
    }
    return;
  }
  try {
    GKPReference::parse(t);
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
}

}  // namespace

RunConfig parse_config(const json& doc) {
  check_keys(doc, {"schema_version", "name", "preset", "initial", "modes", "steps", "comb_override", "engine",
                   "cutoff_policy", "leak_tolerance", "theta_samples", "g_max", "ensemble_drop", "target",
                   "seed", "jitter"},
             "");
  try {
    const std::string schema = opt_string(doc, "schema_version", "", kConfigSchema);
    if (schema != kConfigSchema) fail("/schema_version", "unsupported, expected " + std::string(kConfigSchema));

    RunConfig rc;
    Protocol& p = rc.protocol;
    json& out = rc.document;
    out["schema_version"] = kConfigSchema;

    if (doc.contains("preset")) {
      if (doc.contains("steps")) fail("/steps", "a preset already defines the steps");
      json canonical;
      p = build_preset(doc.at("preset"), "/preset", canonical);
      out["preset"] = canonical;
    } else {
      p.steps = doc.contains("steps") ? parse_steps(doc.at("steps"), "/steps") : std::vector<InteractionStep>{};
      p.modes = opt_integer(doc, "modes", "", 1);
    }
    if (doc.contains("modes") && opt_integer(doc, "modes", "", p.modes) != p.modes) {
      fail("/modes", "does not match the preset");
    }
    if (p.modes != 1 && p.modes != 2) fail("/modes", "must be 1 or 2");
    if (doc.contains("initial")) p.initial = parse_initial(doc.at("initial"), "/initial");
    if (doc.contains("comb_override")) {
      for (auto& s : p.steps) parse_comb(doc.at("comb_override"), "/comb_override", s.comb);
      out["comb_override"] = doc.at("comb_override");
    }
    p.name = opt_string(doc, "name", "", p.name);
    p.engine = engine_from(opt_string(doc, "engine", "", engine_name(p.engine)), "/engine");
    if (doc.contains("cutoff_policy")) {
      const json& c = doc.at("cutoff_policy");
      check_keys(c, {"mode", "cutoff"}, "/cutoff_policy");
      const std::string mode = opt_string(c, "mode", "/cutoff_policy", "auto");
      if (mode == "auto") {
        if (c.contains("cutoff")) fail("/cutoff_policy/cutoff", "only valid with mode fixed");
        p.cutoff_policy = {true, 0};
      } else if (mode == "fixed") {
        p.cutoff_policy = {false, opt_integer(c, "cutoff", "/cutoff_policy", 0)};
        if (p.cutoff_policy.cutoff < 1) fail("/cutoff_policy/cutoff", "must be >= 1");
      } else {
        fail("/cutoff_policy/mode", "must be auto or fixed");
      }
    }
    p.leak_tolerance = opt_number(doc, "leak_tolerance", "", p.leak_tolerance);
    p.theta_samples = opt_integer(doc, "theta_samples", "", p.theta_samples);
    p.g_max = opt_number(doc, "g_max", "", p.g_max);
    p.ensemble_drop = opt_number(doc, "ensemble_drop", "", p.ensemble_drop);
    if (!(p.leak_tolerance > 0.0)) fail("/leak_tolerance", "must be > 0");
    if (p.theta_samples < 0) fail("/theta_samples", "must be >= 0");
    if (!(p.ensemble_drop >= 0.0)) fail("/ensemble_drop", "must be >= 0");
    p.target = opt_string(doc, "target", "", p.target);
    check_target(p.target, "/target");
    if (doc.contains("seed")) {
      if (!doc.at("seed").is_number_unsigned()) fail("/seed", "expected a non-negative integer");
      rc.seed = doc.at("seed").get<std::uint64_t>();
    }
    if (doc.contains("jitter")) {
      const json& jt = doc.at("jitter");
      check_keys(jt, {"delta_g", "samples"}, "/jitter");
      const double dg = opt_number(jt, "delta_g", "/jitter", 0.0);
      const int samples = opt_integer(jt, "samples", "/jitter", 100);
      if (dg < 0.0 || samples < 1) fail("/jitter", "needs delta_g >= 0 and samples >= 1");
      rc.jitter = {{"delta_g", dg}, {"samples", samples}};
      out["jitter"] = rc.jitter;
    }

    // Preset-derived fields are echoed only when overridden, so that editing
    // the preset arguments (as a sweep does) re-derives them.
    const bool explicit_steps = !doc.contains("preset");
    if (explicit_steps || doc.contains("name")) out["name"] = p.name;
    if (explicit_steps || doc.contains("initial")) out["initial"] = initial_json(p.initial);
    if (explicit_steps || doc.contains("modes")) out["modes"] = p.modes;
    if (explicit_steps) out["steps"] = steps_json(p.steps);
    out["engine"] = engine_name(p.engine);
    out["cutoff_policy"] = p.cutoff_policy.automatic
                               ? json{{"mode", "auto"}}
                               : json{{"mode", "fixed"}, {"cutoff", p.cutoff_policy.cutoff}};
    out["leak_tolerance"] = p.leak_tolerance;
    out["theta_samples"] = p.theta_samples;
    out["g_max"] = p.g_max;
    out["ensemble_drop"] = p.ensemble_drop;
    if (explicit_steps || doc.contains("target")) out["target"] = p.target;
    out["seed"] = rc.seed;
    return rc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return parse_config(doc);
}

json preset_document(const std::string& name, const json& args) {
  json preset = args.is_object() ? args : json::object();
  preset["name"] = name;
  return {{"schema_version", kConfigSchema}, {"preset", preset}};
}

json preset_from_cli(const std::string& preset, const PresetArgs& a) {
  int row = 0;
  char tail = 0;
  if (std::sscanf(preset.c_str(), "table1-row%d%c", &row, &tail) == 1) {
    return preset_document("table1", {{"row", row}, {"size", a.m}});
  }
  if (preset == "cat") {
    return preset_document("cat", {{"N", a.N}, {"g", a.has_g ? a.g : kQ}, {"k", a.k}});
  }
  if (preset == "bell") {
    const double g = a.has_g ? a.g : kQ;
    return preset_document("bell", {{"g1", g}, {"g2", g}, {"db", a.db}, {"residue", a.k}});
  }
  throw ConfigError("unknown preset '" + preset + "' (see preset-list)");
}

std::vector<PresetInfo> preset_list() {
  return {
      {"table1-row1", "square GKP |0>, vacuum seed; 2m steps at sqrt(pi/2)/2 on each axis; --m"},
      {"table1-row2", "square GKP |0>/|1> by parity of m; 4m steps at i sqrt(pi/8), m at sqrt(pi/2); --m"},
      {"table1-row3", "square |H> magic state; m steps at i sqrt(pi/2), m at sqrt(pi/2); --m"},
      {"table1-row4", "square |->; 4m even on p, 2m even and 2m odd on x at sqrt(pi/2)/4; --m"},
      {"table1-row5", "square GKP from S(1.1513, 0); N_e even steps at sqrt(pi/2); --m is N_e"},
      {"table1-row6", "hexagonal GKP |0>; 2m steps on two lattice directions; --m"},
      {"table1-row7", "hexagonal |T> magic state; m steps on each of three directions; --m"},
      {"table1-row8", "hexagonal GKP from S(1.64, pi/6); N_e steps; --m is N_e"},
      {"cat", "N-component cat of order k at coupling g; --N --g --k"},
      {"bell", "two-mode GKP Bell pair from a comb_4 electron; --g --db (input squeezing) --k (residue)"},
  };
}

json protocol_to_json(const Protocol& p) {
  return {{"name", p.name},
          {"initial", initial_json(p.initial)},
          {"modes", p.modes},
          {"steps", steps_json(p.steps)},
          {"electrons", p.steps.size()},
          {"engine", engine_name(p.engine)},
          {"target", p.target}};
}

json physics_defaults(const Protocol& p) {
  const PeakFitConfig peaks;
  return {
      {"cutoff", {{"policy", p.cutoff_policy.automatic ? "auto" : "fixed"},
                  {"resolved", resolve_cutoff(p)},
                  {"auto_rule", "ceil(A + 6 sqrt(A) + 10), A = (sum |g| + seed amplitude)^2"}}},
      {"leak_tolerance", p.leak_tolerance},
      {"g_max", p.g_max},
      {"ensemble_drop", p.ensemble_drop},
      {"theta_samples", {{"requested", p.theta_samples}, {"floor", "8 (2W + 1), raised to alias-free"}}},
      {"comb_window", "ideal: ring of the comb spacing; gaussian: max(N, ceil(7 sigma)), grown by the cutoff"},
      {"zero_probability_threshold", 1e-20},
      {"peak_fit",
       {{"grid_spacing", peaks.spacing}, {"threshold", peaks.threshold}, {"extent_margin", peaks.extent_margin}}},
      {"fidelity_delta_range", {0.05, 1.0}},
  };
}

json metrics_to_json(const MetricsBundle& m) {
  json squeezing = json::array(), peaks = json::array(), fids = json::array();
  for (const auto& [axis, db] : m.squeezing_db) squeezing.push_back({{"axis", axis}, {"db", db}});
  for (const auto& f : m.peak_fit) {
    peaks.push_back({{"axis", f.angle}, {"db", f.db}, {"variance", f.variance}, {"centers", f.centers},
                     {"weights", f.weights}});
  }
  for (const auto& f : m.fidelities) {
    fids.push_back({{"reference", f.label}, {"value", f.value},
                    {"delta", f.delta ? json(*f.delta) : json(nullptr)}});
  }
  return {{"squeezing_db", squeezing}, {"peak_fit", peaks}, {"fidelities", fids}, {"warnings", m.warnings}};
}

json run_report(const RunConfig& config, const Outcome& o, const MetricsBundle& metrics) {
  return {
      {"schema_version", kReportSchema},
      {"version", kVersion},
      {"config", config.document},
      {"protocol", protocol_to_json(config.protocol)},
      {"physics_defaults", physics_defaults(config.protocol)},
      {"outcome",
       {{"probability", o.probability},
        {"step_probabilities", o.step_probabilities},
        {"modes", o.modes},
        {"mixed", o.mixed()},
        {"purity", o.purity()},
        {"components", o.ensemble.size()}}},
      {"metrics", metrics_to_json(metrics)},
      {"provenance",
       {{"engine", engine_name(config.protocol.engine)},
        {"cutoff", o.cutoff},
        {"max_norm_leak", o.max_norm_leak},
        {"max_ladder_rows", o.max_ladder_rows},
        {"theta_samples_used", o.theta_samples_used},
        {"diagnostics", o.diagnostics}}},
  };
}

json error_report(const std::string& error_class, const std::string& message) {
  return {{"schema_version", kReportSchema},
          {"version", kVersion},
          {"error", {{"class", error_class}, {"message", message}}}};
}

json with_parameter(const json& doc, const std::string& axis, double value) {
  json out = doc;
  std::string pointer = axis;
  if (axis == "size" || axis == "m") pointer = "/preset/size";
  else if (axis == "row") pointer = "/preset/row";
  else if (axis == "r") pointer = "/initial/r";
  else if (axis == "delta") pointer = "/initial/delta";
  else if (axis == "db") pointer = "/preset/db";
  else if (axis == "cutoff") {
    out["cutoff_policy"] = {{"mode", "fixed"}, {"cutoff", std::lround(value)}};
    return out;
  } else if (axis == "sigma") {
    if (!out.contains("comb_override")) out["comb_override"] = json::object();
    out["comb_override"]["envelope"] = "gaussian";
    pointer = "/comb_override/sigma";
    out["comb_override"]["sigma"] = 0.0;
  }
  if (pointer.empty() || pointer[0] != '/') throw ConfigError("unknown sweep axis '" + axis + "'");
  if (pointer.rfind("/initial/", 0) == 0 && !out.contains("initial")) {
    out["initial"] = initial_json(parse_config(out).protocol.initial);
  }
  const json::json_pointer ptr(pointer);
  if (!out.contains(ptr)) throw ConfigError("sweep axis " + pointer + " is not in the config");
  json& slot = out[ptr];
  if (slot.is_number_integer()) {
    if (std::abs(value - std::round(value)) > 1e-12) throw ConfigError("sweep axis " + pointer + " takes integers");
    slot = std::lround(value);
  } else if (slot.is_number()) {
    slot = value;
  } else {
    throw ConfigError("sweep axis " + pointer + " is not numeric");
  }
  return out;
}

std::vector<double> parse_axis_values(const std::string& spec) {
  std::vector<double> values;
  auto to_double = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) throw ConfigError("bad axis value '" + s + "'");
    return v;
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(to_double(item));
    if (parts.size() != 3 || parts[2] <= 0.0 || parts[1] < parts[0]) {
      throw ConfigError("axis ranges read start:stop:step with step > 0");
    }
    const long n = std::lround(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (long i = 0; i <= n; ++i) values.push_back(parts[0] + static_cast<double>(i) * parts[2]);
  } else {
    std::stringstream ss(spec);
    for (std::string item; std::getline(ss, item, ',');) values.push_back(to_double(item));
  }
  if (values.empty()) throw ConfigError("empty axis");
  return values;
}

}  // namespace gkpforge
