#include "occlab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "occlab/error.hpp"

namespace occlab {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_keys(const json& node, const std::set<std::string>& allowed,
                const std::string& path) {
  if (!node.is_object()) fail(path.empty() ? "config" : path, "expected an object");
  for (const auto& [key, value] : node.items()) {
    if (!allowed.count(key)) {
      std::string list;
      for (const auto& k : allowed) list += (list.empty() ? "" : ", ") + k;
      fail(join(path, key), "unknown key (allowed: " + list + ")");
    }
  }
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

std::size_t as_size(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer()) fail(path, "must be nonnegative");
  fail(path, "expected an integer");
}

std::vector<double> as_doubles(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_double(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::size_t> as_sizes(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_size(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

double get_double(const json& node, const std::string& key, const std::string& path,
                  double fallback) {
  return node.contains(key) ? as_double(node.at(key), join(path, key)) : fallback;
}

std::string get_string(const json& node, const std::string& key, const std::string& path) {
  const auto& v = node.at(key);
  if (!v.is_string()) fail(join(path, key), "expected a string");
  return v.get<std::string>();
}

JumpLaw jumps_from_json(const json& node, const std::string& path) {
  check_keys(node, {"law", "mean", "stddev", "size"}, path);
  const std::string law = node.contains("law") ? get_string(node, "law", path) : "gaussian";
  if (law == "gaussian") {
    if (node.contains("size")) fail(join(path, "size"), "not used by the gaussian law");
    return GaussianJump{get_double(node, "mean", path, 0.0), get_double(node, "stddev", path, 1.0)};
  }
  if (node.contains("mean") || node.contains("stddev")) {
    fail(path, "mean and stddev are only used by the gaussian law");
  }
  if (law == "point") return PointMassJump{get_double(node, "size", path, 1.0)};
  if (law == "rademacher") return RademacherJump{get_double(node, "size", path, 1.0)};
  fail(join(path, "law"), "unknown jump law '" + law + "' (valid: gaussian, point, rademacher)");
}

InitialLaw initial_from_json(const json& node, const std::string& path) {
  check_keys(node, {"law", "x0", "mean", "covariance"}, path);
  const std::string law = node.contains("law") ? get_string(node, "law", path) : "point";
  if (law == "point") {
    if (node.contains("mean") || node.contains("covariance")) {
      fail(path, "mean and covariance belong to the gaussian law");
    }
    PointLaw p;
    if (node.contains("x0")) p.x0 = as_doubles(node.at("x0"), join(path, "x0"));
    return p;
  }
  if (law == "gaussian") {
    if (node.contains("x0")) fail(join(path, "x0"), "belongs to the point law");
    GaussianLaw g;
    if (node.contains("mean")) g.mean = as_doubles(node.at("mean"), join(path, "mean"));
    if (!node.contains("covariance")) fail(join(path, "covariance"), "missing required key");
    g.covariance = as_doubles(node.at("covariance"), join(path, "covariance"));
    return g;
  }
  fail(join(path, "law"), "unknown initial law '" + law + "' (valid: point, gaussian)");
}

ExperimentKind kind_from_string(const std::string& s, const std::string& path) {
  for (auto k : {ExperimentKind::RateStudy, ExperimentKind::CLTStudy,
                 ExperimentKind::LocalTimeStudy, ExperimentKind::EfficiencyStudy,
                 ExperimentKind::TScalingStudy}) {
    if (to_string(k) == s) return k;
  }
  fail(path, "unknown experiment '" + s +
                 "' (valid: rate-study, clt-study, local-time, efficiency, t-scaling)");
}

}  // namespace

std::string valid_process_kinds() { return "bm, diffusion, fbm, stable, poisson"; }

ProcessSpec process_from_json(const json& node, const std::string& path) {
  json obj = node;
  if (node.is_string()) obj = json{{"kind", node}};
  if (!obj.is_object()) fail(path, "expected an object or a kind name");
  if (!obj.contains("kind")) fail(join(path, "kind"), "missing required key");
  const std::string kind = get_string(obj, "kind", path);

  std::set<std::string> allowed{"kind", "dim", "horizon", "x0", "initial"};
  ProcessSpec spec;
  if (kind == "bm") {
    spec.params = BrownianParams{};
  } else if (kind == "diffusion") {
    allowed.insert({"model", "theta", "sigma", "mean", "drift", "amplitude"});
    const std::string model = obj.contains("model") ? get_string(obj, "model", path) : "ou";
    std::set<std::string> used;
    if (model == "ou") {
      spec.params = ornstein_uhlenbeck(get_double(obj, "theta", path, 1.0),
                                       get_double(obj, "sigma", path, 1.0),
                                       get_double(obj, "mean", path, 0.0));
      used = {"theta", "sigma", "mean"};
    } else if (model == "constant") {
      spec.params = constant_coefficients(get_double(obj, "drift", path, 0.0),
                                          get_double(obj, "sigma", path, 1.0));
      used = {"drift", "sigma"};
    } else if (model == "sine") {
      spec.params = sine_volatility(get_double(obj, "amplitude", path, 0.5));
      used = {"amplitude"};
    } else {
      fail(join(path, "model"), "unknown diffusion model '" + model +
                                    "' (valid: ou, constant, sine)");
    }
    for (const char* k : {"theta", "sigma", "mean", "drift", "amplitude"}) {
      if (obj.contains(k) && !used.count(k)) {
        fail(join(path, k), "not a parameter of the " + model + " model");
      }
    }
  } else if (kind == "fbm") {
    allowed.insert("hurst");
    if (!obj.contains("hurst")) fail(join(path, "hurst"), "missing required key");
    spec.params = FbmParams{get_double(obj, "hurst", path, 0.5)};
  } else if (kind == "stable") {
    allowed.insert({"stability", "scale"});
    if (!obj.contains("stability")) fail(join(path, "stability"), "missing required key");
    spec.params = StableParams{get_double(obj, "stability", path, 2.0),
                               get_double(obj, "scale", path, 0.5)};
  } else if (kind == "poisson") {
    allowed.insert({"rate", "jumps"});
    PoissonParams p;
    p.rate = get_double(obj, "rate", path, 1.0);
    if (obj.contains("jumps")) p.jumps = jumps_from_json(obj.at("jumps"), join(path, "jumps"));
    spec.params = p;
  } else {
    fail(join(path, "kind"),
         "unknown process kind '" + kind + "' (valid kinds: " + valid_process_kinds() + ")");
  }
  check_keys(obj, allowed, path);

  if (obj.contains("dim")) spec.dim = as_size(obj.at("dim"), join(path, "dim"));
  spec.horizon = get_double(obj, "horizon", path, 1.0);
  if (obj.contains("x0") && obj.contains("initial")) {
    fail(path, "give either x0 or initial, not both");
  }
  if (obj.contains("x0")) spec.initial_law = PointLaw{as_doubles(obj.at("x0"), join(path, "x0"))};
  if (obj.contains("initial")) {
    spec.initial_law = initial_from_json(obj.at("initial"), join(path, "initial"));
  }
  try {
    spec.validate();
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return spec;
}

ExperimentConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  check_keys(doc,
             {"experiment", "process", "function", "n_ladder", "replications", "oracle_factor",
              "n_fine", "seed", "drop_smallest", "threads", "sharp_indicator", "level",
              "extra_levels", "rho", "inner_samples", "t_ladder", "fixed_dt", "identity_window"},
             "");
  ExperimentConfig c;
  if (doc.contains("experiment")) {
    c.kind = kind_from_string(get_string(doc, "experiment", ""), "experiment");
  }
  if (!doc.contains("process")) fail("process", "missing required key");
  c.process = process_from_json(doc.at("process"), "process");
  const auto& pnode = doc.at("process");
  c.process_label = pnode.is_string() ? pnode.get<std::string>() : pnode.at("kind").get<std::string>();
  if (c.process_label == "diffusion") {
    c.process_label = std::get<DiffusionParams>(c.process.params).name;
  }

  if (doc.contains("function")) {
    c.function_id = get_string(doc, "function", "");
  } else if (c.kind != ExperimentKind::LocalTimeStudy) {
    fail("function", "missing required key");
  }
  if (doc.contains("n_ladder")) c.n_ladder = as_sizes(doc.at("n_ladder"), "n_ladder");
  if (doc.contains("replications")) c.replications = as_size(doc.at("replications"), "replications");
  if (doc.contains("oracle_factor")) {
    c.oracle_factor = as_size(doc.at("oracle_factor"), "oracle_factor");
  }
  if (doc.contains("n_fine")) c.n_fine = as_size(doc.at("n_fine"), "n_fine");
  if (doc.contains("seed")) {
    const auto& v = doc.at("seed");
    if (!v.is_number_unsigned()) fail("seed", "expected a nonnegative integer");
    c.seed.master_seed = v.get<std::uint64_t>();
  }
  if (doc.contains("drop_smallest")) {
    if (!doc.at("drop_smallest").is_boolean()) fail("drop_smallest", "expected true or false");
    c.drop_smallest = doc.at("drop_smallest").get<bool>();
  }
  if (doc.contains("sharp_indicator")) {
    if (!doc.at("sharp_indicator").is_boolean()) fail("sharp_indicator", "expected true or false");
    c.rate_options.sharp_indicator = doc.at("sharp_indicator").get<bool>();
  }
  if (doc.contains("threads")) c.threads = as_size(doc.at("threads"), "threads");
  c.level = get_double(doc, "level", "", c.level);
  if (doc.contains("extra_levels")) c.extra_levels = as_doubles(doc.at("extra_levels"), "extra_levels");
  c.rho = get_double(doc, "rho", "", c.rho);
  if (doc.contains("inner_samples")) {
    c.inner_samples = as_size(doc.at("inner_samples"), "inner_samples");
  }
  if (doc.contains("t_ladder")) c.t_ladder = as_doubles(doc.at("t_ladder"), "t_ladder");
  c.fixed_dt = get_double(doc, "fixed_dt", "", c.fixed_dt);
  if (doc.contains("identity_window")) {
    c.identity_window = as_double(doc.at("identity_window"), "identity_window");
    if (!(*c.identity_window > 0.0)) fail("identity_window", "must be positive");
  }
  c.rate_options.rho = c.kind == ExperimentKind::LocalTimeStudy ? c.rho : 0.0;
  try {
    c.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::uint64_t config_hash(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  const std::string canonical = doc.dump();  // object keys are kept sorted
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace occlab
