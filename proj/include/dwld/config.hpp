#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dwld/experiment.hpp"
#include "dwld/io.hpp"
#include "dwld/types.hpp"

namespace dwld {

// Flat `key = value` configuration with `[section]` headers. Lists are
// comma-separated. `#` and `;` start comments.

struct ConfigSection {
  std::string name;
  std::map<std::string, std::string> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }

  const std::string& get(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end())
      throw ParseError("config: section [" + name + "] is missing key '" + key + "'");
    return it->second;
  }

  std::string get_or(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }
};

struct ParsedConfig {
  std::vector<ConfigSection> sections;  // in file order

  const ConfigSection* find(const std::string& name) const {
    for (const auto& s : sections)
      if (s.name == name) return &s;
    return nullptr;
  }

  const ConfigSection& require(const std::string& name) const {
    const ConfigSection* s = find(name);
    if (!s) throw ParseError("config: missing required section [" + name + "]");
    return *s;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto start = s.find_first_not_of(" \t\r");
  if (start == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(start, end - start + 1);
}

inline double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t eaten = 0;
    const double v = std::stod(s, &eaten);
    if (eaten != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("config: expected a number for " + what + ", got '" + s + "'");
  }
}

inline long long to_int(const std::string& s, const std::string& what) {
  try {
    std::size_t eaten = 0;
    const long long v = std::stoll(s, &eaten);
    if (eaten != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("config: expected an integer for " + what + ", got '" + s + "'");
  }
}

inline std::uint64_t to_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t eaten = 0;
    const std::uint64_t v = std::stoull(s, &eaten);
    if (eaten != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("config: expected an unsigned integer for " + what + ", got '" + s + "'");
  }
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

inline ParsedConfig parse_config(std::istream& in) {
  ParsedConfig cfg;
  ConfigSection current;  // unnamed preamble section
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError("config line " + std::to_string(line_no) + ": unterminated section");
      if (!current.name.empty() || !current.values.empty()) cfg.sections.push_back(current);
      current = ConfigSection{detail::trim(line.substr(1, line.size() - 2)), {}};
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty())
      throw ParseError("config line " + std::to_string(line_no) + ": empty key");
    current.values[key] = value;
  }
  if (!current.name.empty() || !current.values.empty()) cfg.sections.push_back(current);
  return cfg;
}

inline ParsedConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file '" + path + "'");
  return parse_config(in);
}

/// Prior grammar: `file:PATH`, a single probability (uniform), or
/// comma-separated `VALUExCOUNT` blocks whose counts sum to N.
inline RealVector parse_prior(const std::string& text, Index n) {
  if (text.rfind("file:", 0) == 0) {
    RealVector p = read_real_vector(detail::trim(text.substr(5)));
    if (p.size() != n) throw ParseError("prior file length != N");
    return p;
  }
  const auto items = detail::split_list(text);
  if (items.empty()) throw ParseError("config: empty prior");
  if (items.size() == 1 && items[0].find('x') == std::string::npos)
    return RealVector::Constant(n, detail::to_double(items[0], "prior"));
  RealVector p(n);
  Index at = 0;
  for (const auto& item : items) {
    const auto sep = item.find('x');
    if (sep == std::string::npos)
      throw ParseError("config: prior block '" + item + "' must be VALUExCOUNT");
    const double value = detail::to_double(item.substr(0, sep), "prior value");
    const long long count = detail::to_int(item.substr(sep + 1), "prior count");
    if (count < 0 || at + count > n) throw ParseError("config: prior block counts exceed N");
    p.segment(at, count).setConstant(value);
    at += count;
  }
  if (at != n) throw ParseError("config: prior block counts must sum to N");
  return p;
}

inline MatrixKind parse_matrix_kind(const std::string& text) {
  if (text == "partial_fourier" || text == "fourier") return MatrixKind::PartialFourier;
  if (text == "haar" || text == "row_orthogonal") return MatrixKind::HaarRowOrthogonal;
  if (text == "gaussian" || text == "iid_gaussian") return MatrixKind::GaussianIID;
  throw ParseError("config: unknown matrix kind '" + text + "'");
}

/// Weight grammar: `linear:L0,A`, `exp:L0,A`, `uniform:L`, `file:PATH`.
inline WeightSource parse_weight_source(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw ParseError("config: weight spec '" + text + "' needs KIND:ARGS");
  const std::string kind = detail::trim(text.substr(0, colon));
  const std::string args = detail::trim(text.substr(colon + 1));
  WeightSource src;
  if (kind == "uniform") {
    src.kind = WeightSource::Kind::Uniform;
    src.uniform_lambda = detail::to_double(args, "uniform weight");
    return src;
  }
  if (kind == "file") {
    src.kind = WeightSource::Kind::Explicit;
    src.explicit_weights = read_real_vector(args);
    return src;
  }
  if (kind == "linear" || kind == "exp" || kind == "exponential") {
    const auto parts = detail::split_list(args);
    if (parts.size() != 2)
      throw ParseError("config: weight spec '" + text + "' needs lambda0,alpha");
    src.kind = WeightSource::Kind::Model;
    src.model.kind = kind == "linear" ? WeightModelKind::Linear : WeightModelKind::Exponential;
    src.model.lambda0 = detail::to_double(parts[0], "lambda0");
    src.model.alpha = detail::to_double(parts[1], "alpha");
    return src;
  }
  throw ParseError("config: unknown weight kind '" + kind + "'");
}

inline SceneConfig load_scene(const ParsedConfig& cfg) {
  const ConfigSection& s = cfg.require("scene");
  SceneConfig scene;
  scene.n = detail::to_int(s.get("n"), "scene.n");
  scene.m = detail::to_int(s.get("m"), "scene.m");
  scene.noise.sigma2 = detail::to_double(s.get_or("sigma2", "0.01"), "scene.sigma2");
  scene.sigma_x2 = detail::to_double(s.get_or("sigma_x2", "1.0"), "scene.sigma_x2");
  scene.matrix_kind = parse_matrix_kind(s.get_or("matrix", "partial_fourier"));
  scene.prior = parse_prior(s.get("prior"), scene.n);
  scene.master_seed = detail::to_u64(s.get_or("seed", "0"), "scene.seed");
  return scene;
}

inline int parse_threads(const std::string& text) {
  if (text == "auto") return 0;
  return static_cast<int>(detail::to_int(text, "threads"));
}

inline DetectorRule parse_rule(const std::string& text) {
  if (text == "dwld") return DetectorRule::Dwld;
  if (text == "nwld") return DetectorRule::Nwld;
  if (text == "dld") return DetectorRule::Dld;
  throw ParseError("config: unknown detector rule '" + text + "'");
}

inline ExperimentConfig load_experiment_config(const ParsedConfig& cfg) {
  ExperimentConfig exp;
  exp.scene = load_scene(cfg);

  const ConfigSection& sweep = cfg.require("sweep");
  for (const auto& item : detail::split_list(sweep.get("snr_db")))
    exp.snr_db.push_back(detail::to_double(item, "snr_db"));
  exp.n_trials = static_cast<int>(detail::to_int(sweep.get_or("trials", "2000"), "trials"));
  exp.n_threads = parse_threads(sweep.get_or("threads", "auto"));

  if (const ConfigSection* out = cfg.find("output")) {
    exp.out_path = out->get_or("path", exp.out_path);
    exp.format = out->get_or("format", exp.format);
  }
  if (const ConfigSection* solver = cfg.find("solver")) {
    exp.solver.max_iters =
        static_cast<int>(detail::to_int(solver->get_or("max_iters", "50000"), "max_iters"));
    exp.solver.kkt_tol = detail::to_double(solver->get_or("kkt_tol", "1e-6"), "kkt_tol");
    exp.solver.rel_tol = detail::to_double(solver->get_or("rel_tol", "1e-10"), "rel_tol");
  }

  for (const auto& section : cfg.sections) {
    if (section.name.rfind("detector:", 0) != 0) continue;
    DetectorConfig det;
    det.name = detail::trim(section.name.substr(9));
    if (det.name.empty()) throw ParseError("config: detector section needs a name");
    det.rule = parse_rule(section.get("rule"));
    det.weights = parse_weight_source(section.get("weights"));
    if (det.rule == DetectorRule::Nwld)
      det.kappa = detail::to_double(section.get_or("kappa", "0"), "kappa");
    else
      det.pfa = detail::to_double(section.get_or("pfa", "0.01"), "pfa");
    exp.detectors.push_back(std::move(det));
  }
  if (exp.detectors.empty()) throw ParseError("config: needs at least one [detector:NAME] section");
  return exp;
}

struct OptimizeRunConfig {
  SceneConfig scene;
  WeightModelKind model_kind = WeightModelKind::Linear;
  int n_mc = 64;
  int budget = 160;
  int n_threads = 0;
};

inline OptimizeRunConfig load_optimize_config(const ParsedConfig& cfg) {
  OptimizeRunConfig run;
  run.scene = load_scene(cfg);
  const ConfigSection& opt = cfg.require("optimize");
  const std::string model = opt.get_or("model", "linear");
  if (model == "linear")
    run.model_kind = WeightModelKind::Linear;
  else if (model == "exp" || model == "exponential")
    run.model_kind = WeightModelKind::Exponential;
  else
    throw ParseError("config: unknown weight model '" + model + "'");
  if (opt.has("snr_db")) {
    const double snr_db = detail::to_double(opt.get("snr_db"), "optimize.snr_db");
    run.scene.sigma_x2 = sigma_x2_for_snr_db(snr_db, run.scene.gamma(), run.scene.noise.sigma2);
  }
  run.n_mc = static_cast<int>(detail::to_int(opt.get_or("trials", "64"), "optimize.trials"));
  run.budget = static_cast<int>(detail::to_int(opt.get_or("budget", "160"), "optimize.budget"));
  run.n_threads = parse_threads(opt.get_or("threads", "auto"));
  return run;
}

/// `key = value` lines echoing the resolved experiment, embedded in outputs.
inline std::vector<std::string> config_echo(const ExperimentConfig& cfg) {
  std::vector<std::string> lines;
  auto add = [&](const std::string& k, const std::string& v) { lines.push_back(k + " = " + v); };
  std::ostringstream snr;
  for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
    if (i) snr << ",";
    snr << cfg.snr_db[i];
  }
  add("n", std::to_string(cfg.scene.n));
  add("m", std::to_string(cfg.scene.m));
  add("sigma2", [&] {
    std::ostringstream os;
    os << cfg.scene.noise.sigma2;
    return os.str();
  }());
  add("matrix", to_string(cfg.scene.matrix_kind));
  add("seed", std::to_string(cfg.scene.master_seed));
  add("snr_db", snr.str());
  add("trials", std::to_string(cfg.n_trials));
  for (const auto& d : cfg.detectors) {
    std::ostringstream os;
    os << "detector " << d.name << ": rule=" << to_string(d.rule)
       << " weights=" << d.weights.describe();
    if (d.rule == DetectorRule::Nwld)
      os << " kappa=" << d.kappa;
    else
      os << " pfa=" << d.pfa;
    lines.push_back(os.str());
  }
  return lines;
}

}  // namespace dwld
