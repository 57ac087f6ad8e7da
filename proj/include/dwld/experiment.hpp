#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dwld/detect.hpp"
#include "dwld/io.hpp"
#include "dwld/parallel.hpp"
#include "dwld/scene.hpp"
#include "dwld/weight_opt.hpp"

namespace dwld {

enum class DetectorRule { Dwld, Nwld, Dld };

inline const char* to_string(DetectorRule rule) {
  switch (rule) {
    case DetectorRule::Dwld: return "dwld";
    case DetectorRule::Nwld: return "nwld";
    case DetectorRule::Dld: return "dld";
  }
  return "unknown";
}

/// Where a detector's weight vector comes from.
struct WeightSource {
  enum class Kind { Model, Uniform, Explicit };
  Kind kind = Kind::Uniform;
  WeightModel model;             // Kind::Model
  double uniform_lambda = 0.1;   // Kind::Uniform
  RealVector explicit_weights;   // Kind::Explicit

  RealVector resolve(const RealVector& prior) const {
    switch (kind) {
      case Kind::Model: return model.weights(prior);
      case Kind::Uniform:
        if (!(uniform_lambda > 0.0))
          throw InvalidParameterError("weight source: uniform lambda must be > 0");
        return RealVector::Constant(prior.size(), uniform_lambda);
      case Kind::Explicit:
        if (explicit_weights.size() != prior.size())
          throw DimensionError("weight source: explicit weight length != N");
        return explicit_weights;
    }
    throw InvalidParameterError("weight source: unknown kind");
  }

  std::string describe() const {
    switch (kind) {
      case Kind::Model:
        return std::string(to_string(model.kind)) + ":" + std::to_string(model.lambda0) + "," +
               std::to_string(model.alpha);
      case Kind::Uniform: return "uniform:" + std::to_string(uniform_lambda);
      case Kind::Explicit: return "explicit[" + std::to_string(explicit_weights.size()) + "]";
    }
    return "unknown";
  }
};

struct DetectorConfig {
  std::string name;
  DetectorRule rule = DetectorRule::Dwld;
  WeightSource weights;
  double pfa = 0.01;   // target false alarm (dwld/dld)
  double kappa = 0.0;  // squared-magnitude threshold (nwld)
};

struct ExperimentConfig {
  SceneConfig scene;
  std::vector<DetectorConfig> detectors;
  std::vector<double> snr_db;
  int n_trials = 2000;
  int n_threads = 0;  // 0 = hardware concurrency
  std::string out_path = "results.csv";
  std::string format = "csv";
  bool dump_scene = false;
  std::string dump_prefix = "scene";
  SolverOptions solver;
};

inline void validate(const ExperimentConfig& cfg) {
  validate(cfg.scene);
  if (cfg.n_trials < 1) throw InvalidParameterError("experiment: n_trials must be >= 1");
  if (cfg.detectors.empty()) throw InvalidParameterError("experiment: needs at least one detector");
  if (cfg.snr_db.empty()) throw InvalidParameterError("experiment: needs at least one SNR point");
  for (double s : cfg.snr_db)
    if (!std::isfinite(s)) throw InvalidParameterError("experiment: SNR values must be finite");
  if (cfg.format != "csv" && cfg.format != "json")
    throw InvalidParameterError("experiment: format must be csv or json");
  for (const auto& d : cfg.detectors) {
    if (d.rule != DetectorRule::Nwld && !(d.pfa > 0.0 && d.pfa <= 1.0))
      throw InvalidParameterError("experiment: detector pfa must lie in (0, 1]");
    if (d.rule == DetectorRule::Nwld && !(d.kappa >= 0.0))
      throw InvalidParameterError("experiment: nwld kappa must be >= 0");
  }
}

struct ResultRow {
  std::string detector;
  double snr_db = 0.0;
  std::optional<double> pfa_target;
  std::optional<double> pfa_emp, pfa_lo, pfa_hi;
  std::optional<double> pd_emp, pd_lo, pd_hi;
  std::optional<double> sigma_w2_mean;
  std::optional<double> rho_ca_mean;
  int n_trials = 0;
  int n_infeasible = 0;
};

/// Per-detector outcome of one trial, surfaced to observers.
struct DetectorTrialResult {
  bool feasible = true;
  DecisionVector decisions;
  double sigma_w2 = std::numeric_limits<double>::quiet_NaN();
  double rho_ca = std::numeric_limits<double>::quiet_NaN();
  const ComplexVector* x_wl = nullptr;  // valid during the observer call only
  ComplexVector x_d;  // populated for dwld/dld when an observer is attached
};

/// Called from worker threads; implementations must write to per-trial state.
using TrialObserver =
    std::function<void(int snr_index, int trial_index, const SparseScene& scene,
                       const std::vector<DetectorTrialResult>& detectors)>;

namespace detail {

/// Detectors sharing a weight vector share one solve per trial.
inline std::vector<std::size_t> weight_groups(const std::vector<RealVector>& weights) {
  std::vector<std::size_t> group(weights.size());
  std::vector<std::size_t> representatives;
  for (std::size_t d = 0; d < weights.size(); ++d) {
    bool found = false;
    for (std::size_t r : representatives) {
      if (weights[r].size() == weights[d].size() && weights[r] == weights[d]) {
        group[d] = group[r];
        found = true;
        break;
      }
    }
    if (!found) {
      group[d] = representatives.size();
      representatives.push_back(d);
    }
  }
  return group;
}

}  // namespace detail

/// Runs the (snr x detector) sweep. Trials are scheduled across threads but
/// every aggregate is reduced from per-trial slots in trial order, so the
/// output is identical for any worker count.
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg,
                                             const TrialObserver& observer = {}) {
  validate(cfg);
  const Index n = cfg.scene.n;
  const double gamma = cfg.scene.gamma();
  const std::size_t n_det = cfg.detectors.size();

  std::vector<RealVector> weights(n_det);
  for (std::size_t d = 0; d < n_det; ++d)
    weights[d] = cfg.detectors[d].weights.resolve(cfg.scene.prior);
  const std::vector<std::size_t> group_of = detail::weight_groups(weights);
  std::size_t n_groups = 0;
  for (std::size_t g : group_of) n_groups = std::max(n_groups, g + 1);
  std::vector<RealVector> group_weights(n_groups);
  for (std::size_t d = 0; d < n_det; ++d) group_weights[group_of[d]] = weights[d];

  std::vector<ResultRow> rows;
  rows.reserve(cfg.snr_db.size() * n_det);

  for (std::size_t s = 0; s < cfg.snr_db.size(); ++s) {
    SceneConfig scene = cfg.scene;
    scene.sigma_x2 = sigma_x2_for_snr_db(cfg.snr_db[s], gamma, scene.noise.sigma2);

    struct TrialSlot {
      std::vector<MetricsAccumulator> acc;      // one per detector
      std::vector<double> sigma_w2, rho_ca;     // NaN when infeasible / nwld
      std::vector<std::uint8_t> infeasible;
    };
    std::vector<TrialSlot> slots(static_cast<std::size_t>(cfg.n_trials));

    parallel_for(cfg.n_trials, cfg.n_threads, [&](Index t) {
      Rng rng = make_rng(derive_seed(cfg.scene.master_seed, s, static_cast<std::uint64_t>(t)));
      const DesignMatrix a = gen_design(scene, rng, /*materialize=*/false);
      SparseScene trial_scene;
      std::tie(trial_scene.x0, trial_scene.support) =
          gen_sparse_signal(scene.prior, scene.sigma_x2, rng);
      trial_scene.y = measure(a, trial_scene.x0, scene.noise, rng);
      const BoolArray support = support_mask(trial_scene.support, n);

      std::vector<ComplexVector> group_solutions(n_groups);
      for (std::size_t g = 0; g < n_groups; ++g)
        group_solutions[g] = solve_weighted_lasso(trial_scene.y, a, group_weights[g], cfg.solver);

      TrialSlot& slot = slots[static_cast<std::size_t>(t)];
      slot.acc.resize(n_det);
      slot.sigma_w2.assign(n_det, std::numeric_limits<double>::quiet_NaN());
      slot.rho_ca.assign(n_det, std::numeric_limits<double>::quiet_NaN());
      slot.infeasible.assign(n_det, 0);

      std::vector<DetectorTrialResult> observed(observer ? n_det : 0);
      for (std::size_t d = 0; d < n_det; ++d) {
        const DetectorConfig& det = cfg.detectors[d];
        const ComplexVector& x_wl = group_solutions[group_of[d]];
        DetectorTrialResult result;
        result.x_wl = &x_wl;
        if (det.rule == DetectorRule::Nwld) {
          result.decisions = nwld_detect(x_wl, RealVector::Constant(n, det.kappa));
        } else {
          try {
            DebiasResult db =
                debias_pipeline(x_wl, trial_scene.y, a, weights[d], scene.noise.sigma2);
            const RealVector kappa =
                threshold_from_pfa(db.sigma_w2, RealVector::Constant(n, det.pfa));
            result.decisions = dwld_detect(db.x_d, kappa);
            result.sigma_w2 = db.sigma_w2;
            result.rho_ca = db.rho_ca;
            slot.sigma_w2[d] = db.sigma_w2;
            slot.rho_ca[d] = db.rho_ca;
            if (observer) result.x_d = std::move(db.x_d);
          } catch (const DebiasInfeasibleError&) {
            result.feasible = false;
          } catch (const ConvergenceError&) {
            result.feasible = false;
          }
        }
        if (result.feasible && result.decisions.size() == n)
          slot.acc[d].add(result.decisions, support);
        else
          slot.infeasible[d] = 1;
        if (observer) observed[d] = std::move(result);
      }
      if (observer) observer(static_cast<int>(s), static_cast<int>(t), trial_scene, observed);

      if (cfg.dump_scene && s == 0 && t == 0) {
        write_complex_matrix(cfg.dump_prefix + "_A.txt", dense(a));
        write_complex_vector(cfg.dump_prefix + "_y.txt", trial_scene.y);
        write_complex_vector(cfg.dump_prefix + "_x0.txt", trial_scene.x0);
        write_real_vector(cfg.dump_prefix + "_lambda.txt", weights[0]);
      }
    });

    // Sequential reduction in trial order.
    for (std::size_t d = 0; d < n_det; ++d) {
      const DetectorConfig& det = cfg.detectors[d];
      MetricsAccumulator total(n);
      double sw_sum = 0.0, rho_sum = 0.0;
      int feasible_count = 0, infeasible_count = 0;
      for (const TrialSlot& slot : slots) {
        total.merge(slot.acc[d]);
        if (slot.infeasible[d]) {
          ++infeasible_count;
        } else if (det.rule != DetectorRule::Nwld) {
          sw_sum += slot.sigma_w2[d];
          rho_sum += slot.rho_ca[d];
          ++feasible_count;
        }
      }

      ResultRow row;
      row.detector = det.name;
      row.snr_db = cfg.snr_db[s];
      row.n_trials = cfg.n_trials;
      row.n_infeasible = infeasible_count;
      if (det.rule != DetectorRule::Nwld) row.pfa_target = det.pfa;
      const PooledRates rates = total.pooled();
      if (rates.pfa) {
        row.pfa_emp = rates.pfa;
        const WilsonInterval ci = wilson_interval(rates.null_rejections, rates.null_occurrences);
        row.pfa_lo = ci.lo;
        row.pfa_hi = ci.hi;
      }
      if (rates.pd) {
        row.pd_emp = rates.pd;
        const WilsonInterval ci =
            wilson_interval(rates.support_rejections, rates.support_occurrences);
        row.pd_lo = ci.lo;
        row.pd_hi = ci.hi;
      }
      if (feasible_count > 0) {
        row.sigma_w2_mean = sw_sum / feasible_count;
        row.rho_ca_mean = rho_sum / feasible_count;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline constexpr const char* kCsvHeader =
    "detector,snr_db,pfa_target,pfa_emp,pfa_lo,pfa_hi,pd_emp,pd_lo,pd_hi,"
    "sigma_w2_mean,rho_ca_mean,n_trials,n_infeasible";

namespace detail {

inline std::string csv_field(const std::optional<double>& v) {
  if (!v) return {};  // missing, never 0
  std::ostringstream os;
  os << std::setprecision(12) << *v;
  return os.str();
}

}  // namespace detail

/// CSV with `# key = value` echo lines so a result file pins down its run.
inline void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows,
                              const std::vector<std::string>& config_echo) {
  for (const auto& line : config_echo) out << "# " << line << "\n";
  out << kCsvHeader << "\n";
  for (const auto& r : rows) {
    out << r.detector << "," << r.snr_db << "," << detail::csv_field(r.pfa_target) << ","
        << detail::csv_field(r.pfa_emp) << "," << detail::csv_field(r.pfa_lo) << ","
        << detail::csv_field(r.pfa_hi) << "," << detail::csv_field(r.pd_emp) << ","
        << detail::csv_field(r.pd_lo) << "," << detail::csv_field(r.pd_hi) << ","
        << detail::csv_field(r.sigma_w2_mean) << "," << detail::csv_field(r.rho_ca_mean) << ","
        << r.n_trials << "," << r.n_infeasible << "\n";
  }
}

}  // namespace dwld
