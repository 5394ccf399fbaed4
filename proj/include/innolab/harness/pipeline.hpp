#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "innolab/core/errors.hpp"
#include "innolab/core/parallel.hpp"
#include "innolab/core/stochastic.hpp"
#include "innolab/criterion/estimators.hpp"
#include "innolab/criterion/verdict.hpp"
#include "innolab/filtering/exact_finite.hpp"
#include "innolab/filtering/innovation.hpp"
#include "innolab/filtering/kalman_bucy.hpp"
#include "innolab/filtering/particle.hpp"
#include "innolab/filtering/second_level.hpp"
#include "innolab/girsanov/girsanov.hpp"
#include "innolab/harness/config.hpp"
#include "innolab/models/builtin.hpp"
#include "innolab/models/finite_aux.hpp"
#include "innolab/oracle/atoms.hpp"
#include "innolab/oracle/crosscheck.hpp"
#include "innolab/oracle/exact_entropy.hpp"

namespace innolab {

/// Pooled second moments of the innovation increments under P.
struct BrownianityCheck {
  double variance_ratio = 0.0;
  double lag1_correlation = 0.0;
  double lag1_threshold = 0.0;
  bool pass = false;
};

/// Raw per-path summaries written to paths.csv.
struct PathSummary {
  double raw_energy = 0.0;
  double removed_energy = 0.0;
  double log_weight = 0.0;
  double terminal = 0.0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::string digest;
  std::string filter_method;
  std::vector<CriterionReport> reports;
  AggregateVerdict verdict;
  std::optional<BrownianityCheck> brownianity;
  /// Smallest particle-filter ESS over all paths and steps.
  std::optional<double> filter_min_ess;
  std::optional<oracle::DiscreteVerdict> exact;
  std::optional<oracle::CrosscheckReport> crosscheck;
  std::vector<PathSummary> paths;
  /// Acceptance thresholds that failed; empty means exit status 0.
  std::vector<std::string> failures;
  double wall_clock_seconds = 0.0;
};

namespace detail {

inline FilterChoice resolve_filter(const ExperimentConfig& cfg, const DriftModel& model) {
  if (cfg.filter != FilterChoice::kAuto) {
    return cfg.filter;
  }
  const ModelInfo& info = model.info();
  if (info.observation_adapted) {
    return FilterChoice::kIdentity;
  }
  if (dynamic_cast<const models::KalmanBucy*>(&model) != nullptr) {
    return FilterChoice::kKalman;
  }
  if (cfg.noise_nodes > 0 && !info.hidden_noise) {
    return FilterChoice::kExact;
  }
  return FilterChoice::kParticle;
}

inline const char* method_name(FilterChoice f) {
  switch (f) {
    case FilterChoice::kIdentity:
      return to_string(FilterMethod::kIdentityFeedback);
    case FilterChoice::kKalman:
      return to_string(FilterMethod::kExactKalman);
    case FilterChoice::kParticle:
      return to_string(FilterMethod::kParticle);
    case FilterChoice::kExact:
      return to_string(FilterMethod::kExactEnumeration);
    case FilterChoice::kAuto:
      break;
  }
  return "?";
}

inline FilterEstimate run_filter(FilterChoice choice, const DriftModel& model, const SimulationOutput& sim,
                                 const ExperimentConfig& cfg, const RandomStream& stream,
                                 const std::optional<oracle::QuantizedNoise>& noise) {
  switch (choice) {
    case FilterChoice::kIdentity:
      if (!model.info().observation_adapted) {
        throw ConfigurationError("identity filter requested for a model whose drift is not a functional of U");
      }
      return identity_feedback(sim.drift);
    case FilterChoice::kKalman: {
      const auto* kb = dynamic_cast<const models::KalmanBucy*>(&model);
      if (kb == nullptr) {
        throw ConfigurationError("kalman filter requires the kalman-bucy model");
      }
      return kalman_bucy_filter(sim.observation, kb->beta(), kb->sigma(), kb->initial_variance());
    }
    case FilterChoice::kParticle:
      return particle_conditional_drift(model, sim.observation, cfg.particles, stream);
    case FilterChoice::kExact:
      if (!noise) {
        throw ConfigurationError("exact filter requires quantized noise (noise.nodes)");
      }
      return exact_finite_filter(model, sim.observation, *noise, cfg.aux_cardinality);
    case FilterChoice::kAuto:
      break;
  }
  throw ConfigurationError("unresolved filter choice");
}

/// Per-path record kept after simulation.
struct Member {
  Path observed;
  AdaptedSamples removed;
  double raw_energy = 0.0;
  double filtered_energy = 0.0;
  double min_ess = 0.0;
};

inline BrownianityCheck brownianity(const std::vector<Member>& members) {
  const TimeGrid& grid = members.front().observed.grid();
  const std::size_t d = members.front().observed.dimension();
  CompensatedSum sum;
  CompensatedSum squares;
  CompensatedSum lag;
  double count = 0.0;
  double lag_count = 0.0;
  for (const auto& m : members) {
    for (std::size_t k = 0; k < grid.steps(); ++k) {
      for (std::size_t c = 0; c < d; ++c) {
        const double x = m.observed.increment(k, c);
        sum += x;
        squares += x * x;
        count += 1.0;
        if (k + 1 < grid.steps()) {
          lag += x * m.observed.increment(k + 1, c);
          lag_count += 1.0;
        }
      }
    }
  }
  const double mean = sum.value() / count;
  const double variance = squares.value() / count - mean * mean;
  BrownianityCheck out;
  out.variance_ratio = variance / grid.step();
  out.lag1_correlation = (lag.value() / lag_count - mean * mean) / variance;
  out.lag1_threshold = 3.0 / std::sqrt(static_cast<double>(members.size() * grid.steps()));
  out.pass = std::abs(out.variance_ratio - 1.0) <= 0.02 && std::abs(out.lag1_correlation) < out.lag1_threshold;
  return out;
}

/// Both sides of the criterion at one localization level.
inline CriterionReport evaluate_level(const std::vector<Member>& members, const std::vector<std::size_t>& stops,
                                      double level, const BasisSpec& basis, std::size_t workers) {
  const std::size_t count = members.size();
  const TimeGrid& grid = members.front().observed.grid();
  std::vector<AdaptedSamples> localized;
  localized.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    localized.push_back(members[i].removed);
    for (std::size_t k = stops[i]; k < grid.steps(); ++k) {
      for (double& v : localized.back().row(k)) {
        v = 0.0;
      }
    }
  }
  std::vector<double> log_weights(count);
  parallel_for(count, workers, [&](std::size_t i) {
    log_weights[i] = girsanov_log_weight(localized[i], members[i].observed, level).value;
  });

  CriterionReport report;
  report.level = level;
  report.normalization = normalization_diagnostic(log_weights);
  const WeightedEnsemble ensemble = reweight(log_weights);
  report.effective_sample_size = ensemble.effective_sample_size;
  report.energy = energy_under_nu(ensemble, localized);

  std::vector<Path> histories;
  histories.reserve(count);
  for (const auto& m : members) {
    histories.push_back(m.observed);
  }
  HistoryFeatures features(histories, basis);
  // Members are split by the stopping time of the fitted drift itself, which
  // is a function of the Z-history and mirrors T_n.
  std::vector<CompensatedSum> acc(count);
  std::vector<std::uint8_t> stopped(count, 0);
  for (std::size_t k = 0; k < grid.steps(); ++k) {
    if (k > 0) {
      features.advance();
    }
    if (!std::isinf(level)) {
      for (std::size_t i = 0; i < count; ++i) {
        stopped[i] = acc[i].value() * grid.step() > level ? 1 : 0;
      }
    }
    const SecondLevelFit fit = fit_current_step(features, localized, ensemble.weights, stopped);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t c = 0; c < fit.dimension; ++c) {
        const double v = fit.value(i, c);
        acc[i] += v * v;
      }
    }
    if (k + 1 == grid.steps()) {
      report.basis = fit.features;
    }
  }
  std::vector<double> half(count);
  std::vector<double> gap(count);
  for (std::size_t i = 0; i < count; ++i) {
    half[i] = 0.5 * acc[i].value() * grid.step();
    gap[i] = 0.5 * energy(localized[i]) - half[i];
  }
  report.entropy = weighted_estimate(ensemble.weights, half);
  report.gap = weighted_estimate(ensemble.weights, gap);
  return report;
}

inline std::vector<double> uniform_weights(std::size_t count) {
  return std::vector<double>(count, 1.0 / static_cast<double>(count));
}

inline void check_thresholds(ExperimentResult& result) {
  for (const auto& r : result.reports) {
    const std::string at = "level " + format_level(r.level);
    if (!inequality_check(r.entropy, r.energy)) {
      result.failures.push_back(at + ": entropy exceeds energy beyond 3 SE");
    }
    if (!std::isinf(r.level) && !r.normalization.pass) {
      result.failures.push_back(at + ": normalization diagnostic failed");
    }
  }
  if (result.config.level == ObservationLevel::kInnovation && !result.reports.empty()) {
    const auto& r = result.reports.back();
    if (!inequality_check(r.observation_entropy, r.observation_energy)) {
      result.failures.push_back("observation-level entropy exceeds energy beyond 3 SE");
    }
  }
  if (result.crosscheck && !result.crosscheck->pass) {
    result.failures.push_back("crosscheck relative error above tolerance");
  }
}

inline ExperimentResult run_discrete(const ExperimentConfig& cfg, const DriftModel& model) {
  const TimeGrid grid(cfg.steps, cfg.horizon);
  const auto noise = oracle::QuantizedNoise::gaussian(cfg.noise_nodes);
  const auto space = in_stage("enumerate", [&] { return oracle::enumerate(model, grid, noise, cfg.aux_cardinality); });
  const auto exact = oracle::dpi_verdict(space, cfg.level);
  ExperimentResult result;
  result.filter_method = cfg.level == ObservationLevel::kInnovation ? method_name(FilterChoice::kExact) : "none";
  CriterionReport r;
  r.level = kUnlocalized;
  r.entropy = {exact.conditional_energy, 0.0};
  r.energy = {exact.energy, 0.0};
  r.gap = {exact.energy - exact.conditional_energy, 0.0};
  r.effective_sample_size = std::numeric_limits<double>::quiet_NaN();
  r.normalization = {exact.normalization, 0.0, true};
  r.observation_entropy = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  r.observation_energy = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  r.filter_method = result.filter_method;
  r.basis = "exact";
  result.reports.push_back(r);
  result.exact = exact;
  return result;
}

}  // namespace detail

/// simulate -> filter -> innovation -> localize -> weights -> diagnostics ->
/// entropy and energy -> verdict.
[[nodiscard]] inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  std::shared_ptr<const DriftModel> model = make_model(cfg.model);
  const bool finite = cfg.noise_nodes > 0;
  if (finite && (model->info().aux_dimension > 0 || model->info().hidden_noise)) {
    model = std::make_shared<FiniteAuxModel>(model, cfg.aux_cardinality);
  }

  ExperimentResult result;
  if (cfg.mode == RunMode::kDiscrete) {
    result = detail::run_discrete(cfg, *model);
  } else {
    const TimeGrid grid(cfg.steps, cfg.horizon);
    in_stage("simulate", [&] { model->check_grid(grid); });
    std::optional<oracle::QuantizedNoise> quantized;
    NoiseSource noise;
    if (finite) {
      quantized = oracle::QuantizedNoise::gaussian(cfg.noise_nodes);
      noise = NoiseSource(*quantized);
    }
    ExperimentConfig effective = cfg;
    if (cfg.mode == RunMode::kCrosscheck) {
      effective.basis.kind = BasisSpec::Kind::kCells;
    }
    const FilterChoice choice = detail::resolve_filter(effective, *model);
    const bool innovation_level = cfg.level == ObservationLevel::kInnovation;
    result.filter_method = innovation_level ? detail::method_name(choice) : "none";

    const std::size_t count = cfg.paths;
    std::vector<detail::Member> members(count, detail::Member{Path(grid, 1), AdaptedSamples(grid, 1)});
    std::vector<Path> observations;
    const bool keep_observations = cfg.mode == RunMode::kCrosscheck && innovation_level;
    if (keep_observations) {
      observations.assign(std::min<std::size_t>(count, 200), Path(grid, 1));
    }
    in_stage("simulate/filter", [&] {
      parallel_for(count, cfg.workers, [&](std::size_t i) {
        const RandomStream stream(cfg.seed, i);
        const SimulationOutput sim = simulate(*model, grid, stream, noise);
        detail::Member m{sim.brownian, sim.drift, energy(sim.drift), 0.0, 0.0};
        if (innovation_level) {
          FilterEstimate filtered = detail::run_filter(choice, *model, sim, cfg, stream, quantized);
          m.observed = innovation(sim.observation, filtered);
          m.filtered_energy = energy(filtered.values);
          m.min_ess = filtered.ess.empty() ? 0.0 : *std::min_element(filtered.ess.begin(), filtered.ess.end());
          m.removed = std::move(filtered.values);
        }
        if (i < observations.size()) {
          observations[i] = sim.observation;
        }
        members[i] = std::move(m);
      });
    });

    if (innovation_level) {
      result.brownianity = detail::brownianity(members);
      if (choice == FilterChoice::kParticle) {
        double least = members.front().min_ess;
        for (const auto& m : members) {
          least = std::min(least, m.min_ess);
        }
        result.filter_min_ess = least;
      }
    }

    // Observation-level inequality: entropy of U's law through its own filtered
    // drift, against the raw drift energy, both under P.
    Estimate observation_entropy{std::numeric_limits<double>::quiet_NaN(), 0.0};
    Estimate observation_energy{std::numeric_limits<double>::quiet_NaN(), 0.0};
    if (innovation_level) {
      std::vector<double> filtered(count);
      std::vector<double> raw(count);
      for (std::size_t i = 0; i < count; ++i) {
        filtered[i] = 0.5 * members[i].filtered_energy;
        raw[i] = 0.5 * members[i].raw_energy;
      }
      const auto uniform = detail::uniform_weights(count);
      observation_entropy = weighted_estimate(uniform, filtered);
      observation_energy = weighted_estimate(uniform, raw);
    }

    std::vector<std::vector<std::size_t>> seen_stops;
    std::vector<CriterionReport> seen_reports;
    for (double n : cfg.levels) {
      std::vector<std::size_t> stops(count);
      const StoppingRule rule{n};
      for (std::size_t i = 0; i < count; ++i) {
        stops[i] = rule.stopping_index(members[i].removed);
      }
      CriterionReport report;
      auto hit = std::find(seen_stops.begin(), seen_stops.end(), stops);
      if (hit != seen_stops.end()) {
        report = seen_reports[static_cast<std::size_t>(hit - seen_stops.begin())];
      } else {
        report = in_stage("criterion (level " + detail::format_level(n) + ")", [&] {
          return detail::evaluate_level(members, stops, n, effective.basis, cfg.workers);
        });
        seen_stops.push_back(stops);
        seen_reports.push_back(report);
      }
      report.level = n;
      report.filter_method = result.filter_method;
      report.observation_entropy = observation_entropy;
      report.observation_energy = observation_energy;
      result.reports.push_back(report);
    }

    if (cfg.raw_paths) {
      result.paths.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        const auto& m = members[i];
        result.paths[i] = {m.raw_energy, energy(m.removed), girsanov_log_weight(m.removed, m.observed).value,
                           m.observed(grid.steps())};
      }
    }

    if (cfg.mode == RunMode::kCrosscheck) {
      const auto unlocalized = std::find_if(result.reports.begin(), result.reports.end(),
                                            [](const CriterionReport& r) { return std::isinf(r.level); });
      if (unlocalized == result.reports.end()) {
        throw ConfigurationError("crosscheck needs the unlocalized level (inf) in levels");
      }
      const auto space = in_stage("enumerate", [&] {
        return oracle::enumerate(*model, grid, *quantized, cfg.aux_cardinality);
      });
      std::vector<double> deviation;
      if (innovation_level) {
        deviation.assign(grid.steps(), 0.0);
        for (std::size_t i = 0; i < observations.size(); ++i) {
          const AdaptedSamples exact = space.exact_filter_along(observations[i]);
          for (std::size_t k = 0; k < grid.steps(); ++k) {
            for (std::size_t c = 0; c < exact.dimension(); ++c) {
              deviation[k] = std::max(deviation[k], std::abs(exact(k, c) - members[i].removed(k, c)));
            }
          }
        }
      }
      result.crosscheck =
          oracle::estimator_crosscheck(space, cfg.level, *unlocalized, std::move(deviation), cfg.tolerance);
      result.exact = oracle::dpi_verdict(space, cfg.level);
    }
  }

  result.config = cfg;
  result.digest = config_digest(cfg);
  for (auto& r : result.reports) {
    r.verdict = classify_gap(r.gap);
  }
  result.verdict = criterion_verdict(result.reports);
  if (cfg.mode != RunMode::kDiscrete) {
    detail::check_thresholds(result);
  }
  return result;
}

}  // namespace innolab
