#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "vorosense/geometry.hpp"
#include "vorosense/spatial_index.hpp"

namespace vorosense {

/// Which denominator the third factor of the sojourn formula uses: the
/// (a_bar^2 + var_s) or the G/G/1-style (a_bar^2 + var_a).
enum class SojournDenominator { ServiceVariance, ArrivalVariance };

/// Inputs of the sojourn predictor. Times in seconds, variances in s^2.
struct TrafficParams {
  double rho = 0.0;
  double t_bar = 0.0;
  double a_bar = 0.0;
  double var_a = 0.0;
  double var_s = 0.0;

  /// rho derived as t_bar / a_bar.
  static TrafficParams from_means(double t_bar, double a_bar, double var_a, double var_s);
};

/// gamma = [rho t / (2(1 - rho))] [(var_a + var_s) / t^2]
///         [(t^2 + var_s) / (a^2 + var_s)] + t
/// Throws UtilizationAtOrAboveOne or InvalidParams.
double kingman_sojourn(const TrafficParams& p,
                       SojournDenominator denominator = SojournDenominator::ServiceVariance);

struct ArrivalModel {
  double lambda = 1.0;  // mean arrivals per second
};

/// e^-lambda lambda^x / x!. Throws NegativeCount or InvalidParams.
double poisson_pmf(const ArrivalModel& model, std::int64_t x);

enum class ServiceKind { Exponential, Deterministic, Lognormal };

struct ServiceDistribution {
  ServiceKind kind = ServiceKind::Exponential;
  double mean = 1.0;
  /// Only read for lognormal service; the other kinds imply their variance.
  double lognormal_variance = 0.0;

  double variance() const;
};

struct Publisher {
  Site site;
  ArrivalModel arrivals;
};

struct PipelineConfig {
  std::vector<Publisher> publishers;
  ServiceDistribution service;
  double duration_s = 0.0;
  std::uint64_t seed = 0;
  BoundingBox world_box{{0.0, 0.0}, {1000.0, 1000.0}};
  unsigned bits_per_dim = kDefaultBitsPerDim;
  std::size_t page_capacity = kDefaultPageCapacity;
  double sample_interval_s = 1.0;
  /// Period of the subscriber's random region queries; 0 disables them.
  double query_period_s = 0.0;
  SojournDenominator denominator = SojournDenominator::ServiceVariance;

  double aggregate_lambda() const;
  /// Aggregate arrival rate times mean service time.
  double utilization() const;
  /// Predictor inputs implied by the config: Poisson arrivals, configured
  /// service distribution.
  TrafficParams traffic_params() const;
  /// Throws ConfigUtilizationTooHigh or ConfigError.
  void validate() const;
};

struct SimReport {
  std::uint64_t seed = 0;
  std::uint64_t published = 0;
  std::uint64_t served = 0;
  std::uint64_t stored = 0;
  std::uint64_t in_queue_at_end = 0;
  double utilization = 0.0;
  double mean_sojourn_s = 0.0;
  double kingman_prediction_s = 0.0;
  /// Time-averaged number of messages in the system.
  double mean_in_system = 0.0;
  /// `arrival_histogram[x]` counts the whole unit intervals that received
  /// exactly x arrivals.
  std::vector<std::uint64_t> arrival_histogram;
  std::vector<std::pair<MortonKey, std::uint64_t>> per_cell_counts;
  /// Number in system sampled every `sample_interval_s`.
  std::vector<std::uint32_t> queue_length_series;
  std::uint64_t queries_issued = 0;
  std::uint64_t query_hits = 0;

  friend bool operator==(const SimReport&, const SimReport&) = default;
};

struct SimOutcome {
  SimReport report;
  OrderedIndex index;
};

/// Publishers -> FIFO single-server queue -> spatial index, in virtual time.
SimOutcome run_pipeline(const PipelineConfig& config);
inline SimReport run_simulation(const PipelineConfig& config) { return run_pipeline(config).report; }

struct ArrivalFit {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;

  bool rejected(double alpha) const { return p_value < alpha; }
};

/// Chi-square of an interval-count histogram against poisson_pmf. Bins are
/// pooled until each expects at least five intervals. Throws
/// InsufficientSamples below 30 intervals.
ArrivalFit arrival_fit(std::span<const std::uint64_t> histogram, const ArrivalModel& model);
inline ArrivalFit arrival_fit(const SimReport& report, const ArrivalModel& model) {
  return arrival_fit(report.arrival_histogram, model);
}

}  // namespace vorosense
