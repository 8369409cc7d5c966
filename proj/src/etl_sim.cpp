#include "vorosense/etl_sim.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <string>

#include "vorosense/rng.hpp"

namespace vorosense {

TrafficParams TrafficParams::from_means(double t_bar, double a_bar, double var_a, double var_s) {
  return {t_bar / a_bar, t_bar, a_bar, var_a, var_s};
}

double kingman_sojourn(const TrafficParams& p, SojournDenominator denominator) {
  if (!(p.rho >= 0.0)) throw Error(ErrorCode::InvalidParams, "utilization must be non-negative");
  if (p.rho >= 1.0) {
    throw Error(ErrorCode::UtilizationAtOrAboveOne,
                "utilization " + std::to_string(p.rho) + " leaves the queue unstable");
  }
  if (!(p.t_bar > 0.0) || !(p.a_bar > 0.0) || !(p.var_a >= 0.0) || !(p.var_s >= 0.0)) {
    throw Error(ErrorCode::InvalidParams,
                "sojourn predictor needs positive means and non-negative variances");
  }
  const double t2 = p.t_bar * p.t_bar;
  const double a2 = p.a_bar * p.a_bar;
  const double load = p.rho * p.t_bar / (2.0 * (1.0 - p.rho));
  const double variability = (p.var_a + p.var_s) / t2;
  const double third_denominator =
      a2 + (denominator == SojournDenominator::ServiceVariance ? p.var_s : p.var_a);
  const double correction = (t2 + p.var_s) / third_denominator;
  return load * variability * correction + p.t_bar;
}

double poisson_pmf(const ArrivalModel& model, std::int64_t x) {
  if (x < 0) throw Error(ErrorCode::NegativeCount, "arrival count must be non-negative");
  if (!(model.lambda > 0.0) || !std::isfinite(model.lambda)) {
    throw Error(ErrorCode::InvalidParams, "arrival rate must be positive");
  }
  const double xd = static_cast<double>(x);
  return std::exp(-model.lambda + xd * std::log(model.lambda) - std::lgamma(xd + 1.0));
}

double ServiceDistribution::variance() const {
  switch (kind) {
    case ServiceKind::Exponential: return mean * mean;
    case ServiceKind::Deterministic: return 0.0;
    case ServiceKind::Lognormal: return lognormal_variance;
  }
  return 0.0;
}

double PipelineConfig::aggregate_lambda() const {
  double total = 0.0;
  for (const Publisher& p : publishers) total += p.arrivals.lambda;
  return total;
}

double PipelineConfig::utilization() const { return aggregate_lambda() * service.mean; }

TrafficParams PipelineConfig::traffic_params() const {
  const double lambda = aggregate_lambda();
  const double a_bar = 1.0 / lambda;
  return {utilization(), service.mean, a_bar, a_bar * a_bar, service.variance()};
}

void PipelineConfig::validate() const {
  if (!(duration_s >= 0.0) || !std::isfinite(duration_s)) {
    throw Error(ErrorCode::ConfigError, "duration_s must be a finite non-negative number");
  }
  if (publishers.empty()) throw Error(ErrorCode::ConfigError, "publishers must not be empty");
  for (const Publisher& p : publishers) {
    if (!(p.arrivals.lambda > 0.0)) {
      throw Error(ErrorCode::ConfigError,
                  "publishers[" + std::to_string(p.site.id) + "].lambda must be positive");
    }
    if (!world_box.contains(p.site.position)) {
      throw Error(ErrorCode::ConfigError,
                  "publishers[" + std::to_string(p.site.id) + "] lies outside world_box");
    }
  }
  if (!(service.mean > 0.0)) throw Error(ErrorCode::ConfigError, "service.mean must be positive");
  if (service.kind == ServiceKind::Lognormal && !(service.lognormal_variance > 0.0)) {
    throw Error(ErrorCode::ConfigError, "service.variance must be positive for lognormal service");
  }
  if (!(sample_interval_s > 0.0)) throw Error(ErrorCode::ConfigError, "sample_interval_s must be positive");
  if (!(query_period_s >= 0.0)) throw Error(ErrorCode::ConfigError, "query_period_s must be non-negative");
  if (utilization() >= 1.0) {
    throw Error(ErrorCode::ConfigUtilizationTooHigh,
                "aggregate utilization " + std::to_string(utilization()) + " must stay below 1");
  }
}

namespace {

class ServiceSampler {
 public:
  ServiceSampler(const ServiceDistribution& d, std::uint64_t seed) : dist_(d), rng_(seed) {
    if (d.kind == ServiceKind::Lognormal) {
      sigma2_ = std::log1p(d.lognormal_variance / (d.mean * d.mean));
      mu_ = std::log(d.mean) - 0.5 * sigma2_;
    }
  }

  double operator()() {
    switch (dist_.kind) {
      case ServiceKind::Exponential: return rng_.exponential(dist_.mean);
      case ServiceKind::Deterministic: return dist_.mean;
      case ServiceKind::Lognormal: return std::exp(mu_ + std::sqrt(sigma2_) * rng_.normal());
    }
    return dist_.mean;
  }

 private:
  ServiceDistribution dist_;
  Rng rng_;
  double mu_ = 0.0;
  double sigma2_ = 0.0;
};

struct Message {
  double arrival = 0.0;
  std::size_t publisher = 0;
  std::uint64_t sequence = 0;
};

struct NextArrival {
  double time;
  std::size_t publisher;

  bool operator>(const NextArrival& o) const {
    return time != o.time ? time > o.time : publisher > o.publisher;
  }
};

std::vector<std::uint8_t> encode_reading(std::uint64_t sequence) {
  std::vector<std::uint8_t> out(8);
  for (std::size_t i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(sequence >> (8 * i));
  return out;
}

}  // namespace

SimOutcome run_pipeline(const PipelineConfig& config) {
  config.validate();
  const GridQuantizer quantizer(config.world_box, config.bits_per_dim);
  SimOutcome outcome{SimReport{}, OrderedIndex(quantizer, config.page_capacity)};
  SimReport& report = outcome.report;
  OrderedIndex& index = outcome.index;
  report.seed = config.seed;
  report.utilization = config.utilization();
  report.kingman_prediction_s = kingman_sojourn(config.traffic_params(), config.denominator);

  const double duration = config.duration_s;
  const std::size_t n_pub = config.publishers.size();
  std::vector<MortonKey> pub_keys(n_pub);
  std::vector<Rng> arrival_rng;
  arrival_rng.reserve(n_pub);
  for (std::size_t i = 0; i < n_pub; ++i) {
    pub_keys[i] = quantizer.key_of(config.publishers[i].site.position);
    arrival_rng.emplace_back(derive_seed(config.seed, i));
  }
  ServiceSampler service(config.service, derive_seed(config.seed, 0xE71Cull));
  Rng query_rng(derive_seed(config.seed, 0x5B5Cull));

  std::priority_queue<NextArrival, std::vector<NextArrival>, std::greater<>> arrivals;
  for (std::size_t i = 0; i < n_pub; ++i) {
    arrivals.push({arrival_rng[i].exponential(1.0 / config.publishers[i].arrivals.lambda), i});
  }

  const auto whole_intervals = static_cast<std::size_t>(std::floor(duration));
  std::vector<std::uint64_t> interval_counts(whole_intervals, 0);
  std::map<std::uint64_t, std::uint64_t> per_cell;
  std::deque<Message> queue;  // front is in service
  double departure = std::numeric_limits<double>::infinity();
  double now = 0.0;
  double area = 0.0;
  double sojourn_sum = 0.0;
  double next_sample = 0.0;
  double next_query = config.query_period_s > 0.0 ? config.query_period_s
                                                  : std::numeric_limits<double>::infinity();

  const ZCurve& curve = quantizer.curve();
  const auto advance_to = [&](double t) {
    while (next_sample <= t && next_sample < duration) {
      report.queue_length_series.push_back(static_cast<std::uint32_t>(queue.size()));
      next_sample += config.sample_interval_s;
    }
    while (next_query <= t && next_query < duration) {
      // Subscriber: a random region query over what has been loaded so far.
      const auto cells = static_cast<double>(curve.cells_per_axis());
      const auto pick = [&] { return static_cast<std::uint32_t>(query_rng.uniform() * cells); };
      const std::uint32_t x0 = pick(), x1 = pick(), y0 = pick(), y1 = pick();
      const SearchExtent extent{{std::min(x0, x1), std::min(y0, y1)},
                                {std::max(x0, x1), std::max(y0, y1)}};
      report.query_hits += index.range_search(extent).size();
      ++report.queries_issued;
      next_query += config.query_period_s;
    }
    area += static_cast<double>(queue.size()) * (t - now);
    now = t;
  };

  for (;;) {
    const double next_arrival = arrivals.empty() ? std::numeric_limits<double>::infinity()
                                                 : arrivals.top().time;
    const double t = std::min(next_arrival, departure);
    if (!(t < duration)) break;
    advance_to(t);
    if (departure <= next_arrival) {
      const Message m = queue.front();
      queue.pop_front();
      ++report.served;
      sojourn_sum += now - m.arrival;
      Record r;
      r.key = pub_keys[m.publisher];
      r.site_id = config.publishers[m.publisher].site.id;
      r.timestamp_us = std::llround(m.arrival * 1e6);
      r.payload = encode_reading(m.sequence);
      index.insert(std::move(r));
      ++report.stored;
      ++per_cell[pub_keys[m.publisher].value];
      departure = queue.empty() ? std::numeric_limits<double>::infinity() : now + service();
    } else {
      const NextArrival a = arrivals.top();
      arrivals.pop();
      queue.push_back({now, a.publisher, report.published});
      ++report.published;
      const auto interval = static_cast<std::size_t>(std::floor(now));
      if (interval < whole_intervals) ++interval_counts[interval];
      if (queue.size() == 1) departure = now + service();
      arrivals.push(
          {now + arrival_rng[a.publisher].exponential(1.0 / config.publishers[a.publisher].arrivals.lambda),
           a.publisher});
    }
  }
  advance_to(duration);

  report.in_queue_at_end = queue.size();
  report.mean_sojourn_s = report.served ? sojourn_sum / static_cast<double>(report.served) : 0.0;
  report.mean_in_system = duration > 0.0 ? area / duration : 0.0;
  for (std::uint64_t c : interval_counts) {
    if (report.arrival_histogram.size() <= c) report.arrival_histogram.resize(c + 1, 0);
    ++report.arrival_histogram[c];
  }
  for (const auto& [key, count] : per_cell) report.per_cell_counts.emplace_back(MortonKey{key}, count);
  return outcome;
}

ArrivalFit arrival_fit(std::span<const std::uint64_t> histogram, const ArrivalModel& model) {
  std::uint64_t total = 0;
  for (std::uint64_t c : histogram) total += c;
  if (total < 30) {
    throw Error(ErrorCode::InsufficientSamples,
                "arrival fit needs at least 30 intervals, got " + std::to_string(total));
  }
  const double n = static_cast<double>(total);
  struct Bin {
    double observed = 0.0;
    double expected = 0.0;
  };
  std::vector<Bin> bins;
  Bin open;
  double cumulative = 0.0;
  // Left and middle bins close once they expect five intervals; everything
  // from the last open bin upward forms the tail.
  const auto last_x = static_cast<std::int64_t>(histogram.size());
  for (std::int64_t x = 0;; ++x) {
    const double p = poisson_pmf(model, x);
    const double observed = x < last_x ? static_cast<double>(histogram[static_cast<std::size_t>(x)]) : 0.0;
    open.observed += observed;
    open.expected += n * p;
    cumulative += p;
    const double tail_expected = n * std::max(0.0, 1.0 - cumulative);
    if (open.expected >= 5.0 && tail_expected >= 5.0) {
      bins.push_back(open);
      open = {};
    }
    if (x + 1 >= last_x && tail_expected < 5.0) {
      double tail_observed = 0.0;
      for (std::int64_t k = x + 1; k < last_x; ++k) tail_observed += static_cast<double>(histogram[static_cast<std::size_t>(k)]);
      open.observed += tail_observed;
      open.expected += tail_expected;
      break;
    }
  }
  if (open.expected > 0.0 || open.observed > 0.0) {
    if (bins.empty() || open.expected >= 5.0) {
      bins.push_back(open);
    } else {
      bins.back().observed += open.observed;
      bins.back().expected += open.expected;
    }
  }

  ArrivalFit fit;
  for (const Bin& b : bins) {
    const double diff = b.observed - b.expected;
    fit.statistic += diff * diff / b.expected;
  }
  fit.degrees_of_freedom = static_cast<int>(bins.size()) - 1;
  fit.p_value = fit.degrees_of_freedom > 0
                    ? boost::math::gamma_q(0.5 * fit.degrees_of_freedom, 0.5 * fit.statistic)
                    : 1.0;
  return fit;
}

}  // namespace vorosense
