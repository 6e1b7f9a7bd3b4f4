#include "metacog/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "metacog/errors.hpp"

namespace metacog {

namespace {

std::size_t tail_count(std::size_t n, double fraction) {
  const auto k = static_cast<std::size_t>(
      std::ceil(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double final_return(const RunRecord& record, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw std::invalid_argument("final_return: tail_fraction must lie in (0, 1]");
  }
  if (record.diverged) {
    return record.failure_threshold;
  }
  if (record.eval_returns.empty()) {
    throw std::invalid_argument("final_return: record has no evaluation checkpoints");
  }
  const std::size_t k = tail_count(record.eval_returns.size(), tail_fraction);
  double sum = 0.0;
  for (std::size_t i = record.eval_returns.size() - k; i < record.eval_returns.size(); ++i) {
    sum += record.eval_returns[i];
  }
  return sum / static_cast<double>(k);
}

double cvar_at(std::vector<double> returns, double fraction) {
  if (returns.empty()) {
    throw std::invalid_argument("cvar_at: empty return sample");
  }
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("cvar_at: fraction must lie in (0, 1)");
  }
  std::sort(returns.begin(), returns.end());
  const std::size_t k = tail_count(returns.size(), fraction);
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sum += returns[i];
  }
  return sum / static_cast<double>(k);
}

bool run_failed(const RunRecord& record, double window_fraction) {
  if (record.diverged) {
    return true;
  }
  if (record.eval_returns.empty()) {
    return false;
  }
  const std::size_t k = tail_count(record.eval_returns.size(), window_fraction);
  for (std::size_t i = record.eval_returns.size() - k; i < record.eval_returns.size(); ++i) {
    if (record.eval_returns[i] >= record.failure_threshold) {
      return false;
    }
  }
  return true;
}

double late_failure_rate(const std::vector<RunRecord>& records,
                         double window_fraction) {
  if (records.empty()) {
    throw std::invalid_argument("late_failure_rate: no records");
  }
  const std::string& env = records.front().environment;
  for (const RunRecord& r : records) {
    if (r.environment != env) {
      throw std::invalid_argument("late_failure_rate: records mix environments");
    }
  }
  std::size_t failing = 0;
  for (const RunRecord& r : records) {
    if (run_failed(r, window_fraction)) {
      ++failing;
    }
  }
  return static_cast<double>(failing) / static_cast<double>(records.size());
}

namespace {

std::vector<std::string> ordering_by_mean(
    const std::map<std::string, std::vector<double>>& returns_by_variant,
    const std::map<std::string, double>& means) {
  std::vector<std::string> order;
  order.reserve(returns_by_variant.size());
  for (const auto& [name, _] : returns_by_variant) {
    order.push_back(name);
  }
  std::sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    const double ma = means.at(a);
    const double mb = means.at(b);
    if (ma != mb) return ma > mb;
    return a < b;
  });
  return order;
}

}  // namespace

double bootstrap_rank_stability(
    const std::map<std::string, std::vector<double>>& method_returns,
    int n_resamples, Rng& rng) {
  if (method_returns.size() < 2) {
    throw std::invalid_argument("bootstrap_rank_stability: need >= 2 variants");
  }
  for (const auto& [name, returns] : method_returns) {
    if (returns.size() < 2) {
      throw std::invalid_argument("bootstrap_rank_stability: variant '" + name +
                                  "' has fewer than 2 seeds");
    }
  }
  if (n_resamples <= 0) {
    throw std::invalid_argument("bootstrap_rank_stability: n_resamples must be positive");
  }

  std::map<std::string, double> base_means;
  for (const auto& [name, returns] : method_returns) {
    base_means[name] = mean_of(returns);
  }
  const std::vector<std::string> base_order = ordering_by_mean(method_returns, base_means);

  int matches = 0;
  std::map<std::string, double> means;
  for (int r = 0; r < n_resamples; ++r) {
    for (const auto& [name, returns] : method_returns) {
      double sum = 0.0;
      for (std::size_t i = 0; i < returns.size(); ++i) {
        sum += returns[rng.index(returns.size())];
      }
      means[name] = sum / static_cast<double>(returns.size());
    }
    if (ordering_by_mean(method_returns, means) == base_order) {
      ++matches;
    }
  }
  return static_cast<double>(matches) / static_cast<double>(n_resamples);
}

MetricSummary summarize(const std::string& variant,
                        const std::vector<RunRecord>& records,
                        double tail_fraction, double window_fraction) {
  if (records.empty()) {
    throw std::invalid_argument("summarize: no records");
  }
  std::vector<double> finals;
  finals.reserve(records.size());
  for (const RunRecord& r : records) {
    finals.push_back(final_return(r, tail_fraction));
  }
  MetricSummary s;
  s.variant = variant;
  s.n_seeds = static_cast<int>(records.size());
  s.mean_final_return = mean_of(finals);
  // Across-seed dispersion as the sample standard deviation.
  if (finals.size() > 1) {
    double acc = 0.0;
    for (double v : finals) {
      acc += (v - s.mean_final_return) * (v - s.mean_final_return);
    }
    s.std_final_return = std::sqrt(acc / static_cast<double>(finals.size() - 1));
  }
  s.cvar20 = cvar_at(finals, 0.2);
  s.late_failure_rate = late_failure_rate(records, window_fraction);
  return s;
}

}  // namespace metacog
