#include "anntune/tpe.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "anntune/errors.hpp"
#include "anntune/pareto.hpp"

namespace anntune {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// One search-space axis as seen by the estimator. Integer axes live on
// [lo - 0.5, hi + 0.5] so that every grid point owns a unit cell.
struct Axis {
  double low;
  double high;
  bool integer;

  double range() const { return high - low; }
};

// Truncated Gaussian mixture over one axis.
class ParzenEstimator {
 public:
  ParzenEstimator(const Axis& axis, const std::vector<double>& obs, double bandwidth_floor)
      : axis_(axis) {
    const double range = std::max(axis.range(), 1e-12);
    double sigma = range;
    if (obs.size() >= 2) {
      const double mean = std::accumulate(obs.begin(), obs.end(), 0.0) / static_cast<double>(obs.size());
      double var = 0.0;
      for (double x : obs) var += (x - mean) * (x - mean);
      var /= static_cast<double>(obs.size() - 1);
      sigma = 1.06 * std::sqrt(var) * std::pow(static_cast<double>(obs.size()), -0.2);
    } else if (obs.size() == 1) {
      sigma = 0.0;
    }
    // The floor widens while observations are few so early good groups do
    // not collapse onto one point; it never drops below bandwidth_floor.
    const double adaptive = range / (1.0 + static_cast<double>(obs.size()));
    sigma = std::clamp(sigma, std::max(bandwidth_floor, adaptive / range) * range, range);

    for (double x : obs) add(x, sigma);
    add(0.5 * (axis.low + axis.high), range);  // prior
  }

  double sample(std::mt19937_64& rng) const {
    std::uniform_int_distribution<std::size_t> comp(0, mus_.size() - 1);
    const std::size_t c = comp(rng);
    std::normal_distribution<double> gauss(mus_[c], sigmas_[c]);
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double x = gauss(rng);
      if (x >= axis_.low && x <= axis_.high) return x;
    }
    return std::clamp(mus_[c], axis_.low, axis_.high);
  }

  double log_density(double x) const {
    double total = 0.0;
    for (std::size_t c = 0; c < mus_.size(); ++c) {
      const double mu = mus_[c];
      const double s = sigmas_[c];
      double p = 0.0;
      if (axis_.integer) {
        p = normal_cdf((x + 0.5 - mu) / s) - normal_cdf((x - 0.5 - mu) / s);
      } else {
        const double z = (x - mu) / s;
        p = std::exp(-0.5 * z * z) / (s * std::sqrt(2.0 * M_PI));
      }
      total += p / norms_[c];
    }
    total /= static_cast<double>(mus_.size());
    return std::log(std::max(total, std::numeric_limits<double>::min()));
  }

 private:
  void add(double mu, double sigma) {
    mus_.push_back(mu);
    sigmas_.push_back(sigma);
    const double z = normal_cdf((axis_.high - mu) / sigma) - normal_cdf((axis_.low - mu) / sigma);
    norms_.push_back(std::max(z, 1e-300));
  }

  Axis axis_;
  std::vector<double> mus_;
  std::vector<double> sigmas_;
  std::vector<double> norms_;
};

std::array<Axis, 3> axes_of(const SearchSpace& s) {
  return {Axis{static_cast<double>(s.d_min) - 0.5, static_cast<double>(s.d_max) + 0.5, true},
          Axis{s.alpha_min, s.alpha_max, false},
          Axis{static_cast<double>(s.clusters_min) - 0.5, static_cast<double>(s.clusters_max) + 0.5,
               true}};
}

std::array<double, 3> coords_of(const TrialParams& p) {
  return {static_cast<double>(p.d), p.alpha, static_cast<double>(p.num_clusters)};
}

TrialParams params_from(const SearchSpace& s, const std::array<double, 3>& x) {
  TrialParams p;
  p.d = static_cast<std::size_t>(std::clamp(std::llround(x[0]), static_cast<long long>(s.d_min),
                                            static_cast<long long>(s.d_max)));
  p.alpha = std::clamp(x[1], s.alpha_min, s.alpha_max);
  p.num_clusters = static_cast<std::size_t>(
      std::clamp(std::llround(x[2]), static_cast<long long>(s.clusters_min),
                 static_cast<long long>(s.clusters_max)));
  return p;
}

std::vector<double> crowding_distance(const std::vector<TrialRecord>& h,
                                      const std::vector<std::size_t>& members) {
  std::vector<double> dist(members.size(), 0.0);
  if (members.size() <= 2) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    return dist;
  }
  for (int objective = 0; objective < 2; ++objective) {
    auto value = [&](std::size_t m) {
      return objective == 0 ? h[members[m]].recall : h[members[m]].qps;
    };
    std::vector<std::size_t> order(members.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    const double span = value(order.back()) - value(order.front());
    dist[order.front()] = dist[order.back()] = std::numeric_limits<double>::infinity();
    if (span <= 0.0) continue;
    for (std::size_t i = 1; i + 1 < order.size(); ++i) {
      dist[order[i]] += (value(order[i + 1]) - value(order[i - 1])) / span;
    }
  }
  return dist;
}

}  // namespace

std::size_t good_group_size(std::size_t n, double gamma) {
  const auto g = static_cast<std::size_t>(std::ceil(gamma * static_cast<double>(n) - 1e-12));
  return std::max<std::size_t>(1, g);
}

std::vector<std::size_t> rank_history(const std::vector<TrialRecord>& history,
                                      const TpeOptions& options) {
  const std::size_t n = history.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto by_index = [&](std::size_t a, std::size_t b) {
    return history[a].trial_index < history[b].trial_index ||
           (history[a].trial_index == history[b].trial_index && a < b);
  };

  if (options.mode == TuneMode::kConstrained) {
    auto tier = [&](const TrialRecord& r) {
      if (r.failed) return 2;
      return r.recall >= options.recall_threshold ? 0 : 1;
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const TrialRecord& ra = history[a];
      const TrialRecord& rb = history[b];
      const int ta = tier(ra), tb = tier(rb);
      if (ta != tb) return ta < tb;
      if (ta == 0 && ra.qps != rb.qps) return ra.qps > rb.qps;
      if (ta == 1 && ra.recall != rb.recall) return ra.recall > rb.recall;
      return by_index(a, b);
    });
    return order;
  }

  const std::vector<std::size_t> rank = nondomination_ranks(history);
  std::vector<double> crowd(n, 0.0);
  const std::size_t max_rank = n == 0 ? 0 : *std::max_element(rank.begin(), rank.end());
  for (std::size_t level = 0; level <= max_rank; ++level) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (rank[i] == level && !history[i].failed) members.push_back(i);
    }
    const auto cd = crowding_distance(history, members);
    for (std::size_t m = 0; m < members.size(); ++m) crowd[members[m]] = cd[m];
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (history[a].failed != history[b].failed) return !history[a].failed;
    if (rank[a] != rank[b]) return rank[a] < rank[b];
    if (crowd[a] != crowd[b]) return crowd[a] > crowd[b];
    return by_index(a, b);
  });
  return order;
}

GoodBadSplit split_history(const std::vector<TrialRecord>& history, const TpeOptions& options) {
  GoodBadSplit split;
  if (history.empty()) return split;
  const auto order = rank_history(history, options);
  const std::size_t n_good = std::min(history.size(), good_group_size(history.size(), options.gamma));
  split.good.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_good));
  split.bad.assign(order.begin() + static_cast<std::ptrdiff_t>(n_good), order.end());
  return split;
}

TrialParams sample_uniform(const SearchSpace& space, std::uint64_t seed) {
  space.validate();
  std::mt19937_64 rng(seed);
  TrialParams p;
  p.d = std::uniform_int_distribution<std::size_t>(space.d_min, space.d_max)(rng);
  p.alpha = space.alpha_min == space.alpha_max
                ? space.alpha_min
                : std::uniform_real_distribution<double>(space.alpha_min, space.alpha_max)(rng);
  p.num_clusters = std::uniform_int_distribution<std::size_t>(space.clusters_min,
                                                              space.clusters_max)(rng);
  return p;
}

TpeSampler::TpeSampler(SearchSpace space, TpeOptions options)
    : space_(space), options_(options) {
  space_.validate();
  if (!(options_.gamma > 0.0 && options_.gamma < 1.0)) {
    throw ArgumentError("tpe: gamma must lie in (0, 1)");
  }
  if (options_.candidates_per_suggest == 0) {
    throw ArgumentError("tpe: candidates_per_suggest must be positive");
  }
}

TrialParams TpeSampler::suggest(const std::vector<TrialRecord>& history) const {
  std::mt19937_64 rng = make_rng(options_.seed, history.size());
  if (history.size() < options_.startup_trials) {
    return sample_uniform(space_, rng());
  }

  const GoodBadSplit split = split_history(history, options_);
  const auto axes = axes_of(space_);
  std::vector<ParzenEstimator> good_est;
  std::vector<ParzenEstimator> bad_est;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    std::vector<double> good_obs, bad_obs;
    for (std::size_t i : split.good) good_obs.push_back(coords_of(history[i].params)[a]);
    for (std::size_t i : split.bad) bad_obs.push_back(coords_of(history[i].params)[a]);
    good_est.emplace_back(axes[a], good_obs, options_.bandwidth_floor);
    bad_est.emplace_back(axes[a], bad_obs, options_.bandwidth_floor);
  }

  TrialParams best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < options_.candidates_per_suggest; ++c) {
    std::array<double, 3> x{};
    for (std::size_t a = 0; a < axes.size(); ++a) {
      x[a] = axes[a].range() > 0.0 ? good_est[a].sample(rng) : axes[a].low;
    }
    const TrialParams cand = params_from(space_, x);
    const auto cx = coords_of(cand);
    double score = 0.0;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      if (axes[a].range() <= 0.0) continue;
      score += good_est[a].log_density(cx[a]) - bad_est[a].log_density(cx[a]);
    }
    if (c == 0 || score > best_score) {
      best_score = score;
      best = cand;
    }
  }
  return best;
}

}  // namespace anntune
