#include "tfqkd/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>
#include <vector>

#include "tfqkd/channel.hpp"
#include "tfqkd/stats.hpp"

namespace tfqkd::optimizer {

namespace {

using Point = std::array<double, num_dims>;

double clamp(double v, const Interval& iv) { return std::min(std::max(v, iv.lo), iv.hi); }

ProtocolParams to_params(const Point& x, const SearchSpace& space, double n_tot) {
  ProtocolParams p;
  p.mu = x[0];
  p.mu_test = {space.mu0, x[1], x[2], x[3]};
  p.p_c = x[4];
  p.p_test = {x[5], x[6], x[7], x[8]};
  p.n_tot = n_tot;
  return p;
}

constexpr double invalid_score = -1e300;

struct Evaluation {
  double rate = -1.0;  // -1 marks an invalid probe
  double score = invalid_score;
  keyrate::KeyRateResult result;
};

class Objective {
 public:
  Objective(const SearchSpace& space, const ChannelParams& channel, double n_tot,
            const Options& options)
      : space_(space), channel_(channel), n_tot_(n_tot), options_(options) {}

  Evaluation operator()(const Point& x) const {
    ProtocolParams p = to_params(x, space_, n_tot_);
    p.budget = options_.budget;
    p.prefactor = options_.prefactor;
    p.decoy_diagonal_only = options_.decoy_diagonal_only;
    p.decoy_symmetric_yields = options_.decoy_symmetric_yields;
    Evaluation ev;
    try {
      if (std::isinf(n_tot_)) {
        ev.result = keyrate::asymptotic_rate(p, channel_);
      } else {
        const ObservedCounts counts = channel::expected_counts(p, channel_);
        ev.result = keyrate::key_length(counts, p, options_.f_ec);
      }
      ev.rate = ev.result.rate;
      ev.score = shaped_score(ev.result);
    } catch (const ConfigError&) {
    } catch (const InconsistentCountsError&) {
    } catch (const std::runtime_error&) {
      // numerical failure on an extreme probe: skip the point
    }
    return ev;
  }

 private:
  // Positive rates score as themselves.  Zero-rate points are ranked below
  // every positive rate but still ordered, so the simplex can walk off the
  // no-key plateau: first by signed key length once the phase error ratio is
  // informative, and below that by the raw phase error ratio itself.
  double shaped_score(const keyrate::KeyRateResult& r) const {
    if (r.key_length > 0.0) return r.rate;
    if (r.gamma_c <= 0.0) return -2.0 - 1e6;
    const double pe_raw = r.f / r.gamma_c;
    if (!(pe_raw < 0.5)) return -2.0 - std::min(pe_raw, 1e6);
    double g = r.gamma_c * (1.0 - stats::binary_entropy(pe_raw)) - r.h_ec_bits;
    if (!std::isinf(n_tot_)) {
      g -= options_.budget.zeta_bits + options_.budget.zeta_prime_bits;
    }
    const double rounds =
        std::isinf(n_tot_) ? keyrate::asymptotic_reference_rounds : n_tot_;
    return -1.0 + std::max(g / rounds, -0.999);
  }

  const SearchSpace& space_;
  const ChannelParams& channel_;
  double n_tot_;
  const Options& options_;
};

// Lexicographic comparison used to break rate ties deterministically.
bool lex_less(const Point& a, const Point& b) {
  for (int i = 0; i < num_dims; ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

struct Candidate {
  Point x{};
  Evaluation ev;
  bool valid = false;
};

void consider(Candidate& best, const Point& x, const Evaluation& ev) {
  if (ev.rate < 0.0) return;
  if (!best.valid || ev.score > best.ev.score ||
      (ev.score == best.ev.score && lex_less(x, best.x))) {
    best = {x, ev, true};
  }
}

class Restart {
 public:
  Restart(const Objective& objective, const SearchSpace& space, int eval_budget,
          std::uint64_t seed)
      : objective_(objective), space_(space), budget_(eval_budget), rng_(seed) {}

  // Latin-hypercube style start: one stratum per restart and dimension,
  // jittered inside the stratum.
  Point seed_point(int index, int total) {
    const auto ivs = space_.intervals();
    Point x;
    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    for (int d = 0; d < num_dims; ++d) {
      const double width = ivs[d].hi - ivs[d].lo;
      const int stratum = static_cast<int>((index + d) % std::max(total, 1));
      const double frac = (stratum + jitter(rng_)) / std::max(total, 1);
      x[d] = ivs[d].lo + frac * width;
    }
    return feasible_projection(x, space_);
  }

  Candidate run(int index, int total) {
    const auto ivs = space_.intervals();
    const int n = num_dims;
    std::vector<Point> simplex;
    simplex.reserve(n + 1);
    Point base = seed_point(index, total);
    simplex.push_back(base);
    for (int d = 0; d < n; ++d) {
      Point v = base;
      const double width = ivs[d].hi - ivs[d].lo;
      double step = 0.15 * width;
      if (v[d] + step > ivs[d].hi) step = -step;
      v[d] += step;
      simplex.push_back(feasible_projection(v, space_));
    }

    std::vector<Evaluation> vals(simplex.size());
    for (std::size_t i = 0; i < simplex.size(); ++i) {
      vals[i] = eval(simplex[i]);
      consider(best_, simplex[i], vals[i]);
    }

    // Downhill simplex on the shaped score (invalid probes rank worst).
    auto score = [](const Evaluation& e) { return e.score; };
    while (evals_ < budget_) {
      std::vector<std::size_t> order(simplex.size());
      std::iota(order.begin(), order.end(), 0u);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (score(vals[a]) != score(vals[b])) return score(vals[a]) > score(vals[b]);
        return lex_less(simplex[a], simplex[b]);
      });
      const std::size_t bi = order.front(), wi = order.back(), si = order[order.size() - 2];

      Point centroid{};
      for (std::size_t i : order)
        if (i != wi)
          for (int d = 0; d < n; ++d) centroid[d] += simplex[i][d];
      for (int d = 0; d < n; ++d) centroid[d] /= n;

      auto blend = [&](double t) {
        Point p;
        for (int d = 0; d < n; ++d) p[d] = centroid[d] + t * (centroid[d] - simplex[wi][d]);
        return feasible_projection(p, space_);
      };

      const Point refl = blend(1.0);
      const Evaluation refl_ev = eval(refl);
      consider(best_, refl, refl_ev);
      if (score(refl_ev) > score(vals[bi])) {
        const Point exp_p = blend(2.0);
        const Evaluation exp_ev = eval(exp_p);
        consider(best_, exp_p, exp_ev);
        if (score(exp_ev) > score(refl_ev)) {
          simplex[wi] = exp_p;
          vals[wi] = exp_ev;
        } else {
          simplex[wi] = refl;
          vals[wi] = refl_ev;
        }
      } else if (score(refl_ev) > score(vals[si])) {
        simplex[wi] = refl;
        vals[wi] = refl_ev;
      } else {
        const Point con = blend(-0.5);
        const Evaluation con_ev = eval(con);
        consider(best_, con, con_ev);
        if (score(con_ev) > score(vals[wi])) {
          simplex[wi] = con;
          vals[wi] = con_ev;
        } else {
          for (std::size_t i : order) {
            if (i == bi) continue;
            for (int d = 0; d < n; ++d)
              simplex[i][d] = simplex[bi][d] + 0.5 * (simplex[i][d] - simplex[bi][d]);
            simplex[i] = feasible_projection(simplex[i], space_);
            vals[i] = eval(simplex[i]);
            consider(best_, simplex[i], vals[i]);
            if (evals_ >= budget_) break;
          }
        }
      }
      // Converged simplexes stop early to save budget for refinement.
      double spread = 0.0;
      for (std::size_t i = 1; i < simplex.size(); ++i)
        for (int d = 0; d < n; ++d) spread = std::max(spread, std::abs(simplex[i][d] - simplex[0][d]));
      if (spread < 1e-10) break;
    }
    return best_;
  }

  int evaluations() const { return evals_; }
  int attempted() const { return attempted_; }

 private:
  Evaluation eval(const Point& x) {
    ++evals_;
    ++attempted_;
    return objective_(x);
  }

  const Objective& objective_;
  const SearchSpace& space_;
  int budget_ = 0;
  int evals_ = 0;
  int attempted_ = 0;
  std::mt19937_64 rng_;
  Candidate best_;
};

}  // namespace

bool SearchSpace::collapsed() const {
  for (const Interval& iv : intervals())
    if (iv.lo != iv.hi) return false;
  return true;
}

void SearchSpace::validate() const {
  for (const Interval& iv : intervals())
    if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
      throw ConfigError("search space: empty or non-finite interval");
  if (!(mu0 >= 0.0)) throw ConfigError("search space: mu0 must be >= 0");
}

std::array<double, num_dims> feasible_projection(std::array<double, num_dims> x,
                                                 const SearchSpace& space) {
  const auto ivs = space.intervals();
  for (int d = 0; d < num_dims; ++d) x[d] = clamp(x[d], ivs[d]);

  // Probability simplex: p_c + sum p_i <= 1, by uniform rescaling. The
  // threshold leaves sub-1e-12 oversubscription alone so that projecting an
  // already-projected point reproduces it bit for bit.
  double psum = x[4] + x[5] + x[6] + x[7] + x[8];
  if (psum > 1.0 + 1e-12) {
    const double scale = 1.0 / psum;
    for (int d = 4; d <= 8; ++d) x[d] = clamp(x[d] * scale, ivs[d]);
  }

  // Intensity ordering mu1 > mu2: swap, then separate.
  if (x[1] <= x[2]) {
    std::swap(x[1], x[2]);
    x[1] = clamp(x[1], ivs[1]);
    x[2] = clamp(x[2], ivs[2]);
    if (x[1] <= x[2]) x[2] = std::max(ivs[2].lo, x[1] - 1e-6);
    if (x[1] <= x[2]) x[1] = std::min(ivs[1].hi, x[2] + 1e-6);
  }

  // Validity window (mu1 - mu2)/mu2 < p0^2 e^{-2 mu0} / (p1^2 e^{-2 mu1}):
  // shrink the gap from above until it holds. When mu1 is pinned at its box
  // floor, raise mu2 toward mu1 instead; only give up when both are pinned.
  for (int iter = 0; iter < 64; ++iter) {
    if (!(x[2] > 0.0) || !(x[5] > 0.0) || !(x[6] > 0.0)) break;
    const double bound = x[5] * x[5] * std::exp(-2.0 * space.mu0) /
                         (x[6] * x[6] * std::exp(-2.0 * x[1]));
    const double ratio = (x[1] - x[2]) / x[2];
    if (ratio > 0.0 && ratio < bound) break;
    double target = x[2] * (1.0 + 0.95 * bound);
    target = clamp(target, ivs[1]);
    if (target <= x[2]) target = std::min(ivs[1].hi, x[2] + 1e-6);
    if (target != x[1]) {
      x[1] = target;
      continue;
    }
    double lift = clamp(x[1] / (1.0 + 0.95 * bound), ivs[2]);
    if (lift >= x[1]) lift = std::max(ivs[2].lo, x[1] - 1e-6);
    if (lift == x[2]) break;
    x[2] = lift;
  }
  return x;
}

Result optimize(const SearchSpace& space, const ChannelParams& channel, double n_tot,
                const Options& options) {
  space.validate();
  channel.validate();
  if (!(n_tot >= 0.0)) throw ConfigError("optimize: n_tot must be >= 0 or infinity");
  if (options.restarts < 1 || options.max_evaluations < options.restarts)
    throw ConfigError("optimize: bad restart/evaluation budget");

  const Objective objective(space, channel, n_tot, options);

  if (space.collapsed()) {
    Point x;
    const auto ivs = space.intervals();
    for (int d = 0; d < num_dims; ++d) x[d] = ivs[d].lo;
    x = feasible_projection(x, space);
    const Evaluation ev = objective(x);
    if (ev.rate < 0.0)
      throw SearchFailureError("optimize: the collapsed search point is infeasible", 1);
    return {to_params(x, space, n_tot), ev.result, 1};
  }

  const int restarts = options.restarts;
  const int refine_budget = std::max(options.max_evaluations / 5, num_dims * 4);
  const int per_restart = std::max((options.max_evaluations - refine_budget) / restarts, num_dims + 2);

  std::vector<std::future<std::pair<Candidate, int>>> futures;
  futures.reserve(restarts);
  for (int k = 0; k < restarts; ++k) {
    futures.push_back(std::async(std::launch::async, [&, k] {
      Restart restart(objective, space, per_restart,
                      options.seed ^ (0x9E3779B97F4A7C15ull * (k + 1)));
      Candidate c = restart.run(k, restarts);
      return std::make_pair(c, restart.evaluations());
    }));
  }

  Candidate best;
  int total_evals = 0;
  for (auto& f : futures) {
    auto [cand, evals] = f.get();
    total_evals += evals;
    if (cand.valid) consider(best, cand.x, cand.ev);
  }

  if (!best.valid)
    throw SearchFailureError(
        "optimize: no feasible parameter set found in the search space", total_evals);

  // Coordinate refinement: shrinking pattern probes around the merged best.
  const auto ivs = space.intervals();
  int remaining = refine_budget;
  double scale = 0.05;
  for (int round = 0; round < 3 && remaining > 0; ++round, scale *= 0.25) {
    for (int d = 0; d < num_dims && remaining > 0; ++d) {
      const double width = ivs[d].hi - ivs[d].lo;
      if (width == 0.0) continue;
      for (double dir : {-1.0, 1.0}) {
        if (remaining <= 0) break;
        Point probe = best.x;
        probe[d] += dir * scale * width;
        probe = feasible_projection(probe, space);
        const Evaluation ev = objective(probe);
        --remaining;
        ++total_evals;
        consider(best, probe, ev);
      }
    }
  }

  return {to_params(best.x, space, n_tot), best.ev.result, total_evals};
}

}  // namespace tfqkd::optimizer
