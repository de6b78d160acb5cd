#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "tfqkd/channel.hpp"
#include "tfqkd/decoy.hpp"
#include "tfqkd/fock.hpp"
#include "tfqkd/lp.hpp"
#include "tfqkd/simulator.hpp"
#include "tfqkd/types.hpp"

using namespace tfqkd;

namespace {

ProtocolParams desk_protocol(double n_tot = 1e8) {
  ProtocolParams p;
  p.n_tot = n_tot;
  return p;
}

ChannelParams desk_channel(double km = 0.0) {
  ChannelParams ch;
  ch.distance_km = km;
  return ch;
}

// Exact expectations when every photon pair (j, m) is detected with the
// product-loss yield of the sampling world.
ObservedCounts world_counts(const ProtocolParams& p, const ChannelParams& ch) {
  ObservedCounts out;
  out.n_tot = p.n_tot;
  out.trials_c = p.n_tot * p.p_c * p.p_c;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      out.trials[a][b] = p.n_tot * p.p_test[a] * p.p_test[b];
      double gain = 0.0;
      for (int j = 0; j <= 40; ++j)
        for (int m = 0; m <= 40; ++m)
          gain += fock::coherent_pair_weight(p.mu_test[a], p.mu_test[b], j, m) *
                  sim::world_yield(j, m, ch);
      out.gamma[a][b] = out.trials[a][b] * gain;
    }
  return out;
}

// Ground-truth even-pair detection counts under the same yield model.
double world_even_truth(const ProtocolParams& p, const ChannelParams& ch, int a, int b) {
  const double trials = p.n_tot * p.p_test[a] * p.p_test[b];
  double acc = 0.0;
  for (int j = 0; j <= 40; ++j)
    for (int m = 0; m <= 40; ++m)
      if ((j + m) % 2 == 0)
        acc += fock::coherent_pair_weight(p.mu_test[a], p.mu_test[b], j, m) *
               sim::world_yield(j, m, ch);
  return trials * acc;
}

}  // namespace

TEST_CASE("variable layout for each option set") {
  decoy::Options opts;
  auto layout = decoy::make_layout(opts);
  CHECK(layout.yields.size() == 15);
  CHECK(layout.num_rows == 16);
  CHECK(layout.slack_base == 15);

  opts.symmetric_yields = true;
  layout = decoy::make_layout(opts);
  CHECK(layout.yields.size() == 9);

  opts.symmetric_yields = false;
  opts.diagonal_only = true;
  layout = decoy::make_layout(opts);
  CHECK(layout.num_rows == 4);
  for (const auto& jm : layout.yields) CHECK(jm.first + jm.second <= decoy::max_order);
}

TEST_CASE("options derive from the protocol flags") {
  ProtocolParams p = desk_protocol();
  p.decoy_diagonal_only = true;
  p.decoy_symmetric_yields = true;
  const auto finite = decoy::options_for(p, false);
  CHECK(finite.diagonal_only);
  CHECK(finite.symmetric_yields);
  CHECK(!finite.asymptotic);
  CHECK(finite.eps_each ==
        doctest::Approx(p.budget.epsilon_err / decoy::failure_events).epsilon(1e-14));
  const auto asym = decoy::options_for(p, true);
  CHECK(asym.asymptotic);
}

TEST_CASE("interference-model counts give a feasible program with sane bounds") {
  const auto p = desk_protocol();
  const auto counts = channel::expected_counts(p, desk_channel());
  const auto opts = decoy::options_for(p, false);

  const auto program = decoy::build_program(p, counts, true, opts);
  program.validate();
  const auto sol = lp::solve(program);
  REQUIRE(sol.status == lp::Status::optimal);
  CHECK(sol.max_violation <= 1e-6);
  const auto layout = decoy::make_layout(opts);
  for (std::size_t v = 0; v < layout.yields.size(); ++v) {
    CHECK(sol.x[v] >= -1e-9);
    CHECK(sol.x[v] <= 1.0 + 1e-9);
  }

  const auto bounds = decoy::estimate(p, counts, opts);
  CHECK(bounds.gamma_sum_upper >= 0.0);
  CHECK(bounds.gamma_2_lower >= 0.0);
  CHECK(bounds.iterations > 0);

  const auto again = decoy::estimate(p, counts, opts);
  CHECK(std::memcmp(&bounds.gamma_sum_upper, &again.gamma_sum_upper, sizeof(double)) == 0);
  CHECK(std::memcmp(&bounds.gamma_2_lower, &again.gamma_2_lower, sizeof(double)) == 0);
}

TEST_CASE("zero observations pin the lower bound at zero") {
  const auto p = desk_protocol();
  ObservedCounts counts;
  counts.n_tot = p.n_tot;
  counts.trials_c = p.n_tot * p.p_c * p.p_c;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) counts.trials[a][b] = p.n_tot * p.p_test[a] * p.p_test[b];
  const auto bounds = decoy::estimate(p, counts, decoy::options_for(p, false));
  CHECK(bounds.gamma_2_lower == 0.0);
  CHECK(bounds.gamma_sum_upper >= 0.0);
}

TEST_CASE("extra detections in the summed pairs never reduce the upper bound") {
  const auto p = desk_protocol();
  const auto base_counts = channel::expected_counts(p, desk_channel());
  const auto opts = decoy::options_for(p, false);
  const auto base = decoy::estimate(p, base_counts, opts);

  auto bumped_counts = base_counts;
  bumped_counts.gamma[0][0] += 1000.0;
  bumped_counts.gamma[1][1] += 1000.0;
  const auto bumped = decoy::estimate(p, bumped_counts, opts);
  CHECK(bumped.gamma_sum_upper >= base.gamma_sum_upper - 1e-9);
}

TEST_CASE("asymptotic bounds are linear in the round count") {
  const auto p1 = desk_protocol(1e10);
  auto p2 = p1;
  p2.n_tot = 2e10;
  const auto ch = desk_channel(100.0);
  const auto b1 = decoy::estimate(p1, channel::expected_counts_exact(p1, ch),
                                  decoy::options_for(p1, true));
  const auto b2 = decoy::estimate(p2, channel::expected_counts_exact(p2, ch),
                                  decoy::options_for(p2, true));
  CHECK(b2.gamma_sum_upper == doctest::Approx(2.0 * b1.gamma_sum_upper).epsilon(1e-9));
  CHECK(b2.gamma_2_lower == doctest::Approx(2.0 * b1.gamma_2_lower).epsilon(1e-9));
}

TEST_CASE("bounds sandwich the truth for total-photon-dependent yields") {
  const auto p = desk_protocol(1e10);
  const auto ch = desk_channel(50.0);
  const auto counts = world_counts(p, ch);
  const auto bounds = decoy::estimate(p, counts, decoy::options_for(p, true));

  const double truth_sum = world_even_truth(p, ch, 0, 0) + world_even_truth(p, ch, 1, 1);
  const double truth_2 = world_even_truth(p, ch, 2, 2);

  CHECK(bounds.gamma_sum_upper >= truth_sum * (1.0 - 1e-9));
  CHECK(bounds.gamma_2_lower <= truth_2 * (1.0 + 1e-9));
  // The estimation layer stays usefully tight on exact expectations; the
  // measured slack is under one percent, so 10 percent headroom is generous.
  CHECK(bounds.gamma_sum_upper <= truth_sum * 1.1);
  CHECK(bounds.gamma_2_lower >= truth_2 * 0.9);
}

TEST_CASE("contradictory counts are rejected as inconsistent") {
  const auto p = desk_protocol();
  auto counts = channel::expected_counts(p, desk_channel());
  counts.gamma[0][0] = counts.trials[0][0];  // every near-vacuum pair detected
  counts.gamma[3][3] = 0.0;                  // no bright pair detected
  CHECK_THROWS_AS(decoy::estimate(p, counts, decoy::options_for(p, false)),
                  InconsistentCountsError);
}
