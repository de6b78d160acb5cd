#pragma once

#include "tfqkd/lp.hpp"
#include "tfqkd/types.hpp"

// Photon-pair yield estimation. Observed test-mode counts constrain the
// unknown yields Y_jm (detection probability given a j,m photon pair) through
// Poisson mixing; two linear programs over that feasible set bound the
// even-photon-pair detection statistics the phase-error analysis needs.

namespace tfqkd::decoy {

struct Options {
  bool asymptotic = false;        // counts are exact expectations
  bool diagonal_only = false;     // use only matched intensity pairs as rows
  bool symmetric_yields = false;  // identify Y_jm with Y_mj
  double eps_each = 0.0;          // per-event failure probability (finite mode)
};

// Yield variables cover all j+m <= max_order; higher orders ride in one
// bounded slack per constraint row.
inline constexpr int max_order = 4;

// Index layout of the LP variables for the given options.
struct Layout {
  std::vector<std::pair<int, int>> yields;  // variable -> (j,m)
  int num_rows = 0;                         // constraint rows == slack count
  int slack_base = 0;                       // first slack variable index
};

Layout make_layout(const Options& opts);

// The LP with the given objective sense baked in. maximize_sum selects the
// even-pair sum objective over intensity pairs (0,0) and (1,1); otherwise the
// objective is the even-pair count for intensity pair (2,2), minimized.
lp::LinearProgram build_program(const ProtocolParams& p, const ObservedCounts& counts,
                                bool maximize_sum, const Options& opts);

struct Bounds {
  double gamma_sum_upper = 0.0;  // even detections, intensity pairs (0,0)+(1,1)
  double gamma_2_lower = 0.0;    // even detections, intensity pair (2,2)
  double lp_max = 0.0;           // raw objective values on the mean scale
  double lp_min = 0.0;
  int iterations = 0;            // summed over both solves
};

// Number of elementary failure events the epsilon_err budget is split across.
inline constexpr int failure_events = 52;

// Solves both programs and applies the statistical dressing. Throws
// InconsistentCountsError when the feasible region is empty.
Bounds estimate(const ProtocolParams& p, const ObservedCounts& counts,
                const Options& opts);

// Convenience: options derived from the protocol parameters.
Options options_for(const ProtocolParams& p, bool asymptotic);

}  // namespace tfqkd::decoy
