#pragma once

#include "isolab/psibound.hpp"
#include "isolab/transport.hpp"

#include <optional>
#include <string>
#include <vector>

namespace isolab {

struct FlowRecord {
  double t;
  double entropy;
  double fisher;
  double w2_from_start;
  double mass;  // int rho_t d nu before renormalization
  double mean;
  double variance;
};

struct FlowTrace {
  std::vector<FlowRecord> records;
  std::optional<GridDensity> final_state;  // last stable state
  bool aborted = false;
  std::string abort_reason;
  /// rho_0 left [1e-6, 1e6] somewhere on the support (kept as given)
  bool rho0_out_of_range = false;
};

struct FlowOptions {
  double dt = 0.01;
  double t_end = 1.0;
  int record_every = 1;
  QuantileGrid quantiles{};
};

/// TR-BDF2 for d rho/dt = rho'' - V' rho' with zero flux under nu; the first stage
/// is a Crank-Nicolson step, the second BDF2.
FlowTrace evolve(const ReferenceMeasure& m, const GridDensity& rho0, const FlowOptions& opts = {});

struct DissipationReport {
  double max_violation;  // max |dD/dt + I| / max(I, 1e-6) at interior records
  double at_time;
};

DissipationReport check_dissipation(const FlowTrace& trace);

struct TransportBoundReport {
  double worst_slack;  // min over records of Upsilon(D_t, D_0) - W2(mu_0, mu_t)
  bool monotone_f;     // W2(mu_0, mu_t) + Upsilon(0, D_t) nonincreasing within 1e-4
  double max_increase;
};

TransportBoundReport check_transport_bound(const FlowTrace& trace, const ThetaFunction& theta);

struct OuState {
  double mean;
  double variance;
  double entropy;
  double fisher;
  double w2_from_start;
};

/// Closed form for the flow from N(b, var) toward N(0, 1).
OuState ou_closed_form(double b, double var, double t);

}  // namespace isolab
