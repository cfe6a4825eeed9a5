#pragma once

#include "isolab/theta.hpp"

#include <map>
#include <string>
#include <vector>

namespace isolab {

struct Bracket {
  double lower;
  double upper;
};

struct ConstantsReport {
  double k_cd = 0.0;
  double k_ls = 0.0;
  Bracket k_ls_bracket{0.0, 0.0};
  double k_ls_plus = 0.0;
  Bracket k_ls_plus_bracket{0.0, 0.0};
  bool k_ls_plus_extrapolated = false;  // final slopes had not settled within 2%
  double k_t_upper = 0.0;  // certified: any test point bounds K_T from above
  double k_is1_plus = 0.0;
  bool lyapunov_finite = false;
  std::map<std::string, std::string> provenance;
  std::vector<std::string> flags;
  /// constants this library does not estimate, with a reason each
  std::map<std::string, std::string> not_computed;
};

ConstantsReport compute_constants(const ReferenceMeasure& m, const ThetaCurve& curve);

/// 2 D / W2^2 for one test density against nu.
double transport_ratio(const GridDensity& d);

struct AuditCheck {
  std::string name;
  double lhs;
  double rhs;
  double margin;  // rhs - lhs
  bool pass;
  bool applicable = true;
  /// false when lhs or rhs is only a one-sided estimate and a pass is mere evidence
  bool decisive = true;
};

struct ChainAudit {
  std::vector<AuditCheck> checks;
  bool all_pass() const;
};

/// lhs <= rhs + rel_tol * |rhs| for each computable link.
ChainAudit chain_audit(const ConstantsReport& report, double rel_tol = 0.02);

}  // namespace isolab
