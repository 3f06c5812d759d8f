#pragma once

#include <stdexcept>
#include <string>

namespace scl {

// Configuration / scenario file problems. The message always names the
// offending key so harness users can fix the file without reading code.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown by the bracket decomposition when the input polynomial is not
// inside the space the operation is defined on.
class NotInSpace : public std::invalid_argument {
 public:
  explicit NotInSpace(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown by the hyperbolic solver when the leading density loses positivity
// (min rho0 below a fixed fraction of its initial minimum).
class BlowUp : public std::runtime_error {
 public:
  BlowUp(double time, double min_rho)
      : std::runtime_error("density floor breached at t=" + std::to_string(time) +
                           " (min rho0 = " + std::to_string(min_rho) + ")"),
        t(time),
        min_rho0(min_rho) {}
  double t;
  double min_rho0;
};

// Thrown by a stage reduction when the oscillation count cannot push the
// terminal gap below the stage tolerance.
class OscillationInsufficient : public std::runtime_error {
 public:
  OscillationInsufficient(double gap_, double tol_, int osc_)
      : std::runtime_error("terminal gap " + std::to_string(gap_) +
                           " above stage tolerance " + std::to_string(tol_) +
                           " at oscillation count " + std::to_string(osc_)),
        gap(gap_),
        tol(tol_),
        osc(osc_) {}
  double gap;
  double tol;
  int osc;
};

// Thrown by the full pipeline after exhausting its schedules.
class TargetUnreached : public std::runtime_error {
 public:
  TargetUnreached(double best_, double tol_)
      : std::runtime_error("pipeline exhausted; best terminal error " +
                           std::to_string(best_) + " vs requested " +
                           std::to_string(tol_)),
        best(best_),
        tol(tol_) {}
  double best;
  double tol;
};

}  // namespace scl
