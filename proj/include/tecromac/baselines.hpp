#pragma once

#include <stdexcept>
#include <string>

#include "tecromac/solver.hpp"

namespace tecromac {

class NoObservationsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per (pixel, channel) linear interpolation in time between observed
/// entries. Leading and trailing gaps take the nearest observed value;
/// series with no observations take the global observed mean.
Matrix interpolate_temporal(const Problem &p);

/// Squared loss, no temporal term.
Solution solve_mc(const Problem &p, double lambda1, SolverConfig base = {});
/// Absolute loss, no temporal term.
Solution solve_rmc(const Problem &p, double lambda1, SolverConfig base = {});
/// Squared loss with the temporal term.
Solution solve_tecmac(const Problem &p, double lambda1, double lambda2, SolverConfig base = {});
/// Absolute loss with the temporal term.
Solution solve_tecromac(const Problem &p, double lambda1, double lambda2, SolverConfig base = {});

enum class Method { tecromac, tecmac, mc, rmc, interp };

std::string to_string(Method method);
Method parse_method(const std::string &s);

/// Run a method with the weights and solver settings in `cfg`; for the
/// solver-backed methods the loss and lambda2 come from the method preset.
Solution reconstruct(const Problem &p, Method method, const SolverConfig &cfg);

}  // namespace tecromac
