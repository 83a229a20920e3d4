#include "tecromac/baselines.hpp"

#include <chrono>
#include <vector>

namespace tecromac {

Matrix interpolate_temporal(const Problem &p) {
  const double observed_count = p.observed.sum();
  if (observed_count == 0.0) throw NoObservationsError("interpolation: the mask has no observed entries");
  const double global_mean = p.observed.cwiseProduct(p.data).sum() / observed_count;

  const Index frames = p.temporal.frames();
  Matrix out(p.rows(), p.cols());
  std::vector<Index> seen;
  seen.reserve(static_cast<std::size_t>(frames));
  for (Index k = 0; k < p.temporal.channels(); ++k) {
    const Index base = k * frames;
    for (Index row = 0; row < p.rows(); ++row) {
      seen.clear();
      for (Index l = 0; l < frames; ++l)
        if (p.observed(row, base + l) != 0.0) seen.push_back(l);
      if (seen.empty()) {
        out.row(row).segment(base, frames).setConstant(global_mean);
        continue;
      }
      auto value = [&](Index l) { return p.data(row, base + l); };
      for (Index l = 0; l <= seen.front(); ++l) out(row, base + l) = value(seen.front());
      for (std::size_t s = 0; s + 1 < seen.size(); ++s) {
        const Index a = seen[s];
        const Index b = seen[s + 1];
        for (Index l = a; l < b; ++l) {
          const double w = static_cast<double>(l - a) / static_cast<double>(b - a);
          out(row, base + l) = (1.0 - w) * value(a) + w * value(b);
        }
      }
      for (Index l = seen.back(); l < frames; ++l) out(row, base + l) = value(seen.back());
    }
  }
  return out;
}

Solution solve_mc(const Problem &p, double lambda1, SolverConfig base) {
  base.loss = Loss::squared;
  base.lambda1 = lambda1;
  base.lambda2 = 0.0;
  return solve(p, base);
}

Solution solve_rmc(const Problem &p, double lambda1, SolverConfig base) {
  base.loss = Loss::absolute;
  base.lambda1 = lambda1;
  base.lambda2 = 0.0;
  return solve(p, base);
}

Solution solve_tecmac(const Problem &p, double lambda1, double lambda2, SolverConfig base) {
  base.loss = Loss::squared;
  base.lambda1 = lambda1;
  base.lambda2 = lambda2;
  return solve(p, base);
}

Solution solve_tecromac(const Problem &p, double lambda1, double lambda2, SolverConfig base) {
  base.loss = Loss::absolute;
  base.lambda1 = lambda1;
  base.lambda2 = lambda2;
  return solve(p, base);
}

std::string to_string(Method method) {
  switch (method) {
    case Method::tecromac: return "tecromac";
    case Method::tecmac: return "tecmac";
    case Method::mc: return "mc";
    case Method::rmc: return "rmc";
    case Method::interp: return "interp";
  }
  return "unknown";
}

Method parse_method(const std::string &s) {
  if (s == "tecromac") return Method::tecromac;
  if (s == "tecmac") return Method::tecmac;
  if (s == "mc") return Method::mc;
  if (s == "rmc") return Method::rmc;
  if (s == "interp" || s == "interpolation") return Method::interp;
  throw std::invalid_argument("unknown method '" + s + "'");
}

Solution reconstruct(const Problem &p, Method method, const SolverConfig &cfg) {
  switch (method) {
    case Method::tecromac: return solve_tecromac(p, cfg.lambda1, cfg.lambda2, cfg);
    case Method::tecmac: return solve_tecmac(p, cfg.lambda1, cfg.lambda2, cfg);
    case Method::mc: return solve_mc(p, cfg.lambda1, cfg);
    case Method::rmc: return solve_rmc(p, cfg.lambda1, cfg);
    case Method::interp: {
      const auto start = std::chrono::steady_clock::now();
      Solution sol;
      sol.x = interpolate_temporal(p);
      sol.diagnostics.converged = true;
      sol.diagnostics.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return sol;
    }
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace tecromac
