#pragma once

#include <cstdint>
#include <vector>

#include "pdp/engine.hpp"
#include "pdp/formula.hpp"

namespace pdp {

// Partial assignment: -1 unknown, 0 false, 1 true.
using PartialAssignment = std::vector<int8_t>;

// --- unit propagation ---

struct UnitPropResult {
  CnfFormula residual;           // unresolved clauses over the original variable ids
  PartialAssignment assignment;  // input extended by forced values
  bool conflict = false;
};

UnitPropResult unit_propagate(const CnfFormula& f, const PartialAssignment& partial);

// --- belief propagation ---

struct BpConfig {
  int max_sweeps = 200;
  double epsilon = 1e-7;       // max message change declaring convergence
  double factor_floor = 1e-9;  // epsilon in phi = max(c, epsilon)
  uint64_t seed = 1;           // message init jitter
  double wall_timeout_s = 0.0;
};

struct BpMarginals {
  std::vector<double> p_one;  // P(x_i = 1), marginal of the floored measure
  bool converged = false;
  int sweeps_used = 0;
};

BpMarginals bp_marginals(const FactorGraph& g, int max_sweeps, double epsilon,
                         double factor_floor = 1e-9, uint64_t seed = 1);

RunResult bp_guided_decimate(const CnfFormula& f, const BpConfig& cfg);

// Sum-product expressed through the engine interface (h = 1, messages hold
// the probability of x = 1 / of the clause allowing x = 1). Iterating
// engine::step to convergence reproduces BP marginals in the prediction.
class BpPdpModel : public PdpModel {
 public:
  explicit BpPdpModel(double factor_floor = 1e-9) : floor_(factor_floor) {}
  int message_dim() const override { return 1; }
  void propagate_var(const FactorGraph&, std::span<const double>,
                     std::span<double>) const override;
  void propagate_clause(const FactorGraph&, std::span<const double>,
                        std::span<double>) const override;
  void decimate_var(const FactorGraph&, std::span<const double>, std::span<const double>,
                    std::span<double>) const override;
  void decimate_clause(const FactorGraph&, std::span<const double>, std::span<const double>,
                       std::span<double>) const override;
  void predict(const FactorGraph&, std::span<const double>, std::span<double>) const override;

 private:
  double floor_;
};

// --- survey propagation ---

struct SpSurveys {
  std::vector<double> eta;  // one warning survey per clause->var edge, in [0,1]
  bool converged = false;
  int sweeps_used = 0;
  double last_delta = 0.0;
};

struct SpConfig {
  double epsilon = 1e-3;
  int max_sweeps = 300;
  double damping = 0.0;                 // eta <- damping*old + (1-damping)*new
  double decimation_fraction = 0.01;    // fixed per round: max(1, floor(frac*unfixed))
  double paramagnetic_threshold = 0.01; // max |w+ - w-| below which SP is done
  uint64_t seed = 1;
  long max_flips = 200000;              // local-search fallback budget
  double walksat_noise = 0.5;
  double wall_timeout_s = 0.0;
};

struct VariableBias {
  double w_plus = 0.0, w_minus = 0.0, w_zero = 0.0;
};

SpSurveys sp_init(const FactorGraph& g, uint64_t seed);

// One synchronous sweep of the warning-survey update, damped by cfg.damping.
SpSurveys sp_sweep(const FactorGraph& g, const SpSurveys& surveys, const SpConfig& cfg);

SpSurveys sp_converge(const FactorGraph& g, SpSurveys surveys, const SpConfig& cfg);

std::vector<VariableBias> sp_bias(const FactorGraph& g, const SpSurveys& surveys);

RunResult sp_guided_decimate(const CnfFormula& f, const SpConfig& cfg);

// --- WalkSAT local search ---

// Random completion of `partial`, then break-count guided flips on the
// unfixed variables; fixed variables are never flipped.
RunResult local_search_fallback(const CnfFormula& f, const PartialAssignment& partial,
                                long max_flips, uint64_t seed, double noise = 0.5,
                                double wall_timeout_s = 0.0);

// --- Reinforce ---

struct ReinforceState {
  std::vector<double> local_field;  // empty = start from zero fields
  double pi = 0.05;                 // per-variable commitment probability
};

RunResult reinforce_solve(const CnfFormula& f, ReinforceState state, int t_max, uint64_t seed,
                          double wall_timeout_s = 0.0, ReinforceState* final_state = nullptr);

}  // namespace pdp
