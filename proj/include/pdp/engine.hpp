#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pdp/formula.hpp"

namespace pdp {

// Four latent message arrays, one row of dimension h per directed edge.
// Row e of p_var_to_clause is the message from edges[e].var toward
// edges[e].clause; the clause_to_var arrays use the same edge indexing for
// the opposite direction.
struct MessageState {
  int h = 0;
  std::vector<double> p_var_to_clause;
  std::vector<double> p_clause_to_var;
  std::vector<double> d_var_to_clause;
  std::vector<double> d_clause_to_var;

  bool all_finite() const;
};

// A PDP model is the tuple of two propagators, two decimators and a
// predictor. Implementations compute whole-graph updates; every output row
// may depend only on the inputs named here, so a step stays synchronous no
// matter how an implementation orders its work.
class PdpModel {
 public:
  virtual ~PdpModel() = default;

  virtual int message_dim() const = 0;

  // p_var_to_clause[e] from {(d_clause_to_var[b], sign(b)) : b in edges(var(e)) \ e}
  virtual void propagate_var(const FactorGraph& g, std::span<const double> d_clause_to_var_prev,
                             std::span<double> p_var_to_clause_out) const = 0;
  // p_clause_to_var[e] from {(d_var_to_clause[j], sign(j)) : j in edges(clause(e)) \ e}
  virtual void propagate_clause(const FactorGraph& g, std::span<const double> d_var_to_clause_prev,
                                std::span<double> p_clause_to_var_out) const = 0;
  // d[e] from (p[e], sign(e), d_prev[e]) only
  virtual void decimate_var(const FactorGraph& g, std::span<const double> p_var_to_clause,
                            std::span<const double> d_var_to_clause_prev,
                            std::span<double> d_var_to_clause_out) const = 0;
  virtual void decimate_clause(const FactorGraph& g, std::span<const double> p_clause_to_var,
                               std::span<const double> d_clause_to_var_prev,
                               std::span<double> d_clause_to_var_out) const = 0;
  // soft[i] from {(d_clause_to_var[b], sign(b)) : b in edges(i)}
  virtual void predict(const FactorGraph& g, std::span<const double> d_clause_to_var,
                       std::span<double> soft_out) const = 0;
};

enum class RunMode { train, test };

struct InitScheme {
  std::string name = "uniform";
  double scale = 0.1;
};

struct RunConfig {
  int t_max = 1000;
  uint64_t seed = 0;
  RunMode mode = RunMode::test;
  InitScheme init;
  // Explicit per-instance message seeds; when empty, instance j uses
  // mix_seed(seed, j).
  std::vector<uint64_t> instance_seeds;
  double wall_timeout_s = 0.0;  // 0 = unlimited
};

struct InstanceResult {
  bool solved = false;
  int solved_at = -1;       // 1-based iteration, -1 if unsolved
  int solved_replica = -1;  // batch instance index that produced the model
  std::vector<uint8_t> assignment;
};

struct RunResult {
  std::vector<InstanceResult> instances;  // one per source instance
  int iterations_run = 0;
  bool timed_out = false;
  // Train mode: soft assignment over all batch variables, one entry per
  // iteration, length exactly t_max.
  std::vector<std::vector<double>> trajectory;
};

MessageState init_messages(const FactorGraph& g, int h, uint64_t seed, const InitScheme& scheme,
                           const std::vector<uint64_t>* instance_seeds = nullptr);

// One synchronous PDP step: propagators read only decimator messages from
// the previous state, decimators read this step's propagator output plus
// their own previous message, prediction reads this step's decimator output.
std::pair<MessageState, Assignment> step(const MessageState& state, const FactorGraph& g,
                                         const PdpModel& model);

RunResult run(const FactorGraph& g, const PdpModel& model, const RunConfig& cfg);

// Batch replication: solve one formula with R independently initialized
// replicas, stopping as soon as any replica satisfies it.
RunResult run_with_replication(const CnfFormula& f, const PdpModel& model, int r,
                               const RunConfig& cfg);

// Test probe: propagators emit the elementwise mean of their inputs,
// decimators pass the propagator message through, prediction is 0.5.
class ProbeModel : public PdpModel {
 public:
  explicit ProbeModel(int h) : h_(h) {}
  int message_dim() const override { return h_; }
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
  int h_;
};

}  // namespace pdp
