#include "pdp/engine.hpp"

#include <cassert>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "pdp/generators.hpp"

namespace pdp {

bool MessageState::all_finite() const {
  for (const auto* arr : {&p_var_to_clause, &p_clause_to_var, &d_var_to_clause, &d_clause_to_var})
    for (double x : *arr)
      if (!std::isfinite(x)) return false;
  return true;
}

MessageState init_messages(const FactorGraph& g, int h, uint64_t seed, const InitScheme& scheme,
                           const std::vector<uint64_t>* instance_seeds) {
  if (h < 1) throw std::invalid_argument("init_messages: h must be >= 1");
  if (scheme.name != "uniform")
    throw std::invalid_argument("init_messages: unknown scheme '" + scheme.name + "'");
  if (instance_seeds && static_cast<int>(instance_seeds->size()) != g.num_instances())
    throw std::invalid_argument("init_messages: instance_seeds size mismatch");

  MessageState s;
  s.h = h;
  size_t total = static_cast<size_t>(g.num_edges()) * h;
  s.p_var_to_clause.resize(total);
  s.p_clause_to_var.resize(total);
  s.d_var_to_clause.resize(total);
  s.d_clause_to_var.resize(total);

  // Each instance draws from its own generator so a batched instance gets
  // exactly the messages it would get when run alone with the same seed.
  for (int j = 0; j < g.num_instances(); ++j) {
    uint64_t inst_seed = instance_seeds ? (*instance_seeds)[j] : mix_seed(seed, j);
    std::mt19937_64 rng(inst_seed);
    std::uniform_real_distribution<double> dist(-scheme.scale, scheme.scale);
    size_t lo = static_cast<size_t>(g.bounds[j].edge0) * h;
    size_t hi = static_cast<size_t>(g.bounds[j + 1].edge0) * h;
    for (auto* arr : {&s.p_var_to_clause, &s.p_clause_to_var, &s.d_var_to_clause,
                      &s.d_clause_to_var})
      for (size_t i = lo; i < hi; ++i) (*arr)[i] = dist(rng);
  }
  return s;
}

std::pair<MessageState, Assignment> step(const MessageState& state, const FactorGraph& g,
                                         const PdpModel& model) {
  int h = model.message_dim();
  size_t total = static_cast<size_t>(g.num_edges()) * h;
  if (state.h != h || state.d_clause_to_var.size() != total)
    throw std::invalid_argument("step: message state shape does not match graph/model");

  MessageState next;
  next.h = h;
  next.p_var_to_clause.resize(total);
  next.p_clause_to_var.resize(total);
  next.d_var_to_clause.resize(total);
  next.d_clause_to_var.resize(total);

  model.propagate_var(g, state.d_clause_to_var, next.p_var_to_clause);
  model.propagate_clause(g, state.d_var_to_clause, next.p_clause_to_var);
  model.decimate_var(g, next.p_var_to_clause, state.d_var_to_clause, next.d_var_to_clause);
  model.decimate_clause(g, next.p_clause_to_var, state.d_clause_to_var, next.d_clause_to_var);

  Assignment a;
  a.soft.resize(g.num_vars);
  model.predict(g, next.d_clause_to_var, a.soft);
  assert(next.all_finite());
  return {std::move(next), std::move(a)};
}

namespace {

std::vector<uint8_t> slice_assignment(const std::vector<uint8_t>& hard, const FactorGraph& g,
                                      int instance) {
  return {hard.begin() + g.bounds[instance].var0, hard.begin() + g.bounds[instance + 1].var0};
}

}  // namespace

RunResult run(const FactorGraph& g, const PdpModel& model, const RunConfig& cfg) {
  if (cfg.t_max < 1) throw std::invalid_argument("run: t_max must be >= 1");
  using clock = std::chrono::steady_clock;
  auto start = clock::now();

  int num_instances = g.num_instances();
  int num_sources = 0;
  for (int j = 0; j < num_instances; ++j)
    num_sources = std::max(num_sources, g.replica_source[j] + 1);

  RunResult result;
  result.instances.resize(num_sources);

  MessageState state = init_messages(g, model.message_dim(), cfg.seed, cfg.init,
                                     cfg.instance_seeds.empty() ? nullptr : &cfg.instance_seeds);
  Assignment last;
  int solved_sources = 0;
  int t = 0;
  for (t = 1; t <= cfg.t_max; ++t) {
    auto [next, soft] = step(state, g, model);
    state = std::move(next);
    last = std::move(soft);
    if (cfg.mode == RunMode::train) result.trajectory.push_back(last.soft);

    std::vector<uint8_t> hard = hard_threshold(last.soft);
    std::vector<uint8_t> flags = graph_sat_flags(g, hard);
    for (int j = 0; j < num_instances; ++j) {
      if (!flags[j]) continue;
      InstanceResult& ir = result.instances[g.replica_source[j]];
      if (ir.solved) continue;
      ir.solved = true;
      ir.solved_at = t;
      ir.solved_replica = j;
      ir.assignment = slice_assignment(hard, g, j);
      ++solved_sources;
    }
    if (cfg.mode == RunMode::test && solved_sources == num_sources) break;
    if (cfg.wall_timeout_s > 0 &&
        std::chrono::duration<double>(clock::now() - start).count() > cfg.wall_timeout_s) {
      result.timed_out = true;
      break;
    }
  }
  result.iterations_run = std::min(t, cfg.t_max);

  // Unsolved sources report the final prediction of their first replica.
  std::vector<uint8_t> hard = hard_threshold(last.soft);
  for (int j = 0; j < num_instances; ++j) {
    InstanceResult& ir = result.instances[g.replica_source[j]];
    if (!ir.solved && ir.assignment.empty()) ir.assignment = slice_assignment(hard, g, j);
  }
  return result;
}

RunResult run_with_replication(const CnfFormula& f, const PdpModel& model, int r,
                               const RunConfig& cfg) {
  if (r < 1) throw std::invalid_argument("run_with_replication: R must be >= 1");
  FactorGraph g = replicate(build_factor_graph(f), r);
  RunConfig rc = cfg;
  rc.mode = RunMode::test;
  RunResult result = run(g, model, rc);
  if (result.instances.size() == 1 && result.instances[0].solved) {
    if (!evaluate(f, result.instances[0].assignment).is_sat)
      throw std::logic_error("run_with_replication: replica assignment fails verification");
  }
  return result;
}

// --- ProbeModel ---

namespace {

// mean over the incident decimator messages excluding the edge itself
void probe_mean(const FactorGraph& g, int h, bool group_by_var, std::span<const double> d_prev,
                std::span<double> out) {
  const auto& offsets = group_by_var ? g.var_offsets : g.clause_offsets;
  const auto& incident = group_by_var ? g.var_edges : g.clause_edges;
  int groups = group_by_var ? g.num_vars : g.num_clauses;
  for (int n = 0; n < groups; ++n) {
    for (int s = offsets[n]; s < offsets[n + 1]; ++s) {
      int e = incident[s];
      int count = 0;
      for (int q = offsets[n]; q < offsets[n + 1]; ++q) {
        if (incident[q] == e) continue;
        for (int d = 0; d < h; ++d) out[e * h + d] += d_prev[incident[q] * h + d];
        ++count;
      }
      if (count > 0)
        for (int d = 0; d < h; ++d) out[e * h + d] /= count;
    }
  }
}

}  // namespace

void ProbeModel::propagate_var(const FactorGraph& g, std::span<const double> d_prev,
                               std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  probe_mean(g, h_, true, d_prev, out);
}

void ProbeModel::propagate_clause(const FactorGraph& g, std::span<const double> d_prev,
                                  std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  probe_mean(g, h_, false, d_prev, out);
}

void ProbeModel::decimate_var(const FactorGraph&, std::span<const double> p,
                              std::span<const double>, std::span<double> out) const {
  std::copy(p.begin(), p.end(), out.begin());
}

void ProbeModel::decimate_clause(const FactorGraph&, std::span<const double> p,
                                 std::span<const double>, std::span<double> out) const {
  std::copy(p.begin(), p.end(), out.begin());
}

void ProbeModel::predict(const FactorGraph&, std::span<const double>,
                         std::span<double> soft) const {
  std::fill(soft.begin(), soft.end(), 0.5);
}

}  // namespace pdp
