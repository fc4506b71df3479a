#include "pdp/classical.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "pdp/generators.hpp"

namespace pdp {

namespace {

using clock_t_ = std::chrono::steady_clock;

double elapsed_s(clock_t_::time_point start) {
  return std::chrono::duration<double>(clock_t_::now() - start).count();
}

}  // namespace

// --- unit propagation ---

UnitPropResult unit_propagate(const CnfFormula& f, const PartialAssignment& partial) {
  if (static_cast<int>(partial.size()) != f.num_vars)
    throw std::invalid_argument("unit_propagate: partial assignment size mismatch");
  UnitPropResult r;
  r.assignment = partial;

  bool changed = true;
  while (changed && !r.conflict) {
    changed = false;
    for (const Clause& c : f.clauses) {
      bool satisfied = false;
      const Literal* unit = nullptr;
      int open = 0;
      for (const Literal& l : c.lits) {
        int8_t v = r.assignment[l.var - 1];
        if (v == -1) {
          ++open;
          unit = &l;
        } else if ((v == 1) == (l.sign > 0)) {
          satisfied = true;
          break;
        }
      }
      if (satisfied) continue;
      if (open == 0) {
        r.conflict = true;
        break;
      }
      if (open == 1) {
        r.assignment[unit->var - 1] = unit->sign > 0 ? 1 : 0;
        changed = true;
      }
    }
  }

  r.residual.num_vars = f.num_vars;
  if (!r.conflict) {
    for (const Clause& c : f.clauses) {
      bool satisfied = false;
      Clause reduced;
      for (const Literal& l : c.lits) {
        int8_t v = r.assignment[l.var - 1];
        if (v == -1)
          reduced.lits.push_back(l);
        else if ((v == 1) == (l.sign > 0)) {
          satisfied = true;
          break;
        }
      }
      if (!satisfied) r.residual.clauses.push_back(std::move(reduced));
    }
  }
  return r;
}

// --- belief propagation ---

namespace {

// One BP sweep: var->clause from the current clause->var messages, then
// clause->var from the fresh var->clause messages. Messages store the
// probability of x = 1 (variable side) / of the edge's clause letting x = 1
// (clause side).
double bp_sweep(const FactorGraph& g, std::vector<double>& v2c, std::vector<double>& c2v,
                double floor) {
  double delta = 0.0;
  for (int i = 0; i < g.num_vars; ++i) {
    for (int s = g.var_offsets[i]; s < g.var_offsets[i + 1]; ++s) {
      int e = g.var_edges[s];
      double p1 = 1.0, p0 = 1.0;
      for (int q = g.var_offsets[i]; q < g.var_offsets[i + 1]; ++q) {
        int b = g.var_edges[q];
        if (b == e) continue;
        p1 *= c2v[b];
        p0 *= 1.0 - c2v[b];
      }
      double z = p0 + p1;
      double fresh = z > 0 ? p1 / z : 0.5;
      delta = std::max(delta, std::abs(fresh - v2c[e]));
      v2c[e] = fresh;
    }
  }
  for (int a = 0; a < g.num_clauses; ++a) {
    for (int s = g.clause_offsets[a]; s < g.clause_offsets[a + 1]; ++s) {
      int e = g.clause_edges[s];
      double prod_unsat = 1.0;
      for (int q = g.clause_offsets[a]; q < g.clause_offsets[a + 1]; ++q) {
        int j = g.clause_edges[q];
        if (j == e) continue;
        prod_unsat *= g.edges[j].sign > 0 ? 1.0 - v2c[j] : v2c[j];
      }
      // message pair (sat side, unsat side) = (1, q_unsat), normalized
      double q_unsat = 1.0 - (1.0 - floor) * prod_unsat;
      double fresh = g.edges[e].sign > 0 ? 1.0 / (1.0 + q_unsat) : q_unsat / (1.0 + q_unsat);
      delta = std::max(delta, std::abs(fresh - c2v[e]));
      c2v[e] = fresh;
    }
  }
  return delta;
}

std::vector<double> bp_read_marginals(const FactorGraph& g, const std::vector<double>& c2v) {
  std::vector<double> p(g.num_vars, 0.5);
  for (int i = 0; i < g.num_vars; ++i) {
    double p1 = 1.0, p0 = 1.0;
    for (int s = g.var_offsets[i]; s < g.var_offsets[i + 1]; ++s) {
      int e = g.var_edges[s];
      p1 *= c2v[e];
      p0 *= 1.0 - c2v[e];
    }
    double z = p0 + p1;
    p[i] = z > 0 ? p1 / z : 0.5;
  }
  return p;
}

}  // namespace

BpMarginals bp_marginals(const FactorGraph& g, int max_sweeps, double epsilon, double factor_floor,
                         uint64_t seed) {
  if (g.num_instances() != 1)
    throw std::invalid_argument("bp_marginals: expects a single-instance graph");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);
  std::vector<double> v2c(g.num_edges()), c2v(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) {
    v2c[e] = 0.5 + jitter(rng);
    c2v[e] = 0.5 + jitter(rng);
  }
  BpMarginals r;
  for (r.sweeps_used = 1; r.sweeps_used <= max_sweeps; ++r.sweeps_used) {
    double delta = bp_sweep(g, v2c, c2v, factor_floor);
    if (delta < epsilon) {
      r.converged = true;
      break;
    }
  }
  r.sweeps_used = std::min(r.sweeps_used, max_sweeps);
  r.p_one = bp_read_marginals(g, c2v);
  return r;
}

void BpPdpModel::propagate_var(const FactorGraph& g, std::span<const double> d_c2v,
                               std::span<double> out) const {
  for (int i = 0; i < g.num_vars; ++i) {
    for (int s = g.var_offsets[i]; s < g.var_offsets[i + 1]; ++s) {
      int e = g.var_edges[s];
      double p1 = 1.0, p0 = 1.0;
      for (int q = g.var_offsets[i]; q < g.var_offsets[i + 1]; ++q) {
        int b = g.var_edges[q];
        if (b == e) continue;
        double m = std::clamp(d_c2v[b], 0.0, 1.0);  // arbitrary init values allowed
        p1 *= m;
        p0 *= 1.0 - m;
      }
      double z = p0 + p1;
      out[e] = z > 0 ? p1 / z : 0.5;
    }
  }
}

void BpPdpModel::propagate_clause(const FactorGraph& g, std::span<const double> d_v2c,
                                  std::span<double> out) const {
  for (int a = 0; a < g.num_clauses; ++a) {
    for (int s = g.clause_offsets[a]; s < g.clause_offsets[a + 1]; ++s) {
      int e = g.clause_edges[s];
      double prod_unsat = 1.0;
      for (int q = g.clause_offsets[a]; q < g.clause_offsets[a + 1]; ++q) {
        int j = g.clause_edges[q];
        if (j == e) continue;
        double m = std::clamp(d_v2c[j], 0.0, 1.0);
        prod_unsat *= g.edges[j].sign > 0 ? 1.0 - m : m;
      }
      double q_unsat = 1.0 - (1.0 - floor_) * prod_unsat;
      out[e] = g.edges[e].sign > 0 ? 1.0 / (1.0 + q_unsat) : q_unsat / (1.0 + q_unsat);
    }
  }
}

void BpPdpModel::decimate_var(const FactorGraph&, std::span<const double> p,
                              std::span<const double>, std::span<double> out) const {
  std::copy(p.begin(), p.end(), out.begin());
}

void BpPdpModel::decimate_clause(const FactorGraph&, std::span<const double> p,
                                 std::span<const double>, std::span<double> out) const {
  std::copy(p.begin(), p.end(), out.begin());
}

void BpPdpModel::predict(const FactorGraph& g, std::span<const double> d_c2v,
                         std::span<double> soft) const {
  for (int i = 0; i < g.num_vars; ++i) {
    double p1 = 1.0, p0 = 1.0;
    for (int s = g.var_offsets[i]; s < g.var_offsets[i + 1]; ++s) {
      int e = g.var_edges[s];
      double m = std::clamp(d_c2v[e], 0.0, 1.0);
      p1 *= m;
      p0 *= 1.0 - m;
    }
    double z = p0 + p1;
    soft[i] = z > 0 ? p1 / z : 0.5;
  }
}

RunResult bp_guided_decimate(const CnfFormula& f, const BpConfig& cfg) {
  auto start = clock_t_::now();
  RunResult result;
  result.instances.resize(1);
  InstanceResult& ir = result.instances[0];

  PartialAssignment partial(f.num_vars, -1);
  UnitPropResult up = unit_propagate(f, partial);
  int rounds = 0;
  while (!up.conflict) {
    ++rounds;
    if (cfg.wall_timeout_s > 0 && elapsed_s(start) > cfg.wall_timeout_s) break;
    if (up.residual.clauses.empty()) {
      std::vector<uint8_t> hard(f.num_vars, 1);
      for (int i = 0; i < f.num_vars; ++i)
        if (up.assignment[i] != -1) hard[i] = up.assignment[i];
      ir.solved = evaluate(f, hard).is_sat;
      ir.assignment = hard;
      ir.solved_at = rounds;
      break;
    }
    FactorGraph g = build_factor_graph(up.residual);
    BpMarginals bp = bp_marginals(g, cfg.max_sweeps, cfg.epsilon, cfg.factor_floor,
                                  mix_seed(cfg.seed, rounds));
    int best = -1;
    double best_cert = -1.0;
    for (int i = 0; i < f.num_vars; ++i) {
      if (up.assignment[i] != -1) continue;
      if (g.var_offsets[i] == g.var_offsets[i + 1]) continue;  // free variable
      double cert = std::abs(bp.p_one[i] - 0.5);
      if (cert > best_cert) {
        best_cert = cert;
        best = i;
      }
    }
    if (best < 0) break;  // only free variables left; next round finishes
    up.assignment[best] = bp.p_one[best] >= 0.5 ? 1 : 0;
    up = unit_propagate(f, up.assignment);
  }
  result.iterations_run = rounds;
  if (!ir.solved && ir.assignment.empty()) {
    ir.assignment.assign(f.num_vars, 0);
    for (int i = 0; i < f.num_vars; ++i)
      if (up.assignment[i] == 1) ir.assignment[i] = 1;
  }
  return result;
}

// --- survey propagation ---

namespace {

// P^u / (P^u + P^s + P^0) for one var->clause edge, optionally with
// per-variable reinforcement fields acting as virtual unit-clause surveys.
double sp_ratio(const FactorGraph& g, const std::vector<double>& eta, int e,
                const std::vector<double>* fields) {
  int j = g.edges[e].var;
  double sign = g.edges[e].sign;
  double prod_same = 1.0, prod_opp = 1.0;
  for (int q = g.var_offsets[j]; q < g.var_offsets[j + 1]; ++q) {
    int b = g.var_edges[q];
    if (b == e) continue;
    if (g.edges[b].sign == sign)
      prod_same *= 1.0 - eta[b];
    else
      prod_opp *= 1.0 - eta[b];
  }
  if (fields) {
    double fld = (*fields)[j];
    double eta_pos = std::max(fld, 0.0), eta_neg = std::max(-fld, 0.0);
    prod_same *= sign > 0 ? 1.0 - eta_pos : 1.0 - eta_neg;
    prod_opp *= sign > 0 ? 1.0 - eta_neg : 1.0 - eta_pos;
  }
  double p_u = (1.0 - prod_opp) * prod_same;
  double p_s = (1.0 - prod_same) * prod_opp;
  double p_0 = prod_same * prod_opp;
  double denom = p_u + p_s + p_0;
  if (denom <= 0.0) return 0.0;
  return std::clamp(p_u / denom, 0.0, 1.0);
}

double sp_sweep_raw(const FactorGraph& g, std::vector<double>& eta, double damping,
                    const std::vector<double>* fields) {
  std::vector<double> ratio(g.num_edges());
  for (int e = 0; e < g.num_edges(); ++e) ratio[e] = sp_ratio(g, eta, e, fields);
  double delta = 0.0;
  std::vector<double> fresh(g.num_edges());
  for (int a = 0; a < g.num_clauses; ++a) {
    for (int s = g.clause_offsets[a]; s < g.clause_offsets[a + 1]; ++s) {
      int e = g.clause_edges[s];
      double prod = 1.0;
      for (int q = g.clause_offsets[a]; q < g.clause_offsets[a + 1]; ++q) {
        int j = g.clause_edges[q];
        if (j == e) continue;
        prod *= ratio[j];
      }
      fresh[e] = std::clamp(damping * eta[e] + (1.0 - damping) * prod, 0.0, 1.0);
      delta = std::max(delta, std::abs(fresh[e] - eta[e]));
    }
  }
  eta.swap(fresh);
  return delta;
}

std::vector<VariableBias> sp_bias_impl(const FactorGraph& g, const std::vector<double>& eta,
                                       const std::vector<double>* fields) {
  std::vector<VariableBias> bias(g.num_vars);
  for (int i = 0; i < g.num_vars; ++i) {
    double zp = 1.0, zm = 1.0;
    for (int s = g.var_offsets[i]; s < g.var_offsets[i + 1]; ++s) {
      int e = g.var_edges[s];
      if (g.edges[e].sign > 0)
        zp *= 1.0 - eta[e];
      else
        zm *= 1.0 - eta[e];
    }
    if (fields) {
      double fld = (*fields)[i];
      zp *= 1.0 - std::max(fld, 0.0);
      zm *= 1.0 - std::max(-fld, 0.0);
    }
    double p_plus = (1.0 - zp) * zm;
    double p_minus = (1.0 - zm) * zp;
    double p_zero = zp * zm;
    double norm = p_plus + p_minus + p_zero;
    if (norm <= 0.0) {
      bias[i] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    } else {
      bias[i] = {p_plus / norm, p_minus / norm, p_zero / norm};
    }
  }
  return bias;
}

}  // namespace

SpSurveys sp_init(const FactorGraph& g, uint64_t seed) {
  SpSurveys s;
  s.eta.resize(g.num_edges());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (double& v : s.eta) v = dist(rng);
  return s;
}

SpSurveys sp_sweep(const FactorGraph& g, const SpSurveys& surveys, const SpConfig& cfg) {
  if (static_cast<int>(surveys.eta.size()) != g.num_edges())
    throw std::invalid_argument("sp_sweep: survey size does not match graph");
  SpSurveys next = surveys;
  next.last_delta = sp_sweep_raw(g, next.eta, cfg.damping, nullptr);
  ++next.sweeps_used;
  next.converged = next.last_delta < cfg.epsilon;
  return next;
}

SpSurveys sp_converge(const FactorGraph& g, SpSurveys surveys, const SpConfig& cfg) {
  for (int sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    surveys = sp_sweep(g, surveys, cfg);
    if (surveys.converged) break;
  }
  return surveys;
}

std::vector<VariableBias> sp_bias(const FactorGraph& g, const SpSurveys& surveys) {
  if (static_cast<int>(surveys.eta.size()) != g.num_edges())
    throw std::invalid_argument("sp_bias: survey size does not match graph");
  return sp_bias_impl(g, surveys.eta, nullptr);
}

RunResult sp_guided_decimate(const CnfFormula& f, const SpConfig& cfg) {
  auto start = clock_t_::now();
  RunResult result;
  result.instances.resize(1);
  InstanceResult& ir = result.instances[0];

  PartialAssignment partial(f.num_vars, -1);
  UnitPropResult up = unit_propagate(f, partial);
  int rounds = 0;

  auto finish_with_walksat = [&](long budget) {
    RunResult ws = local_search_fallback(f, up.assignment, budget, mix_seed(cfg.seed, 7777),
                                         cfg.walksat_noise, cfg.wall_timeout_s);
    ir = ws.instances[0];
    ir.solved_at = rounds;
    result.iterations_run = rounds;
  };

  while (!up.conflict) {
    ++rounds;
    if (cfg.wall_timeout_s > 0 && elapsed_s(start) > cfg.wall_timeout_s) break;
    if (up.residual.clauses.empty()) {
      std::vector<uint8_t> hard(f.num_vars, 1);
      for (int i = 0; i < f.num_vars; ++i)
        if (up.assignment[i] != -1) hard[i] = up.assignment[i];
      ir.solved = evaluate(f, hard).is_sat;
      ir.assignment = hard;
      ir.solved_at = rounds;
      break;
    }
    FactorGraph g = build_factor_graph(up.residual);
    SpSurveys surveys = sp_converge(g, sp_init(g, mix_seed(cfg.seed, rounds)), cfg);
    if (!surveys.converged) {
      finish_with_walksat(cfg.max_flips);
      return result;
    }
    std::vector<VariableBias> bias = sp_bias_impl(g, surveys.eta, nullptr);
    std::vector<std::pair<double, int>> candidates;
    for (int i = 0; i < f.num_vars; ++i) {
      if (up.assignment[i] != -1) continue;
      if (g.var_offsets[i] == g.var_offsets[i + 1]) continue;
      candidates.push_back({std::abs(bias[i].w_plus - bias[i].w_minus), i});
    }
    if (candidates.empty()) {
      // unreachable for a well-formed residual; never spin on a fixed point
      finish_with_walksat(cfg.max_flips);
      return result;
    }
    double max_cert = 0.0;
    for (const auto& [c, i] : candidates) max_cert = std::max(max_cert, c);
    if (max_cert < cfg.paramagnetic_threshold) {
      finish_with_walksat(cfg.max_flips);
      return result;
    }
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    int fix_count = std::max<int>(
        1, static_cast<int>(cfg.decimation_fraction * static_cast<double>(candidates.size())));
    for (int c = 0; c < fix_count && c < static_cast<int>(candidates.size()); ++c) {
      int i = candidates[c].second;
      up.assignment[i] = bias[i].w_plus >= bias[i].w_minus ? 1 : 0;
    }
    up = unit_propagate(f, up.assignment);
  }
  result.iterations_run = rounds;
  if (ir.assignment.empty()) {
    ir.assignment.assign(f.num_vars, 0);
    for (int i = 0; i < f.num_vars; ++i)
      if (up.assignment[i] == 1) ir.assignment[i] = 1;
  }
  return result;
}

// --- WalkSAT ---

RunResult local_search_fallback(const CnfFormula& f, const PartialAssignment& partial,
                                long max_flips, uint64_t seed, double noise,
                                double wall_timeout_s) {
  if (static_cast<int>(partial.size()) != f.num_vars)
    throw std::invalid_argument("local_search_fallback: partial assignment size mismatch");
  auto start = clock_t_::now();
  int n = f.num_vars;
  int m = f.num_clauses();

  std::mt19937_64 rng(seed);
  std::vector<uint8_t> val(n);
  std::vector<uint8_t> flippable(n);
  for (int i = 0; i < n; ++i) {
    if (partial[i] == -1) {
      val[i] = rng() & 1;
      flippable[i] = 1;
    } else {
      val[i] = static_cast<uint8_t>(partial[i]);
      flippable[i] = 0;
    }
  }

  // occurrence lists: clauses where variable appears satisfied when true /
  // when false
  std::vector<std::vector<int>> occ_pos(n), occ_neg(n);
  for (int a = 0; a < m; ++a)
    for (const Literal& l : f.clauses[a].lits)
      (l.sign > 0 ? occ_pos : occ_neg)[l.var - 1].push_back(a);

  std::vector<int> numtrue(m, 0);
  std::vector<int> unsat;
  std::vector<int> unsat_index(m, -1);
  auto lit_true = [&](const Literal& l) { return (l.sign > 0) == (val[l.var - 1] != 0); };
  for (int a = 0; a < m; ++a) {
    for (const Literal& l : f.clauses[a].lits)
      if (lit_true(l)) ++numtrue[a];
    if (numtrue[a] == 0) {
      unsat_index[a] = static_cast<int>(unsat.size());
      unsat.push_back(a);
    }
  }

  auto mark_sat = [&](int a) {
    int idx = unsat_index[a];
    if (idx < 0) return;
    int last = unsat.back();
    unsat[idx] = last;
    unsat_index[last] = idx;
    unsat.pop_back();
    unsat_index[a] = -1;
  };
  auto mark_unsat = [&](int a) {
    if (unsat_index[a] >= 0) return;
    unsat_index[a] = static_cast<int>(unsat.size());
    unsat.push_back(a);
  };

  // break(v): clauses that become unsatisfied if v flips = clauses where v's
  // currently-true literal is the only true one
  auto break_count = [&](int v) {
    const auto& occ = val[v] ? occ_pos[v] : occ_neg[v];
    long b = 0;
    for (int a : occ)
      if (numtrue[a] == 1) ++b;
    return b;
  };

  auto do_flip = [&](int v) {
    const auto& was_sat = val[v] ? occ_pos[v] : occ_neg[v];
    const auto& now_sat = val[v] ? occ_neg[v] : occ_pos[v];
    for (int a : was_sat)
      if (--numtrue[a] == 0) mark_unsat(a);
    for (int a : now_sat)
      if (++numtrue[a] == 1) mark_sat(a);
    val[v] ^= 1;
  };

  RunResult result;
  result.instances.resize(1);
  InstanceResult& ir = result.instances[0];
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  long flips = 0;
  std::vector<int> cand, best;
  while (flips < max_flips) {
    if (unsat.empty()) break;
    if (wall_timeout_s > 0 && (flips & 4095) == 0 && elapsed_s(start) > wall_timeout_s) break;
    int a = unsat[rng() % unsat.size()];
    cand.clear();
    for (const Literal& l : f.clauses[a].lits)
      if (flippable[l.var - 1]) cand.push_back(l.var - 1);
    if (cand.empty()) break;  // clause decided entirely by fixed variables

    int chosen;
    best.clear();
    long best_break = std::numeric_limits<long>::max();
    for (int v : cand) {
      long b = break_count(v);
      if (b < best_break) {
        best_break = b;
        best.clear();
      }
      if (b == best_break) best.push_back(v);
    }
    if (best_break > 0 && unit(rng) < noise)
      chosen = cand[rng() % cand.size()];
    else
      chosen = best[rng() % best.size()];
    do_flip(chosen);
    ++flips;
  }

  ir.solved = unsat.empty();
  ir.assignment = val;
  ir.solved_at = ir.solved ? static_cast<int>(flips) : -1;
  result.iterations_run = static_cast<int>(std::min<long>(flips, INT32_MAX));
  return result;
}

// --- Reinforce ---

RunResult reinforce_solve(const CnfFormula& f, ReinforceState state, int t_max, uint64_t seed,
                          double wall_timeout_s, ReinforceState* final_state) {
  auto start = clock_t_::now();
  FactorGraph g = build_factor_graph(f);
  if (state.local_field.empty()) state.local_field.assign(f.num_vars, 0.0);
  if (static_cast<int>(state.local_field.size()) != f.num_vars)
    throw std::invalid_argument("reinforce_solve: local_field size mismatch");
  if (state.pi <= 0.0 || state.pi > 1.0)
    throw std::invalid_argument("reinforce_solve: pi must be in (0,1]");

  std::vector<double> eta = sp_init(g, mix_seed(seed, 0)).eta;
  std::mt19937_64 rng(mix_seed(seed, 1));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  RunResult result;
  result.instances.resize(1);
  InstanceResult& ir = result.instances[0];

  std::vector<uint8_t> hard(f.num_vars, 0);
  for (int t = 1; t <= t_max; ++t) {
    sp_sweep_raw(g, eta, 0.0, &state.local_field);
    std::vector<VariableBias> bias = sp_bias_impl(g, eta, &state.local_field);
    for (int i = 0; i < f.num_vars; ++i)
      if (unit(rng) < state.pi) state.local_field[i] = bias[i].w_plus - bias[i].w_minus;
    for (int i = 0; i < f.num_vars; ++i) {
      double fld = state.local_field[i];
      if (fld > 0)
        hard[i] = 1;
      else if (fld < 0)
        hard[i] = 0;
      else
        hard[i] = bias[i].w_plus >= bias[i].w_minus ? 1 : 0;
    }
    result.iterations_run = t;
    if (evaluate(f, hard).is_sat) {
      ir.solved = true;
      ir.solved_at = t;
      break;
    }
    if (wall_timeout_s > 0 && elapsed_s(start) > wall_timeout_s) break;
  }
  ir.assignment = hard;
  if (final_state) *final_state = state;
  return result;
}

}  // namespace pdp
