#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pdp/classical.hpp"
#include "pdp/formula.hpp"
#include "pdp/generators.hpp"

using namespace pdp;

namespace {

// Exhaustive marginals of the floored measure: P(X) proportional to the
// product over clauses of max(c_a(X), eps).
std::vector<double> brute_marginals(const CnfFormula& f, double eps) {
  int n = f.num_vars;
  std::vector<double> p1(n, 0.0);
  double z = 0.0;
  for (uint64_t bits = 0; bits < (1ull << n); ++bits) {
    double w = 1.0;
    for (const Clause& c : f.clauses) {
      bool sat = false;
      for (const Literal& l : c.lits)
        if ((l.sign > 0) == (((bits >> (l.var - 1)) & 1) != 0)) {
          sat = true;
          break;
        }
      w *= sat ? 1.0 : eps;
    }
    z += w;
    for (int i = 0; i < n; ++i)
      if ((bits >> i) & 1) p1[i] += w;
  }
  for (double& v : p1) v /= z;
  return p1;
}

// Random tree-structured CNF: every clause attaches one existing variable
// and k-1 fresh ones, so the factor graph stays a tree.
CnfFormula random_tree_cnf(std::mt19937_64& rng, int max_n = 12) {
  CnfFormula f;
  f.num_vars = 1;
  int budget = 3 + static_cast<int>(rng() % 6);
  for (int c = 0; c < budget; ++c) {
    int k = 1 + static_cast<int>(rng() % 3);
    if (f.num_vars + (k - 1) > max_n) break;
    Clause cl;
    int attach = 1 + static_cast<int>(rng() % f.num_vars);
    cl.lits.push_back({attach, (rng() & 1) ? 1 : -1});
    for (int j = 1; j < k; ++j) {
      ++f.num_vars;
      cl.lits.push_back({f.num_vars, (rng() & 1) ? 1 : -1});
    }
    f.clauses.push_back(std::move(cl));
  }
  return f;
}

}  // namespace

TEST_CASE("unit_propagate forces chains") {
  CnfFormula f = parse_dimacs("p cnf 2 2\n1 0\n-1 2 0");
  UnitPropResult r = unit_propagate(f, PartialAssignment(2, -1));
  CHECK_FALSE(r.conflict);
  CHECK(r.assignment == PartialAssignment{1, 1});
  CHECK(r.residual.clauses.empty());
}

TEST_CASE("unit_propagate detects conflict") {
  CnfFormula f = parse_dimacs("p cnf 1 2\n1 0\n-1 0");
  UnitPropResult r = unit_propagate(f, PartialAssignment(1, -1));
  CHECK(r.conflict);
}

TEST_CASE("unit_propagate is idempotent") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    CnfFormula f = gen_uniform(10, 3, 25, rng());
    PartialAssignment partial(10, -1);
    partial[rng() % 10] = rng() & 1;
    UnitPropResult once = unit_propagate(f, partial);
    if (once.conflict) continue;
    UnitPropResult twice = unit_propagate(f, once.assignment);
    CHECK_FALSE(twice.conflict);
    CHECK(twice.assignment == once.assignment);
    CHECK(twice.residual == once.residual);
  }
}

TEST_CASE("unit_propagate residual solutions extend to the original formula") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 40; ++t) {
    int n = 6 + static_cast<int>(rng() % 5);
    CnfFormula f = gen_uniform(n, 3, 2 * n, rng());
    PartialAssignment partial(n, -1);
    partial[rng() % n] = rng() & 1;
    UnitPropResult r = unit_propagate(f, partial);
    if (r.conflict) continue;
    auto w = exhaustive_witness(r.residual);
    if (!w) continue;
    std::vector<uint8_t> combined = *w;
    for (int i = 0; i < n; ++i)
      if (r.assignment[i] != -1) combined[i] = r.assignment[i];
    CHECK(evaluate(f, combined).is_sat);
  }
}

TEST_CASE("bp marginal of a single 2-clause is 2/3") {
  CnfFormula f = parse_dimacs("p cnf 2 1\n1 2 0");
  FactorGraph g = build_factor_graph(f);
  BpMarginals bp = bp_marginals(g, 100, 1e-10);
  CHECK(bp.converged);
  CHECK(bp.p_one[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  CHECK(bp.p_one[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("bp isolated variable is uniform") {
  CnfFormula f;
  f.num_vars = 3;
  f.clauses.push_back({{{1, 1}, {2, 1}}});
  FactorGraph g = build_factor_graph(f);
  BpMarginals bp = bp_marginals(g, 100, 1e-10);
  CHECK(bp.p_one[2] == doctest::Approx(0.5));
}

TEST_CASE("bp is exact on random trees") {
  std::mt19937_64 rng(11);
  int done = 0;
  while (done < 40) {
    CnfFormula f = random_tree_cnf(rng);
    if (f.clauses.empty()) continue;
    ++done;
    FactorGraph g = build_factor_graph(f);
    BpMarginals bp = bp_marginals(g, 500, 1e-12);
    std::vector<double> ref = brute_marginals(f, 1e-9);
    for (int i = 0; i < f.num_vars; ++i) CHECK(std::abs(bp.p_one[i] - ref[i]) < 1e-6);
  }
}

TEST_CASE("bp_guided_decimate fixes unit clauses first") {
  CnfFormula f = parse_dimacs("p cnf 3 2\n1 0\n-1 2 0");
  RunResult r = bp_guided_decimate(f, {});
  REQUIRE(r.instances[0].solved);
  CHECK(r.instances[0].assignment[0] == 1);
  CHECK(r.instances[0].assignment[1] == 1);
  CHECK(evaluate(f, r.instances[0].assignment).is_sat);
}

TEST_CASE("bp_guided_decimate solves implication chains") {
  // x1, x1 -> x2 -> ... -> x8
  std::string text = "p cnf 8 8\n1 0\n";
  for (int i = 1; i < 8; ++i)
    text += "-" + std::to_string(i) + " " + std::to_string(i + 1) + " 0\n";
  CnfFormula f = parse_dimacs(text);
  RunResult r = bp_guided_decimate(f, {});
  REQUIRE(r.instances[0].solved);
  for (int i = 0; i < 8; ++i) CHECK(r.instances[0].assignment[i] == 1);
}

TEST_CASE("bp_guided_decimate on easy random 3-SAT") {
  int solved = 0;
  for (uint64_t s = 0; s < 20; ++s) {
    CnfFormula f = gen_uniform(30, 3, 60, mix_seed(404, s));
    BpConfig cfg;
    cfg.seed = s;
    RunResult r = bp_guided_decimate(f, cfg);
    if (r.instances[0].solved) {
      CHECK(evaluate(f, r.instances[0].assignment).is_sat);
      ++solved;
    }
  }
  CHECK(solved >= 19);
}

TEST_CASE("sp unit clause emits a hard warning") {
  CnfFormula f = parse_dimacs("p cnf 1 1\n1 0");
  FactorGraph g = build_factor_graph(f);
  SpSurveys s;
  s.eta = {0.3};
  s = sp_sweep(g, s, {});
  CHECK(s.eta[0] == doctest::Approx(1.0));
}

TEST_CASE("sp single 2-clause reaches the all-zero fixed point in one sweep") {
  CnfFormula f = parse_dimacs("p cnf 2 1\n1 2 0");
  FactorGraph g = build_factor_graph(f);
  SpSurveys s = sp_init(g, 5);
  s = sp_sweep(g, s, {});
  CHECK(s.eta[0] == doctest::Approx(0.0));
  CHECK(s.eta[1] == doctest::Approx(0.0));
}

TEST_CASE("sp surveys stay in [0,1] under damped sweeps") {
  CnfFormula f = gen_uniform(40, 3, 140, 9);
  FactorGraph g = build_factor_graph(f);
  SpConfig cfg;
  cfg.damping = 0.4;
  SpSurveys s = sp_init(g, 2);
  for (int sweep = 0; sweep < 30; ++sweep) {
    s = sp_sweep(g, s, cfg);
    for (double e : s.eta) {
      CHECK(e >= 0.0);
      CHECK(e <= 1.0);
    }
  }
}

TEST_CASE("sp converges on sub-threshold random 3-SAT") {
  CnfFormula f = gen_uniform(50, 3, 175, 31);  // alpha = 3.5
  FactorGraph g = build_factor_graph(f);
  SpConfig cfg;
  SpSurveys s = sp_converge(g, sp_init(g, 4), cfg);
  CHECK(s.converged);
  CHECK(s.sweeps_used <= cfg.max_sweeps);
}

TEST_CASE("sp sweep is a no-op after one sweep on disjoint clauses") {
  // no shared variables: every survey is forced to 0 (k>=2) in one sweep
  CnfFormula f = parse_dimacs("p cnf 6 3\n1 2 0\n3 4 0\n5 -6 0");
  FactorGraph g = build_factor_graph(f);
  SpSurveys s = sp_init(g, 8);
  s = sp_sweep(g, s, {});
  for (double e : s.eta) CHECK(e == doctest::Approx(0.0));
  SpSurveys s2 = sp_sweep(g, s, {});
  CHECK(s2.last_delta == doctest::Approx(0.0));
}

TEST_CASE("sp_bias under a unit clause is fully polarized") {
  CnfFormula f = parse_dimacs("p cnf 1 1\n1 0");
  FactorGraph g = build_factor_graph(f);
  SpSurveys s;
  s.eta = {1.0};
  auto bias = sp_bias(g, s);
  CHECK(bias[0].w_plus == doctest::Approx(1.0));
  CHECK(bias[0].w_minus == doctest::Approx(0.0));
}

TEST_CASE("sp_bias symmetry cases") {
  CnfFormula f;
  f.num_vars = 2;
  f.clauses.push_back({{{1, 1}, {2, 1}}});
  FactorGraph g = build_factor_graph(f);

  SpSurveys zero;
  zero.eta = {0.0, 0.0};
  auto bias = sp_bias(g, zero);
  // all-zero surveys convey no certainty anywhere
  for (int i = 0; i < 2; ++i) {
    CHECK(std::abs(bias[i].w_plus - bias[i].w_minus) == doctest::Approx(0.0));
    CHECK(bias[i].w_zero == doctest::Approx(1.0));
  }
}

TEST_CASE("sp_guided_decimate on unit clause formulas") {
  CnfFormula f = parse_dimacs("p cnf 3 3\n1 0\n-2 0\n3 0");
  RunResult r = sp_guided_decimate(f, {});
  REQUIRE(r.instances[0].solved);
  CHECK(r.iterations_run == 1);
  CHECK(r.instances[0].assignment == std::vector<uint8_t>{1, 0, 1});
}

TEST_CASE("sp_guided_decimate paramagnetic fallback solves a single 2-clause") {
  CnfFormula f = parse_dimacs("p cnf 2 1\n1 2 0");
  RunResult r = sp_guided_decimate(f, {});
  REQUIRE(r.instances[0].solved);
  CHECK(evaluate(f, r.instances[0].assignment).is_sat);
}

TEST_CASE("sp_guided_decimate on random 3-SAT at alpha 3.5") {
  int solved = 0;
  for (uint64_t s = 0; s < 20; ++s) {
    CnfFormula f = gen_uniform(50, 3, 175, mix_seed(777, s));
    SpConfig cfg;
    cfg.seed = s;
    RunResult r = sp_guided_decimate(f, cfg);
    if (r.instances[0].solved) {
      CHECK(evaluate(f, r.instances[0].assignment).is_sat);
      ++solved;
    }
  }
  CHECK(solved >= 19);
}

TEST_CASE("walksat zero flips on satisfying start") {
  CnfFormula f = parse_dimacs("p cnf 2 1\n1 2 0");
  PartialAssignment partial = {1, 0};  // fully fixed, satisfying
  RunResult r = local_search_fallback(f, partial, 1000, 1);
  REQUIRE(r.instances[0].solved);
  CHECK(r.iterations_run == 0);
}

TEST_CASE("walksat solves a unit clause within one flip") {
  CnfFormula f = parse_dimacs("p cnf 1 1\n1 0");
  for (uint64_t seed = 0; seed < 10; ++seed) {
    RunResult r = local_search_fallback(f, PartialAssignment(1, -1), 10, seed);
    REQUIRE(r.instances[0].solved);
    CHECK(r.iterations_run <= 1);
    CHECK(r.instances[0].assignment[0] == 1);
  }
}

TEST_CASE("walksat respects fixed variables") {
  CnfFormula f = parse_dimacs("p cnf 2 2\n1 2 0\n-1 2 0");
  PartialAssignment partial = {0, -1};  // x1 fixed false, x2 free
  RunResult r = local_search_fallback(f, partial, 1000, 3);
  REQUIRE(r.instances[0].solved);
  CHECK(r.instances[0].assignment[0] == 0);
  CHECK(r.instances[0].assignment[1] == 1);
}

TEST_CASE("walksat on random 3-SAT at alpha 3.0") {
  int solved = 0;
  for (uint64_t s = 0; s < 20; ++s) {
    CnfFormula f = gen_uniform(50, 3, 150, mix_seed(31337, s));
    RunResult r = local_search_fallback(f, PartialAssignment(50, -1), 100000, s);
    if (r.instances[0].solved) {
      CHECK(evaluate(f, r.instances[0].assignment).is_sat);
      ++solved;
    }
  }
  CHECK(solved == 20);
}

TEST_CASE("reinforce solves unit clause formulas immediately") {
  CnfFormula f = parse_dimacs("p cnf 3 3\n1 0\n-2 0\n3 0");
  RunResult r = reinforce_solve(f, {}, 10, 1);
  REQUIRE(r.instances[0].solved);
  CHECK(r.instances[0].solved_at <= 2);
  CHECK(r.instances[0].assignment == std::vector<uint8_t>{1, 0, 1});
}

TEST_CASE("reinforce with pi=1 commits fields to the current bias") {
  CnfFormula f = gen_uniform(12, 3, 30, 5);
  FactorGraph g = build_factor_graph(f);
  uint64_t seed = 99;

  ReinforceState state;
  state.pi = 1.0;
  ReinforceState final_state;
  reinforce_solve(f, state, 1, seed, 0.0, &final_state);

  // at t=1 the fields are still zero, so the sweep equals a plain sp_sweep
  SpSurveys s;
  s.eta = sp_init(g, mix_seed(seed, 0)).eta;
  SpConfig plain;
  plain.damping = 0.0;
  s = sp_sweep(g, s, plain);
  auto bias = sp_bias(g, s);
  REQUIRE(static_cast<int>(final_state.local_field.size()) == f.num_vars);
  for (int i = 0; i < f.num_vars; ++i)
    CHECK(final_state.local_field[i] ==
          doctest::Approx(bias[i].w_plus - bias[i].w_minus).epsilon(1e-12));
}

TEST_CASE("reinforce on random 3-SAT at alpha 3.5") {
  int solved = 0;
  for (uint64_t s = 0; s < 10; ++s) {
    CnfFormula f = gen_uniform(50, 3, 175, mix_seed(2024, s));
    RunResult r = reinforce_solve(f, {}, 1000, s);
    if (r.instances[0].solved) {
      CHECK(evaluate(f, r.instances[0].assignment).is_sat);
      ++solved;
    }
  }
  CHECK(solved >= 8);
}

TEST_CASE("solved results always verify") {
  std::mt19937_64 rng(50);
  for (int t = 0; t < 10; ++t) {
    CnfFormula f = gen_uniform(20, 3, 50, rng());
    for (int which = 0; which < 3; ++which) {
      RunResult r;
      if (which == 0)
        r = bp_guided_decimate(f, {});
      else if (which == 1)
        r = sp_guided_decimate(f, {});
      else
        r = reinforce_solve(f, {}, 300, t);
      if (r.instances[0].solved) CHECK(evaluate(f, r.instances[0].assignment).is_sat);
    }
  }
}
