#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdp {

// A literal is a 1-based variable index with a sign (+1 plain, -1 negated).
struct Literal {
  int var = 0;
  int sign = 0;

  bool operator==(const Literal&) const = default;
};

// Clause literals keep their construction order but never repeat a variable
// and never contain both signs of one variable (such clauses are dropped
// before a Clause is built).
struct Clause {
  std::vector<Literal> lits;

  int size() const { return static_cast<int>(lits.size()); }
  bool operator==(const Clause&) const = default;
};

// Optional generator / parser metadata carried along with a formula.
struct Provenance {
  std::string generator;          // "", "dimacs", "uniform", "ca"
  int original_num_clauses = -1;  // clause count before dedup/tautology drop
  int k = 0;                      // clause size for fixed-k generators
  double alpha = 0.0;             // requested clause density
  std::vector<int> community;     // per-variable community id (CA model)
  uint64_t seed = 0;
};

struct CnfFormula {
  int num_vars = 0;
  std::vector<Clause> clauses;
  Provenance provenance;

  int num_clauses() const { return static_cast<int>(clauses.size()); }
  double alpha() const {
    return num_vars > 0 ? static_cast<double>(clauses.size()) / num_vars : 0.0;
  }

  bool operator==(const CnfFormula& o) const {
    return num_vars == o.num_vars && clauses == o.clauses;
  }
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bipartite variable/clause graph with one signed edge per clause literal.
// Variables and clauses are 0-based here; DIMACS 1-based indices exist only
// at the parse/write boundary. A graph may hold several concatenated
// instances; `bounds` gives per-instance offsets and `replica_source` maps
// each instance to the instance it replicates (itself for plain batches).
struct FactorGraph {
  struct Edge {
    int var = 0;
    int clause = 0;
    double sign = 0.0;  // +1 or -1, matching the literal's sign
  };
  struct Boundary {
    int var0 = 0;
    int clause0 = 0;
    int edge0 = 0;
  };

  int num_vars = 0;
  int num_clauses = 0;
  std::vector<Edge> edges;

  // CSR adjacency: edge ids incident to each variable / clause.
  std::vector<int> var_offsets;    // size num_vars + 1
  std::vector<int> var_edges;      // size edges.size()
  std::vector<int> clause_offsets; // size num_clauses + 1
  std::vector<int> clause_edges;   // size edges.size()

  std::vector<Boundary> bounds;        // size num_instances + 1
  std::vector<int> replica_source;     // size num_instances

  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_instances() const { return static_cast<int>(bounds.size()) - 1; }

  int instance_vars(int j) const { return bounds[j + 1].var0 - bounds[j].var0; }
  int instance_clauses(int j) const { return bounds[j + 1].clause0 - bounds[j].clause0; }
  int instance_edges(int j) const { return bounds[j + 1].edge0 - bounds[j].edge0; }
};

// Soft assignment in (0,1)^N; the hard assignment thresholds at 0.5
// (soft >= 0.5 maps to 1).
struct Assignment {
  std::vector<double> soft;

  std::vector<uint8_t> hard() const;
};

std::vector<uint8_t> hard_threshold(const std::vector<double>& soft);

struct EvalResult {
  bool is_sat = false;
  std::vector<int> unsatisfied;  // 0-based clause indices
};

// --- operations ---

// Parses DIMACS CNF. Duplicate literals within a clause are removed and
// tautological clauses dropped; the pre-drop clause count is recorded in
// provenance. Empty clauses are rejected: this toolkit searches for models
// and an empty clause admits none.
CnfFormula parse_dimacs(std::istream& in);
CnfFormula parse_dimacs(const std::string& text);
CnfFormula parse_dimacs_file(const std::string& path);

void write_dimacs(const CnfFormula& f, std::ostream& out);
std::string write_dimacs(const CnfFormula& f);
void write_dimacs_file(const CnfFormula& f, const std::string& path);

FactorGraph build_factor_graph(const CnfFormula& f);

EvalResult evaluate(const CnfFormula& f, const std::vector<uint8_t>& hard);

// Per-instance satisfiability of a (possibly batched) graph under a hard
// assignment covering all batch variables.
std::vector<uint8_t> graph_sat_flags(const FactorGraph& g,
                                     const std::vector<uint8_t>& hard);

FactorGraph concat_batch(const std::vector<FactorGraph>& graphs);

// R copies of a single-instance graph, all flagged as replicas of instance 0.
FactorGraph replicate(const FactorGraph& g, int r);

// Normalizes raw literals into a clause: dedups repeated literals, returns
// false for tautologies (caller drops the clause). Throws on empty input or
// out-of-range variables.
bool normalize_clause(const std::vector<int>& raw_lits, int num_vars, Clause& out);

}  // namespace pdp
