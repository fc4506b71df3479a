#include "pdp/formula.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace pdp {

std::vector<uint8_t> hard_threshold(const std::vector<double>& soft) {
  std::vector<uint8_t> hard(soft.size());
  for (size_t i = 0; i < soft.size(); ++i) hard[i] = soft[i] >= 0.5 ? 1 : 0;
  return hard;
}

std::vector<uint8_t> Assignment::hard() const { return hard_threshold(soft); }

bool normalize_clause(const std::vector<int>& raw_lits, int num_vars, Clause& out) {
  if (raw_lits.empty())
    throw ParseError("empty clause: formula is trivially unsatisfiable");
  out.lits.clear();
  for (int lit : raw_lits) {
    if (lit == 0) throw ParseError("literal 0 inside clause");
    int v = std::abs(lit);
    if (v > num_vars)
      throw ParseError("literal " + std::to_string(lit) + " exceeds declared variable count " +
                       std::to_string(num_vars));
    int sign = lit > 0 ? 1 : -1;
    bool dup = false;
    for (const Literal& l : out.lits) {
      if (l.var == v) {
        if (l.sign != sign) return false;  // tautology
        dup = true;
        break;
      }
    }
    if (!dup) out.lits.push_back({v, sign});
  }
  return true;
}

CnfFormula parse_dimacs(std::istream& in) {
  CnfFormula f;
  f.provenance.generator = "dimacs";
  std::string line;
  bool have_header = false;
  int declared_clauses = 0;
  std::vector<int> raw;
  int pre_drop = 0;

  auto flush_clause = [&]() {
    Clause c;
    ++pre_drop;
    if (normalize_clause(raw, f.num_vars, c)) f.clauses.push_back(std::move(c));
    raw.clear();
  };

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == 'c') continue;
    if (line[pos] == '%') break;  // SATLIB-style terminator
    if (line[pos] == 'p') {
      if (have_header) throw ParseError("duplicate header line");
      std::istringstream hs(line.substr(pos));
      std::string p, fmt;
      hs >> p >> fmt >> f.num_vars >> declared_clauses;
      if (hs.fail() || fmt != "cnf" || f.num_vars < 0 || declared_clauses < 0)
        throw ParseError("malformed header: " + line);
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError("clause data before 'p cnf' header");
    std::istringstream cs(line);
    int lit;
    while (cs >> lit) {
      if (lit == 0)
        flush_clause();
      else
        raw.push_back(lit);
    }
    if (!cs.eof()) throw ParseError("non-integer token in clause data: " + line);
  }
  if (!have_header) throw ParseError("missing 'p cnf' header");
  if (!raw.empty()) throw ParseError("last clause not terminated by 0");
  f.provenance.original_num_clauses = pre_drop;
  return f;
}

CnfFormula parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  return parse_dimacs(in);
}

CnfFormula parse_dimacs_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return parse_dimacs(in);
}

void write_dimacs(const CnfFormula& f, std::ostream& out) {
  out << "p cnf " << f.num_vars << ' ' << f.clauses.size() << '\n';
  for (const Clause& c : f.clauses) {
    for (const Literal& l : c.lits) out << l.sign * l.var << ' ';
    out << "0\n";
  }
}

std::string write_dimacs(const CnfFormula& f) {
  std::ostringstream out;
  write_dimacs(f, out);
  return out.str();
}

void write_dimacs_file(const CnfFormula& f, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_dimacs(f, out);
}

FactorGraph build_factor_graph(const CnfFormula& f) {
  FactorGraph g;
  g.num_vars = f.num_vars;
  g.num_clauses = f.num_clauses();
  for (int a = 0; a < g.num_clauses; ++a)
    for (const Literal& l : f.clauses[a].lits)
      g.edges.push_back({l.var - 1, a, static_cast<double>(l.sign)});

  int ne = g.num_edges();
  g.var_offsets.assign(g.num_vars + 1, 0);
  g.clause_offsets.assign(g.num_clauses + 1, 0);
  for (const auto& e : g.edges) {
    ++g.var_offsets[e.var + 1];
    ++g.clause_offsets[e.clause + 1];
  }
  for (int v = 0; v < g.num_vars; ++v) g.var_offsets[v + 1] += g.var_offsets[v];
  for (int a = 0; a < g.num_clauses; ++a) g.clause_offsets[a + 1] += g.clause_offsets[a];
  g.var_edges.resize(ne);
  g.clause_edges.resize(ne);
  std::vector<int> vfill(g.var_offsets.begin(), g.var_offsets.end() - 1);
  std::vector<int> cfill(g.clause_offsets.begin(), g.clause_offsets.end() - 1);
  for (int e = 0; e < ne; ++e) {
    g.var_edges[vfill[g.edges[e].var]++] = e;
    g.clause_edges[cfill[g.edges[e].clause]++] = e;
  }

  g.bounds = {{0, 0, 0}, {g.num_vars, g.num_clauses, ne}};
  g.replica_source = {0};
  return g;
}

EvalResult evaluate(const CnfFormula& f, const std::vector<uint8_t>& hard) {
  if (static_cast<int>(hard.size()) != f.num_vars)
    throw std::invalid_argument("assignment length " + std::to_string(hard.size()) +
                                " does not match variable count " + std::to_string(f.num_vars));
  EvalResult r;
  for (int a = 0; a < f.num_clauses(); ++a) {
    bool sat = false;
    for (const Literal& l : f.clauses[a].lits) {
      if ((l.sign > 0) == (hard[l.var - 1] != 0)) {
        sat = true;
        break;
      }
    }
    if (!sat) r.unsatisfied.push_back(a);
  }
  r.is_sat = r.unsatisfied.empty();
  return r;
}

std::vector<uint8_t> graph_sat_flags(const FactorGraph& g, const std::vector<uint8_t>& hard) {
  if (static_cast<int>(hard.size()) != g.num_vars)
    throw std::invalid_argument("assignment length does not match graph variable count");
  std::vector<uint8_t> clause_sat(g.num_clauses, 0);
  for (const auto& e : g.edges)
    if ((e.sign > 0) == (hard[e.var] != 0)) clause_sat[e.clause] = 1;
  std::vector<uint8_t> flags(g.num_instances(), 1);
  for (int j = 0; j < g.num_instances(); ++j)
    for (int a = g.bounds[j].clause0; a < g.bounds[j + 1].clause0; ++a)
      if (!clause_sat[a]) {
        flags[j] = 0;
        break;
      }
  return flags;
}

FactorGraph concat_batch(const std::vector<FactorGraph>& graphs) {
  if (graphs.empty()) throw std::invalid_argument("concat_batch: empty graph list");
  FactorGraph g;
  g.bounds.push_back({0, 0, 0});
  for (const FactorGraph& src : graphs) {
    int v0 = g.num_vars, c0 = g.num_clauses, e0 = g.num_edges();
    for (const auto& e : src.edges) g.edges.push_back({e.var + v0, e.clause + c0, e.sign});
    for (int j = 0; j < src.num_instances(); ++j) {
      g.bounds.push_back({v0 + src.bounds[j + 1].var0, c0 + src.bounds[j + 1].clause0,
                          e0 + src.bounds[j + 1].edge0});
      g.replica_source.push_back(static_cast<int>(g.replica_source.size()));
    }
    g.num_vars += src.num_vars;
    g.num_clauses += src.num_clauses;
  }

  int ne = g.num_edges();
  g.var_offsets.assign(g.num_vars + 1, 0);
  g.clause_offsets.assign(g.num_clauses + 1, 0);
  for (const auto& e : g.edges) {
    ++g.var_offsets[e.var + 1];
    ++g.clause_offsets[e.clause + 1];
  }
  for (int v = 0; v < g.num_vars; ++v) g.var_offsets[v + 1] += g.var_offsets[v];
  for (int a = 0; a < g.num_clauses; ++a) g.clause_offsets[a + 1] += g.clause_offsets[a];
  g.var_edges.resize(ne);
  g.clause_edges.resize(ne);
  std::vector<int> vfill(g.var_offsets.begin(), g.var_offsets.end() - 1);
  std::vector<int> cfill(g.clause_offsets.begin(), g.clause_offsets.end() - 1);
  for (int e = 0; e < ne; ++e) {
    g.var_edges[vfill[g.edges[e].var]++] = e;
    g.clause_edges[cfill[g.edges[e].clause]++] = e;
  }
  return g;
}

FactorGraph replicate(const FactorGraph& g, int r) {
  if (r < 1) throw std::invalid_argument("replicate: R must be >= 1");
  if (g.num_instances() != 1)
    throw std::invalid_argument("replicate: source must be a single-instance graph");
  FactorGraph out = concat_batch(std::vector<FactorGraph>(r, g));
  std::fill(out.replica_source.begin(), out.replica_source.end(), 0);
  return out;
}

}  // namespace pdp
