#include "pdp/generators.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace pdp {

uint64_t mix_seed(uint64_t seed, uint64_t index) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void UniformConfig::validate() const {
  if (n_min < 1 || n_min > n_max) throw std::invalid_argument("uniform: bad n range");
  if (k_min < 2 || k_min > k_max) throw std::invalid_argument("uniform: bad k range");
  if (n_min < k_max) throw std::invalid_argument("uniform: n_min must be >= k_max");
  if (alpha_min <= 0 || alpha_min > alpha_max)
    throw std::invalid_argument("uniform: bad alpha range");
}

void CaConfig::validate() const {
  if (communities < 2) throw std::invalid_argument("ca: need at least 2 communities");
  if (q < 0 || q + 1.0 / communities > 1.0)
    throw std::invalid_argument("ca: Q + 1/c must be <= 1");
  if (n_min < communities * k)
    throw std::invalid_argument("ca: every community must be able to host a clause (n >= c*k)");
  if (n_min > n_max || alpha_min <= 0 || alpha_min > alpha_max)
    throw std::invalid_argument("ca: bad ranges");
}

namespace {

// k distinct values from [lo, hi) by rejection; k is small relative to the range.
void sample_distinct(std::mt19937_64& rng, int lo, int hi, int k, std::vector<int>& out) {
  out.clear();
  std::uniform_int_distribution<int> pick(lo, hi - 1);
  while (static_cast<int>(out.size()) < k) {
    int v = pick(rng);
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
}

}  // namespace

CnfFormula gen_uniform(int n, int k, int m, uint64_t seed) {
  if (k > n) throw std::invalid_argument("gen_uniform: k > n");
  if (k < 1 || m < 0) throw std::invalid_argument("gen_uniform: bad k or m");
  std::mt19937_64 rng(seed);
  CnfFormula f;
  f.num_vars = n;
  f.provenance = {"uniform", m, k, n > 0 ? static_cast<double>(m) / n : 0.0, {}, seed};
  std::vector<int> vars;
  for (int i = 0; i < m; ++i) {
    sample_distinct(rng, 1, n + 1, k, vars);
    Clause c;
    for (int v : vars) c.lits.push_back({v, (rng() & 1) ? 1 : -1});
    f.clauses.push_back(std::move(c));
  }
  return f;
}

std::pair<CnfFormula, CommunityPartition> gen_ca(int n, int k, int m, int communities, double q,
                                                 uint64_t seed) {
  if (communities < 2 || n < communities * k)
    throw std::invalid_argument("gen_ca: infeasible (need n >= c*k, c >= 2)");
  double p = q + 1.0 / communities;
  if (p > 1.0) throw std::invalid_argument("gen_ca: Q + 1/c exceeds 1");

  std::mt19937_64 rng(seed);
  CommunityPartition part;
  part.num_communities = communities;
  part.community.resize(n);
  // Near-equal contiguous blocks; community c holds vars [c*n/C, (c+1)*n/C).
  std::vector<int> start(communities + 1);
  for (int c = 0; c <= communities; ++c)
    start[c] = static_cast<int>(static_cast<int64_t>(c) * n / communities);
  for (int c = 0; c < communities; ++c)
    for (int v = start[c]; v < start[c + 1]; ++v) part.community[v] = c;

  CnfFormula f;
  f.num_vars = n;
  f.provenance = {"ca", m, k, n > 0 ? static_cast<double>(m) / n : 0.0, part.community, seed};

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> pick_comm(0, communities - 1);
  std::vector<int> vars, comms;
  for (int i = 0; i < m; ++i) {
    vars.clear();
    if (unit(rng) < p) {
      int c = pick_comm(rng);
      sample_distinct(rng, start[c], start[c + 1], k, vars);
    } else {
      sample_distinct(rng, 0, communities, k, comms);
      for (int c : comms) {
        std::uniform_int_distribution<int> pick_var(start[c], start[c + 1] - 1);
        vars.push_back(pick_var(rng));
      }
    }
    Clause cl;
    for (int v : vars) cl.lits.push_back({v + 1, (rng() & 1) ? 1 : -1});
    f.clauses.push_back(std::move(cl));
  }
  return {std::move(f), std::move(part)};
}

double modularity(const CnfFormula& f, const std::vector<int>& partition) {
  if (static_cast<int>(partition.size()) != f.num_vars)
    throw std::invalid_argument("modularity: partition size mismatch");
  int c_max = 0;
  for (int c : partition) c_max = std::max(c_max, c);

  std::unordered_map<uint64_t, double> w;
  for (const Clause& cl : f.clauses) {
    int k = cl.size();
    if (k < 2) continue;
    double wt = 2.0 / (static_cast<double>(k) * (k - 1));
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) {
        int a = cl.lits[i].var - 1, b = cl.lits[j].var - 1;
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        w[(static_cast<uint64_t>(a) << 32) | static_cast<uint64_t>(b)] += wt;
      }
  }
  double total = 0.0;
  std::vector<double> w_in(c_max + 1, 0.0), strength(c_max + 1, 0.0);
  for (const auto& [key, wt] : w) {
    int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
    total += wt;
    strength[partition[a]] += wt;
    strength[partition[b]] += wt;
    if (partition[a] == partition[b]) w_in[partition[a]] += wt;
  }
  if (total <= 0.0) return 0.0;
  double qm = 0.0;
  for (int c = 0; c <= c_max; ++c) {
    double s = strength[c] / (2.0 * total);
    qm += w_in[c] / total - s * s;
  }
  return qm;
}

FormulaStream::FormulaStream(UniformConfig cfg, uint64_t seed) : seed_(seed) {
  cfg.validate();
  make_ = [cfg, seed](uint64_t idx) {
    std::mt19937_64 rng(mix_seed(seed, idx));
    std::uniform_int_distribution<int> pick_n(cfg.n_min, cfg.n_max);
    std::uniform_int_distribution<int> pick_k(cfg.k_min, cfg.k_max);
    std::uniform_real_distribution<double> pick_a(cfg.alpha_min, cfg.alpha_max);
    int n = pick_n(rng);
    int k = std::min(pick_k(rng), n);
    double alpha = pick_a(rng);
    int m = std::max(1, static_cast<int>(std::lround(alpha * n)));
    return gen_uniform(n, k, m, rng());
  };
}

FormulaStream::FormulaStream(CaConfig cfg, uint64_t seed) : seed_(seed) {
  cfg.validate();
  make_ = [cfg, seed](uint64_t idx) {
    std::mt19937_64 rng(mix_seed(seed, idx));
    std::uniform_int_distribution<int> pick_n(cfg.n_min, cfg.n_max);
    std::uniform_real_distribution<double> pick_a(cfg.alpha_min, cfg.alpha_max);
    int n = pick_n(rng);
    double alpha = pick_a(rng);
    int m = std::max(1, static_cast<int>(std::lround(alpha * n)));
    return gen_ca(n, cfg.k, m, cfg.communities, cfg.q, rng()).first;
  };
}

CnfFormula FormulaStream::next() { return make_(index_++); }

std::optional<std::vector<uint8_t>> exhaustive_witness(const CnfFormula& f) {
  if (f.num_vars > 25)
    throw std::invalid_argument("exhaustive_witness: refusing n > 25 (use a solver witness)");
  int n = f.num_vars;
  std::vector<uint8_t> hard(n, 0);
  uint64_t limit = 1ULL << n;
  for (uint64_t bits = 0; bits < limit; ++bits) {
    for (int i = 0; i < n; ++i) hard[i] = (bits >> i) & 1;
    bool ok = true;
    for (const Clause& c : f.clauses) {
      bool sat = false;
      for (const Literal& l : c.lits)
        if ((l.sign > 0) == (hard[l.var - 1] != 0)) {
          sat = true;
          break;
        }
      if (!sat) {
        ok = false;
        break;
      }
    }
    if (ok) return hard;
  }
  return std::nullopt;
}

std::vector<DatasetEntry> gen_dataset(const UniformConfig& cfg, const CaConfig& ca_cfg,
                                      bool use_ca, int count, const std::string& out_dir,
                                      const std::string& prefix, uint64_t seed,
                                      const DatasetOptions& opt) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<DatasetEntry> entries;
  uint64_t idx = 0;
  int attempts = 0;
  const int max_attempts = count * 200 + 1000;
  while (static_cast<int>(entries.size()) < count) {
    if (++attempts > max_attempts)
      throw std::runtime_error("gen_dataset: sat_filter rejected too many instances");
    uint64_t inst_seed = mix_seed(seed, idx++);
    CnfFormula f;
    CommunityPartition part;
    if (use_ca) {
      std::mt19937_64 rng(inst_seed);
      std::uniform_int_distribution<int> pick_n(ca_cfg.n_min, ca_cfg.n_max);
      std::uniform_real_distribution<double> pick_a(ca_cfg.alpha_min, ca_cfg.alpha_max);
      int n = pick_n(rng);
      int m = std::max(1, static_cast<int>(std::lround(pick_a(rng) * n)));
      auto [ff, pp] = gen_ca(n, ca_cfg.k, m, ca_cfg.communities, ca_cfg.q, rng());
      f = std::move(ff);
      part = std::move(pp);
    } else {
      std::mt19937_64 rng(inst_seed);
      std::uniform_int_distribution<int> pick_n(cfg.n_min, cfg.n_max);
      std::uniform_int_distribution<int> pick_k(cfg.k_min, cfg.k_max);
      std::uniform_real_distribution<double> pick_a(cfg.alpha_min, cfg.alpha_max);
      int n = pick_n(rng);
      int k = std::min(pick_k(rng), n);
      int m = std::max(1, static_cast<int>(std::lround(pick_a(rng) * n)));
      f = gen_uniform(n, k, m, rng());
    }

    std::string certified = "no";
    if (opt.sat_filter) {
      if (f.num_vars <= opt.exhaustive_limit) {
        auto w = exhaustive_witness(f);
        if (!w) continue;
        certified = "exhaustive";
      } else if (opt.witness_solver) {
        auto w = opt.witness_solver(f);
        if (!w) continue;
        if (!evaluate(f, *w).is_sat)
          throw std::runtime_error("gen_dataset: witness solver returned a non-model");
        certified = "witness:" + opt.witness_name;
      } else {
        throw std::runtime_error(
            "gen_dataset: sat_filter requires exhaustive check (n <= " +
            std::to_string(opt.exhaustive_limit) + ") or a witness solver");
      }
    }

    DatasetEntry e;
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%05zu.cnf", prefix.c_str(), entries.size());
    e.filename = name;
    e.n = f.num_vars;
    e.m = f.num_clauses();
    e.k = f.provenance.k;
    e.alpha = f.alpha();
    e.generator = f.provenance.generator;
    e.q_target = use_ca ? ca_cfg.q : 0.0;
    e.q_measured = use_ca ? modularity(f, part.community) : 0.0;
    e.sat_certified = certified;
    e.seed = inst_seed;
    write_dimacs_file(f, (fs::path(out_dir) / e.filename).string());
    entries.push_back(std::move(e));
  }
  write_manifest(entries, (fs::path(out_dir) / "manifest.csv").string());
  return entries;
}

void write_manifest(const std::vector<DatasetEntry>& entries, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "filename,n,m,k,alpha,generator,q_target,q_measured,sat_certified,seed\n";
  for (const auto& e : entries) {
    out << e.filename << ',' << e.n << ',' << e.m << ',' << e.k << ',' << e.alpha << ','
        << e.generator << ',' << e.q_target << ',' << e.q_measured << ',' << e.sat_certified
        << ',' << e.seed << '\n';
  }
}

}  // namespace pdp
