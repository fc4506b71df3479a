#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdp/formula.hpp"

namespace pdp {

struct UniformConfig {
  int n_min = 4, n_max = 100;
  int k_min = 2, k_max = 10;
  double alpha_min = 2.0, alpha_max = 10.0;

  void validate() const;
};

// Community Attachment model: with probability p = q + 1/c a clause draws all
// k variables from one community, otherwise from k distinct communities.
struct CaConfig {
  int n_min = 40, n_max = 100;
  int k = 4;
  double alpha_min = 2.0, alpha_max = 10.0;
  int communities = 10;
  double q = 0.8;

  void validate() const;
};

struct CommunityPartition {
  std::vector<int> community;  // per variable, ids in 0..c-1
  int num_communities = 0;
};

CnfFormula gen_uniform(int n, int k, int m, uint64_t seed);

std::pair<CnfFormula, CommunityPartition> gen_ca(int n, int k, int m, int communities, double q,
                                                 uint64_t seed);

// Weighted Newman modularity of the variable incidence graph (clique per
// clause, pair weight 1/C(k,2)) with respect to a known partition.
double modularity(const CnfFormula& f, const std::vector<int>& partition);

// Infinite deterministic instance stream; instance i depends only on
// (config, seed, i).
class FormulaStream {
 public:
  FormulaStream(UniformConfig cfg, uint64_t seed);
  FormulaStream(CaConfig cfg, uint64_t seed);

  CnfFormula next();
  CnfFormula at(uint64_t index) const { return make_(index); }
  void set_index(uint64_t index) { index_ = index; }
  uint64_t index() const { return index_; }

 private:
  std::function<CnfFormula(uint64_t)> make_;
  uint64_t seed_ = 0;
  uint64_t index_ = 0;
};

struct DatasetEntry {
  std::string filename;
  int n = 0, m = 0, k = 0;
  double alpha = 0.0;
  std::string generator;
  double q_target = 0.0;
  double q_measured = 0.0;
  std::string sat_certified;  // "no", "exhaustive", "witness:<solver>"
  uint64_t seed = 0;
};

struct DatasetOptions {
  bool sat_filter = false;
  // Witness finder for instances too large for exhaustive certification
  // (returns a satisfying assignment or nullopt). Required for sat_filter
  // with n > exhaustive_limit.
  std::function<std::optional<std::vector<uint8_t>>(const CnfFormula&)> witness_solver;
  std::string witness_name = "walksat";
  int exhaustive_limit = 25;
};

// Writes `count` DIMACS files named <prefix>_NNNN.cnf plus manifest.csv.
std::vector<DatasetEntry> gen_dataset(const UniformConfig& cfg, const CaConfig& ca_cfg,
                                      bool use_ca, int count, const std::string& out_dir,
                                      const std::string& prefix, uint64_t seed,
                                      const DatasetOptions& opt);

void write_manifest(const std::vector<DatasetEntry>& entries, const std::string& path);

// Exhaustive satisfiability check; only valid for f.num_vars <= 25 or so.
// Returns a witness if satisfiable.
std::optional<std::vector<uint8_t>> exhaustive_witness(const CnfFormula& f);

// splitmix64; used everywhere a derived seed is needed.
uint64_t mix_seed(uint64_t seed, uint64_t index);

}  // namespace pdp
