#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "pdp/formula.hpp"
#include "pdp/generators.hpp"

using namespace pdp;

TEST_CASE("gen_uniform clause shape") {
  CnfFormula f = gen_uniform(100, 4, 900, 3);
  CHECK(f.num_vars == 100);
  CHECK(f.num_clauses() == 900);
  CHECK(f.alpha() == doctest::Approx(9.0));
  for (const Clause& c : f.clauses) {
    CHECK(c.size() == 4);
    std::set<int> vars;
    for (const Literal& l : c.lits) {
      CHECK(l.var >= 1);
      CHECK(l.var <= 100);
      vars.insert(l.var);
    }
    CHECK(static_cast<int>(vars.size()) == 4);  // distinct variables
  }
}

TEST_CASE("gen_uniform distinct variables over many clauses") {
  CnfFormula f = gen_uniform(30, 3, 10000, 11);
  for (const Clause& c : f.clauses) {
    std::set<int> vars;
    for (const Literal& l : c.lits) vars.insert(l.var);
    REQUIRE(vars.size() == 3);
  }
}

TEST_CASE("gen_uniform sign balance") {
  CnfFormula f = gen_uniform(200, 5, 20000, 123);
  long pos = 0, total = 0;
  for (const Clause& c : f.clauses)
    for (const Literal& l : c.lits) {
      pos += l.sign > 0;
      ++total;
    }
  CHECK(total == 100000);
  double frac = static_cast<double>(pos) / total;
  CHECK(std::abs(frac - 0.5) < 0.02);
}

TEST_CASE("gen_uniform determinism and errors") {
  CHECK(gen_uniform(10, 3, 20, 5) == gen_uniform(10, 3, 20, 5));
  CHECK_FALSE(gen_uniform(10, 3, 20, 5) == gen_uniform(10, 3, 20, 6));
  CHECK_THROWS_AS(gen_uniform(2, 3, 5, 1), std::invalid_argument);
}

TEST_CASE("gen_ca intra-community fraction approximates Q + 1/c") {
  int c = 10;
  double q = 0.8;
  auto [f, part] = gen_ca(500, 3, 10000, c, q, 77);
  REQUIRE(static_cast<int>(part.community.size()) == 500);
  int intra = 0;
  for (const Clause& cl : f.clauses) {
    std::set<int> comms;
    for (const Literal& l : cl.lits) comms.insert(part.community[l.var - 1]);
    if (comms.size() == 1) ++intra;
  }
  double frac = static_cast<double>(intra) / f.num_clauses();
  CHECK(std::abs(frac - (q + 1.0 / c)) < 0.02);
}

TEST_CASE("gen_ca near-zero Q is close to uniform mixing") {
  int c = 5;
  auto [f, part] = gen_ca(200, 3, 20000, c, 0.0, 13);
  int intra = 0;
  for (const Clause& cl : f.clauses) {
    std::set<int> comms;
    for (const Literal& l : cl.lits) comms.insert(part.community[l.var - 1]);
    if (comms.size() == 1) ++intra;
  }
  double frac = static_cast<double>(intra) / f.num_clauses();
  CHECK(std::abs(frac - 1.0 / c) < 0.02);
}

TEST_CASE("gen_ca rejects infeasible configs") {
  CHECK_THROWS_AS(gen_ca(10, 4, 5, 4, 0.5, 1), std::invalid_argument);   // n < c*k
  CHECK_THROWS_AS(gen_ca(100, 3, 5, 4, 0.9, 1), std::invalid_argument);  // Q + 1/c > 1
}

TEST_CASE("modularity of trivial partitions") {
  CnfFormula f = gen_uniform(40, 3, 120, 3);
  CHECK(modularity(f, std::vector<int>(40, 0)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(modularity(f, std::vector<int>(39, 0)), std::invalid_argument);
}

TEST_CASE("modularity of two disconnected cliques is 0.5") {
  CnfFormula f = parse_dimacs("p cnf 6 2\n1 2 3 0\n4 5 6 0");
  std::vector<int> part = {0, 0, 0, 1, 1, 1};
  CHECK(modularity(f, part) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("modularity invariant under relabeling and bounded by 1 - 1/c") {
  auto [f, part] = gen_ca(200, 4, 600, 4, 0.6, 21);
  double q1 = modularity(f, part.community);
  std::vector<int> relabeled(part.community);
  for (int& c : relabeled) c = (c + 2) % 4;
  CHECK(modularity(f, relabeled) == doctest::Approx(q1).epsilon(1e-12));
  CHECK(q1 <= 1.0 - 1.0 / 4 + 1e-9);
}

TEST_CASE("gen_ca measured modularity tracks target") {
  auto [f, part] = gen_ca(200, 4, 600, 5, 0.7, 31);
  double q = modularity(f, part.community);
  CHECK(std::abs(q - 0.7) < 0.05);
}

TEST_CASE("uniform instances score low modularity under a block partition") {
  for (uint64_t seed : {1u, 2u, 3u}) {
    CnfFormula f = gen_uniform(200, 4, 600, seed);
    std::vector<int> part(200);
    for (int i = 0; i < 200; ++i) part[i] = i / 50;
    CHECK(modularity(f, part) <= 0.3);
  }
}

TEST_CASE("stream determinism and ranges") {
  UniformConfig cfg;
  cfg.n_min = 4;
  cfg.n_max = 30;
  cfg.k_min = 2;
  cfg.k_max = 4;
  cfg.alpha_min = 2.0;
  cfg.alpha_max = 4.0;
  FormulaStream s1(cfg, 42), s2(cfg, 42);
  for (int i = 0; i < 50; ++i) {
    CnfFormula a = s1.next();
    CnfFormula b = s2.next();
    CHECK(a == b);
    CHECK(a.num_vars >= 4);
    CHECK(a.num_vars <= 30);
    REQUIRE(a.num_clauses() >= 1);
    int k = a.clauses[0].size();
    CHECK(k >= 2);
    CHECK(k <= 4);
    for (const Clause& c : a.clauses) CHECK(c.size() == k);  // k constant per formula
  }
  CHECK(s1.at(3) == FormulaStream(cfg, 42).at(3));  // random access matches
}

TEST_CASE("ca stream produces modular instances") {
  CaConfig cfg;
  cfg.n_min = 30;
  cfg.n_max = 60;
  cfg.k = 3;
  cfg.alpha_min = 2.0;
  cfg.alpha_max = 3.0;
  cfg.communities = 6;
  cfg.q = 0.7;
  FormulaStream s(cfg, 9);
  for (int i = 0; i < 20; ++i) {
    CnfFormula f = s.next();
    CHECK(f.num_vars >= 30);
    CHECK(f.num_vars <= 60);
    CHECK(f.provenance.generator == "ca");
    CHECK(static_cast<int>(f.provenance.community.size()) == f.num_vars);
  }
}

TEST_CASE("exhaustive_witness") {
  CnfFormula sat = parse_dimacs("p cnf 3 2\n1 -2 0\n2 3 0");
  auto w = exhaustive_witness(sat);
  REQUIRE(w.has_value());
  CHECK(evaluate(sat, *w).is_sat);

  CnfFormula unsat = parse_dimacs("p cnf 1 2\n1 0\n-1 0");
  CHECK_FALSE(exhaustive_witness(unsat).has_value());

  CnfFormula big = gen_uniform(30, 3, 60, 1);
  CHECK_THROWS_AS(exhaustive_witness(big), std::invalid_argument);
}

TEST_CASE("gen_dataset writes files and manifest") {
  namespace fs = std::filesystem;
  std::string dir = (fs::temp_directory_path() / "pdpsat_test_dataset").string();
  fs::remove_all(dir);

  UniformConfig cfg;
  cfg.n_min = 10;
  cfg.n_max = 15;
  cfg.k_min = 3;
  cfg.k_max = 3;
  cfg.alpha_min = 2.5;
  cfg.alpha_max = 2.5;
  DatasetOptions opt;
  opt.sat_filter = true;
  auto entries = gen_dataset(cfg, {}, false, 25, dir, "u", 5, opt);
  REQUIRE(static_cast<int>(entries.size()) == 25);
  CHECK(fs::exists(fs::path(dir) / "manifest.csv"));
  int files = 0;
  for (auto& p : fs::directory_iterator(dir))
    if (p.path().extension() == ".cnf") ++files;
  CHECK(files == 25);
  for (const auto& e : entries) {
    CHECK(e.sat_certified == "exhaustive");
    CnfFormula f = parse_dimacs_file((fs::path(dir) / e.filename).string());
    CHECK(f.num_vars == e.n);
    CHECK(std::abs(e.alpha - 2.5) < 0.15);  // m = round(alpha*n) quantization
    auto w = exhaustive_witness(f);
    CHECK(w.has_value());
  }
  fs::remove_all(dir);
}

TEST_CASE("gen_dataset refuses uncertifiable sizes without a witness solver") {
  namespace fs = std::filesystem;
  std::string dir = (fs::temp_directory_path() / "pdpsat_test_dataset2").string();
  fs::remove_all(dir);
  UniformConfig cfg;
  cfg.n_min = 30;
  cfg.n_max = 30;
  cfg.k_min = 3;
  cfg.k_max = 3;
  cfg.alpha_min = 2.0;
  cfg.alpha_max = 2.0;
  DatasetOptions opt;
  opt.sat_filter = true;
  CHECK_THROWS_AS(gen_dataset(cfg, {}, false, 2, dir, "u", 5, opt), std::runtime_error);
  fs::remove_all(dir);
}
