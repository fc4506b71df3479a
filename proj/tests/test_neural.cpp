#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "pdp/engine.hpp"
#include "pdp/formula.hpp"
#include "pdp/generators.hpp"
#include "pdp/neural.hpp"

using namespace pdp;

namespace {

std::vector<std::pair<std::vector<double>, double>> random_elements(int count, int h,
                                                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<std::pair<std::vector<double>, double>> els;
  for (int i = 0; i < count; ++i) {
    std::vector<double> m(h);
    for (double& v : m) v = d(rng);
    els.push_back({m, (rng() & 1) ? 1.0 : -1.0});
  }
  return els;
}

}  // namespace

TEST_CASE("deepset is permutation invariant") {
  std::mt19937_64 rng(1);
  NeuralPdpModel m = init_model(6, 9);
  auto els = random_elements(3, 6, rng);
  auto base = deepset_forward(m.psi_var, els);
  std::vector<int> perm = {2, 0, 1};
  std::vector<std::pair<std::vector<double>, double>> shuffled;
  for (int i : perm) shuffled.push_back(els[i]);
  auto permuted = deepset_forward(m.psi_var, shuffled);
  REQUIRE(base.size() == permuted.size());
  for (size_t i = 0; i < base.size(); ++i) CHECK(base[i] == doctest::Approx(permuted[i]).epsilon(1e-12));
}

TEST_CASE("deepset empty set reduces to outer of zeros") {
  NeuralPdpModel m = init_model(5, 4);
  auto a = deepset_forward(m.psi_clause, {});
  auto b = deepset_forward(m.psi_clause, {});
  CHECK(a == b);
  CHECK(static_cast<int>(a.size()) == 5);
  for (double v : a) CHECK(std::isfinite(v));
}

TEST_CASE("deepset is a sum, not a mean: duplicates change the output") {
  std::mt19937_64 rng(3);
  NeuralPdpModel m = init_model(6, 2);
  auto els = random_elements(1, 6, rng);
  auto once = deepset_forward(m.psi_var, els);
  els.push_back(els[0]);
  auto twice = deepset_forward(m.psi_var, els);
  double diff = 0;
  for (size_t i = 0; i < once.size(); ++i) diff = std::max(diff, std::abs(once[i] - twice[i]));
  CHECK(diff > 1e-6);
}

TEST_CASE("gru with zero parameters halves the hidden state") {
  GruParams p;
  p.resize(5, 4);
  std::vector<double> input(5, 0.7);
  std::vector<double> hidden = {1.0, -2.0, 0.5, 4.0};
  auto out = gru_forward(p, input, hidden);
  REQUIRE(out.size() == 4);
  for (int j = 0; j < 4; ++j) CHECK(out[j] == doctest::Approx(0.5 * hidden[j]));
}

TEST_CASE("gru saturates but stays finite on huge inputs") {
  NeuralPdpModel m = init_model(8, 5);
  std::vector<double> input(9, 1e3);
  std::vector<double> hidden(8, -1e3);
  auto out = gru_forward(m.phi_var, input, hidden);
  for (double v : out) CHECK(std::isfinite(v));
}

TEST_CASE("gru rejects dimension mismatches") {
  NeuralPdpModel m = init_model(4, 5);
  std::vector<double> input(4, 0.0);  // should be h+1 = 5
  std::vector<double> hidden(4, 0.0);
  CHECK_THROWS_AS(gru_forward(m.phi_var, input, hidden), std::invalid_argument);
}

TEST_CASE("predictions lie strictly inside (0,1) and isolated variables get the empty-set constant") {
  NeuralPdpModel m = init_model(6, 21);
  CnfFormula f;
  f.num_vars = 3;
  f.clauses.push_back({{{1, 1}, {2, -1}}});  // variable 3 isolated
  FactorGraph g = build_factor_graph(f);
  MessageState s = init_messages(g, 6, 2, {});
  auto [next, soft] = step(s, g, m);
  for (double v : soft.soft) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
  auto empty_pred = deepset_forward(m.gamma, {});
  CHECK(soft.soft[2] == doctest::Approx(empty_pred[0]).epsilon(1e-12));
}

TEST_CASE("fused graph path matches the per-set reference forms") {
  NeuralPdpModel m = init_model(5, 31);
  CnfFormula f = parse_dimacs("p cnf 3 2\n1 -2 0\n2 3 0");
  FactorGraph g = build_factor_graph(f);
  int h = 5, ne = g.num_edges();
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  std::vector<double> d_c2v(static_cast<size_t>(ne) * h);
  for (double& v : d_c2v) v = d(rng);

  std::vector<double> out(static_cast<size_t>(ne) * h);
  m.propagate_var(g, d_c2v, out);

  for (int e = 0; e < ne; ++e) {
    std::vector<std::pair<std::vector<double>, double>> els;
    int var = g.edges[e].var;
    for (int s = g.var_offsets[var]; s < g.var_offsets[var + 1]; ++s) {
      int b = g.var_edges[s];
      if (b == e) continue;
      std::vector<double> msg(d_c2v.begin() + static_cast<size_t>(b) * h,
                              d_c2v.begin() + static_cast<size_t>(b + 1) * h);
      els.push_back({msg, g.edges[b].sign});
    }
    auto ref = deepset_forward(m.psi_var, els);
    for (int j = 0; j < h; ++j)
      CHECK(out[static_cast<size_t>(e) * h + j] == doctest::Approx(ref[j]).epsilon(1e-10));
  }
}

TEST_CASE("init_model determinism and shape consistency") {
  NeuralPdpModel a = init_model(7, 123);
  NeuralPdpModel b = init_model(7, 123);
  NeuralPdpModel c = init_model(7, 124);
  bool same = true, different = false;
  a.visit_blocks([&](const std::string& name, int rows, int cols, std::vector<double>& data) {
    CHECK(static_cast<size_t>(rows) * cols == data.size());
  });
  std::vector<double> fa, fb, fc;
  a.visit_blocks([&](const std::string&, int, int, std::vector<double>& d) { fa.insert(fa.end(), d.begin(), d.end()); });
  b.visit_blocks([&](const std::string&, int, int, std::vector<double>& d) { fb.insert(fb.end(), d.begin(), d.end()); });
  c.visit_blocks([&](const std::string&, int, int, std::vector<double>& d) { fc.insert(fc.end(), d.begin(), d.end()); });
  same = fa == fb;
  different = fa != fc;
  CHECK(same);
  CHECK(different);
  CHECK(a.num_parameters() == fa.size());
}

TEST_CASE("forward pass on a toy graph is finite") {
  NeuralPdpModel m = init_model(8, 77);
  CnfFormula f = gen_uniform(10, 3, 25, 4);
  FactorGraph g = build_factor_graph(f);
  RunConfig cfg;
  cfg.t_max = 5;
  cfg.mode = RunMode::train;
  RunResult r = run(g, m, cfg);
  for (const auto& soft : r.trajectory)
    for (double v : soft) {
      CHECK(std::isfinite(v));
      CHECK(v > 0.0);
      CHECK(v < 1.0);
    }
}

TEST_CASE("checkpoint round trip is bit exact") {
  namespace fs = std::filesystem;
  std::string path = (fs::temp_directory_path() / "pdpsat_ckpt_test.bin").string();
  NeuralPdpModel m = init_model(6, 2025);
  CheckpointMeta meta;
  meta.train_step = 41;
  meta.tau = 0.73;
  NamedBlocks extra;
  extra["opt.m"] = {1.0, 2.0, 3.5};
  save_checkpoint(m, path, meta, extra);

  CheckpointMeta meta2;
  NamedBlocks extra2;
  NeuralPdpModel loaded = load_checkpoint(path, &meta2, &extra2);
  CHECK(meta2.train_step == 41);
  CHECK(meta2.tau == 0.73);
  CHECK(extra2.at("opt.m") == std::vector<double>{1.0, 2.0, 3.5});
  CHECK(loaded.h == 6);

  std::vector<double> fa, fb;
  m.visit_blocks([&](const std::string&, int, int, std::vector<double>& d) { fa.insert(fa.end(), d.begin(), d.end()); });
  loaded.visit_blocks([&](const std::string&, int, int, std::vector<double>& d) { fb.insert(fb.end(), d.begin(), d.end()); });
  CHECK(fa == fb);  // bit exact
  fs::remove(path);
}

TEST_CASE("checkpoint rejects truncation and garbage") {
  namespace fs = std::filesystem;
  std::string path = (fs::temp_directory_path() / "pdpsat_ckpt_bad.bin").string();
  NeuralPdpModel m = init_model(4, 8);
  save_checkpoint(m, path);

  // truncate
  auto size = fs::file_size(path);
  fs::resize_file(path, size / 2);
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);

  // garbage magic
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a checkpoint at all";
  }
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
  CHECK_THROWS_AS(load_checkpoint(path + ".missing"), std::runtime_error);
  fs::remove(path);
}

TEST_CASE("checkpoint load reproduces identical runs") {
  namespace fs = std::filesystem;
  std::string path = (fs::temp_directory_path() / "pdpsat_ckpt_run.bin").string();
  NeuralPdpModel m = init_model(8, 3);
  save_checkpoint(m, path);
  NeuralPdpModel loaded = load_checkpoint(path);

  CnfFormula f = gen_uniform(12, 3, 30, 9);
  FactorGraph g = build_factor_graph(f);
  RunConfig cfg;
  cfg.t_max = 8;
  cfg.mode = RunMode::train;
  cfg.seed = 5;
  RunResult a = run(g, m, cfg);
  RunResult b = run(g, loaded, cfg);
  REQUIRE(a.trajectory.size() == b.trajectory.size());
  for (size_t t = 0; t < a.trajectory.size(); ++t) CHECK(a.trajectory[t] == b.trajectory[t]);
  fs::remove(path);
}
