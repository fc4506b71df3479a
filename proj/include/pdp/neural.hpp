#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pdp/engine.hpp"

namespace pdp {

// 2-layer perceptron, row-major weights; hidden activation is log-sigmoid.
struct Mlp {
  int in = 0, hidden = 0, out = 0;
  std::vector<double> w1, b1, w2, b2;

  void resize(int in_, int hidden_, int out_);
};

// Permutation-invariant set function: outer(sum_elements inner([msg ; e])).
struct DeepSetParams {
  Mlp inner;  // (h+1) -> h
  Mlp outer;  // h -> out (h for propagators, 1 for the predictor)
  bool final_sigmoid = false;
};

// Gated recurrent cell; input [p ; e] of size h+1, hidden state of size h.
struct GruParams {
  int in = 0, h = 0;
  std::vector<double> wz, uz, bz;
  std::vector<double> wr, ur, br;
  std::vector<double> wc, uc, bc;

  void resize(int in_, int h_);
};

class NeuralPdpModel : public PdpModel {
 public:
  int h = 0;
  double dropout_rate = 0.2;
  DeepSetParams psi_var, psi_clause, gamma;
  GruParams phi_var, phi_clause;

  int message_dim() const override { return h; }
  void propagate_var(const FactorGraph&, std::span<const double>,
                     std::span<double>) const override;
  void propagate_clause(const FactorGraph&, std::span<const double>,
                        std::span<double>) const override;
  void decimate_var(const FactorGraph&, std::span<const double>, std::span<const double>,
                    std::span<double>) const override;
  void decimate_clause(const FactorGraph&, std::span<const double>, std::span<const double>,
                       std::span<double>) const override;
  void predict(const FactorGraph&, std::span<const double>, std::span<double>) const override;

  // Visits every parameter block in a fixed order: f(name, rows, cols, data&).
  template <typename F>
  void visit_blocks(F&& f);
  template <typename F>
  void visit_blocks(F&& f) const;

  size_t num_parameters() const;
};

// Single-set / single-edge reference forms of the network pieces; the graph
// paths above compute the same functions batched over edges.
std::vector<double> deepset_forward(const DeepSetParams& params,
                                    const std::vector<std::pair<std::vector<double>, double>>& elements);

std::vector<double> gru_forward(const GruParams& params, std::span<const double> input,
                                std::span<const double> hidden);

NeuralPdpModel init_model(int h, uint64_t seed, double dropout_rate = 0.2);

struct CheckpointMeta {
  uint64_t train_step = 0;
  double tau = 0.0;
};

using NamedBlocks = std::map<std::string, std::vector<double>>;

void save_checkpoint(const NeuralPdpModel& model, const std::string& path,
                     const CheckpointMeta& meta = {}, const NamedBlocks& extra = {});

NeuralPdpModel load_checkpoint(const std::string& path, CheckpointMeta* meta = nullptr,
                               NamedBlocks* extra = nullptr);

// --- template bodies ---

template <typename F>
void NeuralPdpModel::visit_blocks(F&& f) {
  auto mlp = [&](const std::string& p, Mlp& m) {
    f(p + ".w1", m.in, m.hidden, m.w1);
    f(p + ".b1", 1, m.hidden, m.b1);
    f(p + ".w2", m.hidden, m.out, m.w2);
    f(p + ".b2", 1, m.out, m.b2);
  };
  auto deepset = [&](const std::string& p, DeepSetParams& d) {
    mlp(p + ".inner", d.inner);
    mlp(p + ".outer", d.outer);
  };
  auto gru = [&](const std::string& p, GruParams& g) {
    f(p + ".wz", g.in, g.h, g.wz);
    f(p + ".uz", g.h, g.h, g.uz);
    f(p + ".bz", 1, g.h, g.bz);
    f(p + ".wr", g.in, g.h, g.wr);
    f(p + ".ur", g.h, g.h, g.ur);
    f(p + ".br", 1, g.h, g.br);
    f(p + ".wc", g.in, g.h, g.wc);
    f(p + ".uc", g.h, g.h, g.uc);
    f(p + ".bc", 1, g.h, g.bc);
  };
  deepset("psi_var", psi_var);
  deepset("psi_clause", psi_clause);
  gru("phi_var", phi_var);
  gru("phi_clause", phi_clause);
  deepset("gamma", gamma);
}

template <typename F>
void NeuralPdpModel::visit_blocks(F&& f) const {
  const_cast<NeuralPdpModel*>(this)->visit_blocks(
      [&](const std::string& name, int rows, int cols, std::vector<double>& data) {
        f(name, rows, cols, const_cast<const std::vector<double>&>(data));
      });
}

}  // namespace pdp
