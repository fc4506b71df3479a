#include "pdp/neural.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "pdp/grad.hpp"

namespace pdp {

void Mlp::resize(int in_, int hidden_, int out_) {
  in = in_;
  hidden = hidden_;
  out = out_;
  w1.assign(static_cast<size_t>(in) * hidden, 0.0);
  b1.assign(hidden, 0.0);
  w2.assign(static_cast<size_t>(hidden) * out, 0.0);
  b2.assign(out, 0.0);
}

void GruParams::resize(int in_, int h_) {
  in = in_;
  h = h_;
  for (auto* w : {&wz, &wr, &wc}) w->assign(static_cast<size_t>(in) * h, 0.0);
  for (auto* u : {&uz, &ur, &uc}) u->assign(static_cast<size_t>(h) * h, 0.0);
  for (auto* b : {&bz, &br, &bc}) b->assign(h, 0.0);
}

namespace {

using grad::logsigmoid_scalar;
using grad::matmul_accum;
using grad::sigmoid_scalar;

// out (rows x mlp.out) = second_layer(logsig(first_layer(x))); no dropout on
// the inference path.
void mlp_forward(const Mlp& m, const std::vector<double>& x, int rows, std::vector<double>& out,
                 bool final_sigmoid) {
  std::vector<double> hid(static_cast<size_t>(rows) * m.hidden, 0.0);
  matmul_accum(x, rows, m.in, m.w1, m.hidden, hid);
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < m.hidden; ++j) {
      double& v = hid[static_cast<size_t>(r) * m.hidden + j];
      v = logsigmoid_scalar(v + m.b1[j]);
    }
  out.assign(static_cast<size_t>(rows) * m.out, 0.0);
  matmul_accum(hid, rows, m.hidden, m.w2, m.out, out);
  for (int r = 0; r < rows; ++r)
    for (int j = 0; j < m.out; ++j) {
      double& v = out[static_cast<size_t>(r) * m.out + j];
      v += m.b2[j];
      if (final_sigmoid) v = sigmoid_scalar(v);
    }
}

// Per-edge inputs [message ; sign] for one direction's incoming messages.
std::vector<double> edge_inputs(const FactorGraph& g, int h, std::span<const double> msgs) {
  int ne = g.num_edges();
  std::vector<double> x(static_cast<size_t>(ne) * (h + 1));
  for (int e = 0; e < ne; ++e) {
    std::copy(msgs.begin() + static_cast<size_t>(e) * h, msgs.begin() + static_cast<size_t>(e + 1) * h,
              x.begin() + static_cast<size_t>(e) * (h + 1));
    x[static_cast<size_t>(e) * (h + 1) + h] = g.edges[e].sign;
  }
  return x;
}

// Deep-set propagation over one side of the graph: inner embeds every edge
// message, per-node sums are shared, and each edge applies outer to
// (node sum - own embedding), i.e. the sum over its neighborhood minus
// itself.
void deepset_exclusive(const DeepSetParams& ds, const FactorGraph& g, int h, bool group_by_var,
                       std::span<const double> msgs, std::span<double> out) {
  int ne = g.num_edges();
  std::vector<double> x = edge_inputs(g, h, msgs);
  std::vector<double> u;
  mlp_forward(ds.inner, x, ne, u, false);

  int groups = group_by_var ? g.num_vars : g.num_clauses;
  std::vector<double> sums(static_cast<size_t>(groups) * h, 0.0);
  for (int e = 0; e < ne; ++e) {
    int n = group_by_var ? g.edges[e].var : g.edges[e].clause;
    for (int j = 0; j < h; ++j) sums[static_cast<size_t>(n) * h + j] += u[static_cast<size_t>(e) * h + j];
  }
  std::vector<double> excl(static_cast<size_t>(ne) * h);
  for (int e = 0; e < ne; ++e) {
    int n = group_by_var ? g.edges[e].var : g.edges[e].clause;
    for (int j = 0; j < h; ++j)
      excl[static_cast<size_t>(e) * h + j] =
          sums[static_cast<size_t>(n) * h + j] - u[static_cast<size_t>(e) * h + j];
  }
  std::vector<double> res;
  mlp_forward(ds.outer, excl, ne, res, ds.final_sigmoid);
  std::copy(res.begin(), res.end(), out.begin());
}

void gru_forward(const GruParams& p, const FactorGraph& g, int h, std::span<const double> prop,
                 std::span<const double> hidden_prev, std::span<double> out) {
  int ne = g.num_edges();
  std::vector<double> x = edge_inputs(g, h, prop);
  std::vector<double> hid(hidden_prev.begin(), hidden_prev.end());

  auto gate = [&](const std::vector<double>& w, const std::vector<double>& u,
                  const std::vector<double>& b, const std::vector<double>& hvec,
                  std::vector<double>& dst) {
    dst.assign(static_cast<size_t>(ne) * h, 0.0);
    matmul_accum(x, ne, p.in, w, h, dst);
    matmul_accum(hvec, ne, h, u, h, dst);
    for (int r = 0; r < ne; ++r)
      for (int j = 0; j < h; ++j) dst[static_cast<size_t>(r) * h + j] += b[j];
  };

  std::vector<double> z, r, cand, rh;
  gate(p.wz, p.uz, p.bz, hid, z);
  for (double& v : z) v = sigmoid_scalar(v);
  gate(p.wr, p.ur, p.br, hid, r);
  for (double& v : r) v = sigmoid_scalar(v);
  rh.resize(hid.size());
  for (size_t i = 0; i < hid.size(); ++i) rh[i] = r[i] * hid[i];
  gate(p.wc, p.uc, p.bc, rh, cand);
  for (double& v : cand) v = std::tanh(v);
  for (size_t i = 0; i < hid.size(); ++i) out[i] = (1.0 - z[i]) * hid[i] + z[i] * cand[i];
}

}  // namespace

void NeuralPdpModel::propagate_var(const FactorGraph& g, std::span<const double> d_c2v,
                                   std::span<double> out) const {
  deepset_exclusive(psi_var, g, h, true, d_c2v, out);
}

void NeuralPdpModel::propagate_clause(const FactorGraph& g, std::span<const double> d_v2c,
                                      std::span<double> out) const {
  deepset_exclusive(psi_clause, g, h, false, d_v2c, out);
}

void NeuralPdpModel::decimate_var(const FactorGraph& g, std::span<const double> p,
                                  std::span<const double> d_prev, std::span<double> out) const {
  gru_forward(phi_var, g, h, p, d_prev, out);
}

void NeuralPdpModel::decimate_clause(const FactorGraph& g, std::span<const double> p,
                                     std::span<const double> d_prev, std::span<double> out) const {
  gru_forward(phi_clause, g, h, p, d_prev, out);
}

void NeuralPdpModel::predict(const FactorGraph& g, std::span<const double> d_c2v,
                             std::span<double> soft) const {
  int ne = g.num_edges();
  std::vector<double> x = edge_inputs(g, h, d_c2v);
  std::vector<double> u;
  mlp_forward(gamma.inner, x, ne, u, false);
  std::vector<double> sums(static_cast<size_t>(g.num_vars) * h, 0.0);
  for (int e = 0; e < ne; ++e) {
    int v = g.edges[e].var;
    for (int j = 0; j < h; ++j)
      sums[static_cast<size_t>(v) * h + j] += u[static_cast<size_t>(e) * h + j];
  }
  std::vector<double> res;
  mlp_forward(gamma.outer, sums, g.num_vars, res, true);
  std::copy(res.begin(), res.end(), soft.begin());
}

std::vector<double> deepset_forward(const DeepSetParams& params,
                                    const std::vector<std::pair<std::vector<double>, double>>& elements) {
  int h = params.inner.in - 1;
  std::vector<double> sum(params.inner.out, 0.0);
  for (const auto& [msg, sign] : elements) {
    if (static_cast<int>(msg.size()) != h)
      throw std::invalid_argument("deepset_forward: element dimension mismatch");
    std::vector<double> x(msg);
    x.push_back(sign);
    std::vector<double> u;
    mlp_forward(params.inner, x, 1, u, false);
    for (int j = 0; j < params.inner.out; ++j) sum[j] += u[j];
  }
  std::vector<double> out;
  mlp_forward(params.outer, sum, 1, out, params.final_sigmoid);
  return out;
}

std::vector<double> gru_forward(const GruParams& params, std::span<const double> input,
                                std::span<const double> hidden) {
  if (static_cast<int>(input.size()) != params.in || static_cast<int>(hidden.size()) != params.h)
    throw std::invalid_argument("gru_forward: dimension mismatch");
  int h = params.h;
  std::vector<double> x(input.begin(), input.end());
  std::vector<double> hid(hidden.begin(), hidden.end());
  auto gate = [&](const std::vector<double>& w, const std::vector<double>& u,
                  const std::vector<double>& b, const std::vector<double>& hvec) {
    std::vector<double> dst(h, 0.0);
    matmul_accum(x, 1, params.in, w, h, dst);
    matmul_accum(hvec, 1, h, u, h, dst);
    for (int j = 0; j < h; ++j) dst[j] += b[j];
    return dst;
  };
  std::vector<double> z = gate(params.wz, params.uz, params.bz, hid);
  for (double& v : z) v = sigmoid_scalar(v);
  std::vector<double> r = gate(params.wr, params.ur, params.br, hid);
  for (double& v : r) v = sigmoid_scalar(v);
  std::vector<double> rh(h);
  for (int j = 0; j < h; ++j) rh[j] = r[j] * hid[j];
  std::vector<double> cand = gate(params.wc, params.uc, params.bc, rh);
  for (double& v : cand) v = std::tanh(v);
  std::vector<double> out(h);
  for (int j = 0; j < h; ++j) out[j] = (1.0 - z[j]) * hid[j] + z[j] * cand[j];
  return out;
}

size_t NeuralPdpModel::num_parameters() const {
  size_t total = 0;
  visit_blocks([&](const std::string&, int, int, const std::vector<double>& d) { total += d.size(); });
  return total;
}

NeuralPdpModel init_model(int h, uint64_t seed, double dropout_rate) {
  if (h < 1) throw std::invalid_argument("init_model: h must be >= 1");
  NeuralPdpModel m;
  m.h = h;
  m.dropout_rate = dropout_rate;
  m.psi_var.inner.resize(h + 1, h, h);
  m.psi_var.outer.resize(h, h, h);
  m.psi_clause.inner.resize(h + 1, h, h);
  m.psi_clause.outer.resize(h, h, h);
  m.gamma.inner.resize(h + 1, h, h);
  m.gamma.outer.resize(h, h, 1);
  m.gamma.final_sigmoid = true;
  m.phi_var.resize(h + 1, h);
  m.phi_clause.resize(h + 1, h);

  std::mt19937_64 rng(seed);
  m.visit_blocks([&](const std::string& name, int rows, int cols, std::vector<double>& data) {
    bool is_bias = name.find(".b") != std::string::npos;
    if (is_bias) {
      std::fill(data.begin(), data.end(), 0.0);
      return;
    }
    double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : data) v = dist(rng);
  });
  return m;
}

// --- checkpoint io ---

namespace {

constexpr char kMagic[8] = {'P', 'D', 'P', 'S', 'A', 'T', 'C', 'K'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void put_section(std::ostream& out, const std::string& name, int rows, int cols,
                 const std::vector<double>& data) {
  put<uint32_t>(out, static_cast<uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put<uint32_t>(out, static_cast<uint32_t>(rows));
  put<uint32_t>(out, static_cast<uint32_t>(cols));
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
}

}  // namespace

void save_checkpoint(const NeuralPdpModel& model, const std::string& path,
                     const CheckpointMeta& meta, const NamedBlocks& extra) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  put<uint32_t>(out, kVersion);
  put<uint32_t>(out, static_cast<uint32_t>(model.h));
  put<double>(out, model.dropout_rate);
  put<uint64_t>(out, meta.train_step);
  put<double>(out, meta.tau);

  uint32_t n_sections = 0;
  model.visit_blocks([&](const std::string&, int, int, const std::vector<double>&) { ++n_sections; });
  n_sections += static_cast<uint32_t>(extra.size());
  put<uint32_t>(out, n_sections);
  model.visit_blocks([&](const std::string& name, int rows, int cols,
                         const std::vector<double>& data) { put_section(out, name, rows, cols, data); });
  for (const auto& [name, data] : extra)
    put_section(out, name, 1, static_cast<int>(data.size()), data);
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

NeuralPdpModel load_checkpoint(const std::string& path, CheckpointMeta* meta,
                               NamedBlocks* extra) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  uint32_t version = get<uint32_t>(in);
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  int h = static_cast<int>(get<uint32_t>(in));
  double dropout = get<double>(in);
  CheckpointMeta m;
  m.train_step = get<uint64_t>(in);
  m.tau = get<double>(in);
  if (meta) *meta = m;

  NeuralPdpModel model = init_model(h, 0, dropout);
  NamedBlocks sections;
  uint32_t n_sections = get<uint32_t>(in);
  std::map<std::string, std::pair<int, int>> shapes;
  for (uint32_t s = 0; s < n_sections; ++s) {
    uint32_t name_len = get<uint32_t>(in);
    if (name_len > 4096) throw std::runtime_error("checkpoint: corrupt section name");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    uint32_t rows = get<uint32_t>(in);
    uint32_t cols = get<uint32_t>(in);
    std::vector<double> data(static_cast<size_t>(rows) * cols);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated section " + name);
    shapes[name] = {static_cast<int>(rows), static_cast<int>(cols)};
    sections[name] = std::move(data);
  }

  model.visit_blocks([&](const std::string& name, int rows, int cols, std::vector<double>& data) {
    auto it = sections.find(name);
    if (it == sections.end()) throw std::runtime_error("checkpoint: missing section " + name);
    auto [r, c] = shapes[name];
    if (r != rows || c != cols)
      throw std::runtime_error("checkpoint: section " + name + " has mismatched dimensions");
    data = it->second;
    sections.erase(it);
  });
  if (extra) *extra = std::move(sections);
  return model;
}

}  // namespace pdp
