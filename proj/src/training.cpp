#include "pdp/training.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <stdexcept>

namespace pdp {

namespace {
constexpr double kPowLo = 1e-12;  // pow base clamp, shared with the tape
constexpr double kPowHi = 1.0;
}  // namespace

double literal_value(double x, double sign) { return sign > 0 ? x : 1.0 - x; }

double smooth_max(std::span<const double> values, double tau) {
  if (values.empty()) throw std::invalid_argument("smooth_max: empty input");
  if (tau <= 0) throw std::invalid_argument("smooth_max: tau must be positive");
  double m = values[0];
  for (double v : values) m = std::max(m, v);
  double num = 0.0, den = 0.0;
  for (double v : values) {
    double w = std::exp((v - m) / tau);  // shifted; the shift cancels exactly
    num += w * v;
    den += w;
  }
  return num / den;
}

double sharpen(double x, double kappa) {
  double sk = std::pow(std::clamp(x, kPowLo, kPowHi), kappa);
  double omk = std::pow(std::clamp(1.0 - x, kPowLo, kPowHi), kappa);
  return sk / (sk + omk);
}

double clause_proxy(std::span<const double> soft, std::span<const double> signs,
                    const LossConfig& cfg) {
  if (soft.size() != signs.size() || soft.empty())
    throw std::invalid_argument("clause_proxy: bad inputs");
  std::vector<double> lits(soft.size());
  for (size_t i = 0; i < soft.size(); ++i)
    lits[i] = soft[i] * signs[i] + (1.0 - signs[i]) * 0.5;
  return sharpen(smooth_max(lits, cfg.tau), cfg.kappa);
}

namespace {

// Per-clause -log(max(proxy, floor)); matches the tape computation term for
// term so trained losses and evaluated energies agree.
double clause_neg_log_proxy(const FactorGraph& g, int a, std::span<const double> soft,
                            const LossConfig& cfg) {
  int lo = g.clause_offsets[a], hi = g.clause_offsets[a + 1];
  if (lo == hi) return 0.0;
  double m = -1.0;
  std::vector<double> lits(hi - lo);
  for (int s = lo; s < hi; ++s) {
    int e = g.clause_edges[s];
    double sign = g.edges[e].sign;
    double x = soft[g.edges[e].var];
    double lit = x * sign + (1.0 - sign) * 0.5;
    lits[s - lo] = lit;
    m = std::max(m, lit);
  }
  double num = 0.0, den = 0.0;
  for (double lit : lits) {
    double w = std::exp((lit - m) / cfg.tau);
    num += w * lit;
    den += w;
  }
  double smax = num / den;
  double sk = std::pow(std::clamp(smax, kPowLo, kPowHi), cfg.kappa);
  double omk = std::pow(std::clamp(1.0 - smax, kPowLo, kPowHi), cfg.kappa);
  double proxy = sk / (sk + omk);
  return -std::log(std::max(proxy, cfg.epsilon_floor));
}

}  // namespace

double energy(std::span<const double> soft, const FactorGraph& g, const LossConfig& cfg) {
  if (static_cast<int>(soft.size()) != g.num_vars)
    throw std::invalid_argument("energy: assignment does not cover all variables");
  double acc = 0.0;
  for (int a = 0; a < g.num_clauses; ++a) acc += clause_neg_log_proxy(g, a, soft, cfg);
  return cfg.log_partition_offset + acc;
}

std::vector<double> energy_per_instance(std::span<const double> soft, const FactorGraph& g,
                                        const LossConfig& cfg) {
  std::vector<double> out(g.num_instances(), cfg.log_partition_offset);
  for (int j = 0; j < g.num_instances(); ++j)
    for (int a = g.bounds[j].clause0; a < g.bounds[j + 1].clause0; ++a)
      out[j] += clause_neg_log_proxy(g, a, soft, cfg);
  return out;
}

double discounted_loss(const std::vector<std::vector<double>>& trajectory, const FactorGraph& g,
                       const LossConfig& cfg) {
  if (trajectory.empty()) throw std::invalid_argument("discounted_loss: empty trajectory");
  int t_max = static_cast<int>(trajectory.size());
  double loss = 0.0;
  for (int t = 1; t <= t_max; ++t)
    loss += std::pow(cfg.lambda, t_max - t) * energy(trajectory[t - 1], g, cfg);
  return loss;
}

// --- annealing ---

double TemperatureSchedule::tau() const { return tau_at(step); }

double TemperatureSchedule::tau_at(long s) const {
  return std::max(tau_end, tau_start * std::pow(rate, static_cast<double>(s)));
}

TemperatureSchedule TemperatureSchedule::over_steps(double tau_start, double tau_end,
                                                    long total_steps, double fraction) {
  if (tau_start < tau_end || tau_end <= 0)
    throw std::invalid_argument("schedule: need tau_start >= tau_end > 0");
  TemperatureSchedule s;
  s.tau_start = tau_start;
  s.tau_end = tau_end;
  double span = std::max(1.0, fraction * static_cast<double>(total_steps));
  s.rate = std::pow(tau_end / tau_start, 1.0 / span);
  return s;
}

// --- tape unroll ---

namespace {

struct TapeParams {
  std::vector<int> ids;  // node id per block, visit order
};

struct TapeCtx {
  grad::Tape* tape;
  const FactorGraph* g;
  int h = 0;
  int sign_col = -1;
  int lit_off = -1;
  std::shared_ptr<const std::vector<int>> edge_var, edge_clause;
  std::map<std::string, int> param_id;
  bool dropout = false;
  double dropout_rate = 0.0;
  std::mt19937_64 mask_rng;

  int mask(int rows, int cols) {
    std::vector<double> m(static_cast<size_t>(rows) * cols);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double keep = 1.0 - dropout_rate;
    for (double& v : m) v = unit(mask_rng) < keep ? 1.0 / keep : 0.0;
    return tape->input(rows, cols, m);
  }

  int mlp(const std::string& prefix, int x, bool final_sigmoid) {
    grad::Tape& t = *tape;
    int a1 = t.linear_act(x, param_id.at(prefix + ".w1"), param_id.at(prefix + ".b1"),
                          grad::Tape::Act::LogSigmoid);
    if (dropout) a1 = t.mul(a1, mask(t.rows(a1), t.cols(a1)));
    return t.linear_act(a1, param_id.at(prefix + ".w2"), param_id.at(prefix + ".b2"),
                        final_sigmoid ? grad::Tape::Act::Sigmoid : grad::Tape::Act::None);
  }

  int deepset_exclusive(const std::string& prefix, int msgs, bool group_by_var) {
    grad::Tape& t = *tape;
    const auto& ids = group_by_var ? edge_var : edge_clause;
    int groups = group_by_var ? g->num_vars : g->num_clauses;
    int x = t.concat_cols(msgs, sign_col);
    int u = mlp(prefix + ".inner", x, false);
    int sums = t.seg_sum(u, ids, groups);
    int excl = t.sub(t.gather(sums, ids), u);
    return mlp(prefix + ".outer", excl, false);
  }

  int gru(const std::string& prefix, int p, int hprev) {
    grad::Tape& t = *tape;
    int x = t.concat_cols(p, sign_col);
    auto gate = [&](const char* w, const char* u, const char* b, int hvec, grad::Tape::Act act) {
      return t.gru_gate(x, param_id.at(prefix + w), hvec, param_id.at(prefix + u),
                        param_id.at(prefix + b), act);
    };
    int z = gate(".wz", ".uz", ".bz", hprev, grad::Tape::Act::Sigmoid);
    int r = gate(".wr", ".ur", ".br", hprev, grad::Tape::Act::Sigmoid);
    int rh = t.mul(r, hprev);
    int cand = gate(".wc", ".uc", ".bc", rh, grad::Tape::Act::Tanh);
    return t.add(t.mul(t.affine(z, -1.0, 1.0), hprev), t.mul(z, cand));
  }

  int predictor(int d_c2v) {
    grad::Tape& t = *tape;
    int x = t.concat_cols(d_c2v, sign_col);
    int u = mlp("gamma.inner", x, false);
    int sums = t.seg_sum(u, edge_var, g->num_vars);
    return mlp("gamma.outer", sums, true);
  }
};

}  // namespace

int build_loss_on_tape(grad::Tape& tape, NeuralPdpModel& model, const FactorGraph& g,
                       const UnrollConfig& cfg, std::vector<int>* prediction_nodes,
                       std::vector<int>* param_nodes) {
  if (cfg.t_max < 1) throw std::invalid_argument("build_loss_on_tape: t_max must be >= 1");
  TapeCtx ctx;
  ctx.tape = &tape;
  ctx.g = &g;
  ctx.h = model.h;
  ctx.dropout = cfg.dropout && model.dropout_rate > 0;
  ctx.dropout_rate = model.dropout_rate;
  ctx.mask_rng.seed(cfg.dropout_seed);

  model.visit_blocks([&](const std::string& name, int rows, int cols, std::vector<double>& data) {
    int id = tape.param(rows, cols, data);
    ctx.param_id[name] = id;
    if (param_nodes) param_nodes->push_back(id);
  });

  int ne = g.num_edges();
  auto evar = std::make_shared<std::vector<int>>(ne);
  auto eclause = std::make_shared<std::vector<int>>(ne);
  std::vector<double> signs(ne), lit_off(ne);
  for (int e = 0; e < ne; ++e) {
    (*evar)[e] = g.edges[e].var;
    (*eclause)[e] = g.edges[e].clause;
    signs[e] = g.edges[e].sign;
    lit_off[e] = (1.0 - g.edges[e].sign) * 0.5;
  }
  ctx.edge_var = evar;
  ctx.edge_clause = eclause;
  ctx.sign_col = tape.input(ne, 1, signs);
  ctx.lit_off = tape.input(ne, 1, lit_off);

  MessageState init = init_messages(g, model.h, cfg.message_seed, cfg.init);
  int d_v2c = tape.input(ne, model.h, init.d_var_to_clause);
  int d_c2v = tape.input(ne, model.h, init.d_clause_to_var);

  const LossConfig& lc = cfg.loss;
  int loss = -1;
  for (int t = 1; t <= cfg.t_max; ++t) {
    int p_v2c = ctx.deepset_exclusive("psi_var", d_c2v, true);
    int p_c2v = ctx.deepset_exclusive("psi_clause", d_v2c, false);
    int nd_v2c = ctx.gru("phi_var", p_v2c, d_v2c);
    int nd_c2v = ctx.gru("phi_clause", p_c2v, d_c2v);
    d_v2c = nd_v2c;
    d_c2v = nd_c2v;
    int x = ctx.predictor(d_c2v);
    if (prediction_nodes) prediction_nodes->push_back(x);

    int xg = tape.gather(x, evar);
    int lit = tape.add(tape.mul(xg, ctx.sign_col), ctx.lit_off);

    // per-clause max as a constant shift; the softmax ratio is exactly
    // invariant to it, so treating it as constant leaves gradients intact
    std::vector<double> clause_max(g.num_clauses, 0.0);
    {
      auto lv = tape.value(lit);
      std::vector<uint8_t> seen(g.num_clauses, 0);
      for (int e = 0; e < ne; ++e) {
        int a = (*eclause)[e];
        if (!seen[a] || lv[e] > clause_max[a]) {
          clause_max[a] = lv[e];
          seen[a] = 1;
        }
      }
    }
    std::vector<double> shift(ne);
    for (int e = 0; e < ne; ++e) shift[e] = clause_max[(*eclause)[e]];
    int m_g = tape.input(ne, 1, shift);

    int w = tape.exp_(tape.affine(tape.sub(lit, m_g), 1.0 / lc.tau, 0.0));
    int num = tape.seg_sum(tape.mul(w, lit), eclause, g.num_clauses);
    int den = tape.seg_sum(w, eclause, g.num_clauses);
    int smax = tape.div(num, den);
    int sk = tape.pow_clamp(smax, lc.kappa, kPowLo, kPowHi);
    int omk = tape.pow_clamp(tape.affine(smax, -1.0, 1.0), lc.kappa, kPowLo, kPowHi);
    int gk = tape.div(sk, tape.add(sk, omk));
    int le = tape.log_clamp(gk, lc.epsilon_floor);
    int e_t = tape.affine(tape.sum_all(le), -1.0, lc.log_partition_offset);
    int weighted = tape.affine(e_t, std::pow(lc.lambda, cfg.t_max - t), 0.0);
    loss = loss < 0 ? weighted : tape.add(loss, weighted);
  }
  return loss;
}

// --- optimizer ---

OptimizerState init_optimizer(const NeuralPdpModel& model) {
  OptimizerState opt;
  opt.m.assign(model.num_parameters(), 0.0);
  opt.v.assign(model.num_parameters(), 0.0);
  return opt;
}

double clip_gradients(std::vector<double>& grads, double max_norm) {
  double norm_sq = 0.0;
  for (double gv : grads) norm_sq += gv * gv;
  double norm = std::sqrt(norm_sq);
  if (norm > max_norm && norm > 0) {
    double scale = max_norm / norm;
    for (double& gv : grads) gv *= scale;
  }
  return norm;
}

TrainReport train_step(NeuralPdpModel& model, const FactorGraph& batch, OptimizerState& opt,
                       const UnrollConfig& cfg) {
  auto t0 = std::chrono::steady_clock::now();
  TrainReport rep;
  rep.tau = cfg.loss.tau;

  grad::Tape tape;
  std::vector<int> preds, params;
  int loss = build_loss_on_tape(tape, model, batch, cfg, &preds, &params);
  rep.loss = tape.value(loss)[0];

  std::vector<uint8_t> solved(batch.num_instances(), 0);
  for (int id : preds) {
    auto soft = tape.value(id);
    std::vector<double> sv(soft.begin(), soft.end());
    auto flags = graph_sat_flags(batch, hard_threshold(sv));
    for (size_t j = 0; j < flags.size(); ++j) solved[j] |= flags[j];
  }
  double nsolved = 0;
  for (uint8_t s : solved) nsolved += s;
  rep.solved_frac = solved.empty() ? 0.0 : nsolved / static_cast<double>(solved.size());

  if (!std::isfinite(rep.loss)) {
    rep.rejected = true;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  }

  tape.backward(loss);
  std::vector<double> grads;
  grads.reserve(model.num_parameters());
  bool finite = true;
  for (int id : params) {
    auto gspan = tape.gradient(id);
    for (double gv : gspan) {
      grads.push_back(gv);
      if (!std::isfinite(gv)) finite = false;
    }
  }
  if (!finite) {
    rep.rejected = true;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
  }

  clip_gradients(grads, opt.clip_norm);

  ++opt.step;
  double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  size_t off = 0;
  model.visit_blocks([&](const std::string&, int, int, std::vector<double>& data) {
    for (double& p : data) {
      double gv = grads[off] + opt.weight_decay * p;
      opt.m[off] = opt.beta1 * opt.m[off] + (1.0 - opt.beta1) * gv;
      opt.v[off] = opt.beta2 * opt.v[off] + (1.0 - opt.beta2) * gv * gv;
      p -= opt.lr * (opt.m[off] / bc1) / (std::sqrt(opt.v[off] / bc2) + opt.eps);
      ++off;
    }
  });

  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

grad::FdReport finite_diff_check(NeuralPdpModel& model, const FactorGraph& g,
                                 const UnrollConfig& cfg, double step) {
  std::vector<double> flat;
  model.visit_blocks([&](const std::string&, int, int, std::vector<double>& data) {
    flat.insert(flat.end(), data.begin(), data.end());
  });
  std::vector<double> original = flat;

  auto write_params = [&](std::span<const double> p) {
    size_t off = 0;
    model.visit_blocks([&](const std::string&, int, int, std::vector<double>& data) {
      std::copy(p.begin() + off, p.begin() + off + data.size(), data.begin());
      off += data.size();
    });
  };

  grad::Tape tape;
  std::vector<int> params;
  int loss = build_loss_on_tape(tape, model, g, cfg, nullptr, &params);
  tape.backward(loss);
  std::vector<double> analytic;
  analytic.reserve(flat.size());
  for (int id : params) {
    auto gspan = tape.gradient(id);
    analytic.insert(analytic.end(), gspan.begin(), gspan.end());
  }

  auto loss_fn = [&](std::span<const double> p) {
    write_params(p);
    grad::Tape t;
    int l = build_loss_on_tape(t, model, g, cfg);
    return t.value(l)[0];
  };
  grad::FdReport rep = grad::finite_difference_check(loss_fn, flat, analytic, step);
  write_params(original);
  return rep;
}

// --- streaming trainer ---

std::vector<TrainReport> train_stream(NeuralPdpModel& model, const FormulaStream& stream,
                                      OptimizerState& opt, const TrainStreamConfig& cfg,
                                      const std::function<void(const TrainReport&)>& on_report) {
  namespace fs = std::filesystem;
  if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);
  model.dropout_rate = cfg.dropout;

  TemperatureSchedule sched = cfg.schedule;
  double ema = cfg.start_ema;
  std::vector<TrainReport> reports;

  auto save = [&](long done, const std::string& name) {
    CheckpointMeta meta;
    meta.train_step = static_cast<uint64_t>(done);
    meta.tau = sched.tau();
    NamedBlocks extra;
    extra["opt.m"] = opt.m;
    extra["opt.v"] = opt.v;
    extra["opt.scalars"] = {static_cast<double>(opt.step), opt.lr, opt.clip_norm,
                            opt.weight_decay};
    extra["train.state"] = {static_cast<double>(done), ema, static_cast<double>(sched.step)};
    save_checkpoint(model, (fs::path(cfg.out_dir) / name).string(), meta, extra);
  };

  for (long s = cfg.start_step; s < cfg.steps; ++s) {
    std::vector<FactorGraph> graphs;
    graphs.reserve(cfg.batch_size);
    for (int b = 0; b < cfg.batch_size; ++b)
      graphs.push_back(build_factor_graph(stream.at(static_cast<uint64_t>(s) * cfg.batch_size + b)));
    FactorGraph batch = concat_batch(graphs);

    UnrollConfig uc;
    uc.t_max = cfg.t_max;
    uc.loss = {sched.tau(), cfg.kappa, cfg.lambda, cfg.epsilon_floor, 0.0};
    uc.init = cfg.init;
    uc.message_seed = mix_seed(cfg.seed ^ 0x6d657373ULL, static_cast<uint64_t>(s));
    uc.dropout = cfg.dropout > 0;
    uc.dropout_seed = mix_seed(cfg.seed ^ 0x64726f70ULL, static_cast<uint64_t>(s));

    TrainReport rep = train_step(model, batch, opt, uc);
    rep.step = s + 1;
    if (!rep.rejected) {
      ema = ema < 0 ? rep.loss : cfg.ema_beta * ema + (1.0 - cfg.ema_beta) * rep.loss;
      sched.advance();
    }
    rep.ema = ema;
    reports.push_back(rep);
    if (on_report) on_report(rep);

    if (!cfg.out_dir.empty() &&
        (rep.step % cfg.checkpoint_every == 0 || rep.step == cfg.steps)) {
      save(rep.step, "ckpt_latest.bin");
      save(rep.step, "ckpt_" + std::to_string(rep.step) + ".bin");
    }
  }
  return reports;
}

TrainingCheckpoint load_training_checkpoint(const std::string& path) {
  TrainingCheckpoint tc;
  CheckpointMeta meta;
  NamedBlocks extra;
  tc.model = load_checkpoint(path, &meta, &extra);
  tc.opt = init_optimizer(tc.model);
  auto need = [&](const std::string& name) -> std::vector<double>& {
    auto it = extra.find(name);
    if (it == extra.end())
      throw std::runtime_error("checkpoint: missing training section " + name);
    return it->second;
  };
  tc.opt.m = need("opt.m");
  tc.opt.v = need("opt.v");
  if (tc.opt.m.size() != tc.model.num_parameters() ||
      tc.opt.v.size() != tc.model.num_parameters())
    throw std::runtime_error("checkpoint: optimizer moments have wrong size");
  auto& scalars = need("opt.scalars");
  tc.opt.step = static_cast<long>(scalars.at(0));
  tc.opt.lr = scalars.at(1);
  tc.opt.clip_norm = scalars.at(2);
  tc.opt.weight_decay = scalars.at(3);
  auto& state = need("train.state");
  tc.step = static_cast<long>(state.at(0));
  tc.ema = state.at(1);
  tc.sched_step = static_cast<long>(state.at(2));
  return tc;
}

}  // namespace pdp
