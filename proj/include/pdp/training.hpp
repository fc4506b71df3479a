#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pdp/engine.hpp"
#include "pdp/formula.hpp"
#include "pdp/generators.hpp"
#include "pdp/grad.hpp"
#include "pdp/neural.hpp"

namespace pdp {

struct LossConfig {
  double tau = 1.0;                  // smooth-max temperature, > 0
  double kappa = 10.0;               // sharpening exponent, > 1
  double lambda = 0.95;              // trajectory discount, in (0,1]
  double epsilon_floor = 1e-20;      // floor inside -log
  double log_partition_offset = 0.0; // constant stand-in for log Z
};

// --- differentiable energy pieces (scalar reference forms) ---

double literal_value(double x, double sign);
double smooth_max(std::span<const double> values, double tau);
double sharpen(double x, double kappa);
double clause_proxy(std::span<const double> soft, std::span<const double> signs,
                    const LossConfig& cfg);
double energy(std::span<const double> soft, const FactorGraph& g, const LossConfig& cfg);
std::vector<double> energy_per_instance(std::span<const double> soft, const FactorGraph& g,
                                        const LossConfig& cfg);
double discounted_loss(const std::vector<std::vector<double>>& trajectory, const FactorGraph& g,
                       const LossConfig& cfg);

// --- annealing ---

struct TemperatureSchedule {
  double tau_start = 2.0;
  double tau_end = 0.05;
  double rate = 0.999;
  long step = 0;

  double tau() const;
  void advance() { ++step; }
  double tau_at(long s) const;

  // rate chosen so tau reaches tau_end at `fraction` of the planned steps
  static TemperatureSchedule over_steps(double tau_start, double tau_end, long total_steps,
                                        double fraction = 0.8);
};

// --- optimization ---

struct OptimizerState {
  double lr = 1e-4;
  double clip_norm = 0.65;
  double weight_decay = 1e-10;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long step = 0;
  std::vector<double> m, v;  // flat moments in visit_blocks order
};

OptimizerState init_optimizer(const NeuralPdpModel& model);

// Scales grads to max_norm when their global L2 norm exceeds it; returns the
// pre-clip norm.
double clip_gradients(std::vector<double>& grads, double max_norm);

struct TrainReport {
  long step = 0;
  double loss = 0.0;
  double ema = 0.0;
  double tau = 0.0;
  double solved_frac = 0.0;
  double seconds = 0.0;
  bool rejected = false;  // non-finite loss; no update applied
};

struct UnrollConfig {
  int t_max = 30;
  LossConfig loss;
  InitScheme init;
  uint64_t message_seed = 1;
  bool dropout = false;
  uint64_t dropout_seed = 1;
};

// Records the neural forward pass of Algorithm-style unrolling plus the
// discounted energy loss on the tape. Returns the loss node; per-iteration
// prediction nodes go to *predictions when requested.
int build_loss_on_tape(grad::Tape& tape, NeuralPdpModel& model, const FactorGraph& g,
                       const UnrollConfig& cfg, std::vector<int>* prediction_nodes = nullptr,
                       std::vector<int>* param_nodes = nullptr);

TrainReport train_step(NeuralPdpModel& model, const FactorGraph& batch, OptimizerState& opt,
                       const UnrollConfig& cfg);

// Central finite differences of the unrolled loss against the tape gradient.
grad::FdReport finite_diff_check(NeuralPdpModel& model, const FactorGraph& g,
                                 const UnrollConfig& cfg, double step = 1e-4);

struct TrainStreamConfig {
  long steps = 5000;
  int batch_size = 4;
  int t_max = 30;
  double kappa = 10.0;
  double lambda = 0.95;
  double epsilon_floor = 1e-20;
  TemperatureSchedule schedule;
  double dropout = 0.2;
  uint64_t seed = 1;
  long checkpoint_every = 1000;
  double ema_beta = 0.99;
  std::string out_dir;  // empty = keep everything in memory
  long start_step = 0;  // resume position
  double start_ema = -1.0;
  InitScheme init;
};

std::vector<TrainReport> train_stream(NeuralPdpModel& model, const FormulaStream& stream,
                                      OptimizerState& opt, const TrainStreamConfig& cfg,
                                      const std::function<void(const TrainReport&)>& on_report = {});

// Full trainer state as written by train_stream's periodic checkpoints.
struct TrainingCheckpoint {
  NeuralPdpModel model;
  OptimizerState opt;
  long step = 0;        // steps completed
  long sched_step = 0;  // annealing position (rejected steps do not advance)
  double ema = -1.0;
};

TrainingCheckpoint load_training_checkpoint(const std::string& path);

}  // namespace pdp
