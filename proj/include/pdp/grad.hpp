#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace pdp::grad {

// Append-only reverse-mode tape over matrix-valued nodes (row-major).
// Values are computed eagerly as nodes are appended; backward() walks the
// tape once in reverse and accumulates gradients into parameter nodes.
class Tape {
 public:
  enum class Op : uint8_t {
    Input, Param,
    MatMul,      // (r x k) * (k x c)
    Add, Sub, Mul, Div,
    AddRow,      // (r x c) + broadcast (1 x c)
    Affine,      // alpha * a + beta
    Sigmoid, LogSigmoid, Tanh, Exp,
    LogClamp,    // log(max(x, alpha)); zero gradient where clamped
    PowClamp,    // clamp(x, alpha, beta)^exponent; zero gradient where clamped
    ClampMin,    // max(x, alpha); gradient passes only where x > alpha
    SegSum,      // rows scattered into ids[row] of an (alpha x c) output
    Gather,      // out.row(i) = a.row(ids[i])
    ConcatCols,
    SumAll,      // 1 x 1 total
    LinearAct,   // act(x @ w + b); fused network layer
    GruGate,     // act(x @ w + h @ u + b)
  };

  enum class Act : uint8_t { None, Sigmoid, LogSigmoid, Tanh };

  int input(int rows, int cols, std::span<const double> data);
  int constant(int rows, int cols, std::span<const double> data) { return input(rows, cols, data); }
  int param(int rows, int cols, std::span<const double> data);

  int matmul(int a, int b);
  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);
  int div(int a, int b);
  int add_row(int a, int row);
  int affine(int a, double alpha, double beta);
  int sigmoid(int a);
  int logsigmoid(int a);
  int tanh_(int a);
  int exp_(int a);
  int log_clamp(int a, double lo);
  int pow_clamp(int a, double exponent, double lo, double hi);
  int clamp_min(int a, double lo);
  int seg_sum(int a, std::shared_ptr<const std::vector<int>> ids, int num_segments);
  int gather(int a, std::shared_ptr<const std::vector<int>> ids);
  int concat_cols(int a, int b);
  int sum_all(int a);
  int linear_act(int x, int w, int bias, Act act);
  int gru_gate(int x, int w, int h, int u, int bias, Act act);

  void backward(int loss);

  int rows(int id) const { return nodes_[id].rows; }
  int cols(int id) const { return nodes_[id].cols; }
  std::span<const double> value(int id) const { return nodes_[id].val; }
  std::span<const double> gradient(int id) const { return nodes_[id].grad; }
  const std::vector<int>& params() const { return params_; }
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Op op;
    int a = -1, b = -1, c = -1, d = -1, e = -1;
    int rows = 0, cols = 0;
    double alpha = 0.0, beta = 0.0, exponent = 0.0;
    Act act = Act::None;
    std::shared_ptr<const std::vector<int>> ids;
    std::vector<double> val;
    std::vector<double> grad;
  };

  int push(Node n);
  std::vector<double>& grad_buf(int id);

  std::vector<Node> nodes_;
  std::vector<int> params_;
};

// y = x @ w + bias accumulated into out (row-major, out must be zeroed or
// preloaded); shared by the tape and the plain inference path so both
// compute identical sums.
void matmul_accum(std::span<const double> a, int ar, int ac, std::span<const double> b, int bc,
                  std::span<double> out);

double sigmoid_scalar(double x);
double logsigmoid_scalar(double x);

struct FdReport {
  double rel_tol = 0.0, abs_tol = 0.0;  // tolerances the counts were taken at
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  int worst_index = -1;
  int checked = 0;
  int within_rel_tol = 0;
  int rest_within_abs_tol = 0;

  // true when >= frac of coordinates met rel_tol and every remaining one met
  // abs_tol
  bool pass(double frac) const;
};

// Central finite differences of `loss` against an analytic gradient.
FdReport finite_difference_check(const std::function<double(std::span<const double>)>& loss,
                                 std::span<double> params, std::span<const double> analytic,
                                 double step, double rel_tol = 1e-3, double abs_tol = 1e-6);

}  // namespace pdp::grad
