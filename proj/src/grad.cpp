#include "pdp/grad.hpp"

#include <cmath>
#include <stdexcept>

namespace pdp::grad {

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

double logsigmoid_scalar(double x) {
  return x < 0 ? x - std::log1p(std::exp(x)) : -std::log1p(std::exp(-x));
}

void matmul_accum(std::span<const double> a, int ar, int ac, std::span<const double> b, int bc,
                  std::span<double> out) {
  const double* __restrict__ bp = b.data();
  for (int i = 0; i < ar; ++i) {
    const double* __restrict__ arow = a.data() + static_cast<size_t>(i) * ac;
    double* __restrict__ orow = out.data() + static_cast<size_t>(i) * bc;
    for (int k = 0; k < ac; ++k) {
      double av = arow[k];
      const double* __restrict__ brow = bp + static_cast<size_t>(k) * bc;
      for (int j = 0; j < bc; ++j) orow[j] += av * brow[j];
    }
  }
}

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

std::vector<double>& Tape::grad_buf(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(n.val.size(), 0.0);
  return n.grad;
}

int Tape::input(int rows, int cols, std::span<const double> data) {
  if (static_cast<size_t>(rows) * cols != data.size())
    throw std::invalid_argument("tape input: shape/data mismatch");
  Node n;
  n.op = Op::Input;
  n.rows = rows;
  n.cols = cols;
  n.val.assign(data.begin(), data.end());
  return push(std::move(n));
}

int Tape::param(int rows, int cols, std::span<const double> data) {
  int id = input(rows, cols, data);
  nodes_[id].op = Op::Param;
  params_.push_back(id);
  return id;
}

int Tape::matmul(int a, int b) {
  const Node& na = nodes_[a];
  const Node& nb = nodes_[b];
  if (na.cols != nb.rows) throw std::invalid_argument("matmul: inner dimension mismatch");
  Node n;
  n.op = Op::MatMul;
  n.a = a;
  n.b = b;
  n.rows = na.rows;
  n.cols = nb.cols;
  n.val.assign(static_cast<size_t>(n.rows) * n.cols, 0.0);
  matmul_accum(na.val, na.rows, na.cols, nb.val, nb.cols, n.val);
  return push(std::move(n));
}

namespace {
void require_same_shape(int ar, int ac, int br, int bc, const char* what) {
  if (ar != br || ac != bc) throw std::invalid_argument(std::string(what) + ": shape mismatch");
}
}  // namespace

int Tape::add(int a, int b) {
  const Node& na = nodes_[a];
  const Node& nb = nodes_[b];
  require_same_shape(na.rows, na.cols, nb.rows, nb.cols, "add");
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (size_t i = 0; i < n.val.size(); ++i) n.val[i] = na.val[i] + nb.val[i];
  return push(std::move(n));
}

int Tape::sub(int a, int b) {
  const Node& na = nodes_[a];
  const Node& nb = nodes_[b];
  require_same_shape(na.rows, na.cols, nb.rows, nb.cols, "sub");
  Node n;
  n.op = Op::Sub;
  n.a = a;
  n.b = b;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (size_t i = 0; i < n.val.size(); ++i) n.val[i] = na.val[i] - nb.val[i];
  return push(std::move(n));
}

int Tape::mul(int a, int b) {
  const Node& na = nodes_[a];
  const Node& nb = nodes_[b];
  require_same_shape(na.rows, na.cols, nb.rows, nb.cols, "mul");
  Node n;
  n.op = Op::Mul;
  n.a = a;
  n.b = b;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (size_t i = 0; i < n.val.size(); ++i) n.val[i] = na.val[i] * nb.val[i];
  return push(std::move(n));
}

int Tape::div(int a, int b) {
  const Node& na = nodes_[a];
  const Node& nb = nodes_[b];
  require_same_shape(na.rows, na.cols, nb.rows, nb.cols, "div");
  Node n;
  n.op = Op::Div;
  n.a = a;
  n.b = b;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (size_t i = 0; i < n.val.size(); ++i) n.val[i] = na.val[i] / nb.val[i];
  return push(std::move(n));
}

int Tape::add_row(int a, int row) {
  const Node& na = nodes_[a];
  const Node& nr = nodes_[row];
  if (nr.rows != 1 || nr.cols != na.cols) throw std::invalid_argument("add_row: bias shape");
  Node n;
  n.op = Op::AddRow;
  n.a = a;
  n.b = row;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (int i = 0; i < na.rows; ++i)
    for (int j = 0; j < na.cols; ++j)
      n.val[static_cast<size_t>(i) * na.cols + j] =
          na.val[static_cast<size_t>(i) * na.cols + j] + nr.val[j];
  return push(std::move(n));
}

int Tape::affine(int a, double alpha, double beta) {
  const Node& na = nodes_[a];
  Node n;
  n.op = Op::Affine;
  n.a = a;
  n.rows = na.rows;
  n.cols = na.cols;
  n.alpha = alpha;
  n.beta = beta;
  n.val.resize(na.val.size());
  for (size_t i = 0; i < n.val.size(); ++i) n.val[i] = alpha * na.val[i] + beta;
  return push(std::move(n));
}

int Tape::sigmoid(int a) {
  const Node& na = nodes_[a];
  Node n;
  n.op = Op::Sigmoid;
  n.a = a;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (size_t i = 0; i < n.val.size(); ++i) n.val[i] = sigmoid_scalar(na.val[i]);
  return push(std::move(n));
}

int Tape::logsigmoid(int a) {
  const Node& na = nodes_[a];
  Node n;
  n.op = Op::LogSigmoid;
  n.a = a;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (size_t i = 0; i < n.val.size(); ++i) n.val[i] = logsigmoid_scalar(na.val[i]);
  return push(std::move(n));
}

int Tape::tanh_(int a) {
  const Node& na = nodes_[a];
  Node n;
  n.op = Op::Tanh;
  n.a = a;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (size_t i = 0; i < n.val.size(); ++i) n.val[i] = std::tanh(na.val[i]);
  return push(std::move(n));
}

int Tape::exp_(int a) {
  const Node& na = nodes_[a];
  Node n;
  n.op = Op::Exp;
  n.a = a;
  n.rows = na.rows;
  n.cols = na.cols;
  n.val.resize(na.val.size());
  for (size_t i = 0; i < n.val.size(); ++i) n.val[i] = std::exp(na.val[i]);
  return push(std::move(n));
}

int Tape::log_clamp(int a, double lo) {
  if (lo <= 0) throw std::invalid_argument("log_clamp: floor must be positive");
  const Node& na = nodes_[a];
  Node n;
  n.op = Op::LogClamp;
  n.a = a;
  n.rows = na.rows;
  n.cols = na.cols;
  n.alpha = lo;
  n.val.resize(na.val.size());
  for (size_t i = 0; i < n.val.size(); ++i) n.val[i] = std::log(std::max(na.val[i], lo));
  return push(std::move(n));
}

int Tape::pow_clamp(int a, double exponent, double lo, double hi) {
  const Node& na = nodes_[a];
  Node n;
  n.op = Op::PowClamp;
  n.a = a;
  n.rows = na.rows;
  n.cols = na.cols;
  n.alpha = lo;
  n.beta = hi;
  n.exponent = exponent;
  n.val.resize(na.val.size());
  for (size_t i = 0; i < n.val.size(); ++i)
    n.val[i] = std::pow(std::clamp(na.val[i], lo, hi), exponent);
  return push(std::move(n));
}

int Tape::clamp_min(int a, double lo) {
  const Node& na = nodes_[a];
  Node n;
  n.op = Op::ClampMin;
  n.a = a;
  n.rows = na.rows;
  n.cols = na.cols;
  n.alpha = lo;
  n.val.resize(na.val.size());
  for (size_t i = 0; i < n.val.size(); ++i) n.val[i] = std::max(na.val[i], lo);
  return push(std::move(n));
}

int Tape::seg_sum(int a, std::shared_ptr<const std::vector<int>> ids, int num_segments) {
  const Node& na = nodes_[a];
  if (static_cast<int>(ids->size()) != na.rows)
    throw std::invalid_argument("seg_sum: ids size must equal input rows");
  Node n;
  n.op = Op::SegSum;
  n.a = a;
  n.rows = num_segments;
  n.cols = na.cols;
  n.alpha = num_segments;
  n.ids = std::move(ids);
  n.val.assign(static_cast<size_t>(num_segments) * na.cols, 0.0);
  for (int r = 0; r < na.rows; ++r) {
    int s = (*n.ids)[r];
    if (s < 0 || s >= num_segments) throw std::invalid_argument("seg_sum: segment id range");
    for (int j = 0; j < na.cols; ++j)
      n.val[static_cast<size_t>(s) * na.cols + j] += na.val[static_cast<size_t>(r) * na.cols + j];
  }
  return push(std::move(n));
}

int Tape::gather(int a, std::shared_ptr<const std::vector<int>> ids) {
  const Node& na = nodes_[a];
  Node n;
  n.op = Op::Gather;
  n.a = a;
  n.rows = static_cast<int>(ids->size());
  n.cols = na.cols;
  n.ids = std::move(ids);
  n.val.resize(static_cast<size_t>(n.rows) * n.cols);
  for (int r = 0; r < n.rows; ++r) {
    int s = (*n.ids)[r];
    if (s < 0 || s >= na.rows) throw std::invalid_argument("gather: row id range");
    for (int j = 0; j < n.cols; ++j)
      n.val[static_cast<size_t>(r) * n.cols + j] = na.val[static_cast<size_t>(s) * n.cols + j];
  }
  return push(std::move(n));
}

int Tape::concat_cols(int a, int b) {
  const Node& na = nodes_[a];
  const Node& nb = nodes_[b];
  if (na.rows != nb.rows) throw std::invalid_argument("concat_cols: row mismatch");
  Node n;
  n.op = Op::ConcatCols;
  n.a = a;
  n.b = b;
  n.rows = na.rows;
  n.cols = na.cols + nb.cols;
  n.val.resize(static_cast<size_t>(n.rows) * n.cols);
  for (int r = 0; r < n.rows; ++r) {
    double* dst = n.val.data() + static_cast<size_t>(r) * n.cols;
    const double* pa = na.val.data() + static_cast<size_t>(r) * na.cols;
    const double* pb = nb.val.data() + static_cast<size_t>(r) * nb.cols;
    std::copy(pa, pa + na.cols, dst);
    std::copy(pb, pb + nb.cols, dst + na.cols);
  }
  return push(std::move(n));
}

int Tape::sum_all(int a) {
  const Node& na = nodes_[a];
  Node n;
  n.op = Op::SumAll;
  n.a = a;
  n.rows = 1;
  n.cols = 1;
  double s = 0.0;
  for (double v : na.val) s += v;
  n.val = {s};
  return push(std::move(n));
}

namespace {

double apply_act(Tape::Act act, double x) {
  switch (act) {
    case Tape::Act::None: return x;
    case Tape::Act::Sigmoid: return sigmoid_scalar(x);
    case Tape::Act::LogSigmoid: return logsigmoid_scalar(x);
    case Tape::Act::Tanh: return std::tanh(x);
  }
  return x;
}

// derivative of the activation expressed through its own output value
double act_grad_from_value(Tape::Act act, double y) {
  switch (act) {
    case Tape::Act::None: return 1.0;
    case Tape::Act::Sigmoid: return y * (1.0 - y);
    case Tape::Act::LogSigmoid: return 1.0 - std::exp(y);
    case Tape::Act::Tanh: return 1.0 - y * y;
  }
  return 1.0;
}

}  // namespace

int Tape::linear_act(int x, int w, int bias, Act act) {
  const Node& nx = nodes_[x];
  const Node& nw = nodes_[w];
  const Node& nb = nodes_[bias];
  if (nx.cols != nw.rows || nb.rows != 1 || nb.cols != nw.cols)
    throw std::invalid_argument("linear_act: shape mismatch");
  Node n;
  n.op = Op::LinearAct;
  n.a = x;
  n.b = w;
  n.c = bias;
  n.act = act;
  n.rows = nx.rows;
  n.cols = nw.cols;
  n.val.assign(static_cast<size_t>(n.rows) * n.cols, 0.0);
  matmul_accum(nx.val, nx.rows, nx.cols, nw.val, nw.cols, n.val);
  for (int i = 0; i < n.rows; ++i)
    for (int j = 0; j < n.cols; ++j) {
      double& v = n.val[static_cast<size_t>(i) * n.cols + j];
      v = apply_act(act, v + nb.val[j]);
    }
  return push(std::move(n));
}

int Tape::gru_gate(int x, int w, int h, int u, int bias, Act act) {
  const Node& nx = nodes_[x];
  const Node& nw = nodes_[w];
  const Node& nh = nodes_[h];
  const Node& nu = nodes_[u];
  const Node& nb = nodes_[bias];
  if (nx.cols != nw.rows || nh.cols != nu.rows || nw.cols != nu.cols || nx.rows != nh.rows ||
      nb.rows != 1 || nb.cols != nw.cols)
    throw std::invalid_argument("gru_gate: shape mismatch");
  Node n;
  n.op = Op::GruGate;
  n.a = x;
  n.b = w;
  n.c = h;
  n.d = u;
  n.e = bias;
  n.act = act;
  n.rows = nx.rows;
  n.cols = nw.cols;
  n.val.assign(static_cast<size_t>(n.rows) * n.cols, 0.0);
  matmul_accum(nx.val, nx.rows, nx.cols, nw.val, nw.cols, n.val);
  matmul_accum(nh.val, nh.rows, nh.cols, nu.val, nu.cols, n.val);
  for (int i = 0; i < n.rows; ++i)
    for (int j = 0; j < n.cols; ++j) {
      double& v = n.val[static_cast<size_t>(i) * n.cols + j];
      v = apply_act(act, v + nb.val[j]);
    }
  return push(std::move(n));
}

namespace {

// dA(i,k) += sum_j G(i,j) * B(k,j); four accumulators break the FP latency
// chain
void grad_times_bt(const std::vector<double>& g, int rows, int cols, const std::vector<double>& b,
                   int k_dim, std::vector<double>& da) {
  for (int i = 0; i < rows; ++i) {
    const double* __restrict__ grow = g.data() + static_cast<size_t>(i) * cols;
    double* __restrict__ darow = da.data() + static_cast<size_t>(i) * k_dim;
    for (int k = 0; k < k_dim; ++k) {
      const double* __restrict__ brow = b.data() + static_cast<size_t>(k) * cols;
      double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
      int j = 0;
      for (; j + 4 <= cols; j += 4) {
        a0 += grow[j] * brow[j];
        a1 += grow[j + 1] * brow[j + 1];
        a2 += grow[j + 2] * brow[j + 2];
        a3 += grow[j + 3] * brow[j + 3];
      }
      double acc = (a0 + a1) + (a2 + a3);
      for (; j < cols; ++j) acc += grow[j] * brow[j];
      darow[k] += acc;
    }
  }
}

// dB(k,j) += sum_i A(i,k) * G(i,j)
void at_times_grad(const std::vector<double>& a, int rows, int k_dim, const std::vector<double>& g,
                   int cols, std::vector<double>& db) {
  double* __restrict__ dbp = db.data();
  for (int i = 0; i < rows; ++i) {
    const double* __restrict__ arow = a.data() + static_cast<size_t>(i) * k_dim;
    const double* __restrict__ grow = g.data() + static_cast<size_t>(i) * cols;
    for (int k = 0; k < k_dim; ++k) {
      double av = arow[k];
      if (av == 0.0) continue;
      double* __restrict__ drow = dbp + static_cast<size_t>(k) * cols;
      for (int j = 0; j < cols; ++j) drow[j] += av * grow[j];
    }
  }
}

}  // namespace

void Tape::backward(int loss) {
  Node& ln = nodes_[loss];
  if (ln.rows != 1 || ln.cols != 1) throw std::invalid_argument("backward: loss must be scalar");
  for (int p : params_) nodes_[p].grad.assign(nodes_[p].val.size(), 0.0);
  grad_buf(loss)[0] = 1.0;

  for (int id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.empty()) continue;
    const std::vector<double>& g = n.grad;
    switch (n.op) {
      case Op::Input:
      case Op::Param:
        break;
      case Op::MatMul: {
        Node& na = nodes_[n.a];
        Node& nb = nodes_[n.b];
        grad_times_bt(g, na.rows, n.cols, nb.val, na.cols, grad_buf(n.a));
        at_times_grad(na.val, na.rows, na.cols, g, n.cols, grad_buf(n.b));
        break;
      }
      case Op::Add: {
        auto& da = grad_buf(n.a);
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i];
        auto& db = grad_buf(n.b);
        for (size_t i = 0; i < g.size(); ++i) db[i] += g[i];
        break;
      }
      case Op::Sub: {
        auto& da = grad_buf(n.a);
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i];
        auto& db = grad_buf(n.b);
        for (size_t i = 0; i < g.size(); ++i) db[i] -= g[i];
        break;
      }
      case Op::Mul: {
        auto& da = grad_buf(n.a);
        const auto& bv = nodes_[n.b].val;
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * bv[i];
        auto& db = grad_buf(n.b);
        const auto& av = nodes_[n.a].val;
        for (size_t i = 0; i < g.size(); ++i) db[i] += g[i] * av[i];
        break;
      }
      case Op::Div: {
        const auto& bv = nodes_[n.b].val;
        auto& da = grad_buf(n.a);
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] / bv[i];
        auto& db = grad_buf(n.b);
        for (size_t i = 0; i < g.size(); ++i) db[i] -= g[i] * n.val[i] / bv[i];
        break;
      }
      case Op::AddRow: {
        auto& da = grad_buf(n.a);
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i];
        auto& db = grad_buf(n.b);
        for (int i = 0; i < n.rows; ++i)
          for (int j = 0; j < n.cols; ++j) db[j] += g[static_cast<size_t>(i) * n.cols + j];
        break;
      }
      case Op::Affine: {
        auto& da = grad_buf(n.a);
        for (size_t i = 0; i < g.size(); ++i) da[i] += n.alpha * g[i];
        break;
      }
      case Op::Sigmoid: {
        auto& da = grad_buf(n.a);
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * n.val[i] * (1.0 - n.val[i]);
        break;
      }
      case Op::LogSigmoid: {
        auto& da = grad_buf(n.a);
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * (1.0 - std::exp(n.val[i]));
        break;
      }
      case Op::Tanh: {
        auto& da = grad_buf(n.a);
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * (1.0 - n.val[i] * n.val[i]);
        break;
      }
      case Op::Exp: {
        auto& da = grad_buf(n.a);
        for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * n.val[i];
        break;
      }
      case Op::LogClamp: {
        const auto& av = nodes_[n.a].val;
        auto& da = grad_buf(n.a);
        for (size_t i = 0; i < g.size(); ++i)
          if (av[i] > n.alpha) da[i] += g[i] / av[i];
        break;
      }
      case Op::PowClamp: {
        const auto& av = nodes_[n.a].val;
        auto& da = grad_buf(n.a);
        for (size_t i = 0; i < g.size(); ++i)
          if (av[i] > n.alpha && av[i] < n.beta)
            da[i] += g[i] * n.exponent * std::pow(av[i], n.exponent - 1.0);
        break;
      }
      case Op::ClampMin: {
        const auto& av = nodes_[n.a].val;
        auto& da = grad_buf(n.a);
        for (size_t i = 0; i < g.size(); ++i)
          if (av[i] > n.alpha) da[i] += g[i];
        break;
      }
      case Op::SegSum: {
        auto& da = grad_buf(n.a);
        int in_rows = nodes_[n.a].rows;
        for (int r = 0; r < in_rows; ++r) {
          int s = (*n.ids)[r];
          for (int j = 0; j < n.cols; ++j)
            da[static_cast<size_t>(r) * n.cols + j] += g[static_cast<size_t>(s) * n.cols + j];
        }
        break;
      }
      case Op::Gather: {
        auto& da = grad_buf(n.a);
        for (int r = 0; r < n.rows; ++r) {
          int s = (*n.ids)[r];
          for (int j = 0; j < n.cols; ++j)
            da[static_cast<size_t>(s) * n.cols + j] += g[static_cast<size_t>(r) * n.cols + j];
        }
        break;
      }
      case Op::ConcatCols: {
        Node& na = nodes_[n.a];
        Node& nb = nodes_[n.b];
        auto& da = grad_buf(n.a);
        auto& db = grad_buf(n.b);
        for (int r = 0; r < n.rows; ++r) {
          const double* grow = g.data() + static_cast<size_t>(r) * n.cols;
          for (int j = 0; j < na.cols; ++j) da[static_cast<size_t>(r) * na.cols + j] += grow[j];
          for (int j = 0; j < nb.cols; ++j)
            db[static_cast<size_t>(r) * nb.cols + j] += grow[na.cols + j];
        }
        break;
      }
      case Op::SumAll: {
        auto& da = grad_buf(n.a);
        for (size_t i = 0; i < da.size(); ++i) da[i] += g[0];
        break;
      }
      case Op::LinearAct: {
        Node& nx = nodes_[n.a];
        Node& nw = nodes_[n.b];
        std::vector<double> dpre(g.size());
        for (size_t i = 0; i < g.size(); ++i)
          dpre[i] = g[i] * act_grad_from_value(n.act, n.val[i]);
        grad_times_bt(dpre, nx.rows, n.cols, nw.val, nx.cols, grad_buf(n.a));
        at_times_grad(nx.val, nx.rows, nx.cols, dpre, n.cols, grad_buf(n.b));
        auto& db = grad_buf(n.c);
        for (int i = 0; i < n.rows; ++i)
          for (int j = 0; j < n.cols; ++j) db[j] += dpre[static_cast<size_t>(i) * n.cols + j];
        break;
      }
      case Op::GruGate: {
        Node& nx = nodes_[n.a];
        Node& nw = nodes_[n.b];
        Node& nh = nodes_[n.c];
        Node& nu = nodes_[n.d];
        std::vector<double> dpre(g.size());
        for (size_t i = 0; i < g.size(); ++i)
          dpre[i] = g[i] * act_grad_from_value(n.act, n.val[i]);
        grad_times_bt(dpre, nx.rows, n.cols, nw.val, nx.cols, grad_buf(n.a));
        at_times_grad(nx.val, nx.rows, nx.cols, dpre, n.cols, grad_buf(n.b));
        grad_times_bt(dpre, nh.rows, n.cols, nu.val, nh.cols, grad_buf(n.c));
        at_times_grad(nh.val, nh.rows, nh.cols, dpre, n.cols, grad_buf(n.d));
        auto& db = grad_buf(n.e);
        for (int i = 0; i < n.rows; ++i)
          for (int j = 0; j < n.cols; ++j) db[j] += dpre[static_cast<size_t>(i) * n.cols + j];
        break;
      }
    }
    // Non-parameter gradients are scratch; release them as soon as the node
    // has pushed its contribution upstream.
    if (n.op != Op::Param) {
      n.grad.clear();
      n.grad.shrink_to_fit();
    }
  }
}

bool FdReport::pass(double frac) const {
  if (checked == 0) return false;
  int need = static_cast<int>(std::ceil(frac * checked));
  return within_rel_tol >= need && rest_within_abs_tol == checked - within_rel_tol;
}

FdReport finite_difference_check(const std::function<double(std::span<const double>)>& loss,
                                 std::span<double> params, std::span<const double> analytic,
                                 double step, double rel_tol, double abs_tol) {
  FdReport rep;
  rep.rel_tol = rel_tol;
  rep.abs_tol = abs_tol;
  rep.checked = static_cast<int>(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    double keep = params[i];
    params[i] = keep + step;
    double lp = loss(params);
    params[i] = keep - step;
    double lm = loss(params);
    params[i] = keep;
    double fd = (lp - lm) / (2.0 * step);
    double ad = analytic[i];
    double abs_err = std::abs(fd - ad);
    double denom = std::max(std::abs(fd), std::abs(ad));
    double rel_err = denom > 0 ? abs_err / denom : 0.0;
    if (rel_err <= rel_tol)
      ++rep.within_rel_tol;
    else if (abs_err <= abs_tol)
      ++rep.rest_within_abs_tol;
    if (rel_err > rep.max_rel_err) {
      rep.max_rel_err = rel_err;
      rep.worst_index = static_cast<int>(i);
    }
    rep.max_abs_err = std::max(rep.max_abs_err, abs_err);
  }
  return rep;
}

}  // namespace pdp::grad
