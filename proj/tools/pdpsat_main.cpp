// pdpsat: message-passing and neural SAT solver toolkit.
//
// Subcommands: solve (DIMACS in, witness out), train (unsupervised stream
// training), generate (datasets + manifest), bench (solved-ratio reports).

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "pdp/classical.hpp"
#include "pdp/engine.hpp"
#include "pdp/formula.hpp"
#include "pdp/generators.hpp"
#include "pdp/neural.hpp"
#include "pdp/training.hpp"

namespace fs = std::filesystem;
using namespace pdp;

namespace {

constexpr int kExitSat = 10;
constexpr int kExitUnknown = 30;
constexpr int kExitError = 1;

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> dir_files;
      for (const auto& p : fs::directory_iterator(in))
        if (p.path().extension() == ".cnf") dir_files.push_back(p.path().string());
      std::sort(dir_files.begin(), dir_files.end());
      files.insert(files.end(), dir_files.begin(), dir_files.end());
    } else {
      files.push_back(in);
    }
  }
  return files;
}

struct SolveOutcome {
  bool solved = false;
  int iterations = 0;
  std::vector<uint8_t> assignment;
  double seconds = 0.0;
};

struct SolverOptions {
  std::string solver = "sp";
  std::string checkpoint;
  int t_max = 1000;
  int replicas = 1;
  double timeout_s = 0.0;
  double reinforce_pi = 0.05;
};

SolveOutcome solve_one(const CnfFormula& f, const SolverOptions& opt,
                       const NeuralPdpModel* model, uint64_t seed) {
  auto t0 = std::chrono::steady_clock::now();
  RunResult r;
  if (opt.solver == "bp") {
    BpConfig cfg;
    cfg.seed = seed;
    cfg.wall_timeout_s = opt.timeout_s;
    r = bp_guided_decimate(f, cfg);
  } else if (opt.solver == "sp") {
    SpConfig cfg;
    cfg.seed = seed;
    cfg.wall_timeout_s = opt.timeout_s;
    r = sp_guided_decimate(f, cfg);
  } else if (opt.solver == "reinforce") {
    ReinforceState state;
    state.pi = opt.reinforce_pi;
    r = reinforce_solve(f, state, opt.t_max, seed, opt.timeout_s);
  } else if (opt.solver == "neural") {
    RunConfig cfg;
    cfg.t_max = opt.t_max;
    cfg.seed = seed;
    cfg.wall_timeout_s = opt.timeout_s;
    if (opt.replicas > 1)
      r = run_with_replication(f, *model, opt.replicas, cfg);
    else
      r = run(build_factor_graph(f), *model, cfg);
  } else {
    throw std::runtime_error("unknown solver '" + opt.solver + "'");
  }
  SolveOutcome out;
  out.solved = r.instances[0].solved;
  out.iterations = r.instances[0].solved ? r.instances[0].solved_at : r.iterations_run;
  out.assignment = r.instances[0].assignment;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (out.solved && !evaluate(f, out.assignment).is_sat)
    throw std::runtime_error("internal error: solver returned an invalid witness");
  return out;
}

void print_witness(std::ostream& os, const std::vector<uint8_t>& hard) {
  os << "v";
  for (size_t i = 0; i < hard.size(); ++i)
    os << ' ' << (hard[i] ? 1 : -1) * static_cast<int>(i + 1);
  os << " 0\n";
}

int cmd_solve(const SolverOptions& opt, const std::vector<std::string>& inputs, uint64_t seed,
              int batch_size) {
  std::vector<std::string> files = expand_inputs(inputs);
  if (files.empty()) {
    std::cerr << "solve: no input files\n";
    return kExitError;
  }
  std::optional<NeuralPdpModel> model;
  if (opt.solver == "neural") {
    if (opt.checkpoint.empty()) {
      std::cerr << "solve: --checkpoint is required for the neural solver\n";
      return kExitError;
    }
    model = load_checkpoint(opt.checkpoint);
  }

  int solved_count = 0;

  auto emit = [&](const std::string& file, const SolveOutcome& out) {
    std::cout << "c " << file << "\n";
    if (out.solved) {
      std::cout << "s SATISFIABLE\n";
      print_witness(std::cout, out.assignment);
      ++solved_count;
    } else {
      std::cout << "s UNKNOWN\n";
    }
  };

  if (opt.solver == "neural" && opt.replicas <= 1 && batch_size > 1) {
    // batched evaluation: concatenate up to batch_size instances per run
    size_t idx = 0;
    while (idx < files.size()) {
      size_t end = std::min(idx + static_cast<size_t>(batch_size), files.size());
      std::vector<CnfFormula> fs_batch;
      std::vector<FactorGraph> gs;
      for (size_t i = idx; i < end; ++i) {
        fs_batch.push_back(parse_dimacs_file(files[i]));
        gs.push_back(build_factor_graph(fs_batch.back()));
      }
      RunConfig cfg;
      cfg.t_max = opt.t_max;
      cfg.wall_timeout_s = opt.timeout_s;
      cfg.instance_seeds.resize(fs_batch.size());
      for (size_t i = 0; i < fs_batch.size(); ++i) cfg.instance_seeds[i] = mix_seed(seed, idx + i);
      RunResult r = run(concat_batch(gs), *model, cfg);
      for (size_t i = 0; i < fs_batch.size(); ++i) {
        SolveOutcome out;
        out.solved = r.instances[i].solved;
        out.iterations = r.instances[i].solved ? r.instances[i].solved_at : r.iterations_run;
        out.assignment = r.instances[i].assignment;
        if (out.solved && !evaluate(fs_batch[i], out.assignment).is_sat)
          throw std::runtime_error("internal error: invalid witness in batch");
        emit(files[idx + i], out);
      }
      idx = end;
    }
  } else {
    for (size_t idx = 0; idx < files.size(); ++idx) {
      CnfFormula f = parse_dimacs_file(files[idx]);
      SolveOutcome out = solve_one(f, opt, model ? &*model : nullptr, mix_seed(seed, idx));
      emit(files[idx], out);
    }
  }
  return solved_count == static_cast<int>(files.size()) ? kExitSat : kExitUnknown;
}

// --- train ---

std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::runtime_error("config: expected 'key = value', got: " + line);
      continue;
    }
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw std::runtime_error("config: empty key in line: " + line);
    if (kv.count(key)) throw std::runtime_error("config: duplicate key " + key);
    kv[key] = value;
  }
  return kv;
}

int cmd_train(const std::string& config_path, const std::string& out_dir) {
  auto kv = parse_config_file(config_path);
  auto take = [&](const std::string& key, const std::string& fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  int h = std::stoi(take("h", "32"));
  TrainStreamConfig cfg;
  cfg.steps = std::stol(take("steps", "5000"));
  cfg.batch_size = std::stoi(take("batch_size", "4"));
  cfg.t_max = std::stoi(take("t_max", "30"));
  cfg.kappa = std::stod(take("kappa", "10"));
  cfg.lambda = std::stod(take("lambda", "0.95"));
  cfg.epsilon_floor = std::stod(take("epsilon_floor", "1e-20"));
  cfg.dropout = std::stod(take("dropout", "0.2"));
  cfg.seed = std::stoull(take("seed", "1"));
  cfg.checkpoint_every = std::stol(take("checkpoint_every", "1000"));
  cfg.ema_beta = std::stod(take("ema_beta", "0.99"));
  cfg.schedule = TemperatureSchedule::over_steps(std::stod(take("tau_start", "2.0")),
                                                 std::stod(take("tau_end", "0.05")), cfg.steps,
                                                 std::stod(take("anneal_fraction", "0.8")));
  cfg.out_dir = out_dir;

  double lr = std::stod(take("lr", "1e-4"));
  double clip = std::stod(take("clip_norm", "0.65"));
  double wd = std::stod(take("weight_decay", "1e-10"));

  std::string generator = take("generator", "uniform");
  std::optional<FormulaStream> stream;
  uint64_t stream_seed = std::stoull(take("stream_seed", std::to_string(cfg.seed + 1)));
  if (generator == "uniform") {
    UniformConfig g;
    g.n_min = std::stoi(take("n_min", "4"));
    g.n_max = std::stoi(take("n_max", "30"));
    g.k_min = std::stoi(take("k_min", "3"));
    g.k_max = std::stoi(take("k_max", "3"));
    g.alpha_min = std::stod(take("alpha_min", "2.0"));
    g.alpha_max = std::stod(take("alpha_max", "4.0"));
    stream.emplace(g, stream_seed);
  } else if (generator == "ca") {
    CaConfig g;
    g.n_min = std::stoi(take("n_min", "24"));
    g.n_max = std::stoi(take("n_max", "60"));
    g.k = std::stoi(take("k", "3"));
    g.alpha_min = std::stod(take("alpha_min", "2.0"));
    g.alpha_max = std::stod(take("alpha_max", "4.0"));
    g.communities = std::stoi(take("communities", "6"));
    g.q = std::stod(take("q", "0.7"));
    stream.emplace(g, stream_seed);
  } else {
    std::cerr << "train: unknown generator '" << generator << "'\n";
    return kExitError;
  }
  std::string resume = take("resume", "");
  uint64_t model_seed = std::stoull(take("model_seed", std::to_string(cfg.seed)));

  if (!kv.empty()) {
    std::cerr << "train: unknown config key '" << kv.begin()->first << "'\n";
    return kExitError;
  }

  NeuralPdpModel model;
  OptimizerState opt;
  if (!resume.empty()) {
    TrainingCheckpoint tc = load_training_checkpoint(resume);
    model = std::move(tc.model);
    opt = std::move(tc.opt);
    cfg.start_step = tc.step;
    cfg.start_ema = tc.ema;
    cfg.schedule.step = tc.sched_step;
    std::cerr << "resuming from step " << tc.step << "\n";
  } else {
    model = init_model(h, model_seed, cfg.dropout);
    opt = init_optimizer(model);
  }
  opt.lr = lr;
  opt.clip_norm = clip;
  opt.weight_decay = wd;

  fs::create_directories(out_dir);
  std::ofstream csv;
  std::string csv_path = (fs::path(out_dir) / "train_report.csv").string();
  bool fresh = cfg.start_step == 0 || !fs::exists(csv_path);
  csv.open(csv_path, fresh ? std::ios::trunc : std::ios::app);
  if (fresh) csv << "step,loss,ema,tau,solved_frac,seconds\n";

  train_stream(model, *stream, opt, cfg, [&](const TrainReport& r) {
    csv << r.step << ',' << r.loss << ',' << r.ema << ',' << r.tau << ',' << r.solved_frac << ','
        << r.seconds << '\n';
    if (r.step % 100 == 0) {
      csv.flush();
      std::cerr << "step " << r.step << " loss " << r.loss << " ema " << r.ema << " tau " << r.tau
                << " solved " << r.solved_frac << "\n";
    }
  });
  std::cout << "trained " << (cfg.steps - cfg.start_step) << " steps; checkpoints in " << out_dir
            << "\n";
  return 0;
}

// --- generate ---

struct GenerateOptions {
  std::string type = "uniform";
  int count = 100;
  std::string out_dir;
  std::string prefix = "inst";
  int n = 0, n_min = 20, n_max = 20;
  int k = 3;
  double alpha = 0.0, alpha_min = 2.5, alpha_max = 2.5;
  std::string alpha_sweep;  // "start:end:step"
  int communities = 10;
  double q = 0.8;
  bool sat_filter = false;
  long filter_flips = 200000;
  uint64_t seed = 1;
};

int cmd_generate(GenerateOptions o) {
  if (o.n > 0) o.n_min = o.n_max = o.n;
  if (o.alpha > 0) o.alpha_min = o.alpha_max = o.alpha;

  DatasetOptions dopt;
  dopt.sat_filter = o.sat_filter;
  dopt.witness_name = "walksat";
  long flips = o.filter_flips;
  dopt.witness_solver = [flips](const CnfFormula& f) -> std::optional<std::vector<uint8_t>> {
    RunResult r = local_search_fallback(f, PartialAssignment(f.num_vars, -1), flips,
                                        mix_seed(f.provenance.seed, 0xF117E6));
    if (r.instances[0].solved) return r.instances[0].assignment;
    return std::nullopt;
  };

  std::vector<std::pair<double, double>> alpha_ranges;
  std::vector<std::string> out_dirs;
  if (!o.alpha_sweep.empty()) {
    double start, end, step;
    char c1, c2;
    std::istringstream ss(o.alpha_sweep);
    if (!(ss >> start >> c1 >> end >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0) {
      std::cerr << "generate: bad --alpha-sweep, expected start:end:step\n";
      return kExitError;
    }
    for (double a = start; a <= end + 1e-9; a += step) {
      alpha_ranges.push_back({a, a});
      char buf[32];
      std::snprintf(buf, sizeof(buf), "alpha_%.2f", a);
      out_dirs.push_back((fs::path(o.out_dir) / buf).string());
    }
  } else {
    alpha_ranges.push_back({o.alpha_min, o.alpha_max});
    out_dirs.push_back(o.out_dir);
  }

  for (size_t i = 0; i < alpha_ranges.size(); ++i) {
    UniformConfig ucfg;
    CaConfig ccfg;
    bool use_ca = o.type == "ca";
    if (use_ca) {
      ccfg.n_min = o.n_min;
      ccfg.n_max = o.n_max;
      ccfg.k = o.k;
      ccfg.alpha_min = alpha_ranges[i].first;
      ccfg.alpha_max = alpha_ranges[i].second;
      ccfg.communities = o.communities;
      ccfg.q = o.q;
      ccfg.validate();
    } else if (o.type == "uniform") {
      ucfg.n_min = o.n_min;
      ucfg.n_max = o.n_max;
      ucfg.k_min = o.k;
      ucfg.k_max = o.k;
      ucfg.alpha_min = alpha_ranges[i].first;
      ucfg.alpha_max = alpha_ranges[i].second;
      ucfg.validate();
    } else {
      std::cerr << "generate: unknown type '" << o.type << "'\n";
      return kExitError;
    }
    auto entries = gen_dataset(ucfg, ccfg, use_ca, o.count, out_dirs[i], o.prefix,
                               mix_seed(o.seed, i), dopt);
    std::cout << out_dirs[i] << ": " << entries.size() << " instances\n";
  }
  return 0;
}

// --- bench ---

struct BenchRow {
  std::string file;
  int n = 0, m = 0;
  double alpha = 0.0;
  std::string solver;
  bool solved = false;
  int iterations = 0;
  double seconds = 0.0;
  uint64_t seed = 0;
};

int default_thread_count() {
  if (const char* env = std::getenv("PDPSAT_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

volatile std::sig_atomic_t g_interrupted = 0;
void on_interrupt(int) { g_interrupted = 1; }

int cmd_bench(const std::vector<std::string>& datasets, const std::vector<std::string>& solvers,
              const SolverOptions& base_opt, uint64_t seed, int threads, bool no_timing,
              const std::string& out_path) {
  std::vector<std::string> files = expand_inputs(datasets);
  if (files.empty()) {
    std::cerr << "bench: no instances found\n";
    return kExitError;
  }
  std::optional<NeuralPdpModel> model;
  for (const auto& s : solvers)
    if (s == "neural") {
      if (base_opt.checkpoint.empty()) {
        std::cerr << "bench: neural solver requires --checkpoint\n";
        return kExitError;
      }
      model = load_checkpoint(base_opt.checkpoint);
    }

  struct Task {
    size_t file_idx;
    std::string solver;
  };
  std::vector<Task> tasks;
  for (const auto& s : solvers)
    for (size_t i = 0; i < files.size(); ++i) tasks.push_back({i, s});

  std::signal(SIGINT, on_interrupt);
  std::vector<BenchRow> rows(tasks.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    while (!g_interrupted) {
      size_t t = next.fetch_add(1);
      if (t >= tasks.size()) break;
      const Task& task = tasks[t];
      CnfFormula f = parse_dimacs_file(files[task.file_idx]);
      SolverOptions opt = base_opt;
      opt.solver = task.solver;
      uint64_t inst_seed = mix_seed(seed, task.file_idx);
      SolveOutcome out = solve_one(f, opt, model ? &*model : nullptr, inst_seed);
      BenchRow& row = rows[t];
      row.file = files[task.file_idx];
      row.n = f.num_vars;
      row.m = f.num_clauses();
      row.alpha = f.alpha();
      row.solver = task.solver;
      row.solved = out.solved;
      row.iterations = out.iterations;
      row.seconds = no_timing ? 0.0 : out.seconds;
      row.seed = inst_seed;
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::max(1, threads); ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "bench: cannot write " << out_path << "\n";
    return kExitError;
  }
  if (g_interrupted)
    std::cerr << "bench: interrupted, flushing " << "completed rows only\n";
  out << "file,n,m,alpha,solver,solved,iterations,seconds,seed\n";
  for (const BenchRow& r : rows) {
    if (r.file.empty()) continue;  // not reached before an interrupt
    out << r.file << ',' << r.n << ',' << r.m << ',' << r.alpha << ',' << r.solver << ','
        << (r.solved ? 1 : 0) << ',' << r.iterations << ',' << r.seconds << ',' << r.seed << '\n';
  }

  // aggregates keyed by (solver, alpha rounded to one decimal)
  std::map<std::pair<std::string, double>, std::tuple<int, int, double>> agg;
  for (const BenchRow& r : rows) {
    if (r.file.empty()) continue;
    double bucket = std::round(r.alpha * 10.0) / 10.0;
    auto& [count, solved_n, iters] = agg[{r.solver, bucket}];
    ++count;
    solved_n += r.solved;
    iters += r.iterations;
  }
  std::string agg_path = out_path;
  size_t dot = agg_path.rfind('.');
  agg_path = (dot == std::string::npos ? agg_path : agg_path.substr(0, dot)) + "_agg.csv";
  std::ofstream aout(agg_path);
  aout << "solver,alpha_bucket,count,solved,ratio,mean_iterations\n";
  for (const auto& [key, val] : agg) {
    const auto& [count, solved_n, iters] = val;
    aout << key.first << ',' << key.second << ',' << count << ',' << solved_n << ','
         << static_cast<double>(solved_n) / count << ',' << iters / count << '\n';
  }
  std::cout << "wrote " << rows.size() << " rows to " << out_path << " and aggregates to "
            << agg_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pdpsat: message-passing and neural SAT solver toolkit"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "solve DIMACS CNF instances");
  SolverOptions sopt;
  std::vector<std::string> solve_inputs;
  uint64_t solve_seed = 1;
  int solve_batch = 1;
  solve->add_option("--solver", sopt.solver, "neural|sp|reinforce|bp")->required();
  solve->add_option("--checkpoint", sopt.checkpoint, "model checkpoint (neural)");
  solve->add_option("--tmax", sopt.t_max, "iteration budget");
  solve->add_option("--replicas", sopt.replicas, "batch replication factor (neural)");
  solve->add_option("--batch", solve_batch, "instances per batched run (neural)");
  solve->add_option("--seed", solve_seed, "base seed");
  solve->add_option("--timeout", sopt.timeout_s, "wall seconds per instance (0 = none)");
  solve->add_option("--pi", sopt.reinforce_pi, "reinforce commitment rate");
  solve->add_option("inputs", solve_inputs, "CNF files or directories")->required();

  // train
  auto* train = app.add_subcommand("train", "train a neural model on a generated stream");
  std::string train_config, train_out;
  train->add_option("--config", train_config, "flat key=value config file")->required();
  train->add_option("--out", train_out, "output directory")->required();

  // generate
  auto* gen = app.add_subcommand("generate", "generate DIMACS datasets");
  GenerateOptions gopt;
  gen->add_option("--type", gopt.type, "uniform|ca");
  gen->add_option("--count", gopt.count, "instances per dataset");
  gen->add_option("--out", gopt.out_dir, "output directory")->required();
  gen->add_option("--prefix", gopt.prefix, "filename prefix");
  gen->add_option("--n", gopt.n, "fixed variable count");
  gen->add_option("--n-min", gopt.n_min, "min variables");
  gen->add_option("--n-max", gopt.n_max, "max variables");
  gen->add_option("--k", gopt.k, "clause size");
  gen->add_option("--alpha", gopt.alpha, "fixed clause density");
  gen->add_option("--alpha-min", gopt.alpha_min, "min alpha");
  gen->add_option("--alpha-max", gopt.alpha_max, "max alpha");
  gen->add_option("--alpha-sweep", gopt.alpha_sweep, "start:end:step, one directory per value");
  gen->add_option("--communities", gopt.communities, "CA community count");
  gen->add_option("--q", gopt.q, "CA modularity target");
  gen->add_flag("--sat-filter", gopt.sat_filter, "keep only certified-satisfiable instances");
  gen->add_option("--filter-flips", gopt.filter_flips, "walksat budget for witness filtering");
  gen->add_option("--seed", gopt.seed, "base seed");

  // bench
  auto* bench = app.add_subcommand("bench", "run solvers over datasets, emit CSV reports");
  std::vector<std::string> bench_datasets, bench_solvers;
  SolverOptions bopt;
  uint64_t bench_seed = 1;
  int bench_threads = default_thread_count();
  bool bench_no_timing = false;
  std::string bench_out = "report.csv";
  bench->add_option("--solvers", bench_solvers, "solver list")->required()->delimiter(',');
  bench->add_option("--checkpoint", bopt.checkpoint, "model checkpoint (neural)");
  bench->add_option("--tmax", bopt.t_max, "iteration budget");
  bench->add_option("--replicas", bopt.replicas, "replication factor (neural)");
  bench->add_option("--seed", bench_seed, "base seed");
  bench->add_option("--timeout", bopt.timeout_s, "wall seconds per instance (0 = none)");
  bench->add_option("--pi", bopt.reinforce_pi, "reinforce commitment rate");
  bench->add_option("--threads", bench_threads, "worker threads (default $PDPSAT_THREADS or 1)");
  bench->add_flag("--no-timing", bench_no_timing, "zero the seconds column for reproducible CSVs");
  bench->add_option("--out", bench_out, "per-instance CSV path");
  bench->add_option("datasets", bench_datasets, "dataset directories or files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return cmd_solve(sopt, solve_inputs, solve_seed, solve_batch);
    if (*train) return cmd_train(train_config, train_out);
    if (*gen) return cmd_generate(gopt);
    if (*bench)
      return cmd_bench(bench_datasets, bench_solvers, bopt, bench_seed, bench_threads,
                       bench_no_timing, bench_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
