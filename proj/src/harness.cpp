#include "lrmc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace lrmc {

namespace {

// Independent streams for the pieces of an experiment.
enum StreamTag : unsigned { kTruthStream = 1, kSampleStream = 2, kInitStream = 3, kSvdStream = 4 };

std::mt19937_64 make_engine(unsigned long long seed, unsigned tag) {
  std::seed_seq seq{static_cast<unsigned>(seed & 0xffffffffULL),
                    static_cast<unsigned>(seed >> 32), tag};
  return std::mt19937_64(seq);
}

Matrix gaussian(Index rows, Index cols, std::mt19937_64 &rng) {
  std::normal_distribution<Scalar> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

/// Floyd's algorithm: `count` distinct values of [0, universe), sorted.
std::vector<Index> sample_without_replacement(Index universe, Index count,
                                              std::mt19937_64 &rng) {
  std::unordered_set<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(count) * 2);
  std::vector<Index> out;
  out.reserve(count);
  for (Index j = universe - count; j < universe; ++j) {
    std::uniform_int_distribution<Index> pick(0, j);
    const Index t = pick(rng);
    const Index v = chosen.insert(t).second ? t : j;
    if (v == j) chosen.insert(j);
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

SampleSet samples_from_linear(const std::vector<Index> &linear, const FactorPair &truth) {
  const Index m = truth.m();
  std::vector<Index> rows, cols;
  rows.reserve(linear.size());
  cols.reserve(linear.size());
  for (Index k : linear) {
    rows.push_back(k / m);
    cols.push_back(k % m);
  }
  SampleIndex index{truth.n(), truth.m(), rows, cols};
  std::vector<Scalar> values = sampled_product(truth.G(), truth.H(), index);
  return SampleSet(truth.n(), truth.m(), std::move(rows), std::move(cols),
                   std::move(values));
}

Matrix orthonormal_columns(const Matrix &Y) {
  Eigen::HouseholderQR<Matrix> qr(Y);
  return qr.householderQ() * Matrix::Identity(Y.rows(), Y.cols());
}

}  // namespace

Index GenSpec::train_count() const {
  return static_cast<Index>(
      std::llround(os_ratio * static_cast<Scalar>((n + m - rank) * rank)));
}

Index GenSpec::test_count() const {
  return static_cast<Index>(std::llround(test_fraction * static_cast<Scalar>(n * m)));
}

void GenSpec::validate() const {
  require(n >= 1 && m >= 1, "GenSpec: dimensions must be positive");
  require(rank >= 1 && rank <= std::min(n, m), "GenSpec: rank must satisfy 1 <= r <= min(n, m)");
  require(os_ratio > 0.0, "GenSpec: os_ratio must be positive");
  require(test_fraction >= 0.0 && test_fraction < 1.0,
          "GenSpec: test_fraction must lie in [0, 1)");
  require(train_count() >= 1, "GenSpec: os_ratio yields an empty sample set");
  require(train_count() + test_count() <= n * m,
          "GenSpec: os_ratio (n + m - r) r plus test entries exceeds n m (|Omega| = " +
              std::to_string(train_count()) + ", n m = " + std::to_string(n * m) + ")");
}

GeneratedProblem generate_problem(const GenSpec &spec) {
  spec.validate();
  auto truth_rng = make_engine(spec.seed, kTruthStream);
  Matrix A = gaussian(spec.n, spec.rank, truth_rng);
  Matrix B = gaussian(spec.m, spec.rank, truth_rng);
  FactorPair truth(std::move(A), std::move(B));

  auto sample_rng = make_engine(spec.seed, kSampleStream);
  const Index n_train = spec.train_count();
  const Index n_test = spec.test_count();
  std::vector<Index> all =
      sample_without_replacement(spec.n * spec.m, n_train + n_test, sample_rng);
  std::vector<Index> train = all, test;
  if (n_test > 0) {
    std::shuffle(all.begin(), all.end(), sample_rng);
    train.assign(all.begin(), all.begin() + n_train);
    test.assign(all.begin() + n_train, all.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
  }

  std::optional<SampleSet> test_set;
  if (n_test > 0) test_set = samples_from_linear(test, truth);
  Problem prob(samples_from_linear(train, truth), spec.rank, std::move(test_set));
  return {std::move(prob), std::move(truth)};
}

FactorPair init_random(Index n, Index m, Index rank, unsigned long long seed) {
  require(n >= 1 && m >= 1 && rank >= 1 && rank <= std::min(n, m),
          "init_random: invalid dimensions");
  auto rng = make_engine(seed, kInitStream);
  for (;;) {
    Matrix G = gaussian(n, rank, rng);
    Matrix H = gaussian(m, rank, rng);
    FactorPair x(std::move(G), std::move(H));
    if (x.full_rank()) return x;
  }
}

TruncatedSvd truncated_svd(const SparseResidual &A, Index k, Index oversample,
                           int iterations, unsigned long long seed) {
  const Index n = A.n_rows();
  const Index m = A.n_cols();
  require(k >= 1 && k <= std::min(n, m), "truncated_svd: invalid target rank");
  require(oversample >= 0 && iterations >= 0, "truncated_svd: invalid parameters");
  const Index width = std::min(k + oversample, std::min(n, m));

  auto rng = make_engine(seed, kSvdStream);
  Matrix Q = orthonormal_columns(sp_times_dense(A, gaussian(m, width, rng)));
  for (int it = 0; it < iterations; ++it) {
    const Matrix Z = orthonormal_columns(spT_times_dense(A, Q));
    Q = orthonormal_columns(sp_times_dense(A, Z));
  }
  // A ~ Q B with B^T = A^T Q (m x width).
  const Matrix Bt = spT_times_dense(A, Q);
  Eigen::BDCSVD<Matrix> svd(Bt, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.singular_values = svd.singularValues().head(k);
  out.V = svd.matrixU().leftCols(k);
  out.U = Q * svd.matrixV().leftCols(k);
  return out;
}

FactorPair init_spectral(const Problem &prob) {
  const SampleSet &omega = prob.omega();
  require(!omega.empty(), "init_spectral: empty sample set");
  const Scalar scale = static_cast<Scalar>(prob.n()) * static_cast<Scalar>(prob.m()) /
                       static_cast<Scalar>(omega.size());
  std::vector<Scalar> vals(omega.values().begin(), omega.values().end());
  for (Scalar &v : vals) v *= scale;
  const SparseResidual A(omega.index(), std::move(vals));
  const TruncatedSvd svd = truncated_svd(A, prob.rank());
  const Vector &s = svd.singular_values;
  if (!(s(0) > 0.0) || !(s(prob.rank() - 1) > kRankTol * s(0)))
    throw DegeneratePointError("init_spectral: fewer than r nonzero singular values");
  const Vector root = s.cwiseSqrt();
  FactorPair x(svd.U * root.asDiagonal(), svd.V * root.asDiagonal());
  if (!x.full_rank())
    throw DegeneratePointError("init_spectral: spectral factors are rank deficient");
  return x;
}

std::string_view to_string(InitKind kind) {
  return kind == InitKind::Random ? "random" : "spectral";
}

InitKind init_from_string(std::string_view name) {
  if (name == "random") return InitKind::Random;
  if (name == "spectral" || name == "svd") return InitKind::Spectral;
  throw ArgumentError("unknown init '" + std::string(name) + "'");
}

RunCell parse_cell(std::string_view text) {
  RunCell cell;
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  require(!parts.empty() && parts.size() <= 3 && !parts[0].empty(),
          "bad run cell '" + std::string(text) + "', expected algo[:metric[:init]]");
  cell.algo = algorithm_from_string(parts[0]);
  if (parts.size() > 1) cell.metric = metric_from_string(parts[1]);
  if (parts.size() > 2) cell.init = init_from_string(parts[2]);
  return cell;
}

std::string cell_label(const RunCell &cell) {
  std::string metric = cell.metric == MetricKind::Scaled ? "scaled" : "ri";
  return std::string(to_string(cell.algo)) + "-" + metric + "-" +
         std::string(to_string(cell.init));
}

namespace {

std::string format_number(Scalar v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RunOutcome run_cell(const GeneratedProblem &gp, const RunSpec &spec, const RunCell &cell,
                    std::size_t index) {
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%02zu_", index);
  RunOutcome out;
  out.cell = cell;
  out.label = prefix + cell_label(cell);
  try {
    const Problem &prob = gp.problem;
    const FactorPair x0 = cell.init == InitKind::Random
                              ? init_random(prob.n(), prob.m(), prob.rank(), spec.init_seed)
                              : init_spectral(prob);
    SolverConfig cfg = spec.config;
    cfg.algo = cell.algo;
    cfg.metric = cell.metric;
    SolveResult res = solve(prob, x0, cfg);
    out.trace = std::move(res.trace);
    out.final_cost = cost(res.point, prob);
    if (prob.omega_test()) out.test_rmse = rmse_on(res.point, *prob.omega_test());
  } catch (const std::exception &e) {
    out.error = e.what();
  }
  return out;
}

}  // namespace

void write_trace_csv(std::ostream &out, const Trace &trace) {
  out << "iter,time_s,cost,grad_norm,step_or_radius,inner_iters,rho\n";
  for (const auto &r : trace.records) {
    out << r.iter << ',' << format_number(r.wall_time_s) << ',' << format_number(r.cost)
        << ',' << format_number(r.grad_norm) << ',' << format_number(r.step_or_radius)
        << ',' << (r.inner_iters ? std::to_string(*r.inner_iters) : "") << ','
        << (r.rho ? format_number(*r.rho) : "") << '\n';
  }
}

void write_summary_csv(std::ostream &out, const ExperimentResult &result) {
  out << "run,algo,metric,init,status,iterations,final_cost,final_grad_norm,"
         "iters_to_1e-12,test_rmse,time_s,error\n";
  for (const auto &run : result.runs) {
    const auto &recs = run.trace.records;
    const bool ok = run.error.empty() && !recs.empty();
    const auto hit = run.trace.iterations_to(1e-12);
    std::string err = run.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out << run.label << ',' << to_string(run.cell.algo) << ','
        << to_string(run.cell.metric) << ',' << to_string(run.cell.init) << ','
        << (ok ? std::string(to_string(run.trace.status)) : std::string("Error")) << ','
        << (ok ? std::to_string(recs.back().iter) : "") << ','
        << (ok ? format_number(run.final_cost) : "") << ','
        << (ok ? format_number(recs.back().grad_norm) : "") << ','
        << (hit ? std::to_string(*hit) : "") << ','
        << (run.test_rmse ? format_number(*run.test_rmse) : "") << ','
        << (ok ? format_number(recs.back().wall_time_s) : "") << ',' << err << '\n';
  }
}

ExperimentResult run_experiment(const RunSpec &spec) {
  require(!spec.cells.empty(), "run_experiment: no runs requested");
  require(spec.jobs >= 1, "run_experiment: jobs must be >= 1");
  spec.config.validate();
  const GeneratedProblem gp = generate_problem(spec.gen);

  ExperimentResult result;
  result.runs.resize(spec.cells.size());
  if (!spec.out_dir.empty()) std::filesystem::create_directories(spec.out_dir);

  const auto work = [&](std::size_t i) {
    result.runs[i] = run_cell(gp, spec, spec.cells[i], i);
    if (!spec.out_dir.empty()) {
      std::ofstream csv(std::filesystem::path(spec.out_dir) / (result.runs[i].label + ".csv"));
      write_trace_csv(csv, result.runs[i].trace);
    }
  };

  if (spec.jobs == 1) {
    for (std::size_t i = 0; i < spec.cells.size(); ++i) work(i);
  } else {
    std::mutex mu;
    std::size_t next = 0;
    std::vector<std::thread> pool;
    const int workers = std::min<int>(spec.jobs, static_cast<int>(spec.cells.size()));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t i;
          {
            std::lock_guard lock(mu);
            if (next >= spec.cells.size()) return;
            i = next++;
          }
          work(i);
        }
      });
    }
    for (auto &t : pool) t.join();
  }

  if (!spec.out_dir.empty()) {
    std::ofstream summary(std::filesystem::path(spec.out_dir) / "summary.csv");
    write_summary_csv(summary, result);
  }
  return result;
}

}  // namespace lrmc
