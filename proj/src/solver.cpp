#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sinkmatch/kernels.hpp"
#include "sinkmatch/ot.hpp"

namespace sinkmatch {

void SolverConfig::validate() const {
  if (!(lambda > 0.0)) raise(errc::invalid_input, "lambda must be > 0");
  if (max_iterations < 1) raise(errc::invalid_input, "max_iterations must be >= 1");
  if (!(convergence_tol > 0.0)) raise(errc::invalid_input, "convergence_tol must be > 0");
}

namespace {

const kernels::Backend& K() { return kernels::active(); }

// The relative-change exit alone is unreliable at small lambda: while the
// scaling "auction" between contending entries is still running, per-sweep
// plan changes sit far below any tolerance (and underflow outright in
// double), yet the marginals are nowhere near feasible. A converged plan
// must satisfy its marginals, so the exit also demands feasibility. The
// feasibility bar tightens with the tolerance: tight solves guarantee
// near-exact marginals, and the default 1e-6 tolerance keeps converged
// plans well inside 1e-6 deviation.
double feasibility_tol(const SolverConfig& cfg) {
  return std::min(5e-7, std::max(100.0 * cfg.convergence_tol, 1e-13));
}

void check_instance(const CostMatrix& cost, const MarginalWeights& alpha,
                    const MarginalWeights& beta, const SolverConfig& cfg) {
  cfg.validate();
  if (cost.values.empty()) raise(errc::invalid_input, "empty cost matrix");
  for (std::size_t i = 0; i < cost.values.size(); ++i)
    if (!std::isfinite(cost.values.data()[i]))
      raise(errc::invalid_input, "non-finite cost entry");
  if (alpha.size() != cost.rows() || beta.size() != cost.cols())
    raise(errc::dimension_mismatch, "margin lengths do not match the cost matrix");
  alpha.validate();
  beta.validate();
}

Matrix gibbs_kernel_linear(const CostMatrix& cost, double lambda) {
  const std::size_t rows = cost.rows(), cols = cost.cols();
  Matrix xi(rows, cols);
  const double inv = 1.0 / lambda;
  for (std::size_t i = 0; i < rows * cols; ++i)
    xi.data()[i] = std::exp(-cost.values.data()[i] * inv);

  for (std::size_t i = 0; i < rows; ++i)
    if (K().max(xi.row(i).data(), cols) == 0.0)
      raise(errc::numerical_underflow,
            "Gibbs kernel row underflowed to zero; retry in log-domain");
  std::vector<double> colmax(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) K().vmax(colmax.data(), xi.row(i).data(), cols);
  for (std::size_t j = 0; j < cols; ++j)
    if (colmax[j] == 0.0)
      raise(errc::numerical_underflow,
            "Gibbs kernel column underflowed to zero; retry in log-domain");
  return xi;
}

double relative_change(const Matrix& curr, const Matrix& prev) {
  const double diff = K().sum_sq_diff(curr.data(), prev.data(), curr.size());
  const double ref = K().sum_sq(prev.data(), prev.size());
  return std::sqrt(diff / ref);
}

double marginal_deviation(const Matrix& plan, const MarginalWeights& alpha,
                          const MarginalWeights& beta) {
  const std::size_t rows = plan.rows(), cols = plan.cols();
  double worst = 0.0;
  std::vector<double> colsum(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    worst = std::max(worst, std::abs(K().sum(plan.row(i).data(), cols) - alpha[i]));
    K().vadd(colsum.data(), plan.row(i).data(), cols);
  }
  for (std::size_t j = 0; j < cols; ++j)
    worst = std::max(worst, std::abs(colsum[j] - beta[j]));
  return worst;
}

// log-sum-exp of (row + shift), max-stabilized
double row_lse(const double* row, std::size_t n, double shift) {
  const double m = K().max(row, n) + shift;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(row[i] + shift - m);
  return m + std::log(s);
}

// Warm-start potentials for small-lambda log-domain solves. Runs a few
// scaling sweeps per stage of a halving lambda schedule; the Kantorovich
// potentials (in cost units) carry over between stages, so the final duals
// land near the target fixed point and the contention between entries is
// already resolved. The fixed point itself is unchanged: this only replaces
// the arbitrary all-ones dual initialization.
void warm_start_duals(const CostMatrix& cost, const MarginalWeights& alpha,
                      const MarginalWeights& beta, double lambda_target, std::vector<double>& f,
                      std::vector<double>& g) {
  const std::size_t rows = cost.rows(), cols = cost.cols();

  std::vector<double> u(rows, 0.0), v(cols, 0.0);  // potentials in cost units
  std::vector<double> scratch(std::max(rows, cols));
  std::vector<double> colmax(cols), colacc(cols);

  std::vector<double> schedule;
  for (double lambda = lambda_target * std::sqrt(2.0); lambda < 1.0; lambda *= std::sqrt(2.0))
    schedule.insert(schedule.begin(), lambda);

  for (double lambda : schedule) {
    const double inv = 1.0 / lambda;
    for (int sweep = 0; sweep < 300; ++sweep) {
      for (std::size_t i = 0; i < rows; ++i) {
        const double* c = cost.values.row(i).data();
        for (std::size_t j = 0; j < cols; ++j) scratch[j] = (v[j] - c[j]) * inv;
        u[i] = lambda * (std::log(alpha[i]) - row_lse(scratch.data(), cols, 0.0));
      }
      std::fill(colmax.begin(), colmax.end(), -std::numeric_limits<double>::infinity());
      for (std::size_t i = 0; i < rows; ++i) {
        const double* c = cost.values.row(i).data();
        for (std::size_t j = 0; j < cols; ++j) scratch[j] = (u[i] - c[j]) * inv;
        K().vmax(colmax.data(), scratch.data(), cols);
      }
      std::fill(colacc.begin(), colacc.end(), 0.0);
      for (std::size_t i = 0; i < rows; ++i) {
        const double* c = cost.values.row(i).data();
        for (std::size_t j = 0; j < cols; ++j)
          colacc[j] += std::exp((u[i] - c[j]) * inv - colmax[j]);
      }
      for (std::size_t j = 0; j < cols; ++j)
        v[j] = lambda * (std::log(beta[j]) - (colmax[j] + std::log(colacc[j])));

      // stage exit on near-feasible rows (columns are exact after the v pass)
      double dev = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        const double* c = cost.values.row(i).data();
        for (std::size_t j = 0; j < cols; ++j) scratch[j] = (u[i] + v[j] - c[j]) * inv;
        dev = std::max(dev, std::abs(std::exp(row_lse(scratch.data(), cols, 0.0)) - alpha[i]));
      }
      if (dev < 1e-8) break;
    }
  }
  const double inv = 1.0 / lambda_target;
  f.assign(rows, 0.0);
  g.assign(cols, 0.0);
  for (std::size_t i = 0; i < rows; ++i) f[i] = u[i] * inv;
  for (std::size_t j = 0; j < cols; ++j) g[j] = v[j] * inv;
}

bool use_warm_start(const SolverConfig& cfg) { return cfg.lambda < 0.5; }

}  // namespace

TransportPlan sinkhorn_bregman(const CostMatrix& cost, const MarginalWeights& alpha,
                               const MarginalWeights& beta, const SolverConfig& cfg) {
  check_instance(cost, alpha, beta, cfg);
  const std::size_t rows = cost.rows(), cols = cost.cols();
  TransportPlan plan;

  if (!cfg.use_log_domain()) {
    Matrix omega = gibbs_kernel_linear(cost, cfg.lambda);
    Matrix prev = omega;
    std::vector<double> colsum(cols);
    int t = 0;
    for (t = 1; t <= cfg.max_iterations; ++t) {
      for (std::size_t i = 0; i < rows; ++i) {
        const double rs = K().sum(omega.row(i).data(), cols);
        K().scale(omega.row(i).data(), cols, alpha[i] / rs);
      }
      std::fill(colsum.begin(), colsum.end(), 0.0);
      for (std::size_t i = 0; i < rows; ++i) K().vadd(colsum.data(), omega.row(i).data(), cols);
      for (std::size_t j = 0; j < cols; ++j) colsum[j] = beta[j] / colsum[j];
      for (std::size_t i = 0; i < rows; ++i) K().vmul(omega.row(i).data(), colsum.data(), cols);

      if (relative_change(omega, prev) < cfg.convergence_tol &&
          marginal_deviation(omega, alpha, beta) < feasibility_tol(cfg)) {
        plan.converged = true;
        break;
      }
      prev = omega;
    }
    plan.iterations_used = std::min(t, cfg.max_iterations);
    plan.values = std::move(omega);
    return plan;
  }

  // Log-domain: iterate on log-plan entries, materializing only for the
  // convergence test and the final plan.
  Matrix logw(rows, cols);
  const double inv = 1.0 / cfg.lambda;
  if (use_warm_start(cfg)) {
    std::vector<double> f, g;
    warm_start_duals(cost, alpha, beta, cfg.lambda, f, g);
    for (std::size_t i = 0; i < rows; ++i) {
      const double* c = cost.values.row(i).data();
      double* l = logw.row(i).data();
      for (std::size_t j = 0; j < cols; ++j) l[j] = f[i] - c[j] * inv + g[j];
    }
  } else {
    for (std::size_t i = 0; i < rows * cols; ++i)
      logw.data()[i] = -cost.values.data()[i] * inv;
  }

  auto materialize = [&](Matrix& out) {
    for (std::size_t i = 0; i < rows * cols; ++i) out.data()[i] = std::exp(logw.data()[i]);
  };

  Matrix curr(rows, cols), prev(rows, cols);
  materialize(prev);
  std::vector<double> coladj(cols), colmax(cols), colacc(cols);
  int t = 0;
  for (t = 1; t <= cfg.max_iterations; ++t) {
    for (std::size_t i = 0; i < rows; ++i) {
      const double adj = std::log(alpha[i]) - row_lse(logw.row(i).data(), cols, 0.0);
      double* r = logw.row(i).data();
      for (std::size_t j = 0; j < cols; ++j) r[j] += adj;
    }
    std::fill(colmax.begin(), colmax.end(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < rows; ++i) K().vmax(colmax.data(), logw.row(i).data(), cols);
    std::fill(colacc.begin(), colacc.end(), 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      const double* r = logw.row(i).data();
      for (std::size_t j = 0; j < cols; ++j) colacc[j] += std::exp(r[j] - colmax[j]);
    }
    for (std::size_t j = 0; j < cols; ++j)
      coladj[j] = std::log(beta[j]) - (colmax[j] + std::log(colacc[j]));
    for (std::size_t i = 0; i < rows; ++i) K().vadd(logw.row(i).data(), coladj.data(), cols);

    materialize(curr);
    if (relative_change(curr, prev) < cfg.convergence_tol &&
        marginal_deviation(curr, alpha, beta) < feasibility_tol(cfg)) {
      plan.converged = true;
      break;
    }
    std::swap(curr, prev);
  }
  if (!plan.converged) materialize(curr);
  plan.iterations_used = std::min(t, cfg.max_iterations);
  plan.values = std::move(curr);
  return plan;
}

TransportPlan sinkhorn_matrix_scaling(const CostMatrix& cost, const MarginalWeights& alpha,
                                      const MarginalWeights& beta, const SolverConfig& cfg) {
  SinkhornState state;
  return sinkhorn_matrix_scaling(cost, alpha, beta, cfg, state);
}

TransportPlan sinkhorn_matrix_scaling(const CostMatrix& cost, const MarginalWeights& alpha,
                                      const MarginalWeights& beta, const SolverConfig& cfg,
                                      SinkhornState& state) {
  check_instance(cost, alpha, beta, cfg);
  const std::size_t rows = cost.rows(), cols = cost.cols();
  TransportPlan plan;

  if (!cfg.use_log_domain()) {
    Matrix xi = gibbs_kernel_linear(cost, cfg.lambda);
    std::vector<double> mu(rows, 1.0), theta(cols, 1.0), acc(cols);
    Matrix curr = xi;
    Matrix prev = xi;

    auto materialize = [&](Matrix& out) {
      for (std::size_t i = 0; i < rows; ++i) {
        double* r = out.row(i).data();
        const double* x = xi.row(i).data();
        for (std::size_t j = 0; j < cols; ++j) r[j] = x[j] * mu[i];
        K().vmul(r, theta.data(), cols);
      }
    };

    int t = 0;
    for (t = 1; t <= cfg.max_iterations; ++t) {
      for (std::size_t i = 0; i < rows; ++i)
        mu[i] = alpha[i] / K().dot(xi.row(i).data(), theta.data(), cols);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t i = 0; i < rows; ++i) K().axpy(acc.data(), xi.row(i).data(), mu[i], cols);
      for (std::size_t j = 0; j < cols; ++j) theta[j] = beta[j] / acc[j];

      materialize(curr);
      if (relative_change(curr, prev) < cfg.convergence_tol &&
          marginal_deviation(curr, alpha, beta) < feasibility_tol(cfg)) {
        plan.converged = true;
        break;
      }
      std::swap(curr, prev);
    }
    if (!plan.converged) materialize(curr);
    plan.iterations_used = std::min(t, cfg.max_iterations);
    plan.values = std::move(curr);
    state = SinkhornState{std::move(xi), std::move(mu), std::move(theta), false};
    return plan;
  }

  // Log-domain scaling: duals are log-potentials f, g over log-Gibbs entries.
  Matrix logxi(rows, cols);
  const double inv = 1.0 / cfg.lambda;
  for (std::size_t i = 0; i < rows * cols; ++i)
    logxi.data()[i] = -cost.values.data()[i] * inv;

  std::vector<double> f(rows, 0.0), g(cols, 0.0);
  if (use_warm_start(cfg)) warm_start_duals(cost, alpha, beta, cfg.lambda, f, g);
  std::vector<double> colmax(cols), colacc(cols), scratch(cols);
  Matrix curr(rows, cols), prev(rows, cols);

  auto materialize = [&](Matrix& out) {
    for (std::size_t i = 0; i < rows; ++i) {
      double* r = out.row(i).data();
      const double* x = logxi.row(i).data();
      for (std::size_t j = 0; j < cols; ++j) r[j] = std::exp(f[i] + x[j] + g[j]);
    }
  };
  materialize(prev);

  int t = 0;
  for (t = 1; t <= cfg.max_iterations; ++t) {
    for (std::size_t i = 0; i < rows; ++i) {
      const double* x = logxi.row(i).data();
      for (std::size_t j = 0; j < cols; ++j) scratch[j] = x[j] + g[j];
      f[i] = std::log(alpha[i]) - row_lse(scratch.data(), cols, 0.0);
    }
    std::fill(colmax.begin(), colmax.end(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < rows; ++i) {
      const double* x = logxi.row(i).data();
      for (std::size_t j = 0; j < cols; ++j) scratch[j] = x[j] + f[i];
      K().vmax(colmax.data(), scratch.data(), cols);
    }
    std::fill(colacc.begin(), colacc.end(), 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      const double* x = logxi.row(i).data();
      for (std::size_t j = 0; j < cols; ++j) colacc[j] += std::exp(x[j] + f[i] - colmax[j]);
    }
    for (std::size_t j = 0; j < cols; ++j)
      g[j] = std::log(beta[j]) - (colmax[j] + std::log(colacc[j]));

    materialize(curr);
    if (relative_change(curr, prev) < cfg.convergence_tol &&
        marginal_deviation(curr, alpha, beta) < feasibility_tol(cfg)) {
      plan.converged = true;
      break;
    }
    std::swap(curr, prev);
  }
  if (!plan.converged) materialize(curr);
  plan.iterations_used = std::min(t, cfg.max_iterations);
  plan.values = std::move(curr);
  state = SinkhornState{std::move(logxi), std::move(f), std::move(g), true};
  return plan;
}

}  // namespace sinkmatch
