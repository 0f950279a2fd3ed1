#include "sybilreg/regression.hpp"

#include <cmath>
#include <string>

#include "sybilreg/error.hpp"

namespace sybilreg {
namespace {

constexpr double kMinRcond = 1e-12;

struct NormalEquations {
  Eigen::MatrixXd xtwx;
  Eigen::VectorXd xtwy;
};

// W restricted to one block is (diag - offdiag) I + offdiag 11', so its
// contribution splits into a per-row scale and a rank-one term on the
// member column sums.
Eigen::VectorXd row_scales(const BlockWeights& w) {
  Eigen::VectorXd c = Eigen::VectorXd::Ones(w.size());
  for (const auto& b : w.blocks()) {
    for (Index i : b.members) c(i) = b.diag - b.offdiag;
  }
  return c;
}

NormalEquations accumulate(const Dataset& ds, const BlockWeights& w, const Eigen::VectorXd& c) {
  const Eigen::MatrixXd cx = ds.X.array().colwise() * c.array();
  NormalEquations ne{cx.transpose() * ds.X, cx.transpose() * ds.y};
  const Index p = ds.n_params();
  for (const auto& b : w.blocks()) {
    if (b.offdiag == 0.0) continue;
    Eigen::VectorXd xs = Eigen::VectorXd::Zero(p);
    double ys = 0.0;
    for (Index i : b.members) {
      xs += ds.X.row(i).transpose();
      ys += ds.y(i);
    }
    ne.xtwx.noalias() += b.offdiag * (xs * xs.transpose());
    ne.xtwy.noalias() += (b.offdiag * ys) * xs;
  }
  return ne;
}

double quadratic_form(const BlockWeights& w, const Eigen::VectorXd& c, const Eigen::VectorXd& r) {
  double q = (c.array() * r.array().square()).sum();
  for (const auto& b : w.blocks()) {
    if (b.offdiag == 0.0) continue;
    double rs = 0.0;
    for (Index i : b.members) rs += r(i);
    q += b.offdiag * rs * rs;
  }
  return q;
}

FitResult solve(const Dataset& ds, const NormalEquations& ne) {
  const Index p = ds.n_params();
  Eigen::LLT<Eigen::MatrixXd> llt(ne.xtwx);
  if (llt.info() != Eigen::Success || !(llt.rcond() >= kMinRcond)) {
    throw Error(ErrorCode::RankDeficientDesign,
                "X'WX is singular or ill-conditioned (reciprocal condition below 1e-12)");
  }
  FitResult fit;
  fit.beta = llt.solve(ne.xtwy);
  fit.cov_beta = llt.solve(Eigen::MatrixXd::Identity(p, p));
  fit.meta.n_used = ds.n_obs();
  fit.meta.residual_dof = ds.n_obs() - p;
  return fit;
}

void finish(FitResult& fit, double rwr) {
  const Index dof = fit.meta.residual_dof;
  fit.sigma2_hat = dof > 0 ? std::max(0.0, rwr) / static_cast<double>(dof) : 0.0;
  fit.cov_beta *= fit.sigma2_hat;
  fit.cov_beta = 0.5 * (fit.cov_beta + fit.cov_beta.transpose());
  fit.se = fit.cov_beta.diagonal().cwiseMax(0.0).cwiseSqrt();
  if (dof == 0) fit.meta.notes.emplace_back("N == p: exact interpolation, residual variance undefined and reported as 0");
}

}  // namespace

FitResult weighted_fit(const Dataset& ds, const WeightMatrix& w) {
  validate_dataset(ds);
  const Index n = ds.n_obs();
  if (weight_size(w) != n) {
    throw Error(ErrorCode::DimensionMismatch, "weight matrix is " + std::to_string(weight_size(w)) +
                                                  " x " + std::to_string(weight_size(w)) +
                                                  " but the dataset has " + std::to_string(n) +
                                                  " rows");
  }

  if (const auto* bw = std::get_if<BlockWeights>(&w)) {
    const Eigen::VectorXd c = row_scales(*bw);
    FitResult fit = solve(ds, accumulate(ds, *bw, c));
    const Eigen::VectorXd r = ds.y - ds.X * fit.beta;
    finish(fit, quadratic_form(*bw, c, r));
    fit.meta.estimator = "weighted";
    return fit;
  }

  const Eigen::MatrixXd& wm = std::get<DenseWeights>(w).matrix;
  if (!wm.isApprox(wm.transpose(), 1e-12) && !(wm - wm.transpose()).isZero(1e-12)) {
    throw Error(ErrorCode::InvalidWeights, "weight matrix is not symmetric");
  }
  const Eigen::MatrixXd xtw = ds.X.transpose() * wm;
  FitResult fit = solve(ds, {xtw * ds.X, xtw * ds.y});
  const Eigen::VectorXd r = ds.y - ds.X * fit.beta;
  finish(fit, r.dot(wm * r));
  fit.meta.estimator = "weighted";
  return fit;
}

FitResult ols_fit(const Dataset& ds) {
  FitResult fit = weighted_fit(ds, BlockWeights(ds.n_obs(), {}));
  fit.meta.estimator = "ols";
  fit.meta.sigma2_convention = "residual sum of squares / (N - p)";
  return fit;
}

}  // namespace sybilreg
