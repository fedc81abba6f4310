#include "cady/model/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace cady::model {

using ad::Var;

Var gaussian_nll(const CadyModel::TapeOutputs& out, Var target) {
  const std::size_t n = out.mean.size();
  if (n == 0 || target.shape().rows != n) {
    throw std::invalid_argument("gaussian_nll: target has " + std::to_string(target.shape().rows) +
                                " rows, expected " + std::to_string(n));
  }
  Var total;
  for (std::size_t j = 0; j < n; ++j) {
    Var err = ad::sub(out.mean[j], ad::slice_row(target, j));
    Var term = ad::mean(ad::add(ad::mul(ad::square(err), ad::exp(ad::neg(out.logvar[j]))), out.logvar[j]));
    total = j == 0 ? term : ad::add(total, term);
  }
  return total;
}

Var nll_loss(const CadyModel::TapeParams& params, const CadyModel::TapeOutputs& out, Var target) {
  const std::size_t k = params.vars.size();
  Var spread = ad::sum(ad::sub(params.vars[k - 1], params.vars[k - 2]));
  return ad::add(gaussian_nll(out, target), ad::scale(spread, kBoundPenalty));
}

double gaussian_nll(const GaussianPrediction& pred, std::span<const double> target) {
  if (pred.mean.size() != target.size() || pred.logvar.size() != target.size()) {
    throw std::invalid_argument("gaussian_nll: size mismatch");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < target.size(); ++j) {
    const double e = pred.mean[j] - target[j];
    total += e * e * std::exp(-pred.logvar[j]) + pred.logvar[j];
  }
  return total;
}

}  // namespace cady::model
