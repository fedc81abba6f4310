#pragma once

#include <span>

#include "cady/model/model.hpp"

namespace cady::model {

/// Sum over outputs of the batch mean of (mu - y)^2 exp(-lv) + lv.
/// target is (n x batch) in normalized delta units.
ad::Var gaussian_nll(const CadyModel::TapeOutputs& out, ad::Var target);

/// gaussian_nll plus kBoundPenalty * sum(max_lv - min_lv).
ad::Var nll_loss(const CadyModel::TapeParams& params, const CadyModel::TapeOutputs& out,
                 ad::Var target);

/// Tape-free value of gaussian_nll for a single sample.
double gaussian_nll(const GaussianPrediction& pred, std::span<const double> target);

}  // namespace cady::model
