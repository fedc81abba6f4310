#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "cady/autodiff/tape.hpp"

namespace cady::ad {

/// A composition of primitives: given leaf Vars for its inputs, records the
/// computation on the tape and returns its outputs.
using Graph = std::function<std::vector<Var>(Tape&, std::span<const Var>)>;

struct Evaluation {
  std::unique_ptr<Tape> tape;
  std::vector<Var> inputs;
  std::vector<Var> outputs;

  const Tensor& output(std::size_t i = 0) const { return outputs.at(i).value(); }
};

/// Runs `graph` on a fresh tape. Every input becomes a differentiable leaf.
Evaluation forward_eval(const Graph& graph, std::span<const Tensor> inputs);

/// Gradients of output `output_index` (seeded with `seed`) w.r.t. each input.
std::vector<Tensor> backward(const Evaluation& eval, const Tensor& seed, std::size_t output_index = 0);

/// Max over input coordinates of |autodiff - central difference| /
/// (|central difference| + 1e-8), for the gradient of sum(output 0).
double finite_diff_check(const Graph& graph, std::span<const Tensor> inputs, double h);

}  // namespace cady::ad
