#include "cady/autodiff/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cady::ad {

Evaluation forward_eval(const Graph& graph, std::span<const Tensor> inputs) {
  Evaluation ev;
  ev.tape = std::make_unique<Tape>();
  ev.inputs.reserve(inputs.size());
  for (const Tensor& t : inputs) ev.inputs.push_back(ev.tape->input(t));
  ev.outputs = graph(*ev.tape, ev.inputs);
  return ev;
}

std::vector<Tensor> backward(const Evaluation& eval, const Tensor& seed, std::size_t output_index) {
  if (output_index >= eval.outputs.size()) throw std::out_of_range("backward: no such output");
  const Gradients g = eval.tape->backward(eval.outputs[output_index], seed);
  std::vector<Tensor> out;
  out.reserve(eval.inputs.size());
  for (const Var& v : eval.inputs) out.push_back(g[v]);
  return out;
}

namespace {

double sum_output(const Graph& graph, std::span<const Tensor> inputs) {
  const Evaluation ev = forward_eval(graph, inputs);
  double s = 0.0;
  for (double v : ev.output().data()) s += v;
  return s;
}

}  // namespace

double finite_diff_check(const Graph& graph, std::span<const Tensor> inputs, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_check: h must be positive");
  const Evaluation ev = forward_eval(graph, inputs);
  const Tensor seed(ev.output().rows(), ev.output().cols(), 1.0);
  const std::vector<Tensor> analytic = backward(ev, seed);

  std::vector<Tensor> probe(inputs.begin(), inputs.end());
  double worst = 0.0;
  for (std::size_t t = 0; t < probe.size(); ++t) {
    for (std::size_t i = 0; i < probe[t].size(); ++i) {
      const double x0 = probe[t][i];
      probe[t][i] = x0 + h;
      const double fp = sum_output(graph, probe);
      probe[t][i] = x0 - h;
      const double fm = sum_output(graph, probe);
      probe[t][i] = x0;
      const double central = (fp - fm) / (2.0 * h);
      const double err = std::abs(analytic[t][i] - central) / (std::abs(central) + 1e-8);
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace cady::ad
