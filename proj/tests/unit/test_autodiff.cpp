#include <cmath>
#include <random>

#include "cady/autodiff/adam.hpp"
#include "cady/autodiff/graph.hpp"
#include "doctest.h"

using namespace cady::ad;

namespace {

Graph square_graph() {
  return [](Tape&, std::span<const Var> in) { return std::vector<Var>{in[0] * in[0]}; };
}

// Random 2-layer tanh MLP with a softplus head; weights are inputs too so the
// check covers parameter gradients.
struct RandomMlp {
  std::vector<Tensor> inputs;  // x, W1, b1, W2, b2
  Graph graph;
};

RandomMlp random_mlp(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(1, 5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t in = dim(rng), hidden = dim(rng), out = dim(rng), batch = dim(rng);
  auto rnd = [&](std::size_t r, std::size_t c) {
    Tensor t(r, c);
    for (double& v : t.storage()) v = u(rng);
    return t;
  };
  RandomMlp m;
  m.inputs = {rnd(in, batch), rnd(hidden, in), rnd(hidden, 1), rnd(out, hidden), rnd(out, 1)};
  m.graph = [](Tape&, std::span<const Var> v) {
    Var h = tanh(add(matmul(v[1], v[0]), v[2]));
    Var y = softplus(add(matmul(v[3], h), v[4]));
    return std::vector<Var>{mean(square(y))};
  };
  return m;
}

}  // namespace

TEST_CASE("forward_eval: analytic values") {
  const Tensor x3 = Tensor::scalar(3.0);
  CHECK(forward_eval(square_graph(), std::span(&x3, 1)).output()[0] == 9.0);

  const Tensor zero = Tensor::scalar(0.0);
  Graph sp = [](Tape&, std::span<const Var> in) { return std::vector<Var>{softplus(in[0])}; };
  CHECK(forward_eval(sp, std::span(&zero, 1)).output()[0] == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  // 1x2 linear layer W=[[1,2]], b=[0.5], x=[1,1] -> 3.5
  const std::vector<Tensor> in{Tensor(1, 2, {1.0, 2.0}), Tensor::scalar(0.5), Tensor::column({1.0, 1.0})};
  Graph lin = [](Tape&, std::span<const Var> v) { return std::vector<Var>{add(matmul(v[0], v[2]), v[1])}; };
  CHECK(forward_eval(lin, in).output()[0] == 3.5);
}

TEST_CASE("forward_eval: shape mismatch names the primitive") {
  const std::vector<Tensor> in{Tensor(2, 3), Tensor(2, 3)};
  Graph bad = [](Tape&, std::span<const Var> v) { return std::vector<Var>{matmul(v[0], v[1])}; };
  try {
    (void)forward_eval(bad, in);
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("matmul") != std::string::npos);
    CHECK(msg.find("(2x3)") != std::string::npos);
  }
  Graph bad_add = [](Tape&, std::span<const Var> v) { return std::vector<Var>{add(v[0], v[1])}; };
  const std::vector<Tensor> in2{Tensor(2, 3), Tensor(3, 1)};
  CHECK_THROWS_WITH_AS(forward_eval(bad_add, in2), doctest::Contains("add"), std::invalid_argument);
}

TEST_CASE("checked mode rejects non-finite values") {
  CHECK_THROWS(Tensor::checked(1, 1, {std::nan("")}));
  Tape t;
  t.set_checked(true);
  Var x = t.input(Tensor::scalar(-1.0));
  CHECK_THROWS_WITH_AS(log(x), doctest::Contains("log"), std::domain_error);
}

TEST_CASE("backward: analytic gradients") {
  const Tensor x3 = Tensor::scalar(3.0);
  auto ev = forward_eval(square_graph(), std::span(&x3, 1));
  CHECK(backward(ev, Tensor::scalar(1.0))[0][0] == 6.0);

  const std::vector<Tensor> xy{Tensor::scalar(2.0), Tensor::scalar(5.0)};
  Graph prod = [](Tape&, std::span<const Var> v) { return std::vector<Var>{v[0] * v[1]}; };
  auto ev2 = forward_eval(prod, xy);
  auto g = backward(ev2, Tensor::scalar(1.0));
  CHECK(g[0][0] == 5.0);
  CHECK(g[1][0] == 2.0);

  CHECK_THROWS_AS(backward(ev2, Tensor(2, 1)), std::invalid_argument);
}

TEST_CASE("backward: tanh gradient matches a central-difference oracle") {
  // Oracle: (tanh(0.5+h) - tanh(0.5-h)) / 2h with h = 1e-5 -> 0.786448...
  const double h = 1e-5;
  const double oracle = (std::tanh(0.5 + h) - std::tanh(0.5 - h)) / (2 * h);
  CHECK(oracle == doctest::Approx(0.78645).epsilon(1e-5));

  const Tensor x = Tensor::scalar(0.5);
  Graph g = [](Tape&, std::span<const Var> v) { return std::vector<Var>{tanh(v[0])}; };
  auto ev = forward_eval(g, std::span(&x, 1));
  CHECK(backward(ev, Tensor::scalar(1.0))[0][0] == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("every primitive passes the gradient check") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.3, 1.5);
  auto rnd = [&](std::size_t r, std::size_t c) {
    Tensor t(r, c);
    for (double& v : t.storage()) v = u(rng);
    return t;
  };
  const std::vector<Tensor> in{rnd(3, 4), rnd(3, 1), rnd(1, 4), rnd(1, 1)};
  const Tensor mask(3, 1, {1.0, 0.0, 1.0});
  Graph g = [mask](Tape&, std::span<const Var> v) {
    Var a = v[0] - v[1];
    Var b = mul(a, v[2]) + v[3];
    Var c = exp(scale(b, 0.3)) + log(add(square(v[0]), v[3]));
    Var d = max_const(c, 1.7) - min_const(-c, -2.5) + mask_mul(tanh(c), mask);
    Var e = slice_row(softplus(d), 1);
    return std::vector<Var>{sum(e) + mean(neg(d))};
  };
  CHECK(finite_diff_check(g, in, 1e-6) < 1e-6);
}

TEST_CASE("finite_diff_check examples") {
  const Tensor x3 = Tensor::scalar(3.0);
  CHECK(finite_diff_check(square_graph(), std::span(&x3, 1), 1e-5) < 1e-6);

  Graph constant = [](Tape& t, std::span<const Var>) { return std::vector<Var>{t.constant(Tensor::scalar(4.0))}; };
  CHECK(finite_diff_check(constant, std::span(&x3, 1), 1e-5) == 0.0);

  CHECK_THROWS(finite_diff_check(square_graph(), std::span(&x3, 1), 0.0));
}

TEST_CASE("property: gradient check on random 2-layer MLPs") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const RandomMlp m = random_mlp(seed);
    CAPTURE(seed);
    CHECK(finite_diff_check(m.graph, m.inputs, 1e-5) < 1e-4);
  }
}

TEST_CASE("property: determinism and linearity of backward") {
  const RandomMlp m = random_mlp(42);
  auto ev1 = forward_eval(m.graph, m.inputs);
  auto ev2 = forward_eval(m.graph, m.inputs);
  CHECK(ev1.output() == ev2.output());
  const auto g1 = backward(ev1, Tensor::scalar(1.0));
  const auto g2 = backward(ev2, Tensor::scalar(1.0));
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g1[i] == g2[i]);

  // grad(a f + b g) == a grad f + b grad g, with g = sum(x^2).
  const double a = 1.7, b = -0.4;
  Graph f = m.graph;
  Graph gg = [](Tape&, std::span<const Var> v) { return std::vector<Var>{sum(square(v[0]))}; };
  Graph combo = [&](Tape& t, std::span<const Var> v) {
    Var fv = f(t, v)[0];
    Var gv = gg(t, v)[0];
    return std::vector<Var>{scale(fv, a) + scale(gv, b)};
  };
  const auto gf = backward(forward_eval(f, m.inputs), Tensor::scalar(1.0));
  const auto gs = backward(forward_eval(gg, m.inputs), Tensor::scalar(1.0));
  const auto gc = backward(forward_eval(combo, m.inputs), Tensor::scalar(1.0));
  for (std::size_t t = 0; t < gc.size(); ++t) {
    for (std::size_t i = 0; i < gc[t].size(); ++i) {
      CHECK(std::abs(gc[t][i] - (a * gf[t][i] + b * gs[t][i])) < 1e-10);
    }
  }
}

TEST_CASE("adam_step") {
  SUBCASE("first step with unit gradient moves each entry by -lr") {
    // t=1: m_hat = g = 1, v_hat = g^2 = 1 -> delta = -lr * 1 / (1 + 1e-8)
    std::vector<Tensor> p{Tensor(2, 2, 0.25)};
    const std::vector<Tensor> g{Tensor(2, 2, 1.0)};
    AdamState s(p);
    adam_step(p, g, s);
    for (double v : p[0].data()) CHECK(v - 0.25 == doctest::Approx(-3e-3 / (1.0 + 1e-8)).epsilon(1e-9));
    CHECK(s.step() == 1);
  }
  SUBCASE("zero gradient leaves parameters unchanged") {
    std::vector<Tensor> p{Tensor(3, 1, 0.7)};
    const std::vector<Tensor> g{Tensor(3, 1, 0.0)};
    AdamState s(p);
    adam_step(p, g, s);
    CHECK(p[0] == Tensor(3, 1, 0.7));
  }
  SUBCASE("constant gradient: second step no larger than the first") {
    std::vector<Tensor> p{Tensor::scalar(0.0)};
    const std::vector<Tensor> g{Tensor::scalar(0.37)};
    AdamState s(p);
    adam_step(p, g, s);
    const double d1 = std::abs(p[0][0]);
    const double before = p[0][0];
    adam_step(p, g, s);
    const double d2 = std::abs(p[0][0] - before);
    CHECK(d2 <= d1 * (1.0 + 1e-9));
    CHECK(s.step() == 2);
  }
  SUBCASE("shape mismatch throws") {
    std::vector<Tensor> p{Tensor(2, 1)};
    const std::vector<Tensor> g{Tensor(1, 2)};
    AdamState s(p);
    CHECK_THROWS_AS(adam_step(p, g, s), std::invalid_argument);
  }
}
