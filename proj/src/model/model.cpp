#include "cady/model/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cady/simd/kernels.hpp"

namespace cady::model {

using ad::Tensor;
using ad::Var;

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Softplus: return "softplus";
    case Activation::Identity: return "identity";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "softplus") return Activation::Softplus;
  if (name == "identity") return Activation::Identity;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

void ModelSpec::validate() const {
  if (state_dim < 1) throw std::invalid_argument("ModelSpec: state dimension must be >= 1");
  if (hidden_size < 1) throw std::invalid_argument("ModelSpec: decoder hidden size must be >= 1");
  if (hidden_layers < 1) throw std::invalid_argument("ModelSpec: decoder needs >= 1 hidden layer");
  for (std::size_t d : angle_dims) {
    if (d >= state_dim) throw std::invalid_argument("ModelSpec: angle dimension out of range");
  }
}

std::size_t closed_form_parameter_count(const ModelSpec& s) {
  const std::size_t l = s.input_dim(), h = s.hidden_size;
  return l * (l + 1) +
         s.state_dim * ((l + 1) * h + (s.hidden_layers - 1) * (h + 1) * h + (h + 1) * 2);
}

double bound_logvar(double raw, LogvarBounds b) {
  const double upper = b.max_lv - ad::softplus(b.max_lv - raw);
  return b.min_lv + ad::softplus(upper - b.min_lv);
}

std::vector<double> bound_logvar(std::span<const double> raw, std::span<const LogvarBounds> bounds) {
  if (raw.size() != bounds.size()) throw std::invalid_argument("bound_logvar: size mismatch");
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(bounds[i].min_lv < bounds[i].max_lv)) throw std::invalid_argument("bound_logvar: min >= max");
    out[i] = bound_logvar(raw[i], bounds[i]);
  }
  return out;
}

CadyModel CadyModel::build(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  CadyModel m;
  m.spec_ = spec;
  auto layer = [&](const std::string& name, std::size_t out, std::size_t in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> u(-bound, bound);
    Tensor w(out, in), b(out, 1);
    for (double& v : w.storage()) v = u(rng);
    for (double& v : b.storage()) v = u(rng);
    m.params_.push_back(std::move(w));
    m.names_.push_back(name + ".weight");
    m.params_.push_back(std::move(b));
    m.names_.push_back(name + ".bias");
  };
  const std::size_t l = spec.input_dim(), h = spec.hidden_size;
  layer("encoder", l, l);
  for (std::size_t j = 0; j < spec.state_dim; ++j) {
    const std::string prefix = "decoder" + std::to_string(j);
    for (std::size_t k = 0; k < spec.hidden_layers; ++k) {
      layer(prefix + ".hidden" + std::to_string(k), h, k == 0 ? l : h);
    }
    layer(prefix + ".head", 2, h);
  }
  m.params_.emplace_back(spec.state_dim, 1, kInitialLogvarBounds.min_lv);
  m.names_.push_back("min_logvar");
  m.params_.emplace_back(spec.state_dim, 1, kInitialLogvarBounds.max_lv);
  m.names_.push_back("max_logvar");
  return m;
}

CadyModel CadyModel::from_parts(const ModelSpec& spec, std::vector<Tensor> params,
                                Normalizer normalizer) {
  Rng dummy(0);
  CadyModel m = build(spec, dummy);
  if (params.size() != m.params_.size()) {
    throw std::invalid_argument("CadyModel: expected " + std::to_string(m.params_.size()) +
                                " tensors, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != m.params_[i].shape()) {
      throw std::invalid_argument("CadyModel: tensor '" + m.names_[i] + "' has shape " +
                                  ad::to_string(params[i].shape()) + ", expected " +
                                  ad::to_string(m.params_[i].shape()));
    }
  }
  m.params_ = std::move(params);
  m.normalizer_ = std::move(normalizer);
  return m;
}

std::size_t CadyModel::parameter_count() const {
  std::size_t total = 0;
  for (std::size_t i = 0; i < network_tensor_count(); ++i) total += params_[i].size();
  return total;
}

LogvarBounds CadyModel::logvar_bounds(std::size_t j) const {
  return {params_[min_lv_index()][j], params_[max_lv_index()][j]};
}

CadyModel::TapeParams CadyModel::bind(ad::Tape& tape) const {
  TapeParams p;
  p.vars.reserve(params_.size());
  for (const Tensor& t : params_) p.vars.push_back(tape.input(t));
  return p;
}

Var CadyModel::activate(Var v) const {
  switch (spec_.activation) {
    case Activation::Tanh: return ad::tanh(v);
    case Activation::Softplus: return ad::softplus(v);
    case Activation::Identity: return v;
  }
  return v;
}

Var CadyModel::encode(const TapeParams& p, Var x) const {
  return ad::add(ad::matmul(p.vars[0], x), p.vars[1]);
}

CadyModel::TapeOutputs CadyModel::decode(const TapeParams& p, Var z,
                                         const causal::CausalMask& mask) const {
  const std::size_t l = spec_.latent_dim(), n = spec_.state_dim;
  if (mask.rows() != l || mask.cols() != n) {
    throw std::invalid_argument("CadyModel: mask shape " + std::to_string(mask.rows()) + "x" +
                                std::to_string(mask.cols()) + " does not match (n+p)xn = " +
                                std::to_string(l) + "x" + std::to_string(n));
  }
  TapeOutputs out;
  Tensor column(l, 1);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < l; ++i) column[i] = mask(i, j);
    Var h = ad::mask_mul(z, column);
    const std::size_t base = dec_base(j);
    for (std::size_t k = 0; k < spec_.hidden_layers; ++k) {
      h = activate(ad::add(ad::matmul(p.vars[base + 2 * k], h), p.vars[base + 2 * k + 1]));
    }
    const std::size_t head = base + 2 * spec_.hidden_layers;
    Var o = ad::add(ad::matmul(p.vars[head], h), p.vars[head + 1]);
    Var mu = ad::slice_row(o, 0);
    Var raw = ad::slice_row(o, 1);
    Var lo = ad::slice_row(p.vars[min_lv_index()], j);
    Var hi = ad::slice_row(p.vars[max_lv_index()], j);
    Var upper = ad::add(ad::neg(ad::softplus(ad::add(ad::neg(raw), hi))), hi);
    Var lv = ad::add(ad::softplus(ad::sub(upper, lo)), lo);
    out.mean.push_back(mu);
    out.logvar.push_back(lv);
  }
  return out;
}

CadyModel::TapeOutputs CadyModel::forward(const TapeParams& p, Var x,
                                          const causal::CausalMask& mask) const {
  if (x.shape().rows != spec_.input_dim()) {
    throw std::invalid_argument("CadyModel: input has " + std::to_string(x.shape().rows) +
                                " rows, expected " + std::to_string(spec_.input_dim()));
  }
  return decode(p, encode(p, x), mask);
}

GaussianPrediction CadyModel::forward(std::span<const double> x, const causal::CausalMask& mask) const {
  if (x.size() != spec_.input_dim()) throw std::invalid_argument("CadyModel: input length mismatch");
  GaussianPrediction g;
  forward_batch(x, 1, MaskBatch{mask}, g.mean, g.logvar);
  return g;
}

namespace {

inline void bias_activate(std::vector<double>& a, const Tensor& bias, std::size_t rows,
                          std::size_t batch, Activation act) {
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = a.data() + r * batch;
    const double b = bias[r];
    switch (act) {
      case Activation::Tanh:
        for (std::size_t k = 0; k < batch; ++k) row[k] = std::tanh(row[k] + b);
        break;
      case Activation::Softplus:
        for (std::size_t k = 0; k < batch; ++k) row[k] = ad::softplus(row[k] + b);
        break;
      case Activation::Identity:
        for (std::size_t k = 0; k < batch; ++k) row[k] += b;
        break;
    }
  }
}

}  // namespace

void CadyModel::forward_batch(std::span<const double> x, std::size_t batch, const MaskBatch& masks,
                              std::vector<double>& mean, std::vector<double>& logvar) const {
  const std::size_t l = spec_.latent_dim(), n = spec_.state_dim, h = spec_.hidden_size;
  if (x.size() != l * batch) throw std::invalid_argument("forward_batch: input size mismatch");
  if (masks.size() != 1 && masks.size() != batch) {
    throw std::invalid_argument("forward_batch: need one shared mask or one per column");
  }
  for (const auto& m : masks) {
    if (m.rows() != l || m.cols() != n) throw std::invalid_argument("forward_batch: mask shape mismatch");
  }
  const auto& kt = simd::kernels();

  std::vector<double> z(l * batch, 0.0);
  kt.gemm_nn(params_[0].data().data(), x.data(), z.data(), l, l, batch);
  for (std::size_t r = 0; r < l; ++r) {
    const double b = params_[1][r];
    for (std::size_t k = 0; k < batch; ++k) z[r * batch + k] += b;
  }

  mean.assign(n * batch, 0.0);
  logvar.assign(n * batch, 0.0);
  std::vector<double> zj(l * batch), cur(h * batch), next(h * batch), head(2 * batch);
  for (std::size_t j = 0; j < n; ++j) {
    if (masks.size() == 1) {
      for (std::size_t i = 0; i < l; ++i) {
        const double m = masks[0](i, j);
        for (std::size_t k = 0; k < batch; ++k) zj[i * batch + k] = z[i * batch + k] * m;
      }
    } else {
      for (std::size_t i = 0; i < l; ++i)
        for (std::size_t k = 0; k < batch; ++k) zj[i * batch + k] = z[i * batch + k] * masks[k](i, j);
    }
    const std::size_t base = dec_base(j);
    const std::vector<double>* in = &zj;
    std::size_t in_dim = l;
    for (std::size_t layer = 0; layer < spec_.hidden_layers; ++layer) {
      std::fill(next.begin(), next.end(), 0.0);
      kt.gemm_nn(params_[base + 2 * layer].data().data(), in->data(), next.data(), h, in_dim, batch);
      bias_activate(next, params_[base + 2 * layer + 1], h, batch, spec_.activation);
      std::swap(cur, next);
      in = &cur;
      in_dim = h;
    }
    const std::size_t hw = base + 2 * spec_.hidden_layers;
    std::fill(head.begin(), head.end(), 0.0);
    kt.gemm_nn(params_[hw].data().data(), in->data(), head.data(), 2, h, batch);
    const LogvarBounds bounds = logvar_bounds(j);
    for (std::size_t k = 0; k < batch; ++k) {
      mean[j * batch + k] = head[k] + params_[hw + 1][0];
      logvar[j * batch + k] = bound_logvar(head[batch + k] + params_[hw + 1][1], bounds);
    }
  }
}

std::vector<double> predict_next_state(const CadyModel& model, std::span<const double> state,
                                       std::span<const double> action,
                                       const causal::CausalMask& mask, Rng& rng, bool sample) {
  const ModelSpec& spec = model.spec();
  if (state.size() != spec.state_dim || action.size() != spec.action_dim) {
    throw std::invalid_argument("predict_next_state: state/action length mismatch");
  }
  const Normalizer& norm = model.normalizer();
  if (!norm.fitted()) throw std::logic_error("predict_next_state: normalizer not fitted");
  std::vector<double> raw(spec.input_dim()), x(spec.input_dim());
  std::copy(state.begin(), state.end(), raw.begin());
  std::copy(action.begin(), action.end(), raw.begin() + static_cast<std::ptrdiff_t>(spec.state_dim));
  norm.normalize_input(raw, x);
  const GaussianPrediction g = model.forward(x, mask);
  std::vector<double> delta(spec.state_dim);
  for (std::size_t j = 0; j < spec.state_dim; ++j) {
    delta[j] = g.mean[j];
    if (sample) delta[j] += std::exp(0.5 * g.logvar[j]) * standard_normal(rng);
  }
  std::vector<double> out(spec.state_dim);
  norm.denormalize_delta(delta, out);
  for (std::size_t j = 0; j < spec.state_dim; ++j) out[j] += state[j];
  for (std::size_t d : spec.angle_dims) out[d] = wrap_angle(out[d]);
  return out;
}

}  // namespace cady::model
