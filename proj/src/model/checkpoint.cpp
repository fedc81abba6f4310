#include "cady/model/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cady::model {

using json = nlohmann::json;

std::string checkpoint_to_string(const CadyModel& model, const causal::EdgeProbMatrix* edge_probs) {
  const ModelSpec& spec = model.spec();
  json j;
  j["format"] = "cady-checkpoint";
  j["version"] = kCheckpointVersion;
  j["spec"] = {{"state_dim", spec.state_dim},
               {"action_dim", spec.action_dim},
               {"hidden_size", spec.hidden_size},
               {"hidden_layers", spec.hidden_layers},
               {"activation", activation_name(spec.activation)},
               {"angle_dims", spec.angle_dims}};
  json tensors = json::array();
  for (std::size_t i = 0; i < model.parameters().size(); ++i) {
    const ad::Tensor& t = model.parameters()[i];
    tensors.push_back({{"name", model.parameter_names()[i]},
                       {"shape", t.shape_list()},
                       {"values", t.storage()}});
  }
  j["tensors"] = std::move(tensors);
  const Normalizer& n = model.normalizer();
  j["normalizer"] = {{"in_mean", n.in_mean},
                     {"in_std", n.in_std},
                     {"out_mean", n.out_mean},
                     {"out_std", n.out_std}};
  if (edge_probs) {
    j["edge_probs"] = {{"rows", edge_probs->rows()},
                       {"cols", edge_probs->cols()},
                       {"rho_min", edge_probs->rho_min()},
                       {"values", edge_probs->values()},
                       {"checksum", edge_probs->checksum()}};
  }
  return j.dump(1);
}

Checkpoint checkpoint_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("checkpoint: malformed JSON: ") + e.what());
  }
  if (j.value("format", "") != "cady-checkpoint") throw std::runtime_error("checkpoint: not a checkpoint file");
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + j.at("version").dump());
  }
  const json& js = j.at("spec");
  ModelSpec spec;
  spec.state_dim = js.at("state_dim");
  spec.action_dim = js.at("action_dim");
  spec.hidden_size = js.at("hidden_size");
  spec.hidden_layers = js.at("hidden_layers");
  spec.activation = parse_activation(js.at("activation"));
  spec.angle_dims = js.at("angle_dims").get<std::vector<std::size_t>>();

  std::vector<ad::Tensor> params;
  for (const json& t : j.at("tensors")) {
    const auto shape = t.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2) throw std::runtime_error("checkpoint: tensor shape must have 2 dims");
    params.push_back(ad::Tensor::checked(shape[0], shape[1], t.at("values").get<std::vector<double>>()));
  }
  Normalizer norm;
  const json& jn = j.at("normalizer");
  norm.in_mean = jn.at("in_mean").get<std::vector<double>>();
  norm.in_std = jn.at("in_std").get<std::vector<double>>();
  norm.out_mean = jn.at("out_mean").get<std::vector<double>>();
  norm.out_std = jn.at("out_std").get<std::vector<double>>();

  Checkpoint ck{CadyModel::from_parts(spec, std::move(params), std::move(norm)), std::nullopt};
  if (j.contains("edge_probs")) {
    const json& je = j.at("edge_probs");
    causal::EdgeProbMatrix pm(je.at("rows"), je.at("cols"), je.at("values").get<std::vector<double>>(),
                              je.at("rho_min").get<double>());
    if (pm.checksum() != je.at("checksum").get<std::uint64_t>()) {
      throw std::runtime_error("checkpoint: edge probability checksum mismatch");
    }
    ck.edge_probs = std::move(pm);
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const CadyModel& model,
                     const causal::EdgeProbMatrix* edge_probs) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write checkpoint '" + path.string() + "'");
  os << checkpoint_to_string(model, edge_probs) << '\n';
  if (!os) throw std::runtime_error("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace cady::model
