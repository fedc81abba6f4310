#pragma once

#include <filesystem>
#include <optional>

#include "cady/causal/edge_probs.hpp"
#include "cady/model/model.hpp"

namespace cady::model {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  CadyModel model;
  std::optional<causal::EdgeProbMatrix> edge_probs;
};

/// JSON container: spec, named tensors, normalizer and optional edge
/// probabilities with their checksum. Doubles round-trip bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const CadyModel& model,
                     const causal::EdgeProbMatrix* edge_probs = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string checkpoint_to_string(const CadyModel& model, const causal::EdgeProbMatrix* edge_probs);
Checkpoint checkpoint_from_string(const std::string& text);

}  // namespace cady::model
