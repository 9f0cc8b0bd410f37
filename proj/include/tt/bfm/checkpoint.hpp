#ifndef TT_BFM_CHECKPOINT_HPP_
#define TT_BFM_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tt/bfm/model.hpp"

namespace tt::bfm {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

struct TensorInfo {
  std::string name;
  std::vector<int> shape;
  bool operator==(const TensorInfo&) const = default;
};

// Text header of a checkpoint file:
//
//   tt-checkpoint 1
//   kind <kind>
//   config <key> <value>
//   meta <key> <value>
//   tensor <name> <dim>...
//   hash <16 hex digits>      FNV-1a 64 of the blob
//   end
//
// followed by the blob: every tensor as little-endian float32, in order.
struct Manifest {
  std::string kind;
  KeyValues config;
  KeyValues metadata;
  std::vector<TensorInfo> tensors;
  std::uint64_t hash = 0;

  const std::string* config_value(const std::string& key) const;
  const std::string* meta_value(const std::string& key) const;
};

std::uint64_t fnv1a64(std::span<const unsigned char> bytes);

using ParamList = std::vector<const num::Parameter<float>*>;
ParamList param_list(const num::ParamSet<float>& params);

// The blob of a parameter set, in parameter order.
std::vector<unsigned char> serialize_values(const ParamList& params);
std::vector<unsigned char> serialize_values(const num::ParamSet<float>& params);
std::uint64_t parameter_hash(const ParamList& params);
std::uint64_t parameter_hash(const num::ParamSet<float>& params);

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const KeyValues& config, const KeyValues& metadata,
                     const ParamList& params);
void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const KeyValues& config, const KeyValues& metadata,
                     const num::ParamSet<float>& params);

struct LoadedCheckpoint {
  Manifest manifest;
  std::vector<num::Tensor<float>> tensors;
};

// CheckpointError on malformed files, HashMismatchError when the blob does
// not match the recorded hash.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);
void print_manifest(std::ostream& os, const Manifest& manifest);

// Copies loaded tensors into `params` by name; ShapeMismatchError when a
// name is missing or a shape differs.
void assign_tensors(num::ParamSet<float>& params, const LoadedCheckpoint& ckpt);
// Fills every parameter in `params` from the tensor of the same name; tensors
// the list does not mention are ignored.
void assign_by_name(const std::vector<num::Parameter<float>*>& params,
                    const LoadedCheckpoint& ckpt);

KeyValues bfm_config_entries(const BfmConfig& cfg);
BfmConfig bfm_config_from(const Manifest& manifest);

void save_bfm(const std::filesystem::path& path, const Bfm<float>& model,
              const KeyValues& metadata = {});
// If `expected` is given, its sizes must match the manifest
// (ShapeMismatchError otherwise).
Bfm<float> load_bfm(const std::filesystem::path& path, const BfmConfig* expected = nullptr);

}  // namespace tt::bfm

#endif  // TT_BFM_CHECKPOINT_HPP_
