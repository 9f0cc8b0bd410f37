#include "tt/bfm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace tt::bfm {
namespace {

constexpr const char* kMagic = "tt-checkpoint 1";

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

std::string join(const std::vector<int>& v) {
  if (v.empty()) return "-";
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  if (s == "-") return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

const std::string* lookup(const KeyValues& kv, const std::string& key) {
  for (const auto& [k, v] : kv) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::size_t element_count(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

Manifest parse_manifest(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw CheckpointError(path.string() + ": not a checkpoint file");
  }
  Manifest m;
  bool have_hash = false;
  while (std::getline(in, line)) {
    if (line == "end") {
      if (!have_hash) throw CheckpointError(path.string() + ": manifest has no hash");
      return m;
    }
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "kind") {
      ls >> m.kind;
    } else if (tag == "config" || tag == "meta") {
      std::string key, value;
      ls >> key;
      std::getline(ls >> std::ws, value);
      (tag == "config" ? m.config : m.metadata).emplace_back(key, value);
    } else if (tag == "tensor") {
      TensorInfo t;
      ls >> t.name;
      int d = 0;
      while (ls >> d) {
        if (d < 0) throw CheckpointError(path.string() + ": negative dimension");
        t.shape.push_back(d);
      }
      m.tensors.push_back(std::move(t));
    } else if (tag == "hash") {
      std::string hex;
      ls >> hex;
      m.hash = std::stoull(hex, nullptr, 16);
      have_hash = true;
    } else {
      throw CheckpointError(path.string() + ": unexpected manifest line '" + line + "'");
    }
  }
  throw CheckpointError(path.string() + ": truncated manifest");
}

}  // namespace

const std::string* Manifest::config_value(const std::string& key) const {
  return lookup(config, key);
}

const std::string* Manifest::meta_value(const std::string& key) const {
  return lookup(metadata, key);
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ParamList param_list(const num::ParamSet<float>& params) {
  ParamList out;
  for (const auto& p : params) out.push_back(&p);
  return out;
}

std::vector<unsigned char> serialize_values(const ParamList& params) {
  std::vector<unsigned char> out;
  for (const auto* p : params) {
    for (float v : p->value.values()) {
      const std::uint32_t bits = to_little_endian(std::bit_cast<std::uint32_t>(v));
      unsigned char b[4];
      std::memcpy(b, &bits, 4);
      out.insert(out.end(), b, b + 4);
    }
  }
  return out;
}

std::vector<unsigned char> serialize_values(const num::ParamSet<float>& params) {
  return serialize_values(param_list(params));
}

std::uint64_t parameter_hash(const ParamList& params) {
  return fnv1a64(serialize_values(params));
}

std::uint64_t parameter_hash(const num::ParamSet<float>& params) {
  return fnv1a64(serialize_values(params));
}

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const KeyValues& config, const KeyValues& metadata,
                     const num::ParamSet<float>& params) {
  save_checkpoint(path, kind, config, metadata, param_list(params));
}

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const KeyValues& config, const KeyValues& metadata,
                     const ParamList& params) {
  const std::vector<unsigned char> blob = serialize_values(params);
  std::ostringstream head;
  head << kMagic << '\n' << "kind " << kind << '\n';
  for (const auto& [k, v] : config) head << "config " << k << ' ' << v << '\n';
  for (const auto& [k, v] : metadata) head << "meta " << k << ' ' << v << '\n';
  for (const auto* p : params) {
    head << "tensor " << p->name;
    for (int d : p->value.shape()) head << ' ' << d;
    head << '\n';
  }
  head << "hash " << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(blob) << '\n'
       << "end\n";
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("cannot write " + path.string());
  const std::string h = head.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  if (!out) throw CheckpointError("write failed for " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  return parse_manifest(in, path);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  LoadedCheckpoint out;
  out.manifest = parse_manifest(in, path);
  std::size_t total = 0;
  for (const auto& t : out.manifest.tensors) total += element_count(t.shape);
  std::vector<unsigned char> blob(total * 4);
  in.read(reinterpret_cast<char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  if (static_cast<std::size_t>(in.gcount()) != blob.size()) {
    throw CheckpointError(path.string() + ": blob is shorter than the manifest declares");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw CheckpointError(path.string() + ": trailing bytes after the blob");
  }
  const std::uint64_t h = fnv1a64(blob);
  if (h != out.manifest.hash) {
    std::ostringstream os;
    os << path.string() << ": content hash mismatch (manifest " << std::hex
       << out.manifest.hash << ", blob " << h << ")";
    throw HashMismatchError(os.str());
  }
  std::size_t off = 0;
  for (const auto& t : out.manifest.tensors) {
    num::Tensor<float> tensor(t.shape);
    for (float& v : tensor.values()) {
      std::uint32_t bits;
      std::memcpy(&bits, blob.data() + off, 4);
      v = std::bit_cast<float>(to_little_endian(bits));
      off += 4;
    }
    out.tensors.push_back(std::move(tensor));
  }
  return out;
}

void print_manifest(std::ostream& os, const Manifest& m) {
  os << "kind " << m.kind << '\n';
  for (const auto& [k, v] : m.config) os << "config " << k << ' ' << v << '\n';
  for (const auto& [k, v] : m.metadata) os << "meta " << k << ' ' << v << '\n';
  for (const auto& t : m.tensors) {
    os << "tensor " << t.name;
    for (int d : t.shape) os << ' ' << d;
    os << '\n';
  }
  os << "hash " << std::hex << std::setw(16) << std::setfill('0') << m.hash << std::dec << '\n';
}

void assign_tensors(num::ParamSet<float>& params, const LoadedCheckpoint& ckpt) {
  if (ckpt.tensors.size() != params.size()) {
    throw ShapeMismatchError("checkpoint holds " + std::to_string(ckpt.tensors.size()) +
                             " tensors, model expects " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < ckpt.tensors.size(); ++i) {
    const TensorInfo& info = ckpt.manifest.tensors[i];
    num::Parameter<float>* p = params.find(info.name);
    if (!p) throw ShapeMismatchError("model has no tensor named " + info.name);
    if (p->value.shape() != info.shape) {
      throw ShapeMismatchError("tensor " + info.name + ": checkpoint shape " +
                               num::Tensor<float>::shape_string(info.shape) + ", model shape " +
                               num::Tensor<float>::shape_string(p->value.shape()));
    }
    p->value = ckpt.tensors[i];
  }
}

void assign_by_name(const std::vector<num::Parameter<float>*>& params,
                    const LoadedCheckpoint& ckpt) {
  for (num::Parameter<float>* p : params) {
    bool found = false;
    for (std::size_t i = 0; i < ckpt.tensors.size(); ++i) {
      const TensorInfo& info = ckpt.manifest.tensors[i];
      if (info.name != p->name) continue;
      if (info.shape != p->value.shape()) {
        throw ShapeMismatchError("tensor " + info.name + ": checkpoint shape " +
                                 num::Tensor<float>::shape_string(info.shape) +
                                 ", model shape " + p->value.shape_string());
      }
      p->value = ckpt.tensors[i];
      found = true;
      break;
    }
    if (!found) throw ShapeMismatchError("checkpoint has no tensor named " + p->name);
  }
}

KeyValues bfm_config_entries(const BfmConfig& c) {
  return {{"d_model", std::to_string(c.d_model)},
          {"layers", std::to_string(c.layers)},
          {"heads", std::to_string(c.heads)},
          {"ff_width", std::to_string(c.ff_width)},
          {"state_hidden", join(c.state_hidden)},
          {"pose_hidden", join(c.pose_hidden)},
          {"activation", std::string(num::activation_name(c.activation))},
          {"action_dim", std::to_string(c.action_dim)},
          {"log_std_init", fmt(c.log_std_init)},
          {"goal_slots", std::to_string(c.goal_slots)},
          {"keep_prob", fmt(c.keep_prob)},
          {"full_view_prob", fmt(c.full_view_prob)}};
}

BfmConfig bfm_config_from(const Manifest& m) {
  auto get = [&](const std::string& key) -> const std::string& {
    const std::string* v = m.config_value(key);
    if (!v) throw CheckpointError("manifest lacks config key " + key);
    return *v;
  };
  BfmConfig c;
  try {
    c.d_model = std::stoi(get("d_model"));
    c.layers = std::stoi(get("layers"));
    c.heads = std::stoi(get("heads"));
    c.ff_width = std::stoi(get("ff_width"));
    c.state_hidden = split_ints(get("state_hidden"));
    c.pose_hidden = split_ints(get("pose_hidden"));
    c.activation = num::parse_activation(get("activation"));
    c.action_dim = std::stoi(get("action_dim"));
    c.log_std_init = std::stod(get("log_std_init"));
    c.goal_slots = std::stoi(get("goal_slots"));
    c.keep_prob = std::stod(get("keep_prob"));
    c.full_view_prob = std::stod(get("full_view_prob"));
  } catch (const std::logic_error& e) {
    throw CheckpointError(std::string("malformed bfm config in manifest: ") + e.what());
  }
  return c;
}

void save_bfm(const std::filesystem::path& path, const Bfm<float>& model,
              const KeyValues& metadata) {
  save_checkpoint(path, "bfm", bfm_config_entries(model.config()), metadata, model.params());
}

Bfm<float> load_bfm(const std::filesystem::path& path, const BfmConfig* expected) {
  LoadedCheckpoint ckpt = load_checkpoint(path);
  if (ckpt.manifest.kind != "bfm") {
    throw CheckpointError(path.string() + ": expected a bfm checkpoint, found '" +
                          ckpt.manifest.kind + "'");
  }
  const BfmConfig cfg = bfm_config_from(ckpt.manifest);
  if (expected) {
    const bool same = expected->d_model == cfg.d_model && expected->layers == cfg.layers &&
                      expected->heads == cfg.heads && expected->ff_width == cfg.ff_width &&
                      expected->state_hidden == cfg.state_hidden &&
                      expected->pose_hidden == cfg.pose_hidden &&
                      expected->action_dim == cfg.action_dim;
    if (!same) {
      throw ShapeMismatchError(path.string() + ": manifest d_model " +
                               std::to_string(cfg.d_model) + " / layers " +
                               std::to_string(cfg.layers) +
                               " does not match the configured model (d_model " +
                               std::to_string(expected->d_model) + ", layers " +
                               std::to_string(expected->layers) + ")");
    }
  }
  Bfm<float> model(cfg, 0);
  assign_tensors(model.params(), ckpt);
  return model;
}

}  // namespace tt::bfm
