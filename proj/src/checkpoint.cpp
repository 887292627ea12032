#include "apex/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "apex/error.hpp"

namespace apex {
namespace {

constexpr char kMagic[8] = {'A', 'P', 'E', 'X', 'C', 'K', 'P', '1'};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ConfigError("checkpoint truncated");
  return v;
}

void write_string(std::ostream& out, const std::string& s) {
  write_pod<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  uint32_t n = read_pod<uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw ConfigError("checkpoint truncated");
  return s;
}

}  // namespace

int64_t Checkpoint::require_int(const std::string& key) const {
  auto it = ints.find(key);
  if (it == ints.end()) throw ConfigError("checkpoint missing field: " + key);
  return it->second;
}

const std::vector<double>& Checkpoint::require_array(
    const std::string& key) const {
  auto it = arrays.find(key);
  if (it == arrays.end()) throw ConfigError("checkpoint missing array: " + key);
  return it->second;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof kMagic);
  write_pod<uint32_t>(out, static_cast<uint32_t>(ck.arrays.size()));
  for (const auto& [name, data] : ck.arrays) {
    write_string(out, name);
    write_pod<uint64_t>(out, data.size());
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  write_pod<uint32_t>(out, static_cast<uint32_t>(ck.ints.size()));
  for (const auto& [name, v] : ck.ints) {
    write_string(out, name);
    write_pod<int64_t>(out, v);
  }
  write_pod<uint32_t>(out, static_cast<uint32_t>(ck.strings.size()));
  for (const auto& [name, v] : ck.strings) {
    write_string(out, name);
    write_string(out, v);
  }
  if (!out) throw ConfigError("write failed for checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ConfigError("not a checkpoint file: " + path);
  }
  Checkpoint ck;
  uint32_t n_arrays = read_pod<uint32_t>(in);
  for (uint32_t i = 0; i < n_arrays; ++i) {
    std::string name = read_string(in);
    uint64_t count = read_pod<uint64_t>(in);
    std::vector<double> data(count);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw ConfigError("checkpoint truncated");
    ck.arrays.emplace(std::move(name), std::move(data));
  }
  uint32_t n_ints = read_pod<uint32_t>(in);
  for (uint32_t i = 0; i < n_ints; ++i) {
    std::string name = read_string(in);
    ck.ints.emplace(std::move(name), read_pod<int64_t>(in));
  }
  uint32_t n_strings = read_pod<uint32_t>(in);
  for (uint32_t i = 0; i < n_strings; ++i) {
    std::string name = read_string(in);
    ck.strings.emplace(std::move(name), read_string(in));
  }
  return ck;
}

void pack_mlp(Checkpoint& ck, const std::string& prefix, const MlpParams& p) {
  ck.ints[prefix + ".input_dim"] = p.spec.input_dim;
  ck.ints[prefix + ".output_dim"] = p.spec.output_dim;
  std::vector<double> hidden(p.spec.hidden.begin(), p.spec.hidden.end());
  ck.arrays[prefix + ".hidden"] = hidden;
  for (size_t l = 0; l < p.weights.size(); ++l) {
    std::ostringstream w, b;
    w << prefix << ".w" << l;
    b << prefix << ".b" << l;
    ck.arrays[w.str()] = p.weights[l].d;
    ck.arrays[b.str()] = p.biases[l];
  }
}

MlpParams unpack_mlp(const Checkpoint& ck, const std::string& prefix) {
  MlpParams p;
  p.spec.input_dim = static_cast<int>(ck.require_int(prefix + ".input_dim"));
  p.spec.output_dim = static_cast<int>(ck.require_int(prefix + ".output_dim"));
  p.spec.hidden.clear();
  for (double h : ck.require_array(prefix + ".hidden")) {
    p.spec.hidden.push_back(static_cast<int>(h));
  }
  int layers = p.spec.num_layers();
  p.weights.resize(layers);
  p.biases.resize(layers);
  for (int l = 0; l < layers; ++l) {
    std::ostringstream w, b;
    w << prefix << ".w" << l;
    b << prefix << ".b" << l;
    const auto& wd = ck.require_array(w.str());
    p.weights[l].resize(p.spec.layer_in(l), p.spec.layer_out(l));
    if (wd.size() != p.weights[l].size()) {
      throw ConfigError("checkpoint weight shape mismatch: " + w.str());
    }
    p.weights[l].d = wd;
    p.biases[l] = ck.require_array(b.str());
    if (static_cast<int>(p.biases[l].size()) != p.spec.layer_out(l)) {
      throw ConfigError("checkpoint bias shape mismatch: " + b.str());
    }
  }
  return p;
}

void pack_adam(Checkpoint& ck, const std::string& prefix, const AdamState& a) {
  ck.ints[prefix + ".step_count"] = a.step_count;
  ck.arrays[prefix + ".hyper"] = {a.lr, a.beta1, a.beta2, a.eps};
  for (size_t i = 0; i < a.m.size(); ++i) {
    std::ostringstream m, v;
    m << prefix << ".m" << i;
    v << prefix << ".v" << i;
    ck.arrays[m.str()] = a.m[i];
    ck.arrays[v.str()] = a.v[i];
  }
}

AdamState unpack_adam(const Checkpoint& ck, const std::string& prefix,
                      const MlpParams& shape) {
  AdamState a;
  a.init(shape);
  a.step_count = ck.require_int(prefix + ".step_count");
  const auto& hyper = ck.require_array(prefix + ".hyper");
  if (hyper.size() != 4) throw ConfigError("bad optimizer hyper block");
  a.lr = hyper[0];
  a.beta1 = hyper[1];
  a.beta2 = hyper[2];
  a.eps = hyper[3];
  for (size_t i = 0; i < a.m.size(); ++i) {
    std::ostringstream m, v;
    m << prefix << ".m" << i;
    v << prefix << ".v" << i;
    const auto& md = ck.require_array(m.str());
    const auto& vd = ck.require_array(v.str());
    if (md.size() != a.m[i].size() || vd.size() != a.v[i].size()) {
      throw ConfigError("optimizer moment shape mismatch");
    }
    a.m[i] = md;
    a.v[i] = vd;
  }
  return a;
}

void pack_rng(Checkpoint& ck, const std::string& prefix, const Rng& rng) {
  auto s = rng.state();
  for (int i = 0; i < 4; ++i) {
    ck.ints[prefix + ".s" + std::to_string(i)] = std::bit_cast<int64_t>(s[i]);
  }
}

Rng unpack_rng(const Checkpoint& ck, const std::string& prefix) {
  std::array<uint64_t, 4> s{};
  for (int i = 0; i < 4; ++i) {
    s[i] = std::bit_cast<uint64_t>(
        ck.require_int(prefix + ".s" + std::to_string(i)));
  }
  Rng rng;
  rng.set_state(s);
  return rng;
}

}  // namespace apex
