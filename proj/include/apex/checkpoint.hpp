#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "apex/adam.hpp"
#include "apex/mlp.hpp"
#include "apex/rng.hpp"

namespace apex {

// Versioned binary container of named arrays/integers/strings with exact
// (bit-level) round-trip of all values.
struct Checkpoint {
  std::map<std::string, std::vector<double>> arrays;
  std::map<std::string, int64_t> ints;
  std::map<std::string, std::string> strings;

  int64_t require_int(const std::string& key) const;
  const std::vector<double>& require_array(const std::string& key) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// Namespaced packing of the core training objects.
void pack_mlp(Checkpoint& ck, const std::string& prefix, const MlpParams& p);
MlpParams unpack_mlp(const Checkpoint& ck, const std::string& prefix);
void pack_adam(Checkpoint& ck, const std::string& prefix, const AdamState& a);
AdamState unpack_adam(const Checkpoint& ck, const std::string& prefix,
                      const MlpParams& shape);
void pack_rng(Checkpoint& ck, const std::string& prefix, const Rng& rng);
Rng unpack_rng(const Checkpoint& ck, const std::string& prefix);

}  // namespace apex
