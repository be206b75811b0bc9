#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgnn/common.hpp"

namespace sgnn {

// Flat binary container of named double matrices.
//
// Layout: the 8 bytes "SGNNCKPT", a little-endian uint32 format version, a
// little-endian uint64 header length, the JSON header, then the matrix
// payloads as little-endian row-major doubles. The header lists every
// matrix as {name, rows, cols, offset} (offset in bytes from the start of
// the payload) next to a free-form "meta" object.
struct NamedMatrix {
  std::string name;
  Matrix value;
};

struct Container {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedMatrix> matrices;

  // Throws kParse if no matrix has this name.
  const Matrix& get(const std::string& name) const;
};

inline constexpr std::uint32_t kContainerVersion = 1;

void write_container(const std::string& path, const Container& c);
Container read_container(const std::string& path);

}  // namespace sgnn
