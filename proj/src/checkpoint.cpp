#include "sgnn/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace sgnn {

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'G', 'N', 'N', 'C', 'K', 'P', 'T'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.put(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
  }
}

template <typename T>
T get_le(std::istream& in, const std::string& path) {
  static_assert(std::is_integral_v<T>);
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == EOF) fail(ErrorCode::kParse, "'" + path + "' is truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return static_cast<T>(v);
}

void put_double(std::string& buf, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) {
    buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

double get_double(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

const Matrix& Container::get(const std::string& name) const {
  for (const auto& m : matrices) {
    if (m.name == name) return m.value;
  }
  fail(ErrorCode::kParse, "container has no matrix named '" + name + "'");
}

void write_container(const std::string& path, const Container& c) {
  nlohmann::json header;
  header["meta"] = c.meta;
  header["matrices"] = nlohmann::json::array();
  std::string payload;
  for (const auto& m : c.matrices) {
    header["matrices"].push_back({{"name", m.name},
                                  {"rows", m.value.rows()},
                                  {"cols", m.value.cols()},
                                  {"offset", payload.size()}});
    for (Index i = 0; i < m.value.rows(); ++i) {
      for (Index j = 0; j < m.value.cols(); ++j) put_double(payload, m.value(i, j));
    }
  }
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kContainerVersion);
  put_le<std::uint64_t>(out, head.size());
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  out.flush();
  if (!out) fail(ErrorCode::kIo, "write to '" + path + "' failed");
}

Container read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "'");
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) {
    fail(ErrorCode::kParse, "'" + path + "' is not a checkpoint container");
  }
  const auto version = get_le<std::uint32_t>(in, path);
  if (version != kContainerVersion) {
    fail(ErrorCode::kParse, "'" + path + "' has unsupported container version " +
                                std::to_string(version));
  }
  const auto head_len = get_le<std::uint64_t>(in, path);
  std::string head(head_len, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head_len));
  if (!in) fail(ErrorCode::kParse, "'" + path + "' is truncated");
  const std::string payload((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());

  Container c;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(head);
    c.meta = header.at("meta");
    for (const auto& entry : header.at("matrices")) {
      NamedMatrix m;
      m.name = entry.at("name").get<std::string>();
      const auto rows = entry.at("rows").get<Index>();
      const auto cols = entry.at("cols").get<Index>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      if (rows < 0 || cols < 0 ||
          offset + 8ull * static_cast<std::uint64_t>(rows * cols) > payload.size()) {
        fail(ErrorCode::kParse, "matrix '" + m.name + "' in '" + path +
                                    "' lies outside the payload");
      }
      m.value.resize(rows, cols);
      const auto* p = reinterpret_cast<const unsigned char*>(payload.data()) + offset;
      for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j, p += 8) m.value(i, j) = get_double(p);
      }
      c.matrices.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, "bad container header in '" + path + "': " + e.what());
  }
  return c;
}

}  // namespace sgnn
