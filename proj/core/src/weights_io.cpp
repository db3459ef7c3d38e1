#include "mcn/weights_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "mcn/error.hpp"

namespace mcn {

namespace {

constexpr char kMagic[8] = {'M', 'C', 'N', 'W', 'G', 'T', '0', '1'};
constexpr std::uint32_t kMaxNameLen = 4096;
constexpr std::uint32_t kMaxRank = 32;

void write_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char bytes[4] = {
      static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
      static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(bytes), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char bytes[4];
  in.read(reinterpret_cast<char*>(bytes), 4);
  if (!in) throw FormatError("weight file truncated");
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

void write_f32_payload(std::ostream& out, const float* data, std::int64_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(data), count * 4);
  } else {
    for (std::int64_t i = 0; i < count; ++i) {
      std::uint32_t bits;
      std::memcpy(&bits, &data[i], 4);
      write_u32(out, bits);
    }
  }
}

void read_f32_payload(std::istream& in, float* data, std::int64_t count) {
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(data), count * 4);
    if (!in) throw FormatError("weight file truncated");
  } else {
    for (std::int64_t i = 0; i < count; ++i) {
      const std::uint32_t bits = read_u32(in);
      std::memcpy(&data[i], &bits, 4);
    }
  }
}

struct EntryHeader {
  std::string name;
  Shape shape;
};

EntryHeader read_entry_header(std::istream& in) {
  EntryHeader entry;
  const std::uint32_t name_len = read_u32(in);
  if (name_len == 0 || name_len > kMaxNameLen) {
    throw FormatError("weight entry name length " + std::to_string(name_len) +
                      " out of range");
  }
  entry.name.resize(name_len);
  in.read(entry.name.data(), name_len);
  if (!in) throw FormatError("weight file truncated");
  const std::uint32_t rank = read_u32(in);
  if (rank > kMaxRank) {
    throw FormatError("weight entry '" + entry.name + "' has rank " + std::to_string(rank));
  }
  std::vector<std::int64_t> extents(rank);
  for (std::uint32_t i = 0; i < rank; ++i) {
    const std::uint32_t e = read_u32(in);
    if (e == 0) {
      throw FormatError("weight entry '" + entry.name + "' has a zero extent");
    }
    extents[i] = static_cast<std::int64_t>(e);
  }
  try {
    entry.shape = Shape(std::move(extents));
  } catch (const ShapeError& e) {
    throw FormatError("weight entry '" + entry.name + "': " + e.what());
  }
  return entry;
}

void check_magic(std::istream& in) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw FormatError("not a weight file (bad magic)");
  }
}

// Read-and-discard so truncation is detected even for the last entry
// (seeking past EOF would go unnoticed).
void skip_payload(std::istream& in, std::int64_t count) {
  char buf[4096];
  std::int64_t remaining = count * 4;
  while (remaining > 0) {
    const std::int64_t take = std::min<std::int64_t>(remaining, sizeof(buf));
    in.read(buf, take);
    if (!in) throw FormatError("weight file truncated");
    remaining -= take;
  }
}

}  // namespace

void save_weights(const Model& model, std::ostream& out) {
  const auto params = named_parameters(model);
  out.write(kMagic, 8);
  write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, tensor] : params) {
    write_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(out, static_cast<std::uint32_t>(tensor->rank()));
    for (std::int64_t i = 0; i < tensor->rank(); ++i) {
      if (tensor->extent(i) > std::numeric_limits<std::uint32_t>::max()) {
        throw ValueError("tensor extent too large for the weight format");
      }
      write_u32(out, static_cast<std::uint32_t>(tensor->extent(i)));
    }
    write_f32_payload(out, tensor->data(), tensor->numel());
  }
  if (!out) throw DataError("failed writing weight stream");
}

void save_weights(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  save_weights(model, out);
  out.flush();
  if (!out) throw DataError("failed writing '" + path + "'");
}

LoadReport load_weights(Model& model, std::istream& in, bool strict) {
  check_magic(in);
  const std::uint32_t count = read_u32(in);
  auto params = named_parameters(model);
  std::unordered_map<std::string, Tensor*> by_name;
  for (auto& [name, tensor] : params) by_name.emplace(name, tensor);

  LoadReport report;
  std::unordered_set<std::string> seen;
  std::unordered_set<std::string> applied;
  // Stage everything first so a malformed file cannot leave the model
  // half-updated.
  std::vector<std::pair<Tensor*, Tensor>> staged;
  for (std::uint32_t i = 0; i < count; ++i) {
    EntryHeader entry = read_entry_header(in);
    if (!seen.insert(entry.name).second) {
      throw FormatError("duplicate weight entry '" + entry.name + "'");
    }
    auto it = by_name.find(entry.name);
    if (it == by_name.end()) {
      if (strict) {
        throw DataError("weight entry '" + entry.name + "' has no matching model parameter");
      }
      report.skipped.emplace_back(entry.name, "no matching model parameter");
      skip_payload(in, entry.shape.numel());
      continue;
    }
    if (it->second->shape() != entry.shape) {
      if (strict) {
        throw ShapeError("weight entry '" + entry.name + "' is " + entry.shape.str() +
                         " but the model parameter is " + it->second->shape().str());
      }
      report.skipped.emplace_back(entry.name, "shape " + entry.shape.str() +
                                                  " does not match model " +
                                                  it->second->shape().str());
      skip_payload(in, entry.shape.numel());
      continue;
    }
    Tensor value(entry.shape);
    read_f32_payload(in, value.data(), value.numel());
    staged.emplace_back(it->second, std::move(value));
    applied.insert(entry.name);
  }
  for (const auto& [name, tensor] : params) {
    if (!applied.count(name)) {
      if (strict) {
        throw DataError("model parameter '" + name + "' missing from the weight file");
      }
      report.missing.push_back(name);
    }
  }
  for (auto& [dst, value] : staged) {
    *dst = std::move(value);
  }
  return report;
}

LoadReport load_weights(Model& model, const std::string& path, bool strict) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return load_weights(model, in, strict);
}

std::vector<std::pair<std::string, Shape>> read_weight_shapes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  check_magic(in);
  const std::uint32_t count = read_u32(in);
  std::vector<std::pair<std::string, Shape>> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    EntryHeader entry = read_entry_header(in);
    skip_payload(in, entry.shape.numel());
    out.emplace_back(std::move(entry.name), std::move(entry.shape));
  }
  return out;
}

}  // namespace mcn
