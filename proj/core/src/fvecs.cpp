#include "anntune/fvecs.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "anntune/errors.hpp"

namespace anntune {

static_assert(std::endian::native == std::endian::little,
              "fvecs I/O assumes a little-endian host");

VectorSet load_fvecs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.empty()) return VectorSet{};

  std::size_t offset = 0;
  std::size_t dim = 0;
  std::size_t record = 0;
  std::vector<float> values;
  while (offset < bytes.size()) {
    ++record;
    if (bytes.size() - offset < sizeof(std::int32_t)) {
      throw FormatError(path.string() + ": truncated dimension header at byte offset " +
                        std::to_string(offset));
    }
    std::int32_t d = 0;
    std::memcpy(&d, bytes.data() + offset, sizeof d);
    if (d <= 0) {
      throw FormatError(path.string() + ": non-positive dimension " + std::to_string(d) +
                        " at byte offset " + std::to_string(offset));
    }
    if (record == 1) {
      dim = static_cast<std::size_t>(d);
    } else if (static_cast<std::size_t>(d) != dim) {
      throw FormatError(path.string() + ": record " + std::to_string(record) + " declares dim " +
                        std::to_string(d) + " but record 1 declared dim " + std::to_string(dim));
    }
    offset += sizeof d;
    const std::size_t payload = dim * sizeof(float);
    if (bytes.size() - offset < payload) {
      throw FormatError(path.string() + ": record " + std::to_string(record) +
                        " truncated at byte offset " + std::to_string(offset));
    }
    const std::size_t at = values.size();
    values.resize(at + dim);
    std::memcpy(values.data() + at, bytes.data() + offset, payload);
    offset += payload;
  }
  return VectorSet(record, dim, std::move(values));
}

void save_fvecs(const VectorSet& vs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const auto d = static_cast<std::int32_t>(vs.dim());
  for (std::size_t i = 0; i < vs.count(); ++i) {
    out.write(reinterpret_cast<const char*>(&d), sizeof d);
    auto r = vs.row(i);
    out.write(reinterpret_cast<const char*>(r.data()),
              static_cast<std::streamsize>(r.size() * sizeof(float)));
  }
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace anntune
