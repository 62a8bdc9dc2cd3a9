#include "anntune/index_io.hpp"

#include <zlib.h>

#include <array>
#include <cstring>
#include <fstream>
#include <string>

#include "anntune/errors.hpp"

namespace anntune {

namespace {

constexpr std::array<char, 8> kMagic = {'A', 'N', 'N', 'T', 'I', 'D', 'X', '\0'};
constexpr std::size_t kHeaderBytes = 8 + 4 + 4 + 8 + 4 * 5 + 4;

std::uint32_t crc_of(const std::vector<char>& bytes, std::size_t begin, std::size_t len) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large sections.
  std::size_t done = 0;
  while (done < len) {
    const std::size_t chunk = std::min<std::size_t>(len - done, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + begin + done),
                static_cast<uInt>(chunk));
    done += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

class Writer {
 public:
  template <typename T>
  void put(const T& v) {
    const char* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }
  template <typename T>
  void put_array(std::span<const T> values) {
    const char* p = reinterpret_cast<const char*>(values.data());
    buf_.insert(buf_.end(), p, p + values.size_bytes());
  }
  void put_bytes(const std::string& s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
  std::vector<char>& bytes() { return buf_; }

 private:
  std::vector<char> buf_;
};

void append_section(Writer& out, const char (&tag)[5], Writer& payload) {
  out.put_bytes(std::string(tag, 4));
  const std::vector<char>& body = payload.bytes();
  out.put(static_cast<std::uint64_t>(body.size()));
  out.put(crc_of(body, 0, body.size()));
  out.bytes().insert(out.bytes().end(), body.begin(), body.end());
}

class Reader {
 public:
  Reader(const std::vector<char>& bytes, std::size_t begin, std::size_t end, std::string section)
      : bytes_(bytes), pos_(begin), end_(end), section_(std::move(section)) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  template <typename T>
  std::vector<T> get_array(std::size_t n) {
    if (n > (end_ - pos_) / sizeof(T)) fail("array length exceeds section size");
    std::vector<T> v(n);
    std::memcpy(v.data(), bytes_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    return v;
  }
  std::string rest() {
    std::string s(bytes_.data() + pos_, bytes_.data() + end_);
    pos_ = end_;
    return s;
  }
  void expect_end() const {
    if (pos_ != end_) fail("trailing bytes");
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("index section " + section_ + ": " + what);
  }

 private:
  void need(std::size_t n) const {
    if (end_ - pos_ < n) fail("truncated");
  }
  const std::vector<char>& bytes_;
  std::size_t pos_;
  std::size_t end_;
  std::string section_;
};

}  // namespace

void save_pipeline(const Pipeline& pipeline, const nlohmann::json& meta,
                   const std::filesystem::path& path) {
  const GraphIndex& index = pipeline.index;
  const VectorSet& base = index.base();

  std::vector<std::pair<const char*, Writer>> sections;
  {
    Writer w;
    w.put_array(base.values());
    sections.emplace_back("VECS", std::move(w));
  }
  if (base.has_ids()) {
    Writer w;
    w.put_array(std::span<const NodeId>(*base.ids()));
    sections.emplace_back("IDS ", std::move(w));
  }
  {
    Writer w;
    w.put_array(index.offsets());
    w.put_array(index.flat_neighbors());
    sections.emplace_back("ADJ ", std::move(w));
  }
  if (pipeline.pca) {
    const PcaModel& pca = *pipeline.pca;
    Writer w;
    w.put(static_cast<std::uint64_t>(pca.d0()));
    w.put(static_cast<std::uint64_t>(pca.d()));
    w.put_array(pca.mean());
    w.put_array(pca.basis());
    w.put_array(pca.eigenvalues());
    sections.emplace_back("PCA ", std::move(w));
  }
  if (pipeline.selector) {
    const EntryPointSelector& sel = *pipeline.selector;
    Writer w;
    w.put(static_cast<std::uint64_t>(sel.num_clusters()));
    w.put(static_cast<std::uint64_t>(sel.dim()));
    w.put_array(sel.means());
    w.put_array(sel.centroid_ids());
    sections.emplace_back("SEL ", std::move(w));
  }
  {
    Writer w;
    w.put_bytes(meta.dump());
    sections.emplace_back("META", std::move(w));
  }

  Writer out;
  out.put_array(std::span<const char>(kMagic));
  out.put(kIndexFormatVersion);
  out.put(static_cast<std::uint32_t>(sections.size()));
  out.put(static_cast<std::uint64_t>(base.count()));
  out.put(static_cast<std::uint32_t>(base.dim()));
  out.put(static_cast<std::uint32_t>(index.max_degree()));
  out.put(static_cast<std::uint32_t>(index.default_entry()));
  out.put(static_cast<std::uint32_t>(index.entry_point()));
  out.put(index.repaired_edges());
  out.put(crc_of(out.bytes(), 0, out.bytes().size()));
  for (auto& [tag, w] : sections) {
    char t[5] = {};
    std::memcpy(t, tag, 4);
    append_section(out, t, w);
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file.write(out.bytes().data(), static_cast<std::streamsize>(out.bytes().size()));
  file.flush();
  if (!file) throw IoError("write failed: " + path.string());
}

LoadedPipeline load_pipeline(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary | std::ios::ate);
  if (!file) throw IoError("cannot open " + path.string());
  std::vector<char> bytes(static_cast<std::size_t>(file.tellg()));
  file.seekg(0);
  if (!file.read(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw IoError("read failed: " + path.string());
  }

  Reader header(bytes, 0, std::min(bytes.size(), kHeaderBytes), "header");
  if (bytes.size() < kHeaderBytes) header.fail("truncated");
  std::array<char, 8> magic{};
  for (char& c : magic) c = header.get<char>();
  if (magic != kMagic) header.fail("bad magic");
  const auto version = header.get<std::uint32_t>();
  if (version != kIndexFormatVersion) {
    header.fail("unsupported version " + std::to_string(version));
  }
  const auto section_count = header.get<std::uint32_t>();
  const auto count = header.get<std::uint64_t>();
  const auto dim = header.get<std::uint32_t>();
  const auto max_degree = header.get<std::uint32_t>();
  const auto default_entry = header.get<std::uint32_t>();
  const auto entry = header.get<std::uint32_t>();
  const auto repaired = header.get<std::uint32_t>();
  const auto header_crc = header.get<std::uint32_t>();
  if (crc_of(bytes, 0, kHeaderBytes - 4) != header_crc) header.fail("checksum mismatch");

  std::vector<float> values;
  std::optional<std::vector<NodeId>> ids;
  std::vector<std::uint64_t> offsets;
  std::vector<NodeId> neighbors;
  std::optional<PcaModel> pca;
  std::optional<EntryPointSelector> selector;
  nlohmann::json meta = nlohmann::json::object();
  bool saw_vecs = false;
  bool saw_adj = false;

  std::size_t pos = kHeaderBytes;
  for (std::uint32_t s = 0; s < section_count; ++s) {
    const std::string where = "#" + std::to_string(s);
    if (bytes.size() - pos < 16) {
      throw FormatError("index section " + where + ": truncated section header");
    }
    const std::string tag(bytes.data() + pos, 4);
    std::uint64_t len = 0;
    std::uint32_t crc = 0;
    std::memcpy(&len, bytes.data() + pos + 4, 8);
    std::memcpy(&crc, bytes.data() + pos + 12, 4);
    pos += 16;
    if (len > bytes.size() - pos) {
      throw FormatError("index section " + tag + ": truncated payload");
    }
    if (crc_of(bytes, pos, len) != crc) {
      throw FormatError("index section " + tag + ": checksum mismatch");
    }
    Reader r(bytes, pos, pos + len, tag);
    if (tag == "VECS") {
      values = r.get_array<float>(count * dim);
      saw_vecs = true;
    } else if (tag == "IDS ") {
      ids = r.get_array<NodeId>(count);
    } else if (tag == "ADJ ") {
      offsets = r.get_array<std::uint64_t>(count + 1);
      if (offsets.back() > (len - (count + 1) * 8) / sizeof(NodeId)) r.fail("edge count exceeds section");
      neighbors = r.get_array<NodeId>(offsets.back());
      saw_adj = true;
    } else if (tag == "PCA ") {
      const auto d0 = r.get<std::uint64_t>();
      const auto d = r.get<std::uint64_t>();
      if (d == 0 || d > d0 || d != dim) r.fail("inconsistent dimensions");
      auto mean = r.get_array<float>(d0);
      auto basis = r.get_array<float>(d0 * d);
      auto eig = r.get_array<float>(d);
      pca.emplace(std::move(mean), std::move(basis), std::move(eig), d0, d);
    } else if (tag == "SEL ") {
      const auto k = r.get<std::uint64_t>();
      const auto sdim = r.get<std::uint64_t>();
      if (k == 0 || sdim != dim) r.fail("inconsistent dimensions");
      auto means = r.get_array<float>(k * sdim);
      auto cids = r.get_array<NodeId>(k);
      for (NodeId c : cids) {
        if (c >= count) r.fail("centroid id out of range");
      }
      selector.emplace(k, sdim, std::move(means), std::move(cids));
    } else if (tag == "META") {
      try {
        meta = nlohmann::json::parse(r.rest());
      } catch (const nlohmann::json::exception& e) {
        r.fail(std::string("bad JSON: ") + e.what());
      }
    } else {
      r.fail("unknown section tag");
    }
    r.expect_end();
    pos += len;
  }
  if (pos != bytes.size()) throw FormatError("index: trailing bytes after last section");
  if (!saw_vecs) throw FormatError("index section VECS: missing");
  if (!saw_adj) throw FormatError("index section ADJ : missing");

  LoadedPipeline out;
  try {
    VectorSet base(count, dim, std::move(values), std::move(ids));
    out.pipeline.index = GraphIndex(std::move(base), std::move(offsets), std::move(neighbors),
                                    max_degree, default_entry, repaired);
    if (entry != default_entry) out.pipeline.index.set_entry_point(entry);
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("index section VECS: ") + e.what());
  }
  out.pipeline.pca = std::move(pca);
  out.pipeline.selector = std::move(selector);
  out.meta = std::move(meta);
  return out;
}

}  // namespace anntune
