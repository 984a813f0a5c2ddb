#include "emoface/nn/archive.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "emoface/errors.hpp"

namespace emoface::nn {

namespace {

constexpr char kMagic[4] = {'E', 'F', 'C', 'K'};

std::uint64_t fnv1a(const std::uint8_t* p, std::size_t n) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

class Writer {
 public:
  template <class T>
  void pod(const T& v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    out.insert(out.end(), p, p + sizeof(T));
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes(b) {}

  template <class T>
  T pod(const char* what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  }
  std::string str(const char* what) {
    const auto n = pod<std::uint32_t>(what);
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes.data() + pos), n);
    pos += n;
    return s;
  }
  void need(std::size_t n, const char* what) const {
    if (bytes.size() - pos < n) throw FormatError(std::string("archive truncated while reading ") + what, pos);
  }

  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

}  // namespace

std::string Archive::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  return {};
}

bool Archive::has_tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return true;
  return false;
}

const Tensor& Archive::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw ConfigError("archive has no tensor named " + name);
}

std::vector<std::uint8_t> serialize_archive(const Archive& archive, std::uint32_t version) {
  Writer w;
  w.out.insert(w.out.end(), kMagic, kMagic + 4);
  w.pod(version);
  w.pod(static_cast<std::uint32_t>(archive.metadata.size()));
  for (const auto& [k, v] : archive.metadata) {
    w.str(k);
    w.str(v);
  }
  w.pod(static_cast<std::uint32_t>(archive.tensors.size()));
  for (const auto& [name, t] : archive.tensors) {
    w.str(name);
    w.pod(static_cast<std::uint32_t>(t.ndim()));
    for (int d : t.shape()) w.pod(static_cast<std::int32_t>(d));
    const auto* p = reinterpret_cast<const std::uint8_t*>(t.data());
    w.out.insert(w.out.end(), p, p + t.numel() * sizeof(float));
  }
  w.pod(fnv1a(w.out.data(), w.out.size()));
  return std::move(w.out);
}

Archive parse_archive(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("not a checkpoint archive (bad magic)", 0);
  }
  Reader r(bytes);
  r.pos = 4;
  const auto version = r.pod<std::uint32_t>("version");
  if (version != kArchiveVersion) {
    throw VersionError("checkpoint archive version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kArchiveVersion) + ")");
  }
  if (bytes.size() < 16) throw FormatError("archive truncated", bytes.size());
  const std::size_t body = bytes.size() - sizeof(std::uint64_t);
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, sizeof stored);
  if (stored != fnv1a(bytes.data(), body)) throw FormatError("archive checksum mismatch", body);
  Reader rb(bytes.first(body));
  rb.pos = r.pos;

  Archive a;
  const auto n_meta = rb.pod<std::uint32_t>("metadata count");
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = rb.str("metadata key");
    std::string v = rb.str("metadata value");
    a.metadata.emplace_back(std::move(k), std::move(v));
  }
  const auto n_tensors = rb.pod<std::uint32_t>("tensor count");
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = rb.str("tensor name");
    const std::size_t at = rb.pos;
    const auto ndim = rb.pod<std::uint32_t>("tensor rank");
    if (ndim > 8) throw FormatError("implausible tensor rank for " + name, at);
    Shape shape;
    std::size_t count = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      const auto dim = rb.pod<std::int32_t>("tensor dims");
      if (dim < 0) throw FormatError("negative dimension in " + name, rb.pos - 4);
      shape.push_back(dim);
      count *= static_cast<std::size_t>(dim);
    }
    rb.need(count * sizeof(float), "tensor data");
    std::vector<float> values(count);
    std::memcpy(values.data(), bytes.data() + rb.pos, count * sizeof(float));
    rb.pos += count * sizeof(float);
    a.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (rb.pos != body) throw FormatError("trailing bytes in archive", rb.pos);
  return a;
}

void save_archive(const std::filesystem::path& path, const Archive& archive) {
  const auto bytes = serialize_archive(archive);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write archive " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing archive " + path.string());
}

Archive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open archive " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_archive(bytes);
}

}  // namespace emoface::nn
