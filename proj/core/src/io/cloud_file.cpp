#include "pbseg/io/cloud_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "json_convert.hpp"

namespace pbseg::io {
namespace {

using detail::malformed;

constexpr std::string_view kMagic{"PBCLOUD\0", 8};
constexpr std::string_view kEndMarker{"PBEND\0\0\0", 8};

enum ColumnFlag : std::uint32_t {
  kHasScores = 1u << 0,
  kHasOffsets = 1u << 1,
  kHasGtInstance = 1u << 2,
  kHasGtSemantic = 1u << 3,
};
constexpr std::uint32_t kKnownFlags = 0xF;

class Writer {
 public:
  void bytes(std::string_view b) { out_.append(b); }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void i32(std::int32_t v) { le(static_cast<std::uint32_t>(v)); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  std::string& out() { return out_; }

 private:
  template <class U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    std::string_view b = in_.substr(pos_, n);
    pos_ += n;
    return b;
  }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  std::int32_t i32() { return static_cast<std::int32_t>(le<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) malformed("cloud file truncated");
  }
  template <class U>
  U le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }
  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string encode_cloud(const CloudDocument& doc) {
  const LabeledCloud& c = doc.cloud;
  c.validate(doc.catalog);
  const std::size_t n = c.size();
  std::uint32_t flags = 0;
  if (!c.semantic_scores.empty()) flags |= kHasScores;
  if (!c.offsets.empty()) flags |= kHasOffsets;
  if (c.gt_instance) flags |= kHasGtInstance;
  if (c.gt_semantic) flags |= kHasGtSemantic;

  const detail::Json header = {{"catalog", detail::to_json(doc.catalog)},
                               {"provenance", detail::to_json(doc.provenance)}};
  const std::string header_text = header.dump();

  Writer w;
  w.bytes(kMagic);
  w.u32(kCloudFormatVersion);
  w.u32(flags);
  w.u64(n);
  w.u64(header_text.size());
  w.bytes(header_text);
  for (const Point3& p : c.points) {
    w.f64(p.x);
    w.f64(p.y);
    w.f64(p.z);
  }
  for (ClassId s : c.semantic) w.i32(s);
  if (flags & kHasScores) {
    for (double s : c.semantic_scores) w.f64(s);
  }
  if (flags & kHasOffsets) {
    for (const Point3& o : c.offsets) {
      w.f64(o.x);
      w.f64(o.y);
      w.f64(o.z);
    }
  }
  if (flags & kHasGtInstance) {
    for (InstanceId g : *c.gt_instance) w.i32(g);
  }
  if (flags & kHasGtSemantic) {
    for (ClassId g : *c.gt_semantic) w.i32(g);
  }
  w.bytes(kEndMarker);
  w.u64(fnv1a64(w.out()));
  return std::move(w.out());
}

CloudDocument decode_cloud(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < kMagic.size() || r.bytes(kMagic.size()) != kMagic) {
    malformed("not a pbseg cloud file (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kCloudFormatVersion) {
    malformed("unsupported cloud format version " + std::to_string(version));
  }
  const std::uint32_t flags = r.u32();
  if (flags & ~kKnownFlags) malformed("unknown column flags");
  const std::uint64_t n = r.u64();
  const std::uint64_t header_len = r.u64();
  if (header_len > r.remaining()) malformed("cloud file truncated in header");
  const detail::Json header =
      detail::parse_json(r.bytes(static_cast<std::size_t>(header_len)), "cloud header");

  CloudDocument doc;
  detail::guarded("cloud header", [&] {
    detail::expect_keys(header, "cloud header", {"catalog", "provenance"});
    doc.catalog = detail::catalog_from_json(header.at("catalog"));
    doc.provenance = detail::provenance_from_json(header.at("provenance"));
    return 0;
  });
  const std::uint64_t classes = doc.catalog.size();

  // Exact body size check before allocating anything proportional to n.
  std::uint64_t per_point = 24 + 4;
  if (flags & kHasScores) per_point += 8 * classes;
  if (flags & kHasOffsets) per_point += 24;
  if (flags & kHasGtInstance) per_point += 4;
  if (flags & kHasGtSemantic) per_point += 4;
  const std::uint64_t trailer = kEndMarker.size() + 8;
  if (n > (UINT64_MAX - trailer) / per_point || n * per_point + trailer != r.remaining()) {
    malformed("cloud file size does not match its point count");
  }

  LabeledCloud& c = doc.cloud;
  c.points.resize(n);
  for (Point3& p : c.points) {
    p.x = r.f64();
    p.y = r.f64();
    p.z = r.f64();
  }
  c.semantic.resize(n);
  for (ClassId& s : c.semantic) s = r.i32();
  if (flags & kHasScores) {
    c.semantic_scores.resize(n * classes);
    for (double& s : c.semantic_scores) s = r.f64();
  }
  if (flags & kHasOffsets) {
    c.offsets.resize(n);
    for (Point3& o : c.offsets) {
      o.x = r.f64();
      o.y = r.f64();
      o.z = r.f64();
    }
  }
  if (flags & kHasGtInstance) {
    c.gt_instance.emplace(n);
    for (InstanceId& g : *c.gt_instance) g = r.i32();
  }
  if (flags & kHasGtSemantic) {
    c.gt_semantic.emplace(n);
    for (ClassId& g : *c.gt_semantic) g = r.i32();
  }
  const std::size_t body_end = r.position();
  if (r.bytes(kEndMarker.size()) != kEndMarker) malformed("cloud file end marker missing");
  const std::uint64_t stored = r.u64();
  if (stored != fnv1a64(bytes.substr(0, body_end + kEndMarker.size()))) {
    malformed("cloud file checksum mismatch");
  }
  try {
    c.validate(doc.catalog);
  } catch (const Error& e) {
    malformed(std::string("cloud file content invalid: ") + e.what());
  }
  return doc;
}

std::uint64_t cloud_checksum(std::string_view encoded) {
  if (encoded.size() < 8) malformed("cloud file truncated");
  Reader r(encoded.substr(encoded.size() - 8));
  return r.u64();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed for '" + path.string() + "'");
  return std::move(ss).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorCode::kIo, "write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot move output into place at '" + path.string() + "'");
  }
}

void write_cloud_file(const std::filesystem::path& path, const CloudDocument& doc) {
  write_file_atomic(path, encode_cloud(doc));
}

CloudDocument read_cloud_file(const std::filesystem::path& path) {
  return decode_cloud(read_file(path));
}

}  // namespace pbseg::io
