#include "pbseg/io/ply.hpp"

#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

#include "json_convert.hpp"

namespace pbseg::io {
namespace {

using detail::malformed;

void put_real(std::string& out, double v) {
  char buf[32];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  out.append(buf, static_cast<std::size_t>(len));
}

double parse_real(std::string_view tok) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    malformed("PLY: bad number '" + std::string(tok) + "'");
  }
  return v;
}

std::int32_t parse_int(std::string_view tok) {
  std::int32_t v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    // Some writers emit integral labels as reals.
    const double d = parse_real(tok);
    if (d != static_cast<double>(static_cast<std::int32_t>(d))) {
      malformed("PLY: bad integer '" + std::string(tok) + "'");
    }
    return static_cast<std::int32_t>(d);
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

class Lines {
 public:
  explicit Lines(std::string_view text) : text_(text) {}
  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    return true;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_ply(const CloudDocument& doc) {
  const LabeledCloud& c = doc.cloud;
  c.validate(doc.catalog);
  const std::size_t classes = doc.catalog.size();
  const bool scores = !c.semantic_scores.empty();
  const bool offsets = !c.offsets.empty();

  std::string out = "ply\nformat ascii 1.0\n";
  out += "comment pbseg_catalog " + detail::to_json(doc.catalog).dump() + "\n";
  out += "comment pbseg_provenance " + detail::to_json(doc.provenance).dump() + "\n";
  out += "element vertex " + std::to_string(c.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\nproperty int semantic\n";
  if (scores) {
    for (std::size_t k = 0; k < classes; ++k) {
      out += "property double score_" + std::to_string(k) + "\n";
    }
  }
  if (offsets) out += "property double offset_x\nproperty double offset_y\nproperty double offset_z\n";
  if (c.gt_instance) out += "property int gt_instance\n";
  if (c.gt_semantic) out += "property int gt_semantic\n";
  out += "end_header\n";

  for (std::size_t i = 0; i < c.size(); ++i) {
    put_real(out, c.points[i].x);
    out += ' ';
    put_real(out, c.points[i].y);
    out += ' ';
    put_real(out, c.points[i].z);
    out += ' ';
    out += std::to_string(c.semantic[i]);
    if (scores) {
      for (std::size_t k = 0; k < classes; ++k) {
        out += ' ';
        put_real(out, c.semantic_scores[i * classes + k]);
      }
    }
    if (offsets) {
      for (double v : {c.offsets[i].x, c.offsets[i].y, c.offsets[i].z}) {
        out += ' ';
        put_real(out, v);
      }
    }
    if (c.gt_instance) out += ' ' + std::to_string((*c.gt_instance)[i]);
    if (c.gt_semantic) out += ' ' + std::to_string((*c.gt_semantic)[i]);
    out += '\n';
  }
  return out;
}

CloudDocument decode_ply(std::string_view text) {
  Lines lines(text);
  std::string_view line;
  if (!lines.next(line) || line != "ply") malformed("PLY: missing 'ply' magic");
  if (!lines.next(line) || split(line) != std::vector<std::string_view>{"format", "ascii", "1.0"}) {
    malformed("PLY: only 'format ascii 1.0' is supported");
  }

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
  };
  std::vector<Element> elements;
  CloudDocument doc;
  bool have_catalog = false;
  for (;;) {
    if (!lines.next(line)) malformed("PLY: header not terminated");
    const auto tok = split(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "comment" || tok[0] == "obj_info") {
      constexpr std::string_view kCatalog = "comment pbseg_catalog ";
      constexpr std::string_view kProvenance = "comment pbseg_provenance ";
      if (line.starts_with(kCatalog)) {
        doc.catalog =
            detail::catalog_from_json(detail::parse_json(line.substr(kCatalog.size()), "PLY catalog"));
        have_catalog = true;
      } else if (line.starts_with(kProvenance)) {
        doc.provenance = detail::provenance_from_json(
            detail::parse_json(line.substr(kProvenance.size()), "PLY provenance"));
      }
    } else if (tok[0] == "element") {
      if (tok.size() != 3) malformed("PLY: bad element line");
      Element e;
      e.name = std::string(tok[1]);
      e.count = static_cast<std::size_t>(parse_int(tok[2]));
      elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (elements.empty()) malformed("PLY: property before element");
      if (tok.size() < 3) malformed("PLY: bad property line");
      if (tok[1] == "list") {
        if (elements.back().name == "vertex") malformed("PLY: list properties on vertices");
        elements.back().properties.push_back("list");
      } else {
        elements.back().properties.push_back(std::string(tok.back()));
      }
    } else {
      malformed("PLY: unexpected header line '" + std::string(line) + "'");
    }
  }
  if (!have_catalog) malformed("PLY: missing pbseg_catalog comment");

  const std::size_t classes = doc.catalog.size();
  LabeledCloud& c = doc.cloud;
  bool seen_vertex = false;
  for (const Element& e : elements) {
    if (e.name != "vertex") {
      for (std::size_t i = 0; i < e.count; ++i) {
        if (!lines.next(line)) malformed("PLY: body truncated");
      }
      continue;
    }
    if (seen_vertex) malformed("PLY: more than one vertex element");
    seen_vertex = true;
    std::map<std::string, std::size_t, std::less<>> column;
    for (std::size_t k = 0; k < e.properties.size(); ++k) column.emplace(e.properties[k], k);
    auto find = [&](const std::string& name) -> std::optional<std::size_t> {
      auto it = column.find(name);
      if (it == column.end()) return std::nullopt;
      return it->second;
    };
    const auto x = find("x"), y = find("y"), z = find("z"), sem = find("semantic");
    if (!x || !y || !z || !sem) malformed("PLY: vertices need x, y, z and semantic");
    std::vector<std::size_t> score_cols;
    for (std::size_t k = 0; k < classes; ++k) {
      if (auto col = find("score_" + std::to_string(k))) score_cols.push_back(*col);
    }
    if (!score_cols.empty() && score_cols.size() != classes) {
      malformed("PLY: score columns do not cover the catalog");
    }
    const auto ox = find("offset_x"), oy = find("offset_y"), oz = find("offset_z");
    const bool offsets = ox && oy && oz;
    if (!offsets && (ox || oy || oz)) malformed("PLY: incomplete offset columns");
    const auto gi = find("gt_instance"), gs = find("gt_semantic");

    c.points.resize(e.count);
    c.semantic.resize(e.count);
    if (!score_cols.empty()) c.semantic_scores.resize(e.count * classes);
    if (offsets) c.offsets.resize(e.count);
    if (gi) c.gt_instance.emplace(e.count);
    if (gs) c.gt_semantic.emplace(e.count);
    for (std::size_t i = 0; i < e.count; ++i) {
      if (!lines.next(line)) malformed("PLY: body truncated");
      const auto tok = split(line);
      if (tok.size() != e.properties.size()) {
        malformed("PLY: vertex " + std::to_string(i) + " has " + std::to_string(tok.size()) +
                  " values, expected " + std::to_string(e.properties.size()));
      }
      c.points[i] = {parse_real(tok[*x]), parse_real(tok[*y]), parse_real(tok[*z])};
      c.semantic[i] = parse_int(tok[*sem]);
      for (std::size_t k = 0; k < score_cols.size(); ++k) {
        c.semantic_scores[i * classes + k] = parse_real(tok[score_cols[k]]);
      }
      if (offsets) c.offsets[i] = {parse_real(tok[*ox]), parse_real(tok[*oy]), parse_real(tok[*oz])};
      if (gi) (*c.gt_instance)[i] = parse_int(tok[*gi]);
      if (gs) (*c.gt_semantic)[i] = parse_int(tok[*gs]);
    }
  }
  if (!seen_vertex) malformed("PLY: no vertex element");
  try {
    c.validate(doc.catalog);
  } catch (const Error& e) {
    malformed(std::string("PLY content invalid: ") + e.what());
  }
  return doc;
}

void write_ply(const std::filesystem::path& path, const CloudDocument& doc) {
  write_file_atomic(path, encode_ply(doc));
}

CloudDocument read_ply(const std::filesystem::path& path) { return decode_ply(read_file(path)); }

CloudDocument read_any_cloud(const std::filesystem::path& path) {
  if (path.extension() == ".ply") return read_ply(path);
  return read_cloud_file(path);
}

}  // namespace pbseg::io
