/*
 * Copyright (c) 2026, The shapesig Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// On-disk formats.
//
// Points: `.csv` text, one `x,y,z[,intensity]` per line (blank lines and
// lines starting with '#' are skipped), or `.bin` raw little-endian float32
// quadruples (x, y, z, intensity). Intensity is ignored on read.
//
// Annotations: a JSON document
//   {"objects": [{"id": "7", "label": "car", "center": [x, y, z],
//                 "size": {"w": 1.9, "l": 4.6, "h": 1.7}, "yaw": 0.3,
//                 "frame": "scene-0001", "points": "car7.csv", "split": "train"}]}
// `points` (resolved relative to the annotation file) and `split` are
// optional. Yaw is radians and is wrapped into [-pi, pi).
//
// Signature tables: the embedding CSV (label,dist_bucket,b0..f{k-1}) with
// trailing `id,source` columns.
//
// Prototype tables: JSON carrying the signature config and, per class, the
// averaged signature and its sample count.

#pragma once

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "shapesig/analysis.hpp"
#include "shapesig/error.hpp"
#include "shapesig/geometry.hpp"
#include "shapesig/signature.hpp"

namespace shapesig {

namespace fs = std::filesystem;

namespace detail {

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return ss.str();
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::string lower_extension(const fs::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

inline float load_le_float(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

inline void store_le_float(float f, char* p) {
  const auto bits = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) p[i] = static_cast<char>((bits >> (8 * i)) & 0xFFu);
}

}  // namespace detail

inline PointCloud3 parse_points_csv(std::string_view text) {
  PointCloud3 cloud;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    const auto line = detail::trim(text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos));
    pos = eol == std::string_view::npos ? text.size() : eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    const auto fields = detail::split(line, ',');
    if (fields.size() != 3 && fields.size() != 4) {
      throw ParseError("line " + std::to_string(line_no) + ": expected x,y,z[,intensity]", line_no);
    }
    std::array<double, 3> xyz{};
    for (std::size_t i = 0; i < 3; ++i) {
      const auto v = detail::parse_double(fields[i]);
      if (!v) throw ParseError("line " + std::to_string(line_no) + ": malformed number", line_no);
      if (!std::isfinite(*v)) {
        throw ParseError("line " + std::to_string(line_no) + ": non-finite coordinate", line_no);
      }
      xyz[i] = *v;
    }
    if (fields.size() == 4 && !detail::parse_double(fields[3])) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed intensity", line_no);
    }
    cloud.points.push_back({xyz[0], xyz[1], xyz[2]});
  }
  return cloud;
}

inline PointCloud3 parse_points_bin(std::string_view bytes) {
  constexpr std::size_t kRecord = 16;
  if (bytes.size() % kRecord != 0) {
    const auto offset = bytes.size() - bytes.size() % kRecord;
    throw ParseError("byte " + std::to_string(offset) + ": truncated float32 quadruple", offset);
  }
  PointCloud3 cloud;
  cloud.points.reserve(bytes.size() / kRecord);
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t off = 0; off < bytes.size(); off += kRecord) {
    const Point3 p{detail::load_le_float(data + off), detail::load_le_float(data + off + 4),
                   detail::load_le_float(data + off + 8)};
    if (!is_finite(p)) throw ParseError("byte " + std::to_string(off) + ": non-finite coordinate", off);
    cloud.points.push_back(p);
  }
  return cloud;
}

/// Sensor-frame points from a `.csv` or `.bin` file.
inline PointCloud3 parse_points(const fs::path& path) {
  const auto ext = detail::lower_extension(path);
  if (ext != ".csv" && ext != ".bin") throw ValidationError("unknown point file extension: " + path.string());
  const auto content = detail::read_file(path);
  return ext == ".csv" ? parse_points_csv(content) : parse_points_bin(content);
}

/// Inverse of parse_points. `.bin` stores float32 with zero intensity.
inline void write_points(const fs::path& path, const PointCloud3& cloud) {
  const auto ext = detail::lower_extension(path);
  if (ext != ".csv" && ext != ".bin") throw ValidationError("unknown point file extension: " + path.string());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  if (ext == ".csv") {
    for (const auto& p : cloud.points) {
      out << format_sig9(p.x) << ',' << format_sig9(p.y) << ',' << format_sig9(p.z) << '\n';
    }
  } else {
    std::array<char, 16> rec{};
    for (const auto& p : cloud.points) {
      detail::store_le_float(static_cast<float>(p.x), rec.data());
      detail::store_le_float(static_cast<float>(p.y), rec.data() + 4);
      detail::store_le_float(static_cast<float>(p.z), rec.data() + 8);
      detail::store_le_float(0.0f, rec.data() + 12);
      out.write(rec.data(), rec.size());
    }
  }
  out.flush();
  if (!out) throw IoError("error writing " + path.string());
}

struct AnnotationRecord {
  std::string id;
  std::string label;
  Box3D box;
  std::string frame;
  std::optional<fs::path> points;  ///< absolute, or relative to the working directory
  std::optional<std::string> split;
};

namespace detail {

inline std::string describe_record(const nlohmann::json& rec, std::size_t index) {
  if (rec.is_object() && rec.contains("id")) {
    const auto& id = rec["id"];
    return "record " + (id.is_string() ? id.get<std::string>() : id.dump());
  }
  return "record #" + std::to_string(index);
}

inline double number_field(const nlohmann::json& j, const std::string& what, const std::string& where) {
  if (!j.is_number()) throw SchemaError(where + ": field '" + what + "' must be a number");
  return j.get<double>();
}

}  // namespace detail

/// Records from an annotation document (see the file comment for the schema).
inline std::vector<AnnotationRecord> parse_annotations_text(std::string_view text, const fs::path& base_dir = {}) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("annotation document: ") + e.what(), e.byte);
  }
  if (!doc.is_object() || !doc.contains("objects") || !doc["objects"].is_array()) {
    throw SchemaError("annotation document must be an object with an 'objects' array");
  }

  std::vector<AnnotationRecord> out;
  const auto& objects = doc["objects"];
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& rec = objects[i];
    const auto where = detail::describe_record(rec, i);
    if (!rec.is_object()) throw SchemaError(where + ": not an object");
    for (const char* key : {"id", "label", "center", "size", "yaw", "frame"}) {
      if (!rec.contains(key)) throw SchemaError(where + ": missing field '" + key + "'");
    }

    AnnotationRecord r;
    const auto& id = rec["id"];
    if (id.is_string()) {
      r.id = id.get<std::string>();
    } else if (id.is_number_integer()) {
      r.id = id.dump();
    } else {
      throw SchemaError(where + ": field 'id' must be a string or integer");
    }
    if (!rec["label"].is_string() || rec["label"].get<std::string>().empty()) {
      throw SchemaError(where + ": field 'label' must be a non-empty string");
    }
    r.label = rec["label"].get<std::string>();
    if (r.label.find_first_of(",\n\r") != std::string::npos) {
      throw SchemaError(where + ": label may not contain commas or newlines");
    }
    if (!rec["frame"].is_string()) throw SchemaError(where + ": field 'frame' must be a string");
    r.frame = rec["frame"].get<std::string>();

    const auto& c = rec["center"];
    if (!c.is_array() || c.size() != 3) throw SchemaError(where + ": field 'center' must be [x, y, z]");
    const Point3 center{detail::number_field(c[0], "center", where), detail::number_field(c[1], "center", where),
                        detail::number_field(c[2], "center", where)};

    const auto& s = rec["size"];
    if (!s.is_object()) throw SchemaError(where + ": field 'size' must be {\"w\", \"l\", \"h\"}");
    BoxSize size{};
    for (const auto& [key, dst] : {std::pair<const char*, double*>{"w", &size.w}, {"l", &size.l}, {"h", &size.h}}) {
      if (!s.contains(key)) throw SchemaError(where + ": missing field 'size." + key + "'");
      *dst = detail::number_field(s[key], std::string("size.") + key, where);
      if (!(*dst > 0.0) || !std::isfinite(*dst)) {
        throw SchemaError(where + ": size." + key + " must be positive");
      }
    }
    const double yaw = detail::number_field(rec["yaw"], "yaw", where);
    if (!std::isfinite(yaw) || !is_finite(center)) throw SchemaError(where + ": non-finite box parameter");
    r.box = Box3D::make(center, size, yaw);

    if (rec.contains("points")) {
      if (!rec["points"].is_string()) throw SchemaError(where + ": field 'points' must be a path string");
      fs::path p = rec["points"].get<std::string>();
      r.points = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    }
    if (rec.contains("split")) {
      if (!rec["split"].is_string()) throw SchemaError(where + ": field 'split' must be a string");
      r.split = rec["split"].get<std::string>();
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<AnnotationRecord> parse_annotations(const fs::path& path) {
  return parse_annotations_text(detail::read_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Signature tables

struct SignatureRow {
  std::string label;
  std::string bucket;
  Signature signature;
  std::string id;
  std::string source;  ///< "computed" or "prototype"
};

struct SignatureTable {
  std::size_t k = 3;
  std::vector<SignatureRow> rows;

  LabeledSignatureSet to_set() const {
    LabeledSignatureSet set;
    for (const auto& r : rows) {
      set.signatures.push_back(r.signature);
      set.labels.push_back(r.label);
    }
    return set;
  }
};

inline void write_signature_table(std::ostream& os, const SignatureTable& table) {
  static const std::array<std::string, 2> extras{"id", "source"};
  write_embedding_header(os, table.k, extras);
  std::size_t written = 0;
  for (const auto& r : table.rows) {
    const std::array<std::string, 2> tail{r.id, r.source};
    write_embedding_row(os, r.label, r.bucket, r.signature.values, tail);
    if (!os) throw IoError("failed writing signature table", written);
    ++written;
  }
}

/// Reads any CSV whose header starts `label,dist_bucket` followed by 3k value
/// columns; `id` and `source` columns are picked up when present.
inline SignatureTable parse_signature_table_text(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto l : detail::split(text, '\n')) {
    l = detail::trim(l);
    if (!l.empty()) lines.push_back(l);
  }
  if (lines.empty()) throw ParseError("signature table is empty", 1);

  const auto header = detail::split(lines[0], ',');
  if (header.size() < 2 || detail::trim(header[0]) != "label" || detail::trim(header[1]) != "dist_bucket") {
    throw ParseError("line 1: header must start with label,dist_bucket", 1);
  }
  std::size_t n_values = 0;
  while (2 + n_values < header.size()) {
    const auto col = detail::trim(header[2 + n_values]);
    const bool is_value = col.size() >= 2 && (col[0] == 'b' || col[0] == 's' || col[0] == 'f') &&
                          std::all_of(col.begin() + 1, col.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
    if (!is_value) break;
    ++n_values;
  }
  if (n_values == 0 || n_values % 3 != 0) throw ParseError("line 1: value column count must be 3k", 1);
  std::optional<std::size_t> id_col;
  std::optional<std::size_t> source_col;
  for (std::size_t c = 2 + n_values; c < header.size(); ++c) {
    const auto name = detail::trim(header[c]);
    if (name == "id") id_col = c;
    if (name == "source") source_col = c;
  }

  SignatureTable table;
  table.k = n_values / 3;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto fields = detail::split(lines[li], ',');
    const auto line_no = li + 1;
    if (fields.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) + " fields",
                       line_no);
    }
    SignatureRow row;
    row.label = std::string(detail::trim(fields[0]));
    row.bucket = std::string(detail::trim(fields[1]));
    row.signature.k = table.k;
    for (std::size_t j = 0; j < n_values; ++j) {
      const auto v = detail::parse_double(fields[2 + j]);
      if (!v || !std::isfinite(*v)) {
        throw ParseError("line " + std::to_string(line_no) + ": bad value in column " + std::to_string(3 + j),
                         line_no);
      }
      row.signature.values.push_back(*v);
    }
    if (id_col) row.id = std::string(detail::trim(fields[*id_col]));
    if (source_col) row.source = std::string(detail::trim(fields[*source_col]));
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline SignatureTable parse_signature_table(const fs::path& path) {
  return parse_signature_table_text(detail::read_file(path));
}

// ---------------------------------------------------------------------------
// Prototype tables

namespace detail {

inline View view_from_string(const std::string& s) {
  if (s == "bird") return View::bird;
  if (s == "side") return View::side;
  if (s == "front") return View::front;
  throw SchemaError("unknown view '" + s + "'");
}

}  // namespace detail

inline nlohmann::json to_json(const SignatureConfig& cfg) {
  nlohmann::json views = nlohmann::json::array();
  for (View v : cfg.views) views.push_back(std::string(to_string(v)));
  return {{"symmetry", cfg.symmetry == SymmetryMode::planar ? "planar" : "full3d"},
          {"degree", cfg.fit.degree},
          {"k", cfg.fit.k},
          {"n_angles", cfg.n_angles},
          {"min_points", cfg.min_points},
          {"views", views},
          {"clip_to_box", cfg.clip_to_box},
          {"clip_margin", cfg.clip_margin}};
}

inline SignatureConfig config_from_json(const nlohmann::json& j) {
  try {
    SignatureConfig cfg;
    const auto sym = j.at("symmetry").get<std::string>();
    if (sym == "planar") {
      cfg.symmetry = SymmetryMode::planar;
    } else if (sym == "full3d") {
      cfg.symmetry = SymmetryMode::full3d;
    } else {
      throw SchemaError("unknown symmetry '" + sym + "'");
    }
    cfg.fit.degree = j.at("degree").get<std::size_t>();
    cfg.fit.k = j.at("k").get<std::size_t>();
    cfg.n_angles = j.at("n_angles").get<std::size_t>();
    cfg.min_points = j.at("min_points").get<std::size_t>();
    const auto& views = j.at("views");
    if (!views.is_array() || views.size() != 3) throw SchemaError("config 'views' must list three views");
    for (std::size_t i = 0; i < 3; ++i) cfg.views[i] = detail::view_from_string(views[i].get<std::string>());
    cfg.clip_to_box = j.at("clip_to_box").get<bool>();
    cfg.clip_margin = j.at("clip_margin").get<double>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("signature config: ") + e.what());
  }
}

inline nlohmann::json to_json(const PrototypeTable& table) {
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [label, entry] : table.entries) {
    classes[label] = {{"count", entry.count}, {"signature", entry.signature.values}};
  }
  nlohmann::json degenerate = nlohmann::json::object();
  for (const auto& [label, n] : table.degenerate_counts) degenerate[label] = n;
  return {{"version", 1}, {"config", to_json(table.config)}, {"classes", classes}, {"degenerate", degenerate}};
}

inline PrototypeTable prototypes_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("config") || !j.contains("classes")) {
    throw SchemaError("prototype table needs 'config' and 'classes'");
  }
  PrototypeTable table;
  table.config = config_from_json(j["config"]);
  try {
    for (const auto& [label, e] : j["classes"].items()) {
      PrototypeEntry entry;
      entry.count = e.at("count").get<std::size_t>();
      entry.signature.values = e.at("signature").get<std::vector<double>>();
      entry.signature.k = table.config.fit.k;
      if (entry.count < 1) throw SchemaError("prototype '" + label + "' has count < 1");
      validate(entry.signature);
      table.entries.emplace(label, std::move(entry));
    }
    if (j.contains("degenerate")) {
      for (const auto& [label, n] : j["degenerate"].items()) table.degenerate_counts[label] = n.get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("prototype table: ") + e.what());
  } catch (const ValidationError& e) {
    throw SchemaError(std::string("prototype table: ") + e.what());
  }
  return table;
}

inline void write_prototypes(const fs::path& path, const PrototypeTable& table) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json(table).dump(2) << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

inline PrototypeTable read_prototypes(const fs::path& path) {
  const auto text = detail::read_file(path);
  try {
    return prototypes_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("prototype table: ") + e.what(), e.byte);
  }
}

}  // namespace shapesig
