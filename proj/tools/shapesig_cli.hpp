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

// Command-line front end. Kept in a header so tests can run commands
// in-process with captured streams.

#pragma once

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "shapesig/analysis.hpp"
#include "shapesig/io.hpp"
#include "shapesig/signature.hpp"

namespace shapesig::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 1,
  kIo = 2,
  kUsage = 64,
};

struct SignatureFlags {
  std::string sym = "planar";
  std::size_t degree = FitConfig{}.degree;
  std::size_t k = FitConfig{}.k;
  std::size_t min_points = SignatureConfig{}.min_points;
  bool clip = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--sym", sym, "Centro-symmetry mode")->check(CLI::IsMember({"planar", "full3d"}));
    cmd->add_option("--degree", degree, "Chebyshev fit degree N (N+1 nodes)");
    cmd->add_option("--k", k, "Coefficients kept per view");
    cmd->add_option("--min-points", min_points, "Boxes with this many points or fewer use the class prototype");
    cmd->add_flag("--clip", clip, "Drop points outside the box grown by 10%");
  }

  SignatureConfig config() const {
    SignatureConfig cfg;
    cfg.symmetry = sym == "full3d" ? SymmetryMode::full3d : SymmetryMode::planar;
    cfg.fit.degree = degree;
    cfg.fit.k = k;
    cfg.min_points = min_points;
    cfg.clip_to_box = clip;
    validate(cfg);
    return cfg;
  }
};

namespace detail {

inline std::shared_ptr<spdlog::logger> make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  sink->set_pattern("shapesig: %l: %v");
  auto logger = std::make_shared<spdlog::logger>("shapesig", sink);
  logger->set_level(spdlog::level::warn);
  if (const char* env = std::getenv("SHAPESIG_LOG")) logger->set_level(spdlog::level::from_str(env));
  return logger;
}

inline double horizontal_range(const Box3D& box) { return std::hypot(box.center.x, box.center.y); }

/// Loads each record's points, reusing files shared by several records.
class CloudLoader {
 public:
  explicit CloudLoader(std::optional<fs::path> fallback) : fallback_(std::move(fallback)) {}

  const PointCloud3& load(const AnnotationRecord& rec) {
    const auto path = rec.points ? rec.points : fallback_;
    if (!path) {
      throw ValidationError("record " + rec.id + " has no 'points' file and no --points was given");
    }
    auto it = cache_.find(*path);
    if (it == cache_.end()) it = cache_.emplace(*path, parse_points(*path)).first;
    return it->second;
  }

 private:
  std::optional<fs::path> fallback_;
  std::map<fs::path, PointCloud3> cache_;
};

inline std::vector<AnnotationRecord> select_split(std::vector<AnnotationRecord> records, const std::string& split) {
  if (split.empty()) return records;
  std::erase_if(records, [&](const AnnotationRecord& r) { return !r.split || *r.split != split; });
  return records;
}

inline std::vector<LabeledObject> load_objects(const std::vector<AnnotationRecord>& records,
                                               const std::string& points) {
  CloudLoader loader(points.empty() ? std::nullopt : std::optional<fs::path>(points));
  std::vector<LabeledObject> objects;
  objects.reserve(records.size());
  for (const auto& rec : records) objects.push_back({rec.label, loader.load(rec), rec.box});
  return objects;
}

inline const AnnotationRecord& find_record(const std::vector<AnnotationRecord>& records, const std::string& id) {
  for (const auto& r : records) {
    if (r.id == id) return r;
  }
  throw ValidationError("no annotation with id " + id);
}

inline void print_values(std::ostream& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) out << (i ? "," : "") << format_sig9(values[i]);
  out << '\n';
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  return f;
}

}  // namespace detail

/// Runs one subcommand. `args` excludes the program name.
inline int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shape signatures for annotated lidar objects", "shapesig"};
  app.require_subcommand(1);

  SignatureFlags sig_flags;
  std::string points, ann, id, out_path, prototypes, table_path, split;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
  std::size_t trials = 100;
  double sigma = 0.02;
  double drop = 0.0;

  auto* compute = app.add_subcommand("compute", "Signature of one annotated object, printed as 3k values");
  compute->add_option("--points", points, "Object points (.csv or .bin); defaults to the record's file");
  compute->add_option("--ann", ann, "Annotation JSON")->required();
  compute->add_option("--id", id, "Object id")->required();
  compute->add_option("--prototypes", prototypes, "Prototype table used when the box is degenerate");

  auto* batch = app.add_subcommand("batch", "Signatures for every annotated object, written as a table");
  batch->add_option("--ann", ann, "Annotation JSON")->required();
  batch->add_option("--points", points, "Points for records without their own 'points' file");
  batch->add_option("--out", out_path, "Signature table CSV")->required();
  batch->add_option("--prototypes", prototypes, "Prototype table for degenerate boxes");
  batch->add_option("--split", split, "Only records with this split");

  auto* protos = app.add_subcommand("prototypes", "Per-class mean signatures for the degenerate-box fallback");
  protos->add_option("--ann", ann, "Annotation JSON")->required();
  protos->add_option("--points", points, "Points for records without their own 'points' file");
  protos->add_option("--out", out_path, "Prototype table JSON")->required();
  protos->add_option("--split", split, "Only records with this split (e.g. train)");

  auto* separation = app.add_subcommand("eval-separation", "Silhouette score of a signature table");
  separation->add_option("--table", table_path, "Signature table CSV")->required();

  auto* sensitivity = app.add_subcommand("sensitivity", "Signature change under jitter and dropout");
  sensitivity->add_option("--points", points, "Object points; defaults to the record's file");
  sensitivity->add_option("--ann", ann, "Annotation JSON")->required();
  sensitivity->add_option("--id", id, "Object id")->required();
  sensitivity->add_option("--sigma", sigma, "Gaussian jitter per coordinate, meters")->check(CLI::NonNegativeNumber);
  sensitivity->add_option("--drop", drop, "Point dropout probability")->check(CLI::Range(0.0, 0.999999));
  sensitivity->add_option("--trials", trials, "Number of perturbed copies");
  sensitivity->add_option("--seed", seed, "Random seed");

  auto* exporter = app.add_subcommand("export-embedding", "Signature table to the plotting CSV");
  exporter->add_option("--table", table_path, "Signature table CSV")->required();
  exporter->add_option("--out", out_path, "Output CSV")->required();

  for (auto* cmd : {compute, batch, protos, sensitivity}) sig_flags.attach(cmd);
  for (auto* cmd : {batch, protos, sensitivity}) {
    cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "shapesig: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  auto log = detail::make_logger(err);
  try {
    if (compute->parsed() || sensitivity->parsed()) {
      const auto cfg = sig_flags.config();
      const auto records = parse_annotations(ann);
      const auto& rec = detail::find_record(records, id);
      detail::CloudLoader loader(std::nullopt);
      const PointCloud3 cloud = points.empty() ? loader.load(rec) : parse_points(points);

      if (compute->parsed()) {
        if (prototypes.empty()) {
          const auto sig = compute_signature(cloud, rec.box, cfg);
          if (!sig) throw UnresolvableError("object " + id + " is degenerate and no --prototypes was given");
          detail::print_values(out, sig->values);
        } else {
          const auto table = read_prototypes(prototypes);
          const auto res = resolve_signature_ex(cloud, rec.box, rec.label, table, cfg);
          if (res.from_prototype) log->info("object {} is degenerate; using the '{}' prototype", id, rec.label);
          detail::print_values(out, res.signature.values);
        }
      } else {
        const PerturbationSpec spec{sigma, drop, seed};
        const auto stats = perturbation_sensitivity(cloud, rec.box, cfg, spec, trials, jobs);
        out << "trials," << trials << '\n'
            << "degenerate_trials," << stats.degenerate_trials << '\n'
            << "mean," << format_sig9(stats.mean) << '\n'
            << "p99," << format_sig9(stats.p99) << '\n';
      }
      return kOk;
    }

    if (batch->parsed()) {
      const auto cfg = sig_flags.config();
      const auto records = detail::select_split(parse_annotations(ann), split);
      const auto objects = detail::load_objects(records, points);

      std::vector<ResolvedSignature> resolved(objects.size());
      if (prototypes.empty()) {
        const auto sigs = compute_signatures(objects, cfg, jobs);
        for (std::size_t i = 0; i < sigs.size(); ++i) {
          if (!sigs[i]) throw UnresolvableError("object " + records[i].id + " is degenerate and no --prototypes was given");
          resolved[i] = {*sigs[i], false};
        }
      } else {
        resolved = resolve_signatures(objects, read_prototypes(prototypes), cfg, jobs);
      }

      SignatureTable table;
      table.k = cfg.fit.k;
      std::size_t flagged = 0;
      for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        flagged += resolved[i].from_prototype ? 1 : 0;
        table.rows.push_back({rec.label, distance_bucket(detail::horizontal_range(rec.box)), resolved[i].signature,
                              rec.id, resolved[i].from_prototype ? "prototype" : "computed"});
      }
      auto file = detail::open_output(out_path);
      write_signature_table(file, table);
      file.flush();
      if (!file) throw IoError("error writing " + out_path, table.rows.size());
      out << "signatures," << table.rows.size() << '\n' << "prototype," << flagged << '\n';
      return kOk;
    }

    if (protos->parsed()) {
      const auto cfg = sig_flags.config();
      const auto records = detail::select_split(parse_annotations(ann), split);
      const auto objects = detail::load_objects(records, points);
      const auto table = build_prototypes(objects, cfg, jobs);
      write_prototypes(out_path, table);

      std::size_t degenerate = 0;
      for (const auto& [label, n] : table.degenerate_counts) degenerate += n;
      const auto omitted = table.omitted_classes();
      for (const auto& label : omitted) log->warn("class '{}' has only degenerate samples and was omitted", label);
      out << "classes," << table.entries.size() << '\n'
          << "degenerate_samples," << degenerate << '\n'
          << "warnings," << omitted.size() << '\n';
      return kOk;
    }

    if (separation->parsed()) {
      const auto table = parse_signature_table(table_path);
      const auto result = silhouette_separation(table.to_set());
      if (result.degenerate) log->warn("some samples are indistinguishable from every other sample");
      std::map<std::string, std::size_t> per_class;
      for (const auto& r : table.rows) ++per_class[r.label];
      out << "samples," << table.rows.size() << '\n' << "classes," << per_class.size() << '\n';
      for (const auto& [label, n] : per_class) out << "class:" << label << ',' << n << '\n';
      out << "silhouette," << format_sig9(result.value) << '\n'
          << "degenerate," << (result.degenerate ? "true" : "false") << '\n';
      return kOk;
    }

    if (exporter->parsed()) {
      const auto table = parse_signature_table(table_path);
      auto file = detail::open_output(out_path);
      write_embedding_header(file, table.k);
      std::size_t rows = 0;
      for (const auto& r : table.rows) {
        write_embedding_row(file, r.label, r.bucket, r.signature.values);
        if (!file) throw IoError("error writing " + out_path, rows);
        ++rows;
      }
      file.flush();
      if (!file) throw IoError("error writing " + out_path, rows);
      out << "rows," << rows << '\n';
      return kOk;
    }
  } catch (const IoError& e) {
    log->error("{}", e.what());
    return kIo;
  } catch (const Error& e) {
    log->error("{}", e.what());
    return kValidation;
  }
  return kUsage;
}

}  // namespace shapesig::cli
