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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "shapesig/io.hpp"
#include "synthetic.hpp"

namespace shapesig {
namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("shapesig_io_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& content) const {
    const auto p = dir_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

  fs::path dir_;
};

std::string bin_record(float x, float y, float z, float i) {
  std::string s(16, '\0');
  const float v[4] = {x, y, z, i};
  for (int k = 0; k < 4; ++k) {
    const auto u = std::bit_cast<std::uint32_t>(v[k]);
    for (int b = 0; b < 4; ++b) s[4 * k + b] = static_cast<char>((u >> (8 * b)) & 0xff);
  }
  return s;
}

const char* kCarRecord = R"({"objects": [{"id": 7, "label": "car", "center": [1, 2, -1],
  "size": {"w": 1.9, "l": 4.6, "h": 1.7}, "yaw": 0.3, "frame": "scene-1"}]})";

TEST(ParsePointsCsv, Examples) {
  const auto c = parse_points_csv("1.0,2.0,3.0");
  ASSERT_EQ(c.points.size(), 1u);
  EXPECT_EQ(c.points[0], (Point3{1, 2, 3}));
  EXPECT_EQ(c.frame, Frame::sensor);
  EXPECT_EQ(parse_points_csv("# x,y,z\n\n 1, 2 ,3,0.5\r\n4,5,6\n").points.size(), 2u);
}

TEST(ParsePointsCsv, Errors) {
  try {
    parse_points_csv("1.0,NaN,3.0");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 1u);
  }
  EXPECT_THROW(parse_points_csv("1.0,nan,3.0"), ValidationError);
  EXPECT_THROW(parse_points_csv("1,2,inf"), ValidationError);
  try {
    parse_points_csv("1,2,3\n4,5\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 2u);
  }
  EXPECT_THROW(parse_points_csv("1,2,x"), ParseError);
  EXPECT_THROW(parse_points_csv("1,2,3,y"), ParseError);
}

TEST(ParsePointsBin, TwoQuadruples) {
  const auto c = parse_points_bin(bin_record(1.5f, -2.0f, 3.25f, 9.0f) + bin_record(0.0f, 1.0f, 2.0f, 0.0f));
  ASSERT_EQ(c.points.size(), 2u);
  EXPECT_EQ(c.points[0], (Point3{1.5, -2.0, 3.25}));
  EXPECT_EQ(c.points[1], (Point3{0.0, 1.0, 2.0}));
}

TEST(ParsePointsBin, Errors) {
  try {
    parse_points_bin(bin_record(1, 2, 3, 4) + "abc");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 16u);
  }
  try {
    parse_points_bin(bin_record(1, 2, 3, 4) + bin_record(1, NAN, 3, 4));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 16u);
  }
}

TEST_F(TempDir, ParsePointsByExtension) {
  EXPECT_EQ(parse_points(write("a.csv", "1,2,3\n")).points.size(), 1u);
  EXPECT_EQ(parse_points(write("a.BIN", bin_record(1, 2, 3, 4))).points.size(), 1u);
  EXPECT_THROW(parse_points(write("a.txt", "1,2,3")), ValidationError);
  EXPECT_THROW(parse_points(dir_ / "missing.csv"), IoError);
}

TEST_F(TempDir, BinRoundTripIsBitExact) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(-100.0f, 100.0f);
  PointCloud3 cloud;
  for (int i = 0; i < 500; ++i) cloud.points.push_back({u(rng), u(rng), u(rng)});
  const auto p = dir_ / "c.bin";
  write_points(p, cloud);
  EXPECT_EQ(fs::file_size(p), 500u * 16u);
  EXPECT_EQ(parse_points(p).points, cloud.points);
}

TEST_F(TempDir, CsvRoundTripKeepsNineDigits) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  PointCloud3 cloud;
  for (int i = 0; i < 500; ++i) cloud.points.push_back({u(rng), u(rng), u(rng)});
  const auto p = dir_ / "c.csv";
  write_points(p, cloud);
  const auto back = parse_points(p);
  ASSERT_EQ(back.points.size(), cloud.points.size());
  for (std::size_t i = 0; i < back.points.size(); ++i) {
    EXPECT_NEAR(back.points[i].x, cloud.points[i].x, 1e-8 * std::abs(cloud.points[i].x));
    EXPECT_NEAR(back.points[i].z, cloud.points[i].z, 1e-8 * std::abs(cloud.points[i].z));
  }
  // Values that already have nine digits survive exactly.
  const auto p2 = dir_ / "d.csv";
  write_points(p2, back);
  EXPECT_EQ(parse_points(p2).points, back.points);
}

TEST(ParseAnnotations, FieldMapping) {
  const auto recs = parse_annotations_text(kCarRecord);
  ASSERT_EQ(recs.size(), 1u);
  const auto& r = recs[0];
  EXPECT_EQ(r.id, "7");
  EXPECT_EQ(r.label, "car");
  EXPECT_EQ(r.frame, "scene-1");
  EXPECT_EQ(r.box.size.w, 1.9);
  EXPECT_EQ(r.box.size.l, 4.6);
  EXPECT_EQ(r.box.size.h, 1.7);
  EXPECT_EQ(r.box.yaw, 0.3);
  EXPECT_EQ(r.box.center, (Point3{1, 2, -1}));
  EXPECT_FALSE(r.points.has_value());
  EXPECT_FALSE(r.split.has_value());
}

TEST(ParseAnnotations, YawIsWrapped) {
  const auto recs = parse_annotations_text(R"({"objects": [{"id": "a", "label": "car", "center": [0, 0, 0],
    "size": {"w": 1, "l": 1, "h": 1}, "yaw": 3.5, "frame": "f"}]})");
  EXPECT_NEAR(recs[0].box.yaw, 3.5 - 2 * std::numbers::pi, 1e-15);
  EXPECT_NEAR(recs[0].box.yaw, -2.783, 1e-3);
}

TEST(ParseAnnotations, OptionalFields) {
  const auto recs = parse_annotations_text(R"({"objects": [{"id": "a", "label": "car", "center": [0, 0, 0],
    "size": {"w": 1, "l": 1, "h": 1}, "yaw": 0, "frame": "f", "points": "pts/a.csv", "split": "train"}]})",
                                           "/data");
  EXPECT_EQ(*recs[0].points, fs::path("/data/pts/a.csv"));
  EXPECT_EQ(*recs[0].split, "train");
}

TEST(ParseAnnotations, SchemaErrors) {
  const std::string zero = R"({"objects": [{"id": "z1", "label": "car", "center": [0, 0, 0],
    "size": {"w": 0, "l": 4, "h": 1}, "yaw": 0, "frame": "f"}]})";
  try {
    parse_annotations_text(zero);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("z1"), std::string::npos);
  }
  const std::string missing = R"({"objects": [{"id": "m", "label": "car", "center": [0, 0, 0],
    "size": {"w": 1, "l": 4, "h": 1}, "frame": "f"}]})";
  try {
    parse_annotations_text(missing);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("yaw"), std::string::npos);
  }
  EXPECT_THROW(parse_annotations_text(R"({"things": []})"), SchemaError);
  EXPECT_THROW(parse_annotations_text(R"({"objects": [{"id": 1, "label": "", "center": [0, 0, 0],
    "size": {"w": 1, "l": 1, "h": 1}, "yaw": 0, "frame": "f"}]})"), SchemaError);
  EXPECT_THROW(parse_annotations_text(R"({"objects": [{"id": 1, "label": "a", "center": [0, 0],
    "size": {"w": 1, "l": 1, "h": 1}, "yaw": 0, "frame": "f"}]})"), SchemaError);
  EXPECT_THROW(parse_annotations_text("{not json"), ParseError);
}

TEST(SignatureTable, RoundTrip) {
  SignatureTable t;
  t.rows.push_back({"car", "<40", {{1.5, -0.25, 1e-7, 2, 3, 4, 5, 6, 7}, 3}, "7", "computed"});
  t.rows.push_back({"bus", "", {{0, 0, 0, 0, 0, 0, 0, 0, 0}, 3}, "x", "prototype"});
  std::ostringstream os;
  write_signature_table(os, t);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "label,dist_bucket,b0,b1,b2,s0,s1,s2,f0,f1,f2,id,source");
  const auto back = parse_signature_table_text(os.str());
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.k, 3u);
  EXPECT_EQ(back.rows[0].signature, t.rows[0].signature);
  EXPECT_EQ(back.rows[0].bucket, "<40");
  EXPECT_EQ(back.rows[1].id, "x");
  EXPECT_EQ(back.rows[1].source, "prototype");
  EXPECT_EQ(back.rows[1].bucket, "");
}

TEST(SignatureTable, ReadsPlainEmbeddingExport) {
  const auto t = parse_signature_table_text("label,dist_bucket,b0,s0,f0\ncar,<40,1,2,3\n");
  EXPECT_EQ(t.k, 1u);
  EXPECT_EQ(t.rows[0].signature.values, (std::vector<double>{1, 2, 3}));
  EXPECT_THROW(parse_signature_table_text(""), ParseError);
  EXPECT_THROW(parse_signature_table_text("name,b0\n"), ParseError);
  EXPECT_THROW(parse_signature_table_text("label,dist_bucket,b0,b1\n"), ParseError);
  EXPECT_THROW(parse_signature_table_text("label,dist_bucket,b0,s0,f0\ncar,,1,2\n"), ParseError);
  EXPECT_THROW(parse_signature_table_text("label,dist_bucket,b0,s0,f0\ncar,,1,2,zz\n"), ParseError);
}

TEST_F(TempDir, PrototypeTableRoundTrip) {
  const auto objects = testing::fleet(3, 4, 150, 0.2);
  SignatureConfig cfg;
  cfg.symmetry = SymmetryMode::full3d;
  cfg.fit.degree = 63;
  cfg.fit.k = 4;
  cfg.views = {View::side, View::bird, View::front};
  const auto table = build_prototypes(objects, cfg);
  const auto p = dir_ / "protos.json";
  write_prototypes(p, table);
  const auto back = read_prototypes(p);
  EXPECT_EQ(back.config, table.config);
  ASSERT_EQ(back.entries.size(), table.entries.size());
  for (const auto& [label, e] : table.entries) {
    EXPECT_EQ(back.entries.at(label).signature, e.signature);
    EXPECT_EQ(back.entries.at(label).count, e.count);
  }
  EXPECT_THROW(read_prototypes(write("bad.json", "{\"config\": {}}")), SchemaError);
  EXPECT_THROW(read_prototypes(write("bad2.json", "[1,")), ParseError);
}

TEST_F(TempDir, AnnotationFileResolvesPointsRelativeToItself) {
  write("pts.csv", "1,2,3\n");
  const auto ann = write("ann.json", R"({"objects": [{"id": "a", "label": "car", "center": [0, 0, 0],
    "size": {"w": 1, "l": 1, "h": 1}, "yaw": 0, "frame": "f", "points": "pts.csv"}]})");
  const auto recs = parse_annotations(ann);
  EXPECT_EQ(parse_points(*recs[0].points).points.size(), 1u);
}

}  // namespace
}  // namespace shapesig
