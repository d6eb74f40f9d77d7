#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <gtest/gtest.h>
#include <png.h>

#include "sidewidth/manifest.hpp"
#include "sidewidth/mask.hpp"
#include "sidewidth/tensor_io.hpp"
#include "support.hpp"

using namespace sidewidth;
using testing_support::TempDir;

namespace {

void write_gray_png(const std::filesystem::path& path, int w, int h, const std::vector<std::uint8_t>& px) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = w;
  img.height = h;
  img.format = PNG_FORMAT_GRAY;
  ASSERT_NE(png_image_write_to_file(&img, path.c_str(), 0, px.data(), 0, nullptr), 0);
}

void write_rgb_png(const std::filesystem::path& path, int w, int h) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * h * 3, 1);
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = w;
  img.height = h;
  img.format = PNG_FORMAT_RGB;
  ASSERT_NE(png_image_write_to_file(&img, path.c_str(), 0, px.data(), 0, nullptr), 0);
}

SemanticMask mask_from_rows(const std::vector<std::string>& rows) {
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows[0].size());
  SemanticMask m(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const char c = rows[v][u];
      m.set(u, v, c == 'R' ? SemanticClass::Road : c == 'S' ? SemanticClass::Sidewalk : SemanticClass::Other);
    }
  }
  return m;
}

SemanticMask random_mask(std::mt19937& rng, int w, int h) {
  std::uniform_int_distribution<int> pick(0, 2);
  SemanticMask m(w, h);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const int c = pick(rng);
      m.set(u, v, c == 0 ? SemanticClass::Road : c == 1 ? SemanticClass::Sidewalk : SemanticClass::Other);
    }
  }
  return m;
}

}  // namespace

TEST(PointMapFile, AllZerosIsAllValid) {
  TempDir dir("pm");
  write_npy(dir / "z.npy", Tensor{{2, 2, 3}, std::vector<float>(12, 0.0f)});
  const PointMap pm = load_point_map(dir / "z.npy");
  EXPECT_EQ(pm.width(), 2);
  EXPECT_EQ(pm.height(), 2);
  EXPECT_EQ(pm.valid_count(), 4u);
}

TEST(PointMapFile, NanMarksOnlyThatPixelInvalid) {
  TempDir dir("pm");
  std::vector<float> data(12, 1.0f);
  // pixel (u=0, v=1): row 1, column 0, z component
  data[(1 * 2 + 0) * 3 + 2] = std::numeric_limits<float>::quiet_NaN();
  write_npy(dir / "n.npy", Tensor{{2, 2, 3}, data});
  const PointMap pm = load_point_map(dir / "n.npy");
  EXPECT_FALSE(pm.valid(0, 1));
  EXPECT_TRUE(pm.valid(0, 0));
  EXPECT_TRUE(pm.valid(1, 0));
  EXPECT_TRUE(pm.valid(1, 1));
}

TEST(PointMapFile, WrongLastDimension) {
  TempDir dir("pm");
  write_npy(dir / "b.npy", Tensor{{2, 2, 2}, std::vector<float>(8, 0.0f)});
  try {
    load_point_map(dir / "b.npy");
    FAIL() << "expected an error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("wrong last dimension"), std::string::npos) << e.what();
  }
}

TEST(PointMapFile, RejectsOtherElementTypes) {
  TempDir dir("pm");
  // hand-written v1.0 header with float64 payload
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': (1, 1, 3), }";
  while ((10 + header.size() + 1) % 64 != 0) header += ' ';
  header += '\n';
  std::ofstream out(dir / "f8.npy", std::ios::binary);
  out.write("\x93NUMPY\x01\x00", 8);
  const auto len = static_cast<std::uint16_t>(header.size());
  out.put(static_cast<char>(len & 0xff));
  out.put(static_cast<char>(len >> 8));
  out << header;
  const double payload[3] = {1, 2, 3};
  out.write(reinterpret_cast<const char*>(payload), sizeof payload);
  out.close();
  EXPECT_THROW(load_point_map(dir / "f8.npy"), FormatError);
}

TEST(PointMapFile, TruncatedPayload) {
  TempDir dir("pm");
  write_npy(dir / "t.npy", Tensor{{4, 4, 3}, std::vector<float>(48, 1.0f)});
  std::filesystem::resize_file(dir / "t.npy", std::filesystem::file_size(dir / "t.npy") - 4);
  try {
    load_point_map(dir / "t.npy");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
  }
}

TEST(PointMapFile, HeaderIsNpyCompatible) {
  TempDir dir("pm");
  write_npy(dir / "h.npy", Tensor{{3, 5, 3}, std::vector<float>(45, 0.5f)});
  std::ifstream in(dir / "h.npy", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  ASSERT_GT(bytes.size(), 10u);
  EXPECT_EQ(bytes.substr(0, 6), "\x93NUMPY");
  EXPECT_EQ(bytes[6], 1);
  const std::size_t hlen = static_cast<unsigned char>(bytes[8]) | (static_cast<unsigned char>(bytes[9]) << 8);
  EXPECT_EQ((10 + hlen) % 64, 0u);
  const std::string header = bytes.substr(10, hlen);
  EXPECT_NE(header.find("'descr': '<f4'"), std::string::npos);
  EXPECT_NE(header.find("'shape': (3, 5, 3)"), std::string::npos);
  EXPECT_EQ(bytes.size(), 10 + hlen + 45 * 4);
}

TEST(PointMapFile, RoundTripIsBitExact) {
  TempDir dir("pm");
  std::mt19937 rng(7);
  std::normal_distribution<float> g(0.0f, 10.0f);
  std::vector<float> xyz(6 * 4 * 3);
  for (auto& x : xyz) x = g(rng);
  xyz[5] = std::numeric_limits<float>::infinity();
  const PointMap pm(6, 4, xyz);
  save_point_map(dir / "r.npy", pm);
  EXPECT_EQ(load_point_map(dir / "r.npy"), pm);
}

TEST(DepthMapFile, RoundTripAndDispatch) {
  TempDir dir("dm");
  const DepthMap dm(3, 2, {1.0f, 2.0f, 0.0f, -1.0f, std::nanf(""), 5.0f});
  save_depth_map(dir / "d.npy", dm);
  const Geometry g = load_geometry(dir / "d.npy");
  ASSERT_TRUE(std::holds_alternative<DepthMap>(g));
  EXPECT_EQ(std::get<DepthMap>(g), dm);
  EXPECT_TRUE(dm.valid(0, 0));
  EXPECT_FALSE(dm.valid(2, 0));  // zero depth
  EXPECT_FALSE(dm.valid(0, 1));  // negative
  EXPECT_FALSE(dm.valid(1, 1));  // NaN
}

TEST(MaskFile, AllSidewalk) {
  TempDir dir("mask");
  write_gray_png(dir / "m.png", 4, 3, std::vector<std::uint8_t>(12, 1));
  ClassMap cm = ClassMap::cityscapes();
  const SemanticMask m = load_mask(dir / "m.png", cm);
  EXPECT_EQ(m.count(SemanticClass::Sidewalk), 12u);
}

TEST(MaskFile, UnmappedIdsBecomeOther) {
  TempDir dir("mask");
  write_gray_png(dir / "m.png", 3, 1, {0, 1, 7});
  const SemanticMask m = load_mask(dir / "m.png");
  EXPECT_EQ(m.at(0, 0), SemanticClass::Road);
  EXPECT_EQ(m.at(1, 0), SemanticClass::Sidewalk);
  EXPECT_EQ(m.at(2, 0), SemanticClass::Other);
}

TEST(MaskFile, RejectsColour) {
  TempDir dir("mask");
  write_rgb_png(dir / "c.png", 2, 2);
  EXPECT_THROW(load_mask(dir / "c.png"), FormatError);
}

TEST(MaskFile, RoundTripIsExact) {
  TempDir dir("mask");
  std::mt19937 rng(3);
  const SemanticMask m = random_mask(rng, 17, 9);
  save_mask(dir / "m.png", m);
  EXPECT_EQ(load_mask(dir / "m.png"), m);
}

TEST(MaskFile, DimensionMismatchAtPairing) {
  const SemanticMask m(640, 640);
  try {
    require_same_dimensions(m, 320, 320, "img");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("dimension mismatch"), std::string::npos);
  }
}

TEST(Postprocess, SmallBlobRemoved) {
  const SemanticMask m = mask_from_rows({
      "......",
      ".SSS..",
      "......",
  });
  const SemanticMask out = postprocess_mask(m, 10, 0);
  EXPECT_EQ(out.count(SemanticClass::Sidewalk), 0u);
}

TEST(Postprocess, InteriorHoleFilled) {
  const SemanticMask m = mask_from_rows({
      "SSSSS",
      "SSSSS",
      "SS.SS",
      "SSSSS",
  });
  const SemanticMask out = postprocess_mask(m, 1, 4);
  EXPECT_EQ(out.count(SemanticClass::Sidewalk), 20u);
}

TEST(Postprocess, HoleTouchingBorderOrTwoClassesKept) {
  const SemanticMask border = mask_from_rows({
      "SS.SS",
      "SSSSS",
  });
  EXPECT_EQ(postprocess_mask(border, 1, 4), border);
  const SemanticMask mixed = mask_from_rows({
      "SSSRR",
      "SS.RR",
      "SSSRR",
  });
  EXPECT_EQ(postprocess_mask(mixed, 1, 4), mixed);
}

TEST(Postprocess, CleanMaskUnchanged) {
  const SemanticMask m = mask_from_rows({
      "......",
      "SSSSSS",
      "SSSSSS",
      "RRRRRR",
      "RRRRRR",
  });
  EXPECT_EQ(postprocess_mask(m, 5, 3), m);
}

TEST(Postprocess, IdempotentOnRandomMasks) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> dim(1, 24);
    std::uniform_int_distribution<std::size_t> thr(0, 12);
    const SemanticMask m = random_mask(rng, dim(rng), dim(rng));
    const std::size_t a = thr(rng), b = thr(rng);
    const SemanticMask once = postprocess_mask(m, a, b);
    EXPECT_EQ(postprocess_mask(once, a, b), once) << "trial " << trial;
  }
}

TEST(Support, RejectsWithoutRoad) {
  const SemanticMask m(10, 10, SemanticClass::Sidewalk);
  const SupportCheck c = check_support(m, 0.02, 0.05);
  EXPECT_FALSE(c.accepted);
  EXPECT_EQ(c.reason, RejectReason::InsufficientRoad);
}

TEST(Support, AcceptsHalfRoadTenthSidewalk) {
  SemanticMask m(10, 10);
  for (int v = 0; v < 10; ++v) {
    for (int u = 0; u < 10; ++u) {
      if (v >= 5) m.set(u, v, SemanticClass::Road);
      else if (v == 4) m.set(u, v, SemanticClass::Sidewalk);
    }
  }
  EXPECT_TRUE(check_support(m, 0.02, 0.05).accepted);
}

TEST(Support, RejectsOnePercentSidewalk) {
  SemanticMask m(10, 10, SemanticClass::Road);
  m.set(0, 0, SemanticClass::Sidewalk);
  const SupportCheck c = check_support(m, 0.02, 0.05);
  EXPECT_FALSE(c.accepted);
  EXPECT_EQ(c.reason, RejectReason::InsufficientSidewalk);
  EXPECT_EQ(to_string(*c.reason), "insufficient_sidewalk");
}

TEST(Support, AddingSidewalkNeverBreaksSidewalkCriterion) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    SemanticMask m = random_mask(rng, 12, 12);
    bool ok_before = check_support(m, 0.3, 0.0).accepted;
    std::uniform_int_distribution<int> pos(0, 11);
    m.set(pos(rng), pos(rng), SemanticClass::Sidewalk);
    if (ok_before) EXPECT_TRUE(check_support(m, 0.3, 0.0).accepted);
  }
}

TEST(Manifest, RoundTripAndRelativePaths) {
  TempDir dir("man");
  std::vector<ImageManifestEntry> entries(2);
  entries[0].image_id = "a";
  entries[0].point_map_path = dir / "a.npy";
  entries[0].mask_path = dir / "a_mask.png";
  entries[0].camera_height_m = 2.4;
  entries[0].segment_id = "way/1";
  entries[0].reference_width_m = 1.5;
  entries[0].intrinsics = Intrinsics{300, 300, 319.5, 239.5};
  entries[0].camera_centre = Eigen::Vector3d(0.1, 0.2, 0.3);
  entries[0].geo = GeoTag{38.9, -77.0, 90.0};
  entries[1].image_id = "b";
  entries[1].point_map_path = dir / "sub" / "b.npy";
  entries[1].mask_path = dir / "sub" / "b.png";
  entries[1].fov_deg = 80.0;
  save_manifest(dir / "manifest.json", entries);

  std::ifstream in(dir / "manifest.json");
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_NE(text.find("\"sub/b.npy\""), std::string::npos);

  const auto back = load_manifest(dir / "manifest.json");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].point_map_path, dir / "a.npy");
  EXPECT_EQ(back[1].mask_path, dir / "sub" / "b.png");
  EXPECT_EQ(back[0].camera_height_m, 2.4);
  EXPECT_EQ(back[0].segment_id, "way/1");
  EXPECT_EQ(back[0].reference_width_m, 1.5);
  ASSERT_TRUE(back[0].intrinsics.has_value());
  EXPECT_EQ(back[0].intrinsics->cy, 239.5);
  EXPECT_EQ(*back[0].camera_centre, Eigen::Vector3d(0.1, 0.2, 0.3));
  EXPECT_EQ(back[0].geo->heading_deg, 90.0);
  EXPECT_EQ(back[1].fov_deg, 80.0);
  EXPECT_FALSE(back[1].camera_height_m.has_value());
}

TEST(Manifest, ValidationErrors) {
  TempDir dir("man");
  auto write = [&](const std::string& body) {
    std::ofstream(dir / "m.json") << body;
    return dir / "m.json";
  };
  EXPECT_THROW(load_manifest(write("{}")), FormatError);
  EXPECT_THROW(load_manifest(write("[{\"image_id\": \"a\", \"mask_path\": \"m.png\"}]")), FormatError);
  EXPECT_THROW(load_manifest(write(R"([{"image_id":"a","point_map_path":"a","mask_path":"b","camera_height_m":0}])")),
               FormatError);
  EXPECT_THROW(load_manifest(write(R"([{"image_id":"a","point_map_path":"a","mask_path":"b","fov_deg":180}])")),
               FormatError);
  EXPECT_THROW(load_manifest(write(R"([{"image_id":"a","point_map_path":"a","mask_path":"b"},
                                       {"image_id":"a","point_map_path":"c","mask_path":"d"}])")),
               FormatError);
  EXPECT_THROW(load_manifest(write("[")), FormatError);
}

TEST(Manifest, LoadImageChecksDimensions) {
  TempDir dir("man");
  save_point_map(dir / "p.npy", PointMap(4, 3, std::vector<float>(36, 1.0f)));
  save_mask(dir / "m.png", SemanticMask(4, 4));
  ImageManifestEntry e;
  e.image_id = "x";
  e.point_map_path = dir / "p.npy";
  e.mask_path = dir / "m.png";
  EXPECT_THROW(load_image(e), FormatError);
  save_mask(dir / "m.png", SemanticMask(4, 3));
  EXPECT_NO_THROW(load_image(e));
}
