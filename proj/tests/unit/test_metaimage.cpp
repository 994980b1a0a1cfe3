#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "drrkit/error.hpp"
#include "drrkit/metaimage.hpp"
#include "generators.hpp"

using namespace drrkit;
namespace fs = std::filesystem;

namespace {

class MetaImage : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("drrkit_mhd_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write_text(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }

  ErrorCode load_error(const std::string& name, std::string* field = nullptr) const {
    try {
      load_volume(path(name));
    } catch (const Error& e) {
      if (field) *field = e.field();
      return e.code();
    }
    ADD_FAILURE() << "load succeeded";
    return ErrorCode::InvalidArgument;
  }

  fs::path dir_;
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kHeader444 =
    "ObjectType = Image\nNDims = 3\nDimSize = 4 4 4\nElementSpacing = 1.6 1.6 1.6\nOffset = 0 0 0\n"
    "ElementType = MET_SHORT\nElementByteOrderMSB = False\nElementDataFile = d.raw\n";

}  // namespace

TEST_F(MetaImage, RoundTripIsBitExact) {
  gen::Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const GridGeometry g = gen::random_grid(rng, 1, 8);
    Volume v = gen::random_volume(rng, g, -1000, 3000);
    for (auto& x : v.data()) x = static_cast<float>(x);
    save_volume(v, path("v.mhd"));
    const Volume back = load_volume(path("v.mhd"));
    EXPECT_EQ(back, v);
    // The origin and spacing are written in shortest round-trip form.
    EXPECT_EQ(back.geometry(), v.geometry());
  }
}

TEST_F(MetaImage, ShortRoundTrip) {
  GridGeometry g;
  g.dims = {2, 3, 4};
  Volume v(g);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = -1000.0 + 37.0 * static_cast<double>(i);
  save_volume(v, path("s.mhd"), ElementType::Short);
  EXPECT_EQ(load_volume(path("s.mhd")), v);
  EXPECT_EQ(fs::file_size(path("s.raw")), v.size() * 2);
}

TEST_F(MetaImage, ZeroVolumeHeaderAndPayload) {
  GridGeometry g;
  g.dims = {2, 2, 2};
  save_volume(Volume(g), path("z.mhd"));
  const std::string h = read_text(path("z.mhd"));
  EXPECT_NE(h.find("ObjectType = Image\n"), std::string::npos);
  EXPECT_NE(h.find("NDims = 3\n"), std::string::npos);
  EXPECT_NE(h.find("DimSize = 2 2 2\n"), std::string::npos);
  EXPECT_NE(h.find("ElementType = MET_FLOAT\n"), std::string::npos);
  EXPECT_NE(h.find("ElementByteOrderMSB = False\n"), std::string::npos);
  EXPECT_NE(h.find("ElementDataFile = z.raw\n"), std::string::npos);
  const std::string raw = read_text(path("z.raw"));
  ASSERT_EQ(raw.size(), 8u * 4u);
  for (char c : raw) EXPECT_EQ(c, 0);
}

TEST_F(MetaImage, DimSizeOrderIsWidthHeightDepth) {
  GridGeometry g;
  g.dims = {5, 3, 2};
  g.spacing = {0.5, 1.25, 2.0};
  save_volume(Volume(g), path("o.mhd"));
  const std::string h = read_text(path("o.mhd"));
  EXPECT_NE(h.find("DimSize = 2 3 5\n"), std::string::npos);
  EXPECT_NE(h.find("ElementSpacing = 0.5 1.25 2\n"), std::string::npos);
}

TEST_F(MetaImage, SpacingFromHeader) {
  write_text("a.mhd", kHeader444);
  write_text("d.raw", std::string(64 * 2, '\0'));
  const Volume v = load_volume(path("a.mhd"));
  EXPECT_EQ(v.geometry().spacing, (Vec3{1.6, 1.6, 1.6}));
  EXPECT_EQ(v.dims(), (Dims3{4, 4, 4}));
}

TEST_F(MetaImage, DataSizeMismatch) {
  write_text("a.mhd", kHeader444);
  write_text("d.raw", std::string(63 * 2, '\0'));
  std::string field;
  EXPECT_EQ(load_error("a.mhd", &field), ErrorCode::DataSizeMismatch);
  EXPECT_EQ(field, "ElementDataFile");
}

TEST_F(MetaImage, DistinctErrors) {
  EXPECT_EQ(load_error("missing.mhd"), ErrorCode::MissingFile);

  std::string field;
  write_text("b.mhd", "ObjectType = Image\nNDims = 3\nDimSize = 4 four 4\nElementType = MET_SHORT\n"
                      "ElementDataFile = d.raw\n");
  EXPECT_EQ(load_error("b.mhd", &field), ErrorCode::MalformedHeader);
  EXPECT_EQ(field, "DimSize");

  std::string h = kHeader444;
  h.replace(h.find("MET_SHORT"), 9, "MET_UCHAR");
  write_text("c.mhd", h);
  write_text("d.raw", std::string(64 * 2, '\0'));
  EXPECT_EQ(load_error("c.mhd", &field), ErrorCode::UnsupportedElementType);
  EXPECT_EQ(field, "ElementType");

  h = kHeader444;
  h.replace(h.find("d.raw"), 5, "gone.raw");
  write_text("e.mhd", h);
  EXPECT_EQ(load_error("e.mhd", &field), ErrorCode::MissingFile);
  EXPECT_EQ(field, "ElementDataFile");
}

TEST_F(MetaImage, NonWritablePathIsIoError) {
  try {
    save_volume(Volume(GridGeometry{}), path("no/such/dir/v.mhd"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoFailure);
  }
}

TEST_F(MetaImage, BigEndianPayloadIsHonoured) {
  std::string h = kHeader444;
  h.replace(h.find("DimSize = 4 4 4"), 15, "DimSize = 2 1 1");
  h.replace(h.find("= False"), 7, "= True");
  write_text("m.mhd", h);
  write_text("d.raw", std::string("\x01\x02\xff\xfe", 4));
  const Volume v = load_volume(path("m.mhd"));
  EXPECT_EQ(v[0], 258.0);
  EXPECT_EQ(v[1], -2.0);
}

TEST_F(MetaImage, MaskRoundTrip) {
  gen::Rng rng(9);
  const GridGeometry g = gen::random_grid(rng, 1, 6);
  const Mask m = gen::random_mask(rng, g, 0.3);
  save_mask(m, path("m.mhd"));
  EXPECT_NE(read_text(path("m.mhd")).find("MET_SHORT"), std::string::npos);
  EXPECT_EQ(load_mask(path("m.mhd")), m);
}

TEST_F(MetaImage, Image2dRoundTripAndPgm) {
  ImageGrid2D img(3, 4, 0.5, 0.25);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = static_cast<double>(i) / 11.0;
  for (auto& x : img.data()) x = static_cast<float>(x);
  save_image2d(img, path("i.mhd"));
  EXPECT_NE(read_text(path("i.mhd")).find("NDims = 2\n"), std::string::npos);
  EXPECT_EQ(load_image2d(path("i.mhd")), img);

  save_pgm16(img, path("i.pgm"));
  const std::string pgm = read_text(path("i.pgm"));
  const std::string head = "P5\n4 3\n65535\n";
  ASSERT_EQ(pgm.substr(0, head.size()), head);
  ASSERT_EQ(pgm.size(), head.size() + 24);
  const auto sample = [&](std::size_t i) {
    return static_cast<unsigned>(static_cast<unsigned char>(pgm[head.size() + 2 * i])) << 8 |
           static_cast<unsigned char>(pgm[head.size() + 2 * i + 1]);
  };
  EXPECT_EQ(sample(0), 0u);
  EXPECT_EQ(sample(11), 65535u);
}
