#include <gtest/gtest.h>

#include "fixtures.hpp"

namespace aquasynth {
namespace {

TEST(Plane, SizeChecks) {
  EXPECT_THROW(RgbImage(2, 2, std::vector<double>(11)), DimensionMismatch);
  RgbImage img(3, 2);
  EXPECT_EQ(img.values().size(), 18u);
  img.at(2, 1, 2) = 0.5;
  EXPECT_EQ(img.values().back(), 0.5);
}

TEST(Augment, Rot90FourTimesIsIdentity) {
  const auto img = test::random_image(9, 9, 1);
  auto r = img;
  for (int i = 0; i < 4; ++i) r = augment(r, Augmentation::rot90);
  EXPECT_EQ(r, img);
}

TEST(Augment, HflipIsInvolution) {
  const auto img = test::random_image(7, 5, 2);
  EXPECT_EQ(augment(augment(img, Augmentation::hflip), Augmentation::hflip), img);
}

TEST(Augment, Rot180IsBothFlips) {
  const auto img = test::random_image(8, 8, 3);
  EXPECT_EQ(augment(img, Augmentation::rot180), vflip(augment(img, Augmentation::hflip)));
}

TEST(Augment, Rot270UndoesRot90) {
  const auto img = test::random_image(6, 6, 4);
  EXPECT_EQ(augment(augment(img, Augmentation::rot90), Augmentation::rot270), img);
}

TEST(Augment, Rot90Direction) {
  // Counter-clockwise: the top-right pixel moves to the top-left.
  DepthMap d(2, 2);
  d.at(1, 0) = 1.0;
  const auto r = augment(d, Augmentation::rot90);
  EXPECT_EQ(r.at(0, 0), 1.0);
}

TEST(Augment, IsPermutation) {
  const auto img = test::random_image(10, 10, 5);
  for (auto op : {Augmentation::rot90, Augmentation::rot180, Augmentation::rot270,
                  Augmentation::hflip}) {
    auto a = augment(img, op).values();
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(img.values().begin(), img.values().end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    EXPECT_EQ(x, y);
  }
}

TEST(Augment, RotationNeedsSquare) {
  const RgbImage img(4, 3);
  EXPECT_THROW(augment(img, Augmentation::rot90), NonSquare);
  EXPECT_THROW(augment(img, Augmentation::rot270), NonSquare);
  EXPECT_NO_THROW(augment(img, Augmentation::hflip));
}

TEST(Resize, ConstantStaysConstant) {
  const RgbImage img(13, 7, 0.3);
  const auto r = resize_bilinear(img, 32, 32);
  for (double v : r.values()) EXPECT_NEAR(v, 0.3, 1e-15);
}

TEST(Resize, BilinearMidpoint) {
  RgbImage img(2, 1);
  for (std::size_t c = 0; c < 3; ++c) img.at(1, 0, c) = 1.0;
  const auto r = resize_bilinear(img, 4, 1);
  // Centres at source x = -0.25, 0.25, 0.75, 1.25 clamp to [0, 1].
  EXPECT_DOUBLE_EQ(r.at(0, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(r.at(1, 0, 0), 0.25);
  EXPECT_DOUBLE_EQ(r.at(2, 0, 0), 0.75);
  EXPECT_DOUBLE_EQ(r.at(3, 0, 0), 1.0);
}

TEST(Resize, NearestKeepsSourceValues) {
  const auto d = test::random_depth(17, 9, 6, 1.0, 2.0);
  const auto r = resize_nearest(d, 40, 40);
  std::vector<double> src(d.values().begin(), d.values().end());
  std::sort(src.begin(), src.end());
  for (double v : r.values()) EXPECT_TRUE(std::binary_search(src.begin(), src.end(), v));
}

TEST(Normalization, SymmetricUnitRoundTrip) {
  const auto img = test::random_image(5, 5, 7);
  const auto s = to_symmetric_unit(img);
  for (double v : s.values()) {
    EXPECT_GE(v, -1.0);
    EXPECT_LE(v, 1.0);
  }
  const auto back = from_symmetric_unit(s);
  for (std::size_t i = 0; i < img.values().size(); ++i)
    EXPECT_NEAR(back.values()[i], img.values()[i], 1e-15);
}

TEST(Io, PngRoundTripAndQuantizer) {
  test::TempDir dir;
  const auto img = test::random_image(12, 9, 8);
  write_rgb_png(dir / "x.png", img);
  const auto back = read_rgb(dir / "x.png");
  ASSERT_TRUE(back.same_size(img));
  for (std::size_t i = 0; i < img.values().size(); ++i) {
    EXPECT_EQ(back.values()[i], quantize_u8(img.values()[i]) / 255.0);
    EXPECT_NEAR(back.values()[i], img.values()[i], 0.5 / 255.0 + 1e-12);
  }
  EXPECT_EQ(quantize_u8(-0.2), 0);
  EXPECT_EQ(quantize_u8(1.7), 255);
  EXPECT_EQ(quantize_u8(0.5), 128);
}

TEST(Io, DepthPngAndPgm) {
  test::TempDir dir;
  DepthMap d(3, 2);
  d.at(0, 0) = 0.25;
  d.at(2, 1) = 20.0;
  write_depth_png(dir / "d.png", d);
  const auto back = read_depth(dir / "d.png");
  EXPECT_DOUBLE_EQ(back.at(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(back.at(2, 1), 20.0);

  cv::Mat m(2, 2, CV_8UC1, cv::Scalar(10));
  cv::imwrite((dir / "d.pgm").string(), m);
  const auto pgm = read_depth(dir / "d.pgm", 0.1);
  EXPECT_DOUBLE_EQ(pgm.at(1, 1), 1.0);

  EXPECT_THROW(read_depth(dir / "nothing.png"), IoError);
  EXPECT_THROW(read_rgb(dir / "nothing.png"), IoError);
}

}  // namespace
}  // namespace aquasynth
