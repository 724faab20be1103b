#include <gtest/gtest.h>

#include "nrf/partition.hpp"

using namespace nrf;

TEST(AreaPartition, OffsetsAndIndicesAreContiguous) {
  const AreaPartition p = AreaPartition::build({{2, 1}, {3, 2}, {1, 1}});
  EXPECT_EQ(p.areas(), 3);
  EXPECT_EQ(p.total(Signal::x), 6);
  EXPECT_EQ(p.total(Signal::u), 4);
  EXPECT_EQ(p.offset(Signal::x, 2), 5);
  EXPECT_EQ(p.offset(Signal::u, 1), 1);
  EXPECT_EQ(p.indices(Signal::x, 1), (std::vector<int>{2, 3, 4}));
  EXPECT_EQ(p.indices(Signal::u, 1), (std::vector<int>{1, 2}));
  EXPECT_EQ(p.area_of(Signal::x, 4), 1);
  EXPECT_EQ(p.area_of(Signal::u, 3), 2);
  EXPECT_FALSE(p.has_controller_sizes());
}

TEST(AreaPartition, SelectorsPickTheAreaBlocks) {
  const AreaPartition p = AreaPartition::build({{2, 1}, {1, 2}});
  const Matrix Sx = p.selector(Signal::x, 1);
  ASSERT_EQ(Sx.rows(), 3);
  ASSERT_EQ(Sx.cols(), 1);
  EXPECT_EQ(Sx(2, 0), 1.0);
  EXPECT_EQ(Sx.sum(), 1.0);
  const Matrix Z = p.z_selector(0);
  EXPECT_EQ(Z.rows(), 6);
  EXPECT_EQ(Z.cols(), 3);
  Vector v(6);
  v << 1, 2, 3, 4, 5, 6;
  const Vector zi = Z.transpose() * v;
  EXPECT_EQ(zi, (Vector(3) << 1, 2, 4).finished());
  EXPECT_EQ(p.slice(v.head(3), Signal::x, 0), (Vector(2) << 1, 2).finished());
}

TEST(AreaPartition, ControllerSizesAttach) {
  const AreaPartition p = AreaPartition::build({{2, 1}, {1, 1}});
  EXPECT_THROW(p.total(Signal::w), Error);
  const AreaPartition q = p.with_controller_sizes({3, 0});
  EXPECT_EQ(q.total(Signal::w), 3);
  EXPECT_TRUE(q.indices(Signal::w, 1).empty());
  const Matrix Zc = q.zc_selector(0);
  EXPECT_EQ(Zc.rows(), 6);
  EXPECT_EQ(Zc.cols(), 5);
  EXPECT_THROW(p.with_controller_sizes({1}), Error);
}

TEST(AreaPartition, RejectsDegenerateSplits) {
  EXPECT_THROW(AreaPartition::build({{2, 1}}), Error);
  EXPECT_THROW(AreaPartition::build({{2, 1}, {0, 1}}), Error);
  EXPECT_THROW(AreaPartition::build({{2, 1}, {1, 0}}), Error);
}

TEST(Neighborhoods, ValidationRequiresSelfAndRange) {
  EXPECT_NO_THROW(validate_neighborhoods({{0, 1}, {1}}, 2));
  EXPECT_THROW(validate_neighborhoods({{1}, {1}}, 2), Error);
  EXPECT_THROW(validate_neighborhoods({{0, 2}, {1}}, 2), Error);
  EXPECT_THROW(validate_neighborhoods({{0}}, 2), Error);
  const Neighborhoods full = full_neighborhoods(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_TRUE(in_neighborhood(full, i, j));
  EXPECT_FALSE(in_neighborhood({{0}, {1, 0}}, 0, 1));
  EXPECT_TRUE(in_neighborhood({{0}, {1, 0}}, 1, 0));
}
