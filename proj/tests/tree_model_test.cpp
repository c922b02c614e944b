#include <gtest/gtest.h>

#include <cmath>

#include "weaktree/tree_model.hpp"

using namespace weaktree;

TEST(GeometricTree, RadiiForDimensionThreeHalves) {
  const TreeSpec spec = build_geometric_tree(1.5, 2, 10.0);
  ASSERT_EQ(spec.generations(), 1u);
  EXPECT_DOUBLE_EQ(spec.generation_radii[0], 3.0);
  const TreeSpec taller = build_geometric_tree(1.5, 2, 20.0);
  ASSERT_EQ(taller.generations(), 2u);
  EXPECT_DOUBLE_EQ(taller.generation_radii[1], 15.0);
}

TEST(GeometricTree, RadiiForDimensionTwo) {
  const TreeSpec spec = build_geometric_tree(2.0, 2, 10.0);
  ASSERT_EQ(spec.generations(), 3u);
  EXPECT_DOUBLE_EQ(spec.generation_radii[0], 1.0);
  EXPECT_DOUBLE_EQ(spec.generation_radii[1], 3.0);
  EXPECT_DOUBLE_EQ(spec.generation_radii[2], 7.0);
}

TEST(GeometricTree, TruncationBelowFirstGenerationGivesSingleEdge) {
  const TreeSpec spec = build_geometric_tree(1.5, 2, 2.0);
  EXPECT_EQ(spec.generations(), 0u);
  for (double t : {0.0, 0.5, 1.9, 2.0}) EXPECT_EQ(branching_function(spec, t), 1);
}

TEST(GeometricTree, RejectsDimensionOutsideRange) {
  EXPECT_THROW(build_geometric_tree(1.0, 2, 10.0), PreconditionError);
  EXPECT_THROW(build_geometric_tree(2.5, 2, 10.0), PreconditionError);
  EXPECT_THROW(build_geometric_tree(1.5, 1, 10.0), PreconditionError);
}

TEST(BranchingFunction, RightContinuousAtRadii) {
  const TreeSpec spec = build_geometric_tree(1.5, 2, 100.0);
  EXPECT_EQ(branching_function(spec, 0.0), 1);
  EXPECT_EQ(branching_function(spec, 2.9), 1);
  EXPECT_EQ(branching_function(spec, 3.0), 2);
  EXPECT_EQ(branching_function(spec, 15.0), 4);
  EXPECT_EQ(branching_function(spec, 14.999), 2);
  EXPECT_THROW(branching_function(spec, -1e-9), DomainError);
}

TEST(BranchingFunction, NonDecreasingPowersOfB) {
  const TreeSpec spec = build_geometric_tree(1.3, 3, 5000.0);
  std::int64_t previous = 1;
  for (int i = 0; i <= 20000; ++i) {
    const double t = 5000.0 * i / 20000.0;
    const std::int64_t g = branching_function(spec, t);
    EXPECT_GE(g, previous);
    std::int64_t p = g;
    while (p % 3 == 0) p /= 3;
    EXPECT_EQ(p, 1);
    previous = g;
  }
}

TEST(DimensionConstants, BinaryAndTernaryTrees) {
  for (double d : {1.2, 1.5, 2.0}) {
    const DimensionConstants two = dimension_constants(build_geometric_tree(d, 2, 50.0));
    EXPECT_DOUBLE_EQ(two.c1, 0.5);
    EXPECT_DOUBLE_EQ(two.c2, 1.0);
    EXPECT_DOUBLE_EQ(two.e_plus, 0.5);
    EXPECT_DOUBLE_EQ(two.e_minus, 2.0);
    EXPECT_EQ(two.e_plus * two.e_minus, 1.0);
    const DimensionConstants three = dimension_constants(build_geometric_tree(d, 3, 50.0));
    EXPECT_DOUBLE_EQ(three.c1, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(three.c2, 1.0);
    EXPECT_EQ(three.e_plus * three.e_minus, 1.0);
  }
  const DimensionConstants bare = dimension_constants(build_geometric_tree(1.01, 2, 5.0));
  EXPECT_DOUBLE_EQ(bare.c1, 0.5);
}

TEST(DimensionConstants, SandwichHoldsOnDenseGrid) {
  for (double d : {1.3, 1.6, 2.0}) {
    for (int b : {2, 3}) {
      const TreeSpec spec = build_geometric_tree(d, b, 1e4);
      const DimensionConstants c = dimension_constants(spec);
      for (int i = 0; i <= 200000; ++i) {
        const double t = 1e4 * i / 200000.0;
        const double growth = std::pow(1.0 + t, d - 1.0);
        const double g = static_cast<double>(branching_function(spec, t));
        EXPECT_LE(c.c1 * growth, g * (1.0 + 1e-12)) << "d=" << d << " b=" << b << " t=" << t;
        EXPECT_LE(g, c.c2 * growth * (1.0 + 1e-12)) << "d=" << d << " b=" << b << " t=" << t;
      }
    }
  }
}

TEST(ReducedHeight, SingleEdgeIsHeight) {
  const ReducedHeight h = reduced_height(build_geometric_tree(1.5, 2, 2.5));
  EXPECT_DOUBLE_EQ(h.truncated, 2.5);
}

TEST(ReducedHeight, PiecewiseIntegral) {
  TreeSpec spec = build_geometric_tree(1.5, 2, 15.0);
  ASSERT_EQ(spec.generations(), 1u);
  const ReducedHeight h = reduced_height(spec);
  EXPECT_DOUBLE_EQ(h.truncated, 3.0 + 12.0 / 2.0);
  EXPECT_TRUE(h.idealized_infinite);
}

TEST(ReducedHeight, IdealizedTreeIsInfinite) {
  for (double d : {1.1, 1.5, 2.0}) {
    for (int b : {2, 5}) EXPECT_TRUE(reduced_height(build_geometric_tree(d, b, 100.0)).idealized_infinite);
  }
}
