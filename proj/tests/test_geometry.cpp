#include "doctest.h"

#include "cellforest/geometry.hpp"
#include "support.hpp"

using namespace cellforest;
using cftest::art;

TEST_CASE("pixel sets, union and overlap") {
  const auto f = art(0, {"112.", "122.", "...."});
  const PixelSet a = pixels_of(f, 1);
  const PixelSet b = pixels_of(f, 2);
  CHECK(a.area() == 3);
  CHECK(b.area() == 3);
  CHECK(set_union(a, b).area() == 6);
  CHECK(pixel_overlap(a, b) == 0);
  CHECK(pixel_overlap(a, set_union(a, b)) == 3);
  CHECK(pixels_of(f, 9).empty());

  const auto g = art(1, {"1111", "....", "...."});
  CHECK(pixel_overlap(f, 1, g, 1) == 2);
  CHECK_THROWS_AS(pixel_overlap(f, 1, art(0, {"1"}), 1), InputError);
}

TEST_CASE("touching uses 8-adjacency") {
  const auto f = art(0, {"1...", ".2..", "...3"});
  CHECK(regions_touch(f, 1, 2));
  CHECK_FALSE(regions_touch(f, 1, 3));
  CHECK_FALSE(regions_touch(f, 2, 3));
}

TEST_CASE("four touching fragments merge into one fresh label") {
  const auto f = art(0, {"1234", "1234", "...."});
  const Label labels[] = {1, 2, 3, 4};
  const MergeResult r = merge_regions(f, labels);
  CHECK(r.label == 5);
  CHECK(r.frame.cell_labels() == std::vector<Label>{5});
  CHECK(pixels_of(r.frame, 5).area() == 8);
  CHECK(r.frame.index() == 0);
  const Label unknown[] = {1, 9};
  CHECK_THROWS_AS(merge_regions(f, unknown), InputError);
}

TEST_CASE("split by seeds partitions the region") {
  const auto f = art(0, {"11111111", "11111111"});
  const Point seeds[] = {{0.5, 0.5}, {6.5, 0.5}};
  const SplitResult r = split_region_by_seeds(f, 1, seeds);
  REQUIRE(r.labels.size() == 2);
  const PixelSet a = pixels_of(r.frame, r.labels[0]);
  const PixelSet b = pixels_of(r.frame, r.labels[1]);
  CHECK(a.area() + b.area() == 16);
  CHECK(a.area() == 8);
  CHECK(centroid_of(a).x < centroid_of(b).x);
  CHECK(frame_problems(r.frame).empty());
}

TEST_CASE("split distance is geodesic, not euclidean") {
  // A U shape: the seed in the left arm must not claim the right arm even
  // though it is closer in a straight line than the bottom seed.
  const auto f = art(0, {"11.11", "11.11", "11.11", "11111"});
  const Point seeds[] = {{0.5, 0.0}, {4.0, 3.0}};
  const SplitResult r = split_region_by_seeds(f, 1, seeds);
  CHECK(r.frame.at(3, 0) == r.labels[1]);
  CHECK(r.frame.at(0, 0) == r.labels[0]);
}

TEST_CASE("infeasible splits") {
  const auto f = art(0, {"1.", ".."});
  const Point one[] = {{0, 0}};
  const Point two[] = {{0, 0}, {1, 1}};
  CHECK_THROWS_AS(split_region_by_seeds(f, 1, one), SplitInfeasible);
  CHECK_THROWS_AS(split_region_by_seeds(f, 1, two), SplitInfeasible);
}

TEST_CASE("contact clusters") {
  const auto f = art(0, {"12..34", "......", "5....."});
  const Label labels[] = {1, 2, 3, 4, 5};
  const auto clusters = connected_clusters(f, labels);
  REQUIRE(clusters.size() == 3);
  CHECK(clusters[0] == std::vector<Label>{1, 2});
  CHECK(clusters[1] == std::vector<Label>{3, 4});
  CHECK(clusters[2] == std::vector<Label>{5});
}

TEST_CASE("dilation is chebyshev and clipped") {
  const auto f = art(0, {".....", "..1..", ".....", "....."});
  CHECK(dilate(pixels_of(f, 1), 1).area() == 9);
  CHECK(dilate(pixels_of(f, 1), 2).area() == 20);
  CHECK(dilate(pixels_of(f, 1), 0).area() == 1);
}
