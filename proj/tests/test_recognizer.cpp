#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "gaborboost/recognizer.hpp"

using namespace gaborboost;

namespace {

GalleryIndex make_index(const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
  GalleryIndex idx;
  for (const auto& [id, f] : rows) idx.entries.push_back({id, f});
  for (std::size_t j = 0; j < rows.front().second.size(); ++j)
    idx.selection.push_back(j);
  return idx;
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Ncc, KnownValues) {
  const std::vector<double> a{1.0, 0.0};
  const std::vector<double> b{0.0, 1.0};
  const std::vector<double> c{2.0, 0.0};
  const std::vector<double> d{-1.0, 0.0};
  EXPECT_EQ(ncc_distance(a, a), 0.0);
  EXPECT_EQ(ncc_distance(a, c), 0.0);
  EXPECT_EQ(ncc_distance(a, b), 1.0);
  EXPECT_EQ(ncc_distance(a, d), 2.0);
  const std::vector<double> e{1.0, 1.0};
  EXPECT_NEAR(ncc_distance(a, e), 1.0 - 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Ncc, ZeroVectorPolicy) {
  const std::vector<double> z{0.0, 0.0, 0.0};
  const std::vector<double> a{1.0, 2.0, 3.0};
  EXPECT_EQ(ncc_distance(z, z), 0.0);
  EXPECT_EQ(ncc_distance(z, a), 1.0);
  EXPECT_EQ(ncc_distance(a, z), 1.0);
}

TEST(Ncc, ErrorCases) {
  const std::vector<double> a{1.0, 2.0};
  const std::vector<double> b{1.0};
  const std::vector<double> empty;
  EXPECT_THROW(ncc_distance(a, b), ParameterError);
  EXPECT_THROW(ncc_distance(empty, empty), ParameterError);
}

TEST(Ncc, BoundedSymmetricAndScaleInvariant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a(1 + trial % 20), b(a.size());
    for (double& x : a) x = g(rng);
    for (double& x : b) x = g(rng);
    const double d = ncc_distance(a, b);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 2.0);
    EXPECT_EQ(d, ncc_distance(b, a));
    EXPECT_NEAR(ncc_distance(a, a), 0.0, 1e-12);
    auto as = a;
    const double s = scale(rng);
    for (double& x : as) x *= s;
    EXPECT_NEAR(ncc_distance(as, b), d, 1e-12);
  }
}

TEST(NearestNeighbor, HandComputedGallery) {
  // Directions in the plane; the probe (1, 0.2) is closest to "east".
  const auto idx = make_index({{"north", {0.0, 1.0}},
                               {"east", {1.0, 0.0}},
                               {"west", {-1.0, 0.0}},
                               {"northeast", {1.0, 1.0}},
                               {"south", {0.0, -2.0}}});
  const std::vector<double> probe{1.0, 0.2};
  const Match m = nearest_match(idx, probe, 2);
  EXPECT_EQ(idx.entries[m.entry].identity, "east");
  EXPECT_NEAR(m.distance, 1.0 - 1.0 / std::sqrt(1.04), 1e-15);
  // With one feature every positive entry ties at distance 0; the first wins.
  EXPECT_EQ(nearest_neighbor(idx, probe, 1), "east");
  const std::vector<double> up{0.0, 5.0};
  EXPECT_EQ(nearest_neighbor(idx, up, 2), "north");
}

TEST(NearestNeighbor, TiesGoToGalleryOrder) {
  const auto idx = make_index({{"b", {1.0, 0.0}}, {"a", {2.0, 0.0}}});
  EXPECT_EQ(nearest_neighbor(idx, std::vector<double>{5.0, 0.0}, 2), "b");
  const auto single = make_index({{"only", {0.3, -0.7}}});
  std::mt19937_64 rng(1);
  for (int i = 0; i < 20; ++i)
    EXPECT_EQ(nearest_neighbor(single, random_vec(2, rng), 2), "only");
}

TEST(Evaluate, RowDependsOnlyOnTruncatedVectors) {
  std::mt19937_64 rng(12);
  GalleryIndex idx;
  std::vector<Probe> probes;
  for (int i = 0; i < 6; ++i) {
    idx.entries.push_back({"id" + std::to_string(i), random_vec(5, rng)});
    probes.push_back({"p" + std::to_string(i), "id" + std::to_string(i % 3),
                      random_vec(5, rng)});
  }
  idx.selection = {0, 1, 2, 3, 4};
  const auto base = evaluate(idx, probes, {3});
  for (auto& e : idx.entries) e.features.push_back(100.0);
  for (auto& p : probes) p.features.push_back(-3.0);
  idx.selection.push_back(5);
  const auto extended = evaluate(idx, probes, {3, 6});
  EXPECT_EQ(extended.accuracy[0].second, base.accuracy[0].second);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    EXPECT_EQ(extended.decisions[i].predicted, base.decisions[i].predicted);
    EXPECT_EQ(extended.decisions[i].distance, base.decisions[i].distance);
  }
}

TEST(NearestNeighbor, FeatureCountBounds) {
  const auto idx = make_index({{"a", {1.0, 2.0}}});
  const std::vector<double> p{1.0, 2.0};
  EXPECT_THROW(nearest_match(idx, p, 0), ParameterError);
  EXPECT_THROW(nearest_match(idx, p, 3), ParameterError);
  GalleryIndex empty;
  empty.selection = {0};
  EXPECT_THROW(nearest_match(empty, p, 1), ParameterError);
}

TEST(Evaluate, GalleryAsProbesIsPerfect) {
  std::mt19937_64 rng(8);
  GalleryIndex idx;
  idx.selection = {4, 9, 1, 7, 3, 0, 2, 8};
  std::vector<Probe> probes;
  for (int i = 0; i < 12; ++i) {
    const auto f = random_vec(8, rng);
    idx.entries.push_back({"id" + std::to_string(i), f});
    probes.push_back({"p" + std::to_string(i), "id" + std::to_string(i), f});
  }
  const auto report = evaluate(idx, probes, {2, 4, 8}, 3);
  ASSERT_EQ(report.accuracy.size(), 3u);
  for (const auto& [k, acc] : report.accuracy) EXPECT_EQ(acc, 100.0);
  EXPECT_EQ(report.decisions.size(), 36u);
  for (const auto& d : report.decisions) EXPECT_NEAR(d.distance, 0.0, 1e-12);
}

TEST(Evaluate, AccuracyCountsAndScaleInvariance) {
  const auto idx = make_index({{"a", {1.0, 0.0}}, {"b", {0.0, 1.0}}});
  std::vector<Probe> probes{{"p1", "a", {0.9, 0.1}},
                            {"p2", "b", {0.9, 0.2}},
                            {"p3", "b", {0.1, 0.9}},
                            {"p4", "a", {0.2, 0.1}}};
  const auto r = evaluate(idx, probes, {2});
  EXPECT_EQ(r.accuracy[0].second, 75.0);
  for (auto& p : probes)
    for (double& x : p.features) x *= 13.0;
  EXPECT_EQ(evaluate(idx, probes, {2}, 2).accuracy[0].second, 75.0);

  std::ostringstream table;
  write_accuracy_table(r, table);
  EXPECT_EQ(table.str(), "feature_count\taccuracy\n2\t75.0\n");
  std::ostringstream csv;
  write_probe_csv(r, csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')),
            "feature_count,probe,predicted,actual,distance");
}

TEST(Evaluate, ErrorCases) {
  const auto idx = make_index({{"a", {1.0, 0.0}}});
  const std::vector<Probe> probes{{"p", "a", {1.0, 0.0}}};
  EXPECT_THROW(evaluate(idx, probes, {3}), ParameterError);
  EXPECT_THROW(evaluate(idx, probes, {}), ParameterError);
  EXPECT_THROW(evaluate(idx, {}, {1}), ParameterError);
  auto bad = idx;
  bad.entries[0].features.pop_back();
  EXPECT_THROW(evaluate(bad, probes, {1}), ParameterError);
}
