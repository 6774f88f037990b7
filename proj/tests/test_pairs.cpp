#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "gaborboost/pairs.hpp"

using namespace gaborboost;

namespace {

std::vector<GallerySample> random_gallery(int ids, int per_id, std::size_t dim,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<GallerySample> g;
  for (int id = 0; id < ids; ++id)
    for (int k = 0; k < per_id; ++k) {
      GallerySample s{"id" + std::to_string(id),
                      "img" + std::to_string(id) + "_" + std::to_string(k), {}};
      s.features.resize(dim);
      for (double& x : s.features) x = u(rng);
      g.push_back(std::move(s));
    }
  return g;
}

}  // namespace

TEST(Pairs, ReferenceProtocolCounts) {
  const auto g = random_gallery(200, 2, 4, 1);
  const auto set = build_pairs(g, 200, 1600, 3);
  EXPECT_EQ(set.size(), 1800u);
  EXPECT_EQ(set.num_intra, 200u);
  EXPECT_EQ(set.num_extra, 1600u);
  EXPECT_NO_THROW(set.validate());
}

TEST(Pairs, LabelsMatchIdentitiesAndDiffsAreAbsolute) {
  const auto g = random_gallery(6, 3, 10, 2);
  const auto set = build_pairs(g, 10, 40, 5);
  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& s : set.samples) {
    const auto [p, q] = s.source_pair;
    EXPECT_TRUE(seen.insert(s.source_pair).second) << "duplicate pair";
    EXPECT_EQ(s.label == kIntra, g[p].identity == g[q].identity);
    for (std::size_t j = 0; j < 10; ++j) {
      EXPECT_EQ(component(s, j), std::abs(g[p].features[j] - g[q].features[j]));
      EXPECT_GE(component(s, j), 0.0);
    }
  }
}

TEST(Pairs, DifferenceIsSymmetric) {
  const auto g = random_gallery(2, 2, 7, 9);
  const auto pq = make_diff(g[0].features, g[2].features, kExtra, 0, 2);
  const auto qp = make_diff(g[2].features, g[0].features, kExtra, 2, 0);
  EXPECT_EQ(pq.values, qp.values);
}

TEST(Pairs, ComponentBasics) {
  const std::vector<double> a{3.0};
  const std::vector<double> b{1.0};
  EXPECT_EQ(component(make_diff(a, b, kExtra, 0, 1), 0), 2.0);
  const auto zero = make_diff(a, a, kIntra, 0, 0);
  EXPECT_EQ(component(zero, 0), 0.0);
  EXPECT_EQ(zero.label, kIntra);
  EXPECT_THROW(component(zero, 1), ParameterError);
}

TEST(Pairs, SeedDeterminism) {
  const auto g = random_gallery(10, 2, 3, 4);
  const auto a = build_pairs(g, 5, 30, 11);
  const auto b = build_pairs(g, 5, 30, 11);
  const auto c = build_pairs(g, 5, 30, 12);
  auto pairs = [](const TrainingSet& s) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (const auto& d : s.samples) out.push_back(d.source_pair);
    return out;
  };
  EXPECT_EQ(pairs(a), pairs(b));
  EXPECT_NE(pairs(a), pairs(c));
}

TEST(Pairs, CapacityAndParameterErrors) {
  EXPECT_THROW(build_pairs({}, 1, 1, 0), ParameterError);
  const auto g = random_gallery(3, 2, 2, 1);  // 3 intra, 12 extra pairs
  EXPECT_THROW(build_pairs(g, 4, 1, 0), CapacityError);
  EXPECT_THROW(build_pairs(g, 1, 13, 0), CapacityError);
  try {
    build_pairs(g, 4, 1, 0);
  } catch (const CapacityError& e) {
    EXPECT_NE(std::string(e.what()).find("intra"), std::string::npos);
  }
  const auto singletons = random_gallery(4, 1, 2, 1);
  EXPECT_THROW(build_pairs(singletons, 1, 1, 0), CapacityError);
  EXPECT_NO_THROW(build_pairs(g, 3, 12, 0));
}

TEST(Pairs, PersistenceRoundTrip) {
  const auto g = random_gallery(4, 2, 6, 8);
  auto set = build_pairs(g, 4, 10, 21);
  GaborBankConfig cfg;
  set.layout = FeatureLayout{cfg, 8, 8};
  const auto path =
      (std::filesystem::temp_directory_path() / "gaborboost_pairs.bin").string();
  save_training_set(set, path);
  const auto back = load_training_set(path);
  ASSERT_EQ(back.size(), set.size());
  EXPECT_EQ(back.seed, 21u);
  EXPECT_EQ(back.num_intra, 4u);
  ASSERT_TRUE(back.layout.has_value());
  EXPECT_EQ(*back.layout, *set.layout);
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_EQ(back.samples[i].values, set.samples[i].values);
    EXPECT_EQ(back.samples[i].label, set.samples[i].label);
    EXPECT_EQ(back.samples[i].source_pair, set.samples[i].source_pair);
  }
  {
    std::ofstream trunc(path, std::ios::binary | std::ios::app);
    trunc << "x";
  }
  EXPECT_THROW(load_training_set(path), FormatError);
}
