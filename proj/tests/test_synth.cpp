#include <gtest/gtest.h>

#include "support.hpp"

using namespace facade;
using support::ecp;

TEST(Synth, NoJitterMeansJitteredEqualsTruth) {
  SynthSpec s;
  s.balconies = true;
  s.door = true;
  const auto r = generate(s, ecp());
  EXPECT_EQ(r.jittered, r.truth);
  EXPECT_EQ(r.occluded, r.jittered);
  EXPECT_EQ(r.objects.size(), 12u + 12u + 1u);
  EXPECT_TRUE(r.palette.find("vegetation"));
  EXPECT_EQ(extract_instances(r.truth, r.palette).size(), r.objects.size());
}

TEST(Synth, DeterministicPerSeed) {
  SynthSpec s;
  s.center_sigma = 2;
  s.size_sigma = 1;
  s.occlusion = 0.1;
  s.seed = 12;
  const auto a = generate(s, ecp());
  const auto b = generate(s, ecp());
  EXPECT_EQ(a.jittered, b.jittered);
  EXPECT_EQ(a.occluded, b.occluded);
  EXPECT_NE(a.jittered, a.truth);
  s.seed = 13;
  EXPECT_NE(generate(s, ecp()).jittered, a.jittered);
}

TEST(Synth, OcclusionCoversRequestedFraction) {
  SynthSpec s;
  s.occlusion = 0.1;
  const auto r = generate(s, ecp());
  const auto veg = r.palette.require("vegetation");
  const auto n = std::count(r.occluded.data().begin(), r.occluded.data().end(), veg);
  EXPECT_EQ(double(n), std::ceil(0.1 * double(r.occluded.size())));
  for (std::size_t i = 0; i < r.occluded.size(); ++i) {
    if (r.occluded.data()[i] != veg) EXPECT_EQ(r.occluded.data()[i], r.jittered.data()[i]);
  }
}

TEST(Synth, JitteredObjectsStaySeparate) {
  std::mt19937_64 rng(77);
  for (int k = 0; k < 20; ++k) {
    const auto s = support::random_spec(rng, 2.0, 1.0);
    const auto r = generate(s, ecp());
    EXPECT_EQ(extract_instances(r.jittered, r.palette, {.min_area = 1}).size(), r.objects.size());
  }
}

TEST(Synth, LayoutOverflow) {
  SynthSpec s;
  s.spacing_x = 15;
  EXPECT_EQ(support::error_code([&] { generate(s, ecp()); }), ErrorCode::LayoutOverflow);
  s = {};
  s.rows = 10;
  EXPECT_EQ(support::error_code([&] { generate(s, ecp()); }), ErrorCode::LayoutOverflow);
  s = {};
  s.width = 0;
  EXPECT_EQ(support::error_code([&] { generate(s, ecp()); }), ErrorCode::InvalidArgument);
}

TEST(Synth, SpecJson) {
  SynthSpec s;
  s.rows = 2;
  s.center_sigma = 1.5;
  s.seed = 99;
  const auto back = synth_spec_from_json(nlohmann::json::parse(synth_spec_to_json(s).dump()));
  EXPECT_EQ(back.rows, 2);
  EXPECT_DOUBLE_EQ(back.center_sigma, 1.5);
  EXPECT_EQ(back.seed, 99u);
  EXPECT_EQ(support::error_code([] { synth_spec_from_json({{"colour", 1}}); }), ErrorCode::ConfigError);
}
