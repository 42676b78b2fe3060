#include <gtest/gtest.h>

#include "support.hpp"

using namespace facade;

namespace {

GrammarDoc grid_grammar(bool balconies = false) {
  GrammarDoc g;
  g.width = 100;
  g.height = 120;
  for (int f = 0; f < 3; ++f) {
    Floor fl{f, 120.0 - 40 * (f + 1), 120.0 - 40 * f, {}};
    for (int c = 0; c < 3; ++c) {
      fl.elements.push_back({"window", 20.0 + 30 * c, fl.y_top + 15, 10, 16});
      if (balconies) fl.elements.push_back({"balcony", 20.0 + 30 * c, fl.y_top + 28, 16, f == 2 && c == 2 ? 1 : 6});
    }
    g.floors.push_back(fl);
  }
  return g;
}

std::pair<Vec3, Vec3> bounds(const MeshFragment& f) {
  Vec3 lo = f.vertices.front(), hi = lo;
  for (const auto& v : f.vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
  }
  return {lo, hi};
}

}  // namespace

TEST(Place, ScalesAndFlipsY) {
  const auto tpl = box_template("window", 0.15, false, "window");
  const auto f = place_template(tpl, {"window", 10, 10, 4, 4}, 0.05, 100);
  const auto [lo, hi] = bounds(f);
  EXPECT_NEAR(lo.x, 0.4, 1e-12);
  EXPECT_NEAR(hi.x, 0.6, 1e-12);
  EXPECT_NEAR((lo.y + hi.y) / 2, 90 * 0.05, 1e-12);
  EXPECT_NEAR(hi.y - lo.y, 0.2, 1e-12);
  EXPECT_NEAR(lo.z, -0.15, 1e-12);
  EXPECT_NEAR(hi.z, 0.0, 1e-12);
  EXPECT_EQ(support::error_code([&] { place_template(tpl, {"window", 10, 10, 0, 4}, 0.05, 100); }),
            ErrorCode::InvalidArgument);
}

TEST(Build, GroupCountsForGrid) {
  const auto m = build_mesh(grid_grammar(), builtin_templates());
  EXPECT_EQ(m.groups.size(), 12u);
  EXPECT_EQ(m.groups[0].name, "floor_0");
  EXPECT_EQ(m.groups[3].name, "floor_0_window_0");
  for (const auto& t : m.triangles) {
    for (auto i : t) EXPECT_LT(i, m.vertices.size());
    EXPECT_GT(triangle_area(m, t), 0.0);
  }
}

TEST(Build, TinyBalconyOmitted) {
  const auto m = build_mesh(grid_grammar(true), builtin_templates());
  const auto balconies = std::count_if(m.groups.begin(), m.groups.end(), [](const auto& g) { return g.cls == "balcony"; });
  EXPECT_EQ(balconies, 8);
  const auto all = build_mesh(grid_grammar(true), builtin_templates(), {.balcony_threshold = 0});
  EXPECT_EQ(all.groups.size(), m.groups.size() + 1);
}

TEST(Build, EmptyGrammarGivesOneSlab) {
  GrammarDoc g;
  g.width = 50;
  g.height = 80;
  g.bands = {{"roof", 0, 10}, {"shop", 60, 80}};
  const auto m = build_mesh(g, builtin_templates());
  ASSERT_EQ(m.groups.size(), 3u);
  EXPECT_EQ(m.groups[0].name, "floor_0");
  EXPECT_DOUBLE_EQ(m.groups[0].element.y, 35);
  EXPECT_EQ(m.groups[1].name, "roof");
  EXPECT_EQ(m.groups[2].name, "shop");
}

TEST(Build, MissingTemplateAndBadOptions) {
  auto g = grid_grammar();
  g.floors[0].elements.push_back({"gargoyle", 50, 100, 5, 5});
  EXPECT_EQ(support::error_code([&] { build_mesh(g, builtin_templates()); }), ErrorCode::MissingTemplate);
  EXPECT_EQ(support::error_code([&] { build_mesh(grid_grammar(), builtin_templates(), {.roof_pitch_deg = 90}); }),
            ErrorCode::InvalidArgument);
}

TEST(Obj, SingleTriangleText) {
  Mesh m;
  MeshFragment f{{{0, 0, 0}, {1, 0, 0}, {0, 1, -0.0000001}}, {{0, 1, 2}}};
  m.append(f, {"tri", "wall", "wall", 0, 0, 0, 0, {}});
  EXPECT_EQ(obj_text(m, "a.mtl"),
            "# facadekit procedural building\nmtllib a.mtl\no tri\nusemtl wall\n"
            "v 0.000000 0.000000 0.000000\nv 1.000000 0.000000 0.000000\nv 0.000000 1.000000 0.000000\n"
            "f 1 2 3\n");
  EXPECT_EQ(mtl_text(m, {{"wall", {255, 0, 51}}}), "newmtl wall\nKd 1.000000 0.000000 0.200000\n\n");
}

TEST(Obj, DeterministicAndParsesBack) {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 5; ++k) {
    const auto g = support::random_grammar(rng);
    const auto text = obj_text(build_mesh(g, builtin_templates()), "m.mtl");
    EXPECT_EQ(text, obj_text(build_mesh(g, builtin_templates()), "m.mtl"));
    const auto doc = parse_obj(text);
    EXPECT_EQ(doc.mtllib, "m.mtl");
    EXPECT_EQ(obj_text(doc.mesh, doc.mtllib), text);
  }
}

TEST(Obj, ParseRejectsBadFaces) {
  EXPECT_EQ(support::error_code([] { parse_obj("o a\nusemtl w\nv 0 0 0\nf 1 2 3\n"); }), ErrorCode::ParseFailure);
  EXPECT_EQ(support::error_code([] { parse_obj("o a\nusemtl w\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3 4\n"); }),
            ErrorCode::ParseFailure);
}

TEST(Templates, LoadFromJson) {
  const auto path = std::filesystem::temp_directory_path() / "facade_templates.json";
  {
    std::ofstream out(path);
    out << R"({"templates": [{"class": "door", "depth": 0.2, "material": "wood",
               "vertices": [[0,0,0],[1,0,0],[1,1,1],[0,1,1]], "triangles": [[0,1,2],[0,2,3]]}]})";
  }
  const auto lib = load_templates(path);
  EXPECT_EQ(lib.at("door").material, "wood");
  EXPECT_EQ(lib.at("door").triangles.size(), 2u);
  EXPECT_TRUE(lib.count("window"));
  std::filesystem::remove(path);
}
