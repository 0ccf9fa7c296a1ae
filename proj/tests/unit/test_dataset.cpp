#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "dgc/error.hpp"
#include "dgc/geometry/dataset.hpp"

namespace dgc::geometry {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("dgc_dataset_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

DatasetSpec small_spec() {
  DatasetSpec s;
  s.count = 6;
  s.kinds = {PairKind::Affine, PairKind::Tps, PairKind::Homography};
  s.resolution = 16;
  s.seed = 7;
  s.val_fraction = 1.0 / 3.0;
  return s;
}

TEST(Manifest, KindsRoundRobinAndValidationTail) {
  const auto m = make_manifest(small_spec());
  ASSERT_EQ(m.pairs.size(), 6u);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(m.pairs[static_cast<std::size_t>(i)].kind, small_spec().kinds[static_cast<std::size_t>(i % 3)]);
    EXPECT_EQ(m.pairs[static_cast<std::size_t>(i)].split, i >= 4 ? Split::Val : Split::Train);
    EXPECT_EQ(m.pairs[static_cast<std::size_t>(i)].seed, pair_seed(7, i));
  }
  EXPECT_EQ(pair_seed(7, 3), 7u ^ 3u);
}

TEST(Manifest, DefaultSplitIsNinetyTen) {
  DatasetSpec s;
  s.count = 40;
  const auto m = make_manifest(s);
  int val = 0;
  for (const auto& p : m.pairs) val += p.split == Split::Val;
  EXPECT_EQ(val, 4);
}

TEST(Manifest, ParseKinds) {
  EXPECT_EQ(parse_pair_kinds("affine,tps,homo"),
            (std::vector<PairKind>{PairKind::Affine, PairKind::Tps, PairKind::Homography}));
  EXPECT_EQ(parse_pair_kind("homography"), PairKind::Homography);
  EXPECT_EQ(parse_pair_kind("pose"), PairKind::Pose);
  EXPECT_THROW(parse_pair_kind("perspective"), UsageError);
}

TEST(DatasetIo, GenerateLoadRoundTrip) {
  const fs::path dir = fresh_dir("roundtrip");
  const auto spec = small_spec();
  const auto m = generate_dataset(spec, dir);
  const Dataset ds = load_dataset(dir);
  ASSERT_EQ(ds.pairs.size(), 6u);
  EXPECT_EQ(ds.manifest.resolution, 16);
  EXPECT_EQ(ds.manifest.seed, 7u);
  EXPECT_EQ(ds.split(Split::Val).size(), 2u);
  for (const auto& lp : ds.pairs) {
    const auto g = generate_pair(lp.record, 16, spec.strength);
    // Images are 8-bit quantized before writing, so they reload exactly.
    EXPECT_EQ(lp.pair.source_image, g.pair.source_image);
    EXPECT_EQ(lp.pair.target_image, g.pair.target_image);
    EXPECT_EQ(lp.pair.gt_map, g.pair.gt_map);
    EXPECT_EQ(lp.pair.gt_mask, g.pair.gt_mask);
    EXPECT_EQ(lp.record.kind, m.pairs[static_cast<std::size_t>(lp.record.id)].kind);
  }
}

TEST(DatasetIo, RegenerationIsByteIdentical) {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  generate_dataset(small_spec(), a);
  generate_dataset(small_spec(), b);
  for (const auto& e : fs::directory_iterator(a)) {
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
  }
}

TEST(DatasetIo, PairsAreIndependentOfGenerationOrder) {
  const auto m = make_manifest(small_spec());
  const auto last_first = generate_pair(m.pairs.back(), 16, 0.2);
  for (const auto& r : m.pairs) (void)generate_pair(r, 16, 0.2);
  EXPECT_EQ(generate_pair(m.pairs.back(), 16, 0.2).pair.source_image, last_first.pair.source_image);
}

TEST(DatasetIo, ZeroStrengthGivesIdentityPairs) {
  auto spec = small_spec();
  spec.strength = 0.0;
  for (const auto& r : make_manifest(spec).pairs) {
    const auto g = generate_pair(r, 16, 0.0);
    EXPECT_EQ(g.pair.gt_map, identity_map(16, 16));
    EXPECT_EQ(g.pair.gt_mask.coverage(), 1.0);
    EXPECT_EQ(g.pair.source_image, g.pair.target_image);
  }
}

TEST(DatasetIo, MapFileLayout) {
  const fs::path dir = fresh_dir("layout");
  fs::create_directories(dir);
  CorrespondenceMap m(3, 2);
  for (std::size_t i = 0; i < m.uv.size(); ++i) m.uv[i] = 0.25f * static_cast<float>(i) - 1.0f;
  write_map(dir / "x.map", m);
  const std::string bytes = slurp(dir / "x.map");
  ASSERT_EQ(bytes.size(), 4u + 8u + 4u * 12u);
  EXPECT_EQ(bytes.substr(0, 4), "CMAP");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 3);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);
  float second;  // u of pixel (0, 0) then v of pixel (0, 0)
  std::memcpy(&second, bytes.data() + 16, 4);
  EXPECT_EQ(second, m.v(0, 0));
  EXPECT_EQ(read_map(dir / "x.map"), m);

  MatchabilityMask k(3, 2);
  k.valid = {1, 0, 1, 1, 0, 0};
  write_mask(dir / "x.mask", k);
  EXPECT_EQ(slurp(dir / "x.mask").substr(0, 4), "MSK1");
  EXPECT_EQ(read_mask(dir / "x.mask"), k);
}

TEST(DatasetIo, PosePairsCarryGroundTruth) {
  const fs::path dir = fresh_dir("pose");
  DatasetSpec s;
  s.count = 2;
  s.kinds = {PairKind::Pose};
  s.resolution = 24;
  s.strength = 0.3;
  generate_dataset(s, dir);
  const Dataset ds = load_dataset(dir);
  for (const auto& lp : ds.pairs) {
    ASSERT_TRUE(lp.pose.has_value());
    const auto g = generate_pair(lp.record, 24, 0.3);
    EXPECT_LT((lp.pose->R - g.pose->R).norm(), 1e-15);
    EXPECT_LT((lp.pose->t - g.pose->t).norm(), 1e-15);
    EXPECT_LT((lp.pose->K1 - g.pose->K1).norm(), 1e-15);
  }
}

TEST(DatasetIo, MissingOrCorruptFilesAreDataErrors) {
  EXPECT_THROW(load_dataset(fresh_dir("missing")), DataError);
  const fs::path dir = fresh_dir("corrupt");
  generate_dataset(small_spec(), dir);
  { std::ofstream(dir / "pair_2.map", std::ios::binary) << "JUNK"; }
  EXPECT_THROW(load_dataset(dir), DataError);
  fs::remove(dir / "pair_2.map");
  EXPECT_THROW(load_dataset(dir), DataError);
}

}  // namespace
}  // namespace dgc::geometry
