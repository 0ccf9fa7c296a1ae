#include "dgc/geometry/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "dgc/geometry/pose_scene.hpp"
#include "dgc/geometry/procedural.hpp"
#include "dgc/tensor/serialize.hpp"

namespace dgc::geometry {

namespace fs = std::filesystem;

std::string to_string(PairKind kind) {
  switch (kind) {
    case PairKind::Affine: return "affine";
    case PairKind::Homography: return "homo";
    case PairKind::Tps: return "tps";
    case PairKind::Pose: return "pose";
  }
  return "?";
}

PairKind parse_pair_kind(const std::string& name) {
  if (name == "pose") return PairKind::Pose;
  switch (parse_transform_kind(name)) {
    case TransformKind::Affine: return PairKind::Affine;
    case TransformKind::Homography: return PairKind::Homography;
    case TransformKind::Tps: return PairKind::Tps;
  }
  throw UsageError("unknown pair kind: " + name);
}

std::vector<PairKind> parse_pair_kinds(const std::string& comma_separated) {
  std::vector<PairKind> kinds;
  std::stringstream ss(comma_separated);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) kinds.push_back(parse_pair_kind(item));
  }
  if (kinds.empty()) throw UsageError("empty kind list");
  return kinds;
}

std::uint64_t pair_seed(std::uint64_t dataset_seed, int index) {
  return dataset_seed ^ static_cast<std::uint64_t>(index);
}

Manifest make_manifest(const DatasetSpec& spec) {
  if (spec.count <= 0) throw UsageError("dataset size must be positive");
  if (spec.kinds.empty()) throw UsageError("no pair kinds given");
  if (spec.strength < 0.0 || spec.strength > 0.4) throw UsageError("strength must be in [0, 0.4]");
  if (spec.resolution < 8) throw UsageError("resolution must be at least 8");
  if (spec.val_fraction < 0.0 || spec.val_fraction >= 1.0) {
    throw UsageError("val fraction must be in [0, 1)");
  }
  Manifest m{spec.resolution, spec.strength, spec.seed, {}};
  const int n_val = static_cast<int>(std::lround(spec.count * spec.val_fraction));
  for (int i = 0; i < spec.count; ++i) {
    m.pairs.push_back({i, spec.kinds[static_cast<std::size_t>(i) % spec.kinds.size()],
                       pair_seed(spec.seed, i), i >= spec.count - n_val ? Split::Val : Split::Train});
  }
  return m;
}

namespace {

constexpr int kMaxDraws = 100;

TransformKind warp_kind(PairKind k) {
  switch (k) {
    case PairKind::Homography: return TransformKind::Homography;
    case PairKind::Tps: return TransformKind::Tps;
    default: return TransformKind::Affine;
  }
}

}  // namespace

GeneratedPair generate_pair(const PairRecord& record, int resolution, double strength) {
  Rng rng(record.seed);
  const Image base = generate_base_image(2 * resolution, rng);
  for (int draw = 0; draw < kMaxDraws; ++draw) {
    try {
      if (record.kind == PairKind::Pose) {
        // The scene is rendered with camera centres spread by the baseline,
        // so the pose kind needs a positive strength to be non-degenerate.
        const double s = std::max(strength, 1e-3);
        PosePair pp = render_pose_pair(base, rng, resolution, s);
        if (1.0 - pp.pair.gt_mask.coverage() > kMaxInvalidFraction) continue;
        RelativePoseGt gt{pp.target_camera.K, pp.source_camera.K, pp.source_camera.R,
                          pp.source_camera.t};
        pp.pair.source_image = quantize8(pp.pair.source_image);
        pp.pair.target_image = quantize8(pp.pair.target_image);
        return {std::move(pp.pair), gt};
      }
      const auto t = sample_transform(warp_kind(record.kind), rng, strength);
      TrainingPair pair = render_pair(base, t, resolution);
      pair.source_image = quantize8(pair.source_image);
      pair.target_image = quantize8(pair.target_image);
      return {std::move(pair), std::nullopt};
    } catch (const PairRejected&) {
    }
  }
  throw DataError("pair " + std::to_string(record.id) + ": no acceptable draw");
}

std::string pair_file(const fs::path& dir, int id, const char* suffix) {
  return (dir / ("pair_" + std::to_string(id) + suffix)).string();
}

Manifest generate_dataset(const DatasetSpec& spec, const fs::path& dir) {
  const Manifest m = make_manifest(spec);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create directory " + dir.string());
  for (const auto& rec : m.pairs) {
    const GeneratedPair g = generate_pair(rec, m.resolution, m.strength);
    write_ppm(pair_file(dir, rec.id, ".src.ppm"), g.pair.source_image);
    write_ppm(pair_file(dir, rec.id, ".tgt.ppm"), g.pair.target_image);
    write_map(pair_file(dir, rec.id, ".map"), g.pair.gt_map);
    write_mask(pair_file(dir, rec.id, ".mask"), g.pair.gt_mask);
    if (g.pose) write_pose(pair_file(dir, rec.id, ".pose"), *g.pose);
  }
  write_manifest(dir / "manifest.txt", m);
  return m;
}

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream os(path, mode);
  if (!os) throw DataError("cannot write " + path.string());
  return os;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream is(path, mode);
  if (!is) throw DataError("cannot read " + path.string());
  return is;
}

}  // namespace

void write_manifest(const fs::path& path, const Manifest& m) {
  auto os = open_out(path);
  os << "# dgc dataset\n";
  os << "resolution " << m.resolution << "\n";
  os << "strength " << std::setprecision(17) << m.strength << "\n";
  os << "seed " << m.seed << "\n";
  os << "# id kind seed split\n";
  for (const auto& p : m.pairs) {
    os << p.id << ' ' << to_string(p.kind) << ' ' << p.seed << ' '
       << (p.split == Split::Train ? "train" : "val") << '\n';
  }
  if (!os) throw DataError("cannot write " + path.string());
}

Manifest read_manifest(const fs::path& path) {
  auto is = open_in(path);
  Manifest m;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string first;
    ls >> first;
    if (first == "resolution") {
      ls >> m.resolution;
    } else if (first == "strength") {
      ls >> m.strength;
    } else if (first == "seed") {
      ls >> m.seed;
    } else {
      PairRecord r;
      std::string kind, split;
      try {
        r.id = std::stoi(first);
      } catch (const std::exception&) {
        throw DataError("manifest: bad line '" + line + "'");
      }
      ls >> kind >> r.seed >> split;
      if (!ls || (split != "train" && split != "val")) {
        throw DataError("manifest: bad line '" + line + "'");
      }
      try {
        r.kind = parse_pair_kind(kind);
      } catch (const UsageError& e) {
        throw DataError(std::string("manifest: ") + e.what());
      }
      r.split = split == "train" ? Split::Train : Split::Val;
      m.pairs.push_back(r);
    }
    if (!ls && !ls.eof()) throw DataError("manifest: bad line '" + line + "'");
  }
  if (m.resolution <= 0) throw DataError("manifest: missing resolution");
  return m;
}

void write_map(const fs::path& path, const CorrespondenceMap& m) {
  auto os = open_out(path, std::ios::binary);
  io::write_magic(os, "CMAP");
  io::write_u32(os, static_cast<std::uint32_t>(m.width));
  io::write_u32(os, static_cast<std::uint32_t>(m.height));
  for (float v : m.uv) io::write_f32(os, v);
  if (!os) throw DataError("cannot write " + path.string());
}

CorrespondenceMap read_map(const fs::path& path) {
  auto is = open_in(path, std::ios::binary);
  io::expect_magic(is, "CMAP");
  const auto w = io::read_u32(is), h = io::read_u32(is);
  if (w == 0 || h == 0 || w > 1u << 14 || h > 1u << 14) throw DataError("map: bad size");
  CorrespondenceMap m(static_cast<int>(w), static_cast<int>(h));
  for (auto& v : m.uv) v = io::read_f32(is);
  return m;
}

void write_mask(const fs::path& path, const MatchabilityMask& m) {
  auto os = open_out(path, std::ios::binary);
  io::write_magic(os, "MSK1");
  io::write_u32(os, static_cast<std::uint32_t>(m.width));
  io::write_u32(os, static_cast<std::uint32_t>(m.height));
  os.write(reinterpret_cast<const char*>(m.valid.data()),
           static_cast<std::streamsize>(m.valid.size()));
  if (!os) throw DataError("cannot write " + path.string());
}

MatchabilityMask read_mask(const fs::path& path) {
  auto is = open_in(path, std::ios::binary);
  io::expect_magic(is, "MSK1");
  const auto w = io::read_u32(is), h = io::read_u32(is);
  if (w == 0 || h == 0 || w > 1u << 14 || h > 1u << 14) throw DataError("mask: bad size");
  MatchabilityMask m(static_cast<int>(w), static_cast<int>(h));
  is.read(reinterpret_cast<char*>(m.valid.data()), static_cast<std::streamsize>(m.valid.size()));
  if (!is) throw DataError("mask: truncated " + path.string());
  for (auto v : m.valid) {
    if (v > 1) throw DataError("mask: values must be 0 or 1");
  }
  return m;
}

void write_pose(const fs::path& path, const RelativePoseGt& p) {
  auto os = open_out(path);
  os << std::setprecision(17);
  auto mat = [&](const char* name, const Eigen::Matrix3d& a) {
    os << name;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) os << ' ' << a(r, c);
    }
    os << '\n';
  };
  mat("K1", p.K1);
  mat("K2", p.K2);
  mat("R", p.R);
  os << "t " << p.t.x() << ' ' << p.t.y() << ' ' << p.t.z() << '\n';
  if (!os) throw DataError("cannot write " + path.string());
}

RelativePoseGt read_pose(const fs::path& path) {
  auto is = open_in(path);
  RelativePoseGt p;
  std::string name;
  int seen = 0;
  while (is >> name) {
    if (name == "t") {
      is >> p.t.x() >> p.t.y() >> p.t.z();
    } else {
      Eigen::Matrix3d* target = name == "K1" ? &p.K1 : name == "K2" ? &p.K2 : name == "R" ? &p.R
                                                                                       : nullptr;
      if (!target) throw DataError("pose: unknown field " + name);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) is >> (*target)(r, c);
      }
    }
    if (!is) throw DataError("pose: malformed " + path.string());
    ++seen;
  }
  if (seen != 4) throw DataError("pose: incomplete " + path.string());
  return p;
}

std::vector<const LoadedPair*> Dataset::split(Split s) const {
  std::vector<const LoadedPair*> out;
  for (const auto& p : pairs) {
    if (p.record.split == s) out.push_back(&p);
  }
  return out;
}

Dataset load_dataset(const fs::path& dir) {
  Dataset ds;
  ds.manifest = read_manifest(dir / "manifest.txt");
  const int res = ds.manifest.resolution;
  for (const auto& rec : ds.manifest.pairs) {
    LoadedPair lp;
    lp.record = rec;
    lp.pair.source_image = read_ppm(pair_file(dir, rec.id, ".src.ppm"));
    lp.pair.target_image = read_ppm(pair_file(dir, rec.id, ".tgt.ppm"));
    lp.pair.gt_map = read_map(pair_file(dir, rec.id, ".map"));
    lp.pair.gt_mask = read_mask(pair_file(dir, rec.id, ".mask"));
    for (auto [w, h] : {std::pair{lp.pair.source_image.width, lp.pair.source_image.height},
                        std::pair{lp.pair.target_image.width, lp.pair.target_image.height},
                        std::pair{lp.pair.gt_map.width, lp.pair.gt_map.height},
                        std::pair{lp.pair.gt_mask.width, lp.pair.gt_mask.height}}) {
      if (w != res || h != res) {
        throw DataError("pair " + std::to_string(rec.id) + ": size differs from manifest");
      }
    }
    if (rec.kind == PairKind::Pose) lp.pose = read_pose(pair_file(dir, rec.id, ".pose"));
    ds.pairs.push_back(std::move(lp));
  }
  return ds;
}

}  // namespace dgc::geometry
