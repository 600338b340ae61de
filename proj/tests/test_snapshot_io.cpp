#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "texflow/rng.hpp"
#include "texflow/sim/manifest.hpp"
#include "texflow/sim/simulator.hpp"
#include "texflow/sim/snapshot.hpp"

using namespace texflow;
using namespace texflow::sim;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const char* tag) {
  const fs::path p = fs::temp_directory_path() / "texflow_tests" / tag;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

FlowSnapshot random_snapshot(int h, int w, uint64_t seed) {
  FlowSnapshot s;
  s.t = 123;
  s.rho = Grid2D<float>(h, w);
  s.p = Grid2D<float>(h, w);
  s.U = Grid2D<float>(h, w);
  s.V = Grid2D<float>(h, w);
  s.mask = Grid2D<uint8_t>(h, w, 0);
  Pcg32 rng(seed);
  for (size_t i = 0; i < s.rho.size(); ++i) {
    s.rho.data()[i] = static_cast<float>(rng.uniform(0.9, 1.1));
    s.p.data()[i] = s.rho.data()[i] / 3.0f;
    s.U.data()[i] = static_cast<float>(rng.uniform(-0.1, 0.1));
    s.V.data()[i] = static_cast<float>(rng.uniform(-0.1, 0.1));
    s.mask.data()[i] = rng.below(8) == 0 ? 1 : 0;
  }
  return s;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

TEST_CASE("snapshot files round trip bit-identically") {
  const fs::path dir = temp_dir("txfs");
  const FlowSnapshot snap = random_snapshot(13, 21, 7);
  const auto path1 = (dir / "a.txfs").string();
  const auto path2 = (dir / "b.txfs").string();
  write_snapshot(snap, path1);
  const FlowSnapshot loaded = read_snapshot(path1);
  CHECK(loaded == snap);
  write_snapshot(loaded, path2);
  CHECK(file_bytes(path1) == file_bytes(path2));
}

TEST_CASE("snapshot reader rejects foreign files") {
  const fs::path dir = temp_dir("txfs_bad");
  const auto path = (dir / "bad.txfs").string();
  std::ofstream(path) << "not a snapshot";
  CHECK_THROWS_AS(read_snapshot(path), IoError);
  CHECK_THROWS_AS(read_snapshot((dir / "missing.txfs").string()), IoError);
}

TEST_CASE("run manifest round trips and validates snapshots") {
  const fs::path dir = temp_dir("manifest");
  SimulationConfig cfg;
  cfg.channel = {24, 10, 2, 3, 6, 2};
  cfg.boundary.inlet_velocity = 0.02;
  cfg.n_steps = 30;
  cfg.snapshot_stride = 10;
  const RunManifest m = run_to_dir(cfg, dir.string(), "testrun");

  const RunManifest loaded = read_manifest((dir / "manifest").string());
  CHECK(loaded.run_id == "testrun");
  CHECK(loaded.grid_height == 10);
  CHECK(loaded.grid_width == 24);
  REQUIRE(loaded.snapshots.size() == m.snapshots.size());
  for (size_t i = 0; i < m.snapshots.size(); ++i) {
    CHECK(loaded.snapshots[i].t == m.snapshots[i].t);
    CHECK(loaded.snapshots[i].path == m.snapshots[i].path);
    CHECK(loaded.snapshots[i].U_min == m.snapshots[i].U_min);
    CHECK(loaded.snapshots[i].U_max == m.snapshots[i].U_max);
  }
  CHECK_NOTHROW(validate_manifest(loaded, dir.string()));

  // Tampering with a snapshot breaks validation.
  FlowSnapshot s = read_snapshot((dir / loaded.snapshots[0].path).string());
  s.U.at(1, 1) += 1.0f;
  write_snapshot(s, (dir / loaded.snapshots[0].path).string());
  CHECK_THROWS_AS(validate_manifest(loaded, dir.string()), IoError);
}

TEST_CASE("field files carry arbitrary named fields") {
  const fs::path dir = temp_dir("fieldfile");
  FieldFile ff;
  ff.t = 9;
  ff.height = 4;
  ff.width = 6;
  Grid2D<float> g(4, 6);
  for (size_t i = 0; i < g.size(); ++i) g.data()[i] = static_cast<float>(i);
  ff.fields = {{"err_U", g}, {"something", g}};
  const auto path = (dir / "f.txfs").string();
  write_field_file(ff, path);
  const FieldFile loaded = read_field_file(path);
  CHECK(loaded.t == 9);
  REQUIRE(loaded.fields.size() == 2);
  CHECK(loaded.fields[0].first == "err_U");
  CHECK(*loaded.find("something") == g);
  CHECK(loaded.find("absent") == nullptr);
}
