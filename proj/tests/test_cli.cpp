#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "texflow/config.hpp"
#include "texflow/sim/manifest.hpp"
#include "texflow/sim/snapshot.hpp"

using namespace texflow;
namespace fs = std::filesystem;

namespace {

std::string binary() {
  const char* p = std::getenv("TEXFLOW_BIN");
  REQUIRE(p != nullptr);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

fs::path temp_dir(const char* tag) {
  const fs::path p = fs::temp_directory_path() / "texflow_cli" / tag;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

// Mini config: tiny grid, few steps, tiny model; the whole pipeline in
// seconds.
void write_mini_config(const fs::path& path, bool attention) {
  std::ofstream os(path);
  os << R"({
  "seed": 9,
  "channel": {"length": 48, "height": 16, "texture_height": 2,
              "texture_width": 4, "texture_spacing": 12, "texture_offset": 4},
  "boundary": {"inlet_velocity": 0.02, "outlet_density": 1.0},
  "simulation": {"tau": 0.8, "n_steps": 120, "snapshot_stride": 20},
  "dataset": {"train_frac": 0.7, "val_frac": 0.15},
  "model": {"base_filters": 2, "depth": 2, "attention": )"
     << (attention ? "true" : "false") << R"(},
  "training": {"batch_size": 4, "epochs": 2, "learning_rate": 0.001}
})";
}

}  // namespace

TEST_CASE("missing config file fails with exit code 2 naming the path") {
  const fs::path dir = temp_dir("missing_cfg");
  const int rc = run_cli("simulate -c /nonexistent/path.json -o " +
                         (dir / "out").string());
  CHECK(rc == kExitIo);  // unreadable file is an I/O failure
  const int rc2 = run_cli("simulate -o " + (dir / "out2").string() +
                          " --preset bogus");
  CHECK(rc2 == kExitConfig);
}

TEST_CASE("unknown config keys are rejected with exit code 2") {
  const fs::path dir = temp_dir("unknown_key");
  std::ofstream(dir / "bad.json") << R"({"simulation": {"tau": 0.8,
    "unknown_knob": 3}})";
  const int rc = run_cli("simulate -c " + (dir / "bad.json").string() +
                         " -o " + (dir / "out").string());
  CHECK(rc == kExitConfig);
}

TEST_CASE("divergent run exits with code 3") {
  const fs::path dir = temp_dir("divergent");
  // u_in far above the low-Mach envelope trips the boundary validator
  std::ofstream(dir / "cfg.json") << R"({"boundary": {"inlet_velocity": 0.5}})";
  const int rc = run_cli("simulate -c " + (dir / "cfg.json").string() +
                         " -o " + (dir / "out").string());
  CHECK(rc == kExitConfig);  // rejected before stepping: invariant 0<u_in<0.1

  // a legal config that still blows up numerically: tau barely above 0.5
  std::ofstream(dir / "cfg2.json") << R"({
    "simulation": {"tau": 0.501, "n_steps": 3000, "snapshot_stride": 100},
    "boundary": {"inlet_velocity": 0.09, "outlet_density": 1.0}})";
  const int rc2 = run_cli("simulate -c " + (dir / "cfg2.json").string() +
                          " -o " + (dir / "out2").string());
  CHECK(rc2 == kExitDivergence);
}

TEST_CASE("simulate is deterministic: repeated runs give identical bytes") {
  const fs::path dir = temp_dir("determinism");
  write_mini_config(dir / "cfg.json", false);
  REQUIRE(run_cli("simulate -c " + (dir / "cfg.json").string() + " -o " +
                  (dir / "a").string()) == 0);
  REQUIRE(run_cli("simulate -c " + (dir / "cfg.json").string() + " -o " +
                  (dir / "b").string()) == 0);
  const auto ma = sim::read_manifest((dir / "a" / "manifest").string());
  REQUIRE(!ma.snapshots.empty());
  for (const auto& rec : ma.snapshots) {
    CHECK(file_bytes(dir / "a" / rec.path) == file_bytes(dir / "b" / rec.path));
  }
}

TEST_CASE("full pipeline on a miniature configuration") {
  const fs::path dir = temp_dir("pipeline");
  const auto cfg = (dir / "cfg.json").string();
  write_mini_config(dir / "cfg.json", false);
  const auto run_dir = (dir / "run").string();
  const auto ds_dir = (dir / "ds").string();
  const auto std_dir = (dir / "std").string();
  const auto att_dir = (dir / "att").string();

  REQUIRE(run_cli("simulate -c " + cfg + " -o " + run_dir) == 0);
  CHECK(fs::exists(dir / "run" / "config.json"));
  REQUIRE(run_cli("dataset " + run_dir + " -c " + cfg + " -o " + ds_dir) == 0);
  CHECK(fs::exists(dir / "ds" / "samples.bin"));
  CHECK(fs::exists(dir / "ds" / "masks.bin"));
  CHECK(fs::exists(dir / "ds" / "stats"));

  REQUIRE(run_cli("train " + ds_dir + " -c " + cfg + " -o " + std_dir) == 0);
  CHECK(fs::exists(dir / "std" / "checkpoint.txfw"));
  CHECK(fs::exists(dir / "std" / "report.csv"));
  {
    std::ifstream is(dir / "std" / "report.csv");
    std::string header;
    std::getline(is, header);
    CHECK(header ==
          "epoch, train_loss, val_loss, train_loss_u, train_loss_v, "
          "val_loss_u, val_loss_v");
  }

  REQUIRE(run_cli("train " + ds_dir + " -c " + cfg + " --attention -o " +
                  att_dir) == 0);

  const auto std_ckpt = (dir / "std" / "checkpoint.txfw").string();
  const auto att_ckpt = (dir / "att" / "checkpoint.txfw").string();

  REQUIRE(run_cli("predict " + ds_dir + " --checkpoint " + std_ckpt + " -o " +
                  (dir / "pred").string()) == 0);
  bool found_pred = false;
  for (const auto& e : fs::directory_iterator(dir / "pred")) {
    if (e.path().extension() == ".txfs") {
      found_pred = true;
      const auto ff = sim::read_field_file(e.path().string());
      CHECK(ff.find("U") != nullptr);
      CHECK(ff.find("V") != nullptr);
    }
  }
  CHECK(found_pred);

  REQUIRE(run_cli("evaluate " + ds_dir + " --checkpoint " + std_ckpt +
                  " --checkpoint " + att_ckpt + " -o " +
                  (dir / "eval").string()) == 0);
  CHECK(fs::exists(dir / "eval" / "metrics.csv"));
  {
    std::ifstream is(dir / "eval" / "metrics.csv");
    std::string line;
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 3);  // header + one row per checkpoint
  }

  SECTION("evaluating the same checkpoint twice gives identical rows") {
    REQUIRE(run_cli("evaluate " + ds_dir + " --checkpoint " + std_ckpt +
                    " --checkpoint " + std_ckpt + " --no-error-maps -o " +
                    (dir / "eval2").string()) == 0);
    std::ifstream is(dir / "eval2" / "metrics.csv");
    std::string header, row1, row2;
    std::getline(is, header);
    std::getline(is, row1);
    std::getline(is, row2);
    CHECK(row1.substr(row1.find(',')) == row2.substr(row2.find(',')));
  }

  SECTION("render emits heatmaps, sidecars, and profile CSVs") {
    const auto ma = sim::read_manifest((dir / "run" / "manifest").string());
    const auto snap_path = (dir / "run" / ma.snapshots.back().path).string();
    REQUIRE(run_cli("render " + snap_path + " -o " +
                    (dir / "plots").string()) == 0);
    const std::string stem = fs::path(snap_path).stem().string();
    CHECK(fs::exists(dir / "plots" / (stem + "_U.ppm")));
    CHECK(fs::exists(dir / "plots" / (stem + "_U.ppm.range.txt")));
    CHECK(fs::exists(dir / "plots" / (stem + "_U_x0.30.csv")));
    CHECK(fs::exists(dir / "plots" / (stem + "_U_x0.80.csv")));
  }

  SECTION("render of a zero field reports min = max = 0") {
    sim::FieldFile ff;
    ff.height = 4;
    ff.width = 4;
    ff.fields = {{"zero", Grid2D<float>(4, 4, 0.0f)}};
    sim::write_field_file(ff, (dir / "zero.txfs").string());
    REQUIRE(run_cli("render " + (dir / "zero.txfs").string() + " -o " +
                    (dir / "plots0").string()) == 0);
    std::ifstream side(dir / "plots0" / "zero_zero.ppm.range.txt");
    std::string l1, l2;
    std::getline(side, l1);
    std::getline(side, l2);
    CHECK(l1 == "min: 0");
    CHECK(l2 == "max: 0");
  }
}
