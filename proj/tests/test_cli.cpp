// Drives the installed binary end to end through std::system. Every test
// works inside one shared scratch directory seeded with a small rendered
// scenario; outputs are compared as bytes where determinism is the point.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

struct RunResult {
  int code = -1;
  std::string out, err;
};

RunResult run_cli(const fs::path& dir, const std::string& args) {
  static int invocation = 0;
  const fs::path out = dir / ("stdout_" + std::to_string(invocation) + ".txt");
  const fs::path err = dir / ("stderr_" + std::to_string(invocation) + ".txt");
  ++invocation;
  const std::string cmd = std::string(SOCTRACK_CLI_PATH) + " " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// Scenario rendered once and reused read-only: 5 players, 12 frames, 320x180.
struct Workspace {
  fs::path dir, config, dets, gt, frames;
  int synth_code = -1;

  Workspace() {
    dir = fs::temp_directory_path() / "soctrack_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    config = dir / "config.json";
    spit(config,
         "{\"synth\": {\"width\": 320, \"height\": 180, \"frame_count\": 12,"
         " \"player_count\": 5, \"seed\": 3}}\n");
    dets = dir / "dets.txt";
    gt = dir / "gt.txt";
    frames = dir / "frames";
    synth_code = run_cli(dir, "synth --config " + config.string() +
                                  " --out-dets " + dets.string() + " --out-gt " +
                                  gt.string() + " --render " + frames.string())
                     .code;
  }

  ~Workspace() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }

  std::string common() const { return " --config " + config.string(); }
};

Workspace& ws() {
  static Workspace w;
  return w;
}

}  // namespace

TEST_CASE("synth renders the scenario and is byte-stable across runs") {
  REQUIRE(ws().synth_code == 0);
  CHECK(fs::exists(ws().frames / "000001.png"));
  CHECK(fs::exists(ws().frames / "000012.png"));

  const fs::path dir = ws().dir / "synth_again";
  fs::create_directories(dir);
  const RunResult again =
      run_cli(dir, "synth" + ws().common() + " --out-dets " +
                       (dir / "dets.txt").string() + " --out-gt " +
                       (dir / "gt.txt").string());
  REQUIRE(again.code == 0);
  CHECK(slurp(dir / "dets.txt") == slurp(ws().dets));
  CHECK(slurp(dir / "gt.txt") == slurp(ws().gt));
  CHECK(!slurp(ws().dets).empty());
}

TEST_CASE("track is deterministic and the clean pipeline scores perfectly") {
  REQUIRE(ws().synth_code == 0);
  const fs::path dir = ws().dir / "track";
  fs::create_directories(dir);
  const fs::path tracks1 = dir / "tracks1.txt";
  const fs::path tracks2 = dir / "tracks2.txt";

  const std::string base = "track" + ws().common() + " --dets " +
                           ws().dets.string() + " --images " +
                           ws().frames.string();
  REQUIRE(run_cli(dir, base + " --out " + tracks1.string()).code == 0);
  REQUIRE(run_cli(dir, base + " --out " + tracks2.string()).code == 0);
  CHECK(slurp(tracks1) == slurp(tracks2));
  CHECK(!slurp(tracks1).empty());

  const RunResult mot =
      run_cli(dir, "eval" + ws().common() + " --gt " + ws().gt.string() +
                       " --input " + tracks1.string() + " --mode mot");
  REQUIRE(mot.code == 0);
  CHECK(mot.out ==
        "MOTA:        100.0\n"
        "FP:          0\n"
        "FN:          0\n"
        "IDSW:        0\n"
        "IDF1:        100.0\n");

  const RunResult det =
      run_cli(dir, "eval" + ws().common() + " --gt " + ws().gt.string() +
                       " --input " + ws().dets.string() + " --mode det");
  REQUIRE(det.code == 0);
  CHECK(det.out ==
        "AP@IOU:      1.0000\n"
        "precision:   1.0000\n"
        "recall:      1.0000\n"
        "f1:          1.0000\n");

  const fs::path csv = dir / "report.csv";
  REQUIRE(run_cli(dir, "eval" + ws().common() + " --gt " + ws().gt.string() +
                           " --input " + tracks1.string() +
                           " --mode mot --csv " + csv.string() +
                           " --name clean")
              .code == 0);
  CHECK(slurp(csv) ==
        "name,ap,precision,recall,f1,mota,fp,fn,idsw,idf1\n"
        "clean,,,,,1.000000,0,0,0,1.000000\n");
}

TEST_CASE("external embeddings reproduce the image-based tracking result") {
  REQUIRE(ws().synth_code == 0);
  const fs::path dir = ws().dir / "embed";
  fs::create_directories(dir);
  const fs::path emb = dir / "emb.csv";
  REQUIRE(run_cli(dir, "embed" + ws().common() + " --dets " +
                           ws().dets.string() + " --images " +
                           ws().frames.string() + " --out " + emb.string())
              .code == 0);
  CHECK(!slurp(emb).empty());

  const fs::path from_images = dir / "tracks_img.txt";
  const fs::path from_store = dir / "tracks_ext.txt";
  REQUIRE(run_cli(dir, "track" + ws().common() + " --dets " +
                           ws().dets.string() + " --images " +
                           ws().frames.string() + " --out " +
                           from_images.string())
              .code == 0);
  REQUIRE(run_cli(dir, "track" + ws().common() + " --dets " +
                           ws().dets.string() + " --embeddings " + emb.string() +
                           " --width 320 --out " + from_store.string())
              .code == 0);
  CHECK(slurp(from_store) == slurp(from_images));
}

TEST_CASE("reid_dataset writes tracks and a batch manifest") {
  REQUIRE(ws().synth_code == 0);
  const fs::path dir = ws().dir / "reid";
  fs::create_directories(dir);
  const fs::path rt = dir / "reid_tracks.txt";
  const fs::path batches = dir / "batches.csv";
  REQUIRE(run_cli(dir, "reid_dataset" + ws().common() + " --dets " +
                           ws().dets.string() + " --out-tracks " + rt.string() +
                           " --batches 2 --out-batches " + batches.string() +
                           " --set reid.k=3 --set reid.t=5")
              .code == 0);

  // Clean detections give 5 full tracks, one row per frame.
  std::istringstream rows(slurp(rt));
  int row_count = 0;
  for (std::string line; std::getline(rows, line);) ++row_count;
  CHECK(row_count == 5 * 12);

  const std::string manifest = slurp(batches);
  CHECK(manifest.rfind("batch,slot,track,frame,x_min,y_min,width,height\n", 0) == 0);
  std::istringstream mrows(manifest);
  int lines = 0;
  for (std::string line; std::getline(mrows, line);) ++lines;
  CHECK(lines == 1 + 2 * 3 * 5);  // header + 2 batches of K*T samples

  const RunResult missing_out =
      run_cli(dir, "reid_dataset" + ws().common() + " --dets " +
                       ws().dets.string() + " --out-tracks " + rt.string() +
                       " --batches 2");
  CHECK(missing_out.code == 1);
}

TEST_CASE("fieldmask, pseudolabel, and overlay run on rendered frames") {
  REQUIRE(ws().synth_code == 0);
  const fs::path dir = ws().dir / "stages";
  fs::create_directories(dir);

  const fs::path mask = dir / "mask.png";
  REQUIRE(run_cli(dir, "fieldmask" + ws().common() + " --image " +
                           (ws().frames / "000001.png").string() + " --out " +
                           mask.string())
              .code == 0);
  CHECK(fs::file_size(mask) > 0);

  const fs::path corrected = dir / "corrected.txt";
  const fs::path aug_dir = dir / "aug";
  const fs::path aug_dets = dir / "aug.txt";
  REQUIRE(run_cli(dir, "pseudolabel" + ws().common() + " --dets " +
                           ws().dets.string() + " --images " +
                           ws().frames.string() + " --out " +
                           corrected.string() + " --augment-dir " +
                           aug_dir.string() + " --augment-dets " +
                           aug_dets.string())
              .code == 0);
  CHECK(!slurp(corrected).empty());
  CHECK(fs::exists(aug_dir / "000001.png"));
  CHECK(!slurp(aug_dets).empty());

  // The augment flags only work as a pair.
  CHECK(run_cli(dir, "pseudolabel" + ws().common() + " --dets " +
                         ws().dets.string() + " --images " +
                         ws().frames.string() + " --out " + corrected.string() +
                         " --augment-dir " + aug_dir.string())
            .code == 1);

  const fs::path overlay_dir = dir / "overlay";
  REQUIRE(run_cli(dir, "overlay --tracks " + ws().gt.string() + " --images " +
                           ws().frames.string() + " --out-dir " +
                           overlay_dir.string())
              .code == 0);
  CHECK(fs::exists(overlay_dir / "000001.png"));
  CHECK(fs::exists(overlay_dir / "000012.png"));
}

TEST_CASE("eval warns when the frame ranges differ") {
  const fs::path dir = ws().dir / "ranges";
  fs::create_directories(dir);
  const fs::path gt = dir / "gt.txt";
  const fs::path hyp = dir / "hyp.txt";
  spit(gt, "1,1,10,10,10,20,1\n2,1,11,10,10,20,1\n3,1,12,10,10,20,1\n");
  spit(hyp, "2,7,11,10,10,20,1\n3,7,12,10,10,20,1\n");
  const RunResult r = run_cli(
      dir, "eval --gt " + gt.string() + " --input " + hyp.string() + " --mode mot");
  REQUIRE(r.code == 0);
  CHECK(r.err.find("frame ranges differ") != std::string::npos);
  CHECK(r.out.find("MOTA:        100.0") != std::string::npos);
}

TEST_CASE("empty detection input produces an empty track file") {
  const fs::path dir = ws().dir / "empty";
  fs::create_directories(dir);
  const fs::path dets = dir / "empty.txt";
  const fs::path out = dir / "tracks.txt";
  spit(dets, "");
  const RunResult r =
      run_cli(dir, "track --dets " + dets.string() + " --out " + out.string());
  CHECK(r.code == 0);
  REQUIRE(fs::exists(out));
  CHECK(fs::file_size(out) == 0);
}

TEST_CASE("track distinguishes usage errors from data errors") {
  const fs::path dir = ws().dir / "errors";
  fs::create_directories(dir);

  const fs::path dets = dir / "dets.txt";
  spit(dets, "1,-1,10,10,10,20,0.9\n2,-1,11,10,10,20,0.9\n");

  // Detections but no appearance source: usage error.
  const RunResult no_source = run_cli(
      dir, "track --dets " + dets.string() + " --out " + (dir / "t.txt").string());
  CHECK(no_source.code == 1);
  CHECK(no_source.err.find("--embeddings or --images") != std::string::npos);

  // Visible detection without a store entry: data error.
  const fs::path emb = dir / "partial.csv";
  spit(emb, "1,0,0.5,0.5\n");
  const RunResult missing =
      run_cli(dir, "track --dets " + dets.string() + " --embeddings " +
                       emb.string() + " --width 320 --out " +
                       (dir / "t.txt").string());
  CHECK(missing.code == 2);
  CHECK(missing.err.find("track error") != std::string::npos);

  // Unparsable detection file: data error.
  const fs::path bad = dir / "bad.txt";
  spit(bad, "1,-1,banana,10,10,20,0.9\n");
  const RunResult malformed = run_cli(
      dir, "track --dets " + bad.string() + " --out " + (dir / "t.txt").string());
  CHECK(malformed.code == 2);
}

TEST_CASE("config problems exit 1 before any stage runs") {
  const fs::path dir = ws().dir / "config_errors";
  fs::create_directories(dir);
  const fs::path bad = dir / "bad.json";
  spit(bad, "{\"tracker\": {\"tau\": 0.7}}\n");
  const RunResult from_file =
      run_cli(dir, "synth --config " + bad.string() + " --out-dets " +
                       (dir / "d.txt").string());
  CHECK(from_file.code == 1);
  CHECK(from_file.err.find("config error") != std::string::npos);

  const RunResult from_set =
      run_cli(dir, "synth --set tracker.nope=1 --out-dets " +
                       (dir / "d.txt").string());
  CHECK(from_set.code == 1);

  const RunResult bad_mode =
      run_cli(dir, "eval --gt " + ws().gt.string() + " --input " +
                       ws().gt.string() + " --mode both");
  CHECK(bad_mode.code == 1);
  CHECK(bad_mode.err.find("--mode") != std::string::npos);
}

TEST_CASE("argument parsing exits 0 for help and 1 for bad invocations") {
  const fs::path dir = ws().dir / "args";
  fs::create_directories(dir);
  const RunResult help = run_cli(dir, "--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("track") != std::string::npos);

  CHECK(run_cli(dir, "synth --frobnicate").code == 1);
  CHECK(run_cli(dir, "").code == 1);
  CHECK(run_cli(dir, "warp --out x").code == 1);
}
