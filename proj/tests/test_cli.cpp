#include <doctest.h>

#include <cstdio>

#include <json.hpp>

#include "facectl/image_io.hpp"
#include "facectl/keypoints.hpp"
#include "facectl/losses.hpp"
#include "facectl/scheduler.hpp"
#include "facectl/synth.hpp"
#include "golden.hpp"
#include "support.hpp"

using namespace facectl;
namespace fs = std::filesystem;

namespace {

const std::string kCli = FACECTL_CLI;

support::RunResult cli(const std::string& args) { return support::run(kCli + " " + args); }

std::size_t count_files(const fs::path& dir, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) n += e.path().filename().string().rfind(prefix, 0) == 0;
  return n;
}

Mask read_mask(const fs::path& path) {
  const auto rgb = read_rgb_image(path);
  Mask m(rgb.width, rgb.height);
  for (int y = 0; y < m.height; ++y)
    for (int x = 0; x < m.width; ++x) m.at(x, y) = rgb.at(x, y) ? 1 : 0;
  return m;
}

}  // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
  CHECK(cli("").exit_code == 2);
  CHECK(cli("frobnicate").exit_code == 2);
  CHECK(cli("plan --frames 10 --bogus").exit_code == 2);
  CHECK(cli("plan").exit_code == 2);
  CHECK(cli("--help").exit_code == 0);
  CHECK(cli("synth --help").exit_code == 0);
}

TEST_CASE("synth is deterministic") {
  const auto dir = support::scratch_dir("cli_synth");
  REQUIRE(cli("synth --frames 16 --seed 7 --out " + (dir / "a.json").string()).exit_code == 0);
  REQUIRE(cli("synth --frames 16 --seed 7 --out " + (dir / "b.json").string()).exit_code == 0);
  CHECK(support::slurp(dir / "a.json") == support::slurp(dir / "b.json"));
  CHECK(support::slurp(dir / "a.json") == serialize_sequence(synth_sequence(16, 7, default_topology())) + "\n");
  CHECK(cli("synth --frames 0").exit_code == 2);
}

TEST_CASE("plan command") {
  const auto dir = support::scratch_dir("cli_plan");
  const auto r = cli("plan --frames 46 --window 16");
  REQUIRE(r.exit_code == 0);
  const auto plan = plan_from_json(r.output);
  CHECK(validate_plan(plan).empty());
  CHECK(plan.keyframes == std::vector<int>{0, 15, 30, 45});
  CHECK(cli("plan --frames 10 --window 20").exit_code == 2);
  CHECK(cli("plan --frames 10 --window 4 --stride 4").exit_code == 2);

  // A broken plan file is a validation failure.
  auto broken = plan_inference(46, 16, 15);
  broken.jobs[1].covered[3] = false;
  write_text_file(dir / "broken.json", plan_to_json(broken));
  const auto bad = cli("plan --check " + (dir / "broken.json").string());
  CHECK(bad.exit_code == 1);
  CHECK(bad.output.find("frame 3 never generated") != std::string::npos);
  write_text_file(dir / "good.json", plan_to_json(plan_inference(46, 16, 15)));
  CHECK(cli("plan --check " + (dir / "good.json").string()).exit_code == 0);
}

TEST_CASE("missing topology names the path") {
  const auto dir = support::scratch_dir("cli_topo");
  write_text_file(dir / "seq.json", serialize_sequence(synth_sequence(2, 1, default_topology())));
  const auto seq = (dir / "seq.json").string();
  const auto r = cli("pipeline --reference " + seq + " --driving " + seq + " --out-dir " + (dir / "out").string() +
                     " --topology /no/such/topology.json");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("/no/such/topology.json") != std::string::npos);
}

TEST_CASE("pipeline output: files, plan, golden digest, threads") {
  const auto dir = support::scratch_dir("cli_pipeline");
  const auto seq = (dir / "seq.json").string();
  REQUIRE(cli("synth --frames 16 --seed 7 --out " + seq).exit_code == 0);
  const auto base = "pipeline --reference " + seq + " --driving " + seq + " --out-dir ";
  REQUIRE(cli(base + (dir / "run1").string()).exit_code == 0);
  REQUIRE(cli(base + (dir / "run2").string()).exit_code == 0);
  REQUIRE(cli(base + (dir / "run3").string() + " --jobs 4").exit_code == 0);

  CHECK(count_files(dir / "run1", "lmk_") == 16);
  CHECK(count_files(dir / "run1", "mexp_") == 16);
  CHECK(count_files(dir / "run1", "mface_") == 16);
  CHECK(fs::exists(dir / "run1" / "lmk_00015.png"));
  const auto plan = plan_from_json(support::slurp(dir / "run1" / "plan.json"));
  CHECK(plan.jobs.size() == 1);

  const auto d1 = golden::directory_digest(dir / "run1");
  CHECK(d1 == golden::directory_digest(dir / "run2"));
  CHECK(d1 == golden::directory_digest(dir / "run3"));
  char hex[32];
  std::snprintf(hex, sizeof hex, "0x%016llx", static_cast<unsigned long long>(d1));
  MESSAGE("pipeline digest ", hex);
  CHECK(d1 == golden::kPipelineSynth16Seed7);
}

TEST_CASE("dilation flag nests the expression masks") {
  const auto dir = support::scratch_dir("cli_dilate");
  const auto seq = (dir / "seq.json").string();
  REQUIRE(cli("synth --frames 3 --seed 2 --out " + seq).exit_code == 0);
  const auto base = "pipeline --reference " + seq + " --driving " + seq + " --resolution 256 --out-dir ";
  REQUIRE(cli(base + (dir / "r1").string() + " --dilate 1").exit_code == 0);
  REQUIRE(cli(base + (dir / "r20").string() + " --dilate 20").exit_code == 0);
  for (int f = 0; f < 3; ++f) {
    char name[32];
    std::snprintf(name, sizeof name, "mexp_%05d.png", f);
    const auto small = read_mask(dir / "r1" / name);
    const auto big = read_mask(dir / "r20" / name);
    bool nested = true;
    for (std::size_t i = 0; i < small.data.size(); ++i) nested = nested && (!small.data[i] || big.data[i]);
    CHECK(nested);
    CHECK(count_nonzero(small) < count_nonzero(big));
  }
}

TEST_CASE("config file supplies defaults, flags win") {
  const auto dir = support::scratch_dir("cli_config");
  const auto seq = (dir / "seq.json").string();
  REQUIRE(cli("synth --frames 2 --seed 2 --out " + seq).exit_code == 0);
  write_text_file(dir / "cfg.json", R"({"resolution": "64", "format": "ppm", "dilate": 3})");
  const auto base = "pipeline --config " + (dir / "cfg.json").string() + " --reference " + seq + " --driving " + seq;
  REQUIRE(cli(base + " --out-dir " + (dir / "a").string()).exit_code == 0);
  CHECK(fs::exists(dir / "a" / "lmk_00000.ppm"));
  CHECK(read_rgb_image(dir / "a" / "lmk_00000.ppm").width == 64);
  REQUIRE(cli(base + " --resolution 96x80 --out-dir " + (dir / "b").string()).exit_code == 0);
  const auto img = read_rgb_image(dir / "b" / "lmk_00001.ppm");
  CHECK(img.width == 96);
  CHECK(img.height == 80);
  write_text_file(dir / "bad.json", "{nope");
  CHECK(cli("plan --config " + (dir / "bad.json").string() + " --frames 20").exit_code == 2);
}

TEST_CASE("failing frame is named") {
  const auto dir = support::scratch_dir("cli_badframe");
  const auto& topo = default_topology();
  auto seq = synth_sequence(5, 1, topo);
  for (int i : topo.group(group::kContour)) seq.frames[3].points[static_cast<std::size_t>(i)] = {0.5, 0.5, 0.0};
  write_text_file(dir / "seq.json", serialize_sequence(seq));
  const auto s = (dir / "seq.json").string();
  const auto r = cli("pipeline --no-rotation --reference " + s + " --driving " + s + " --out-dir " + (dir / "out").string());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("frame 3") != std::string::npos);
}

TEST_CASE("loss command") {
  const auto dir = support::scratch_dir("cli_loss");
  auto g = support::rng(5);
  const Shape shape{1, 4, 8, 8};
  const auto z = support::random_tensor(g, shape);
  const auto zh = support::random_tensor(g, shape);
  const auto me = support::random_binary(g, {1, 8, 8});
  const auto mf = support::random_binary(g, {1, 8, 8});
  write_tensor(dir / "z.emot", z);
  write_tensor(dir / "zh.emot", zh);
  write_tensor(dir / "me.emot", me);
  write_tensor(dir / "mf.emot", mf);
  write_tensor(dir / "zero.emot", Tensor({1, 8, 8}, 0.0f));
  write_tensor(dir / "ones.emot", Tensor({1, 8, 8}, 1.0f));
  write_tensor(dir / "z1.emot", Tensor(shape, 1.0f));
  write_tensor(dir / "z0.emot", Tensor(shape, 0.0f));
  auto p = [&](const char* n) { return (dir / n).string(); };

  auto r = cli("loss --z " + p("z.emot") + " --z-hat " + p("zh.emot") + " --me " + p("zero.emot") + " --mf " + p("zero.emot"));
  REQUIRE(r.exit_code == 0);
  CHECK(nlohmann::json::parse(r.output)["ffg"] == 0.0);

  r = cli("loss --z " + p("z1.emot") + " --z-hat " + p("z0.emot") + " --me " + p("ones.emot") + " --mf " + p("ones.emot"));
  REQUIRE(r.exit_code == 0);
  CHECK(nlohmann::json::parse(r.output)["ffg"] == 4.0);

  r = cli("loss --z " + p("z.emot") + " --z-hat " + p("zh.emot") + " --me " + p("me.emot") + " --mf " + p("mf.emot") +
          " --eps " + p("z.emot") + " --eps-pred " + p("z0.emot") + " --mode sum-of-norms");
  REQUIRE(r.exit_code == 0);
  const auto doc = nlohmann::json::parse(r.output);
  const auto expect = total_loss(z, Tensor(shape, 0.0f), z, zh, me, mf, FfgMode::SumOfNorms);
  CHECK(doc["ffg"].get<double>() == expect.ffg);
  CHECK(doc["ldm"].get<double>() == expect.ldm);
  CHECK(doc["total"].get<double>() == expect.total);

  write_text_file(dir / "junk.emot", "not a tensor");
  CHECK(cli("loss --z " + p("junk.emot") + " --z-hat " + p("zh.emot") + " --me " + p("me.emot") + " --mf " + p("mf.emot")).exit_code == 2);
  CHECK(cli("loss --z " + p("z.emot") + " --z-hat " + p("ones.emot") + " --me " + p("me.emot") + " --mf " + p("mf.emot")).exit_code == 2);
  CHECK(cli("loss --z " + p("z.emot") + " --z-hat " + p("zh.emot") + " --me " + p("me.emot") + " --mf " + p("mf.emot") + " --mode other").exit_code == 2);
}

TEST_CASE("metrics, project, render, masks, align commands") {
  const auto dir = support::scratch_dir("cli_misc");
  const auto seq = (dir / "seq.json").string();
  REQUIRE(cli("synth --frames 3 --seed 4 --out " + seq).exit_code == 0);
  REQUIRE(cli("render --input " + seq + " --resolution 128 --out-dir " + (dir / "lmk").string() + " --jobs 2").exit_code == 0);
  CHECK(count_files(dir / "lmk", "lmk_") == 3);

  const auto m = cli("metrics --pred " + (dir / "lmk").string() + " --gt " + (dir / "lmk").string() + " --csv " +
                     (dir / "m.csv").string());
  REQUIRE(m.exit_code == 0);
  const auto summary = nlohmann::json::parse(m.output);
  CHECK(summary["l1"] == 0.0);
  CHECK(std::abs(summary["ssim"].get<double>() - 1.0) < 1e-9);
  CHECK(support::slurp(dir / "m.csv").rfind("frame,l1,ssim,landmark_ap", 0) == 0);

  REQUIRE(cli("project --input " + seq + " --resolution 128 --out " + (dir / "lm.json").string()).exit_code == 0);
  const auto lm = (dir / "lm.json").string();
  const auto ap = cli("metrics --pred " + (dir / "lmk").string() + " --gt " + (dir / "lmk").string() +
                      " --pred-landmarks " + lm + " --gt-landmarks " + lm);
  REQUIRE(ap.exit_code == 0);
  CHECK(nlohmann::json::parse(ap.output)["landmark_ap"] == 1.0);

  REQUIRE(cli("masks --input " + seq + " --resolution 128 --downsample 8 --out-dir " + (dir / "masks").string()).exit_code == 0);
  CHECK(read_rgb_image(dir / "masks" / "mexp_00000.png").width == 16);
  CHECK(count_files(dir / "masks", "mface_") == 3);

  REQUIRE(cli("align --driving " + seq + " --reference " + seq + " --out " + (dir / "aligned.json").string()).exit_code == 0);
  const auto aligned = load_sequence(dir / "aligned.json", default_topology());
  const auto orig = load_sequence(seq, default_topology());
  for (std::size_t i = 0; i < orig.frames[1].points.size(); ++i)
    CHECK(norm(aligned.frames[1].points[i] - orig.frames[1].points[i]) < 1e-6);
  CHECK(cli("align --driving " + seq + " --reference " + seq + " --ref-frame 9").exit_code == 2);
  CHECK(cli("metrics --pred " + (dir / "nowhere").string() + " --gt " + (dir / "lmk").string()).exit_code == 2);
}
