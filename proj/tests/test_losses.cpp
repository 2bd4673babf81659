#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include <json.hpp>

#include "facectl/error.hpp"
#include "facectl/losses.hpp"
#include "loss_oracle.hpp"
#include "support.hpp"

using namespace facectl;

namespace {

bool rel_close(double got, long double expect, double tol) {
  const long double scale = std::max<long double>(std::abs(expect), 1e-300L);
  return std::abs(static_cast<long double>(got) - expect) / scale <= tol;
}

Shape random_shape(std::mt19937_64& g) {
  auto dim = [&](std::size_t hi) { return std::uniform_int_distribution<std::size_t>(1, hi)(g); };
  return {dim(4), dim(8), dim(16), dim(16)};
}

Shape mask_shape(std::mt19937_64& g, const Shape& full) {
  switch (std::uniform_int_distribution<int>(0, 3)(g)) {
    case 0: return full;
    case 1: return {full[0], 1, full[2], full[3]};
    case 2: return {1, full[2], full[3]};
    default: return {full[2], full[3]};
  }
}

}  // namespace

TEST_CASE("forward diffusion") {
  const Tensor z0({2, 3}, 2.0f);
  const Tensor eps({2, 3}, 4.0f);
  const auto out = forward_diffuse(z0, eps, 0.25);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double expect = 0.5 * 2.0 + std::sqrt(0.75) * 4.0;
    CHECK(out[i] == static_cast<float>(expect));
  }
  auto g = support::rng(4);
  const auto a = support::random_tensor(g, {3, 4, 5});
  const auto e = support::random_tensor(g, {3, 4, 5});
  CHECK(forward_diffuse(a, e, 1.0) == a);
  CHECK(forward_diffuse(a, e, 0.0) == e);

  const auto sched = NoiseSchedule::scaled_linear();
  const auto t500 = forward_diffuse(a, e, 500, sched);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ab = sched.alphabar(500);
    CHECK(t500[i] == static_cast<float>(std::sqrt(ab) * a[i] + std::sqrt(1 - ab) * e[i]));
  }
  CHECK_THROWS_AS(forward_diffuse(a, e, 1000, sched), TimestepOutOfRange);
  CHECK_THROWS_AS(forward_diffuse(a, Tensor({3, 4, 6}), 0.5), ShapeMismatch);
}

TEST_CASE("noise schedules") {
  const auto s = NoiseSchedule::scaled_linear();
  CHECK(s.steps() == 1000);
  CHECK(s.alphabar(0) == doctest::Approx(1 - 0.00085));
  for (std::size_t t = 1; t < s.steps(); ++t) CHECK(s.alphabar(t) <= s.alphabar(t - 1));
  CHECK(s.alphabar(999) > 0.0);
  CHECK_THROWS_AS(NoiseSchedule({0.5, 0.6}), SchemaError);
  CHECK_THROWS_AS(NoiseSchedule({1.2}), SchemaError);
  CHECK_THROWS_AS(NoiseSchedule({0.5, -0.1}), SchemaError);
  CHECK_NOTHROW(NoiseSchedule({1.0, 1.0, 0.0}));
}

TEST_CASE("ldm fixtures") {
  auto g = support::rng(11);
  const auto a = support::random_tensor(g, {2, 3, 4});
  CHECK(ldm_loss(a, a) == 0.0);
  CHECK(ldm_loss(Tensor({2, 3, 4}, 1.0f), Tensor({2, 3, 4}, 0.0f)) == 1.0);
  const auto b = support::random_tensor(g, {2, 3, 4});
  CHECK(rel_close(ldm_loss(a, b), loop::ldm(a, b), 1e-12));
  CHECK_THROWS_AS(ldm_loss(a, Tensor({2, 3, 5})), ShapeMismatch);
}

TEST_CASE("ffg analytic fixtures") {
  const Shape shape{2, 4, 8, 8};
  const Tensor z(shape, 3.0f), zh(shape, 2.0f);
  const Tensor ones({1, 8, 8}, 1.0f), zeros({1, 8, 8}, 0.0f);
  CHECK(ffg_loss(z, zh, zeros, zeros, FfgMode::SumInsideNorm) == 0.0);
  CHECK(ffg_loss(z, zh, zeros, zeros, FfgMode::SumOfNorms) == 0.0);
  CHECK(ffg_loss(z, zh, ones, ones, FfgMode::SumInsideNorm) == 4.0);
  CHECK(ffg_loss(z, zh, ones, ones, FfgMode::SumOfNorms) == 2.0);
  CHECK(ffg_loss(z, zh, ones, ones) == 4.0);
}

TEST_CASE("ffg and total loss match the loop oracle on random fixtures") {
  auto g = support::rng(123);
  for (int trial = 0; trial < 100; ++trial) {
    const auto shape = random_shape(g);
    const auto z = support::random_tensor(g, shape);
    const auto zh = support::random_tensor(g, shape);
    const bool soft = trial % 4 == 3;
    const auto me = soft ? support::random_tensor(g, mask_shape(g, shape), 0, 1) : support::random_binary(g, mask_shape(g, shape));
    const auto mf = soft ? support::random_tensor(g, mask_shape(g, shape), 0, 1) : support::random_binary(g, mask_shape(g, shape));
    for (FfgMode mode : {FfgMode::SumInsideNorm, FfgMode::SumOfNorms}) {
      CHECK(rel_close(ffg_loss(z, zh, me, mf, mode), loop::ffg(z, zh, me, mf, mode), 1e-12));
    }
    const auto eps = support::random_tensor(g, shape);
    const auto eps_pred = support::random_tensor(g, shape);
    const auto report = total_loss(eps, eps_pred, z, zh, me, mf);
    CHECK(rel_close(report.ldm, loop::ldm(eps, eps_pred), 1e-12));
    CHECK(rel_close(report.ffg, loop::ffg(z, zh, me, mf, FfgMode::SumInsideNorm), 1e-12));
    CHECK(rel_close(report.total, static_cast<long double>(report.ldm) + report.ffg, 1e-12));
    if (report.breakdown.overlap_count > 0) {
      CHECK(rel_close(report.breakdown.overlap, loop::overlap_mean(z, zh, me, mf), 1e-12));
    }
  }
}

TEST_CASE("disjoint binary masks make the two modes agree") {
  auto g = support::rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Shape shape{2, 4, 12, 12};
    const auto z = support::random_tensor(g, shape);
    const auto zh = support::random_tensor(g, shape);
    auto me = support::random_binary(g, {1, 12, 12});
    auto mf = support::random_binary(g, {1, 12, 12});
    for (std::size_t i = 0; i < mf.size(); ++i)
      if (me[i] > 0) mf[i] = 0;
    const double a = ffg_loss(z, zh, me, mf, FfgMode::SumInsideNorm);
    const double b = ffg_loss(z, zh, me, mf, FfgMode::SumOfNorms);
    CHECK(std::abs(a - b) <= 1e-12 * std::max(a, b));
  }
}

TEST_CASE("overlap amplification") {
  auto g = support::rng(10);
  const Shape shape{1, 4, 10, 10};
  for (int trial = 0; trial < 30; ++trial) {
    const auto z = support::random_tensor(g, shape);
    auto zh = support::random_tensor(g, shape);
    const auto me = support::random_binary(g, shape);
    const auto mf = support::random_binary(g, shape);
    const double inside = ffg_loss(z, zh, me, mf, FfgMode::SumInsideNorm);
    const double norms = ffg_loss(z, zh, me, mf, FfgMode::SumOfNorms);
    CHECK(inside >= norms);
    CHECK(inside > norms);  // random overlap carries mass
    // Remove the difference on the overlap: equality.
    for (std::size_t i = 0; i < z.size(); ++i)
      if (me[i] > 0 && mf[i] > 0) zh[i] = z[i];
    const double a = ffg_loss(z, zh, me, mf, FfgMode::SumInsideNorm);
    const double b = ffg_loss(z, zh, me, mf, FfgMode::SumOfNorms);
    CHECK(std::abs(a - b) <= 1e-12 * std::max(a, 1.0));
  }
}

TEST_CASE("ffg is invariant to a joint permutation of elements") {
  auto g = support::rng(12);
  const Shape shape{2, 3, 9, 7};
  const auto z = support::random_tensor(g, shape);
  const auto zh = support::random_tensor(g, shape);
  const auto me = support::random_binary(g, shape);
  const auto mf = support::random_tensor(g, shape, 0, 1);
  std::vector<std::size_t> perm(z.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), g);
  auto permute = [&](const Tensor& t) {
    Tensor out(t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[perm[i]];
    return out;
  };
  for (FfgMode mode : {FfgMode::SumInsideNorm, FfgMode::SumOfNorms}) {
    const double a = ffg_loss(z, zh, me, mf, mode);
    const double b = ffg_loss(permute(z), permute(zh), permute(me), permute(mf), mode);
    CHECK(std::abs(a - b) <= 1e-12 * a);
  }
}

TEST_CASE("ffg scales quadratically") {
  auto g = support::rng(13);
  const Shape shape{2, 4, 8, 8};
  const auto z = support::random_tensor(g, shape);
  const auto zh = support::random_tensor(g, shape);
  const auto me = support::random_binary(g, {1, 8, 8});
  const auto mf = support::random_binary(g, {1, 8, 8});
  for (float c : {0.5f, 3.7f, 12.0f}) {
    Tensor cz = z, czh = zh;
    for (auto& v : cz.data()) v *= c;
    for (auto& v : czh.data()) v *= c;
    for (FfgMode mode : {FfgMode::SumInsideNorm, FfgMode::SumOfNorms}) {
      const double base = ffg_loss(z, zh, me, mf, mode);
      CHECK(std::abs(ffg_loss(cz, czh, me, mf, mode) / (double(c) * c * base) - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("losses are non-negative and zero only without masked differences") {
  auto g = support::rng(14);
  const Shape shape{1, 2, 6, 6};
  for (int trial = 0; trial < 20; ++trial) {
    const auto z = support::random_tensor(g, shape);
    auto zh = support::random_tensor(g, shape);
    const auto me = support::random_binary(g, {1, 6, 6}, 0.3);
    const auto mf = support::random_binary(g, {1, 6, 6}, 0.3);
    CHECK(ffg_loss(z, zh, me, mf) >= 0.0);
    CHECK(ldm_loss(z, zh) >= 0.0);
    const auto me_full = broadcast_to(me, shape), mf_full = broadcast_to(mf, shape);
    for (std::size_t i = 0; i < z.size(); ++i)
      if (me_full[i] > 0 || mf_full[i] > 0) zh[i] = z[i];
    CHECK(ffg_loss(z, zh, me, mf, FfgMode::SumInsideNorm) == 0.0);
    CHECK(ffg_loss(z, zh, me, mf, FfgMode::SumOfNorms) == 0.0);
  }
}

TEST_CASE("total loss with zero masks and identical noise is zero") {
  auto g = support::rng(15);
  const Shape shape{1, 4, 8, 8};
  const auto z = support::random_tensor(g, shape);
  const auto zh = support::random_tensor(g, shape);
  const auto eps = support::random_tensor(g, shape);
  const Tensor zero({1, 8, 8}, 0.0f);
  const auto r = total_loss(eps, eps, z, zh, zero, zero);
  CHECK(r.total == 0.0);
  const auto doc = nlohmann::json::parse(r.to_json());
  CHECK(doc["total"] == 0.0);
  CHECK(doc["mode"] == "sum-inside-norm");
}

TEST_CASE("mask errors") {
  const Shape shape{1, 2, 4, 4};
  const Tensor z(shape, 1.0f);
  Tensor bad({1, 4, 4}, 0.5f);
  bad[3] = 1.5f;
  CHECK_THROWS_AS(ffg_loss(z, z, bad, Tensor({1, 4, 4}), FfgMode::SumInsideNorm), MaskRangeError);
  bad[3] = -0.01f;
  CHECK_THROWS_AS(ffg_loss(z, z, bad, Tensor({1, 4, 4}), FfgMode::SumInsideNorm), MaskRangeError);
  CHECK_THROWS_AS(ffg_loss(z, z, Tensor({1, 3, 4}), Tensor({1, 4, 4})), ShapeMismatch);
  CHECK_THROWS_AS(ffg_loss(z, Tensor({1, 2, 4, 5}), Tensor({1, 4, 4}), Tensor({1, 4, 4})), ShapeMismatch);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<float>(3)), ShapeMismatch);
  CHECK_THROWS_AS(Tensor({2, 0}), ShapeMismatch);
}

TEST_CASE("mask tensors and broadcasting") {
  Mask m(5, 3, 0);
  m.at(4, 2) = 1;
  const auto t = mask_tensor(m);
  CHECK(t.shape() == Shape{1, 3, 5});
  CHECK(t[14] == 1.0f);
  const auto b = broadcast_to(t, {2, 4, 3, 5});
  CHECK(b.size() == 120);
  CHECK(b[119] == 1.0f);
  CHECK(b[60 + 14] == 1.0f);
  CHECK(b[13] == 0.0f);
}

TEST_CASE("pairwise sum is exact on representable data") {
  std::vector<double> v(1 << 20, 0.25);
  CHECK(pairwise_sum(v) == 262144.0);
  CHECK(pairwise_sum({}) == 0.0);
}

TEST_CASE("EMOT tensor encoding") {
  auto g = support::rng(16);
  const auto t = support::random_tensor(g, {3, 1, 4});
  const auto bytes = encode_tensor(t);
  CHECK(bytes.substr(0, 4) == "EMOT");
  CHECK(bytes.size() == 4 + 4 + 3 * 4 + 12 * 4);
  std::uint32_t rank;
  std::memcpy(&rank, bytes.data() + 4, 4);
  CHECK(rank == 3);  // little-endian host
  CHECK(decode_tensor(bytes) == t);

  CHECK_THROWS_AS(decode_tensor(bytes.substr(0, bytes.size() - 1)), FormatError);
  CHECK_THROWS_AS(decode_tensor(bytes + "x"), FormatError);
  auto wrong = bytes;
  wrong[0] = 'X';
  CHECK_THROWS_AS(decode_tensor(wrong), FormatError);
  CHECK_THROWS_AS(decode_tensor("EMO"), FormatError);
  for (std::size_t cut = 0; cut < bytes.size(); ++cut) CHECK_THROWS_AS(decode_tensor(bytes.substr(0, cut)), FormatError);

  const auto path = support::scratch_dir("emot") / "t.emot";
  write_tensor(path, t);
  CHECK(read_tensor(path) == t);
}
