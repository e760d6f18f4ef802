#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "requant/error.hpp"
#include "requant/tensor.hpp"
#include "support/oracles.hpp"

using namespace requant;

TEST_CASE("BitWidth derives the signed code range") {
  CHECK(BitWidth(2).min_code() == -2);
  CHECK(BitWidth(2).max_code() == 1);
  CHECK(BitWidth(8).min_code() == -128);
  CHECK(BitWidth(8).max_code() == 127);
  CHECK(BitWidth(16).min_code() == -32768);
  CHECK(BitWidth(16).max_code() == 32767);
  CHECK_THROWS_AS(BitWidth(1), Error);
  CHECK_THROWS_AS(BitWidth(17), Error);
  CHECK_THROWS_AS(BitWidth(0), Error);
}

TEST_CASE("WeightTensor validates shape, length, and finiteness") {
  CHECK_NOTHROW(WeightTensor("w", {2, 2}, {1.0, 2.0, 3.0, 4.0}));
  CHECK_THROWS_AS(WeightTensor("w", {2, 2}, {1.0, 2.0, 3.0}), Error);
  CHECK_THROWS_AS(WeightTensor("w", {}, {}), Error);
  CHECK_THROWS_AS(WeightTensor("w", {0}, {}), Error);
  CHECK_THROWS_AS(WeightTensor("w", {-3}, {}), Error);
  CHECK_THROWS_AS(WeightTensor("", {1}, {1.0}), Error);
  CHECK_THROWS_AS(WeightTensor("w", {1}, {std::numeric_limits<double>::quiet_NaN()}), Error);
  CHECK_THROWS_AS(WeightTensor("w", {1}, {std::numeric_limits<double>::infinity()}), Error);

  try {
    WeightTensor("bad", {1}, {std::numeric_limits<double>::quiet_NaN()});
    FAIL("expected a throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonFinite);
    CHECK(e.subject() == "bad");
  }
}

TEST_CASE("QuantParams ties scale to alpha and w_max") {
  QuantParams ok{.alpha = 0.5,
                 .scale = 0.5 * 2.0 / 127.0,
                 .bits = BitWidth(8),
                 .strategy = Strategy::kUniformClip,
                 .w_max = 2.0,
                 .loss = 1e-6};
  CHECK_NOTHROW(ok.validate());

  QuantParams bad_scale = ok;
  bad_scale.scale = 0.123;
  CHECK_THROWS_AS(bad_scale.validate(), Error);

  QuantParams bad_alpha = ok;
  bad_alpha.alpha = 0.0;
  CHECK_THROWS_AS(bad_alpha.validate(), Error);
  bad_alpha.alpha = 1.5;
  CHECK_THROWS_AS(bad_alpha.validate(), Error);

  QuantParams degenerate{.alpha = 1.0,
                         .scale = 0.0,
                         .bits = BitWidth(8),
                         .strategy = Strategy::kUniformFull,
                         .w_max = 0.0,
                         .loss = 0.0};
  CHECK_NOTHROW(degenerate.validate());
  degenerate.scale = 1.0;
  CHECK_THROWS_AS(degenerate.validate(), Error);
}

TEST_CASE("QuantizedTensor rejects out-of-range codes") {
  QuantParams params{.alpha = 1.0,
                     .scale = 1.0 / 7.0,
                     .bits = BitWidth(4),
                     .strategy = Strategy::kUniformFull,
                     .w_max = 1.0,
                     .loss = 0.0};
  CHECK_NOTHROW(QuantizedTensor("q", {4}, {-8, -1, 0, 7}, params));
  CHECK_THROWS_AS(QuantizedTensor("q", {1}, {8}, params), Error);
  CHECK_THROWS_AS(QuantizedTensor("q", {1}, {-9}, params), Error);
  CHECK_THROWS_AS(QuantizedTensor("q", {3}, {0, 0}, params), Error);
}

TEST_CASE("max_abs matches the definition") {
  CHECK(max_abs(oracles::make_tensor("t", {-0.5, 0.25, 0.1})) == 0.5);
  CHECK(max_abs(oracles::make_tensor("t", {0.0, 0.0, 0.0})) == 0.0);
  CHECK_THROWS_AS(max_abs(std::span<const double>{}), Error);
}

TEST_CASE("max_abs equals a linear scan oracle on 10000 uniform samples") {
  auto values = oracles::uniform_values(123, 10000, -1.0, 1.0);
  CHECK(max_abs(oracles::make_tensor("t", values)) == oracles::ref_max_abs(values));
}

TEST_CASE("max_abs is permutation invariant and scale equivariant") {
  auto values = oracles::gaussian_values(9, 2048, 0.3);
  const double base = max_abs(oracles::make_tensor("t", values));

  std::mt19937_64 rng(77);
  auto shuffled = values;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(max_abs(oracles::make_tensor("t", shuffled)) == base);

  for (double c : {-2.0, 0.5, 3.0, -0.125}) {
    auto scaled = values;
    for (auto& v : scaled) v *= c;
    CHECK(max_abs(oracles::make_tensor("t", scaled)) == std::fabs(c) * base);
  }
}

TEST_CASE("strategy names round-trip") {
  for (Strategy s : {Strategy::kUniformFull, Strategy::kUniformClip, Strategy::kReshapeFull,
                     Strategy::kReshapeClip})
    CHECK(strategy_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(strategy_from_string("bogus"), Error);
  CHECK(strategy_is_reshaped(Strategy::kReshapeFull));
  CHECK(!strategy_is_reshaped(Strategy::kUniformClip));
  CHECK(strategy_is_searched(Strategy::kUniformClip));
  CHECK(!strategy_is_searched(Strategy::kReshapeFull));
}

TEST_CASE("LayerReport degenerate flag keys off the method") {
  LayerReport r;
  CHECK(!r.degenerate());
  r.method = "degenerate";
  CHECK(r.degenerate());
}
