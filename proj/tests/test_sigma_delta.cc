#include <cmath>
#include <random>

#include "doctest.h"

#include "bernquant/errors.h"
#include "bernquant/sigma_delta.h"
#include "oracles.h"

using namespace bernquant;

namespace {

std::vector<double> random_sequence(std::mt19937_64& rng, std::size_t len, double amp) {
  std::uniform_real_distribution<double> U(-amp, amp);
  std::vector<double> y(len);
  for (auto& v : y) v = U(rng);
  return y;
}

// One-bit greedy at order 3 is unstable on every input tried, zero
// included (overflow near step 20); 0.9 overflows by step 11.
Tensor unstable_input(std::size_t len) {
  Tensor t({len});
  for (std::size_t k = 0; k < len; ++k) t[k] = 0.9;
  return t;
}

}  // namespace

TEST_CASE("alphabet") {
  const auto a1 = Alphabet::one_bit();
  CHECK(a1.levels() == std::vector<double>{-1.0, 1.0});
  CHECK(a1.round(0.0) == 1.0);
  CHECK(a1.round(-0.01) == -1.0);
  CHECK(a1.round(7.0) == 1.0);
  const auto a3 = Alphabet::three_bit();
  CHECK(a3.round(0.75) == 1.0);
  CHECK(a3.round(-0.75) == -0.5);
  CHECK(a3.round(1.5) == 2.0);
  CHECK(a3.round(0.1) == 0.5);
  CHECK(a3.code_of(-0.5) == 2);
  CHECK_THROWS_AS(a3.code_of(0.25), AlphabetViolation);
  CHECK_THROWS_AS(Alphabet({1.0, 2.0}), DomainError);
  CHECK_THROWS_AS(Alphabet({}), DomainError);
  CHECK_THROWS_AS(Alphabet({-1.0, 1.0, 1.0}), DomainError);
}

TEST_CASE("first order on zero input alternates") {
  std::vector<double> y(8, 0.0);
  const auto res = quantize_1d(y, 1, Alphabet::one_bit());
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(res.q[k] == (k % 2 ? -1.0 : 1.0));
    CHECK(res.state.u[k] == (k % 2 ? 0.0 : -1.0));
  }
  CHECK(res.state.max_abs_u == 1.0);
}

TEST_CASE("first order on constant 1/2") {
  std::vector<double> y(400, 0.5);
  const auto res = quantize_1d(y, 1, Alphabet::one_bit());
  const double cycle[4] = {1, 1, -1, 1};
  for (std::size_t k = 0; k < 400; ++k) CHECK(res.q[k] == cycle[k % 4]);
  double mean = 0.0;
  for (double q : res.q.values()) mean += q;
  CHECK(std::abs(mean / 400 - 0.5) <= 2.0 / 400);
  CHECK(res.state.max_abs_u <= 1.0);
}

TEST_CASE("reconstruction y - q = Delta^r u") {
  std::mt19937_64 rng(17);
  for (int r = 1; r <= 2; ++r)
    for (int trial = 0; trial < 200; ++trial) {
      const auto y = random_sequence(rng, 1 + rng() % 300, r == 1 ? 1.0 : 0.5);
      const auto res = quantize_1d(y, r, Alphabet::one_bit());
      const Tensor du = apply_difference(res.state.u, r, 1);
      for (std::size_t k = 0; k < y.size(); ++k)
        CHECK(std::abs(y[k] - res.q[k] - du[k]) <= 1e-12);
    }
}

TEST_CASE("first-order stability on 10^4 random inputs") {
  std::mt19937_64 rng(23);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto y = random_sequence(rng, 64, 1.0);
    worst = std::max(worst, quantize_1d(y, 1, Alphabet::one_bit()).state.max_abs_u);
  }
  CHECK(worst <= 1.0);
}

TEST_CASE("multi-level alphabets quantize onto their levels") {
  std::mt19937_64 rng(29);
  const auto a = Alphabet::three_bit();
  const auto y = random_sequence(rng, 100, 1.5);
  const auto res = quantize_1d(y, 2, a);
  for (double q : res.q.values()) CHECK(a.contains(q));
  const Tensor du = apply_difference(res.state.u, 2, 1);
  for (std::size_t k = 0; k < y.size(); ++k) CHECK(std::abs(y[k] - res.q[k] - du[k]) <= 1e-12);
}

TEST_CASE("third-order greedy overflow is reported, never clipped") {
  const Tensor y = unstable_input(256);
  CHECK_THROWS_AS(quantize_1d(y.values(), 3, Alphabet::one_bit(), 50.0), StabilityOverflow);

  CHECK_THROWS_AS(quantize_1d(std::vector<double>(256, 0.0), 3, Alphabet::one_bit(), 50.0),
                  StabilityOverflow);

  // Fibers of length 16: only fiber 2 (along axis 2) overflows that early.
  Tensor small({4, 16}, 0.0);
  for (std::size_t k = 0; k < 16; ++k) small[2 * 16 + k] = 0.9;
  try {
    quantize_directional(CoeffTensor(small), 3, 2, Alphabet::one_bit(), 50.0);
    FAIL("expected StabilityOverflow");
  } catch (const StabilityOverflow& e) {
    CHECK(e.fiber() == 2);
    CHECK(std::string(e.what()).find("fiber 2") != std::string::npos);
  }
}

TEST_CASE("directional quantization") {
  SUBCASE("zero tensor alternates along the axis") {
    const CoeffTensor a(Tensor::cube(5, 2, 0.0));
    for (int ell = 1; ell <= 2; ++ell) {
      const auto res = quantize_directional(a, 1, ell, Alphabet::one_bit());
      for (std::size_t i = 0; i <= 5; ++i)
        for (std::size_t j = 0; j <= 5; ++j) {
          const std::size_t along = ell == 1 ? i : j;
          CHECK(res.q[i * 6 + j] == (along % 2 ? -1.0 : 1.0));
        }
    }
  }
  SUBCASE("symmetric input gives transposed outputs") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(-0.9, 0.9);
    const int n = 12;
    Tensor t = Tensor::cube(n, 2);
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= i; ++j) t[i * (n + 1) + j] = t[j * (n + 1) + i] = U(rng);
    for (int r = 1; r <= 2; ++r) {
      const auto q1 = quantize_directional(CoeffTensor(t), r, 1, Alphabet::one_bit());
      const auto q2 = quantize_directional(CoeffTensor(t), r, 2, Alphabet::one_bit());
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) CHECK(q1.q[i * (n + 1) + j] == q2.q[j * (n + 1) + i]);
      CHECK(q1.state.max_abs_u == q2.state.max_abs_u);
    }
  }
  SUBCASE("fiber means of a - sigma are O(1/m)") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    const int n = 63;
    Tensor t = Tensor::cube(n, 2);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = U(rng);
    const auto res = quantize_directional(CoeffTensor(t), 1, 1, Alphabet::one_bit());
    for (int j = 0; j <= n; ++j) {
      double s = 0.0;
      for (int i = 0; i <= n; ++i) s += t[i * (n + 1) + j] - res.q[i * (n + 1) + j];
      CHECK(std::abs(s / (n + 1)) <= 2.0 * res.state.max_abs_u / (n + 1) + 1e-12);
    }
  }
  SUBCASE("reconstruction in d = 3") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    Tensor t = Tensor::cube(6, 3);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = U(rng);
    for (int ell = 1; ell <= 3; ++ell) {
      const auto res = quantize_directional(CoeffTensor(t), 2, ell, Alphabet::one_bit());
      const Tensor du = apply_difference(res.state.u, 2, ell);
      for (std::size_t i = 0; i < t.size(); ++i)
        CHECK(std::abs(t[i] - res.q[i] - du[i]) <= 1e-12);
      CHECK(res.state.max_abs_u == doctest::Approx(res.state.u.inf_norm()));
    }
  }
  CHECK_THROWS_AS(quantize_directional(CoeffTensor(Tensor::cube(3, 2)), 1, 3, Alphabet::one_bit()),
                  DomainError);
}

TEST_CASE("error envelope") {
  CHECK(quantization_error_envelope(99, 1, 1, 0.5, {0.5}) == doctest::Approx(0.2));
  CHECK(quantization_error_envelope(99, 1, 1, 0.5, {0.0}) == 2.0);
  CHECK(quantization_error_envelope(7, 1, 1, 0.5, {1e-9}) == 2.0);
  CHECK(quantization_error_envelope(16, 2, 1, 0.5, {0.5}) == doctest::Approx(1.0));
  CHECK(quantization_error_envelope(64, 2, 2, 0.5, {0.0, 0.5}) == doctest::Approx(0.25));
  CHECK(quantization_error_envelope(64, 2, 1, 0.5, {1.0, 0.5}) == 1.0);
  CHECK_THROWS_AS(quantization_error_envelope(8, 1, 1, 0.5, {1.5}), DomainError);
}

TEST_CASE("first-order pointwise bound holds with constant 1") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int n = 8; n <= 128; n *= 2)
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> a(n + 1);
      for (auto& v : a) v = U(rng);
      const auto res = quantize_1d(a, 1, Alphabet::one_bit());
      for (int i = 0; i <= 200; ++i) {
        const double x = i / 200.0;
        double e = 0.0;
        for (int k = 0; k <= n; ++k) e += (a[k] - res.q[k]) * oracle::basis_explicit(n, k, x);
        CHECK(std::abs(e) <= quantization_error_envelope(n, 1, 1, 0.5, {x}) + 1e-10);
      }
    }
}

TEST_CASE("error is bounded by max|u| times the variation") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (int r = 1; r <= 3; ++r)
    for (int n : {8, 20, 40}) {
      std::vector<double> a(n + 1);
      for (auto& v : a) v = U(rng);
      SdResult res;
      try {
        res = quantize_1d(a, r, Alphabet::one_bit(), 1e6);
      } catch (const StabilityOverflow&) {
        continue;
      }
      for (int i = 0; i <= 50; ++i) {
        const double x = i / 50.0;
        double e = 0.0;
        for (int k = 0; k <= n; ++k) e += (a[k] - res.q[k]) * oracle::basis_explicit(n, k, x);
        CHECK(std::abs(e) <= res.state.max_abs_u * variation(n, r, 1, {x}) + 1e-10);
      }
    }
}
