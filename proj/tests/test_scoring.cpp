#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "oracles.hpp"
#include "spikekg/error.hpp"
#include "spikekg/scoring.hpp"

using namespace spikekg;
using doctest::Approx;
using Vec = std::vector<double>;

TEST_CASE("asymmetric score examples") {
  const Vec ts{0.2, 0.5}, to{0.1, 0.3};
  CHECK(score_asym(ts, to, Vec{0.1, 0.2}) == Approx(0.0));
  CHECK(score_asym(ts, to, Vec{0, 0}) == Approx(-0.3));
  CHECK_THROWS_AS(score_asym(ts, Vec{0.1}, Vec{0, 0}), DimensionError);
}

TEST_CASE("asymmetric score: swapping s and o equals negating delta") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 100; ++i) {
    Vec a(6), b(6), d(6), nd(6);
    for (std::size_t k = 0; k < 6; ++k) {
      a[k] = u(rng);
      b[k] = u(rng);
      d[k] = u(rng);
      nd[k] = -d[k];
    }
    CHECK(score_asym(a, b, d) == Approx(score_asym(b, a, nd)));
    CHECK(score_asym(a, b, d) <= 0.0);
  }
}

TEST_CASE("symmetric score examples") {
  CHECK(score_sym(Vec{0.2}, Vec{0.5}, Vec{0.3}) == Approx(0.0));
  CHECK(score_sym(Vec{0.2, 0.9}, Vec{0.5, 0.4}, Vec{0.1, 0.1}) == Approx(-0.6));
  // delta enters through its absolute value
  CHECK(score_sym(Vec{0.2}, Vec{0.5}, Vec{-0.3}) == Approx(0.0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 100; ++i) {
    Vec a(5), b(5), d(5);
    for (std::size_t k = 0; k < 5; ++k) {
      a[k] = u(rng);
      b[k] = u(rng);
      d[k] = u(rng);
    }
    CHECK(score_sym(a, b, d) == score_sym(b, a, d));
    CHECK(score_sym(a, b, d) <= 0.0);
  }
}

TEST_CASE("truncated score") {
  CHECK(score_truncated(Vec{0.2}, Vec{0.1, 0.9}, Vec{0.1, 0.5}) == Approx(0.0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 50; ++i) {
    Vec a(3), b(7), d(7);
    for (auto* v : {&a, &b, &d})
      for (auto& x : *v) x = u(rng);
    const Vec b3(b.begin(), b.begin() + 3), d3(d.begin(), d.begin() + 3);
    CHECK(score_truncated(a, b, d) == Approx(score_asym(a, b3, d3)));
    const Vec a7 = b;
    CHECK(score_truncated(a7, b, d) == Approx(score_asym(a7, b, d)));
  }
}

TEST_CASE("TransE score") {
  CHECK(score_transe(Vec{1, 0}, Vec{0, 0}, Vec{0, 0}) == Approx(-1.0));
  CHECK(score_transe(Vec{0.5, 0.25}, Vec{0.25, 0.5}, Vec{0.25, -0.25}) == Approx(0.0));
  // Permuting coordinates of all three vectors leaves the score unchanged.
  const Vec es{0.3, -0.2, 0.9}, eo{0.1, 0.4, -0.5}, r{0.0, 0.7, 0.2};
  const Vec pes{0.9, 0.3, -0.2}, peo{-0.5, 0.1, 0.4}, pr{0.2, 0.0, 0.7};
  CHECK(score_transe(es, eo, r) == Approx(score_transe(pes, peo, pr)));
  CHECK_THROWS_AS(score_transe(Vec{1}, Vec{1, 2}, Vec{1}), DimensionError);
}

TEST_CASE("RESCAL score matches a triple loop") {
  CHECK(score_rescal(Vec{1, 0}, Vec{1, 0, 0, 1}, Vec{1, 0}) == Approx(1.0));
  CHECK(score_rescal(Vec{0.3, 0.4}, Vec(4, 0.0), Vec{-1, 2}) == 0.0);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  Vec es(3), eo(3), r(9);
  for (auto* v : {&es, &eo, &r})
    for (auto& x : *v) x = g(rng);
  double want = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) want += es[i] * r[i * 3 + j] * eo[j];
  CHECK(std::abs(score_rescal(es, r, eo) - want) < 1e-12);
  CHECK_THROWS_AS(score_rescal(es, Vec(4, 0.0), eo), DimensionError);
}

namespace {

// Checks every gradient of a three-argument scorer against central differences.
using Scorer = std::function<double(const Vec&, const Vec&, const Vec&)>;
using Grad = std::function<void(const Vec&, const Vec&, const Vec&, double, std::span<double>,
                                std::span<double>, std::span<double>)>;

void check_grad(const Scorer& f, const Grad& g, Vec a, Vec b, Vec c) {
  const double up = 0.7;
  Vec ga(a.size(), 0.0), gb(b.size(), 0.0), gc(c.size(), 0.0);
  g(a, b, c, up, ga, gb, gc);
  auto check = [&](Vec& x, const Vec& gx) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double fd = up * oracle::central_diff(
                                 [&](const Vec& xx) {
                                   Vec saved = x;
                                   x = xx;
                                   const double v = f(a, b, c);
                                   x = saved;
                                   return v;
                                 },
                                 x, i, 1e-7);
      CHECK(std::abs(gx[i] - fd) <= 1e-4 * std::max(std::abs(fd), 1e-3));
    }
  };
  check(a, ga);
  check(b, gb);
  check(c, gc);
}

bool near_kink(const Vec& v) {
  return std::any_of(v.begin(), v.end(), [](double x) { return std::abs(x) < 1e-3; });
}

}  // namespace

TEST_CASE("scorer gradients match central differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  int done = 0;
  while (done < 50) {
    Vec a(5), b(5), c(5);
    for (auto* v : {&a, &b, &c})
      for (auto& x : *v) x = u(rng);
    Vec asym_arg(5), sym_inner(5), sym_outer(5);
    for (std::size_t i = 0; i < 5; ++i) {
      asym_arg[i] = a[i] - b[i] - c[i];
      sym_inner[i] = a[i] - b[i];
      sym_outer[i] = std::abs(sym_inner[i]) - std::abs(c[i]);
    }
    if (near_kink(asym_arg) || near_kink(sym_inner) || near_kink(sym_outer) || near_kink(c))
      continue;
    ++done;
    check_grad(score_asym, score_asym_grad, a, b, c);
    check_grad(score_sym, score_sym_grad, a, b, c);
    check_grad(score_transe, score_transe_grad, a, b, c);
    check_grad(score_truncated, score_truncated_grad, a, b, c);
  }
  for (int i = 0; i < 20; ++i) {
    Vec es(4), r(16), eo(4);
    for (auto* v : {&es, &r, &eo})
      for (auto& x : *v) x = u(rng);
    check_grad(score_rescal, score_rescal_grad, es, r, eo);
  }
}

TEST_CASE("truncated gradient ignores unmatched spikes") {
  Vec ga(1, 0.0), gb(3, 0.0), gd(3, 0.0);
  score_truncated_grad(Vec{0.5}, Vec{0.1, 0.2, 0.3}, Vec{0.1, 0.1, 0.1}, 1.0, ga, gb, gd);
  CHECK(gb[1] == 0.0);
  CHECK(gb[2] == 0.0);
  CHECK(gd[1] == 0.0);
  CHECK(gd[2] == 0.0);
  CHECK(ga[0] == -1.0);
}
