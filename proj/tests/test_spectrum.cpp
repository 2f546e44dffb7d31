#include "qgd/error.hpp"
#include "qgd/models.hpp"
#include "qgd/spectrum.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qgd;
using std::numbers::pi;

namespace {

Graph star(double constant = 0.0) {
  GraphDescription d;
  d.vertices.push_back(VertexData::interior("c", constant));
  for (int i = 1; i <= 3; ++i) {
    d.vertices.push_back(VertexData::boundary("b" + std::to_string(i), 0.0));
    d.edges.push_back({"e" + std::to_string(i), "c", "b" + std::to_string(i), 1.0, {}, 0.0});
  }
  return build_graph(d);
}

BandQuery square(double alpha) {
  BandQuery q;
  q.constant = alpha;
  return q;
}

} // namespace

TEST_CASE("star, delta: two searchable roots and the excluded doublet") {
  SpectrumOptions opts;
  opts.e_max = 24.0;
  const auto r = spectrum(star(), CouplingKind::Delta, opts);
  REQUIRE(r.roots.size() == 2);
  CHECK(std::abs(r.roots[0].energy - pi * pi / 4.0) < 1e-9);
  CHECK(std::abs(r.roots[1].energy - 9.0 * pi * pi / 4.0) < 1e-9);
  CHECK(r.roots[0].multiplicity == 1);
  CHECK(r.roots[1].multiplicity == 1);
  REQUIRE(r.unsearched.size() == 1);
  CHECK(r.unsearched[0].lo < pi * pi);
  CHECK(r.unsearched[0].hi > pi * pi);
  CHECK(r.excluded(pi * pi));
  CHECK_FALSE(r.excluded(5.0));
  CHECK(r.warnings.empty());
}

TEST_CASE("star, delta, alpha = 1: lowest root from the scalar secular equation") {
  // 3k cot k + alpha = 0, i.e. tan k = -3k for alpha = 1
  const double k_ref = oracle::bisect([](double k) { return std::sin(k) + 3.0 * k * std::cos(k); }, pi / 2.0, pi);
  SpectrumOptions opts;
  opts.e_max = 9.0;
  const auto r = spectrum(star(1.0), CouplingKind::Delta, opts);
  REQUIRE_FALSE(r.roots.empty());
  CHECK(std::abs(r.roots[0].energy - k_ref * k_ref) < 1e-9);
}

TEST_CASE("star, delta-prime: lowest searchable root is pi^2") {
  SpectrumOptions opts;
  opts.e_max = 24.0;
  const auto r = spectrum(star(), CouplingKind::DeltaPrimeS, opts);
  REQUIRE_FALSE(r.roots.empty());
  CHECK(std::abs(r.roots[0].energy - pi * pi) < 1e-9);
  CHECK(r.excluded(pi * pi / 4.0));
  CHECK(r.excluded(9.0 * pi * pi / 4.0));
}

TEST_CASE("negative inertia counts negative eigenvalues") {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
  m(0, 0) = -1.0;
  m(1, 1) = 2.0;
  m(2, 2) = -0.5;
  m(0, 1) = cdouble(0.1, 0.2);
  m(1, 0) = cdouble(0.1, -0.2);
  CHECK(negative_inertia(m) == 2);
}

TEST_CASE("secular_roots finds a double root with multiplicity 2") {
  auto family = [](double E) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(3, 3);
    m(0, 0) = E - 2.0;
    m(1, 1) = E - 2.0;
    m(2, 2) = E - 5.0;
    return m;
  };
  SpectrumOptions opts;
  opts.grid_step = 0.3;
  const auto r = secular_roots(family, {{0.0, 10.0}}, opts);
  REQUIRE(r.roots.size() == 2);
  CHECK(std::abs(r.roots[0].energy - 2.0) < 1e-10);
  CHECK(r.roots[0].multiplicity == 2);
  CHECK(r.roots[0].kernel.size() == 2);
  CHECK(std::abs(r.roots[1].energy - 5.0) < 1e-10);
}

TEST_CASE("band test: square lattice margins at k = pi -+ 0.01") {
  const auto q = square(2.0);
  for (const double k : {pi + 0.01, pi - 0.01}) {
    const auto v = band_test_rect(q, k * k);
    const double lhs = std::abs(4.0 * std::cos(k) + (2.0 / k) * std::sin(k));
    // margin = (4 |sin k| - |F|) / k * k with F the row over sin k
    CHECK(v.margin == doctest::Approx((4.0 - lhs) * std::abs(std::sin(k))).epsilon(1e-10));
    CHECK(v.in_band == (lhs <= 4.0));
  }
  CHECK(std::abs(4.0 * std::cos(pi + 0.01) + (2.0 / (pi + 0.01)) * std::sin(pi + 0.01)) ==
        doctest::Approx(4.0061).epsilon(1e-4));
  CHECK(std::abs(4.0 * std::cos(pi - 0.01) + (2.0 / (pi - 0.01)) * std::sin(pi - 0.01)) ==
        doctest::Approx(3.9934).epsilon(1e-4));
  CHECK_FALSE(band_test_rect(q, (pi + 0.01) * (pi + 0.01)).in_band);
  CHECK(band_test_rect(q, (pi - 0.01) * (pi - 0.01)).in_band);
}

TEST_CASE("band test: alpha = 0 lattices are gapless") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> energy(1e-6, 100.0);
  for (const double l2 : {1.0, 0.5, 0.73}) {
    BandQuery q;
    q.l2 = l2;
    for (int i = 0; i < 2000; ++i) {
      const double E = energy(rng);
      CHECK(band_test_rect(q, E).margin >= -1e-12);
    }
    CHECK(band_edges_rect(q, 1e-6, 100.0, 0.05).empty());
  }
}

TEST_CASE("band test: first gap edge for alpha = 3, l2 = 0.5") {
  BandQuery q;
  q.l2 = 0.5;
  q.constant = 3.0;
  const auto edges = band_edges_rect(q, 1e-6, 39.0, 0.01, 1e-13);
  REQUIRE_FALSE(edges.empty());
  CHECK(std::abs(edges[0] - 1.76663458280885) < 1e-9);
  CHECK_FALSE(band_test_rect(q, 1.0).in_band);
  CHECK(band_test_rect(q, 2.0).in_band);

  q.constant = 1.0;
  const auto edges1 = band_edges_rect(q, 1e-6, 5.0, 0.01, 1e-13);
  REQUIRE_FALSE(edges1.empty());
  CHECK(std::abs(edges1[0] - 0.639506454229179) < 1e-9);
}

TEST_CASE("band test is defined at E <= 0") {
  const auto q = square(-3.0);
  const auto v = band_test_rect(q, -0.5);
  CHECK(std::isfinite(v.margin));
  CHECK_NOTHROW(band_test_rect(q, 0.0));
}

TEST_CASE("property: margin has no sign chatter on refinement") {
  const auto q = square(2.0);
  const auto coarse = band_edges_rect(q, 0.05, 60.0, 0.05, 1e-10);
  const auto fine = band_edges_rect(q, 0.05, 60.0, 0.005, 1e-10);
  REQUIRE(coarse.size() == fine.size());
  for (std::size_t i = 0; i < coarse.size(); ++i) CHECK(std::abs(coarse[i] - fine[i]) < 1e-8);
}

TEST_CASE("magnetic bands at zero flux equal the scalar band test") {
  BandQuery q = square(2.0);
  q.l2 = 0.7;
  q.bloch_grid = 16;
  std::vector<double> grid;
  for (double E = 0.1; E <= 40.0; E += 0.37) grid.push_back(E);
  const auto mag = magnetic_band_spectrum(q, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto scalar = band_test_rect(q, grid[i]);
    CHECK(mag[i].in_band == scalar.in_band);
    CHECK(std::abs(mag[i].margin - scalar.margin) < 1e-12 * std::max(1.0, std::abs(scalar.margin)) + 1e-13);
  }
}

TEST_CASE("magnetic Bloch matrix reduces to the Harper form") {
  BandQuery q;
  q.flux_p = 1;
  q.flux_q = 2;
  for (const double k : {0.7, 2.1, 4.0}) {
    const double E = k * k;
    const double s = std::sin(k) / k;
    for (const auto [t1, t2] : {std::pair{0.0, 0.0}, std::pair{0.4, 1.3}, std::pair{pi, -2.0}}) {
      const Eigen::MatrixXcd bloch = magnetic_bloch_matrix(q, E, t1, t2) / s;
      const Eigen::MatrixXcd harper =
          models::harper_bloch_matrix(1, 2, t1, t2) - 4.0 * std::cos(k) * Eigen::MatrixXcd::Identity(2, 2);
      CHECK((bloch - harper).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("magnetic bands at Phi = 2 pi equal those at zero flux") {
  BandQuery zero = square(1.5);
  zero.bloch_grid = 16;
  BandQuery full = zero;
  full.flux_p = 1;
  full.flux_q = 1;
  std::vector<double> grid;
  for (double E = 0.2; E <= 30.0; E += 0.41) grid.push_back(E);
  const auto a = magnetic_band_spectrum(zero, grid);
  const auto b = magnetic_band_spectrum(full, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(a[i].in_band == b[i].in_band);
}

TEST_CASE("magnetic band spectrum validates its flux") {
  BandQuery q;
  q.flux_p = 2;
  q.flux_q = 4;
  CHECK_THROWS_AS(magnetic_band_spectrum(q, {1.0}), Error);
  q.flux_p = 1;
  q.flux_q = 100;
  CHECK_THROWS_AS(magnetic_band_spectrum(q, {1.0}), Error);
  q.flux_q = 3;
  CHECK_THROWS_AS(band_test_rect(q, 1.0), Error);
}

TEST_CASE("magnetic field splits the square-lattice band") {
  BandQuery q = square(0.0);
  q.flux_p = 1;
  q.flux_q = 3;
  q.bloch_grid = 16;
  std::vector<double> grid;
  for (double E = 0.05; E < pi * pi; E += 0.05) grid.push_back(E);
  const auto v = magnetic_band_spectrum(q, grid);
  int gaps = 0;
  for (const auto& r : v) gaps += r.in_band ? 0 : 1;
  CHECK(gaps > 0);
}
