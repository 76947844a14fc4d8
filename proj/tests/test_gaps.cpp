#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "rigiditylab/gaps.hpp"

using namespace rigiditylab;

namespace {

const std::vector<AxisAngle> kZX = {{{0, 0, 1}, 1.0}, {{1, 0, 0}, 1.0}};

UnitaryRep one_generator(const Mat& g) {
  UnitaryRep r;
  r.dim = static_cast<int>(g.rows());
  r.gens = {g};
  return r;
}

Mat rotation2(double angle) {
  Mat r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

}  // namespace

TEST_CASE("generator gap bounds") {
  SECTION("plane rotation by 2 pi / 3") {
    auto e = generator_gap_bounds(one_generator(rotation2(2.0 * kPi / 3.0)));
    CHECK(e.delta_lo == Catch::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(e.delta_hi == Catch::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(e.invariant_dim == 0);
  }

  SECTION("minus identity") {
    auto e = generator_gap_bounds(one_generator(-Mat::Identity(3, 3)));
    CHECK(e.delta_lo == Catch::Approx(2.0));
    CHECK(e.delta_hi == Catch::Approx(2.0));
  }

  SECTION("trivial module is rejected") {
    CHECK_THROWS_AS(generator_gap_bounds(one_generator(Mat::Identity(2, 2))), ValidationError);
  }

  SECTION("single z rotation on spin 1: the weight-0 line is excluded") {
    auto irr = su2_irrep(1.0, {{{0, 0, 1}, 1.0}});
    auto e = generator_gap_bounds(irr.rep);
    CHECK(e.invariant_dim == 1);
    double expect = std::abs(cx(1, 0) - std::polar(1.0, 1.0));
    CHECK(e.delta_hi == Catch::Approx(expect).epsilon(1e-12));
    CHECK(e.delta_lo == Catch::Approx(expect).epsilon(1e-12));
  }

  SECTION("sandwich against the sampled minimax oracle") {
    Rng rng(801);
    for (int t = 0; t < 12; ++t) {
      int d = rng.uniform_int(2, 5);
      int s = rng.uniform_int(1, 3);
      UnitaryRep rho;
      rho.dim = d;
      for (int g = 0; g < s; ++g) rho.gens.push_back(rng.haar_unitary(d));
      auto e = generator_gap_bounds(rho);
      double exact = oracle::minimax_gap(rho, 3000, 900 + static_cast<std::uint64_t>(t));
      CHECK(e.delta_lo <= exact + 1e-6);
      CHECK(exact <= e.delta_hi + 1e-6);
    }
    for (double spin : {0.5, 1.5, 3.0}) {
      auto irr = su2_irrep(spin, kZX);
      auto e = generator_gap_bounds(irr.rep);
      double exact = oracle::minimax_gap(irr.rep, 3000, 950 + static_cast<std::uint64_t>(10 * spin));
      CHECK(e.delta_lo <= exact + 1e-6);
      CHECK(exact <= e.delta_hi + 1e-6);
    }
  }
}

TEST_CASE("dolgopyat sweep") {
  SECTION("spin 1/2 row matches a direct 2x2 computation") {
    auto rep = dolgopyat_sweep(kZX, 0.5);
    REQUIRE(rep.rows.size() == 1);
    auto irr = su2_irrep(0.5, kZX);
    Mat q = Mat::Zero(2, 2);
    for (const Mat& g : irr.rep.gens) {
      Mat diff = Mat::Identity(2, 2) - g;
      q += diff.adjoint() * diff;
    }
    // closed-form eigenvalues of a 2x2 hermitian matrix
    double tr = q.trace().real();
    double det = (q(0, 0) * q(1, 1) - q(0, 1) * q(1, 0)).real();
    double lam_min = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
    CHECK(rep.rows[0].delta_lo == Catch::Approx(std::sqrt(lam_min / 2.0)).epsilon(1e-10));
    CHECK(rep.rows[0].delta_lo > 0.0);
  }

  SECTION("all spins up to 10 have positive lower bounds") {
    auto rep = dolgopyat_sweep(kZX, 10.0);
    REQUIRE(rep.rows.size() == 20);
    for (const auto& row : rep.rows) {
      CHECK(row.delta_lo > 0.0);
      CHECK(row.delta_lo <= row.delta_hi + 1e-12);
      CHECK(row.delta_hi <= 2.0);
    }
    CHECK_FALSE(rep.gap_failure);
    CHECK(rep.eps0 > 0.0);
    double env = kInf;
    for (const auto& row : rep.rows)
      env = std::min(env, row.delta_lo * std::pow(std::log1p(row.lambda), 4.0));
    CHECK(rep.eps0 == Catch::Approx(env));
  }

  SECTION("empty and invalid sweeps") {
    CHECK(dolgopyat_sweep(kZX, 0.0).rows.empty());
    CHECK_THROWS_AS(dolgopyat_sweep({{{0, 0, 1}, 1.0}}, 2.0), ValidationError);
  }
}

TEST_CASE("covering radius") {
  SECTION("single identity point sees the antipode") {
    NetReport rep = covering_radius({Quat{}}, 50000);
    CHECK(rep.eps_hat <= kPi);
    CHECK(rep.eps_hat >= kPi - rep.probe_bias);
  }

  SECTION("identity plus antipode halves the radius") {
    Quat minus;
    minus.w = -1.0;
    NetReport rep = covering_radius({Quat{}, minus}, 50000);
    CHECK(rep.eps_hat == Catch::Approx(kPi / 2.0).margin(rep.probe_bias));
  }

  SECTION("dense random sample is a fine net") {
    Rng rng(802);
    std::vector<Quat> sample;
    for (int i = 0; i < 10000; ++i) sample.push_back(oracle::random_quat(rng));
    NetReport rep = covering_radius(sample, 50000);
    CHECK(rep.eps_hat < 0.2);
    double mc = oracle::mc_covering(sample, 2000, 803);
    CHECK(mc <= rep.eps_hat + rep.probe_bias);
  }

  SECTION("empty input is rejected") {
    CHECK_THROWS_AS(covering_radius({}, 1000), ValidationError);
  }
}

TEST_CASE("net growth") {
  auto rep = net_growth_experiment(kZX, 4, 50000);
  REQUIRE(rep.rows.size() == 5);

  SECTION("ball sizes match the free-group counts") {
    CHECK(rep.rows[0].ball_size == 1);
    CHECK(rep.rows[1].ball_size == 5);
    CHECK(rep.rows[2].ball_size == 17);
    CHECK(rep.rows[3].ball_size == 53);
    CHECK(rep.rows[4].ball_size == 161);
  }

  SECTION("radius zero sees the whole sphere, then strictly shrinks") {
    CHECK(rep.rows[0].eps_hat >= kPi - rep.rows[0].probe_bias);
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
      CHECK(rep.rows[i].eps_hat < rep.rows[i - 1].eps_hat);
  }

  SECTION("monotone nonincreasing holds exactly on the shared grid") {
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
      CHECK(rep.rows[i].eps_hat <= rep.rows[i - 1].eps_hat);
  }
}

TEST_CASE("averaging certificates") {
  SECTION("two words with a quarter rotation") {
    UnitaryRep rho = one_generator((Mat(1, 1) << cx(0, 1)).finished());
    auto cert = averaging_lower_bound(rho, {Word{}, Word{1}});
    CHECK(cert.eta == Catch::Approx(std::sqrt(2.0)));
    CHECK(cert.sigma_plus_min == Catch::Approx(std::sqrt(2.0)));
    CHECK(cert.pass);
  }

  SECTION("identity plus minus-identity averages to zero, vacuously sound") {
    UnitaryRep rho = one_generator((Mat(1, 1) << cx(-1, 0)).finished());
    auto cert = averaging_lower_bound(rho, {Word{}, Word{1}});
    CHECK(cert.eta == Catch::Approx(2.0));
    CHECK(std::isinf(cert.sigma_plus_min));
    CHECK(cert.pass);
  }

  SECTION("single word passes by convention") {
    Rng rng(804);
    UnitaryRep rho = one_generator(rng.haar_unitary(3));
    auto cert = averaging_lower_bound(rho, {Word{1, 1}});
    CHECK(cert.eta == 1.0);
    CHECK(cert.sigma_plus_min == Catch::Approx(1.0));
    CHECK(cert.pass);
  }

  SECTION("three-term resonance defeats the pairwise hypothesis") {
    // Near-cube-root-of-unity character: each pairwise gap is close to
    // sqrt(3), yet 1 + z + z^2 is close to zero.  The certificate records
    // the failure instead of absorbing it.
    UnitaryRep rho = one_generator((Mat(1, 1) << std::polar(1.0, 2.0 * kPi / 3.0 + 0.01)).finished());
    auto cert = averaging_lower_bound(rho, {Word{}, Word{1}, Word{1, 1}});
    CHECK(cert.eta > 1.7);
    CHECK(cert.sigma_plus_min < 0.02);
    CHECK_FALSE(cert.pass);
    CHECK_FALSE(cert.pass_augmented);
  }

  SECTION("coinciding images fall back to the convention") {
    Presentation z2{1, {{1, 1}}};
    (void)z2;
    UnitaryRep rho = one_generator(-Mat::Identity(2, 2));
    // gamma^2 acts as the identity, so the only pair carries no hypothesis
    auto cert = averaging_lower_bound(rho, {Word{}, Word{1, 1}});
    CHECK(cert.eta == 1.0);
    CHECK(cert.pass);
  }

  SECTION("empty word list is rejected") {
    UnitaryRep rho = one_generator(Mat::Identity(1, 1));
    CHECK_THROWS_AS(averaging_lower_bound(rho, {}), ValidationError);
  }
}

TEST_CASE("torus gap scans") {
  SECTION("half rotation excludes its even weights") {
    auto rep = torus_gap_scan({0.5}, 2);
    CHECK(rep.excluded == 2);
    CHECK(rep.scanned == 4);
    REQUIRE_FALSE(rep.rows.empty());
    CHECK(rep.rows[0].eps == Catch::Approx(2.0));
    REQUIRE(rep.rows[0].minimizer.size() == 1);
    CHECK(std::abs(rep.rows[0].minimizer[0]) == 1);
  }

  SECTION("pythagorean angle at weight bound 1") {
    double theta = std::atan2(4.0, 3.0) / (2.0 * kPi);
    auto rep = torus_gap_scan({theta}, 1);
    CHECK(rep.rows[0].eps == Catch::Approx(2.0 / std::sqrt(5.0)).margin(1e-12));
  }

  SECTION("profile is monotone in alpha") {
    double theta = std::atan2(4.0, 3.0) / (2.0 * kPi);
    auto rep = torus_gap_scan({theta}, 200, 4);
    for (std::size_t a = 1; a < rep.rows.size(); ++a)
      CHECK(rep.rows[a].eps >= rep.rows[a - 1].eps);
  }

  SECTION("two-dimensional scan") {
    auto rep = torus_gap_scan({0.3, 0.45}, 5, 2);
    CHECK(rep.scanned == 120);
    CHECK(rep.rows[0].eps > 0.0);
    for (const auto& row : rep.rows) REQUIRE(row.minimizer.size() == 2);
  }

  SECTION("validation") {
    CHECK_THROWS_AS(torus_gap_scan({}, 5), ValidationError);
    CHECK_THROWS_AS(torus_gap_scan({0.5}, 0), ValidationError);
    CHECK_THROWS_AS(torus_gap_scan({1.5}, 5), ValidationError);
    CHECK_THROWS_AS(torus_gap_scan({0.1, 0.2, 0.3, 0.4}, 1000), ValidationError);
  }
}

TEST_CASE("quaternion geometry") {
  SECTION("su2 round trip") {
    auto irr = su2_irrep(0.5, {{{0, 0, 1}, 1.2}});
    Quat q = quat_from_su2(irr.rep.gens[0]);
    CHECK(q.w == Catch::Approx(std::cos(0.6)));
    CHECK(q.z == Catch::Approx(std::sin(0.6)));
    CHECK(q.x == Catch::Approx(0.0).margin(1e-14));

    CHECK_THROWS_AS(quat_from_su2(Mat::Identity(3, 3)), ValidationError);
    CHECK_THROWS_AS(quat_from_su2(Mat(2 * Mat::Identity(2, 2))), ValidationError);
  }

  SECTION("distance is a geodesic metric with diameter pi") {
    Quat e;
    Quat minus;
    minus.w = -1.0;
    CHECK(quat_dist(e, e) == 0.0);
    CHECK(quat_dist(e, minus) == Catch::Approx(kPi));
    Rng rng(805);
    for (int t = 0; t < 50; ++t) {
      Quat a = oracle::random_quat(rng), b = oracle::random_quat(rng), c = oracle::random_quat(rng);
      CHECK(quat_dist(a, b) == Catch::Approx(quat_dist(b, a)));
      CHECK(quat_dist(a, c) <= quat_dist(a, b) + quat_dist(b, c) + 1e-12);
    }
  }

  SECTION("spiral points are unit and well spread") {
    auto pts = super_fibonacci(2000);
    REQUIRE(pts.size() == 2000);
    for (int i = 0; i < 2000; i += 97) {
      const Quat& q = pts[static_cast<std::size_t>(i)];
      CHECK(quat_dot(q, q) == Catch::Approx(1.0).margin(1e-12));
    }
    NetReport rep = covering_radius(pts, 50000);
    CHECK(rep.eps_hat < probe_mesh_bound(2000));
  }
}
