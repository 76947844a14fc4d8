#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "rigiditylab/rigidity.hpp"
#include "rigiditylab/rng.hpp"

using namespace rigiditylab;

namespace {

const Presentation kZ{1, {}};
const Presentation kZ5{1, {{1, 1, 1, 1, 1}}};
const Presentation kZ2sign{1, {{1, 1}}};
const Presentation kTorus{2, {{1, 2, -1, -2}}};
const Presentation kS3{2, {{1, 1}, {2, 2}, {1, 2, 1, 2, 1, 2}}};

UnitaryRep z5_rep() {
  UnitaryRep r;
  r.dim = 2;
  Vec phases(2);
  phases(0) = std::polar(1.0, 2.0 * kPi / 5.0);
  phases(1) = std::polar(1.0, 4.0 * kPi / 5.0);
  r.gens.push_back(Mat(phases.asDiagonal()));
  return r;
}

UnitaryRep s3_standard() {
  UnitaryRep r;
  r.dim = 2;
  Mat a(2, 2), b(2, 2);
  a << 1, 0, 0, -1;
  double c = std::cos(2.0 * kPi / 3.0), s = std::sin(2.0 * kPi / 3.0);
  b << c, s, s, -c;
  r.gens = {a, b};
  return r;
}

// Commuting pair of diagonal unitaries with generic phases.
UnitaryRep torus_diag_rep() {
  UnitaryRep r;
  r.dim = 2;
  Vec pa(2), pb(2);
  pa(0) = std::polar(1.0, 0.3);
  pa(1) = std::polar(1.0, 1.1);
  pb(0) = std::polar(1.0, 0.7);
  pb(1) = std::polar(1.0, -0.4);
  r.gens = {Mat(pa.asDiagonal()), Mat(pb.asDiagonal())};
  return r;
}

Mat pauli_z_skew() {
  Mat m(2, 2);
  m << cx(0, 1), 0, 0, cx(0, -1);
  return m;
}

Mat pauli_x_skew() {
  Mat m(2, 2);
  m << 0, cx(0, 1), cx(0, 1), 0;
  return m;
}

double tuple_distance(const ActionTuple& a, const ActionTuple& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.images.size(); ++i)
    worst = std::max(worst, op_norm(a.images[i] - b.images[i]));
  return worst;
}

}  // namespace

TEST_CASE("adjoint representation implements conjugation") {
  Rng rng(901);
  UnitaryRep rho;
  rho.dim = 3;
  rho.gens = {rng.haar_unitary(3), rng.haar_unitary(3)};
  UnitaryRep ad = adjoint_rep(rho);
  REQUIRE(ad.dim == 9);
  for (int trial = 0; trial < 5; ++trial) {
    Mat x = rng.gaussian_matrix(3, 3);
    for (int g = 0; g < 2; ++g) {
      Mat direct = rho.gens[g] * x * rho.gens[g].adjoint();
      Mat via = unvec_mat(ad.gens[g] * vec_mat(x), 3);
      REQUIRE(op_norm(direct - via) < 1e-13);
    }
  }
}

TEST_CASE("adjoint of an action is an action") {
  RepCheck c5 = check_rep(kZ5, adjoint_rep(z5_rep()));
  REQUIRE(c5.pass);
  RepCheck c3 = check_rep(kS3, adjoint_rep(s3_standard()));
  REQUIRE(c3.pass);
}

TEST_CASE("adjoint cohomology of the solver test points") {
  CochainComplex z5 = build_complex(kZ5, adjoint_rep(z5_rep()));
  CohomologyReport r5 = cohomology_dims(z5);
  REQUIRE(r5.h1 == 0);
  REQUIRE(r5.h1 == oracle::h1_dim(kZ5, adjoint_rep(z5_rep())));

  CochainComplex s3 = build_complex(kS3, adjoint_rep(s3_standard()));
  CohomologyReport r3 = cohomology_dims(s3);
  REQUIRE(r3.h1 == 0);
  REQUIRE(r3.h0 == 1);

  CochainComplex torus = build_complex(kTorus, adjoint_rep(torus_diag_rep()));
  CohomologyReport rt = cohomology_dims(torus);
  REQUIRE(rt.h1 == 4);
  REQUIRE(rt.h1 == oracle::h1_dim(kTorus, adjoint_rep(torus_diag_rep())));
}

TEST_CASE("relator residual") {
  SECTION("an actual action is flat") {
    REQUIRE(relator_residual(kS3, make_action(s3_standard())) <= 1e-12);
  }
  SECTION("free group has no relators") {
    UnitaryRep rho;
    rho.dim = 2;
    Rng rng(902);
    rho.gens = {rng.haar_unitary(2), rng.haar_unitary(2)};
    REQUIRE(relator_residual(Presentation{2, {}}, make_action(rho)) == 0.0);
  }
  SECTION("order-two relator on a rotated sign") {
    ActionTuple t;
    t.dim = 1;
    Mat g(1, 1);
    g(0, 0) = -std::polar(1.0, 0.1);
    t.images = {g};
    REQUIRE(relator_residual(kZ2sign, t) == Catch::Approx(2.0 * std::sin(0.1)).margin(1e-12));
  }
  SECTION("image count must match") {
    ActionTuple t;
    t.dim = 1;
    t.images = {Mat::Identity(1, 1)};
    REQUIRE_THROWS_AS(relator_residual(kTorus, t), ValidationError);
  }
}

TEST_CASE("perturbations") {
  ActionTuple base = make_action(torus_diag_rep());

  SECTION("magnitude zero is the identity perturbation") {
    ActionTuple out = perturb_action(kTorus, base, PerturbMode::raw, 0.0, 1);
    REQUIRE(tuple_distance(out, base) == 0.0);
  }
  SECTION("planted conjugation keeps the relators") {
    ActionTuple out = perturb_action(kTorus, base, PerturbMode::planted, 0.3, 7);
    REQUIRE(relator_residual(kTorus, out) <= 1e-12);
    REQUIRE(tuple_distance(out, base) > 1e-3);
    REQUIRE(tuple_distance(out, base) <= 2.0 * 0.3 + 1e-9);
  }
  SECTION("raw perturbation breaks them at first order") {
    ActionTuple out = perturb_action(kZ2sign, make_action([] {
                                       UnitaryRep r;
                                       r.dim = 1;
                                       Mat g(1, 1);
                                       g(0, 0) = -1.0;
                                       r.gens = {g};
                                       return r;
                                     }()),
                                     PerturbMode::raw, 1e-2, 11);
    double res = relator_residual(kZ2sign, out);
    REQUIRE(res > 1e-5);
    REQUIRE(res < 0.1);
  }
  SECTION("centralizer perturbation stays on the action variety") {
    ActionTuple out = perturb_action(kTorus, base, PerturbMode::centralizer, 1e-3, 13);
    REQUIRE(relator_residual(kTorus, out) <= 1e-12);
    REQUIRE(op_norm(out.images[0] - base.images[0]) > 1e-4);
    REQUIRE(op_norm(out.images[1] - base.images[1]) <= 1e-15);
  }
  SECTION("torsion blocks centralizer weights") {
    UnitaryRep sign;
    sign.dim = 1;
    Mat g(1, 1);
    g(0, 0) = -1.0;
    sign.gens = {g};
    REQUIRE_THROWS_AS(perturb_action(kZ2sign, make_action(sign), PerturbMode::centralizer, 1e-3, 3),
                      NumericalError);
  }
  SECTION("same seed, same output") {
    ActionTuple a = perturb_action(kTorus, base, PerturbMode::raw, 1e-2, 21);
    ActionTuple b = perturb_action(kTorus, base, PerturbMode::raw, 1e-2, 21);
    REQUIRE(tuple_distance(a, b) == 0.0);
  }
  SECTION("negative magnitude is rejected") {
    REQUIRE_THROWS_AS(perturb_action(kTorus, base, PerturbMode::raw, -1.0, 1), ValidationError);
  }
}

TEST_CASE("deformation families") {
  SECTION("circle rotation family") {
    UnitaryRep circle;
    circle.dim = 1;
    Mat g(1, 1);
    g(0, 0) = std::polar(1.0, 0.3);
    circle.gens = {g};
    Mat z0(1, 1);
    z0(0, 0) = cx(0, 1);
    DeformationFamily fam = deformation_family(kZ, make_action(circle), z0, {1});
    ActionTuple s = fam.sample(0.7);
    REQUIRE(std::abs(s.images[0](0, 0) - std::polar(1.0, 1.0)) < 1e-12);
  }
  SECTION("diagonal family on the commutator presentation") {
    Mat z0(2, 2);
    z0 << cx(0, 1), 0, 0, cx(0, -1);
    DeformationFamily fam =
        deformation_family(kTorus, make_action(torus_diag_rep()), z0, {1, 0});
    for (int i = 0; i < 20; ++i) {
      double t = -1.0 + 2.0 * i / 19.0;
      REQUIRE(relator_residual(kTorus, fam.sample(t)) <= 1e-12);
    }
    REQUIRE(tuple_distance(fam.sample(0.5), fam.base) > 0.1);
  }
  SECTION("torsion kills every nonzero weight") {
    UnitaryRep sign;
    sign.dim = 1;
    Mat g(1, 1);
    g(0, 0) = -1.0;
    sign.gens = {g};
    Mat z0(1, 1);
    z0(0, 0) = cx(0, 1);
    REQUIRE_THROWS_AS(deformation_family(kZ2sign, make_action(sign), z0, {1}), ValidationError);
  }
  SECTION("direction must commute with the images") {
    Mat z0(2, 2);
    z0 << cx(0, 1), 0, 0, cx(0, -1);
    REQUIRE_THROWS_AS(deformation_family(kS3, make_action(s3_standard()), z0, {0, 0}),
                      ValidationError);
  }
  SECTION("direction must be skew-hermitian") {
    Mat z0 = Mat::Identity(2, 2);
    REQUIRE_THROWS_AS(deformation_family(kTorus, make_action(torus_diag_rep()), z0, {1, 0}),
                      ValidationError);
  }
  SECTION("one weight per generator") {
    Mat z0(2, 2);
    z0 << cx(0, 1), 0, 0, cx(0, -1);
    REQUIRE_THROWS_AS(deformation_family(kTorus, make_action(torus_diag_rep()), z0, {1}),
                      ValidationError);
  }
}

namespace {

// Consecutive log-residual ratios over the measurable stretch of a Newton
// history; quadratic convergence pushes these toward 2.
std::vector<double> quadratic_ratios(const std::vector<double>& history) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < history.size(); ++i) {
    if (history[i] < 1e-1 && history[i] > 0.0 && history[i + 1] > 1e-12)
      out.push_back(std::log(1.0 / history[i + 1]) / std::log(1.0 / history[i]));
  }
  return out;
}

void check_planted_convergence(const Presentation& p, const UnitaryRep& rho, std::uint64_t seed) {
  ActionTuple base = make_action(rho);
  ActionTuple target = perturb_action(p, base, PerturbMode::planted, 1e-2, seed);
  ConjugacyResult res = weil_newton(p, base, target);
  REQUIRE(res.converged);
  REQUIRE(res.iterations <= 8);
  REQUIRE(res.history.back() <= 1e-10);
  REQUIRE_FALSE(res.projected_only);
  ActionTuple mapped;
  mapped.dim = base.dim;
  for (const Mat& g : base.images) mapped.images.push_back(res.u * g * res.u.adjoint());
  REQUIRE(tuple_distance(mapped, target) <= 1.01 * res.history.back() + 1e-13);
  std::vector<double> ratios = quadratic_ratios(res.history);
  REQUIRE_FALSE(ratios.empty());
  for (double r : ratios) REQUIRE(r >= 1.7);
}

}  // namespace

TEST_CASE("newton solver recovers planted conjugations") {
  SECTION("cyclic rep") { check_planted_convergence(kZ5, z5_rep(), 31); }
  SECTION("two-generator rep") { check_planted_convergence(kS3, s3_standard(), 32); }

  SECTION("conjugator matches the plant up to the centralizer") {
    ActionTuple base = make_action(z5_rep());
    ActionTuple target = perturb_action(kZ5, base, PerturbMode::planted, 1e-2, 31);
    Rng rng(31);
    Mat x = rng.skew_hermitian(2);
    x *= 1e-2 / op_norm(x);
    Mat plant = expm(x);
    ConjugacyResult res = weil_newton(kZ5, base, target);
    Mat in_centralizer = plant.adjoint() * res.u;
    REQUIRE(op_norm(in_centralizer * base.images[0] - base.images[0] * in_centralizer) < 1e-7);
  }

  SECTION("already conjugate input needs zero steps") {
    ActionTuple base = make_action(s3_standard());
    ConjugacyResult res = weil_newton(kS3, base, base);
    REQUIRE(res.converged);
    REQUIRE(res.iterations == 0);
    REQUIRE(res.history.size() == 1);
    REQUIRE(res.history.front() <= 1e-14);
    REQUIRE(op_norm(res.u - Mat::Identity(2, 2)) == 0.0);
  }
}

TEST_CASE("newton solver reports obstructions") {
  ActionTuple base = make_action(torus_diag_rep());
  Mat z0(2, 2);
  z0 << cx(0, 1), 0, 0, cx(0, -1);
  DeformationFamily fam = deformation_family(kTorus, base, z0, {1, 0});

  SECTION("centralizer deformation never converges") {
    NewtonOptions opts;
    opts.max_iter = 5;
    ConjugacyResult res = weil_newton(kTorus, base, fam.sample(1e-3), opts);
    REQUIRE_FALSE(res.converged);
    REQUIRE(res.iterations == 5);
    REQUIRE(res.obstruction == Catch::Approx(1e-3 * std::sqrt(2.0)).epsilon(0.05));
    REQUIRE(res.history.back() >= 0.9 * res.history.front());
  }
  SECTION("obstruction is linear in the deformation parameter") {
    NewtonOptions opts;
    opts.max_iter = 2;
    double o1 = weil_newton(kTorus, base, fam.sample(1e-3), opts).obstruction;
    double o2 = weil_newton(kTorus, base, fam.sample(2e-3), opts).obstruction;
    REQUIRE(o2 / o1 == Catch::Approx(2.0).epsilon(0.05));
  }
  SECTION("non-action target is flagged and solved in projection") {
    UnitaryRep sign;
    sign.dim = 1;
    Mat g(1, 1);
    g(0, 0) = -1.0;
    sign.gens = {g};
    ActionTuple target = perturb_action(kZ2sign, make_action(sign), PerturbMode::raw, 1e-3, 41);
    NewtonOptions opts;
    opts.max_iter = 4;
    ConjugacyResult res = weil_newton(kZ2sign, make_action(sign), target, opts);
    REQUIRE(res.projected_only);
    REQUIRE(res.action_residual > 1e-5);
    REQUIRE_FALSE(res.converged);
    REQUIRE(res.obstruction <= 1e-12);
  }
  SECTION("the base itself must be an action") {
    ActionTuple bad = perturb_action(kZ2sign, make_action([] {
                                       UnitaryRep r;
                                       r.dim = 1;
                                       Mat g(1, 1);
                                       g(0, 0) = -1.0;
                                       r.gens = {g};
                                       return r;
                                     }()),
                                     PerturbMode::raw, 1e-2, 5);
    REQUIRE_THROWS_AS(weil_newton(kZ2sign, bad, bad), ValidationError);
  }
}

TEST_CASE("perturbation too large for the logarithmic chart") {
  UnitaryRep circle;
  circle.dim = 1;
  circle.gens = {Mat::Identity(1, 1)};
  ActionTuple target;
  target.dim = 1;
  Mat g(1, 1);
  g(0, 0) = std::polar(1.0, kPi - 0.01);
  target.images = {g};
  REQUIRE_THROWS_AS(weil_newton(kZ, make_action(circle), target), NumericalError);
  REQUIRE_THROWS_AS(obstruction_class(kZ, make_action(circle), target), NumericalError);
}

TEST_CASE("obstruction class") {
  SECTION("planted conjugation carries no obstruction") {
    ActionTuple base = make_action(z5_rep());
    ActionTuple target = perturb_action(kZ5, base, PerturbMode::planted, 1e-4, 51);
    REQUIRE(obstruction_class(kZ5, base, target).norm <= 1e-10);
  }
  SECTION("identical actions give the zero vector") {
    ActionTuple base = make_action(s3_standard());
    ObstructionReport rep = obstruction_class(kS3, base, base);
    REQUIRE(rep.norm == 0.0);
    REQUIRE(rep.harmonic.norm() == 0.0);
  }
  SECTION("centralizer deformation is proportional to the parameter") {
    ActionTuple base = make_action(torus_diag_rep());
    Mat z0(2, 2);
    z0 << cx(0, 1), 0, 0, cx(0, -1);
    DeformationFamily fam = deformation_family(kTorus, base, z0, {1, 0});
    double norm = obstruction_class(kTorus, base, fam.sample(1e-3)).norm;
    REQUIRE(norm == Catch::Approx(1e-3 * std::sqrt(2.0)).epsilon(0.05));
  }
  SECTION("invariant under simultaneous conjugation") {
    ActionTuple base = make_action(torus_diag_rep());
    Mat z0(2, 2);
    z0 << cx(0, 1), 0, 0, cx(0, -1);
    DeformationFamily fam = deformation_family(kTorus, base, z0, {1, 0});
    ActionTuple target = fam.sample(1e-3);
    double plain = obstruction_class(kTorus, base, target).norm;
    Rng rng(904);
    Mat w = rng.haar_unitary(2);
    ActionTuple cbase, ctarget;
    cbase.dim = ctarget.dim = 2;
    for (const Mat& g : base.images) cbase.images.push_back(w * g * w.adjoint());
    for (const Mat& g : target.images) ctarget.images.push_back(w * g * w.adjoint());
    double conj = obstruction_class(kTorus, cbase, ctarget).norm;
    REQUIRE(std::abs(conj - plain) <= 1e-10);
  }
}

TEST_CASE("exponential chart probes") {
  Mat x = pauli_z_skew();
  Mat y = pauli_x_skew();
  Mat phi = expm(0.4 * pauli_x_skew());
  Mat twist(2, 2);
  twist << cx(0.3, 0.1), cx(0.7, 0), 0, cx(0.2, -0.4);
  std::vector<double> grid = default_probe_grid();

  SECTION("commuting arguments compose exactly") {
    Mat d1(2, 2), d2(2, 2);
    d1 << cx(0, 1), 0, 0, cx(0, -2);
    d2 << cx(0, 0.5), 0, 0, cx(0, 1.5);
    ExpLemmaReport rep = exp_lemma_probe(d1, d2, phi, twist, grid);
    for (const ExpProbeRow& row : rep.rows) REQUIRE(row.bch <= 1e-13);
  }
  SECTION("noncommuting arguments miss at second order") {
    ExpLemmaReport rep = exp_lemma_probe(x, y, phi, twist, grid);
    REQUIRE(rep.slope_bch >= 1.9);
    REQUIRE(rep.slope_bch <= 2.1);
    REQUIRE(rep.slope_dq >= 0.9);
    REQUIRE(rep.slope_dq <= 1.1);
    REQUIRE(rep.max_equivariance <= 1e-13);
    REQUIRE(rep.slope_twisted >= 1.9);
    REQUIRE(rep.slope_twisted <= 2.1);
  }
  SECTION("validation") {
    std::vector<double> increasing{1e-3, 1e-2};
    REQUIRE_THROWS_AS(exp_lemma_probe(x, y, phi, twist, increasing), ValidationError);
    std::vector<double> nonpositive{1e-2, 0.0};
    REQUIRE_THROWS_AS(exp_lemma_probe(x, y, phi, twist, nonpositive), ValidationError);
    REQUIRE_THROWS_AS(exp_lemma_probe(Mat::Identity(2, 2), y, phi, twist, grid), ValidationError);
    REQUIRE_THROWS_AS(exp_lemma_probe(x, y, twist, twist, grid), ValidationError);
    REQUIRE_THROWS_AS(exp_lemma_probe(x, y, phi, twist, {}), ValidationError);
  }
}
