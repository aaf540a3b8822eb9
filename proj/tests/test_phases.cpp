#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "test_util.hpp"
#include "uavlc/channel.hpp"
#include "uavlc/errors.hpp"
#include "uavlc/model.hpp"
#include "uavlc/oracle.hpp"
#include "uavlc/phases.hpp"

using namespace uavlc;
using uavlc::testing::Prng;
using uavlc::testing::table1_scenario;

namespace {
constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

Eigen::VectorXcd stack_from_theta(const Eigen::MatrixXd& theta) {
  Eigen::VectorXcd z(theta.size());
  int k = 0;
  for (int l = 0; l < theta.rows(); ++l)
    for (int m = 0; m < theta.cols(); ++m) z(k++) = std::polar(1.0, -theta(l, m));
  return z;
}

}  // namespace

TEST_CASE("align_phases basics") {
  Scenario s = table1_scenario();
  const std::vector<int> all = {0, 1, 2};

  SUBCASE("first element always has zero phase") {
    Prng rng(2);
    for (int t = 0; t < 10; ++t) {
      const Eigen::Vector2d q(rng.uniform(0, 100), rng.uniform(0, 100));
      const Eigen::MatrixXd rows = align_phases(s, q, t % s.user_count(), all);
      for (int r = 0; r < rows.rows(); ++r) CHECK(rows(r, 0) == 0.0);
      CHECK((rows.array() >= 0.0).all());
      CHECK((rows.array() < kTwoPi).all());
    }
  }
  SUBCASE("arrival equals departure makes every phase zero") {
    // place the UAV and the user so both direction cosines coincide
    Scenario sym = s;
    sym.ris_list.col(0) << 50, 50;
    sym.users.col(0) << 50, 30;
    // UAV placed so (a_l - x)/d_ur == (v_j - a_l)/d_rg
    // departure cosine: (50-50)/d = 0 -> put the UAV right above the surface
    const Eigen::MatrixXd rows =
        align_phases(sym, Eigen::Vector2d(50, 70), 0, {0});
    // departure cosine is 0 only if user x == surface x; it is, so both
    // cosines vanish and every phase is zero
    for (int m = 0; m < sym.ris_elements; ++m) CHECK(rows(0, m) == 0.0);
  }
  SUBCASE("half-wavelength spacing with unit cosine difference") {
    // two elements: second phase is exactly pi
    Scenario two = s;
    two.ris_elements = 2;
    // geometry with cos difference 1: UAV above surface (arrival 0),
    // user sideways at the surface height... engineered via direct formula:
    // theta_2 = -(2 pi d / lambda) * dcos = -pi * dcos; dcos = 1 -> pi (mod)
    // Validate through the public API with a synthetic geometry:
    // arrival cosine 0 (UAV overhead), departure cosine ~1 requires the user
    // nearly on the surface axis; approximate and check against the formula.
    const Eigen::Vector2d q = two.ris_list.col(0);
    const Eigen::MatrixXd rows = align_phases(two, q, 0, {0});
    const Eigen::Vector3d ris = two.ris_position(0), usr = two.user_position(0);
    const double dcos = (usr.x() - ris.x()) / (ris - usr).norm();
    const double expect = std::fmod(-M_PI * dcos + 2 * kTwoPi, kTwoPi);
    CHECK(rows(0, 1) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("aligned phases achieve the coherent closed form") {
  Scenario s = table1_scenario();
  Prng rng(5);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Vector2d q(rng.uniform(0, 100), rng.uniform(0, 100));
    const int j = rng.index(s.user_count());
    const std::vector<int> ris = {0, 1, 2};
    PhaseMatrix pm = PhaseMatrix::zeros(s.ris_count(), s.ris_elements);
    pm.theta = align_phases(s, q, j, ris);
    Eigen::RowVectorXi row = Eigen::RowVectorXi::Ones(s.ris_count());
    const double got = aggregate_gain(s, q, pm, row, j);
    double expect = los_gain(s.uav_position(q), s.user_position(j), s.vlc);
    for (int l : ris) {
      expect += s.ris_elements * ur_channel(s, q, l).path_loss *
                rg_channel(s, l, j).path_loss;
    }
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("align_phases is optimal against the phase grid oracle") {
  Scenario s = table1_scenario();
  s.ris_elements = 2;
  const Eigen::Vector2d q(40, 35);
  const int j = 1;
  const std::vector<int> ris = {0};

  const Eigen::MatrixXd aligned = align_phases(s, q, j, ris);
  PhaseMatrix pm = PhaseMatrix::zeros(s.ris_count(), 2);
  pm.theta.row(0) = aligned.row(0);
  Eigen::RowVectorXi row = Eigen::RowVectorXi::Zero(s.ris_count());
  row(0) = 1;
  const double aligned_gain = aggregate_gain(s, q, pm, row, j);

  const auto grid = oracle::grid_phase_search(s, q, {j}, ris, 1.0);
  PhaseMatrix gm = pm;
  gm.theta.row(0) = grid.theta.row(0);
  const double grid_gain = aggregate_gain(s, q, gm, row, j);

  // the closed form is the global optimum; the grid can only quantize it
  CHECK(aligned_gain >= grid_gain * (1.0 - 1e-12));
}

TEST_CASE("build_phi identity") {
  Scenario s = table1_scenario();
  Prng rng(13);
  for (int t = 0; t < 25; ++t) {
    const Eigen::Vector2d q(rng.uniform(0, 100), rng.uniform(0, 100));
    const int l = rng.index(s.ris_count());
    const int j = rng.index(s.user_count());
    Eigen::VectorXd theta(s.ris_elements);
    for (int m = 0; m < s.ris_elements; ++m) theta(m) = rng.uniform(0, kTwoPi);

    const Eigen::VectorXcd phi = build_phi(s, q, l, j);
    std::complex<double> via_phi(0, 0);
    for (int m = 0; m < s.ris_elements; ++m) {
      via_phi += std::conj(std::polar(1.0, -theta(m))) * phi(m);
    }
    const std::complex<double> direct = reflected_term(s, q, theta, l, j);
    CHECK(std::abs(via_phi - direct) <=
          1e-12 * std::max(1.0, std::abs(direct)));
  }

  SUBCASE("zero-phase channels make phi entries the path-loss product") {
    const Eigen::Vector2d q = s.ris_list.col(0);  // overhead: arrival phases zero
    Scenario sym = s;
    sym.users.col(0) << s.ris_list(0, 0), 80.0;   // departure cosine zero
    const Eigen::VectorXcd phi = build_phi(sym, q, 0, 0);
    const double expect =
        ur_channel(sym, q, 0).path_loss * rg_channel(sym, 0, 0).path_loss;
    for (int m = 0; m < sym.ris_elements; ++m) {
      CHECK(std::abs(phi(m) - expect) <= 1e-12 * expect);
    }
  }
  SUBCASE("dark hop gives a zero vector") {
    Scenario narrow = s;
    narrow.vlc.fov = 5.0;
    const Eigen::VectorXcd phi = build_phi(narrow, Eigen::Vector2d(0, 0), 2, 3);
    CHECK(phi.norm() == 0.0);
  }
}

TEST_CASE("lifted cost matrix reproduces the squared gain") {
  Scenario s = table1_scenario();
  s.ris_elements = 2;
  Prng rng(17);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Vector2d q(rng.uniform(0, 100), rng.uniform(0, 100));
    const std::vector<int> users = {0, 2, 4};
    const std::vector<int> ris = {0, 2};
    const SdpInstance inst = build_sdp(s, q, users, ris);
    const int n = inst.dim();

    for (std::size_t ju = 0; ju < users.size(); ++ju) {
      const Eigen::MatrixXcd qm = inst.q_matrix(static_cast<int>(ju));
      CHECK((qm - qm.adjoint()).norm() <= 1e-12 * std::max(1.0, qm.norm()));
      CHECK(std::abs(qm(n - 1, n - 1)) == 0.0);

      // random unit-modulus candidate with homogenization entry one
      Eigen::VectorXcd zhat(n);
      for (int k = 0; k < n - 1; ++k) zhat(k) = std::polar(1.0, rng.uniform(0, kTwoPi));
      zhat(n - 1) = 1.0;
      const double quad =
          std::real(zhat.dot(qm * zhat)) + inst.los_terms[ju] * inst.los_terms[ju];

      std::complex<double> gain(inst.los_terms[ju], 0.0);
      for (std::size_t r = 0; r < ris.size(); ++r) {
        gain += zhat.segment(r * s.ris_elements, s.ris_elements).dot(inst.phi[ju][r]);
      }
      CHECK(quad == doctest::Approx(std::norm(gain)).epsilon(1e-10));
    }
  }

  SUBCASE("single surface and element: two-by-two with the cross term") {
    const Eigen::Vector2d q(30, 30);
    Scenario one = s;
    one.ris_elements = 1;
    const SdpInstance inst = build_sdp(one, q, {0}, {1});
    const Eigen::MatrixXcd qm = inst.q_matrix(0);
    REQUIRE(qm.rows() == 2);
    CHECK(std::abs(qm(0, 1) - inst.los_terms[0] * inst.phi[0][0](0)) <= 1e-18);
  }
  SUBCASE("empty surface set refuses") {
    CHECK_THROWS_AS(build_sdp(s, Eigen::Vector2d(1, 1), {0}, {}), EmptyRisSet);
  }
}

TEST_CASE("relaxation solve") {
  Scenario s = table1_scenario();

  SUBCASE("single user, one surface, one element equals the aligned square") {
    Scenario one = s;
    one.ris_elements = 1;
    const Eigen::Vector2d q(45, 40);
    const int j = 3;
    const SdpInstance inst = build_sdp(one, q, {j}, {1});
    const PsdSolution psd = solve_passive_beamforming(inst);

    PhaseMatrix pm = PhaseMatrix::zeros(one.ris_count(), 1);
    pm.theta.row(1) = align_phases(one, q, j, {1}).row(0);
    Eigen::RowVectorXi row = Eigen::RowVectorXi::Zero(one.ris_count());
    row(1) = 1;
    const double aligned = aggregate_gain(one, q, pm, row, j);
    const double w = inst.weights[0];
    CHECK(psd.objective ==
          doctest::Approx(-w * aligned * aligned).epsilon(1e-6));
  }

  SUBCASE("unit diagonal and PSD within tolerance") {
    const Eigen::Vector2d q(52, 48);
    const SdpInstance inst = build_sdp(s, q, {0, 1, 2}, {0, 1});
    const PsdSolution psd = solve_passive_beamforming(inst);
    for (int k = 0; k < inst.dim(); ++k) {
      CHECK(std::real(psd.z_matrix(k, k)) == doctest::Approx(1.0).epsilon(1e-8));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(psd.z_matrix);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    CHECK(psd.gap <= 1e-6);
  }

  SUBCASE("relaxation lower-bounds every unit-modulus candidate") {
    const Eigen::Vector2d q(52, 48);
    Scenario two = s;
    two.ris_elements = 2;
    const SdpInstance inst = build_sdp(two, q, {1, 4}, {0, 2});
    const PsdSolution psd = solve_passive_beamforming(inst);
    Prng rng(23);
    for (int t = 0; t < 100; ++t) {
      Eigen::VectorXcd z(inst.dim() - 1);
      for (int k = 0; k < z.size(); ++k) z(k) = std::polar(1.0, rng.uniform(0, kTwoPi));
      CHECK(psd.objective <= inst.minmax_objective(z) + 1e-6 * std::abs(psd.objective));
    }
  }
}

TEST_CASE("gaussian randomization") {
  Scenario s = table1_scenario();
  s.ris_elements = 2;
  const Eigen::Vector2d q(52, 48);
  const SdpInstance inst = build_sdp(s, q, {1, 4}, {0, 2});
  const PsdSolution psd = solve_passive_beamforming(inst);

  SUBCASE("achieved objective respects the relaxation bound and improves with trials") {
    double prev = std::numeric_limits<double>::infinity();
    for (int trials : {1, 5, 20, 100}) {
      const RandomizedPhases rp = randomize_rank_one(psd, inst, trials, 99);
      CHECK(rp.objective >= psd.objective - 1e-6 * std::abs(psd.objective));
      CHECK(rp.objective <= prev + 1e-15);
      prev = rp.objective;
      CHECK((rp.theta.array() >= 0.0).all());
      CHECK((rp.theta.array() < kTwoPi).all());
    }
  }

  SUBCASE("rank-one input is recovered exactly") {
    Prng rng(31);
    Eigen::VectorXcd zhat(inst.dim());
    for (int k = 0; k < inst.dim() - 1; ++k)
      zhat(k) = std::polar(1.0, rng.uniform(0, kTwoPi));
    zhat(inst.dim() - 1) = 1.0;
    PsdSolution rank1;
    rank1.z_matrix = zhat * zhat.adjoint();
    rank1.objective = inst.minmax_objective(zhat.head(inst.dim() - 1));
    const RandomizedPhases rp = randomize_rank_one(rank1, inst, 1, 7);
    const Eigen::VectorXcd z = stack_from_theta(rp.theta);
    CHECK((z - zhat.head(inst.dim() - 1)).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(rp.objective == doctest::Approx(rank1.objective).epsilon(1e-6));
  }
}

TEST_CASE("relaxation plus randomization lands near the grid optimum") {
  // two users, one two-element surface: exhaustive 1-degree grid oracle
  Scenario s = table1_scenario();
  s.ris_elements = 2;
  Prng rng(41);
  for (int t = 0; t < 3; ++t) {
    Scenario inst_s = s;
    inst_s.users.col(0) << rng.uniform(20, 80), rng.uniform(20, 80);
    inst_s.users.col(1) << rng.uniform(20, 80), rng.uniform(20, 80);
    const Eigen::Vector2d q(rng.uniform(30, 70), rng.uniform(30, 70));
    const std::vector<int> users = {0, 1};
    const std::vector<int> ris = {0};

    const SdpInstance inst = build_sdp(inst_s, q, users, ris);
    const PsdSolution psd = solve_passive_beamforming(inst);
    const RandomizedPhases rp = randomize_rank_one(psd, inst, 200, 1000 + t);
    const auto grid = oracle::grid_phase_search(inst_s, q, users, ris, 1.0);

    // compare as implied powers (sqrt of the max weighted inverse square)
    const double achieved = std::sqrt(-rp.objective);
    const double reference = std::sqrt(-grid.objective);
    CHECK(achieved >= reference * (1.0 - 2e-2));  // within 2% of the oracle
    CHECK(psd.objective <= grid.objective + 1e-12);
  }
}

TEST_CASE("per-uav dispatch") {
  Scenario s = table1_scenario();
  const Eigen::Vector2d q(50, 50);
  const Eigen::MatrixXd cur = Eigen::MatrixXd::Zero(3, s.ris_elements);
  PhaseOptions opt;

  // single user routes to alignment
  const Eigen::MatrixXd one = optimize_uav_phases(s, q, {2}, {0, 1, 2}, cur, opt, 1);
  CHECK(one.isApprox(align_phases(s, q, 2, {0, 1, 2})));

  // no surfaces: unchanged
  const Eigen::MatrixXd none = optimize_uav_phases(s, q, {0, 1}, {}, cur, opt, 1);
  CHECK(none.isApprox(cur));
}
