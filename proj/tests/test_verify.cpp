#include "hklapse/verify.hpp"

#include "hklapse/integrator.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <variant>

using namespace hklapse;

namespace {

Mat row2(double a, double b) {
  Mat x(1, 2);
  x << a, b;
  return x;
}

WfCertificate unit_cert(double horizon, double tau = 0.0) {
  return std::get<WfCertificate>(certify_wf(WeightSpec::ConstantOne(), 1.0, 1.0, horizon, tau));
}

BoundSet analytic_bounds(const Trajectory& traj, const WfCertificate& cert) {
  BoundSet b = constants_undelayed(1.0, cert.T, 1.0, cert.alpha_bar);
  b.M0 = 1.0;
  b.d0 = diameter(traj.state_at(static_cast<std::size_t>(traj.delay_nodes())));
  return b;
}

Trajectory analytic_run(double t_end, double h = 1e-3) {
  SimOptions opt;
  opt.h = h;
  opt.t_end = t_end;
  return simulate_undelayed(row2(0.0, 1.0), InfluenceSpec::Constant(1.0),
                            WeightSpec::ConstantOne(), opt);
}

}  // namespace

TEST_CASE("decay bound holds on the analytic two-agent instance") {
  // analytic cross-check first: 2t >= gamma (t - 1) for all t >= 0 when gamma ~ 0.4587
  const double gamma = std::log(1.0 / (1.0 - std::exp(-1.0)));
  for (double t = 0.0; t <= 8.0; t += 0.01)
    CHECK(oracles::two_agent_diameter(t) <= std::exp(-gamma * (t - 1.0)) + 1e-12);

  const Trajectory traj = analytic_run(5.0);
  const WfCertificate cert = unit_cert(8.0);
  const CheckRecord rec = check_decay_bound(traj, analytic_bounds(traj, cert), cert);
  CHECK(rec.pass);
  CHECK(rec.worst_margin >= 0.0);
}

TEST_CASE("equal initial opinions: zero diameter, everything passes") {
  SimOptions opt;
  opt.h = 0.01;
  opt.t_end = 3.0;
  opt.stop_at_consensus = false;
  Mat x0(2, 4);
  x0.setConstant(1.5);
  const Trajectory traj =
      simulate_undelayed(x0, InfluenceSpec::Constant(1.0), WeightSpec::ConstantOne(), opt);
  const WfCertificate cert = unit_cert(6.0);
  BoundSet b = constants_undelayed(1.0, cert.T, 1.0, cert.alpha_bar);
  b.M0 = compute_M0(x0);
  b.d0 = 0.0;
  const VerificationReport rep = verify_trajectory(traj, b, cert);
  CHECK(rep.pass);
  const CheckRecord* decay = rep.find("decay_bound");
  REQUIRE(decay != nullptr);
  CHECK(decay->worst_margin == 0.0);  // margin equals the bound value, identically 0
}

TEST_CASE("interval contraction on the analytic instance has a large margin") {
  const Trajectory traj = analytic_run(5.0, 0.005);
  const WfCertificate cert = unit_cert(8.0);
  const BoundSet b = analytic_bounds(traj, cert);
  // d(t_n) = e^{-2n}: consecutive ratio e^{-2} ~ 0.1353 well below C ~ 0.632
  const auto records = check_interval_contraction(traj, cert, b);
  for (const auto& r : records) CHECK(r.pass);
  const PartitionSeries s = partition_series(traj, cert, Regime::undelayed);
  for (std::size_t n = 0; n < s.t.size(); ++n)
    CHECK(s.d_at[n] == doctest::Approx(std::exp(-2.0 * s.t[n])).epsilon(1e-9));
}

TEST_CASE("adversarial: tripled decay rate must fail at large t") {
  // e^{-2t} <= e^{-2.5(t-1)} iff t <= 5: a horizon of 8 exposes the crossing
  const Trajectory traj = analytic_run(8.0, 0.002);
  const WfCertificate cert = unit_cert(10.0);
  BoundSet b = analytic_bounds(traj, cert);
  b.gamma = 2.5;
  const CheckRecord rec = check_decay_bound(traj, b, cert);
  CHECK_FALSE(rec.pass);
  CHECK(rec.location > 5.0);  // worst margin sits beyond the crossing
}

TEST_CASE("window recursion and delayed contraction on a delayed instance") {
  SimOptions opt;
  opt.h = 0.01;
  opt.t_end = 10.0;
  opt.stop_at_consensus = false;
  const double tau = 1.0;
  const Trajectory traj = simulate(HistorySpec::Constant(row2(0.0, 1.0)),
                                   InfluenceSpec::Constant(1.0), WeightSpec::ConstantOne(), tau,
                                   opt);
  const WfCertificate cert = unit_cert(12.0, tau);
  BoundSet b = constants_delayed(1.0, cert.T, tau, 1.0, cert.alpha_bar);
  b.M0 = 1.0;
  b.d0 = window_diameter(traj, -tau, 0.0);
  const VerificationReport rep = verify_trajectory(traj, b, cert);
  for (const auto& c : rep.checks) CHECK(c.pass);
  REQUIRE(rep.find("window_recursion") != nullptr);
  REQUIRE(rep.find("window_contraction") != nullptr);

  // tau = 0 in the delayed regime reduces the recursion to monotonicity:
  // margins of the two checks then agree up to the shared endpoints
  const Trajectory und = analytic_run(5.0, 0.005);
  const WfCertificate cert0 = unit_cert(8.0);
  BoundSet b0 = constants_delayed(1.0, cert0.T, 0.0, 1.0, cert0.alpha_bar);
  b0.M0 = 1.0;
  b0.d0 = diameter(und.state_at(0));
  const CheckRecord rec = check_window_recursion(und, cert0, b0);
  CHECK(rec.pass);
}

TEST_CASE("window recursion rejects the undelayed regime") {
  const Trajectory traj = analytic_run(3.0, 0.01);
  const WfCertificate cert = unit_cert(5.0);
  const BoundSet b = analytic_bounds(traj, cert);
  CHECK_THROWS_AS(check_window_recursion(traj, cert, b), std::invalid_argument);
}

TEST_CASE("adversarial: an escaping agent breaks hull confinement") {
  const auto x = [](double t) {
    Mat s(1, 2);
    s << (t > 0.0 ? t : 0.0), 0.0;
    return s;
  };
  const auto dx = [](double t) {
    Mat s(1, 2);
    s << (t > 0.0 ? 1.0 : 0.0), 0.0;
    return s;
  };
  const Trajectory traj = Trajectory::from_callable(x, dx, 0.05, 0.0, 5.0);
  const WfCertificate cert = unit_cert(6.0);
  BoundSet b = constants_undelayed(1.0, cert.T, 1.0, cert.alpha_bar);
  b.M0 = 0.0;  // the history maximum: both agents start at 0
  b.d0 = 0.0;
  const VerificationReport rep = verify_trajectory(traj, b, cert);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.find("hull_confinement")->pass);
  CHECK_FALSE(rep.find("uniform_bound")->pass);
  CHECK_FALSE(rep.find("monotone_diameters")->pass);
  CHECK_FALSE(rep.find("interval_contraction")->pass);
  CHECK_FALSE(rep.find("suffix_diameter")->pass);
}

TEST_CASE("adversarial: expanding windows break the recursion check") {
  const auto x = [](double t) {
    Mat s(1, 2);
    s << t, -t;
    return s;
  };
  const auto dx = [](double) {
    Mat s(1, 2);
    s << 1.0, -1.0;
    return s;
  };
  const Trajectory traj = Trajectory::from_callable(x, dx, 0.05, 0.5, 6.0);
  const WfCertificate cert = unit_cert(8.0, 0.5);
  BoundSet b = constants_delayed(1.0, cert.T, 0.5, 1.0, cert.alpha_bar);
  b.M0 = 0.5;
  b.d0 = window_diameter(traj, -0.5, 0.0);
  const CheckRecord rec = check_window_recursion(traj, cert, b);
  CHECK_FALSE(rec.pass);
  bool window_contraction_failed = false;
  for (const auto& r : check_interval_contraction(traj, cert, b))
    if (r.name == "window_contraction") window_contraction_failed = !r.pass;
  CHECK(window_contraction_failed);
}

TEST_CASE("reports are deterministic") {
  SimOptions opt;
  opt.h = 0.02;
  opt.t_end = 4.0;
  Rng rng(5150);
  Mat x0(2, 5);
  for (int i = 0; i < 5; ++i)
    for (int k = 0; k < 2; ++k) x0(k, i) = rng.uniform(-1.0, 1.0);
  const Trajectory traj =
      simulate_undelayed(x0, InfluenceSpec::RadialPower(1.0, 1.0), WeightSpec::ConstantOne(), opt);
  const WfCertificate cert = unit_cert(6.0);
  const double M0 = compute_M0(x0);
  BoundSet b = constants_undelayed(1.0, cert.T, compute_psi0(InfluenceSpec::RadialPower(1.0, 1.0), M0).value,
                                   cert.alpha_bar);
  b.M0 = M0;
  b.d0 = diameter(x0);
  const VerificationReport r1 = verify_trajectory(traj, b, cert);
  const VerificationReport r2 = verify_trajectory(traj, b, cert);
  REQUIRE(r1.checks.size() == r2.checks.size());
  for (std::size_t i = 0; i < r1.checks.size(); ++i) {
    CHECK(r1.checks[i].worst_margin == r2.checks[i].worst_margin);  // bit-identical
    CHECK(r1.checks[i].location == r2.checks[i].location);
    CHECK(r1.checks[i].pass == r2.checks[i].pass);
  }
  CHECK(r1.pass);
}

TEST_CASE("suffix diameters are exact on a synthetic cloud") {
  const auto x = [](double t) {
    Mat s(2, 3);
    s << std::cos(t), 0.5 * std::cos(2.0 * t), 0.0,
         std::sin(t), 0.5 * std::sin(2.0 * t), 0.0;
    return s;
  };
  const auto dx = [](double t) {
    Mat s(2, 3);
    s << -std::sin(t), -std::sin(2.0 * t), 0.0,
          std::cos(t),  std::cos(2.0 * t), 0.0;
    return s;
  };
  const Trajectory traj = Trajectory::from_callable(x, dx, 0.05, 0.0, 4.0);
  const std::vector<double> anchors{0.0, 1.0, 2.5};
  const std::vector<double> fast = suffix_diameters(traj, anchors);
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    double brute = 0.0;
    for (std::size_t k = traj.node_after(anchors[a]); k < traj.nodes(); ++k)
      for (int i = 0; i < traj.agents(); ++i)
        for (std::size_t k2 = traj.node_after(anchors[a]); k2 < traj.nodes(); ++k2)
          for (int i2 = 0; i2 < traj.agents(); ++i2)
            brute = std::max(
                brute, (traj.state_at(k).col(i) - traj.state_at(k2).col(i2)).norm());
    CHECK(fast[a] == doctest::Approx(brute).epsilon(1e-13));
  }
}
