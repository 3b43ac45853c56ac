#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "specstat/errors.hpp"
#include "specstat/models.hpp"
#include "specstat/qbasis.hpp"
#include "specstat/spectral.hpp"
#include "specstat/transfer.hpp"

using namespace specstat;

namespace {

const double kPi = std::acos(-1.0);

DisorderSample random_sample(long long first, long long last, std::uint64_t seed,
                             double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(lo, hi);
  DisorderSample s;
  s.first = first;
  s.omegas.resize(static_cast<std::size_t>(last - first + 1));
  for (auto& w : s.omegas) w = uni(gen);
  return s;
}

// Alternating sign flip turning a box eigenvector into a solution of the
// +b recursion.
std::vector<double> flipped_vector(const Spectrum& spec, int which) {
  const int col = spec.column_of(which);
  REQUIRE(col >= 0);
  std::vector<double> w(spec.box.dim);
  for (std::size_t i = 0; i < spec.box.dim; ++i) {
    const long long site = spec.box.first_site + static_cast<long long>(i);
    const double sign = (site % 2 != 0) ? -1.0 : 1.0;
    w[i] = sign * spec.vectors(static_cast<Eigen::Index>(i), col);
  }
  return w;
}

int mid_separated_index(const std::vector<double>& vals) {
  const int n = static_cast<int>(vals.size());
  int best = n / 2;
  double best_gap = -1.0;
  for (int j = n / 3; j < 2 * n / 3 && j + 1 < n; ++j) {
    if (j < 1) continue;
    const double gap = std::min(vals[j] - vals[j - 1], vals[j + 1] - vals[j]);
    if (gap > best_gap) {
      best_gap = gap;
      best = j;
    }
  }
  return best;
}

SampledProfile smooth_profile(double x1, double x2, std::uint64_t seed,
                              double amp = 0.8) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(-amp, amp);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
  const double c0 = uni(gen), c1 = uni(gen), c2 = uni(gen);
  const double p1 = ph(gen), p2 = ph(gen);
  SampledProfile w;
  w.lo = x1;
  w.hi = x2;
  w.val.resize(2001);
  for (std::size_t i = 0; i < w.val.size(); ++i) {
    const double x = x1 + (x2 - x1) * static_cast<double>(i) / 2000.0;
    w.val[i] = c0 + c1 * std::sin(2.0 * kPi * x / (x2 - x1) + p1) +
               c2 * std::sin(4.0 * kPi * x / (x2 - x1) + p2);
  }
  return w;
}

}  // namespace

TEST_CASE("one-step transfer: literal form, determinant, index gates") {
  SUBCASE("unit couplings and zero disorder give the bare companion matrix") {
    const ModelSpec model = ModelSpec::multimer({1.0, 1.0}, {1.0, 1.0});
    DisorderSample s;
    s.first = -2;
    s.omegas.assign(5, 0.0);
    for (double g : {0.0, 0.5, -2.0}) {
      for (int m : {0, 1}) {
        const TransferMatrix p = one_step_transfer(model, s, g, 0, m);
        CHECK(p.m(0, 0) == g);
        CHECK(p.m(0, 1) == -1.0);
        CHECK(p.m(1, 0) == 1.0);
        CHECK(p.m(1, 1) == 0.0);
        CHECK(p.provenance == Provenance::OneStep);
        CHECK(p.energy == g);
      }
    }
  }

  SUBCASE("determinant is the coupling ratio, with its sign") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
      const int N = 2 + rep % 2;
      std::vector<double> a(static_cast<std::size_t>(N));
      std::vector<double> b(static_cast<std::size_t>(N));
      for (auto& v : a) v = 0.2 + uni(gen);
      for (auto& v : b)
        v = (0.3 + 1.2 * uni(gen)) * (uni(gen) < 0.5 ? -1.0 : 1.0);
      const ModelSpec model = ModelSpec::multimer(a, b);
      const DisorderSample s = random_sample(-4, 4, 1000u + rep);
      const long long n = static_cast<long long>(rep % 7) - 3;
      const int m = rep % N;
      const double e = 4.0 * uni(gen) - 2.0;
      const TransferMatrix p = one_step_transfer(model, s, e, n, m);
      const double site_lo = model.b_at(static_cast<long long>(N) * n + m);
      const double site_hi = model.b_at(static_cast<long long>(N) * n + m + 1);
      const double expect = site_lo / site_hi;
      CHECK(p.m.determinant() ==
            doctest::Approx(expect).epsilon(1e-12).scale(1.0));
    }
  }

  SUBCASE("index and family gates") {
    const ModelSpec model = ModelSpec::multimer({1.0, 1.0}, {1.0});
    const DisorderSample s = random_sample(0, 3, 5u);
    CHECK_THROWS_AS((void)one_step_transfer(model, s, 0.0, 0, 2), ConfigError);
    CHECK_THROWS_AS((void)one_step_transfer(model, s, 0.0, 0, -1), ConfigError);
    CHECK_THROWS_AS((void)one_step_transfer(model, s, 0.0, 9, 0), std::out_of_range);
    CHECK_THROWS_AS(
        (void)one_step_transfer(ModelSpec::anderson(1.0), s, 0.0, 0, 0),
        ConfigError);
    CHECK_THROWS_AS((void)n_step_transfer(ModelSpec::anderson(1.0), s, 0.0, 0),
                    ConfigError);
  }
}

TEST_CASE("one-step transfer: propagates eigenvector pairs") {
  const ModelSpec model = ModelSpec::multimer({1.0, 0.7}, {1.0, 0.9});
  const DisorderSample s = random_sample(-1, 9, 91u);
  const BoxOperator op = build_box_operator_sites(model, s, 0, 15);
  const Spectrum spec = eigen_all(op, true);
  const int j = mid_separated_index(spec.values);
  const double e = spec.values[static_cast<std::size_t>(j)];
  const std::vector<double> w = flipped_vector(spec, j);
  double wmax = 0.0;
  for (double v : w) wmax = std::max(wmax, std::abs(v));

  for (long long cell = 1; cell <= 6; ++cell) {
    for (int m = 0; m < 2; ++m) {
      const long long site = 2 * cell + m;
      if (site + 1 > 15) continue;
      const TransferMatrix p = one_step_transfer(model, s, e, cell, m);
      const Eigen::Vector2d in(w[static_cast<std::size_t>(site)],
                               w[static_cast<std::size_t>(site - 1)]);
      const Eigen::Vector2d out = p.m * in;
      CHECK(out(0) == doctest::Approx(w[static_cast<std::size_t>(site + 1)])
                          .epsilon(1e-9)
                          .scale(wmax));
      CHECK(out(1) == doctest::Approx(w[static_cast<std::size_t>(site)])
                          .epsilon(1e-9)
                          .scale(wmax));
    }
  }
}

TEST_CASE("n-step transfer: products, constants, polynomial degree") {
  SUBCASE("free dimer block is minus the identity at E = 0") {
    const ModelSpec model = ModelSpec::multimer({1.0, 1.0}, {1.0, 1.0});
    DisorderSample s;
    s.first = -1;
    s.omegas.assign(3, 0.0);
    const TransferMatrix t = n_step_transfer(model, s, 0.0, 0);
    CHECK(t.m(0, 0) == -1.0);
    CHECK(t.m(1, 1) == -1.0);
    CHECK(t.m(0, 1) == 0.0);
    CHECK(t.m(1, 0) == 0.0);
    CHECK(t.provenance == Provenance::NStep);
  }

  const ModelSpec model = ModelSpec::multimer({1.0, 2.0, 0.5}, {1.0, 0.7, 1.3});
  const DisorderSample s = random_sample(-3, 3, 17u);

  SUBCASE("equals the ordered product of one-step factors") {
    for (long long n : {-2LL, 0LL, 2LL}) {
      const TransferMatrix t = n_step_transfer(model, s, 0.37, n);
      Eigen::Matrix2d acc = Eigen::Matrix2d::Identity();
      for (int m = 0; m < 3; ++m)
        acc = one_step_transfer(model, s, 0.37, n, m).m * acc;
      CHECK((t.m - acc).cwiseAbs().maxCoeff() < 1e-14);
    }
  }

  SUBCASE("determinant is independent of the cell's disorder value") {
    const long long n = 1;
    double dets[3];
    int k = 0;
    for (double omega : {0.0, 0.5, 1.0}) {
      DisorderSample bumped = s;
      bumped.omegas[static_cast<std::size_t>(n - s.first)] = omega;
      dets[k++] = n_step_transfer(model, bumped, 0.8, n).m.determinant();
    }
    CHECK(std::abs(dets[0] - dets[1]) < 1e-12);
    CHECK(std::abs(dets[1] - dets[2]) < 1e-12);
    const double expect = model.b_at(3 * n) / model.b_at(3 * n + 3);
    CHECK(dets[0] == doctest::Approx(expect).epsilon(1e-12));
  }

  SUBCASE("top-left entry is a degree-N polynomial in the disorder value") {
    // A degree-3 Lagrange interpolant through 4 samples must reproduce a 5th.
    const long long n = -1;
    const double e = 1.21;
    std::vector<double> xs{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> ys;
    for (double omega : xs) {
      DisorderSample bumped = s;
      bumped.omegas[static_cast<std::size_t>(n - s.first)] = omega;
      ys.push_back(n_step_transfer(model, bumped, e, n).m(0, 0));
    }
    double predicted = 0.0;
    for (int i = 0; i < 4; ++i) {
      double term = ys[static_cast<std::size_t>(i)];
      for (int k2 = 0; k2 < 4; ++k2) {
        if (k2 == i) continue;
        term *= (xs[4] - xs[static_cast<std::size_t>(k2)]) /
                (xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(k2)]);
      }
      predicted += term;
    }
    double scale = 1.0;
    for (double y : ys) scale = std::max(scale, std::abs(y));
    CHECK(predicted == doctest::Approx(ys[4]).epsilon(1e-8).scale(scale));
  }
}

TEST_CASE("discrete cell transfer: eigenvector coordinates chain exactly") {
  struct Setup {
    std::vector<double> a, b;
    int cells;
  };
  const Setup setups[] = {{{1.0, 0.7}, {1.0, 0.9}, 8},
                          {{1.0, 2.0, 0.5}, {1.0, 0.7, 1.3}, 6}};
  for (const auto& su : setups) {
    const int N = static_cast<int>(su.a.size());
    CAPTURE(N);
    const ModelSpec model = ModelSpec::multimer(su.a, su.b);
    const DisorderSample s = random_sample(-1, su.cells + 1, 107u + N);
    const BoxOperator op =
        build_box_operator_sites(model, s, 0, static_cast<long long>(N) * su.cells - 1);
    const Spectrum spec = eigen_all(op, true);
    const int j = mid_separated_index(spec.values);
    const double e = spec.values[static_cast<std::size_t>(j)];
    const std::vector<double> w = flipped_vector(spec, j);

    const CellBasisSet bases = make_cell_bases(model, s, e, 0, su.cells - 1);
    auto coords = [&](long long cell) {
      const auto& cb = bases.dcells[static_cast<std::size_t>(cell)];
      Eigen::Vector2d rhs(w[static_cast<std::size_t>(N * cell + 1)],
                          w[static_cast<std::size_t>(N * cell)]);
      return Eigen::Vector2d(cb.m_mat.inverse() * rhs);
    };

    double umax = 0.0;
    for (long long c = 0; c < su.cells; ++c) umax = std::max(umax, coords(c).norm());

    for (long long c = 0; c + 1 < su.cells; ++c) {
      const TransferMatrix fw = forward_cell_transfer(bases, c);
      CHECK(fw.provenance == Provenance::NStep);
      const Eigen::Vector2d pred = fw.m * coords(c);
      CHECK((pred - coords(c + 1)).norm() < 1e-9 * std::max(1.0, umax));

      // Transfer through the seam in matrix form as well.
      const auto& here = bases.dcells[static_cast<std::size_t>(c)];
      const auto& next = bases.dcells[static_cast<std::size_t>(c + 1)];
      const Eigen::Vector2d lhs = next.m_mat * coords(c + 1);
      const Eigen::Vector2d rhs =
          cell_connector(bases, c).m * here.n_mat * coords(c);
      CHECK((lhs - rhs).norm() < 1e-9 * std::max(1.0, umax));
    }
    for (long long c = 1; c < su.cells; ++c) {
      const TransferMatrix bw = backward_cell_transfer(bases, c);
      const Eigen::Vector2d pred = bw.m * coords(c);
      CHECK((pred - coords(c - 1)).norm() < 1e-9 * std::max(1.0, umax));
    }
    for (long long c = 0; c + 1 < su.cells; ++c) {
      const Eigen::Matrix2d round_trip =
          backward_cell_transfer(bases, c + 1).m * forward_cell_transfer(bases, c).m;
      CHECK((round_trip - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("continuum cell transfer: free field with a closed-form solution") {
  const ModelSpec model = ModelSpec::simple_continuum();
  DisorderSample s;
  s.first = -7;
  s.omegas.assign(15, 0.0);
  const double e = 0.3;
  const double k = std::sqrt(e);
  const CellBasisSet bases = make_cell_bases(model, s, e, -4, 4);
  CHECK(cell_stride(model) == 1);

  // u solves -u'' = E u everywhere, so its cell coordinates chain exactly.
  auto u = [&](double x) { return std::sin(k * x + 0.687); };
  auto up = [&](double x) { return k * std::cos(k * x + 0.687); };
  auto coords = [&](long long cell) {
    const auto& cb = bases.cells[static_cast<std::size_t>(cell + 4)];
    Eigen::Vector2d rhs(u(cb.anchor), up(cb.anchor));
    return Eigen::Vector2d(cb.anchor_mat.inverse() * rhs);
  };

  for (long long c = -4; c < 4; ++c) {
    const TransferMatrix fw = forward_cell_transfer(bases, c);
    CHECK(fw.provenance == Provenance::ContinuumInterval);
    CHECK((fw.m * coords(c) - coords(c + 1)).norm() < 1e-8);
  }
  for (long long c = -3; c <= 4; ++c) {
    const TransferMatrix bw = backward_cell_transfer(bases, c);
    CHECK((bw.m * coords(c) - coords(c - 1)).norm() < 1e-8);
  }
  for (long long c = -4; c < 4; ++c) {
    const Eigen::Matrix2d round_trip =
        backward_cell_transfer(bases, c + 1).m * forward_cell_transfer(bases, c).m;
    CHECK((round_trip - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("continuum cell transfer: alloy chain against a shot solution") {
  const ModelSpec model = ModelSpec::continuum_alloy(triangular_bump(1), 1);
  const DisorderSample s = sample_disorder(model, 4.0, 4040u);
  const double e = 0.4;
  CHECK(cell_stride(model) == 2);
  const CellBasisSet bases = make_cell_bases(model, s, e, -2, 2);

  // Integrate one true solution across [-3, 3] and record (u, u') at the
  // anchors of the stride-2 chain -2 -> 0 -> 2.
  double y = 0.2, p = 1.0;
  double ua[3], upa[3];
  const int spu = 1024;
  const double h = 1.0 / spu;
  double x = -3.0;
  auto record = [&](double xq) {
    const double* src = nullptr;
    (void)src;
    if (std::abs(xq - (-2.0)) < 1e-12) {
      ua[0] = y;
      upa[0] = p;
    } else if (std::abs(xq) < 1e-12) {
      ua[1] = y;
      upa[1] = p;
    } else if (std::abs(xq - 2.0) < 1e-12) {
      ua[2] = y;
      upa[2] = p;
    }
  };
  record(x);
  for (int i = 0; i < 6 * spu; ++i) {
    const double x0 = -3.0 + static_cast<double>(i) * h;
    const double x1 = -3.0 + static_cast<double>(i + 1) * h;
    const double dt = x1 - x0;
    auto w = [&](double xx) { return evaluate_potential(model, s, xx) - e; };
    const double wa = w(x0), wm = w(x0 + 0.5 * dt), wb = w(x1);
    const double k1y = p, k1p = wa * y;
    const double k2y = p + 0.5 * dt * k1p, k2p = wm * (y + 0.5 * dt * k1y);
    const double k3y = p + 0.5 * dt * k2p, k3p = wm * (y + 0.5 * dt * k2y);
    const double k4y = p + dt * k3p, k4p = wb * (y + dt * k3y);
    y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    p += dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    record(x1);
  }

  auto coords = [&](int slot, long long cell) {
    const auto& cb = bases.cells[static_cast<std::size_t>(cell + 2)];
    REQUIRE(cb.anchor == static_cast<double>(cell));
    Eigen::Vector2d rhs(ua[slot], upa[slot]);
    return Eigen::Vector2d(cb.anchor_mat.inverse() * rhs);
  };
  const Eigen::Vector2d u_m2 = coords(0, -2), u_0 = coords(1, 0), u_p2 = coords(2, 2);

  CHECK((forward_cell_transfer(bases, -2).m * u_m2 - u_0).norm() <
        1e-7 * std::max(1.0, u_0.norm()));
  CHECK((forward_cell_transfer(bases, 0).m * u_0 - u_p2).norm() <
        1e-7 * std::max(1.0, u_p2.norm()));
  CHECK((backward_cell_transfer(bases, 0).m * u_0 - u_m2).norm() <
        1e-7 * std::max(1.0, u_m2.norm()));
  CHECK((backward_cell_transfer(bases, 2).m * u_p2 - u_0).norm() <
        1e-7 * std::max(1.0, u_0.norm()));
  const Eigen::Matrix2d round_trip =
      backward_cell_transfer(bases, 0).m * forward_cell_transfer(bases, -2).m;
  CHECK((round_trip - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-12);

  // Chain endpoints outside the built range are rejected.
  CHECK_THROWS_AS((void)forward_cell_transfer(bases, 2), ConfigError);
  CHECK_THROWS_AS((void)backward_cell_transfer(bases, -2), ConfigError);
}

TEST_CASE("projective angles and the half-turn metric") {
  CHECK(projective_angle(kPi + 0.3).theta == doctest::Approx(0.3).epsilon(1e-13));
  CHECK(projective_angle(-0.2).theta == doctest::Approx(kPi - 0.2).epsilon(1e-13));
  CHECK(projective_angle(0.0).theta == 0.0);
  CHECK(projective_angle(kPi).theta == 0.0);
  CHECK(torus_distance({0.1}, {0.1}) == 0.0);
  CHECK(torus_distance({0.1}, {kPi - 0.1}) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(torus_distance({0.4}, {1.0}) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(torus_distance({1.0}, {0.4}) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("direction map: projective action of 2x2 matrices") {
  std::mt19937_64 gen(2026);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  auto random_matrix = [&]() {
    Eigen::Matrix2d t;
    do {
      t << uni(gen), uni(gen), uni(gen), uni(gen);
    } while (std::abs(t.determinant()) < 0.05);
    return t;
  };

  SUBCASE("identity fixes directions") {
    for (double th : {0.0, 0.3, kPi / 2.0, 2.0, 3.0})
      CHECK(torus_distance(direction_map(Eigen::Matrix2d::Identity().eval(), {th}),
                           {th}) < 1e-14);
  }

  SUBCASE("rotation acts as translation") {
    const double phi = 0.3;
    Eigen::Matrix2d rot;
    rot << std::cos(phi), std::sin(phi), -std::sin(phi), std::cos(phi);
    for (double th : {0.1, 1.0, 2.0, 3.0}) {
      const ProjectiveAngle img = direction_map(rot, {th});
      CHECK(torus_distance(img, projective_angle(th + phi)) < 1e-12);
    }
  }

  SUBCASE("scaling the matrix changes nothing") {
    for (int rep = 0; rep < 20; ++rep) {
      const Eigen::Matrix2d t = random_matrix();
      const double th = uni(gen) + 2.0;
      const double base = direction_map(t, {th}).theta;
      for (double c : {2.0, 0.25, -1.0, -8.0}) {
        const Eigen::Matrix2d scaled = c * t;
        CHECK(direction_map(scaled, {th}).theta == base);
      }
      const Eigen::Matrix2d odd = 3.7 * t;
      CHECK(torus_distance(direction_map(odd, {th}), {base}) < 1e-13);
    }
  }

  SUBCASE("functorial under composition") {
    for (int rep = 0; rep < 40; ++rep) {
      const Eigen::Matrix2d t1 = random_matrix();
      const Eigen::Matrix2d t2 = random_matrix();
      const Eigen::Matrix2d prod = t2 * t1;
      for (int k = 0; k < 16; ++k) {
        const ProjectiveAngle th{kPi * (k + 0.5) / 16.0};
        const ProjectiveAngle direct = direction_map(prod, th);
        const ProjectiveAngle staged = direction_map(t2, direction_map(t1, th));
        CHECK(torus_distance(direct, staged) < 1e-10);
      }
    }
  }

  SUBCASE("vanishing image is an error") {
    Eigen::Matrix2d rank1;
    rank1 << 1.0, 0.0, 0.0, 0.0;
    CHECK_THROWS_AS((void)direction_map(rank1, ProjectiveAngle{0.0}), NumericError);
  }
}

TEST_CASE("angle coordinate change") {
  SUBCASE("identity frame is the identity") {
    for (double th : {0.2, 1.2, 2.9})
      CHECK(torus_distance(
                angle_coordinate_change({th}, Eigen::Matrix2d::Identity().eval()),
                {th}) < 1e-14);
  }

  SUBCASE("anisotropic frame at 45 degrees") {
    Eigen::Matrix2d frame;
    frame << 2.0, 0.0, 0.0, 1.0;
    const ProjectiveAngle out = angle_coordinate_change({kPi / 4.0}, frame);
    CHECK(out.theta == doctest::Approx(std::atan(2.0)).epsilon(1e-14));
  }

  SUBCASE("agrees with the direction map when invertible") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> uni(-1.5, 1.5);
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::Matrix2d frame;
      do {
        frame << uni(gen), uni(gen), uni(gen), uni(gen);
      } while (std::abs(frame.determinant()) < 0.1);
      const ProjectiveAngle th{0.7 + 0.1 * rep};
      CHECK(angle_coordinate_change(th, frame).theta ==
            direction_map(frame, th).theta);
    }
  }

  SUBCASE("singular frame is rejected") {
    Eigen::Matrix2d sing;
    sing << 1.0, 2.0, 0.5, 1.0;
    CHECK_THROWS_AS((void)angle_coordinate_change({0.3}, sing), NumericError);
  }
}

TEST_CASE("direction transport: fundamental matrices of -y'' + W y = 0") {
  SUBCASE("free stretch of length one") {
    SampledProfile zero;
    zero.lo = 0.0;
    zero.hi = 1.0;
    zero.val = {0.0, 0.0};
    const TransferMatrix h = direction_transport(zero, 0.0, 1.0);
    CHECK(h.provenance == Provenance::ContinuumInterval);
    CHECK(h.m(0, 0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(h.m(0, 1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(h.m(1, 0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    CHECK(h.m(1, 1) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(h.m.determinant() - 1.0) < 1e-12);
    // theta = 0 is the direction of (0, 1); its image (1, 1) sits at pi/4.
    CHECK(direction_map(h, {0.0}).theta == doctest::Approx(kPi / 4.0).epsilon(1e-12));
  }

  SUBCASE("constant negative W has trigonometric columns") {
    const double k = 1.3, len = 1.2;
    SampledProfile w;
    w.lo = 0.0;
    w.hi = len;
    w.val = {-k * k, -k * k};
    const TransferMatrix h = direction_transport(w, 0.0, len);
    CHECK(h.m(0, 0) == doctest::Approx(std::cos(k * len)).epsilon(1e-9));
    CHECK(h.m(0, 1) == doctest::Approx(std::sin(k * len) / k).epsilon(1e-9));
    CHECK(h.m(1, 0) == doctest::Approx(-k * std::sin(k * len)).epsilon(1e-9));
    CHECK(h.m(1, 1) == doctest::Approx(std::cos(k * len)).epsilon(1e-9));
  }

  SUBCASE("stiff constant W refines and stays unimodular") {
    SampledProfile w;
    w.lo = 0.0;
    w.hi = 1.0;
    w.val = {20.0, 20.0};
    const TransferMatrix h = direction_transport(w, 0.0, 1.0);
    const double r = std::sqrt(20.0);
    CHECK(h.m(0, 0) ==
          doctest::Approx(std::cosh(r)).epsilon(1e-7));
    CHECK(std::abs(h.m.determinant() - 1.0) < 1e-10);
  }

  SUBCASE("unimodular across 50 random smooth potentials") {
    for (int rep = 0; rep < 50; ++rep) {
      const double x1 = -0.3, x2 = x1 + 0.8 + 0.01 * rep;
      const SampledProfile w = smooth_profile(x1, x2, 9000u + rep, 1.5);
      const TransferMatrix h = direction_transport(w, x1, x2);
      CHECK(std::abs(h.m.determinant() - 1.0) < 1e-10);
    }
  }

  SUBCASE("small potential perturbations move directions Lipschitz-ly") {
    // The Lipschitz constant was measured on this deterministic family
    // (worst ratio 3.87) and frozen with margin; a 1e-4 sup-norm change
    // must keep every sampled direction within C * 1e-4.
    const double kFrozenC = 8.0;
    double worst_ratio = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      const double x1 = 0.0, x2 = 1.4;
      SampledProfile w = smooth_profile(x1, x2, 777u + rep, 1.2);
      SampledProfile wp = w;
      for (auto& v : wp.val) v += 1e-4;
      const TransferMatrix h = direction_transport(w, x1, x2);
      const TransferMatrix hp = direction_transport(wp, x1, x2);
      for (int k = 0; k < 32; ++k) {
        const ProjectiveAngle th{kPi * (k + 0.5) / 32.0};
        const double shift =
            torus_distance(direction_map(h, th), direction_map(hp, th));
        worst_ratio = std::max(worst_ratio, shift / 1e-4);
      }
    }
    CAPTURE(worst_ratio);
    CHECK(worst_ratio < kFrozenC);
  }

  SUBCASE("input gates") {
    SampledProfile w;
    w.lo = 0.0;
    w.hi = 1.0;
    w.val = {0.0, 0.0};
    CHECK_THROWS_AS((void)direction_transport(w, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS((void)direction_transport(w, 0.5, 0.5), ConfigError);
    SampledProfile short_table;
    short_table.lo = 0.0;
    short_table.hi = 1.0;
    short_table.val = {1.0};
    CHECK_THROWS_AS((void)direction_transport(short_table, 0.0, 1.0), ConfigError);
  }
}
