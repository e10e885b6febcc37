#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "parking/oracle.hpp"
#include "parking/rates.hpp"

using namespace parking;
using namespace parking::oracle;

namespace {

using Pattern = std::vector<SiteState>;

Pattern pat(std::initializer_list<int> codes) {
  Pattern p;
  for (int c : codes) p.emplace_back(c);
  return p;
}

int differing_sites(Config a, Config b, std::size_t n) {
  int diff = 0;
  for (std::size_t k = 0; k < n; ++k) diff += site_of(a, k) != site_of(b, k);
  return diff;
}

}  // namespace

TEST_CASE("generator on the 3-ring") {
  const auto gen = build_generator(ModelVariant::NoScreening, 3);
  CHECK(gen.dimension() == 64);
  CHECK(gen.targets(0).size() == 3);
  for (Config t : gen.targets(0)) CHECK(differing_sites(0, t, 3) == 1);

  // (1,0,0): second-line parking at sites 1 and 2, or on top of site 0
  const Config c = encode(pat({1, 0, 0}));
  const auto targets = gen.targets(c);
  REQUIRE(targets.size() == 3);
  std::vector<Config> expected = {encode(pat({1, 2, 0})), encode(pat({1, 0, 2})),
                                  encode(pat({3, 0, 0}))};
  std::vector<Config> got(targets.begin(), targets.end());
  std::sort(got.begin(), got.end());
  std::sort(expected.begin(), expected.end());
  CHECK(got == expected);
}

TEST_CASE("generator rows are consistent with the rate table") {
  for (ModelVariant m : kAllVariants) {
    for (std::size_t n : {3U, 5U}) {
      const auto gen = build_generator(m, n);
      for (Config c = 0; c < gen.dimension(); ++c) {
        CHECK(gen.row_sum(c) == 0.0);
        for (Config t : gen.targets(c)) {
          REQUIRE(differing_sites(c, t, n) == 1);
          std::size_t k = 0;
          while (site_of(c, k) == site_of(t, k)) ++k;
          const NeighborhoodTriple triple{site_of(c, (k + n - 1) % n), site_of(c, k),
                                          site_of(c, (k + 1) % n)};
          CHECK(transition_rate(m, site_of(t, k), triple) == 1);
        }
      }
    }
  }
}

TEST_CASE("size bounds") {
  CHECK_THROWS_AS(build_generator(ModelVariant::NoScreening, 2), std::invalid_argument);
  CHECK_THROWS_AS(build_generator(ModelVariant::NoScreening, 9), std::invalid_argument);
  CHECK_NOTHROW(build_generator(ModelVariant::Screening, 8));
}

TEST_CASE("evolution from the vacuum") {
  const auto gen = build_generator(ModelVariant::NoScreening, 4);
  const auto at0 = evolve(gen, 0.0);
  CHECK(at0[0] == 1.0);
  CHECK(at0.total() == 1.0);
  CHECK(marginal(at0, pat({0, 0, 0})) == 1.0);
}

TEST_CASE("the 3-ring jams with exactly one first-line car") {
  for (ModelVariant m : kAllVariants) {
    const auto gen = build_generator(m, 3);
    const auto dist = evolve(gen, 40.0);
    double one_car = 0.0;
    for (Config c = 0; c < gen.dimension(); ++c) {
      int first = 0;
      for (std::size_t k = 0; k < 3; ++k) first += site_of(c, k).first_line();
      if (first == 1) one_car += dist[c];
    }
    CHECK(one_car == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(jammed_mass(gen, dist) > 1.0 - 1e-8);
  }
}

TEST_CASE("conservation, positivity and absorption on larger rings") {
  for (ModelVariant m : kAllVariants) {
    for (std::size_t n : {6U, 8U}) {
      const auto gen = build_generator(m, n);
      const std::array<double, 4> times = {0.5, 2.0, 10.0, 50.0};
      const auto dists = evolve(gen, times);
      for (const auto& d : dists) {
        CHECK(std::abs(d.total() - 1.0) < 1e-12);
        CHECK(d.min_entry() > -1e-12);
      }
      CHECK(jammed_mass(gen, dists.back()) > 1.0 - 1e-8);
    }
  }
}

TEST_CASE("marginals match an independent matrix-exponential solution") {
  // tests/reference/oracle_expm.py, N = 6: D0 D1 D2 D3 D(0,1,0) D(0,0,0) D(1,0,1)
  struct Row {
    ModelVariant model;
    double t;
    std::array<double, 7> values;
  };
  const Row rows[] = {
      {ModelVariant::NoScreening, 0.5, {0.627739258577901, 0.222534110978394, 0.0998132882502283, 0.0499133421934753, 0.117133099232404, 0.229883919522389, 0.0411425625778688}},
      {ModelVariant::NoScreening, 1.0, {0.449515954635549, 0.264262620899928, 0.190734365506633, 0.0954870589578872, 0.0659796369967007, 0.0599602114196157, 0.0390755804469543}},
      {ModelVariant::NoScreening, 2.0, {0.320282275980711, 0.284049864257207, 0.262891306577254, 0.132776553184824, 0.0196153265132941, 0.00740496480759997, 0.0179048405107136}},
      {ModelVariant::NoScreening, 5.0, {0.263147529158519, 0.290004921600952, 0.293755683775149, 0.15309186546538, 0.00150206629875305, 0.000242979627062869, 0.00105527261348892}},
      {ModelVariant::Screening, 0.5, {0.63988578819328, 0.211369720192857, 0.0987006298286897, 0.0500438617851726, 0.118106228768098, 0.236212457536196, 0.0381084457857122}},
      {ModelVariant::Screening, 1.0, {0.486178900173827, 0.231408200101563, 0.185632970766034, 0.0967799289585718, 0.0696502596928295, 0.0696502596928291, 0.0300508102150763}},
      {ModelVariant::Screening, 2.0, {0.390385321435205, 0.220183539937555, 0.250312032776039, 0.139119105851196, 0.0250900692138818, 0.0125450346069409, 0.00905078515936597}},
      {ModelVariant::Screening, 5.0, {0.354590383075075, 0.201120656498296, 0.27555146081831, 0.168737499608319, 0.00256231758974302, 0.000512463517948603, 0.000362258608087795}},
  };
  const Pattern patterns[] = {pat({0}), pat({1}), pat({2}), pat({3}),
                              pat({0, 1, 0}), pat({0, 0, 0}), pat({1, 0, 1})};
  for (const Row& row : rows) {
    const auto dist = evolve(build_generator(row.model, 6), row.t);
    for (std::size_t i = 0; i < 7; ++i) {
      CAPTURE(row.t);
      CAPTURE(i);
      CHECK(std::abs(marginal(dist, patterns[i]) - row.values[i]) < 1e-9);
    }
  }
}

TEST_CASE("symmetries of the marginals") {
  const Pattern probes[] = {pat({1}), pat({0, 1, 0}), pat({1, 0, 2}), pat({2, 0, 1}),
                            pat({0, 3, 0, 1}), pat({1, 0}), pat({2, 1})};
  for (ModelVariant m : kAllVariants) {
    const auto gen = build_generator(m, 7);
    const auto dist = evolve(gen, 1.5);
    double total = 0.0;
    for (int s = 0; s < 4; ++s) total += marginal(dist, pat({s}));
    CHECK(std::abs(total - 1.0) < 1e-12);
    for (const Pattern& p : probes) {
      const double base = marginal(dist, p);
      for (std::size_t offset = 1; offset < 7; ++offset) {
        CHECK(std::abs(marginal(dist, p, offset) - base) < 1e-12);
      }
      const Pattern reversed(p.rbegin(), p.rend());
      CHECK(std::abs(marginal(dist, reversed) - base) < 1e-12);
    }
  }
}

TEST_CASE("marginal pattern bounds") {
  const auto dist = FullDistribution::vacuum(3);
  CHECK_THROWS_AS(marginal(dist, pat({0, 0, 0, 0})), std::invalid_argument);
  CHECK_THROWS_AS(marginal(dist, Pattern{}), std::invalid_argument);
}

TEST_CASE("encoding") {
  const Pattern p = pat({3, 0, 2, 1});
  const Config c = encode(p);
  for (std::size_t k = 0; k < p.size(); ++k) CHECK(site_of(c, k) == p[k]);
  CHECK(with_site(c, 1, SiteState(1)) == encode(pat({3, 1, 2, 1})));
}
