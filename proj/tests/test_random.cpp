#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "smbm/parallel.hpp"
#include "smbm/random.hpp"

using namespace smbm;

TEST_SUITE("random") {
  TEST_CASE("derived streams are reproducible and distinct") {
    Rng a = derive_stream(42, 3);
    Rng b = derive_stream(42, 3);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());

    std::set<std::uint64_t> firsts;
    for (std::uint64_t idx = 0; idx < 1000; ++idx) firsts.insert(derive_stream(42, idx)());
    CHECK(firsts.size() == 1000);
    CHECK(derive_seed(1, 2, 0) != derive_seed(1, 2, 1));
    CHECK(derive_seed(1, 2, 0) != derive_seed(2, 2, 0));
  }

  TEST_CASE("uniform01 lies in [0, 1) with the right mean") {
    Rng rng = derive_stream(7, 0);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double u = uniform01(rng);
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      sum += u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.005));
  }

  TEST_CASE("standard_normal moments") {
    Rng rng = derive_stream(11, 0);
    const int n = 400000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
      const double z = standard_normal(rng);
      s1 += z;
      s2 += z * z;
      s4 += z * z * z * z;
    }
    CHECK(std::abs(s1 / n) < 0.01);
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
    CHECK(s4 / n == doctest::Approx(3.0).epsilon(0.03));
  }

  TEST_CASE("parallel_for fills every slot and rethrows") {
    std::vector<int> out(257, 0);
    parallel_for(out.size(), 4, [&](std::size_t i) { out[i] = int(i) * 2; });
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == int(i) * 2);

    CHECK_THROWS_AS(parallel_for(10, 3,
                                 [](std::size_t i) {
                                   if (i == 5) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
  }
}
