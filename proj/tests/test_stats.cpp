#include "gsc/stats.hpp"

#include <vector>

#include "doctest.h"
#include "gsc/errors.hpp"

using namespace gsc;
namespace st = gsc::stats;

// Reference values frozen from an independent implementation.

TEST_CASE("regularized incomplete beta") {
  CHECK(st::regularized_beta(0.5, 0.5, 0.25) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(st::regularized_beta(2, 3, 0.4) == doctest::Approx(0.5248).epsilon(1e-12));
  CHECK(st::regularized_beta(1.5, 0.5, 0.9) ==
        doctest::Approx(0.6041813035905921).epsilon(1e-12));
  CHECK(st::regularized_beta(10, 10, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(st::regularized_beta(5, 2, 0.8) == doctest::Approx(0.65536).epsilon(1e-12));
  CHECK(st::regularized_beta(2, 3, 0.0) == 0.0);
  CHECK(st::regularized_beta(2, 3, 1.0) == 1.0);
  CHECK_THROWS_AS(st::regularized_beta(-1, 1, 0.5), ValidationError);
  CHECK_THROWS_AS(st::regularized_beta(1, 1, 1.5), ValidationError);
}

TEST_CASE("regularized incomplete gamma") {
  CHECK(st::regularized_gamma_p(0.5, 0.5) ==
        doctest::Approx(0.6826894921370859).epsilon(1e-12));
  CHECK(st::regularized_gamma_q(0.5, 0.5) ==
        doctest::Approx(0.31731050786291115).epsilon(1e-12));
  CHECK(st::regularized_gamma_p(2, 1) == doctest::Approx(0.2642411176571153).epsilon(1e-12));
  CHECK(st::regularized_gamma_p(3, 5) == doctest::Approx(0.8753479805169189).epsilon(1e-12));
  CHECK(st::regularized_gamma_q(10, 3) == doctest::Approx(0.9988975118698845).epsilon(1e-12));
  CHECK(st::regularized_gamma_p(1, 0) == 0.0);
  CHECK(st::regularized_gamma_q(1, 0) == 1.0);
  CHECK_THROWS_AS(st::regularized_gamma_p(0, 1), ValidationError);
}

TEST_CASE("Student-t two-sided p-values") {
  CHECK(st::student_t_two_sided_p(3.383, 3) ==
        doctest::Approx(0.042996102372200265).epsilon(1e-10));
  CHECK(st::student_t_two_sided_p(3.2191, 3) ==
        doctest::Approx(0.048617592996223195).epsilon(1e-10));
  CHECK(st::student_t_two_sided_p(1.4996, 2) ==
        doctest::Approx(0.2724844517589695).epsilon(1e-10));
  CHECK(st::student_t_two_sided_p(2.0, 5) ==
        doctest::Approx(0.10193947882985828).epsilon(1e-10));
  CHECK(st::student_t_two_sided_p(1.0, 10) ==
        doctest::Approx(0.3408931323020601).epsilon(1e-10));
  CHECK(st::student_t_two_sided_p(6.4546, 3) ==
        doctest::Approx(0.007543152108336697).epsilon(1e-10));
  CHECK(st::student_t_two_sided_p(12.706, 1) ==
        doctest::Approx(0.05000080235813317).epsilon(1e-10));
  // symmetry and limits
  CHECK(st::student_t_two_sided_p(-2.0, 5) == st::student_t_two_sided_p(2.0, 5));
  CHECK(st::student_t_two_sided_p(0.0, 5) == 1.0);
  CHECK_THROWS_AS(st::student_t_two_sided_p(1.0, 0), ValidationError);
}

TEST_CASE("chi-square survival function") {
  CHECK(st::chi_square_sf(7.815, 3) == doctest::Approx(0.049993902974883875).epsilon(1e-10));
  CHECK(st::chi_square_sf(2.0, 5) == doctest::Approx(0.8491450360846096).epsilon(1e-10));
  CHECK(st::chi_square_sf(0.0, 3) == 1.0);
}

TEST_CASE("aggregates") {
  const std::vector<double> odd = {5.0, 1.0, 3.0};
  const std::vector<double> even = {4.0, 1.0, 3.0, 2.0};
  CHECK(st::mean(odd) == 3.0);
  CHECK(st::median(odd) == 3.0);
  CHECK(st::median(even) == 2.5);
  CHECK(st::sample_stddev(even) == doctest::Approx(1.2909944487358056).epsilon(1e-12));
  CHECK(st::sample_stddev(std::vector<double>{7.0}) == 0.0);
  CHECK_THROWS_AS(st::mean(std::vector<double>{}), ValidationError);
  CHECK_THROWS_AS(st::median(std::vector<double>{}), ValidationError);
}

TEST_CASE("correlation with ties") {
  const std::vector<double> x = {1.0, 2.0, 2.0, 3.0, 5.0, 4.0};
  const std::vector<double> y = {10.0, 9.0, 7.0, 7.0, 2.0, 1.0};
  CHECK(st::pearson_r(x, y) == doctest::Approx(-0.9210951577295148).epsilon(1e-12));
  CHECK(st::spearman_rho(x, y) == doctest::Approx(-0.8970588235294118).epsilon(1e-12));

  const std::vector<double> up = {1.0, 2.0, 3.0};
  const std::vector<double> down = {9.0, 5.0, 1.0};
  CHECK(st::spearman_rho(up, up) == doctest::Approx(1.0));
  CHECK(st::spearman_rho(up, down) == doctest::Approx(-1.0));
  const std::vector<double> flat = {2.0, 2.0, 2.0};
  CHECK_THROWS_AS(st::spearman_rho(up, flat), DegeneracyError);
  CHECK_THROWS_AS(st::pearson_r(up, std::vector<double>{1.0}), ValidationError);
}
