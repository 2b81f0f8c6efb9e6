#include <doctest.h>

#include <cmath>
#include <vector>

#include "auvhunt/acoustics.hpp"
#include "auvhunt/covert.hpp"

using namespace auvhunt;
using namespace auvhunt::covert;

namespace {

double default_noise() { return acoustics::ambient_noise_watts({}, 1e-9); }

}  // namespace

TEST_CASE("snr_beta examples") {
  CHECK(snr_beta(0.1, 1.0, 0.2) == doctest::Approx(0.5));
  CHECK(snr_beta(0.1, 1e300, 0.2) < 1e-299);
  CHECK(std::abs(snr_beta(0.1, 4.093, 0.2) - 0.12216) < 1e-4);
  CHECK_THROWS_AS(snr_beta(0.1, 0.0, 0.2), ValidationError);
  CHECK_THROWS_AS(snr_beta(0.1, 1.0, -0.2), ValidationError);
}

TEST_CASE("optimal threshold") {
  CHECK(std::abs(optimal_threshold(0.2, 1.0) - 0.27726) < 1e-5);
  CHECK(optimal_threshold(0.2, 1e-9) == doctest::Approx(0.2));
  for (double b = 1e-4; b < 100.0; b *= 1.1) {
    const double a = optimal_threshold(0.2, b);
    CHECK(a > 0.2);
    CHECK(a < 0.2 * (1.0 + b));
  }
  CHECK_THROWS_AS(optimal_threshold(0.2, 0.0), ValidationError);
}

TEST_CASE("kl budget") {
  CHECK(kl_budget(0.0, 100) == 0.0);
  CHECK(std::abs(kl_budget(1.0, 100) - 50.0 * (std::log(2.0) - 0.5)) < 1e-12);
  CHECK(std::abs(kl_budget(1.0, 100) - 9.6574) < 1e-4);
  CHECK(kl_budget(0.01, 100) == doctest::Approx(25.0 * 0.01 * 0.01).epsilon(0.05));
  double prev = 0.0;
  for (double b = 1e-7; b < 1e3; b *= 1.05) {
    const double k = kl_budget(b, 100);
    CHECK(k > prev);
    prev = k;
  }
  // Series branch joins the closed form without a jump.
  const double below = kl_budget(0.99999e-4, 100);
  const double above = kl_budget(1.00001e-4, 100);
  CHECK(std::abs(above - below) / above < 1e-3);
}

TEST_CASE("is_covert boundary") {
  CHECK(is_covert(0.0, 0.01));
  CHECK(is_covert(0.0031, 0.04));
  CHECK_FALSE(is_covert(0.0033, 0.04));
  CHECK(is_covert(2.0 * 0.04 * 0.04, 0.04));
}

TEST_CASE("evaluate_link snapshot is self-consistent") {
  const CovertParams cp;
  const acoustics::ChannelParams ch;
  for (double d = 0.0; d < 20000.0; d += 250.0) {
    const auto s = evaluate_link(d, cp, ch, default_noise());
    CHECK(s.consistent(cp.epsilon));
    CHECK(s.beta >= 0.0);
    CHECK(s.kl >= 0.0);
    CHECK(s.noise_total_w == doctest::Approx(0.2 + default_noise()));
  }
}

TEST_CASE("kl decreases with distance") {
  const CovertParams cp;
  const acoustics::ChannelParams ch;
  double prev = INFINITY;
  for (double d = 1.0; d < 20000.0; d *= 1.05) {
    const double k = evaluate_link(d, cp, ch, default_noise()).kl;
    CHECK(k < prev);
    prev = k;
  }
}

TEST_CASE("min covert distance agrees with a dense grid scan") {
  const CovertParams cp;
  const acoustics::ChannelParams ch;
  const double max_d = 10000.0;
  const double dstar = min_covert_distance(cp, ch, default_noise(), max_d);
  // Regression value for the default parameters.
  CHECK(std::abs(dstar - 1950.0) < 50.0);
  const int n = 10000;
  const double cell = max_d / n;
  double first = -1.0;
  for (int i = 1; i <= n; ++i) {
    const double d = i * cell;
    if (evaluate_link(d, cp, ch, default_noise(), 0.0).covert_ok) {
      first = d;
      break;
    }
  }
  CHECK(std::abs(first - dstar) <= cell);
  CHECK_FALSE(evaluate_link(dstar - 1.0, cp, ch, default_noise()).covert_ok);
  CHECK(evaluate_link(dstar, cp, ch, default_noise()).covert_ok);
}

TEST_CASE("min covert distance edge cases") {
  const acoustics::ChannelParams ch;
  CovertParams quiet;
  quiet.transmit_power_w = 1e-12;
  CHECK(min_covert_distance(quiet, ch, default_noise(), 1000.0) == 0.0);
  CHECK_THROWS_AS(min_covert_distance(CovertParams{}, ch, default_noise(), 100.0), NeverCovertError);
}

TEST_CASE("more channel uses push the covert distance out") {
  const acoustics::ChannelParams ch;
  for (double ps : {0.05, 0.1, 0.5}) {
    CovertParams cp;
    cp.transmit_power_w = ps;
    double prev = min_covert_distance(cp, ch, default_noise(), 50000.0);
    for (int l : {200, 400, 800}) {
      cp.channel_uses = l;
      const double d = min_covert_distance(cp, ch, default_noise(), 50000.0);
      CHECK(d > prev);
      prev = d;
    }
  }
}

TEST_CASE("detector decisions at large beta") {
  const CovertParams cp;
  int silent_ok = 0;
  int loud_ok = 0;
  for (int t = 0; t < 10000; ++t) {
    silent_ok += simulate_detection(t, Hypothesis::kSilent, cp, 20.0) == Hypothesis::kSilent;
    loud_ok += simulate_detection(t, Hypothesis::kTransmitting, cp, 20.0) == Hypothesis::kTransmitting;
  }
  CHECK(silent_ok >= 9900);
  CHECK(loud_ok >= 9900);
}

TEST_CASE("detector is near chance at tiny beta") {
  const std::vector<double> thresholds{optimal_threshold(1.0, 1e-4)};
  const auto rates = estimate_error_rates(9, 100, 1e-4, thresholds, 10000);
  CHECK(rates[0].total() > 0.95);
}

TEST_CASE("covert params validation") {
  CovertParams cp;
  cp.epsilon = 0.6;
  CHECK_THROWS_AS(cp.validate(), ValidationError);
  cp = {};
  cp.channel_uses = 0;
  CHECK_THROWS_AS(cp.validate(), ValidationError);
  cp = {};
  cp.jam_power_w = -1.0;
  CHECK_THROWS_AS(cp.validate(), ValidationError);
}
