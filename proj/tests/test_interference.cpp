#include <doctest.h>

#include "gpushare/interference.hpp"

using namespace gpushare;

TEST_CASE("online alone below the knee runs at full clock") {
  const InterferenceParams p;
  const auto r = ground_truth_step(0.2, 0.0, 0.7, 0.8, p);
  CHECK(r.online_latency_mult == 1.0);
  CHECK(r.offline_rate == 0.0);
}

TEST_CASE("exact complement fills the GPU without overlap") {
  InterferenceParams p;
  p.load_knee = 1.0;
  const auto r = ground_truth_step(0.2, 0.8, 0.0, 0.8, p);
  CHECK(r.overlap == 0.0);
  CHECK(r.total_load == 1.0);
  CHECK(r.offline_rate == 1.0);
  CHECK(r.online_latency_mult == 1.0);
}

TEST_CASE("oversubscription slows the online workload") {
  const InterferenceParams p;
  const auto r = ground_truth_step(0.8, 0.4, 0.0, 0.9, p);
  CHECK(r.overlap == doctest::Approx(0.2));
  const double clock = 1.0 - p.clock_slope;  // load saturates at 1
  CHECK(r.online_latency_mult == doctest::Approx((1.0 / clock) * (1.0 + p.contention_penalty * 0.2)));
  CHECK(r.online_latency_mult > 1.0);
}

TEST_CASE("throttle shrinks the offline share") {
  const InterferenceParams p;
  const auto free = ground_truth_step(0.3, 0.6, 0.0, 0.6, p);
  const auto half = ground_truth_step(0.3, 0.6, 0.5, 0.6, p);
  CHECK(half.offline_sm == doctest::Approx(0.5 * free.offline_sm));
  CHECK(half.offline_rate < free.offline_rate);
}

TEST_CASE("offline rate is monotone in the assigned share") {
  const InterferenceParams p;
  for (double d = 0.0; d <= 1.0; d += 0.05)
    for (double dem = 0.5; dem <= 1.0; dem += 0.05) {
      double prev = -1.0;
      for (double s = 0.0; s <= 1.0; s += 0.01) {
        const double r = model_offline_rate(d, dem, s, p);
        CHECK(r >= prev - 1e-12);
        CHECK(r >= 0.0);
        CHECK(r <= 1.0);
        prev = r;
      }
    }
}
