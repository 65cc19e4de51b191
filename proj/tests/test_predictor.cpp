#include <doctest.h>

#include <filesystem>
#include <random>

#include "gpushare/interference.hpp"
#include "gpushare/predictor.hpp"
#include "support.hpp"

using namespace gpushare;

namespace {

ThroughputModel model() {
  const InterferenceParams ip;
  return [ip](double a, double b, double c) { return model_offline_rate(a, b, c, ip); };
}

}  // namespace

TEST_CASE("knots reproduce stored values and midpoints average") {
  const PredictionTable t = fixtures::two_plan_table();
  const auto& ax = t.axes();
  for (std::size_t i = 0; i < ax.online_sm.size(); ++i)
    for (std::size_t j = 0; j < ax.offline_sm.size(); ++j)
      for (std::size_t k = 0; k < ax.sm_pct.size(); ++k)
        CHECK(t.interpolate(ax.online_sm[i], ax.offline_sm[j], ax.sm_pct[k]) == t.at(i, j, k));
  CHECK(t.interpolate(0.2, 0.65, 0.8) == doctest::Approx((t.at(0, 0, 1) + t.at(0, 1, 1)) / 2));
  CHECK(t.interpolate(0.3, 0.7, 0.8) == doctest::Approx((t.at(0, 1, 1) + t.at(1, 1, 1)) / 2));
  CHECK(t.interpolate(0.4, 0.8, 0.7) == doctest::Approx((t.at(1, 2, 0) + t.at(1, 2, 1)) / 2));
  // Outside the hull the query is clamped.
  CHECK(t.interpolate(0.0, 0.5, 1.0) == t.at(0, 0, 1));
}

TEST_CASE("zero SM slice predicts zero") {
  const PredictionTable t = build_table_from_model("A10", model(), default_axes());
  CHECK(t.interpolate(0.3, 0.7, 0.0) == 0.0);
  CHECK(predict(t, fixtures::profile(0.3), fixtures::profile(0.7), 0.0) == 0.0);
}

TEST_CASE("built table matches the model at every knot") {
  TableAxes ax{{0.0, 0.5}, {0.5, 1.0}, {0.0, 1.0}};
  const PredictionTable t = build_table_from_model("A10", model(), ax);
  CHECK(t.values().size() == 8);
  for (double v : t.values()) CHECK((v >= 0.0 && v <= 1.0));
  const auto m = model();
  const PredictionTable big = build_table_from_model("A10", m, default_axes());
  const auto& a = big.axes();
  for (std::size_t i = 0; i < a.online_sm.size(); ++i)
    for (std::size_t j = 0; j < a.offline_sm.size(); ++j)
      for (std::size_t k = 0; k < a.sm_pct.size(); ++k)
        CHECK(std::abs(big.at(i, j, k) - m(a.online_sm[i], a.offline_sm[j], a.sm_pct[k])) <= 1e-12);
}

TEST_CASE("serial and parallel builds agree bit for bit") {
  const auto a = build_table_from_model("A10", model(), default_axes(), Exec::serial);
  const auto b = build_table_from_model("A10", model(), default_axes(), Exec::parallel);
  CHECK(a == b);
}

TEST_CASE("single-knot axes give a constant predictor") {
  const PredictionTable t("X", TableAxes{{0.3}, {0.7}, {0.5}}, {0.42});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 50; ++n) CHECK(t.interpolate(u(rng), u(rng), u(rng)) == 0.42);
}

TEST_CASE("normalized throughput") {
  CHECK(normalized_throughput(50, 100) == 0.5);
  CHECK(normalized_throughput(100, 100) == 1.0);
  CHECK(normalized_throughput(0, 100) == 0.0);
  CHECK_THROWS(normalized_throughput(1, 0));
}

TEST_CASE("malformed tables are rejected") {
  CHECK_THROWS_AS(PredictionTable("X", TableAxes{{0.5, 0.3}, {0.5}, {0.5}}, {0.1, 0.2}), ValidationError);
  CHECK_THROWS_AS(PredictionTable("X", TableAxes{{0.3}, {0.5}, {0.5}}, {0.1, 0.2}), ValidationError);
  CHECK_THROWS_AS(PredictionTable("X", TableAxes{{0.3}, {0.5}, {0.5}}, {1.5}), ValidationError);
  const PredictionTable t = fixtures::two_plan_table();
  CHECK_THROWS(predict(t, fixtures::profile(0.2), fixtures::profile(0.6), 1.2));
}

TEST_CASE("json and file round trip") {
  const PredictionTable t = fixtures::two_plan_table();
  CHECK(PredictionTable::from_json(t.to_json()) == t);
  const auto path = std::filesystem::temp_directory_path() / "gpushare_table.json";
  t.save(path);
  CHECK(PredictionTable::load(path) == t);
  std::filesystem::remove(path);
}

TEST_CASE("table predictor dispatches by gpu type") {
  TablePredictor p;
  p.add(fixtures::two_plan_table("A10"));
  CHECK(p.has("A10"));
  CHECK_FALSE(p.has("V100"));
  CHECK(p.predict("A10", fixtures::profile(0.2), fixtures::profile(0.7), 0.8) == doctest::Approx(0.8));
  CHECK_THROWS(p.predict("V100", fixtures::profile(0.2), fixtures::profile(0.7), 0.8));
}
