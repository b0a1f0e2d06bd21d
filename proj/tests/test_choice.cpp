#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "modeshift/choice.hpp"
#include "testutil.hpp"

using namespace modeshift;

namespace {

NestedLogitModel two_nest_model() {
  NestedLogitModel model;
  model.modes = {"a", "b", "c"};
  model.nests = {{"ab", {"a", "b"}, 0.5}, {"c", {"c"}, 1.0}};
  model.reference_mode = "a";
  model.validate();
  return model;
}

NestedLogitModel degenerate_model(const std::vector<ModeId>& modes) {
  NestedLogitModel model;
  model.modes = modes;
  for (const auto& m : modes) model.nests.push_back({m, {m}, 1.0});
  model.reference_mode = modes.front();
  model.validate();
  return model;
}

}  // namespace

TEST_CASE("mnl probabilities: symmetry, softmax, single mode") {
  auto p = mnl_probabilities(UtilityVector{{"a", 0.0}, {"b", 0.0}, {"c", 0.0}});
  CHECK(p.at("a") == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(p.at("b") == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(p.at("c") == doctest::Approx(1.0 / 3).epsilon(1e-12));

  p = mnl_probabilities(UtilityVector{{"a", std::log(2.0)}, {"b", 0.0}});
  CHECK(p.at("a") == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(p.at("b") == doctest::Approx(1.0 / 3).epsilon(1e-12));

  p = mnl_probabilities(UtilityVector{{"a", 5.0}});
  CHECK(p.at("a") == 1.0);
}

TEST_CASE("mnl probabilities: unavailable modes are excluded entirely") {
  UtilityVector u{{"a", 1.0}, {"b", 2.0}};
  u.set_unavailable("c");
  auto p = mnl_probabilities(u);
  CHECK(p.size() == 2);
  CHECK(p.count("c") == 0);
  CHECK(p.at("a") + p.at("b") == doctest::Approx(1.0).epsilon(1e-12));

  UtilityVector none;
  none.set_unavailable("a");
  CHECK_THROWS_AS(mnl_probabilities(none), NoAvailableMode);
  CHECK_THROWS_AS(mnl_probabilities(UtilityVector{}), NoAvailableMode);
}

TEST_CASE("nest logsum values") {
  CHECK(nest_logsum(UtilityVector{{"m", 4.2}}, 0.5) == doctest::Approx(4.2).epsilon(1e-14));
  CHECK(nest_logsum(UtilityVector{{"a", 0.0}, {"b", 0.0}}, 1.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(nest_logsum(UtilityVector{{"a", 0.0}, {"b", 0.0}}, 0.5) ==
        doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(nest_logsum(std::vector<double>{}, 0.5), EmptyNest);
  UtilityVector unavailable_only;
  unavailable_only.set_unavailable("a");
  CHECK_THROWS_AS(nest_logsum(unavailable_only, 0.5), EmptyNest);
}

TEST_CASE("nested probabilities: degenerate nests reduce to MNL") {
  auto model = degenerate_model({"a", "b", "c", "d"});
  testutil::Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    UtilityVector u;
    for (const auto& m : model.modes) u.set(m, rng.uniform(-50.0, 50.0));
    auto nested = nested_probabilities(model, u);
    auto flat = mnl_probabilities(u);
    for (const auto& m : model.modes)
      CHECK(nested.at(m) == doctest::Approx(flat.at(m)).epsilon(1e-12));
  }
}

TEST_CASE("nested probabilities: two singleton nests split evenly") {
  auto model = degenerate_model({"a", "b"});
  auto p = nested_probabilities(model, UtilityVector{{"a", 1.3}, {"b", 1.3}});
  CHECK(p.at("a") == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p.at("b") == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("nested probabilities: hand-computed two-nest case") {
  // {a,b} nc=0.5 and {c} nc=1 at zero utilities: the pair nest's composite
  // utility is 0.5*ln 2, split evenly inside.
  auto model = two_nest_model();
  auto p = nested_probabilities(model, UtilityVector{{"a", 0.0}, {"b", 0.0}, {"c", 0.0}});
  double p_nest1 = std::exp(0.5 * std::log(2.0)) / (std::exp(0.5 * std::log(2.0)) + 1.0);
  CHECK(p.at("a") == doctest::Approx(p_nest1 / 2).epsilon(1e-12));
  CHECK(p.at("b") == doctest::Approx(p_nest1 / 2).epsilon(1e-12));
  CHECK(p.at("c") == doctest::Approx(1.0 - p_nest1).epsilon(1e-12));
}

TEST_CASE("nested probabilities match the plain-formula oracle") {
  NestedLogitModel model;
  model.modes = {"walk", "autoDriver", "autoPassenger", "bus", "metro", "train"};
  model.nests = {{"walk", {"walk"}, 1.0},
                 {"auto", {"autoDriver", "autoPassenger"}, 0.7},
                 {"transit", {"bus", "metro", "train"}, 0.5}};
  model.reference_mode = "metro";
  model.validate();

  std::vector<testutil::OracleNest> oracle_nests = {
      {"walk", {"walk"}, 1.0},
      {"auto", {"autoDriver", "autoPassenger"}, 0.7},
      {"transit", {"bus", "metro", "train"}, 0.5}};

  testutil::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    UtilityVector u;
    std::map<std::string, double> raw;
    for (const auto& m : model.modes) {
      double v = rng.uniform(-5.0, 5.0);
      u.set(m, v);
      raw[m] = v;
    }
    auto got = nested_probabilities(model, u);
    auto expected = testutil::oracle_nested_probs(oracle_nests, raw);
    for (const auto& m : model.modes)
      CHECK(got.at(m) == doctest::Approx(expected.at(m)).epsilon(1e-12));
  }
}

TEST_CASE("translation invariance") {
  auto model = two_nest_model();
  testutil::Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    UtilityVector u, shifted;
    double k = rng.uniform(-30.0, 30.0);
    for (const auto& m : model.modes) {
      double v = rng.uniform(-20.0, 20.0);
      u.set(m, v);
      shifted.set(m, v + k);
    }
    auto p = nested_probabilities(model, u);
    auto q = nested_probabilities(model, shifted);
    for (const auto& m : model.modes)
      CHECK(p.at(m) == doctest::Approx(q.at(m)).epsilon(1e-10));
  }
}

TEST_CASE("normalization over random utility draws") {
  auto model = two_nest_model();
  testutil::Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    UtilityVector u;
    for (const auto& m : model.modes) u.set(m, rng.uniform(-50.0, 50.0));
    auto p = nested_probabilities(model, u);
    double sum = 0.0;
    for (const auto& [mode, prob] : p) sum += prob;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("monotonicity: raising a utility raises its probability") {
  auto model = two_nest_model();
  UtilityVector u{{"a", 0.3}, {"b", -0.4}, {"c", 0.9}};
  auto before = nested_probabilities(model, u);
  u.set("a", 0.8);
  auto after = nested_probabilities(model, u);
  CHECK(after.at("a") > before.at("a"));
  CHECK(after.at("b") <= before.at("b"));
  CHECK(after.at("c") <= before.at("c"));
}

TEST_CASE("overflow safety at utility magnitude 700") {
  auto p = mnl_probabilities(UtilityVector{{"a", 700.0}, {"b", -700.0}});
  CHECK(std::isfinite(p.at("a")));
  CHECK(std::isfinite(p.at("b")));
  CHECK(p.at("a") == doctest::Approx(1.0).epsilon(1e-12));

  auto model = two_nest_model();
  auto q = nested_probabilities(model,
                                UtilityVector{{"a", 700.0}, {"b", 699.0}, {"c", -700.0}});
  double sum = 0.0;
  for (const auto& [mode, prob] : q) {
    CHECK(std::isfinite(prob));
    sum += prob;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("model validation rejects malformed structures") {
  NestedLogitModel model;
  model.modes = {"a", "a"};
  model.nests = {{"n", {"a"}, 1.0}};
  model.reference_mode = "a";
  CHECK_THROWS_AS(model.validate(), InvalidModel);

  model.modes = {"a", "b"};
  model.nests = {{"n1", {"a", "b"}, 0.5}, {"n2", {"b"}, 1.0}};
  CHECK_THROWS_AS(model.validate(), InvalidModel);  // b in two nests

  model.nests = {{"n1", {"a"}, 1.0}};
  CHECK_THROWS_AS(model.validate(), InvalidModel);  // b in no nest

  model.nests = {{"n1", {"a", "b"}, 1.5}};
  CHECK_THROWS_AS(model.validate(), InvalidModel);  // nc out of range

  model.nests = {{"n1", {"a"}, 0.5}, {"n2", {"b"}, 1.0}};
  CHECK_THROWS_AS(model.validate(), InvalidModel);  // degenerate nest with nc != 1

  model.nests = {{"n1", {"a", "b"}, 0.5}};
  model.reference_mode = "zz";
  CHECK_THROWS_AS(model.validate(), InvalidModel);
}

TEST_CASE("nested probabilities skip nests whose members are all unavailable") {
  auto model = two_nest_model();
  UtilityVector u{{"c", 0.0}};
  u.set_unavailable("a");
  u.set_unavailable("b");
  auto p = nested_probabilities(model, u);
  CHECK(p.size() == 1);
  CHECK(p.at("c") == 1.0);
}
