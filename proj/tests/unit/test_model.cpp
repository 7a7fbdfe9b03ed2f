#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "scorecheck/error.hpp"
#include "scorecheck/model.hpp"
#include "support/stats.hpp"

using namespace scorecheck;

TEST_CASE("dataset validation") {
  CHECK_THROWS_AS(GroupedDataset(std::vector<Group>{}), ParameterError);
  CHECK_THROWS_AS(GroupedDataset(std::vector<Group>{{"a", {}}}), ParameterError);
  CHECK_THROWS_AS(GroupedDataset(std::vector<Group>{{"a", {1.0}}, {"a", {2.0}}}), ParameterError);
  CHECK_THROWS_AS(GroupedDataset(std::vector<Group>{{"a", {1.0, NAN}}}), ParameterError);
  const GroupedDataset d(std::vector<Group>{{"x", {1.0, 2.0, 3.0}}, {"y", {4.0}}});
  CHECK(d.num_groups() == 2);
  CHECK(d.total_observations() == 4);
  CHECK(d.group(0).mean() == doctest::Approx(2.0));
  CHECK(d.group(0).centered_sum_of_squares() == doctest::Approx(2.0));
  CHECK_THROWS_AS(d.group(2), ParameterError);
}

TEST_CASE("simulate: shapes and injections") {
  const auto t1 = simulate_dataset(5, 10, {}, {}, 1);
  CHECK(t1.data.num_groups() == 5);
  for (const auto& g : t1.data.groups()) CHECK(g.size() == 10);
  CHECK(t1.data.group(2).label == "3");

  const auto t2 = simulate_dataset(30, 50, {}, {{{2, 20.0}, {7, 20.0}, {18, 20.0}}}, 2);
  CHECK(t2.data.num_groups() == 30);
  CHECK(t2.data.total_observations() == 1500);
  for (std::size_t i = 0; i < 30; ++i) {
    const bool inj = i == 2 || i == 7 || i == 18;
    CHECK(t2.truth.injected[i] == inj);
    if (inj) CHECK(t2.truth.theta[i] == 20.0);
  }

  const auto tiny = simulate_dataset(2, 1, {}, {}, 3);
  CHECK(tiny.data.total_observations() == 2);

  CHECK_THROWS_AS(simulate_dataset(5, 10, {}, {{{5, 1.0}}}, 1), ParameterError);
  CHECK_THROWS_AS(simulate_dataset(1, 10, {}, {}, 1), ParameterError);
  CHECK_THROWS_AS(simulate_dataset(2, 0, {}, {}, 1), ParameterError);
}

TEST_CASE("simulate is deterministic and injection leaves other groups unchanged") {
  const auto a = simulate_dataset(5, 10, {}, {}, 9);
  const auto b = simulate_dataset(5, 10, {}, {}, 9);
  const auto c = simulate_dataset(5, 10, {}, {{{2, 20.0}}}, 9);
  CHECK(a.data == b.data);
  CHECK(a.truth.theta == b.truth.theta);
  for (std::size_t i = 0; i < 5; ++i) {
    if (i != 2) CHECK(a.truth.theta[i] == c.truth.theta[i]);
  }
  CHECK(c.truth.theta[2] == 20.0);
}

TEST_CASE("non-injected theta are N(beta, re_variance)") {
  std::vector<double> z;
  const ModelHyperParams hyper;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto sim = simulate_dataset(3, 1, hyper, {{{1, 20.0}}}, 1000 + s);
    z.push_back((sim.truth.theta[0] - sim.truth.beta) / std::sqrt(hyper.re_variance));
  }
  CHECK(testsupport::ks_test(z, testsupport::std_normal_cdf) > 0.01);
}

TEST_CASE("split_dataset") {
  const auto sim = simulate_dataset(5, 4, {}, {}, 5);
  const auto s = split_dataset(sim.data, 2);
  CHECK(s.child.label == "3");
  CHECK(s.child.values == sim.data.group(2).values);
  REQUIRE(s.parent.num_groups() == 4);
  const char* labels[] = {"1", "2", "4", "5"};
  for (std::size_t i = 0; i < 4; ++i) CHECK(s.parent.group(i).label == labels[i]);
  CHECK(s.parent.group(2).values == sim.data.group(3).values);

  std::size_t total = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    const auto si = split_dataset(sim.data, i);
    CHECK(si.child.values == sim.data.group(i).values);
    total += si.child.size();
  }
  CHECK(total == sim.data.total_observations());

  const auto two = simulate_dataset(2, 3, {}, {}, 1);
  CHECK(split_dataset(two.data, 0).parent.num_groups() == 1);
  CHECK_THROWS_AS(split_dataset(sim.data, 5), ParameterError);
}

TEST_CASE("dataset CSV round trip and parse errors") {
  const auto sim = simulate_dataset(4, 7, {}, {}, 11);
  const std::string text = format_dataset_csv(sim.data);
  CHECK(text.rfind("group,value\n", 0) == 0);
  CHECK(parse_dataset_csv(text) == sim.data);

  const auto crlf = parse_dataset_csv("group,value\r\nb,1.5\r\na,2\r\nb,-3e-2\r\n");
  REQUIRE(crlf.num_groups() == 2);
  CHECK(crlf.group(0).label == "b");
  CHECK(crlf.group(0).values == std::vector<double>{1.5, -0.03});

  CHECK_THROWS_AS(parse_dataset_csv(""), ParseError);
  CHECK_THROWS_AS(parse_dataset_csv("grp,val\na,1\n"), ParseError);
  CHECK_THROWS_AS(parse_dataset_csv("group,value\na,abc\n"), ParseError);
  CHECK_THROWS_AS(parse_dataset_csv("group,value\na,1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_dataset_csv("group,value\n,1\n"), ParseError);
  CHECK_THROWS_AS(parse_dataset_csv("group,value\na,inf\n"), ParseError);
  CHECK_THROWS_AS(parse_dataset_csv("group,value\n"), ParseError);
  try {
    parse_dataset_csv("group,value\na,1\na,x\n");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  const auto path = std::filesystem::temp_directory_path() / "scorecheck_model_roundtrip.csv";
  write_dataset_csv(sim.data, path);
  CHECK(read_dataset_csv(path) == sim.data);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(read_dataset_csv("/nonexistent/dir/x.csv"), IoError);
}
