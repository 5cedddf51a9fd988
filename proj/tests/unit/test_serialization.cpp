#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>
#include <string>

#include "zdq/error.hpp"
#include "zdq/serialization.hpp"

namespace {

using namespace zdq;

TEST(QuantizerJson, RoundTrips) {
  const std::vector<Quantizer> qs = {
      IntervalQuantizer(),
      IntervalQuantizer({-0.5, 0.1, 2.0}),
      FinitePartition({0, 1, 0, 2}, 3),
      HyperplaneQuantizer(2, 2, {{{1.0, 1.0}, 0.25}}),
  };
  for (const auto& q : qs) {
    const json j = to_json(q);
    const Quantizer back = quantizer_from_json(j);
    EXPECT_EQ(to_json(back).dump(), j.dump());
  }
}

TEST(QuantizerJson, RejectsMalformed) {
  EXPECT_THROW(quantizer_from_json(json{{"kind", "spiral"}}), InvalidArgument);
  EXPECT_THROW(quantizer_from_json(json{{"kind", "interval"}, {"thresholds", {1.0, 0.0}}}), InvalidArgument);
  EXPECT_THROW(quantizer_from_json(json::array()), InvalidArgument);
}

TEST(FormatDouble, RoundTrips) {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 6.02214076e23, 5e-324}) {
    const std::string s = format_double(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Csv, ScheduleHeaderAndRows) {
  const std::vector<std::uint64_t> h = {2, 4, 8, 16};
  std::ostringstream out;
  write_schedule_csv(out, piecing_schedule(h, 3));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_NE(line.find("n_k"), std::string::npos) << line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

TEST(Csv, PolicyTreeHasOneRowPerNode) {
  const FiniteEnvironment env = make_finite_environment(
      FiniteChain({{0.6, 0.3, 0.1}, {0.2, 0.5, 0.3}, {0.3, 0.3, 0.4}}, {0.3, 0.3, 0.4}),
      CostModel::quadratic(), 2);
  const PolicyTree tree = solve_finite_horizon(env, env.initial_belief(), 3).tree;
  const json cands = candidates_json(env);
  std::ostringstream out;
  write_policy_csv(out, tree, cands);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("t,node,parent,symbol,probability,candidate", 0), 0u) << line;
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, tree.nodes.size());

  const json j = to_json(tree, cands);
  EXPECT_EQ(j.at("horizon"), 3);
  EXPECT_EQ(j.dump(), to_json(tree, cands).dump());
}

TEST(Json, HistogramAndBinning) {
  const BeliefBinning b = BeliefBinning::mean_std(-3, 3, 0, 2, 6, 2);
  const json jb = to_json(b);
  EXPECT_EQ(jb.at("kind"), "mean_std");
  OccupationAccumulator acc(b, 2);
  acc.add({0.1, 0.5, 0.0}, {{1.0}, std::nullopt}, 1, 0.3);
  const json jh = to_json(acc.finish());
  EXPECT_EQ(jh.at("total_steps"), 1);
}

}  // namespace
