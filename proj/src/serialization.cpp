#include "zdq/serialization.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "zdq/error.hpp"

namespace zdq {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json to_json(const IntervalQuantizer& q) {
  return {{"type", "interval"},
          {"M", q.levels()},
          {"thresholds", std::vector<double>(q.thresholds().begin(), q.thresholds().end())}};
}

json to_json(const HyperplaneQuantizer& q) {
  json planes = json::array();
  for (std::size_t i = 0; i < q.levels(); ++i)
    for (std::size_t j = i + 1; j < q.levels(); ++j) {
      const auto& h = q.plane(i, j);
      planes.push_back({{"i", i}, {"j", j}, {"normal", h.normal}, {"offset", h.offset}});
    }
  return {{"type", "hyperplane"}, {"M", q.levels()}, {"dimension", q.dimension()},
          {"hyperplanes", planes}};
}

json to_json(const FinitePartition& q) {
  return {{"type", "partition"},
          {"M", q.levels()},
          {"assignment",
           std::vector<std::size_t>(q.assignment().begin(), q.assignment().end())}};
}

json to_json(const Quantizer& q) {
  return std::visit([](const auto& v) { return to_json(v); }, q);
}

Quantizer quantizer_from_json(const json& j) {
  try {
    const std::string type = j.at("type").get<std::string>();
    const std::size_t levels = j.at("M").get<std::size_t>();
    if (type == "interval") {
      IntervalQuantizer q(j.at("thresholds").get<std::vector<double>>());
      if (q.levels() != levels) throw InvalidArgument("interval quantizer: M != thresholds + 1");
      return q;
    }
    if (type == "partition")
      return FinitePartition(j.at("assignment").get<std::vector<std::size_t>>(), levels);
    if (type == "hyperplane") {
      const std::size_t dim = j.at("dimension").get<std::size_t>();
      if (levels < 1) throw InvalidArgument("hyperplane quantizer: M must be >= 1");
      std::vector<HyperplaneQuantizer::Hyperplane> planes(levels * (levels - 1) / 2);
      std::vector<bool> seen(planes.size(), false);
      for (const auto& p : j.at("hyperplanes")) {
        const auto i = p.at("i").get<std::size_t>();
        const auto k = p.at("j").get<std::size_t>();
        if (!(i < k && k < levels)) throw InvalidArgument("hyperplane pair out of range");
        const std::size_t idx = i * levels - i * (i + 1) / 2 + (k - i - 1);
        if (seen[idx]) throw InvalidArgument("duplicate hyperplane pair");
        seen[idx] = true;
        planes[idx] = {p.at("normal").get<std::vector<double>>(), p.at("offset").get<double>()};
      }
      if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw InvalidArgument("missing hyperplane pair");
      return HyperplaneQuantizer(dim, levels, std::move(planes));
    }
    throw InvalidArgument("unknown quantizer type '" + type + "'");
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed quantizer: ") + e.what());
  }
}

json candidates_json(const GridEnvironment& env) {
  json out = json::array();
  for (std::size_t q = 0; q < env.candidate_count(); ++q) out.push_back(to_json(env.candidate(q)));
  return out;
}

json candidates_json(const FiniteEnvironment& env) {
  json out = json::array();
  for (std::size_t q = 0; q < env.candidate_count(); ++q) out.push_back(to_json(env.candidate(q)));
  return out;
}

namespace {

json node_json(const PolicyTree& tree, std::size_t index, const json& candidates) {
  const PolicyNode& n = tree.nodes.at(index);
  json j = {{"t", n.t},
            {"candidate", n.candidate},
            {"quantizer", candidates.at(n.candidate)},
            {"stage_cost", n.stage_cost},
            {"value", n.value}};
  if (n.pruned_mass > 0.0) j["pruned_mass"] = n.pruned_mass;
  json children = json::array();
  for (const auto& b : n.children)
    children.push_back({{"symbol", b.symbol},
                        {"probability", b.probability},
                        {"node", node_json(tree, b.child, candidates)}});
  j["children"] = std::move(children);
  return j;
}

// Thresholds or assignment entries as a flat list of numbers.
std::vector<double> quantizer_columns(const json& q) {
  std::vector<double> out;
  if (q.at("type") == "interval") {
    for (const auto& v : q.at("thresholds")) out.push_back(v.get<double>());
  } else if (q.at("type") == "partition") {
    for (const auto& v : q.at("assignment")) out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

json to_json(const PolicyTree& tree, const json& candidates) {
  if (tree.nodes.empty()) throw InvalidArgument("empty policy tree");
  return {{"horizon", tree.horizon},
          {"value", tree.value()},
          {"nodes", tree.nodes.size()},
          {"root", node_json(tree, 0, candidates)}};
}

json to_json(const PiecingSchedule& s) {
  return {{"horizons", s.horizons},
          {"repetitions", s.repetitions},
          {"segment_lengths", s.segment_lengths},
          {"boundaries", s.boundaries},
          {"tail_ratios", s.tail_ratios}};
}

json to_json(const BeliefBinning& b) {
  json j = {{"kind", b.kind == BeliefBinning::Kind::simplex_coordinate ? "simplex" : "mean_std"},
            {"bins", b.bins_first},
            {"lo", b.first_lo},
            {"hi", b.first_hi}};
  if (b.kind == BeliefBinning::Kind::mean_std) {
    j["std_bins"] = b.bins_second;
    j["std_lo"] = b.second_lo;
    j["std_hi"] = b.second_hi;
  }
  return j;
}

json to_json(const OccupationHistogram& h) {
  json cells = json::array();
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    if (h.counts[i] == 0) continue;
    cells.push_back(
        {{"bin", i / h.candidate_count}, {"quantizer", i % h.candidate_count}, {"count", h.counts[i]}});
  }
  return {{"binning", to_json(h.binning)},
          {"candidate_count", h.candidate_count},
          {"total_steps", h.total_steps},
          {"average_stage_cost", h.average_stage_cost},
          {"cells", cells}};
}

void write_policy_csv(std::ostream& out, const PolicyTree& tree, const json& candidates) {
  std::size_t width = 0;
  for (const auto& c : candidates) width = std::max(width, quantizer_columns(c).size());
  const bool interval = !candidates.empty() && candidates.front().at("type") == "interval";
  std::vector<std::size_t> parent(tree.nodes.size(), 0), symbol(tree.nodes.size(), 0);
  std::vector<double> prob(tree.nodes.size(), 1.0);
  for (std::size_t i = 0; i < tree.nodes.size(); ++i)
    for (const auto& b : tree.nodes[i].children) {
      parent[b.child] = i;
      symbol[b.child] = b.symbol;
      prob[b.child] = b.probability;
    }
  out << "t,node,parent,symbol,probability,candidate";
  for (std::size_t k = 0; k < width; ++k) out << ',' << (interval ? "threshold_" : "cell_of_") << k;
  out << ",stage_cost,value\n";
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const PolicyNode& n = tree.nodes[i];
    out << n.t << ',' << i << ',' << (i == 0 ? std::string() : std::to_string(parent[i])) << ','
        << (i == 0 ? std::string() : std::to_string(symbol[i])) << ',' << format_double(prob[i])
        << ',' << n.candidate;
    const auto cols = quantizer_columns(candidates.at(n.candidate));
    for (std::size_t k = 0; k < width; ++k)
      out << ',' << (k < cols.size() ? format_double(cols[k]) : std::string());
    out << ',' << format_double(n.stage_cost) << ',' << format_double(n.value) << '\n';
  }
}

void write_schedule_csv(std::ostream& out, const PiecingSchedule& s) {
  out << "k,T_k,n_k,segment_length,boundary,tail_ratio\n";
  for (std::size_t k = 0; k < s.segments(); ++k) {
    out << k + 1 << ',' << s.horizons[k] << ',' << s.repetitions[k] << ','
        << s.segment_lengths[k] << ',' << s.boundaries[k] << ','
        << (k == 0 ? std::string() : format_double(s.tail_ratios[k - 1])) << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log) {
  out << "t,x,symbol,u,stage_cost,belief_mean,belief_std,quantizer_id,distortion\n";
  for (const auto& r : log.rows) {
    out << r.t << ',' << format_double(r.x) << ',' << r.symbol << ','
        << format_double(r.reconstruction) << ',' << format_double(r.stage_cost) << ','
        << format_double(r.belief_mean) << ',' << format_double(r.belief_std) << ','
        << r.quantizer << ',' << format_double(r.cost) << '\n';
  }
}

}  // namespace zdq
