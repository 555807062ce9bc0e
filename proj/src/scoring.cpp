#include "genet/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <json.hpp>

#include "genet/io_util.hpp"

namespace genet {

using nlohmann::json;

void TiusWeights::validate() const {
  const double values[] = {n, nl, ni, l, ll, lnl};
  double sum = 0.0;
  for (double w : values) {
    if (w < 0.0) raise(Errc::InvalidConfig, "negative facet weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    raise(Errc::InvalidConfig, "facet weights must sum to 1");
  }
}

TiusWeights parse_tius_weights(const std::string& json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    raise(Errc::InvalidConfig, "weights document is not a JSON object");
  }
  TiusWeights w;
  w.n = doc.value("w_n", w.n);
  w.nl = doc.value("w_nl", w.nl);
  w.ni = doc.value("w_ni", w.ni);
  w.l = doc.value("w_l", w.l);
  w.ll = doc.value("w_ll", w.ll);
  w.lnl = doc.value("w_lnl", w.lnl);
  w.validate();
  return w;
}

// ---------------------------------------------------------------------------
// Node alignment
// ---------------------------------------------------------------------------

namespace {

size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), size_t{0});
  for (size_t i = 1; i <= a.size(); ++i) {
    size_t diagonal = row[0];
    row[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t above = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                         diagonal + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diagonal = above;
    }
  }
  return row[b.size()];
}

}  // namespace

double label_similarity(const std::string& a, const std::string& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t longest = std::max(a.size(), b.size());
  return 1.0 - static_cast<double>(levenshtein(a, b)) /
                   static_cast<double>(longest);
}

double node_similarity(const TopologyNode& truth, const TopologyNode& extracted,
                       const AlignmentParams& params) {
  double label_sim =
      label_similarity(normalize_label(truth.label), normalize_label(extracted.label));
  double kind_match = truth.kind == extracted.kind ? 1.0 : 0.0;
  return params.label_weight * label_sim + params.kind_weight * kind_match;
}

const AlignmentPair* NodeAlignment::pair_for_truth(
    std::string_view truth_id) const {
  for (const auto& pair : pairs) {
    if (pair.truth_id == truth_id) return &pair;
  }
  return nullptr;
}

double NodeAlignment::total_similarity() const {
  double sum = 0.0;
  for (const auto& pair : pairs) sum += pair.similarity;
  return sum;
}

NodeAlignment align_nodes(const TopologyRepresentation& extracted,
                          const TopologyRepresentation& truth,
                          const AlignmentParams& params) {
  struct Candidate {
    double similarity;
    size_t truth_index;
    size_t extracted_index;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(truth.nodes.size() * extracted.nodes.size());
  for (size_t t = 0; t < truth.nodes.size(); ++t) {
    for (size_t e = 0; e < extracted.nodes.size(); ++e) {
      double similarity = node_similarity(truth.nodes[t], extracted.nodes[e], params);
      if (similarity >= params.threshold) {
        candidates.push_back({similarity, t, e});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [&](const Candidate& a, const Candidate& b) {
              if (a.similarity != b.similarity) return a.similarity > b.similarity;
              return std::tie(truth.nodes[a.truth_index].id,
                              extracted.nodes[a.extracted_index].id) <
                     std::tie(truth.nodes[b.truth_index].id,
                              extracted.nodes[b.extracted_index].id);
            });

  std::vector<bool> truth_taken(truth.nodes.size(), false);
  std::vector<bool> extracted_taken(extracted.nodes.size(), false);
  NodeAlignment alignment;
  for (const auto& candidate : candidates) {
    if (truth_taken[candidate.truth_index] ||
        extracted_taken[candidate.extracted_index]) {
      continue;
    }
    truth_taken[candidate.truth_index] = true;
    extracted_taken[candidate.extracted_index] = true;
    alignment.pairs.push_back({truth.nodes[candidate.truth_index].id,
                               extracted.nodes[candidate.extracted_index].id,
                               candidate.similarity});
  }
  return alignment;
}

// ---------------------------------------------------------------------------
// TIUS
// ---------------------------------------------------------------------------

namespace {

using EndpointPair = std::pair<std::string, std::string>;

EndpointPair ordered_pair(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

struct LinkFacts {
  bool label_match = false;
  bool iface_match = false;
};

}  // namespace

TiusBreakdown score_tius(const TopologyRepresentation& extracted,
                         const TopologyRepresentation& truth,
                         const TiusWeights& weights,
                         const AlignmentParams& params) {
  weights.validate();
  if (truth.nodes.empty()) {
    raise(Errc::EmptyTruth, "ground truth has no nodes");
  }

  TiusBreakdown breakdown;
  breakdown.matching = align_nodes(extracted, truth, params);
  const NodeAlignment& alignment = breakdown.matching;

  // An empty alignment means nothing was identified; every facet scores 0.
  if (alignment.pairs.empty()) {
    return breakdown;
  }

  std::unordered_map<std::string, const TopologyNode*> truth_by_id;
  for (const auto& node : truth.nodes) truth_by_id[node.id] = &node;
  std::unordered_map<std::string, const TopologyNode*> extracted_by_id;
  for (const auto& node : extracted.nodes) extracted_by_id[node.id] = &node;

  breakdown.n_acc = static_cast<double>(alignment.pairs.size()) /
                    static_cast<double>(truth.nodes.size());

  size_t label_hits = 0;
  size_t kind_hits = 0;
  for (const auto& pair : alignment.pairs) {
    const TopologyNode* t = truth_by_id.at(pair.truth_id);
    const TopologyNode* e = extracted_by_id.at(pair.extracted_id);
    if (normalize_label(t->label) == normalize_label(e->label)) ++label_hits;
    if (t->kind == e->kind) ++kind_hits;
  }
  breakdown.nl_acc = static_cast<double>(label_hits) /
                     static_cast<double>(alignment.pairs.size());
  breakdown.ni_acc = static_cast<double>(kind_hits) /
                     static_cast<double>(alignment.pairs.size());

  std::unordered_map<std::string, std::string> mapped;
  for (const auto& pair : alignment.pairs) {
    mapped[pair.truth_id] = pair.extracted_id;
  }

  std::map<EndpointPair, std::vector<const TopologyLink*>> extracted_links;
  for (const auto& link : extracted.links) {
    extracted_links[ordered_pair(link.endpoint_a, link.endpoint_b)]
        .push_back(&link);
  }

  size_t links_matched = 0;
  size_t labeled_total = 0, labeled_hits = 0;
  size_t ifaced_total = 0, ifaced_hits = 0;
  for (const auto& link : truth.links) {
    auto a_it = mapped.find(link.endpoint_a);
    auto b_it = mapped.find(link.endpoint_b);
    bool matched = false;
    LinkFacts facts;
    if (a_it != mapped.end() && b_it != mapped.end()) {
      auto bucket = extracted_links.find(ordered_pair(a_it->second, b_it->second));
      if (bucket != extracted_links.end() && !bucket->second.empty()) {
        matched = true;
        for (const TopologyLink* candidate : bucket->second) {
          // Orient the candidate so its first endpoint corresponds to the
          // truth link's endpoint_a image.
          std::string cand_iface_a = candidate->iface_a;
          std::string cand_iface_b = candidate->iface_b;
          if (candidate->endpoint_a != a_it->second) {
            std::swap(cand_iface_a, cand_iface_b);
          }
          if (normalize_label(candidate->label) == normalize_label(link.label)) {
            facts.label_match = true;
          }
          if (normalize_label(cand_iface_a) == normalize_label(link.iface_a) &&
              normalize_label(cand_iface_b) == normalize_label(link.iface_b)) {
            facts.iface_match = true;
          }
        }
      }
    }
    if (!matched) continue;
    ++links_matched;
    if (!link.label.empty()) {
      ++labeled_total;
      if (facts.label_match) ++labeled_hits;
    }
    if (!link.iface_a.empty() || !link.iface_b.empty()) {
      ++ifaced_total;
      if (facts.iface_match) ++ifaced_hits;
    }
  }

  breakdown.l_acc = truth.links.empty()
                        ? 1.0
                        : static_cast<double>(links_matched) /
                              static_cast<double>(truth.links.size());
  breakdown.ll_acc = labeled_total == 0
                         ? 1.0
                         : static_cast<double>(labeled_hits) /
                               static_cast<double>(labeled_total);
  breakdown.lnl_acc = ifaced_total == 0
                          ? 1.0
                          : static_cast<double>(ifaced_hits) /
                                static_cast<double>(ifaced_total);

  breakdown.tius = weights.n * breakdown.n_acc + weights.nl * breakdown.nl_acc +
                   weights.ni * breakdown.ni_acc + weights.l * breakdown.l_acc +
                   weights.ll * breakdown.ll_acc +
                   weights.lnl * breakdown.lnl_acc;
  return breakdown;
}

// ---------------------------------------------------------------------------
// Rubric engine
// ---------------------------------------------------------------------------

double Rubric::max_total() const {
  double sum = 0.0;
  for (const auto& item : items) sum += item.points;
  return sum;
}

Rubric parse_rubric(const std::string& json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("items") ||
      !doc["items"].is_array()) {
    raise(Errc::InvalidConfig, "rubric must be an object with an items array");
  }
  Rubric rubric;
  std::set<std::string> ids;
  for (const auto& entry : doc["items"]) {
    RubricItem item;
    item.id = entry.value("id", "");
    item.description = entry.value("description", "");
    item.points = entry.value("points", 0.0);
    item.check = entry.value("check", "");
    if (item.id.empty()) raise(Errc::InvalidConfig, "rubric item without id");
    if (!ids.insert(item.id).second) {
      raise(Errc::InvalidConfig, "duplicate rubric item id '" + item.id + "'");
    }
    if (item.points < 0.0) {
      raise(Errc::InvalidConfig, "negative points on item '" + item.id + "'");
    }
    rubric.items.push_back(std::move(item));
  }
  if (rubric.max_total() <= 0.0) {
    raise(Errc::InvalidConfig, "rubric total points must be > 0");
  }
  return rubric;
}

Rubric load_rubric(const std::filesystem::path& path) {
  return parse_rubric(read_file(path));
}

namespace {

struct Predicate {
  std::string name;
  std::vector<std::string> args;
};

std::string trim_copy(const std::string& s) {
  size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// `name(arg1, arg2)`. Only the first comma separates arguments, so regex
// arguments may themselves contain commas.
Predicate parse_predicate(const std::string& check) {
  Predicate predicate;
  auto open = check.find('(');
  if (open == std::string::npos || check.back() != ')') {
    predicate.name = trim_copy(check);
    return predicate;
  }
  predicate.name = trim_copy(check.substr(0, open));
  std::string inner = check.substr(open + 1, check.size() - open - 2);
  auto comma = inner.find(',');
  if (comma == std::string::npos) {
    predicate.args.push_back(trim_copy(inner));
  } else {
    predicate.args.push_back(trim_copy(inner.substr(0, comma)));
    predicate.args.push_back(trim_copy(inner.substr(comma + 1)));
  }
  return predicate;
}

std::regex glob_to_regex(const std::string& glob) {
  std::string pattern;
  for (char c : normalize_label(glob)) {
    switch (c) {
      case '*': pattern += ".*"; break;
      case '?': pattern += '.'; break;
      default:
        if (std::string("\\^$.|+()[]{}").find(c) != std::string::npos) {
          pattern += '\\';
        }
        pattern += c;
    }
  }
  return std::regex(pattern);
}

long count_kind(const TopologyRepresentation& rep, DeviceKind kind) {
  return std::count_if(rep.nodes.begin(), rep.nodes.end(),
                       [&](const TopologyNode& n) { return n.kind == kind; });
}

}  // namespace

FssResult apply_rubric(const Rubric& rubric, const SpecificationBundle& before,
                       const SpecificationBundle& after,
                       const std::map<std::string, double>* manual_awards) {
  FssResult result;
  result.max_total = rubric.max_total();

  for (const auto& item : rubric.items) {
    Predicate predicate = parse_predicate(item.check);
    FssItemResult item_result;
    item_result.item_id = item.id;

    if (predicate.name == "manual") {
      if (manual_awards == nullptr || !manual_awards->count(item.id)) {
        raise(Errc::MissingManualAward,
              "no manual award for item '" + item.id + "'");
      }
      double awarded = manual_awards->at(item.id);
      if (awarded < 0.0 || awarded > item.points) {
        raise(Errc::InvalidRequest, "manual award for '" + item.id +
                                        "' outside [0, " +
                                        std::to_string(item.points) + "]");
      }
      item_result.awarded = awarded;
      item_result.evidence = "manual award";
    } else if (predicate.name == "node-added") {
      if (predicate.args.size() != 2) {
        raise(Errc::UnknownPredicate, "node-added needs (kind, count)");
      }
      DeviceKind kind = device_kind_from_string(predicate.args[0]);
      long wanted = std::strtol(predicate.args[1].c_str(), nullptr, 10);
      if (wanted < 1) {
        raise(Errc::UnknownPredicate, "node-added count must be >= 1");
      }
      long added = std::max<long>(
          0, count_kind(after.topology, kind) - count_kind(before.topology, kind));
      long credited = std::min(added, wanted);
      item_result.awarded =
          item.points * static_cast<double>(credited) / static_cast<double>(wanted);
      item_result.evidence = std::to_string(credited) + " of " +
                             std::to_string(wanted) + " " + predicate.args[0] +
                             " node(s) added";
    } else if (predicate.name == "link-between") {
      if (predicate.args.size() != 2) {
        raise(Errc::UnknownPredicate, "link-between needs (labelA, labelB)");
      }
      std::string want_a = normalize_label(predicate.args[0]);
      std::string want_b = normalize_label(predicate.args[1]);
      bool found = false;
      for (const auto& link : after.topology.links) {
        const TopologyNode* na = after.topology.find_node(link.endpoint_a);
        const TopologyNode* nb = after.topology.find_node(link.endpoint_b);
        if (na == nullptr || nb == nullptr) continue;
        std::string la = normalize_label(na->label);
        std::string lb = normalize_label(nb->label);
        if ((la == want_a && lb == want_b) || (la == want_b && lb == want_a)) {
          found = true;
          break;
        }
      }
      item_result.awarded = found ? item.points : 0.0;
      item_result.evidence = found ? "link present" : "link absent";
    } else if (predicate.name == "config-matches") {
      if (predicate.args.size() != 2) {
        raise(Errc::UnknownPredicate, "config-matches needs (glob, regex)");
      }
      std::regex device_pattern = glob_to_regex(predicate.args[0]);
      std::regex config_pattern(predicate.args[1]);
      bool found = false;
      std::string matched_device;
      for (const auto& [name, config] : after.configs.entries) {
        if (!std::regex_match(normalize_label(name), device_pattern)) continue;
        if (std::regex_search(config, config_pattern)) {
          found = true;
          matched_device = name;
          break;
        }
      }
      item_result.awarded = found ? item.points : 0.0;
      item_result.evidence =
          found ? "pattern found in '" + matched_device + "'" : "pattern not found";
    } else if (predicate.name == "config-added") {
      if (predicate.args.size() != 1) {
        raise(Errc::UnknownPredicate, "config-added needs (glob)");
      }
      std::regex device_pattern = glob_to_regex(predicate.args[0]);
      auto matches_before = [&](const std::string& name) {
        for (const auto& [before_name, _] : before.configs.entries) {
          if (normalize_label(before_name) == normalize_label(name)) return true;
        }
        return false;
      };
      bool found = false;
      std::string added_device;
      for (const auto& [name, config] : after.configs.entries) {
        if (!std::regex_match(normalize_label(name), device_pattern)) continue;
        if (!matches_before(name)) {
          found = true;
          added_device = name;
          break;
        }
      }
      item_result.awarded = found ? item.points : 0.0;
      item_result.evidence =
          found ? "new device '" + added_device + "' configured" : "no new device";
    } else {
      raise(Errc::UnknownPredicate,
            "unknown predicate '" + predicate.name + "' on item '" + item.id + "'");
    }

    result.total += item_result.awarded;
    result.per_item.push_back(std::move(item_result));
  }

  result.normalized = result.max_total > 0.0 ? result.total / result.max_total : 0.0;
  return result;
}

// ---------------------------------------------------------------------------
// EVSS ingestion and S3-Z
// ---------------------------------------------------------------------------

std::vector<EvssRecord> parse_evss_csv(const std::string& text) {
  std::vector<EvssRecord> records;
  std::set<std::pair<std::string, std::string>> seen;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first && line.rfind("run_id", 0) == 0) {
      first = false;
      continue;
    }
    first = false;
    std::vector<std::string> fields;
    std::istringstream fields_in(line);
    std::string field;
    while (std::getline(fields_in, field, ',')) fields.push_back(trim_copy(field));
    if (fields.size() != 4) {
      raise(Errc::InvalidConfig, "grader row needs 4 columns: " + line);
    }
    EvssRecord record{fields[0], fields[1], fields[2], 0.0};
    try {
      record.score = std::stod(fields[3]);
    } catch (const std::exception&) {
      raise(Errc::InvalidConfig, "bad score in grader row: " + line);
    }
    if (record.score < 0.0 || record.score > 100.0) {
      raise(Errc::InvalidConfig,
            "score outside [0, 100] for run '" + record.run_id + "'");
    }
    if (!seen.insert({record.run_id, record.grader_id}).second) {
      raise(Errc::InvalidConfig, "duplicate grader record for run '" +
                                     record.run_id + "', grader '" +
                                     record.grader_id + "'");
    }
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<EvssRecord> load_evss_csv(const std::filesystem::path& path) {
  return parse_evss_csv(read_file(path));
}

std::vector<double> zscores(const std::vector<double>& values) {
  double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                static_cast<double>(values.size());
  double variance = 0.0;
  for (double v : values) variance += (v - mean) * (v - mean);
  variance /= static_cast<double>(values.size());
  std::vector<double> out(values.size(), 0.0);
  if (variance <= 0.0) return out;
  double stddev = std::sqrt(variance);
  for (size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / stddev;
  return out;
}

std::vector<double> s3z(const std::vector<double>& fss_scores,
                        const std::vector<double>& evss_scores) {
  if (fss_scores.size() != evss_scores.size()) {
    raise(Errc::LengthMismatch,
          "score vectors differ in length: " + std::to_string(fss_scores.size()) +
              " vs " + std::to_string(evss_scores.size()));
  }
  if (fss_scores.size() < 2) {
    raise(Errc::DegenerateInput, "standardization needs at least 2 runs");
  }
  std::vector<double> z_fss = zscores(fss_scores);
  std::vector<double> z_evss = zscores(evss_scores);
  std::vector<double> out(z_fss.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = (z_fss[i] + z_evss[i]) / 2.0;
  return out;
}

// ---------------------------------------------------------------------------
// Component coverage
// ---------------------------------------------------------------------------

namespace {

bool has_content(const std::string& config) {
  return !std::all_of(config.begin(), config.end(),
                      [](unsigned char c) { return std::isspace(c); });
}

std::map<std::string, const std::string*> by_normalized_name(
    const DeviceConfigBundle& bundle) {
  std::map<std::string, const std::string*> out;
  for (const auto& [name, config] : bundle.entries) {
    out.emplace(normalize_label(name), &config);
  }
  return out;
}

}  // namespace

CoverageReport coverage_metrics(const DeviceConfigBundle& before,
                                const DeviceConfigBundle& after,
                                const CoverageExpectations& expectations) {
  auto before_map = by_normalized_name(before);
  auto after_map = by_normalized_name(after);

  CoverageReport report;

  for (const auto& device : expectations.expected_configured) {
    ++report.configured_expected;
    auto it = after_map.find(normalize_label(device));
    if (it != after_map.end() && has_content(*it->second)) {
      ++report.configured_hits;
    }
  }
  for (const auto& device : expectations.reconfigure_required) {
    ++report.reconfigured_expected;
    auto before_it = before_map.find(normalize_label(device));
    auto after_it = after_map.find(normalize_label(device));
    if (before_it != before_map.end() && after_it != after_map.end() &&
        *before_it->second != *after_it->second) {
      ++report.reconfigured_hits;
    }
  }
  for (const auto& device : expectations.expected_added) {
    ++report.added_expected;
    auto before_it = before_map.find(normalize_label(device));
    auto after_it = after_map.find(normalize_label(device));
    if (before_it == before_map.end() && after_it != after_map.end() &&
        has_content(*after_it->second)) {
      ++report.added_hits;
    }
  }

  auto fraction = [](long hits, long expected) {
    return expected == 0 ? 1.0
                         : static_cast<double>(hits) / static_cast<double>(expected);
  };
  report.configured_fraction =
      fraction(report.configured_hits, report.configured_expected);
  report.reconfigured_fraction =
      fraction(report.reconfigured_hits, report.reconfigured_expected);
  report.added_fraction = fraction(report.added_hits, report.added_expected);
  return report;
}

}  // namespace genet
