#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "genet/topo_model.hpp"

namespace genet {

/// Facet weights for the topology image understanding score. The defaults
/// split the combined link-label term so the vector sums to 1.
struct TiusWeights {
  double n = 0.30;
  double nl = 0.20;
  double ni = 0.05;
  double l = 0.35;
  double ll = 0.05;
  double lnl = 0.05;

  /// Throws InvalidConfig unless weights are non-negative and sum to 1
  /// within 1e-12.
  void validate() const;
};

TiusWeights parse_tius_weights(const std::string& json_text);

struct AlignmentParams {
  double label_weight = 0.7;
  double kind_weight = 0.3;
  double threshold = 0.5;
};

struct AlignmentPair {
  std::string truth_id;
  std::string extracted_id;
  double similarity = 0.0;

  bool operator==(const AlignmentPair&) const = default;
};

/// Injective partial mapping from truth nodes to extracted nodes.
struct NodeAlignment {
  std::vector<AlignmentPair> pairs;

  const AlignmentPair* pair_for_truth(std::string_view truth_id) const;
  double total_similarity() const;
};

/// Normalized edit similarity between two already-normalized labels;
/// two empty labels count as identical.
double label_similarity(const std::string& a, const std::string& b);

double node_similarity(const TopologyNode& truth, const TopologyNode& extracted,
                       const AlignmentParams& params = {});

/// Greedy matching over candidate pairs sorted by descending similarity,
/// ties broken by (truth id, extracted id); pairs below the threshold stay
/// unmatched.
NodeAlignment align_nodes(const TopologyRepresentation& extracted,
                          const TopologyRepresentation& truth,
                          const AlignmentParams& params = {});

struct TiusBreakdown {
  double n_acc = 0.0;
  double nl_acc = 0.0;
  double ni_acc = 0.0;
  double l_acc = 0.0;
  double ll_acc = 0.0;
  double lnl_acc = 0.0;
  double tius = 0.0;
  NodeAlignment matching;
};

/// Compares an extracted representation to ground truth over the six diagram
/// facets. With an empty alignment every facet is 0; other vacuous
/// denominators score 1.
TiusBreakdown score_tius(const TopologyRepresentation& extracted,
                         const TopologyRepresentation& truth,
                         const TiusWeights& weights = {},
                         const AlignmentParams& params = {});

// ---------------------------------------------------------------------------
// Rubric engine
// ---------------------------------------------------------------------------

struct RubricItem {
  std::string id;
  std::string description;
  double points = 0.0;
  std::string check;  // predicate expression or "manual"
};

struct Rubric {
  std::vector<RubricItem> items;

  double max_total() const;
};

Rubric parse_rubric(const std::string& json_text);
Rubric load_rubric(const std::filesystem::path& path);

struct FssItemResult {
  std::string item_id;
  double awarded = 0.0;
  std::string evidence;
};

struct FssResult {
  std::vector<FssItemResult> per_item;
  double total = 0.0;
  double max_total = 0.0;
  double normalized = 0.0;
};

/// Evaluates each rubric item against the before/after pair. Predicates:
///   node-added(kind, count)        proportional per-unit credit
///   link-between(labelA, labelB)   normalized-label endpoint match
///   config-matches(glob, regex)    regex search in matching devices' configs
///   config-added(glob)             device new in `after`
///   manual                         value supplied via manual_awards
FssResult apply_rubric(
    const Rubric& rubric, const SpecificationBundle& before,
    const SpecificationBundle& after,
    const std::map<std::string, double>* manual_awards = nullptr);

// ---------------------------------------------------------------------------
// EVSS ingestion and S3-Z
// ---------------------------------------------------------------------------

struct EvssRecord {
  std::string run_id;
  std::string group_id;
  std::string grader_id;
  double score = 0.0;  // [0, 100]
};

/// CSV columns: run_id, group_id, grader_id, score.
std::vector<EvssRecord> parse_evss_csv(const std::string& text);
std::vector<EvssRecord> load_evss_csv(const std::filesystem::path& path);

/// Population z-scores; a zero-variance vector standardizes to all zeros.
std::vector<double> zscores(const std::vector<double>& values);

/// Standardizes both vectors independently and averages them elementwise.
std::vector<double> s3z(const std::vector<double>& fss_scores,
                        const std::vector<double>& evss_scores);

// ---------------------------------------------------------------------------
// Component coverage
// ---------------------------------------------------------------------------

struct CoverageExpectations {
  std::vector<std::string> expected_configured;
  std::vector<std::string> reconfigure_required;
  std::vector<std::string> expected_added;
};

struct CoverageReport {
  double configured_fraction = 1.0;
  double reconfigured_fraction = 1.0;
  double added_fraction = 1.0;
  // Raw counts, for pooled aggregation across runs.
  long configured_hits = 0, configured_expected = 0;
  long reconfigured_hits = 0, reconfigured_expected = 0;
  long added_hits = 0, added_expected = 0;
};

/// Fractions of expectation sets satisfied by the after-bundle; an empty
/// expectation set yields fraction 1. Device names compare normalized.
CoverageReport coverage_metrics(const DeviceConfigBundle& before,
                                const DeviceConfigBundle& after,
                                const CoverageExpectations& expectations);

}  // namespace genet
