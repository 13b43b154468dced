#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ccs/features.hpp"
#include "ccs/submodel.hpp"

namespace ccs {

struct CascadeParams {
  int l_r = 40;          // refined list size
  float nu_h = 0.8f;     // strict ratio threshold
  float nu = 0.9f;       // relaxed ratio threshold
  int m = 5;             // candidates kept per query after precise search
  std::uint32_t n_early = 100;  // strict matches that end prioritized search;
                                // 0 disables early stopping
  // Literal per-candidate relaxed gate (d0/dj < nu admits candidate j, with
  // the top candidate prepended if any pass) instead of gating the whole
  // list on d0/d1. Admits a superset of the default.
  bool per_candidate_gate = false;
  int threads = 1;  // >1 processes queries concurrently; the processed set
                    // then depends on scheduling, matches per query do not
};

// Outcome of the precise stage for one query.
struct MatchRecord {
  std::uint32_t query_index = 0;
  std::optional<std::uint32_t> strict_match;  // point id, set iff d0/d1 < nu_h
  // (point id, distance) ascending; at most `m`, non-empty iff the relaxed
  // gate passed. When strict_match is set it equals relaxed_matches.front().
  std::vector<std::pair<std::uint32_t, float>> relaxed_matches;
  std::vector<float> distances;  // distances of the full re-ranked list
};

struct ScoredCandidate {
  std::uint32_t point_id = 0;
  Eigen::Vector3f position = Eigen::Vector3f::Zero();
  float distance = 0.0f;
};

struct VerificationRecord {
  std::uint32_t query_index = 0;
  Eigen::Vector2f pixel = Eigen::Vector2f::Zero();
  std::vector<ScoredCandidate> candidates;  // ascending distance
};

// 2D-3D matches of one query image against one sub-model: the strict 1-1
// pairs seed pose hypotheses, the relaxed 1-many lists are what hypotheses
// are verified against.
struct CorrespondenceSet {
  std::vector<VerificationRecord> verification;  // ascending query_index
  std::vector<std::uint32_t> hypothesis;         // indices into verification
  std::vector<MatchRecord> records;              // every processed query
  std::uint32_t total_queries = 0;
  std::uint32_t processed_queries = 0;

  std::size_t n_h() const { return hypothesis.size(); }
  std::size_t n_q() const { return verification.size(); }
};

// Union (deduplicated, ascending row order) of the 8 bucket lists addressed
// by the query code's sub-codes. By the pigeonhole principle this retrieves
// every stored code within Hamming distance 7.
std::vector<std::uint32_t> coarse_lookup(const SubModel& model,
                                         const BinaryCode& code);

// Top `l_r` candidates by full 128-bit Hamming distance, ties by ascending
// point id, via one counting pass over the 129 possible distances.
std::vector<std::uint32_t> refine(const SubModel& model, const BinaryCode& code,
                                  std::span<const std::uint32_t> candidates,
                                  int l_r);

// Re-ranks by asymmetric PQ distance and applies both ratio tests on
// non-squared distances. A single candidate leaves no ratio defined and is
// rejected.
MatchRecord precise(const SubModel& model, const DistanceTable& table,
                    std::span<const std::uint32_t> refined,
                    const CascadeParams& params, std::uint32_t query_index);

// Full cascade over one query image. Coarse lookups run for all features
// first; refine+precise run in ascending candidate-list-size order and stop
// once n_early strict matches exist.
CorrespondenceSet prioritized_match(const SubModel& model,
                                    std::span<const QueryFeature> features,
                                    const HashModel& hash,
                                    const PQCodebook& codebook,
                                    const CascadeParams& params = {});

// Conventional-matching view: verification reduced to the strict pairs only.
CorrespondenceSet strict_only(const CorrespondenceSet& set);

// Same queries, candidate lists truncated to their best entry.
CorrespondenceSet truncate_to_best(const CorrespondenceSet& set);

}  // namespace ccs
