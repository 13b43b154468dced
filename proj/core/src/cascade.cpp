#include "ccs/cascade.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace ccs {

std::vector<std::uint32_t> coarse_lookup(const SubModel& model,
                                         const BinaryCode& code) {
  std::vector<std::uint32_t> rows;
  for (int k = 0; k < kSubCodes; ++k) {
    const auto bucket = model.lut().bucket(k, code.subcode(k));
    rows.insert(rows.end(), bucket.begin(), bucket.end());
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

std::vector<std::uint32_t> refine(const SubModel& model, const BinaryCode& code,
                                  std::span<const std::uint32_t> candidates,
                                  int l_r) {
  if (l_r < 1) throw std::invalid_argument("refine: l_r must be >= 1");
  std::array<std::vector<std::uint32_t>, kCodeBits + 1> bins;
  for (std::uint32_t row : candidates) {
    bins[hamming(code, model.point(row).code)].push_back(row);
  }
  std::vector<std::uint32_t> out;
  out.reserve(std::min<std::size_t>(candidates.size(), l_r));
  for (auto& bin : bins) {
    if (out.size() == static_cast<std::size_t>(l_r)) break;
    if (bin.empty()) continue;
    std::sort(bin.begin(), bin.end(), [&](std::uint32_t a, std::uint32_t b) {
      return model.point(a).id < model.point(b).id;
    });
    for (std::uint32_t row : bin) {
      out.push_back(row);
      if (out.size() == static_cast<std::size_t>(l_r)) break;
    }
  }
  return out;
}

MatchRecord precise(const SubModel& model, const DistanceTable& table,
                    std::span<const std::uint32_t> refined,
                    const CascadeParams& params, std::uint32_t query_index) {
  MatchRecord record;
  record.query_index = query_index;
  if (refined.empty()) return record;

  struct Scored {
    double d2;
    std::uint32_t id;
    std::uint32_t row;
  };
  std::vector<Scored> scored;
  scored.reserve(refined.size());
  for (std::uint32_t row : refined) {
    scored.push_back(
        {adc_distance(table, model.point(row).pq), model.point(row).id, row});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return a.d2 != b.d2 ? a.d2 < b.d2 : a.id < b.id;
  });

  record.distances.reserve(scored.size());
  for (const Scored& s : scored) {
    record.distances.push_back(static_cast<float>(std::sqrt(s.d2)));
  }
  if (scored.size() < 2) return record;  // no ratio defined

  const double d0 = record.distances[0];
  const double d1 = record.distances[1];
  const double ratio = d1 > 0.0 ? d0 / d1 : 1.0;

  const std::size_t cap = std::min<std::size_t>(scored.size(), params.m);
  if (!params.per_candidate_gate) {
    if (ratio < params.nu) {
      for (std::size_t j = 0; j < cap; ++j) {
        record.relaxed_matches.emplace_back(scored[j].id, record.distances[j]);
      }
    }
  } else {
    std::vector<std::size_t> kept;
    for (std::size_t j = 1; j < scored.size(); ++j) {
      const double dj = record.distances[j];
      if (dj > 0.0 && d0 / dj < params.nu) kept.push_back(j);
    }
    if (!kept.empty()) {
      kept.insert(kept.begin(), 0);  // best candidate anchors the list
      for (std::size_t j : kept) {
        if (record.relaxed_matches.size() == cap) break;
        record.relaxed_matches.emplace_back(scored[j].id, record.distances[j]);
      }
    }
  }

  if (ratio < params.nu_h && !record.relaxed_matches.empty()) {
    record.strict_match = record.relaxed_matches.front().first;
  }
  return record;
}

namespace {

struct PreparedQuery {
  std::uint32_t index;
  BinaryCode code;
  std::vector<std::uint32_t> coarse;
};

MatchRecord process_query(const SubModel& model, const QueryFeature& feature,
                          const PreparedQuery& prep, const PQCodebook& codebook,
                          const CascadeParams& params) {
  if (prep.coarse.empty()) {
    MatchRecord record;
    record.query_index = prep.index;
    return record;
  }
  const auto refined = refine(model, prep.code, prep.coarse, params.l_r);
  const DistanceTable table = codebook.adc_table(feature.descriptor);
  return precise(model, table, refined, params, prep.index);
}

CorrespondenceSet assemble(std::vector<MatchRecord> records,
                           const SubModel& model,
                           std::span<const QueryFeature> features) {
  std::sort(records.begin(), records.end(),
            [](const MatchRecord& a, const MatchRecord& b) {
              return a.query_index < b.query_index;
            });
  CorrespondenceSet set;
  set.total_queries = static_cast<std::uint32_t>(features.size());
  set.processed_queries = static_cast<std::uint32_t>(records.size());

  // Point id -> row for position lookup; candidate lists carry ids.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> id_to_row;
  id_to_row.reserve(model.size());
  for (std::uint32_t row = 0; row < static_cast<std::uint32_t>(model.size());
       ++row) {
    id_to_row.emplace_back(model.point(row).id, row);
  }
  std::sort(id_to_row.begin(), id_to_row.end());
  const auto row_of = [&](std::uint32_t id) {
    const auto it = std::lower_bound(
        id_to_row.begin(), id_to_row.end(), id,
        [](const auto& entry, std::uint32_t key) { return entry.first < key; });
    return it->second;
  };

  for (const MatchRecord& rec : records) {
    if (rec.relaxed_matches.empty()) continue;
    VerificationRecord v;
    v.query_index = rec.query_index;
    v.pixel = features[rec.query_index].pixel;
    for (const auto& [id, dist] : rec.relaxed_matches) {
      v.candidates.push_back({id, model.point(row_of(id)).position, dist});
    }
    if (rec.strict_match) {
      set.hypothesis.push_back(static_cast<std::uint32_t>(set.verification.size()));
    }
    set.verification.push_back(std::move(v));
  }
  set.records = std::move(records);
  return set;
}

}  // namespace

CorrespondenceSet prioritized_match(const SubModel& model,
                                    std::span<const QueryFeature> features,
                                    const HashModel& hash,
                                    const PQCodebook& codebook,
                                    const CascadeParams& params) {
  std::vector<PreparedQuery> prepared;
  prepared.reserve(features.size());
  for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(features.size());
       ++i) {
    PreparedQuery p;
    p.index = i;
    p.code = hash.hash(features[i].descriptor);
    p.coarse = coarse_lookup(model, p.code);
    prepared.push_back(std::move(p));
  }
  std::sort(prepared.begin(), prepared.end(),
            [](const PreparedQuery& a, const PreparedQuery& b) {
              return a.coarse.size() != b.coarse.size()
                         ? a.coarse.size() < b.coarse.size()
                         : a.index < b.index;
            });

  const std::uint32_t limit = params.n_early == 0
                                  ? std::numeric_limits<std::uint32_t>::max()
                                  : params.n_early;
  std::vector<MatchRecord> records;

  if (params.threads <= 1) {
    std::uint32_t strict_count = 0;
    for (const PreparedQuery& prep : prepared) {
      records.push_back(
          process_query(model, features[prep.index], prep, codebook, params));
      if (records.back().strict_match && ++strict_count >= limit) break;
    }
  } else {
    std::atomic<std::uint32_t> strict_count{0};
    std::atomic<std::size_t> next{0};
    std::vector<std::vector<MatchRecord>> partial(params.threads);
    std::vector<std::thread> pool;
    for (int t = 0; t < params.threads; ++t) {
      pool.emplace_back([&, t] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= prepared.size()) return;
          if (strict_count.load() >= limit) return;
          const PreparedQuery& prep = prepared[i];
          MatchRecord rec =
              process_query(model, features[prep.index], prep, codebook, params);
          if (rec.strict_match) strict_count.fetch_add(1);
          partial[t].push_back(std::move(rec));
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& part : partial) {
      records.insert(records.end(), std::make_move_iterator(part.begin()),
                     std::make_move_iterator(part.end()));
    }
  }
  return assemble(std::move(records), model, features);
}

CorrespondenceSet strict_only(const CorrespondenceSet& set) {
  CorrespondenceSet out;
  out.total_queries = set.total_queries;
  out.processed_queries = set.processed_queries;
  for (std::uint32_t idx : set.hypothesis) {
    VerificationRecord v = set.verification[idx];
    v.candidates.resize(1);
    out.hypothesis.push_back(static_cast<std::uint32_t>(out.verification.size()));
    out.verification.push_back(std::move(v));
  }
  for (const MatchRecord& rec : set.records) {
    if (!rec.strict_match) continue;
    MatchRecord copy = rec;
    copy.relaxed_matches.resize(1);
    out.records.push_back(std::move(copy));
  }
  return out;
}

CorrespondenceSet truncate_to_best(const CorrespondenceSet& set) {
  CorrespondenceSet out = set;
  for (VerificationRecord& v : out.verification) v.candidates.resize(1);
  for (MatchRecord& rec : out.records) {
    if (rec.relaxed_matches.size() > 1) rec.relaxed_matches.resize(1);
  }
  return out;
}

}  // namespace ccs
