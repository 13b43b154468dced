#include "ccs/pq.hpp"

#include <stdexcept>
#include <string>

#include "ccs/kmeans.hpp"

namespace ccs {

PQCode PQCodebook::encode(const Descriptor& d) const {
  PQCode code;
  for (int s = 0; s < kPqSubvectors; ++s) {
    const float* sub = d.data() + s * kPqSubDim;
    int best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int c = 0; c < kPqCentroids; ++c) {
      const float* cent = blocks[s].data() + c * kPqSubDim;
      double d2 = 0.0;
      for (int j = 0; j < kPqSubDim; ++j) {
        const double diff = double(sub[j]) - double(cent[j]);
        d2 += diff * diff;
      }
      if (d2 < best_d2) {
        best_d2 = d2;
        best = c;
      }
    }
    code.indices[s] = static_cast<std::uint8_t>(best);
  }
  return code;
}

Descriptor PQCodebook::reconstruct(const PQCode& code) const {
  Descriptor out;
  for (int s = 0; s < kPqSubvectors; ++s) {
    out.segment<kPqSubDim>(s * kPqSubDim) =
        blocks[s].row(code.indices[s]).transpose();
  }
  return out;
}

DistanceTable PQCodebook::adc_table(const Descriptor& query) const {
  DistanceTable table;
  for (int s = 0; s < kPqSubvectors; ++s) {
    const float* sub = query.data() + s * kPqSubDim;
    for (int c = 0; c < kPqCentroids; ++c) {
      const float* cent = blocks[s].data() + c * kPqSubDim;
      double d2 = 0.0;
      for (int j = 0; j < kPqSubDim; ++j) {
        const double diff = double(sub[j]) - double(cent[j]);
        d2 += diff * diff;
      }
      table.entries[s * kPqCentroids + c] = static_cast<float>(d2);
    }
  }
  return table;
}

double adc_distance(const DistanceTable& table, const PQCode& code) {
  double sum = 0.0;
  for (int s = 0; s < kPqSubvectors; ++s) {
    sum += table.entries[s * kPqCentroids + code.indices[s]];
  }
  return sum;
}

PQCodebook train_pq(std::span<const Descriptor> descriptors,
                    const PqTrainOptions& opts) {
  const auto n = static_cast<Eigen::Index>(descriptors.size());
  if (n < kPqCentroids) {
    throw std::invalid_argument("train_pq: need at least " +
                                std::to_string(kPqCentroids) +
                                " descriptors, got " + std::to_string(n));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!is_finite(descriptors[i])) {
      throw std::invalid_argument("train_pq: non-finite descriptor at index " +
                                  std::to_string(i));
    }
  }

  PQCodebook cb;
  Eigen::MatrixXf sub(n, kPqSubDim);
  for (int s = 0; s < kPqSubvectors; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) {
      sub.row(i) = descriptors[i].segment<kPqSubDim>(s * kPqSubDim).transpose();
    }
    auto km = detail::kmeans(sub, kPqCentroids, opts.iterations,
                             opts.seed + static_cast<std::uint64_t>(s));
    cb.blocks[s] = km.centroids;
    cb.meta.objective[s] = std::move(km.objective);
  }
  return cb;
}

}  // namespace ccs
