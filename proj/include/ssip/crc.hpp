#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ssip/chain.hpp"
#include "ssip/nb_model.hpp"
#include "ssip/rng.hpp"

namespace ssip {

/// One captured individual: where, when, and which of the K lists saw it.
/// The pattern is the bitstring d1..dK read as a binary number with d1 the
/// most significant bit, so "001" (K=3) is 1 and "1010" (K=4) is 10.
struct CaptureHistory {
  int region = 0;
  int time_idx = 0;
  std::uint32_t pattern = 0;
};

/// List-intersection counts per (region, time) stratum. Every stratum
/// carries all 2^K - 1 nonzero-pattern cells, zero-filled where
/// unobserved; the all-zeros cell is absent by construction.
struct CaptureTable {
  int K = 0;
  int n_regions = 0;
  int T = 1;
  // counts[stratum][pattern - 1], stratum = region * T + t
  std::vector<std::vector<long>> counts;

  long count(int region, int t, std::uint32_t pattern) const;
  long stratum_total(int region, int t) const;
  long total() const;
};

CaptureTable build_intersection_table(int K, int n_regions, int T,
                                      const std::vector<CaptureHistory>& histories);

/// Log-linear design over the 2^K - 1 observable intersection cells:
/// intercept, main effects d1..dK, and all interaction products up to
/// max_order. Intercept and main effects are forced into every model.
struct CrcDesign {
  int K = 0;
  int max_order = 1;
  Eigen::MatrixXd X;  // (2^K - 1) x n_cols, rows by ascending pattern
  Eigen::ArrayXi forced;
  std::vector<std::vector<int>> column_members;  // 1-based list ids; empty = intercept
  std::vector<std::string> column_names;

  int n_rows() const { return static_cast<int>(X.rows()); }
  int n_cols() const { return static_cast<int>(X.cols()); }
  int n_unforced() const { return static_cast<int>((forced == 0).count()); }
};

CrcDesign build_design(int K, int max_order);

/// Stack the design over time slices to produce the count-engine inputs;
/// m_i = T * (2^K - 1) rows per region.
std::vector<NbRegionData> crc_region_data(const CaptureTable& table, const CrcDesign& design);

/// Posterior-predictive summary of the unobserved (all-zeros) cell.
struct UnseenEstimate {
  double mean = 0.0;
  double median = 0.0;
  double lo95 = 0.0;
  double hi95 = 0.0;
  double plugin = 0.0;  // h * exp(posterior mean of psi0), the model-average plug-in
  bool sparse = false;  // stratum had no captured individuals at all
};

/// Predictive distribution of Y0 ~ NB(h, p0) mixed over posterior draws of
/// psi0 = intercept + alpha_i + zeta_t (+ global level); mean, median and
/// equal-tailed 95% interval are computed from the exact mixture CDF, so
/// the result depends only on the multiset of draws.
UnseenEstimate estimate_unseen(const PosteriorChain& chain, const CrcDesign& design, int region,
                               int time_idx);

/// Aggregated estimate for a group of regions: per posterior draw the
/// member cells' predictive counts are drawn and summed.
UnseenEstimate estimate_unseen_group(const PosteriorChain& chain, const CrcDesign& design,
                                     const std::vector<int>& regions, int time_idx, Rng& rng);

struct CrcEval {
  double coverage = 0.0;
  double rmse = 0.0;                  // over posterior-median point estimates
  double mean_median_abs_diff = 0.0;  // mean |median - truth|
  double correlation = 0.0;           // Pearson, truth vs medians; NaN when degenerate
};

CrcEval evaluate_crc(const std::vector<UnseenEstimate>& estimates, const std::vector<double>& truth);

}  // namespace ssip
