#pragma once

#include <map>
#include <string>
#include <vector>

#include "ssip/chain.hpp"
#include "ssip/crc.hpp"
#include "ssip/gaussian_model.hpp"
#include "ssip/nb_model.hpp"

namespace ssip {

/// Region name <-> dense index mapping. Names come either from an explicit
/// sidecar file, or from the data itself (integer ids used directly,
/// anything else mapped in sorted order).
struct RegionLabels {
  std::vector<std::string> names;  // index -> label

  static RegionLabels identity(int n);
  /// two-column CSV "region_id,index"
  static RegionLabels from_file(const std::string& path, int n_regions);

  int size() const { return static_cast<int>(names.size()); }
  int resolve(const std::string& name) const;  // throws on unknown name
  const std::string& label(int index) const { return names[static_cast<std::size_t>(index)]; }
};

/// Minimal CSV reader: header row mandatory, comma separated, '.' decimal,
/// no quoting. Returns header + rows of fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};
CsvTable read_csv(const std::string& path);

struct GaussianCsv {
  std::vector<RegionData> regions;
  RegionLabels labels;
  int p_covariates = 0;  // columns in the file, excluding the added intercept
};
/// rows `region_id, y, x1..xp`; a leading intercept column is prepended
/// unless add_intercept is false.
GaussianCsv load_gaussian_csv(const std::string& path, int n_regions, const RegionLabels* labels,
                              bool add_intercept = true);

struct NbCsv {
  std::vector<NbRegionData> regions;
  RegionLabels labels;
  std::vector<long> time_values;  // sorted raw time labels; index = position
  int p_covariates = 0;
};
/// rows `region_id[, time], y, x1..xp`
NbCsv load_nb_csv(const std::string& path, int n_regions, const RegionLabels* labels,
                  bool add_intercept = true);

struct CaptureCsv {
  std::vector<CaptureHistory> histories;
  RegionLabels labels;
  std::vector<long> time_values;
  int K = 0;
};
/// rows `region_id[, time], pattern` with pattern a K-character 0/1 string
CaptureCsv load_capture_csv(const std::string& path, int n_regions, const RegionLabels* labels);

// ---- writers (UTF-8, comma separated, header row, %.10g numbers) ----

std::string format_double(double v);

void write_region_labels(const std::string& path, const RegionLabels& labels,
                         const std::string& config_hash = "");

void write_fit_summary(const std::string& path, const PosteriorChain& chain, const RegionLabels& labels);

void write_inclusion_matrix(const std::string& path, const PosteriorChain& chain,
                            const RegionLabels& labels);

void write_chain_dump(const std::string& path, const PosteriorChain& chain);

struct UnseenRow {
  std::string region;
  long time_value = 0;
  UnseenEstimate est;
};
void write_unseen_estimates(const std::string& path, const std::vector<UnseenRow>& rows,
                            const std::string& config_hash = "");

void write_alpha_summary(const std::string& path, const PosteriorChain& chain, const RegionLabels& labels);
void write_zeta_summary(const std::string& path, const PosteriorChain& chain,
                        const std::vector<long>& time_values);

}  // namespace ssip
