#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ptspec/analysis.hpp"
#include "ptspec/continuation.hpp"
#include "ptspec/model.hpp"
#include "ptspec/oscillator_basis.hpp"
#include "ptspec/shooting.hpp"

namespace ptspec {

enum class OutputFormat { csv, json };

enum class Command { spectrum, sweep, shifts, fit, msbound, oracle_compare, figure };

struct RunConfig {
  Command command = Command::spectrum;
  ProblemParams params;
  std::pair<int, int> level_range{0, 29};
  double gamma_start = 0.0;
  double gamma_stop = 0.0;
  double gamma_step = 0.05;
  bool gamma_single = false;  // one target gamma instead of a grid
  double gamma = 0.0;
  std::vector<double> g_list;
  std::string output;
  OutputFormat format = OutputFormat::csv;
  std::string figure_id;
  std::string preset_dir = "presets";
  unsigned threads = 0;
  bool allow_high_levels = false;  // lifts the n_max <= 89 cap
  int fit_n_min = 10;
  int fit_n_max = 89;
  std::string fit_model = "power_law";

  void validate() const;  // throws ConfigError with an actionable message
  std::vector<double> gamma_grid() const;
  std::vector<int> labels() const;
};

nlohmann::json config_echo(const RunConfig& config);

// One serialized spectral record; the row schema shared by CSV and JSON.
struct SpectralRow {
  int n_label = 0;
  double gamma = 0.0;
  double g = 0.0;
  double b = 0.0;
  Complex mu{0.0, 0.0};
  double residual_norm = 0.0;

  bool operator==(const SpectralRow&) const = default;
};

std::vector<SpectralRow> to_rows(const std::vector<ContinuationPath>& paths);
std::vector<SpectralRow> to_rows(const std::vector<SpectralPoint>& points,
                                 double gamma);

// Wide table for figure data: one abscissa plus one column per series, blank
// cells where a series has no sample at that abscissa.
struct FigureTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;
};

// 17-significant-digit decimal, the round-trip format used in every CSV cell.
std::string format_double(double v);

void write_spectral(std::ostream& os, const std::vector<SpectralRow>& rows,
                    const nlohmann::json& config, OutputFormat format);
std::vector<SpectralRow> read_spectral(std::istream& is, OutputFormat format);

void write_branch_points(std::ostream& os, const std::vector<BranchPoint>& bps,
                         const nlohmann::json& config, OutputFormat format);
void write_shifts(std::ostream& os, const std::vector<ShiftRecord>& shifts,
                  const nlohmann::json& config, OutputFormat format);
void write_fits(std::ostream& os, const std::vector<FitResult>& fits,
                const nlohmann::json& config, OutputFormat format);
void write_ms_report(std::ostream& os, const MSBoundReport& report,
                     const nlohmann::json& config, OutputFormat format,
                     bool include_pairs);
struct OracleCompareRow {
  int n_label = 0;
  Complex mu_shooting{0.0, 0.0};
  Complex mu_oracle{0.0, 0.0};
  double abs_diff = 0.0;
};
void write_oracle_compare(std::ostream& os, const std::vector<OracleCompareRow>& rows,
                          const nlohmann::json& config, OutputFormat format);
void write_figure_table(std::ostream& os, const FigureTable& table,
                        const nlohmann::json& config, OutputFormat format);

}  // namespace ptspec
