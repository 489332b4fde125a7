#include "ptspec/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <istream>
#include <ostream>
#include <sstream>

#include "ptspec/errors.hpp"

namespace ptspec {

namespace {

const char* command_name(Command c) {
  switch (c) {
    case Command::spectrum: return "spectrum";
    case Command::sweep: return "sweep";
    case Command::shifts: return "shifts";
    case Command::fit: return "fit";
    case Command::msbound: return "msbound";
    case Command::oracle_compare: return "oracle-compare";
    default: return "figure";
  }
}

nlohmann::json complex_json(const Complex& z) {
  return nlohmann::json{{"re", z.real()}, {"im", z.imag()}};
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

// The envelope is the only place a timestamp appears; data records never
// carry one, so CSV output is byte-identical across reruns.
void write_envelope(std::ostream& os, const nlohmann::json& config,
                    nlohmann::json records) {
  nlohmann::json env;
  env["schema_version"] = "1";
  env["config_echo"] = config;
  env["generated_at"] = timestamp();
  env["records"] = std::move(records);
  os << env.dump(2) << '\n';
}

void csv_preamble(std::ostream& os, const nlohmann::json& config) {
  os << "# config " << config.dump() << "\n";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void RunConfig::validate() const {
  params.validate(2.0 * level_range.second + 1.0);
  if (level_range.first < 0 || level_range.second < level_range.first)
    throw ConfigError("levels: need 0 <= n_min <= n_max (got " +
                      std::to_string(level_range.first) + ":" +
                      std::to_string(level_range.second) + ")");
  if (level_range.second > 89 && !allow_high_levels)
    throw ConfigError("levels: n_max > 89 needs --allow-high-levels");
  if (params.gamma < 0.0)
    throw ConfigError("gamma must be >= 0 (the -gamma spectrum is the complex "
                      "conjugate mirror)");
  if (!gamma_single) {
    if (gamma_stop < gamma_start)
      throw ConfigError("gamma grid: stop must be >= start");
    if (gamma_step <= 0.0 && gamma_stop > gamma_start)
      throw ConfigError("gamma grid: step must be > 0");
  }
  for (double g : g_list)
    if (g < 0.0) throw ConfigError("g values must be >= 0");
}

std::vector<double> RunConfig::gamma_grid() const {
  if (gamma_single) {
    if (gamma == 0.0) return {0.0};
    const int steps = std::max(1, static_cast<int>(std::ceil(gamma / gamma_step)));
    std::vector<double> grid;
    grid.reserve(steps + 1);
    for (int k = 0; k <= steps; ++k) grid.push_back(gamma * k / steps);
    return grid;
  }
  std::vector<double> grid;
  const int steps =
      gamma_stop > gamma_start
          ? std::max(1, static_cast<int>(std::round((gamma_stop - gamma_start) / gamma_step)))
          : 0;
  for (int k = 0; k <= steps; ++k)
    grid.push_back(gamma_start + (gamma_stop - gamma_start) * k / std::max(steps, 1));
  return grid;
}

std::vector<int> RunConfig::labels() const {
  std::vector<int> ls;
  for (int n = level_range.first; n <= level_range.second; ++n) ls.push_back(n);
  return ls;
}

nlohmann::json config_echo(const RunConfig& config) {
  nlohmann::json j;
  j["command"] = command_name(config.command);
  j["gamma"] = config.gamma_single
                   ? nlohmann::json{{"value", config.gamma}}
                   : nlohmann::json{{"start", config.gamma_start},
                                    {"stop", config.gamma_stop},
                                    {"step", config.gamma_step}};
  j["g_list"] = config.g_list.empty() ? nlohmann::json::array({config.params.g})
                                      : nlohmann::json(config.g_list);
  j["b"] = config.params.b;
  j["levels"] = {config.level_range.first, config.level_range.second};
  j["x_max"] = config.params.x_max;
  j["basis_dim"] = config.params.basis_cutoff;
  j["format"] = config.format == OutputFormat::csv ? "csv" : "json";
  if (config.command == Command::figure) j["figure"] = config.figure_id;
  if (config.command == Command::fit) {
    j["fit_model"] = config.fit_model;
    j["fit_range"] = {config.fit_n_min, config.fit_n_max};
  }
  return j;
}

std::vector<SpectralRow> to_rows(const std::vector<ContinuationPath>& paths) {
  std::vector<SpectralRow> rows;
  for (const auto& path : paths)
    for (const auto& pt : path.points)
      rows.push_back({path.n_label, pt.gamma, path.g, path.b, pt.mu, pt.residual_norm});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SpectralRow& a, const SpectralRow& z) {
                     if (a.n_label != z.n_label) return a.n_label < z.n_label;
                     return a.gamma < z.gamma;
                   });
  return rows;
}

std::vector<SpectralRow> to_rows(const std::vector<SpectralPoint>& points,
                                 double gamma) {
  std::vector<SpectralRow> rows;
  rows.reserve(points.size());
  for (const auto& pt : points)
    rows.push_back({pt.n_label, gamma, pt.params.g, pt.params.b, pt.mu,
                    pt.residual_norm});
  return rows;
}

void write_spectral(std::ostream& os, const std::vector<SpectralRow>& rows,
                    const nlohmann::json& config, OutputFormat format) {
  if (format == OutputFormat::csv) {
    csv_preamble(os, config);
    os << "n_label,gamma,g,b,re_mu,im_mu,residual_norm\n";
    for (const auto& r : rows)
      os << r.n_label << ',' << format_double(r.gamma) << ',' << format_double(r.g)
         << ',' << format_double(r.b) << ',' << format_double(r.mu.real()) << ','
         << format_double(r.mu.imag()) << ',' << format_double(r.residual_norm)
         << '\n';
    return;
  }
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : rows)
    records.push_back({{"n_label", r.n_label},
                       {"gamma", r.gamma},
                       {"g", r.g},
                       {"b", r.b},
                       {"mu", complex_json(r.mu)},
                       {"residual_norm", r.residual_norm}});
  write_envelope(os, config, std::move(records));
}

std::vector<SpectralRow> read_spectral(std::istream& is, OutputFormat format) {
  std::vector<SpectralRow> rows;
  if (format == OutputFormat::csv) {
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (!header_seen) {
        header_seen = true;
        if (line.rfind("n_label,", 0) != 0)
          throw IoError("read_spectral: unexpected CSV header: " + line);
        continue;
      }
      const auto f = split_csv_line(line);
      if (f.size() != 7) throw IoError("read_spectral: bad CSV row: " + line);
      SpectralRow r;
      r.n_label = std::stoi(f[0]);
      r.gamma = std::strtod(f[1].c_str(), nullptr);
      r.g = std::strtod(f[2].c_str(), nullptr);
      r.b = std::strtod(f[3].c_str(), nullptr);
      r.mu = {std::strtod(f[4].c_str(), nullptr), std::strtod(f[5].c_str(), nullptr)};
      r.residual_norm = std::strtod(f[6].c_str(), nullptr);
      rows.push_back(r);
    }
    return rows;
  }
  nlohmann::json env;
  try {
    is >> env;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("read_spectral: ") + e.what());
  }
  for (const auto& rec : env.at("records")) {
    SpectralRow r;
    r.n_label = rec.at("n_label").get<int>();
    r.gamma = rec.at("gamma").get<double>();
    r.g = rec.at("g").get<double>();
    r.b = rec.at("b").get<double>();
    r.mu = {rec.at("mu").at("re").get<double>(), rec.at("mu").at("im").get<double>()};
    r.residual_norm = rec.at("residual_norm").get<double>();
    rows.push_back(r);
  }
  return rows;
}

void write_branch_points(std::ostream& os, const std::vector<BranchPoint>& bps,
                         const nlohmann::json& config, OutputFormat format) {
  if (format == OutputFormat::csv) {
    csv_preamble(os, config);
    os << "gamma_c,re_mu_c,im_mu_c,label_lo,label_hi,kind,beta\n";
    for (const auto& bp : bps)
      os << format_double(bp.gamma_c) << ',' << format_double(bp.mu_c.real()) << ','
         << format_double(bp.mu_c.imag()) << ',' << bp.partner_labels.first << ','
         << bp.partner_labels.second << ','
         << (bp.kind == BranchKind::coalescence ? "coalescence" : "splitting") << ','
         << format_double(bp.beta) << '\n';
    return;
  }
  nlohmann::json records = nlohmann::json::array();
  for (const auto& bp : bps)
    records.push_back(
        {{"gamma_c", bp.gamma_c},
         {"mu_c", complex_json(bp.mu_c)},
         {"labels", {bp.partner_labels.first, bp.partner_labels.second}},
         {"kind", bp.kind == BranchKind::coalescence ? "coalescence" : "splitting"},
         {"beta", bp.beta}});
  write_envelope(os, config, std::move(records));
}

void write_shifts(std::ostream& os, const std::vector<ShiftRecord>& shifts,
                  const nlohmann::json& config, OutputFormat format) {
  if (format == OutputFormat::csv) {
    csv_preamble(os, config);
    os << "n,delta_mu_abs,is_complex,outlier\n";
    for (const auto& s : shifts)
      os << s.n << ',' << format_double(s.delta_mu_abs) << ','
         << (s.is_complex ? 1 : 0) << ',' << (s.outlier ? 1 : 0) << '\n';
    return;
  }
  nlohmann::json records = nlohmann::json::array();
  for (const auto& s : shifts)
    records.push_back({{"n", s.n},
                       {"delta_mu_abs", s.delta_mu_abs},
                       {"is_complex", s.is_complex},
                       {"outlier", s.outlier}});
  write_envelope(os, config, std::move(records));
}

void write_fits(std::ostream& os, const std::vector<FitResult>& fits,
                const nlohmann::json& config, OutputFormat format) {
  if (format == OutputFormat::csv) {
    csv_preamble(os, config);
    os << "model,slope,amplitude,r_squared,n_min,n_max,used_points,excluded_zero\n";
    for (const auto& f : fits)
      os << to_string(f.model) << ',' << format_double(f.slope) << ','
         << format_double(f.amplitude) << ',' << format_double(f.r_squared) << ','
         << f.n_range.first << ',' << f.n_range.second << ',' << f.used_points << ','
         << f.excluded_zero << '\n';
    return;
  }
  nlohmann::json records = nlohmann::json::array();
  for (const auto& f : fits)
    records.push_back({{"model", to_string(f.model)},
                       {"slope", f.slope},
                       {"amplitude", f.amplitude},
                       {"r_squared", f.r_squared},
                       {"n_range", {f.n_range.first, f.n_range.second}},
                       {"used_points", f.used_points},
                       {"excluded_zero", f.excluded_zero}});
  write_envelope(os, config, std::move(records));
}

void write_ms_report(std::ostream& os, const MSBoundReport& report,
                     const nlohmann::json& config, OutputFormat format,
                     bool include_pairs) {
  if (format == OutputFormat::csv) {
    csv_preamble(os, config);
    os << "alpha,C_tilde,M_const,n_max,all_valid_satisfied\n";
    os << format_double(report.alpha) << ',' << format_double(report.C_tilde) << ','
       << format_double(report.M_const) << ',' << report.n_max << ','
       << (report.all_valid_satisfied ? 1 : 0) << '\n';
    if (include_pairs) {
      os << "m,n,valid,satisfied\n";
      for (int m = 1; m <= report.n_max; ++m)
        for (int n = 1; n <= report.n_max; ++n)
          os << m << ',' << n << ',' << (report.valid(m, n) ? 1 : 0) << ','
             << (report.satisfied(m, n) ? 1 : 0) << '\n';
    }
    return;
  }
  nlohmann::json j{{"alpha", report.alpha},
                   {"C_tilde", report.C_tilde},
                   {"M_const", report.M_const},
                   {"n_max", report.n_max},
                   {"all_valid_satisfied", report.all_valid_satisfied}};
  if (include_pairs) {
    nlohmann::json pairs = nlohmann::json::array();
    for (int m = 1; m <= report.n_max; ++m)
      for (int n = 1; n <= report.n_max; ++n)
        pairs.push_back({{"m", m},
                         {"n", n},
                         {"valid", report.valid(m, n)},
                         {"satisfied", report.satisfied(m, n)}});
    j["pairs"] = std::move(pairs);
  }
  write_envelope(os, config, nlohmann::json::array({j}));
}

void write_oracle_compare(std::ostream& os, const std::vector<OracleCompareRow>& rows,
                          const nlohmann::json& config, OutputFormat format) {
  if (format == OutputFormat::csv) {
    csv_preamble(os, config);
    os << "n_label,re_mu_shooting,im_mu_shooting,re_mu_oracle,im_mu_oracle,abs_diff\n";
    for (const auto& r : rows)
      os << r.n_label << ',' << format_double(r.mu_shooting.real()) << ','
         << format_double(r.mu_shooting.imag()) << ','
         << format_double(r.mu_oracle.real()) << ','
         << format_double(r.mu_oracle.imag()) << ',' << format_double(r.abs_diff)
         << '\n';
    return;
  }
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : rows)
    records.push_back({{"n_label", r.n_label},
                       {"mu_shooting", complex_json(r.mu_shooting)},
                       {"mu_oracle", complex_json(r.mu_oracle)},
                       {"abs_diff", r.abs_diff}});
  write_envelope(os, config, std::move(records));
}

void write_figure_table(std::ostream& os, const FigureTable& table,
                        const nlohmann::json& config, OutputFormat format) {
  if (format == OutputFormat::csv) {
    csv_preamble(os, config);
    for (std::size_t c = 0; c < table.columns.size(); ++c)
      os << table.columns[c] << (c + 1 < table.columns.size() ? "," : "\n");
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (row[c]) os << format_double(*row[c]);
        os << (c + 1 < row.size() ? "," : "\n");
      }
    }
    return;
  }
  nlohmann::json records = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json rec;
    for (std::size_t c = 0; c < row.size() && c < table.columns.size(); ++c)
      if (row[c]) rec[table.columns[c]] = *row[c];
    records.push_back(std::move(rec));
  }
  write_envelope(os, config, std::move(records));
}

}  // namespace ptspec
