#pragma once

#include <string>
#include <vector>

#include "ptspec/io.hpp"

namespace ptspec {

// One reproduction preset: the parameter sets and grids behind a single
// figure, loaded from presets/<id>.json (versioned with the repo).
struct FigurePreset {
  std::string id;
  std::vector<double> b_values;
  double g = 0.0;
  std::vector<double> g_list;        // per-series nonlinearities (fig8)
  std::vector<double> gamma_list;    // shift evaluation points (fig7)
  int n_min = 0;
  int n_max = 29;
  double gamma_start = 0.0;
  double gamma_stop = 5.0;
  double gamma_step = 0.05;
  double at_gamma = 0.0;             // shift figures: where shifts are taken
  std::string kind;                  // "spectrum_vs_gamma" or "shifts_vs_n"
  bool probe_detached = false;
  bool emit_im = true;
};

FigurePreset load_preset(const std::string& preset_dir, const std::string& id);

// Runs the preset and assembles the plot-ready table (one column per series).
FigureTable run_figure(const FigurePreset& preset, unsigned threads);

std::vector<std::string> known_figures();

}  // namespace ptspec
