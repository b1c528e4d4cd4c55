#ifndef WAVE_CONFIG_HPP
#define WAVE_CONFIG_HPP

#include "wave/minimize.hpp"
#include "wave/potential.hpp"
#include "wave/profile.hpp"
#include "wave/speed.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wave {

struct PotentialConfig {
  std::string variant = "scalar_cubic";
  double alpha = 0.6;
  double beta = 1.2;
  std::vector<Monomial<double>> terms;
  Point<double> well_b;
  std::optional<Box<double>> box;
};

struct GridConfig {
  std::optional<double> x_left, x_right;  ///< default_grid ends when absent
  double h = 0.01;
  Spacing refinement = Spacing::uniform;
  double ratio = 1.02;
  double h_max = 0.05;
};

struct RunConfig {
  std::string path;  ///< file the config was read from; relative paths resolve against its directory
  PotentialConfig potential;
  GridConfig grid;
  MinimizeOptions solver;
  SpeedOptions speed;
  std::optional<double> bounds_c;
  std::vector<double> gamma_c_list;  ///< [gamma] c or c_list
  bool gamma_warm_start = true;
  std::optional<double> verify_c;
  double verify_gamma_hat = 0;
  std::string verify_profile;
  std::string out_dir = "wave_out";
  std::string report_name = "report.json";
  std::vector<std::string> sections;  ///< sections present in the file
};

/// Parses the INI-style run configuration. Unknown sections or keys, duplicate
/// keys and out-of-range values raise config_error with "line N: [section] key" context.
RunConfig parse_config(const std::string& text, const std::string& path = "<config>");
RunConfig load_config(const std::string& path);

/// Potential described by the [potential] section.
PotentialSpec<double> make_potential(const PotentialConfig& cfg);

/// Grid described by [grid]; missing ends come from default_grid.
Grid<double> make_grid(const GridConfig& cfg, const PotentialSpec<double>& spec,
                       const PotentialConstants<double>& consts);

/// Path relative to the config file's directory unless absolute.
std::string resolve_path(const RunConfig& cfg, const std::string& p);

}  // namespace wave

#endif  // WAVE_CONFIG_HPP
