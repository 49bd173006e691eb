#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace memristor {

class PlotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column by name; throws PlotError if absent.
  std::vector<double> column(const std::string& name) const;
  bool has(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

/// Writes energy.svg (E and dissipation), mass_D.svg and, when state dumps
/// exist, profiles.svg into <run_dir>/plots. Returns the files written.
/// Throws PlotError when steps.csv is missing or empty.
std::vector<std::filesystem::path> plot_run(const std::filesystem::path& run_dir);

}  // namespace memristor
