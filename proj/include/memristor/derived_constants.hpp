#pragma once

#include <map>
#include <string>
#include <vector>

namespace memristor {

/// Envelope constants that the analysis proves to exist without giving values.
/// They are measured once by the scan tool (observed extreme times a 1.5
/// safety factor) and frozen in data/derived_constants.csv.
struct DerivedConstant {
  std::string name;
  double value = 0.0;
  double observed = 0.0;
  std::string description;
};

class DerivedConstants {
 public:
  /// Parses the CSV; lines starting with '#' are kept as provenance.
  static DerivedConstants load(const std::string& path);
  /// $MEMRISTOR_DATA_DIR/derived_constants.csv, falling back to the source tree.
  static DerivedConstants load_default();
  static std::string default_path();

  double get(const std::string& name) const;
  bool contains(const std::string& name) const { return by_name_.count(name) > 0; }
  const std::vector<std::string>& provenance() const { return provenance_; }
  const std::map<std::string, DerivedConstant>& all() const { return by_name_; }

 private:
  std::map<std::string, DerivedConstant> by_name_;
  std::vector<std::string> provenance_;
};

/// Safety factor applied to observed extremes.
inline constexpr double kDerivedSafetyFactor = 1.5;

}  // namespace memristor
