#include "memristor/derived_constants.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace memristor {

DerivedConstants DerivedConstants::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open derived constants file " + path);
  DerivedConstants out;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      out.provenance_.push_back(line.substr(line.find_first_not_of("# ")));
      continue;
    }
    if (!header_seen) {
      if (line.rfind("name,value,observed,description", 0) != 0) {
        throw std::runtime_error(path + ": unexpected header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    std::istringstream row(line);
    DerivedConstant c;
    std::string value, observed;
    if (!std::getline(row, c.name, ',') || !std::getline(row, value, ',') || !std::getline(row, observed, ',')) {
      throw std::runtime_error(path + ": malformed row '" + line + "'");
    }
    std::getline(row, c.description);
    c.value = std::stod(value);
    c.observed = std::stod(observed);
    out.by_name_[c.name] = c;
  }
  if (out.by_name_.empty()) throw std::runtime_error(path + ": no constants");
  return out;
}

std::string DerivedConstants::default_path() {
  if (const char* dir = std::getenv("MEMRISTOR_DATA_DIR"); dir && *dir) {
    return std::string(dir) + "/derived_constants.csv";
  }
  return std::string(MEMRISTOR_DATA_DIR) + "/derived_constants.csv";
}

DerivedConstants DerivedConstants::load_default() { return load(default_path()); }

double DerivedConstants::get(const std::string& name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) throw std::out_of_range("derived constant '" + name + "' not found");
  return it->second.value;
}

}  // namespace memristor
