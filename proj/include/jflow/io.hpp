#pragma once

#include "jflow/lattice.hpp"
#include "jflow/rational.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace jflow {

using Json = nlohmann::json;

/// Fixed 17-significant-digit formatting; every floating value that reaches
/// a report goes through here so repeated runs are byte-identical.
inline std::string formatDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string rationalToJson(const Rational& r) { return r.str(); }

inline Rational rationalFromJson(const Json& j, const std::string& field) {
  if (j.is_number_integer()) return Rational(static_cast<long long>(j.get<int64_t>()));
  if (j.is_string()) {
    try {
      return Rational::fromString(j.get<std::string>());
    } catch (const std::exception& e) {
      throw std::invalid_argument("field '" + field + "': " + e.what());
    }
  }
  throw std::invalid_argument("field '" + field + "': expected rational as \"p/q\" string");
}

struct CsvWriter {
  std::ofstream out;
  bool line_started = false;

  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out(path) {
    if (!out) throw std::runtime_error("cannot open " + path.string());
    for (size_t i = 0; i < header.size(); ++i) {
      if (i) out << ",";
      out << header[i];
    }
    out << "\n";
  }

  CsvWriter& field(double v) {
    if (line_started) out << ",";
    out << formatDouble(v);
    line_started = true;
    return *this;
  }
  CsvWriter& field(const std::string& v) {
    if (line_started) out << ",";
    out << v;
    line_started = true;
    return *this;
  }
  CsvWriter& field(long long v) {
    if (line_started) out << ",";
    out << v;
    line_started = true;
    return *this;
  }
  void endRow() {
    out << "\n";
    line_started = false;
  }
};

inline void writeJsonFile(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << j.dump(2) << "\n";
}

inline Json readJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Json j;
  in >> j;
  return j;
}

/// Parses a lattice/sheaf document:
/// {"lattice": {"basis": [...], "gram": [["p/q", ...], ...]},
///  "classes": {"omega": ["p/q", ...], ...},
///  "sheaves": {"E": {"rank": "2", "ch1": [...], "ch2": "104"}, ...},
///  "curves": [[...], ...]}
struct StabilityDocument {
  SurfaceLattice lattice;
  std::map<std::string, LatticeClass> classes;
  std::map<std::string, SheafChern> sheaves;
  std::vector<LatticeClass> curves;
  std::string ambient;  // name of the ambient sheaf, empty if absent
  std::vector<long long> k_samples{100, 1000};

  explicit StabilityDocument(SurfaceLattice lat) : lattice(std::move(lat)) {}
};

inline StabilityDocument parseStabilityDocument(const Json& j) {
  if (!j.contains("lattice"))
    throw std::invalid_argument("document: missing 'lattice'");
  const Json& jl = j.at("lattice");
  std::vector<std::string> basis = jl.at("basis").get<std::vector<std::string>>();
  const Json& jg = jl.at("gram");
  const auto n = static_cast<Eigen::Index>(basis.size());
  RationalMatrix gram(n, n);
  if (static_cast<Eigen::Index>(jg.size()) != n)
    throw std::invalid_argument("lattice.gram: wrong row count");
  for (Eigen::Index r = 0; r < n; ++r) {
    if (static_cast<Eigen::Index>(jg.at(r).size()) != n)
      throw std::invalid_argument("lattice.gram: wrong column count");
    for (Eigen::Index c = 0; c < n; ++c)
      gram(r, c) = rationalFromJson(jg.at(r).at(c), "lattice.gram");
  }

  StabilityDocument doc(SurfaceLattice(std::move(basis), std::move(gram)));

  auto parseClass = [&](const Json& arr, const std::string& field) {
    if (static_cast<Eigen::Index>(arr.size()) != n)
      throw std::invalid_argument(field + ": wrong coefficient count");
    RationalVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rationalFromJson(arr.at(i), field);
    return LatticeClass(doc.lattice, std::move(v));
  };

  if (j.contains("classes"))
    for (const auto& [name, arr] : j.at("classes").items())
      doc.classes.emplace(name, parseClass(arr, "classes." + name));
  if (j.contains("sheaves"))
    for (const auto& [name, js] : j.at("sheaves").items()) {
      doc.sheaves.emplace(
          name, SheafChern(rationalFromJson(js.at("rank"), name + ".rank"),
                           parseClass(js.at("ch1"), name + ".ch1"),
                           rationalFromJson(js.at("ch2"), name + ".ch2")));
    }
  if (j.contains("curves"))
    for (const auto& arr : j.at("curves")) doc.curves.push_back(parseClass(arr, "curves"));
  if (j.contains("ambient"))
    doc.ambient = j.at("ambient").get<std::string>();
  else if (doc.sheaves.count("E"))
    doc.ambient = "E";
  if (j.contains("k_samples"))
    doc.k_samples = j.at("k_samples").get<std::vector<long long>>();

  for (const auto& [key, val] : j.items()) {
    (void)val;
    if (key != "lattice" && key != "classes" && key != "sheaves" && key != "curves" &&
        key != "ambient" && key != "k_samples")
      throw std::invalid_argument("document: unknown key '" + key + "'");
  }
  return doc;
}

}  // namespace jflow
