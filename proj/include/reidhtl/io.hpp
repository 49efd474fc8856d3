#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "reidhtl/types.hpp"

namespace reidhtl::io {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(const std::string& s);

// Feature CSV: header `person_id,camera_id,f0,...,f{d-1}`.
void write_features(std::ostream& os, const FeatureTable& table);
FeatureTable read_features(std::istream& is);
void save_features(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable load_features(const std::filesystem::path& path);

// Metric file: `d`, then d lines of d space-separated floats.
void write_metric(std::ostream& os, const Metric& m);
Metric read_metric(std::istream& is);
void save_metric(const std::filesystem::path& path, const Metric& m);
Metric load_metric(const std::filesystem::path& path);

/// Plain comma-separated table without quoting; cells must not contain commas.
/// Lines starting with '#' are comments and are kept separately.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;

  std::size_t column(const std::string& name) const;
};

void write_csv(std::ostream& os, const CsvTable& t);
CsvTable read_csv(std::istream& is);
void save_csv(const std::filesystem::path& path, const CsvTable& t);
CsvTable load_csv(const std::filesystem::path& path);

// Weight file: `source,weight` rows, in source-pool order.
void save_weights(const std::filesystem::path& path, const std::vector<std::string>& source_names,
                  const WeightVector& w);
std::pair<std::vector<std::string>, WeightVector> load_weights(const std::filesystem::path& path);

// Objective trace: `iteration,objective`.
void save_trace(const std::filesystem::path& path,
                const std::vector<std::pair<int, double>>& trace);
std::vector<std::pair<int, double>> load_trace(const std::filesystem::path& path);

}  // namespace reidhtl::io
