#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unityforest/common.hpp"

namespace unityforest {

enum class CovariateKind { Continuous, Nominal };

struct CovariateInfo {
  std::string name;
  CovariateKind kind = CovariateKind::Continuous;
  int num_categories = 0;               // J, nominal only
  std::vector<double> category_values;  // raw value of each category 1..J
};

// Column kinds and outcome declaration for CSV ingestion. For nominal
// columns a category count of 0 means "recode observed values to 1..J".
struct SchemaDecl {
  Task task = Task::Classification;
  std::string outcome_name;
  int num_classes = 0;  // 0 = infer from data (classification)
  std::vector<std::pair<std::string, int>> nominal;

  static SchemaDecl from_json(const std::string& json_text);
  std::string to_json() const;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin);

// Validated, fully typed dataset. Columns are stored column-major; nominal
// columns hold contiguous category codes 1..J.
struct Dataset {
  size_t n = 0;
  size_t p = 0;
  Task task = Task::Classification;
  int num_classes = 0;  // K, classification only
  std::vector<CovariateInfo> covariates;
  std::vector<std::vector<double>> columns;  // [p][n]
  std::vector<int32_t> labels;               // 1..K, classification
  std::vector<double> y;                     // regression

  std::string outcome_name = "y";

  Dataset subset(const std::vector<size_t>& rows) const;
};

Dataset validate_dataset(const CsvTable& table, const SchemaDecl& schema);
Dataset load_dataset_csv(const std::string& csv_path, const SchemaDecl& schema);

// Writes the dataset back out as CSV (re-coded nominal values, shortest
// round-trip number formatting) so that a write/read cycle is bit-identical.
void write_dataset_csv(const Dataset& ds, const std::string& path);
SchemaDecl schema_of(const Dataset& ds);

std::string format_double(double v);  // shortest round-trip representation

} // namespace unityforest
