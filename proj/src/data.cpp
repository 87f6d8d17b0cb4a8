#include "unityforest/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace unityforest {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
  if (b == e) return false;
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

std::string cell_location(size_t row, const std::string& column) {
  return "row " + std::to_string(row + 1) + ", column '" + column + "'";
}

} // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

SchemaDecl SchemaDecl::from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid schema JSON: ") + e.what());
  }
  SchemaDecl s;
  const std::string task = j.value("task", std::string("classification"));
  if (task == "classification") {
    s.task = Task::Classification;
  } else if (task == "regression") {
    s.task = Task::Regression;
  } else {
    throw ValidationError("schema task must be 'classification' or 'regression', got '" + task +
                          "'");
  }
  if (!j.contains("outcome")) throw ValidationError("schema must name the outcome column");
  s.outcome_name = j.at("outcome").get<std::string>();
  s.num_classes = j.value("classes", 0);
  if (j.contains("nominal")) {
    for (auto& [name, val] : j.at("nominal").items()) {
      s.nominal.emplace_back(name, val.get<int>());
    }
  }
  return s;
}

std::string SchemaDecl::to_json() const {
  nlohmann::json j;
  j["task"] = task_name(task);
  j["outcome"] = outcome_name;
  if (num_classes > 0) j["classes"] = num_classes;
  nlohmann::json nom = nlohmann::json::object();
  for (const auto& [name, cats] : nominal) nom[name] = cats;
  j["nominal"] = nom;
  return j.dump(2);
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
  CsvTable table;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool any_char = false;
  auto end_field = [&]() {
    fields.push_back(field);
    field.clear();
  };
  auto end_row = [&](size_t line) {
    end_field();
    if (table.header.empty()) {
      table.header = fields;
    } else {
      if (fields.size() != table.header.size()) {
        throw ValidationError(origin + ": line " + std::to_string(line) + " has " +
                              std::to_string(fields.size()) + " fields, expected " +
                              std::to_string(table.header.size()));
      }
      table.rows.push_back(fields);
    }
    fields.clear();
    any_char = false;
  };
  size_t line = 1;
  for (size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      any_char = true;
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        any_char = true;
        break;
      case ',':
        end_field();
        any_char = true;
        break;
      case '\r':
        break;
      case '\n':
        if (any_char || !fields.empty() || !field.empty()) end_row(line);
        ++line;
        break;
      default:
        field += c;
        any_char = true;
    }
  }
  if (in_quotes) throw ValidationError(origin + ": unterminated quoted field");
  if (any_char || !fields.empty() || !field.empty()) end_row(line);
  if (table.header.empty()) throw ValidationError(origin + ": missing header row");
  return table;
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_file(path), path); }

Dataset validate_dataset(const CsvTable& table, const SchemaDecl& schema) {
  Dataset ds;
  ds.task = schema.task;
  ds.outcome_name = schema.outcome_name;

  std::map<std::string, size_t> col_index;
  for (size_t c = 0; c < table.header.size(); ++c) col_index[table.header[c]] = c;
  auto it = col_index.find(schema.outcome_name);
  if (it == col_index.end()) {
    throw ValidationError("outcome column '" + schema.outcome_name + "' not found in header");
  }
  const size_t outcome_col = it->second;

  std::map<std::string, int> nominal;
  for (const auto& [name, cats] : schema.nominal) {
    if (!col_index.count(name)) {
      throw ValidationError("nominal column '" + name + "' not found in header");
    }
    if (name == schema.outcome_name) {
      throw ValidationError("outcome column cannot be declared nominal");
    }
    nominal[name] = cats;
  }

  ds.n = table.rows.size();
  if (ds.n < 1) throw ValidationError("dataset has no data rows");
  ds.p = table.header.size() - 1;
  if (ds.p < 1) throw ValidationError("dataset has no covariate columns");

  // Parse all cells first; every error names its (row, column).
  std::vector<std::vector<double>> raw(table.header.size(), std::vector<double>(ds.n));
  for (size_t r = 0; r < ds.n; ++r) {
    for (size_t c = 0; c < table.header.size(); ++c) {
      const std::string& cell = table.rows[r][c];
      if (cell.empty()) {
        throw ValidationError("missing value at " + cell_location(r, table.header[c]));
      }
      if (!parse_double(cell, raw[c][r])) {
        throw ValidationError("non-numeric value '" + cell + "' at " +
                              cell_location(r, table.header[c]));
      }
      if (!std::isfinite(raw[c][r])) {
        throw ValidationError("non-finite value at " + cell_location(r, table.header[c]));
      }
    }
  }

  // Outcome.
  if (ds.task == Task::Classification) {
    ds.labels.resize(ds.n);
    int max_label = 0;
    for (size_t r = 0; r < ds.n; ++r) {
      const double v = raw[outcome_col][r];
      const int32_t lab = static_cast<int32_t>(std::llround(v));
      if (static_cast<double>(lab) != v || lab < 1) {
        throw ValidationError("class label must be an integer >= 1 at " +
                              cell_location(r, schema.outcome_name));
      }
      if (schema.num_classes > 0 && lab > schema.num_classes) {
        throw ValidationError("class label " + std::to_string(lab) +
                              " outside declared 1.." + std::to_string(schema.num_classes) +
                              " at " + cell_location(r, schema.outcome_name));
      }
      ds.labels[r] = lab;
      max_label = std::max(max_label, static_cast<int>(lab));
    }
    ds.num_classes = schema.num_classes > 0 ? schema.num_classes : max_label;
    if (ds.num_classes < 2) {
      throw ValidationError("classification requires at least 2 classes");
    }
  } else {
    ds.y.resize(ds.n);
    for (size_t r = 0; r < ds.n; ++r) ds.y[r] = raw[outcome_col][r];
  }

  // Covariates, in header order minus the outcome.
  for (size_t c = 0; c < table.header.size(); ++c) {
    if (c == outcome_col) continue;
    CovariateInfo info;
    info.name = table.header[c];
    auto nit = nominal.find(info.name);
    if (nit == nominal.end()) {
      info.kind = CovariateKind::Continuous;
      ds.columns.push_back(raw[c]);
    } else {
      info.kind = CovariateKind::Nominal;
      std::vector<double> col = raw[c];
      std::set<double> uniq(col.begin(), col.end());
      for (size_t r = 0; r < ds.n; ++r) {
        const double v = col[r];
        if (static_cast<double>(std::llround(v)) != v) {
          throw ValidationError("nominal value must be an integer code at " +
                                cell_location(r, info.name));
        }
      }
      const int declared = nit->second;
      if (declared > 0) {
        // Values must already be contiguous codes 1..J.
        info.num_categories = declared;
        for (size_t r = 0; r < ds.n; ++r) {
          if (col[r] < 1 || col[r] > declared) {
            throw ValidationError("nominal code " + format_double(col[r]) +
                                  " outside declared 1.." + std::to_string(declared) + " at " +
                                  cell_location(r, info.name));
          }
        }
        info.category_values.resize(static_cast<size_t>(declared));
        for (int jcat = 0; jcat < declared; ++jcat) {
          info.category_values[static_cast<size_t>(jcat)] = jcat + 1;
        }
      } else {
        // Recode observed values to 1..J by ascending rank.
        std::vector<double> values(uniq.begin(), uniq.end());
        info.num_categories = static_cast<int>(values.size());
        info.category_values = values;
        std::map<double, double> code;
        for (size_t k = 0; k < values.size(); ++k) code[values[k]] = static_cast<double>(k + 1);
        for (size_t r = 0; r < ds.n; ++r) col[r] = code[col[r]];
      }
      ds.columns.push_back(std::move(col));
    }
    ds.covariates.push_back(std::move(info));
  }
  return ds;
}

Dataset load_dataset_csv(const std::string& csv_path, const SchemaDecl& schema) {
  return validate_dataset(read_csv(csv_path), schema);
}

Dataset Dataset::subset(const std::vector<size_t>& rows) const {
  Dataset out;
  out.n = rows.size();
  out.p = p;
  out.task = task;
  out.num_classes = num_classes;
  out.covariates = covariates;
  out.outcome_name = outcome_name;
  out.columns.resize(p);
  for (size_t c = 0; c < p; ++c) {
    out.columns[c].resize(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) out.columns[c][i] = columns[c][rows[i]];
  }
  if (task == Task::Classification) {
    out.labels.resize(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) out.labels[i] = labels[rows[i]];
  } else {
    out.y.resize(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) out.y[i] = y[rows[i]];
  }
  return out;
}

void write_dataset_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  for (size_t c = 0; c < ds.p; ++c) out << ds.covariates[c].name << ',';
  out << ds.outcome_name << '\n';
  for (size_t r = 0; r < ds.n; ++r) {
    for (size_t c = 0; c < ds.p; ++c) out << format_double(ds.columns[c][r]) << ',';
    if (ds.task == Task::Classification) {
      out << ds.labels[r];
    } else {
      out << format_double(ds.y[r]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

SchemaDecl schema_of(const Dataset& ds) {
  SchemaDecl s;
  s.task = ds.task;
  s.outcome_name = ds.outcome_name;
  s.num_classes = ds.task == Task::Classification ? ds.num_classes : 0;
  for (const auto& cov : ds.covariates) {
    if (cov.kind == CovariateKind::Nominal) s.nominal.emplace_back(cov.name, cov.num_categories);
  }
  return s;
}

} // namespace unityforest
