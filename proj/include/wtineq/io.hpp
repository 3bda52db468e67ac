#pragma once

// JSON serialisation of reports, a small schema validator for experiment
// configs (unknown keys are rejected with their key path), and CSV tables.

#include "wtineq/report.hpp"

#include <json.hpp>

#include <sstream>

namespace wtineq {

using Json = nlohmann::json;

/// Invalid configuration; `path` is the dotted key path of the offending entry.
class ConfigError : public DomainError {
 public:
  ConfigError(std::string path, const std::string& message)
      : DomainError(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline Json finite_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const ExperimentReport& r) {
  Json inputs = Json::object();
  for (const auto& [k, v] : r.inputs) inputs[k] = finite_json(v);
  Json metrics = Json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = optional_json(v);
  return Json{{"id", r.id},
              {"inequality", r.inequality},
              {"anchor", r.anchor},
              {"inputs", inputs},
              {"left", optional_json(r.left)},
              {"right", optional_json(r.right)},
              {"left_se", optional_json(r.left_se)},
              {"right_se", optional_json(r.right_se)},
              {"lower", optional_json(r.lower)},
              {"upper", optional_json(r.upper)},
              {"metrics", metrics},
              {"verdict", to_string(r.verdict)},
              {"wall_seconds", finite_json(r.wall_seconds)},
              {"seed", r.seed},
              {"notes", r.notes}};
}

inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(finite_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Schema.

struct Field {
  enum class Type { Number, Integer, Boolean, String, Array, Object, Any };

  std::string name;
  Type type = Type::Any;
  bool required = false;
  std::vector<Field> fields;         // for objects; empty means free-form
  std::vector<std::string> choices;  // allowed values for strings
};

inline Field req(std::string name, Field::Type t, std::vector<Field> fields = {}) {
  return {std::move(name), t, true, std::move(fields), {}};
}
inline Field opt(std::string name, Field::Type t, std::vector<Field> fields = {}) {
  return {std::move(name), t, false, std::move(fields), {}};
}
inline Field choice(std::string name, std::vector<std::string> choices, bool required = true) {
  return {std::move(name), Field::Type::String, required, {}, std::move(choices)};
}

inline std::string join_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

namespace detail {

inline const char* type_name(Field::Type t) {
  switch (t) {
    case Field::Type::Number:
      return "number";
    case Field::Type::Integer:
      return "integer";
    case Field::Type::Boolean:
      return "boolean";
    case Field::Type::String:
      return "string";
    case Field::Type::Array:
      return "array";
    case Field::Type::Object:
      return "object";
    case Field::Type::Any:
      return "value";
  }
  return "value";
}

inline bool has_type(const Json& j, Field::Type t) {
  switch (t) {
    case Field::Type::Number:
      return j.is_number();
    case Field::Type::Integer:
      return j.is_number_integer() || (j.is_number_float() && std::floor(j.get<double>()) == j.get<double>());
    case Field::Type::Boolean:
      return j.is_boolean();
    case Field::Type::String:
      return j.is_string();
    case Field::Type::Array:
      return j.is_array();
    case Field::Type::Object:
      return j.is_object();
    case Field::Type::Any:
      return true;
  }
  return false;
}

}  // namespace detail

/// Checks `j` against `fields`: every key must be known, required keys must be
/// present (all missing ones are listed together), and types must match.
inline void validate_object(const Json& j, const std::vector<Field>& fields, const std::string& path = "") {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto f = std::find_if(fields.begin(), fields.end(), [&](const Field& x) { return x.name == it.key(); });
    if (f == fields.end()) throw ConfigError(join_path(path, it.key()), "unknown key");
  }
  std::vector<std::string> missing;
  for (const auto& f : fields)
    if (f.required && !j.contains(f.name)) missing.push_back(join_path(path, f.name));
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw ConfigError(path, "missing required keys: " + list);
  }
  for (const auto& f : fields) {
    if (!j.contains(f.name)) continue;
    const auto& v = j.at(f.name);
    const auto p = join_path(path, f.name);
    if (!detail::has_type(v, f.type)) throw ConfigError(p, std::string("expected ") + detail::type_name(f.type));
    if (!f.choices.empty()) {
      const auto s = v.get<std::string>();
      if (std::find(f.choices.begin(), f.choices.end(), s) == f.choices.end()) {
        std::string list;
        for (const auto& c : f.choices) list += (list.empty() ? "" : ", ") + c;
        throw ConfigError(p, "'" + s + "' is not one of: " + list);
      }
    }
    if (f.type == Field::Type::Object && !f.fields.empty()) validate_object(v, f.fields, p);
  }
}

// ---------------------------------------------------------------------------
// Typed accessors on validated configs.

inline double get_number(const Json& j, const std::string& key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

inline std::size_t get_count(const Json& j, const std::string& key, std::size_t fallback, const std::string& path = "") {
  if (!j.contains(key)) return fallback;
  const double v = j.at(key).get<double>();
  if (!(v >= 0.0) || std::floor(v) != v) throw ConfigError(join_path(path, key), "expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

inline std::vector<double> get_vector(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

inline Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Matrix get_matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto row = get_vector(j[static_cast<std::size_t>(i)], path + "[" + std::to_string(i) + "]");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    }
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError(path, "rows have different lengths");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

// ---------------------------------------------------------------------------
// CSV.

struct Table {
  std::string name;  // file stem
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }

  std::string csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
      os << '\n';
    }
    return os.str();
  }
};

/// Shortest representation that reads back to the same double.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "nan";
  return Json(v).dump();
}

}  // namespace wtineq
