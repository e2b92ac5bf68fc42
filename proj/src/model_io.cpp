#include "gmmsi/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gmmsi/csv.hpp"

namespace gmmsi {

namespace {

using nlohmann::json;

[[noreturn]] void bad_config(const std::string& msg) {
  throw Error(ErrorCode::kConfig, msg);
}

std::string component_key(int i, int k) {
  return "component." + std::to_string(i + 1) + "." + std::to_string(k + 1);
}

double number(const json& v, const std::string& where) {
  if (!v.is_number()) bad_config(where + ": expected a number");
  return v.get<double>();
}

Vector parse_vector(const json& v, Eigen::Index n, const std::string& where) {
  if (!v.is_array()) bad_config(where + ": expected an array");
  if (static_cast<Eigen::Index>(v.size()) != n)
    bad_config(where + ": expected " + std::to_string(n) + " entries, got " +
               std::to_string(v.size()));
  Vector out(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out(i) = number(v[static_cast<std::size_t>(i)], where);
  return out;
}

/// Rows are fixed by the model dimensions; columns come from the data.
Matrix parse_matrix(const json& v, Eigen::Index rows, const std::string& where,
                    Eigen::Index expected_cols = -1) {
  if (!v.is_array()) bad_config(where + ": expected an array of rows");
  if (v.empty()) {
    if (expected_cols > 0 && rows > 0)
      bad_config(where + ": expected " + std::to_string(rows) + " rows");
    return Matrix(rows, 0);
  }
  if (static_cast<Eigen::Index>(v.size()) != rows)
    bad_config(where + ": expected " + std::to_string(rows) + " rows, got " +
               std::to_string(v.size()));
  const auto cols = static_cast<Eigen::Index>(v[0].is_array() ? v[0].size() : 0);
  if (expected_cols >= 0 && cols != expected_cols)
    bad_config(where + ": expected " + std::to_string(expected_cols) + " columns");
  Matrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      bad_config(where + ": ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c)
      out(r, c) = number(row[static_cast<std::size_t>(c)], where);
  }
  return out;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  if (m.cols() == 0) return json::array();
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

int dim(const json& dims, const char* key) {
  if (!dims.contains(key) || !dims[key].is_number_integer())
    bad_config(std::string("[dims] missing integer '") + key + "'");
  return dims[key].get<int>();
}

}  // namespace

JointGmm parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    bad_config(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("dims")) bad_config("missing [dims] section");
  const json& dims = doc["dims"];
  const int n1 = dim(dims, "n1");
  const int n2 = dim(dims, "n2");
  const int k1 = dim(dims, "k1");
  const int k2 = dim(dims, "k2");
  if (n1 < 1 || n2 < 0 || k1 < 1 || k2 < 1) bad_config("[dims] values out of range");

  if (!doc.contains("prior")) bad_config("missing [prior] section");
  const Vector flat = parse_vector(doc["prior"], static_cast<Eigen::Index>(k1) * k2, "[prior]");
  Matrix prior(k1, k2);
  for (int i = 0; i < k1; ++i)
    for (int k = 0; k < k2; ++k) prior(i, k) = flat(i * k2 + k);

  std::vector<std::optional<JointComponent>> components(static_cast<std::size_t>(k1 * k2));
  for (int i = 0; i < k1; ++i) {
    for (int k = 0; k < k2; ++k) {
      const std::string key = component_key(i, k);
      if (!doc.contains(key)) continue;
      const json& c = doc[key];
      const std::string where = "[" + key + "]";
      Vector mu1 = c.contains("mu1") ? parse_vector(c["mu1"], n1, where + ".mu1")
                                     : Vector::Zero(n1);
      Vector mu2 = c.contains("mu2") ? parse_vector(c["mu2"], n2, where + ".mu2")
                                     : Vector::Zero(n2);
      if (c.contains("factors")) {
        const json& f = c["factors"];
        FactorModel fm;
        fm.mu1 = std::move(mu1);
        fm.mu2 = std::move(mu2);
        auto get = [&](const char* name, Eigen::Index rows) {
          if (!f.contains(name)) return Matrix(rows, 0);
          return parse_matrix(f[name], rows, where + ".factors." + name);
        };
        fm.p_c1 = get("p_c1", n1);
        fm.p_c2 = get("p_c2", n2);
        fm.p_1 = get("p_1", n1);
        fm.p_2 = get("p_2", n2);
        try {
          components[static_cast<std::size_t>(i * k2 + k)] = component_from_factors(fm);
        } catch (const Error& e) {
          bad_config(where + ": " + e.what());
        }
      } else if (c.contains("sigma1")) {
        Matrix s1 = parse_matrix(c["sigma1"], n1, where + ".sigma1", n1);
        Matrix s2 = c.contains("sigma2") ? parse_matrix(c["sigma2"], n2, where + ".sigma2", n2)
                                         : Matrix::Zero(n2, n2);
        Matrix s12 = c.contains("sigma12")
                         ? parse_matrix(c["sigma12"], n1, where + ".sigma12", n2)
                         : Matrix::Zero(n1, n2);
        components[static_cast<std::size_t>(i * k2 + k)] = component_from_blocks(
            std::move(mu1), std::move(mu2), std::move(s1), std::move(s2), std::move(s12));
      } else {
        bad_config(where + ": needs either 'factors' or covariance blocks");
      }
    }
  }
  return JointGmm(n1, n2, std::move(prior), std::move(components));
}

JointGmm load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string serialize_model(const JointGmm& model) {
  json doc = json::object();
  doc["dims"] = {{"n1", model.n1()}, {"n2", model.n2()}, {"k1", model.k1()}, {"k2", model.k2()}};
  json prior = json::array();
  for (int i = 0; i < model.k1(); ++i)
    for (int k = 0; k < model.k2(); ++k) prior.push_back(model.prior()(i, k));
  doc["prior"] = prior;
  for (int i = 0; i < model.k1(); ++i) {
    for (int k = 0; k < model.k2(); ++k) {
      const ClassPair p{i, k};
      if (!model.has_component(p)) continue;
      const JointComponent& c = model.component(p);
      json entry = {{"mu1", vector_json(c.mu1)}, {"mu2", vector_json(c.mu2)}};
      if (c.factors) {
        entry["factors"] = {{"p_c1", matrix_json(c.factors->p_c1)},
                            {"p_c2", matrix_json(c.factors->p_c2)},
                            {"p_1", matrix_json(c.factors->p_1)},
                            {"p_2", matrix_json(c.factors->p_2)}};
      } else {
        entry["sigma1"] = matrix_json(c.sigma1);
        entry["sigma2"] = matrix_json(c.sigma2);
        entry["sigma12"] = matrix_json(c.sigma12);
      }
      doc[component_key(i, k)] = std::move(entry);
    }
  }
  return doc.dump(1) + "\n";
}

void save_model(const JointGmm& model, const std::string& path) {
  write_file_atomic(path, serialize_model(model));
}

}  // namespace gmmsi
