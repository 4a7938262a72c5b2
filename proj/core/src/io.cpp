#include "lyapcert/io.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace lyapcert::io {

using nlohmann::json;

namespace {

Mat to_mat(const json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw InputError(std::string(name) + ": expected " + std::to_string(rows) + " rows");
  Mat M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw InputError(std::string(name) + ": row " + std::to_string(i + 1) + " needs " + std::to_string(cols) + " entries");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const json& v = row[static_cast<std::size_t>(k)];
      if (!v.is_number()) throw InputError(std::string(name) + ": non-numeric entry");
      M(i, k) = v.get<double>();
    }
  }
  return M;
}

Vec to_vec(const json& j, Eigen::Index size, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size)
    throw InputError(std::string(name) + ": expected " + std::to_string(size) + " entries");
  Vec v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    const json& e = j[static_cast<std::size_t>(i)];
    if (!e.is_number()) throw InputError(std::string(name) + ": non-numeric entry");
    v(i) = e.get<double>();
  }
  return v;
}

json from_mat(const Mat& M) {
  json out = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < M.cols(); ++k) row.push_back(M(i, k) + 0.0);
    out.push_back(std::move(row));
  }
  return out;
}

json from_vec(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i) + 0.0);
  return out;
}

const json& field(const json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  return j.at(key);
}

// One key per line, each matrix row on its own line.
std::string layout(const std::vector<std::pair<std::string, json>>& fields) {
  std::string out = "{\n";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& [key, value] = fields[i];
    out += "  " + json(key).dump() + ": ";
    if (value.is_array() && !value.empty() && value.front().is_array()) {
      out += "[\n";
      for (std::size_t r = 0; r < value.size(); ++r) out += "    " + value[r].dump() + (r + 1 < value.size() ? ",\n" : "\n");
      out += "  ]";
    } else {
      out += value.dump();
    }
    out += i + 1 < fields.size() ? ",\n" : "\n";
  }
  return out + "}";
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
}

std::size_t positive(const json& j, const char* name) {
  if (!j.is_number_integer() || j.get<long long>() <= 0) throw InputError(std::string(name) + " must be a positive integer");
  return j.get<std::size_t>();
}

}  // namespace

MethodRepresentation parse_method(const std::string& text) {
  const json j = parse(text);
  if (!j.is_object()) throw InputError("method description must be a JSON object");
  MethodRepresentation rep;
  rep.n = positive(field(j, "n"), "n");
  rep.m = positive(field(j, "m"), "m");
  const auto n = static_cast<Eigen::Index>(rep.n), m = static_cast<Eigen::Index>(rep.m);
  rep.A = to_mat(field(j, "A"), n, n, "A");
  rep.B = to_mat(field(j, "B"), n, m, "B");
  rep.C = to_mat(field(j, "C"), m, n, "C");
  rep.D = to_mat(field(j, "D"), m, m, "D");
  const json& cls = field(j, "classes");
  if (!cls.is_array() || cls.size() != rep.m) throw InputError("classes: expected " + std::to_string(rep.m) + " entries");
  for (const json& c : cls) {
    FunctionClass fc;
    const json& s = field(c, "sigma");
    if (!s.is_number()) throw InputError("classes: sigma must be a number");
    fc.sigma = s.get<double>();
    const json& b = field(c, "beta");
    if (b.is_string()) {
      if (b.get<std::string>() != "inf") throw InputError("classes: beta must be a number or \"inf\"");
      fc.beta = kInf;
    } else if (b.is_number()) {
      fc.beta = b.get<double>();
    } else {
      throw InputError("classes: beta must be a number or \"inf\"");
    }
    rep.classes.push_back(fc);
  }
  rep.check();
  return rep;
}

std::string method_to_json(const MethodRepresentation& rep) {
  json cls = json::array();
  for (const auto& c : rep.classes) {
    json e = json::object();
    e["sigma"] = c.sigma;
    if (c.smooth()) e["beta"] = c.beta;
    else e["beta"] = "inf";
    cls.push_back(std::move(e));
  }
  return layout({{"n", rep.n}, {"m", rep.m}, {"A", from_mat(rep.A)}, {"B", from_mat(rep.B)},
                 {"C", from_mat(rep.C)}, {"D", from_mat(rep.D)}, {"classes", cls}});
}

CertificateFile parse_certificate(const std::string& text, const MethodRepresentation& rep) {
  const json j = parse(text);
  if (!j.is_object()) throw InputError("certificate must be a JSON object");
  const auto n = static_cast<Eigen::Index>(rep.n), m = static_cast<Eigen::Index>(rep.m);
  const Eigen::Index L = n + 2 * m;
  CertificateFile f;
  auto& c = f.certificate;
  const json& r = field(j, "rho");
  if (!r.is_number()) throw InputError("rho must be a number");
  c.rho = r.get<double>();
  c.Q = to_mat(field(j, "Q"), L, L, "Q");
  c.q = to_vec(field(j, "q"), m, "q");
  c.S = to_mat(field(j, "S"), L, L, "S");
  c.s = to_vec(field(j, "s"), m, "s");
  c.lambda_C1 = to_vec(field(j, "lambda_C1"), static_cast<Eigen::Index>(interp::kPairs.size()) * m, "lambda_C1");
  c.lambda_C2 = to_vec(field(j, "lambda_C2"), static_cast<Eigen::Index>(interp::kStarPairs.size()) * m, "lambda_C2");
  c.lambda_C3 = to_vec(field(j, "lambda_C3"), static_cast<Eigen::Index>(interp::kStarPairs.size()) * m, "lambda_C3");
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) throw InputError("preset must be a string");
    f.preset = certify::parse_preset(j["preset"].get<std::string>());
  }
  return f;
}

std::string certificate_to_json(const certify::LyapunovCertificate& cert, const std::optional<certify::Preset>& preset) {
  std::vector<std::pair<std::string, json>> f{{"rho", cert.rho},
                                              {"Q", from_mat(cert.Q)},
                                              {"q", from_vec(cert.q)},
                                              {"S", from_mat(cert.S)},
                                              {"s", from_vec(cert.s)},
                                              {"lambda_C1", from_vec(cert.lambda_C1)},
                                              {"lambda_C2", from_vec(cert.lambda_C2)},
                                              {"lambda_C3", from_vec(cert.lambda_C3)}};
  if (preset) f.emplace_back("preset", certify::preset_name(*preset));
  return layout(f);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

}  // namespace lyapcert::io
