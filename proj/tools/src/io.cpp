#include "nrf_cli/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace nrf::cli {

json to_json(const Matrix& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::config, "'" + what + "': " + why);
  };
  if (j.is_object()) {
    if (!j.contains("rows") || !j.contains("cols") || !j.contains("data"))
      fail("matrix objects need rows, cols and data");
    const int r = j.at("rows").get<int>(), c = j.at("cols").get<int>();
    const json& d = j.at("data");
    if (r < 0 || c < 0 || !d.is_array() || static_cast<int>(d.size()) != r * c)
      fail("data length does not match rows x cols");
    Matrix m(r, c);
    for (int k = 0; k < r * c; ++k) m(k / c, k % c) = d[k].get<double>();
    return m;
  }
  if (!j.is_array()) fail("expected a matrix");
  if (j.empty()) return Matrix(0, 0);
  if (j[0].is_number()) {
    Matrix m(j.size(), 1);
    for (size_t k = 0; k < j.size(); ++k) m(k, 0) = j[k].get<double>();
    return m;
  }
  const size_t cols = j[0].size();
  Matrix m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) fail("rows have different lengths");
    for (size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::config, "'" + what + "': expected an array");
  Vector v(j.size());
  for (size_t k = 0; k < j.size(); ++k) v(k) = j[k].get<double>();
  return v;
}

json to_json(const Realization& r) {
  return {{"A", to_json(r.A())}, {"B", to_json(r.B())}, {"C", to_json(r.C())},
          {"D", to_json(r.D())}};
}

Realization realization_from_json(const json& j, const std::string& what) {
  for (const char* k : {"A", "B", "C", "D"})
    if (!j.contains(k))
      throw Error(ErrorCode::config, "'" + what + "': realization lacks field " + k);
  try {
    return Realization(matrix_from_json(j["A"], what + ".A"),
                       matrix_from_json(j["B"], what + ".B"),
                       matrix_from_json(j["C"], what + ".C"),
                       matrix_from_json(j["D"], what + ".D"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config) throw;
    throw Error(ErrorCode::config, "'" + what + "': " + e.what());
  }
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::config, path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_csv(const LoopTrace& t) {
  std::ostringstream os;
  bool first = true;
  auto header = [&](const char* prefix, int n) {
    for (int k = 1; k <= n; ++k) {
      os << (first ? "" : ",") << prefix << k;
      first = false;
    }
  };
  header("x_", t.x.dim());
  header("uf_", t.uf.dim());
  header("u_", t.u.dim());
  header("w_", t.w.dim());
  os << "\n";
  for (int k = 0; k < t.x.horizon(); ++k) {
    first = true;
    for (const SignalTrace* s : {&t.x, &t.uf, &t.u, &t.w})
      for (int r = 0; r < s->dim(); ++r) {
        os << (first ? "" : ",") << format_double(s->data(r, k));
        first = false;
      }
    os << "\n";
  }
  return os.str();
}

void write_trace_csv(const fs::path& path, const LoopTrace& t) {
  write_text(path, trace_csv(t));
}

SignalTrace read_signal_csv(const fs::path& path, int dim) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "signal file not found: " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        vals.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (rows.empty()) continue;
      throw Error(ErrorCode::config,
                  path.string() + ":" + std::to_string(lineno) + ": not a number");
    }
    if (static_cast<int>(vals.size()) != dim)
      throw Error(ErrorCode::config, path.string() + ":" + std::to_string(lineno) +
                                         ": expected " + std::to_string(dim) +
                                         " columns, found " + std::to_string(vals.size()));
    rows.push_back(std::move(vals));
  }
  SignalTrace t(dim, static_cast<int>(rows.size()));
  for (size_t k = 0; k < rows.size(); ++k)
    for (int r = 0; r < dim; ++r) t.data(r, k) = rows[k][r];
  return t;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace nrf::cli
