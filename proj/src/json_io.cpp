#include "rqpd/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace rqpd {

json matrix_to_json(const Mat& m) {
  json entries = json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      entries.push_back({m(i, j).real(), m(i, j).imag()});
  return json{{"dims", {m.rows(), m.cols()}}, {"entries", entries}};
}

Mat matrix_from_json(const json& j) {
  if (!j.contains("dims") || !j.contains("entries"))
    throw std::invalid_argument("matrix json: missing dims/entries");
  int r = j["dims"][0].get<int>();
  int c = j["dims"][1].get<int>();
  const auto& e = j["entries"];
  if (int(e.size()) != r * c)
    throw std::invalid_argument("matrix json: entries length != dims product");
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int k = 0; k < c; ++k) {
      const auto& v = e[i * c + k];
      m(i, k) = cplx(v[0].get<double>(), v[1].get<double>());
    }
  return m;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

Mat load_matrix_file(const std::string& path) { return matrix_from_json(load_json_file(path)); }

void save_matrix_file(const std::string& path, const Mat& m) {
  save_json_file(path, matrix_to_json(m));
}

}  // namespace rqpd
