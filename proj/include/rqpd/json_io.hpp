#ifndef RQPD_JSON_IO_HPP
#define RQPD_JSON_IO_HPP

#include <string>

#include <json.hpp>

#include "rqpd/matrix.hpp"

namespace rqpd {

using json = nlohmann::json;

// Matrix wire format used by every persisted fixture:
//   {"dims":[r,c],"entries":[[re,im],...]} row-major.
json matrix_to_json(const Mat& m);
Mat matrix_from_json(const json& j);

Mat load_matrix_file(const std::string& path);
void save_matrix_file(const std::string& path, const Mat& m);

json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

}  // namespace rqpd

#endif
