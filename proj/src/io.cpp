#include "vts/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vts/error.hpp"

namespace vts {

using nlohmann::json;

namespace {

ComplexMatrix read_complex(const json& re, const json& im, Eigen::Index dim, const char* name) {
  if (!re.is_array() || !im.is_array() || re.size() != static_cast<std::size_t>(dim) ||
      im.size() != static_cast<std::size_t>(dim)) {
    throw Error(ErrorCode::ParseFailure, std::string(name) + " must have n rows");
  }
  ComplexMatrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const json& rr = re[static_cast<std::size_t>(i)];
    const json& ri = im[static_cast<std::size_t>(i)];
    if (!rr.is_array() || !ri.is_array() || rr.size() != static_cast<std::size_t>(dim) ||
        ri.size() != static_cast<std::size_t>(dim)) {
      throw Error(ErrorCode::ParseFailure, std::string(name) + " rows must have n entries");
    }
    for (Eigen::Index j = 0; j < dim; ++j) {
      m(i, j) = Complex{rr[static_cast<std::size_t>(j)].get<double>(), ri[static_cast<std::size_t>(j)].get<double>()};
    }
  }
  return m;
}

void put_complex(json& out, const ComplexMatrix& m, const char* re_key, const char* im_key) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rr = json::array();
    json ri = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      rr.push_back(m(i, j).real());
      ri.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  out[re_key] = std::move(re);
  out[im_key] = std::move(im);
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseFailure, e.what());
  }
}

}  // namespace

ProblemKind parse_kind(const std::string& text) {
  if (text == "gev") return ProblemKind::GEV;
  if (text == "ev") return ProblemKind::EV;
  throw Error(ErrorCode::InvalidArgument, "kind must be gev or ev, got '" + text + "'");
}

MatrixFile parse_matrix_json(const std::string& text) {
  const json doc = parse_json(text);
  try {
    MatrixFile file;
    const long n = doc.at("n").get<long>();
    if (n < 1) throw Error(ErrorCode::ParseFailure, "n must be positive");
    file.kind = parse_kind(doc.at("kind").get<std::string>());
    file.a = read_complex(doc.at("a_re"), doc.at("a_im"), n, "a");
    const bool has_b = doc.contains("b_re") || doc.contains("b_im");
    if (has_b) file.b = read_complex(doc.at("b_re"), doc.at("b_im"), n, "b");
    return file;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseFailure, e.what());
  }
}

std::string matrix_json(const MatrixFile& file) {
  json out;
  out["n"] = file.a.rows();
  out["kind"] = to_string(file.kind);
  put_complex(out, file.a, "a_re", "a_im");
  if (file.b) put_complex(out, *file.b, "b_re", "b_im");
  return out.dump(2) + "\n";
}

MatrixFile read_matrix_file(const std::filesystem::path& path) { return parse_matrix_json(read_text(path)); }

void write_matrix_file(const std::filesystem::path& path, const MatrixFile& file) {
  write_text(path, matrix_json(file));
}

ParameterVector parse_checkpoint_json(const std::string& text) {
  const json doc = parse_json(text);
  try {
    ParameterVector params;
    params.kind = parse_kind(doc.at("kind").get<std::string>());
    params.n = doc.at("n").get<int>();
    params.M = doc.at("M").get<int>();
    const auto values = doc.at("values").get<std::vector<double>>();
    if (params.n < 1 || params.M < 1) throw Error(ErrorCode::ParseFailure, "n and M must be positive");
    if (static_cast<Eigen::Index>(values.size()) != parameter_count(params.kind, params.n, params.M)) {
      throw Error(ErrorCode::BadParameterCount, "checkpoint value count does not match kind/n/M");
    }
    params.values = Eigen::Map<const RealVector>(values.data(), static_cast<Eigen::Index>(values.size()));
    return params;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseFailure, e.what());
  }
}

std::string checkpoint_json(const ParameterVector& params) {
  json out;
  out["kind"] = to_string(params.kind);
  out["n"] = params.n;
  out["M"] = params.M;
  out["values"] = std::vector<double>(params.values.data(), params.values.data() + params.values.size());
  return out.dump(2) + "\n";
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed for " + path.string());
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace vts
