#include <filesystem>

#include "vts/io.hpp"
#include "support.hpp"

using namespace vts;

namespace {

const std::filesystem::path kData = VTS_TEST_DATA;

}  // namespace

TEST_CASE("matrix files round-trip exactly", "[io]") {
  CounterStream s(91);
  MatrixFile file;
  file.kind = ProblemKind::GEV;
  file.a = test::random_matrix(s, 4);
  file.b = test::random_matrix(s, 4);
  const MatrixFile back = parse_matrix_json(matrix_json(file));
  CHECK(back.kind == ProblemKind::GEV);
  CHECK(back.a == file.a);
  REQUIRE(back.b.has_value());
  CHECK(*back.b == *file.b);

  file.kind = ProblemKind::EV;
  file.b.reset();
  const MatrixFile ev = parse_matrix_json(matrix_json(file));
  CHECK(ev.kind == ProblemKind::EV);
  CHECK_FALSE(ev.b.has_value());
}

TEST_CASE("sample data files load", "[io]") {
  const MatrixFile gev = read_matrix_file(kData / "gev4.json");
  CHECK(gev.kind == ProblemKind::GEV);
  CHECK(gev.a.rows() == 4);
  CHECK(gev.b.has_value());
  const MatrixFile ev = read_matrix_file(kData / "ev4.json");
  CHECK(ev.kind == ProblemKind::EV);
  CHECK_FALSE(ev.b.has_value());
}

TEST_CASE("malformed matrix files", "[io]") {
  CHECK_ERROR_CODE(parse_matrix_json("not json"), ErrorCode::ParseFailure);
  CHECK_ERROR_CODE(parse_matrix_json(R"({"kind":"ev","a_re":[[1]],"a_im":[[0]]})"), ErrorCode::ParseFailure);
  CHECK_ERROR_CODE(parse_matrix_json(R"({"n":2,"kind":"ev","a_re":[[1,2]],"a_im":[[0,0]]})"), ErrorCode::ParseFailure);
  CHECK_ERROR_CODE(parse_matrix_json(R"({"n":1,"kind":"ev","a_re":[[1,2]],"a_im":[[0]]})"), ErrorCode::ParseFailure);
  CHECK_ERROR_CODE(parse_matrix_json(R"({"n":1,"kind":"ev","a_re":[["x"]],"a_im":[[0]]})"), ErrorCode::ParseFailure);
  CHECK_ERROR_CODE(parse_matrix_json(R"({"n":0,"kind":"ev","a_re":[],"a_im":[]})"), ErrorCode::ParseFailure);
  CHECK_ERROR_CODE(parse_matrix_json(R"({"n":1,"kind":"svd","a_re":[[1]],"a_im":[[0]]})"), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(parse_matrix_json(R"({"n":1,"kind":"gev","a_re":[[1]],"a_im":[[0]],"b_re":[[1]]})"),
                   ErrorCode::ParseFailure);
}

TEST_CASE("checkpoints round-trip exactly", "[io]") {
  CounterStream s(92);
  const ParameterVector p = test::random_params(s, ProblemKind::GEV, 2, 3);
  const ParameterVector back = parse_checkpoint_json(checkpoint_json(p));
  CHECK(back.kind == p.kind);
  CHECK(back.n == 2);
  CHECK(back.M == 3);
  CHECK(back.values == p.values);

  CHECK_ERROR_CODE(parse_checkpoint_json(R"({"kind":"ev","n":1,"M":1,"values":[1,2]})"), ErrorCode::BadParameterCount);
  CHECK_ERROR_CODE(parse_checkpoint_json(R"({"kind":"ev","n":0,"M":1,"values":[]})"), ErrorCode::ParseFailure);
  CHECK_ERROR_CODE(parse_checkpoint_json(R"({"kind":"ev","n":1,"values":[1,2,3]})"), ErrorCode::ParseFailure);
  CHECK_ERROR_CODE(parse_checkpoint_json("[]"), ErrorCode::ParseFailure);
}

TEST_CASE("text file errors map to IoFailure", "[io]") {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "vts_test_io";
  std::filesystem::create_directories(dir);
  write_text(dir / "x.txt", "hello\n");
  CHECK(read_text(dir / "x.txt") == "hello\n");
  CHECK_ERROR_CODE(read_text(dir / "missing.txt"), ErrorCode::IoFailure);
  CHECK_ERROR_CODE(write_text(dir / "no" / "such" / "dir.txt", "x"), ErrorCode::IoFailure);
  CHECK_ERROR_CODE(read_matrix_file(dir / "missing.json"), ErrorCode::IoFailure);
  std::filesystem::remove_all(dir);
}

TEST_CASE("parse_kind", "[io]") {
  CHECK(parse_kind("gev") == ProblemKind::GEV);
  CHECK(parse_kind("ev") == ProblemKind::EV);
  CHECK_ERROR_CODE(parse_kind("GEV"), ErrorCode::InvalidArgument);
}
