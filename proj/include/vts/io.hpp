#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "vts/ansatz.hpp"
#include "vts/numerics.hpp"

namespace vts {

/// Raw matrices as stored on disk, before normalization.
struct MatrixFile {
  ProblemKind kind = ProblemKind::GEV;
  ComplexMatrix a;
  std::optional<ComplexMatrix> b;
};

/// {"n", "kind", "a_re", "a_im", "b_re", "b_im"} with row-major N x N arrays.
MatrixFile parse_matrix_json(const std::string& text);
std::string matrix_json(const MatrixFile& file);
MatrixFile read_matrix_file(const std::filesystem::path& path);
void write_matrix_file(const std::filesystem::path& path, const MatrixFile& file);

/// {"kind", "n", "M", "values"}.
ParameterVector parse_checkpoint_json(const std::string& text);
std::string checkpoint_json(const ParameterVector& params);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

ProblemKind parse_kind(const std::string& text);

}  // namespace vts
