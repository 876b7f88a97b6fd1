#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "vts/ansatz.hpp"
#include "vts/numerics.hpp"
#include "vts/random.hpp"
#include "vts/types.hpp"

namespace vts {

/// Registers in layout order. R, C index rows/columns; L tags A vs B; chi,
/// psi carry the ansatz; the tilde copies hold the K=1 basis labels; K is the
/// control qubit; BTilde marks the wanted terms and B is the garbage flag.
enum class Segment { R, C, L, Chi, ChiTilde, Psi, PsiTilde, K, BTilde, B };

const char* to_string(Segment s);

/// Qubit q occupies bit (width - 1 - q) of the amplitude index, so reading an
/// index in binary from the left visits the segments in layout order and each
/// register value is a contiguous bit field with its first qubit as MSB.
struct RegisterLayout {
  int n = 1;

  int width() const { return 6 * n + 4; }
  std::uint64_t dimension() const { return std::uint64_t{1} << width(); }
  int size(Segment s) const;
  int offset(Segment s) const;
  /// Global index of qubit j (0-based, 0 = most significant) of segment s.
  int qubit(Segment s, int j = 0) const { return offset(s) + j; }
  int bit(int qubit) const { return width() - 1 - qubit; }
  /// Amplitude index with every register value given; unspecified ones are 0.
  std::uint64_t index(const std::map<Segment, std::uint64_t>& values) const;
  /// Value of register s in amplitude index idx.
  std::uint64_t value(Segment s, std::uint64_t idx) const;

  bool operator==(const RegisterLayout&) const = default;
};

struct StateVector {
  RegisterLayout layout;
  ComplexVector amplitudes;

  double norm_squared() const { return amplitudes.squaredNorm(); }
};

enum class GateName { H, Rz, Ry, X };

struct Control {
  int qubit;
  int polarity;  // 1: fires on |1>, 0: fires on |0>

  bool operator==(const Control&) const = default;
};

struct Gate {
  GateName name = GateName::X;
  int target = 0;
  std::vector<Control> controls;
  double theta = 0.0;

  bool operator==(const Gate&) const = default;
};

struct Stage {
  std::string label;
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct GateProgram {
  RegisterLayout layout;
  ProblemKind kind = ProblemKind::GEV;
  std::vector<Gate> gates;
  std::vector<Stage> stages;

  void validate() const;
};

/// |Phi_0>: a_ij at |i>_R|j>_C|0>_L, b_ij at |1>_L, all other registers |0>.
StateVector encode_input(const ProblemInstance& instance);

/// Emits the seven stages W0..W6 for the given parameters.
GateProgram compile_program(const ParameterVector& params, const RegisterLayout& layout);

/// Applies one gate in place.
void apply_gate(StateVector& state, const Gate& gate);

StateVector apply_program(StateVector state, const GateProgram& program);
/// Applies only the gates of one stage.
void apply_stage(StateVector& state, const GateProgram& program, std::size_t stage);

/// Sum of |amplitude|^2 over basis states whose listed qubits hold the listed values.
double marginal_probability(const StateVector& state, const std::vector<Control>& pattern);

/// Pattern fixing a whole register to a value.
std::vector<Control> register_pattern(const RegisterLayout& layout, Segment s, std::uint64_t value);

struct Measurement {
  int outcome = 0;
  StateVector collapsed;
  double probability = 0.0;  // probability of the observed outcome
};

Measurement measure(const StateVector& state, int qubit, CounterStream& stream);

struct GateCounts {
  int depth = 0;
  std::map<std::string, int> counts;  // H, Rz, Ry, X, CX, CCX, MCX
  long toffoli_equivalent = 0;        // MCX with c controls as 2c-3 Toffolis

  int total() const;
  int rotations() const;
};

struct DepthReport {
  GateCounts program;
  std::vector<std::pair<std::string, GateCounts>> stages;
};

/// Greedy layering: a gate lands one layer above the deepest gate sharing a qubit.
DepthReport depth_and_counts(const GateProgram& program);

/// Gate family key used in GateCounts.
std::string gate_family(const Gate& gate);

/// Line-oriented text export: `NAME target [ctrl:+q,-q,...] [theta=...]`.
std::string export_program(const GateProgram& program);
GateProgram parse_program(const std::string& text);

}  // namespace vts
