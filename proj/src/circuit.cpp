#include "vts/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "vts/error.hpp"

namespace vts {

const char* to_string(Segment s) {
  switch (s) {
    case Segment::R: return "R";
    case Segment::C: return "C";
    case Segment::L: return "L";
    case Segment::Chi: return "chi";
    case Segment::ChiTilde: return "chi~";
    case Segment::Psi: return "psi";
    case Segment::PsiTilde: return "psi~";
    case Segment::K: return "K";
    case Segment::BTilde: return "B~";
    case Segment::B: return "B";
  }
  return "?";
}

namespace {

constexpr Segment kOrder[] = {Segment::R,   Segment::C,        Segment::L, Segment::Chi,
                              Segment::ChiTilde, Segment::Psi, Segment::PsiTilde,
                              Segment::K,   Segment::BTilde,   Segment::B};

bool is_register(Segment s) {
  return s == Segment::R || s == Segment::C || s == Segment::Chi || s == Segment::ChiTilde ||
         s == Segment::Psi || s == Segment::PsiTilde;
}

}  // namespace

int RegisterLayout::size(Segment s) const { return is_register(s) ? n : 1; }

int RegisterLayout::offset(Segment s) const {
  int off = 0;
  for (Segment t : kOrder) {
    if (t == s) return off;
    off += size(t);
  }
  return off;
}

std::uint64_t RegisterLayout::index(const std::map<Segment, std::uint64_t>& values) const {
  std::uint64_t idx = 0;
  for (const auto& [seg, v] : values) {
    const int len = size(seg);
    const int low_bit = bit(offset(seg) + len - 1);
    idx |= (v & ((std::uint64_t{1} << len) - 1)) << low_bit;
  }
  return idx;
}

std::uint64_t RegisterLayout::value(Segment s, std::uint64_t idx) const {
  const int len = size(s);
  const int low_bit = bit(offset(s) + len - 1);
  return (idx >> low_bit) & ((std::uint64_t{1} << len) - 1);
}

void GateProgram::validate() const {
  const int width = layout.width();
  for (const Gate& g : gates) {
    if (g.target < 0 || g.target >= width) throw Error(ErrorCode::LayoutMismatch, "gate target outside layout");
    for (const Control& c : g.controls) {
      if (c.qubit < 0 || c.qubit >= width) throw Error(ErrorCode::LayoutMismatch, "control outside layout");
      if (c.qubit == g.target) throw Error(ErrorCode::LayoutMismatch, "control coincides with target");
      if (c.polarity != 0 && c.polarity != 1) throw Error(ErrorCode::LayoutMismatch, "bad control polarity");
    }
  }
}

StateVector encode_input(const ProblemInstance& instance) {
  const int n = instance.qubits();
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "instance dimension must be a power of two >= 2");
  if (std::abs(instance_mass(instance) - 1.0) > 1e-10) {
    throw Error(ErrorCode::NotNormalized, "sum |a|^2 + |b|^2 must equal 1");
  }
  StateVector state;
  state.layout.n = n;
  state.amplitudes = ComplexVector::Zero(static_cast<Eigen::Index>(state.layout.dimension()));
  const auto dim = static_cast<std::uint64_t>(instance.dim());
  for (std::uint64_t i = 0; i < dim; ++i) {
    for (std::uint64_t j = 0; j < dim; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      state.amplitudes(static_cast<Eigen::Index>(
          state.layout.index({{Segment::R, i}, {Segment::C, j}, {Segment::L, 0}}))) = instance.a(ii, jj);
      if (instance.b) {
        state.amplitudes(static_cast<Eigen::Index>(
            state.layout.index({{Segment::R, i}, {Segment::C, j}, {Segment::L, 1}}))) = (*instance.b)(ii, jj);
      }
    }
  }
  return state;
}

namespace {

class ProgramBuilder {
 public:
  explicit ProgramBuilder(GateProgram& program) : program_(program) {}

  void begin(const std::string& label) {
    program_.stages.push_back({label, program_.gates.size(), program_.gates.size()});
  }
  void end() { program_.stages.back().end = program_.gates.size(); }

  void gate(GateName name, int target, std::vector<Control> controls = {}, double theta = 0.0) {
    program_.gates.push_back({name, target, std::move(controls), theta});
  }

 private:
  GateProgram& program_;
};

// Controlled U on one register: acts as U on K=1 and as identity on K=0.
// Every rotation R(t) becomes R(t/2) X_{K=0} R(t/2); one extra X_{K=0} sits
// between the Ry and the trailing Rz so that K=0 sees X^4 = I.
void emit_controlled_unitary(ProgramBuilder& b, const RegisterLayout& layout, Segment reg,
                             const Eigen::Ref<const RealVector>& angles, bool conjugate) {
  const int n = layout.n;
  const int M = static_cast<int>(angles.size() / (3 * n));
  const int k = layout.qubit(Segment::K);
  const double rz_sign = conjugate ? -1.0 : 1.0;
  // U = R_1 R_2 ... R_M, so block M is applied first.
  for (int block = M - 1; block >= 0; --block) {
    for (int j = 0; j < n; ++j) {
      const int q = layout.qubit(reg, j);
      const double t1 = rz_sign * angles(parameter_offset(n, block, j, 0));
      const double t2 = angles(parameter_offset(n, block, j, 1));
      const double t3 = rz_sign * angles(parameter_offset(n, block, j, 2));
      // r_j = Rz(t1) Ry(t2) Rz(t3): the rightmost factor runs first.
      b.gate(GateName::Rz, q, {}, t3 / 2);
      b.gate(GateName::X, q, {{k, 0}});
      b.gate(GateName::Rz, q, {}, t3 / 2);
      b.gate(GateName::X, q, {{k, 0}});
      b.gate(GateName::Ry, q, {}, t2 / 2);
      b.gate(GateName::X, q, {{k, 0}});
      b.gate(GateName::Ry, q, {}, t2 / 2);
      b.gate(GateName::Rz, q, {}, t1 / 2);
      b.gate(GateName::X, q, {{k, 0}});
      b.gate(GateName::Rz, q, {}, t1 / 2);
    }
    // prod_m C_{m,m+1} = C_12 C_23 ... : C_{n-1,n} runs first.
    for (int m = n - 2; m >= 0; --m) {
      b.gate(GateName::X, layout.qubit(reg, m + 1), {{k, 1}, {layout.qubit(reg, m), 1}});
    }
  }
}

void append_register_controls(std::vector<Control>& controls, const RegisterLayout& layout, Segment s,
                              std::uint64_t value) {
  const int len = layout.size(s);
  for (int j = 0; j < len; ++j) {
    const int shift = len - 1 - j;
    controls.push_back({layout.qubit(s, j), static_cast<int>((value >> shift) & 1U)});
  }
}

}  // namespace

std::vector<Control> register_pattern(const RegisterLayout& layout, Segment s, std::uint64_t value) {
  std::vector<Control> pattern;
  append_register_controls(pattern, layout, s, value);
  return pattern;
}

GateProgram compile_program(const ParameterVector& params, const RegisterLayout& layout) {
  if (params.n != layout.n) throw Error(ErrorCode::LayoutMismatch, "parameter n differs from layout n");
  if (params.size() != parameter_count(params.kind, params.n, params.M)) {
    throw Error(ErrorCode::BadParameterCount, "parameter vector length does not match kind/n/M");
  }
  const int n = layout.n;
  const int k = layout.qubit(Segment::K);
  GateProgram program;
  program.layout = layout;
  program.kind = params.kind;
  ProgramBuilder b(program);

  b.begin("W0");
  for (int j = 0; j < n; ++j) b.gate(GateName::H, layout.qubit(Segment::Chi, j));
  for (int j = 0; j < n; ++j) b.gate(GateName::H, layout.qubit(Segment::Psi, j));
  b.gate(GateName::H, k);
  b.end();

  b.begin("W1");
  for (int j = 0; j < n; ++j) {
    b.gate(GateName::X, layout.qubit(Segment::ChiTilde, j), {{layout.qubit(Segment::Chi, j), 1}, {k, 1}});
    b.gate(GateName::X, layout.qubit(Segment::PsiTilde, j), {{layout.qubit(Segment::Psi, j), 1}, {k, 1}});
  }
  b.end();

  b.begin("W2");
  const bool ev = params.kind == ProblemKind::EV;
  emit_controlled_unitary(b, layout, Segment::Chi, params.row_side(), ev);
  emit_controlled_unitary(b, layout, Segment::Psi, params.column_side(), false);
  b.end();

  b.begin("W3");
  for (int j = 0; j < n; ++j) {
    b.gate(GateName::X, layout.qubit(Segment::R, j), {{layout.qubit(Segment::Chi, j), 1}, {k, 1}});
  }
  for (int j = 0; j < n; ++j) {
    b.gate(GateName::X, layout.qubit(Segment::C, j), {{layout.qubit(Segment::Psi, j), 1}, {k, 1}});
  }
  b.end();

  b.begin("W4");
  for (int j = 0; j < n; ++j) b.gate(GateName::H, layout.qubit(Segment::Chi, j));
  for (int j = 0; j < n; ++j) b.gate(GateName::H, layout.qubit(Segment::Psi, j));
  b.end();

  b.begin("W5");
  const std::uint64_t dim = std::uint64_t{1} << n;
  const int b_tilde = layout.qubit(Segment::BTilde);
  for (std::uint64_t row = 1; row < dim; ++row) {
    for (std::uint64_t col = 0; col < row; ++col) {
      std::vector<Control> controls;
      append_register_controls(controls, layout, Segment::ChiTilde, row);
      append_register_controls(controls, layout, Segment::PsiTilde, col);
      controls.push_back({k, 1});
      b.gate(GateName::X, b_tilde, std::move(controls));
    }
  }
  // The K=0 branch carries the a00/b00 normalization term; it must be marked too.
  b.gate(GateName::X, b_tilde, {{k, 0}});
  b.end();

  b.begin("W6");
  {
    std::vector<Control> controls;
    append_register_controls(controls, layout, Segment::R, 0);
    append_register_controls(controls, layout, Segment::C, 0);
    append_register_controls(controls, layout, Segment::Chi, 0);
    append_register_controls(controls, layout, Segment::Psi, 0);
    controls.push_back({b_tilde, 1});
    b.gate(GateName::X, layout.qubit(Segment::B), std::move(controls));
  }
  b.end();
  return program;
}

void apply_gate(StateVector& state, const Gate& gate) {
  const RegisterLayout& layout = state.layout;
  const int tbit = layout.bit(gate.target);
  std::uint64_t cmask = 0;
  std::uint64_t cvalue = 0;
  for (const Control& c : gate.controls) {
    const std::uint64_t m = std::uint64_t{1} << layout.bit(c.qubit);
    cmask |= m;
    if (c.polarity) cvalue |= m;
  }

  Complex g00, g01, g10, g11;
  switch (gate.name) {
    case GateName::H: {
      const double h = 1.0 / std::numbers::sqrt2;
      g00 = g01 = g10 = h;
      g11 = -h;
      break;
    }
    case GateName::Rz:
      g00 = std::polar(1.0, -gate.theta / 2);
      g11 = std::polar(1.0, gate.theta / 2);
      g01 = g10 = 0.0;
      break;
    case GateName::Ry: {
      const double c = std::cos(gate.theta / 2);
      const double s = std::sin(gate.theta / 2);
      g00 = g11 = c;
      g01 = -s;
      g10 = s;
      break;
    }
    case GateName::X:
      g00 = g11 = 0.0;
      g01 = g10 = 1.0;
      break;
  }

  Complex* amp = state.amplitudes.data();
  const std::uint64_t half = layout.dimension() >> 1;
  const std::uint64_t low = (std::uint64_t{1} << tbit) - 1;
  const std::uint64_t tmask = std::uint64_t{1} << tbit;
  for (std::uint64_t i = 0; i < half; ++i) {
    const std::uint64_t i0 = ((i & ~low) << 1) | (i & low);
    if ((i0 & cmask) != cvalue) continue;
    const std::uint64_t i1 = i0 | tmask;
    const Complex x0 = amp[i0];
    const Complex x1 = amp[i1];
    switch (gate.name) {
      case GateName::X:
        amp[i0] = x1;
        amp[i1] = x0;
        break;
      case GateName::Rz:
        amp[i0] = g00 * x0;
        amp[i1] = g11 * x1;
        break;
      default:
        amp[i0] = g00 * x0 + g01 * x1;
        amp[i1] = g10 * x0 + g11 * x1;
    }
  }
}

StateVector apply_program(StateVector state, const GateProgram& program) {
  if (!(state.layout == program.layout)) throw Error(ErrorCode::LayoutMismatch, "state and program layouts differ");
  program.validate();
  for (const Gate& g : program.gates) apply_gate(state, g);
  return state;
}

void apply_stage(StateVector& state, const GateProgram& program, std::size_t stage) {
  if (!(state.layout == program.layout)) throw Error(ErrorCode::LayoutMismatch, "state and program layouts differ");
  if (stage >= program.stages.size()) throw Error(ErrorCode::IndexOutOfRange, "no such stage");
  const Stage& s = program.stages[stage];
  for (std::size_t i = s.begin; i < s.end; ++i) apply_gate(state, program.gates[i]);
}

double marginal_probability(const StateVector& state, const std::vector<Control>& pattern) {
  std::uint64_t mask = 0;
  std::uint64_t value = 0;
  for (const Control& c : pattern) {
    const std::uint64_t m = std::uint64_t{1} << state.layout.bit(c.qubit);
    mask |= m;
    if (c.polarity) value |= m;
  }
  double total = 0.0;
  const auto size = static_cast<std::uint64_t>(state.amplitudes.size());
  const Complex* amp = state.amplitudes.data();
  for (std::uint64_t i = 0; i < size; ++i) {
    if ((i & mask) == value) total += std::norm(amp[i]);
  }
  return total;
}

Measurement measure(const StateVector& state, int qubit, CounterStream& stream) {
  if (qubit < 0 || qubit >= state.layout.width()) throw Error(ErrorCode::LayoutMismatch, "qubit outside layout");
  const double p1 = marginal_probability(state, {{qubit, 1}});
  const double p0 = std::max(0.0, state.norm_squared() - p1);
  const int outcome = stream.uniform() < p1 ? 1 : 0;
  const double probability = outcome ? p1 : p0;
  if (probability < 1e-15) throw Error(ErrorCode::ImpossibleOutcome, "conditioning probability below 1e-15");

  Measurement m;
  m.outcome = outcome;
  m.probability = probability;
  m.collapsed = state;
  const std::uint64_t bitmask = std::uint64_t{1} << state.layout.bit(qubit);
  const double scale = 1.0 / std::sqrt(probability);
  const auto size = static_cast<std::uint64_t>(state.amplitudes.size());
  for (std::uint64_t i = 0; i < size; ++i) {
    const bool one = (i & bitmask) != 0;
    auto& a = m.collapsed.amplitudes(static_cast<Eigen::Index>(i));
    a = (one == (outcome == 1)) ? a * scale : Complex{0.0, 0.0};
  }
  return m;
}

int GateCounts::total() const {
  int t = 0;
  for (const auto& [name, c] : counts) t += c;
  return t;
}

int GateCounts::rotations() const {
  int t = 0;
  for (const char* name : {"Rz", "Ry"}) {
    if (auto it = counts.find(name); it != counts.end()) t += it->second;
  }
  return t;
}

std::string gate_family(const Gate& gate) {
  std::string base;
  switch (gate.name) {
    case GateName::H: base = "H"; break;
    case GateName::Rz: base = "Rz"; break;
    case GateName::Ry: base = "Ry"; break;
    case GateName::X: base = "X"; break;
  }
  switch (gate.controls.size()) {
    case 0: return base;
    case 1: return "C" + base;
    case 2: return "CC" + base;
    default: return "MC" + base;
  }
}

namespace {

GateCounts count_range(const GateProgram& program, std::size_t begin, std::size_t end) {
  GateCounts out;
  std::vector<int> level(static_cast<std::size_t>(program.layout.width()), 0);
  for (std::size_t i = begin; i < end; ++i) {
    const Gate& g = program.gates[i];
    int layer = level[static_cast<std::size_t>(g.target)];
    for (const Control& c : g.controls) layer = std::max(layer, level[static_cast<std::size_t>(c.qubit)]);
    ++layer;
    level[static_cast<std::size_t>(g.target)] = layer;
    for (const Control& c : g.controls) level[static_cast<std::size_t>(c.qubit)] = layer;
    out.depth = std::max(out.depth, layer);
    ++out.counts[gate_family(g)];
    const auto c = static_cast<long>(g.controls.size());
    if (c == 2) out.toffoli_equivalent += 1;
    if (c >= 3) out.toffoli_equivalent += 2 * c - 3;
  }
  return out;
}

const char* gate_token(GateName name) {
  switch (name) {
    case GateName::H: return "H";
    case GateName::Rz: return "RZ";
    case GateName::Ry: return "RY";
    case GateName::X: return "X";
  }
  return "?";
}

}  // namespace

DepthReport depth_and_counts(const GateProgram& program) {
  program.validate();
  DepthReport report;
  report.program = count_range(program, 0, program.gates.size());
  for (const Stage& s : program.stages) report.stages.emplace_back(s.label, count_range(program, s.begin, s.end));
  return report;
}

std::string export_program(const GateProgram& program) {
  std::ostringstream out;
  out << "# program n=" << program.layout.n << " kind=" << to_string(program.kind)
      << " width=" << program.layout.width() << "\n";
  char buf[64];
  for (const Stage& s : program.stages) {
    out << "# stage " << s.label << "\n";
    for (std::size_t i = s.begin; i < s.end; ++i) {
      const Gate& g = program.gates[i];
      out << gate_token(g.name) << ' ' << g.target;
      if (!g.controls.empty()) {
        out << " ctrl:";
        for (std::size_t c = 0; c < g.controls.size(); ++c) {
          out << (c ? "," : "") << (g.controls[c].polarity ? '+' : '-') << g.controls[c].qubit;
        }
      }
      if (g.name == GateName::Rz || g.name == GateName::Ry) {
        std::snprintf(buf, sizeof buf, "%.17g", g.theta);
        out << " theta=" << buf;
      }
      out << "\n";
    }
  }
  return out.str();
}

GateProgram parse_program(const std::string& text) {
  GateProgram program;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line[0] == '#') {
      std::string hash, word;
      ls >> hash >> word;
      if (word == "program") {
        std::string tok;
        while (ls >> tok) {
          if (tok.rfind("n=", 0) == 0) program.layout.n = std::stoi(tok.substr(2));
          if (tok.rfind("kind=", 0) == 0) program.kind = tok.substr(5) == "ev" ? ProblemKind::EV : ProblemKind::GEV;
        }
        header = true;
      } else if (word == "stage") {
        std::string label;
        ls >> label;
        if (!program.stages.empty()) program.stages.back().end = program.gates.size();
        program.stages.push_back({label, program.gates.size(), program.gates.size()});
      }
      continue;
    }
    std::string name;
    Gate g;
    ls >> name >> g.target;
    if (name == "H") g.name = GateName::H;
    else if (name == "RZ") g.name = GateName::Rz;
    else if (name == "RY") g.name = GateName::Ry;
    else if (name == "X") g.name = GateName::X;
    else throw Error(ErrorCode::ParseFailure, "unknown gate '" + name + "'");
    if (!ls) throw Error(ErrorCode::ParseFailure, "missing gate target in '" + line + "'");
    std::string tok;
    while (ls >> tok) {
      if (tok.rfind("ctrl:", 0) == 0) {
        std::istringstream cs(tok.substr(5));
        std::string item;
        while (std::getline(cs, item, ',')) {
          if (item.size() < 2) throw Error(ErrorCode::ParseFailure, "bad control '" + item + "'");
          g.controls.push_back({std::stoi(item.substr(1)), item[0] == '+' ? 1 : 0});
        }
      } else if (tok.rfind("theta=", 0) == 0) {
        g.theta = std::stod(tok.substr(6));
      } else {
        throw Error(ErrorCode::ParseFailure, "unexpected token '" + tok + "'");
      }
    }
    program.gates.push_back(std::move(g));
  }
  if (!header) throw Error(ErrorCode::ParseFailure, "missing '# program' header");
  if (!program.stages.empty()) program.stages.back().end = program.gates.size();
  program.validate();
  return program;
}

}  // namespace vts
