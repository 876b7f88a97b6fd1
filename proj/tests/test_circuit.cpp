#include <cmath>
#include <numbers>

#include "vts/circuit.hpp"
#include "vts/loss.hpp"
#include "support.hpp"

using namespace vts;
using Catch::Approx;

namespace {

StateVector basis_state(int n, std::uint64_t index) {
  StateVector s;
  s.layout.n = n;
  s.amplitudes = ComplexVector::Zero(static_cast<Eigen::Index>(s.layout.dimension()));
  s.amplitudes(static_cast<Eigen::Index>(index)) = 1.0;
  return s;
}

int family_count(const GateCounts& c, const char* family) {
  const auto it = c.counts.find(family);
  return it == c.counts.end() ? 0 : it->second;
}

const GateCounts& stage_counts(const DepthReport& r, const std::string& label) {
  for (const auto& [name, counts] : r.stages) {
    if (name == label) return counts;
  }
  FAIL("no stage " << label);
  return r.program;
}

}  // namespace

TEST_CASE("register layout", "[circuit]") {
  const RegisterLayout l{2};
  CHECK(l.width() == 16);
  CHECK(l.dimension() == 65536);
  CHECK(l.offset(Segment::R) == 0);
  CHECK(l.offset(Segment::C) == 2);
  CHECK(l.offset(Segment::L) == 4);
  CHECK(l.offset(Segment::Chi) == 5);
  CHECK(l.offset(Segment::ChiTilde) == 7);
  CHECK(l.offset(Segment::Psi) == 9);
  CHECK(l.offset(Segment::PsiTilde) == 11);
  CHECK(l.offset(Segment::K) == 13);
  CHECK(l.offset(Segment::BTilde) == 14);
  CHECK(l.offset(Segment::B) == 15);
  CHECK(l.size(Segment::L) == 1);
  CHECK(l.size(Segment::Psi) == 2);
  CHECK(l.bit(0) == 15);
  const std::uint64_t idx = l.index({{Segment::R, 2}, {Segment::PsiTilde, 1}, {Segment::B, 1}});
  CHECK(l.value(Segment::R, idx) == 2);
  CHECK(l.value(Segment::PsiTilde, idx) == 1);
  CHECK(l.value(Segment::B, idx) == 1);
  CHECK(l.value(Segment::C, idx) == 0);
  CHECK(idx == ((std::uint64_t{2} << 14) | (std::uint64_t{1} << 3) | 1));
}

TEST_CASE("encode_input places matrix elements", "[circuit]") {
  const ProblemInstance inst = random_instance(3, 4, 0.1, ProblemKind::GEV);
  const StateVector s = encode_input(inst);
  CHECK(s.norm_squared() == Approx(1.0));
  const RegisterLayout& l = s.layout;
  CHECK(s.amplitudes(static_cast<Eigen::Index>(l.index({{Segment::R, 1}, {Segment::C, 3}}))) == inst.a(1, 3));
  CHECK(s.amplitudes(static_cast<Eigen::Index>(l.index({{Segment::R, 2}, {Segment::C, 0}, {Segment::L, 1}}))) ==
        (*inst.b)(2, 0));

  ProblemInstance raw = inst;
  raw.a *= 2.0;
  CHECK_ERROR_CODE(encode_input(raw), ErrorCode::NotNormalized);
}

TEST_CASE("single gates act on the addressed qubit", "[circuit]") {
  const RegisterLayout l{1};
  // X on qubit 3 with a negative control on qubit 0 and a positive one on qubit 1.
  const Gate g{GateName::X, 3, {{0, 0}, {1, 1}}, 0.0};
  StateVector fire = basis_state(1, std::uint64_t{1} << l.bit(1));
  apply_gate(fire, g);
  CHECK(std::abs(fire.amplitudes(static_cast<Eigen::Index>((1u << l.bit(1)) | (1u << l.bit(3)))) - 1.0) < 1e-15);

  StateVector hold = basis_state(1, (std::uint64_t{1} << l.bit(1)) | (std::uint64_t{1} << l.bit(0)));
  const ComplexVector before = hold.amplitudes;
  apply_gate(hold, g);
  CHECK(hold.amplitudes == before);

  StateVector h = basis_state(1, 0);
  apply_gate(h, {GateName::H, 2, {}, 0.0});
  CHECK(h.amplitudes(0).real() == Approx(1.0 / std::numbers::sqrt2));
  CHECK(h.amplitudes(static_cast<Eigen::Index>(1u << l.bit(2))).real() == Approx(1.0 / std::numbers::sqrt2));

  StateVector r = basis_state(1, std::uint64_t{1} << l.bit(5));
  apply_gate(r, {GateName::Rz, 5, {}, 0.8});
  CHECK(std::abs(r.amplitudes(static_cast<Eigen::Index>(1u << l.bit(5))) - std::polar(1.0, 0.4)) < 1e-15);

  StateVector y = basis_state(1, 0);
  apply_gate(y, {GateName::Ry, 4, {}, 0.8});
  CHECK(y.amplitudes(0).real() == Approx(std::cos(0.4)));
  CHECK(y.amplitudes(static_cast<Eigen::Index>(1u << l.bit(4))).real() == Approx(std::sin(0.4)));
}

TEST_CASE("the full program preserves the norm", "[circuit][property]") {
  CounterStream root(61);
  for (int trial = 0; trial < 4; ++trial) {
    CounterStream s = root.fork({static_cast<std::uint64_t>(trial)});
    const ProblemKind kind = trial % 2 == 0 ? ProblemKind::GEV : ProblemKind::EV;
    const ProblemInstance inst = random_instance(100 + trial, 2, 0.1, kind);
    const ParameterVector p = test::random_params(s, kind, 1, 3);
    const StateVector out = apply_program(encode_input(inst), compile_program(p, RegisterLayout{1}));
    CHECK(out.norm_squared() == Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("the K=0 branch of the controlled ansatz is the identity", "[circuit]") {
  CounterStream s(62);
  const ParameterVector p = test::random_params(s, ProblemKind::GEV, 2, 2);
  const GateProgram program = compile_program(p, RegisterLayout{2});
  const RegisterLayout& l = program.layout;
  // K = 0, chi = 2, psi = 1: W2 alone must leave this basis state untouched.
  const std::uint64_t idx = l.index({{Segment::Chi, 2}, {Segment::Psi, 1}});
  StateVector st = basis_state(2, idx);
  apply_stage(st, program, 2);
  CHECK(std::abs(st.amplitudes(static_cast<Eigen::Index>(idx)) - 1.0) < 1e-13);
}

TEST_CASE("the K=1 branch of the controlled ansatz applies U", "[circuit]") {
  CounterStream s(63);
  for (ProblemKind kind : {ProblemKind::GEV, ProblemKind::EV}) {
    const ParameterVector p = test::random_params(s, kind, 2, 2);
    const GateProgram program = compile_program(p, RegisterLayout{2});
    const RegisterLayout& l = program.layout;
    const UnitaryPair u = build_unitaries(p);
    // Start in |chi = 1>|psi = 3>|K = 1>; chi evolves under U_row, psi under U_col.
    StateVector st = basis_state(2, l.index({{Segment::Chi, 1}, {Segment::Psi, 3}, {Segment::K, 1}}));
    apply_stage(st, program, 2);
    for (std::uint64_t x = 0; x < 4; ++x) {
      for (std::uint64_t y = 0; y < 4; ++y) {
        const Complex got =
            st.amplitudes(static_cast<Eigen::Index>(l.index({{Segment::Chi, x}, {Segment::Psi, y}, {Segment::K, 1}})));
        const Complex want = u.row(static_cast<Eigen::Index>(x), 1) * u.col(static_cast<Eigen::Index>(y), 3);
        CHECK(std::abs(got - want) < 1e-12);
      }
    }
  }
}

TEST_CASE("final amplitudes carry the lower triangle and the pivot", "[circuit]") {
  CounterStream s(64);
  for (ProblemKind kind : {ProblemKind::GEV, ProblemKind::EV}) {
    const ProblemInstance inst = random_instance(kind == ProblemKind::GEV ? 5 : 6, 4, 0.1, kind);
    const ParameterVector p = test::random_params(s, kind, 2, 2);
    const StateVector out = apply_program(encode_input(inst), compile_program(p, RegisterLayout{2}));
    const RegisterLayout& l = out.layout;
    const TriangularForm form = triangular_form(inst, p);
    const double norm = std::pow(2.0, 2 * l.n) * std::numbers::sqrt2;
    for (std::uint64_t label = 0; label < (inst.b ? 2u : 1u); ++label) {
      const ComplexMatrix& m = label == 0 ? form.t : *form.s;
      for (std::uint64_t k = 1; k < 4; ++k) {
        for (std::uint64_t j = 0; j < k; ++j) {
          const auto idx = l.index({{Segment::L, label}, {Segment::ChiTilde, k}, {Segment::PsiTilde, j},
                                    {Segment::K, 1}, {Segment::BTilde, 1}, {Segment::B, 1}});
          const Complex amp = out.amplitudes(static_cast<Eigen::Index>(idx)) * norm;
          CHECK(std::abs(amp - m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j))) < 1e-12);
        }
      }
      const auto pivot = l.index({{Segment::L, label}, {Segment::BTilde, 1}, {Segment::B, 1}});
      const Complex expected = label == 0 ? inst.a(0, 0) : (*inst.b)(0, 0);
      CHECK(std::abs(out.amplitudes(static_cast<Eigen::Index>(pivot)) * std::numbers::sqrt2 - expected) < 1e-12);
    }
  }
}

TEST_CASE("measure samples and collapses", "[circuit]") {
  StateVector st = basis_state(1, 0);
  apply_gate(st, {GateName::Ry, 9, {}, 2.0 * std::acos(std::sqrt(0.7))});  // P(q9 = 1) = 0.3
  CounterStream root(65);
  int ones = 0;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    CounterStream s = root.fork({static_cast<std::uint64_t>(t)});
    const Measurement m = measure(st, 9, s);
    ones += m.outcome;
    CHECK(m.collapsed.norm_squared() == Approx(1.0));
    CHECK(m.probability == Approx(m.outcome ? 0.3 : 0.7));
  }
  const double sd = std::sqrt(0.3 * 0.7 / trials);
  CHECK(std::abs(ones / static_cast<double>(trials) - 0.3) < 4 * sd);

  CounterStream s(66);
  const StateVector zero = basis_state(1, 0);
  const Measurement m = measure(zero, 3, s);
  CHECK(m.outcome == 0);
  CHECK_ERROR_CODE(measure(zero, 99, s), ErrorCode::LayoutMismatch);
  // Conditioning on an outcome of vanishing probability is refused.
  StateVector faint = zero;
  faint.amplitudes(0) = 1e-9;
  CHECK_ERROR_CODE(measure(faint, 3, s), ErrorCode::ImpossibleOutcome);
}

TEST_CASE("gate counts follow the closed forms", "[circuit]") {
  for (int n = 1; n <= 3; ++n) {
    for (int M : {1, 4, 10}) {
      const ParameterVector p = ParameterVector::zeros(ProblemKind::GEV, n, M);
      const DepthReport r = depth_and_counts(compile_program(p, RegisterLayout{n}));
      const long N = 1L << n;
      CHECK(family_count(stage_counts(r, "W0"), "H") == 2 * n + 1);
      CHECK(family_count(stage_counts(r, "W1"), "CCX") == 2 * n);
      const GateCounts& w2 = stage_counts(r, "W2");
      CHECK(w2.rotations() == 2 * 6 * n * M);  // two controlled unitaries, 2 half-rotations per angle
      CHECK(family_count(w2, "CX") == 2 * 4 * n * M);
      CHECK(family_count(w2, "CCX") == 2 * (n - 1) * M);
      CHECK(family_count(stage_counts(r, "W3"), "CCX") == 2 * n);
      CHECK(family_count(stage_counts(r, "W4"), "H") == 2 * n);
      const GateCounts& w5 = stage_counts(r, "W5");
      CHECK(family_count(w5, "MCX") == N * (N - 1) / 2);
      CHECK(family_count(w5, "CX") == 1);
      CHECK(w5.toffoli_equivalent == N * (N - 1) / 2 * (2 * (2 * n + 1) - 3));
      CHECK(family_count(stage_counts(r, "W6"), "MCX") == 1);
      CHECK(r.program.total() == [&] {
        int t = 0;
        for (const auto& [name, c] : r.stages) t += c.total();
        return t;
      }());
    }
  }
}

TEST_CASE("ansatz depth grows linearly in M", "[circuit]") {
  auto w2_depth = [](int n, int M) {
    const DepthReport r = depth_and_counts(compile_program(ParameterVector::zeros(ProblemKind::EV, n, M), RegisterLayout{n}));
    for (const auto& [name, c] : r.stages) {
      if (name == "W2") return c.depth;
    }
    return -1;
  };
  for (int n = 1; n <= 3; ++n) {
    const int step = w2_depth(n, 20) - w2_depth(n, 10);
    CHECK(step > 0);
    CHECK(w2_depth(n, 30) - w2_depth(n, 20) == step);
  }
}

TEST_CASE("export and parse round-trip", "[circuit]") {
  CounterStream s(67);
  for (ProblemKind kind : {ProblemKind::GEV, ProblemKind::EV}) {
    const ParameterVector p = test::random_params(s, kind, 2, 3);
    const GateProgram program = compile_program(p, RegisterLayout{2});
    const std::string text = export_program(program);
    const GateProgram back = parse_program(text);
    CHECK(back.layout == program.layout);
    CHECK(back.kind == program.kind);
    CHECK(back.gates == program.gates);
    REQUIRE(back.stages.size() == program.stages.size());
    for (std::size_t i = 0; i < back.stages.size(); ++i) {
      CHECK(back.stages[i].label == program.stages[i].label);
      CHECK(back.stages[i].begin == program.stages[i].begin);
      CHECK(back.stages[i].end == program.stages[i].end);
    }
    CHECK(export_program(back) == text);
  }
  CHECK_ERROR_CODE(parse_program("H 0\n"), ErrorCode::ParseFailure);
  CHECK_ERROR_CODE(parse_program("# program n=1 kind=gev width=10\nFOO 1\n"), ErrorCode::ParseFailure);
  CHECK_ERROR_CODE(parse_program("# program n=1 kind=gev width=10\nX 1 ctrl:+\n"), ErrorCode::ParseFailure);
}

TEST_CASE("program validation", "[circuit]") {
  GateProgram program = compile_program(ParameterVector::zeros(ProblemKind::EV, 1, 1), RegisterLayout{1});
  program.gates.push_back({GateName::X, 2, {{2, 1}}, 0.0});
  CHECK_ERROR_CODE(program.validate(), ErrorCode::LayoutMismatch);
  program.gates.back() = {GateName::X, 40, {}, 0.0};
  CHECK_ERROR_CODE(program.validate(), ErrorCode::LayoutMismatch);
  CHECK_ERROR_CODE(compile_program(ParameterVector::zeros(ProblemKind::EV, 1, 1), RegisterLayout{2}),
                   ErrorCode::LayoutMismatch);
  ParameterVector bad = ParameterVector::zeros(ProblemKind::EV, 1, 1);
  bad.values.conservativeResize(2);
  CHECK_ERROR_CODE(compile_program(bad, RegisterLayout{1}), ErrorCode::BadParameterCount);
}
