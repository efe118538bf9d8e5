#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fjq/fj.hpp"
#include "fjq/index_expr.hpp"
#include "fjq/model.hpp"
#include "oracle.hpp"

using namespace fjq;

namespace {

const std::map<std::string, double> kParams{{"Lambda", 1.7}};

double eta(int I) { return I == 0 ? -1 : 1; }

int levi(int a, int b, int c) { return (a - b) * (b - c) * (c - a) / 2; }

Expr sym(const std::string& n, int I = -1, int s = -1) { return Expr::symbol(Symbol(n, I, s)); }

const char* kToy = R"(
[model]
name = toy
method = fj
variables = config
description = point particle with a chain of three constraints

[variables]
q
r
l

[one_forms]
q = r

[potential]
1/2*r*r + l*q

[constraints]
Q = q
R = r

[multipliers]
Q = u
R = w
)";

// Dense matrix of `table` in the row/column order of `f`.
oracle::Dense dense_in_order(const KernelMatrix& table, const KernelMatrix& f, double k1, double k2) {
  oracle::Dense d(f.nrows(), std::vector<double>(f.ncols()));
  for (std::size_t i = 0; i < f.nrows(); ++i)
    for (std::size_t j = 0; j < f.ncols(); ++j) d[i][j] = oracle::entry_value(table.get(f.rows()[i], f.cols()[j]), k1, k2, kParams);
  return d;
}

// The numeric inverse of the final matrix agrees with the symbolic table.
void check_numeric_inverse(const SymplecticSystem& s, const KernelMatrix& table) {
  KernelMatrix f = symplectic_matrix(s);
  for (auto [k1, k2] : {std::pair{0.3, -1.1}, std::pair{2.0, 0.7}, std::pair{-0.45, 0.25}}) {
    oracle::Dense inv;
    REQUIRE(oracle::invert(oracle::evaluate(f, k1, k2, kParams), inv));
    CHECK(oracle::max_diff(inv, dense_in_order(table, f, k1, k2)) < 1e-10);
  }
}

struct Cell {
  Label a, b;
  OperatorEntry k;
};

// Every cell of the table equals the listed value (or its antisymmetric
// partner), and every other cell is zero.
void check_cells(const KernelMatrix& t, const std::vector<Cell>& cells) {
  std::map<std::pair<Label, Label>, OperatorEntry> want;
  for (const auto& c : cells) {
    want[{c.a, c.b}] = c.k;
    want.emplace(std::pair{c.b, c.a}, -adjoint(c.k));
  }
  for (std::size_t i = 0; i < t.nrows(); ++i)
    for (std::size_t j = 0; j < t.ncols(); ++j) {
      auto it = want.find({t.rows()[i], t.cols()[j]});
      OperatorEntry w = it == want.end() ? OperatorEntry() : it->second;
      INFO(render(t.rows()[i]), " ", render(t.cols()[j]), ": ", render(t.at(i, j)));
      CHECK(t.at(i, j) == w);
    }
}

OperatorEntry op(const std::string& s) { return parse_op(s); }

Expr variation(const Expr& density, const std::vector<GaugeTransformation>& tr) {
  Expr out;
  for (const auto& t : tr)
    for (const auto& [tags, coeff] : linear_coefficients(density, t.field))
      out += coeff * apply_partials({tags[0], tags[1], tags[2]}, t.delta);
  return out;
}

}  // namespace

TEST_CASE("toy chain: three constraints and a hand-built inverse") {
  ModelSpec m = load_model_text(kToy);
  FJResult r = run_fj(m.initial, m.fj, std::nullopt);
  std::vector<ConstraintRecord> all;
  for (const auto& l : r.levels)
    for (const auto& c : l.constraints) all.push_back(c);
  REQUIRE(all.size() == 3);
  CHECK(all[0].derived == sym("q"));
  CHECK(all[1].derived == -sym("r"));
  CHECK(all[2].derived == sym("l"));
  CHECK(!all[2].matched);
  REQUIRE(r.brackets);
  REQUIRE(r.dof);
  CHECK(*r.dof == 0);

  // a = (r, 0, 0, q, r, l) on (q, r, l, u, w, mu); f_ij = da_j/dx^i - da_i/dx^j
  std::vector<Label> order{Label("q"), Label("r"), Label("l"), Label("u"), Label("w"), r.brackets->matrix.rows().back()};
  oracle::Dense f(6, std::vector<double>(6, 0));
  auto set = [&](int i, int j, double v) {
    f[i][j] = v;
    f[j][i] = -v;
  };
  set(0, 1, -1);  // a_q = r
  set(0, 3, 1);   // a_u = q
  set(1, 4, 1);   // a_w = r
  set(2, 5, 1);   // a_mu = l
  oracle::Dense inv;
  REQUIRE(oracle::invert(f, inv));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      OperatorEntry e = r.brackets->matrix.get(order[i], order[j]);
      CHECK(oracle::entry_value(e, 0.3, 0.4, kParams) == doctest::Approx(inv[i][j]).epsilon(1e-12));
    }
}

TEST_CASE("configuration space: constraints, levels and the identity at level 1") {
  ModelSpec m = load_model("abelian-exotic-config");
  FJResult r = run_fj(m.initial, m.fj, std::nullopt);
  REQUIRE(r.levels.size() >= 3);
  const LevelReport& l0 = r.levels[0];
  CHECK(l0.matrix.nrows() == 18);
  CHECK(l0.modes.size() == 6);
  REQUIRE(l0.constraints.size() == 6);
  for (int I = 0; I < 3; ++I) {
    Binding b{{"I", I}};
    Expr om = parse_expr("-Lambda*eps(i,j)*eta(I,J)*d(i,e(J,j))", m.ctx, b);
    Expr be = parse_expr("-1/2*eps(i,j)*eta(I,J)*(d(i,A(J,j)) - d(j,A(J,i)))", m.ctx, b);
    CHECK(l0.constraints[I].derived == om);
    CHECK(l0.constraints[3 + I].derived == be);
    CHECK(l0.constraints[I].label == Label("Omega", I));
    CHECK(l0.constraints[I].matched);
    for (const auto& c : {l0.constraints[I], l0.constraints[3 + I]}) {
      auto q = c.factor.as_rational();
      REQUIRE(q);
      CHECK(*q != Rational(0));
      CHECK(c.factor * c.normal == c.derived);
    }
  }
  for (std::size_t i = 1; i < r.levels.size(); ++i) CHECK(r.levels[i].constraints.empty());
  CHECK(r.levels.back().stage == "level1");
  CHECK(r.levels.back().potential_vanishes);
  CHECK(!r.brackets);
  REQUIRE(r.dof);
  CHECK(*r.dof == 0);
}

TEST_CASE("configuration space: abelian gauge transformations") {
  ModelSpec m = load_model("abelian-exotic-config");
  FJResult r = run_fj(m.initial, m.fj, std::nullopt);
  std::map<Label, Expr> got;
  for (const auto& t : r.transformations) got[t.field] = t.delta;
  for (int I = 0; I < 3; ++I) {
    for (int i = 1; i <= 2; ++i) {
      CHECK(got.at(Label("e", I, i)) == apply_partial(i, sym("epsilon", I)));
      CHECK(got.at(Label("A", I, i)) == apply_partial(i, sym("zeta", I)));
    }
    CHECK(got.at(Label("e", I, 0)) == apply_partial(0, sym("epsilon", I)));
    CHECK(got.at(Label("A", I, 0)) == apply_partial(0, sym("zeta", I)));
  }
}

TEST_CASE("temporal gauge: 24x24 matrix, exact inverse and bracket cells") {
  ModelSpec m = load_model("abelian-exotic-config");
  FJResult r = run_fj(m.initial, m.fj, "temporal");
  REQUIRE(r.fixed);
  KernelMatrix f = symplectic_matrix(*r.fixed);
  CHECK(f.nrows() == 24);
  CHECK(f.ncols() == 24);
  CHECK(verify_inverse(f, r.brackets->matrix).is_zero());
  check_numeric_inverse(*r.fixed, r.brackets->matrix);

  std::vector<Cell> cells;
  for (int I = 0; I < 3; ++I) {
    cells.push_back({Label("lambda", I), Label("phi", I), op("1")});
    cells.push_back({Label("theta", I), Label("alpha", I), op("1")});
    for (int i = 1; i <= 2; ++i) {
      cells.push_back({Label("e", I, i), Label("phi", I), op("D(" + std::to_string(i) + ")")});
      cells.push_back({Label("A", I, i), Label("alpha", I), op("D(" + std::to_string(i) + ")")});
    }
    // eps_{12} eta^{II} / Lambda and eps_{12} eta^{II}
    cells.push_back({Label("e", I, 1), Label("e", I, 2), OperatorEntry::scalar(Expr(Rational(static_cast<long>(eta(I)))) * Expr::param("Lambda", -1))});
    cells.push_back({Label("A", I, 1), Label("A", I, 2), OperatorEntry::scalar(Expr(static_cast<long>(eta(I))))});
  }
  check_cells(r.brackets->matrix, cells);
}

TEST_CASE("coulomb gauge: transverse brackets without e-e or A-A cells") {
  ModelSpec m = load_model("abelian-exotic-config");
  FJResult r = run_fj(m.initial, m.fj, "coulomb");
  REQUIRE(r.fixed);
  const KernelMatrix& t = r.brackets->matrix;
  CHECK(verify_inverse(symplectic_matrix(*r.fixed), t).is_zero());
  check_numeric_inverse(*r.fixed, t);
  std::vector<Cell> cells;
  for (int I = 0; I < 3; ++I) {
    std::string s = std::to_string(static_cast<long>(eta(I)));
    cells.push_back({Label("e", I, 1), Label("lambda", I), op(s + "*Lambda^-1*D(2)*invlap")});
    cells.push_back({Label("e", I, 2), Label("lambda", I), op("-" + s + "*Lambda^-1*D(1)*invlap")});
    cells.push_back({Label("A", I, 1), Label("theta", I), op(s + "*D(2)*invlap")});
    cells.push_back({Label("A", I, 2), Label("theta", I), op("-" + s + "*D(1)*invlap")});
    for (int i = 1; i <= 2; ++i) {
      std::string d = "D(" + std::to_string(i) + ")";
      cells.push_back({Label("e", I, i), Label("rho", I), op("-" + d + "*invlap")});
      cells.push_back({Label("A", I, i), Label("gamma", I), op("-" + d + "*invlap")});
    }
    cells.push_back({Label("lambda", I), Label("rho", I), op("-invlap")});
    cells.push_back({Label("theta", I), Label("gamma", I), op("-invlap")});
  }
  check_cells(t, cells);
  for (int I = 0; I < 3; ++I)
    for (int J = 0; J < 3; ++J)
      for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j) {
          CHECK(t.get(Label("e", I, i), Label("e", J, j)).is_zero());
          CHECK(t.get(Label("A", I, i), Label("A", J, j)).is_zero());
        }
}

TEST_CASE("partial gauge leaves the matrix singular") {
  ModelSpec m = load_model("abelian-exotic-config");
  m.fj.gauges["half"] = m.fj.gauges.at("temporal");
  m.fj.gauges["half"].conditions.resize(3);
  try {
    run_fj(m.initial, m.fj, "half");
    FAIL("expected StillSingular");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StillSingular);
  }
}

TEST_CASE("phase space: constraints and the transverse projector table") {
  ModelSpec m = load_model("abelian-exotic-phase");
  FJResult r = run_fj(m.initial, m.fj, "transverse");
  const LevelReport& l0 = r.levels[0];
  REQUIRE(l0.constraints.size() == 6);
  for (int I = 0; I < 3; ++I) {
    Binding b{{"I", I}};
    CHECK(l0.constraints[I].derived == parse_expr("-2*d(i,p(I,i))", m.ctx, b));
    CHECK(l0.constraints[3 + I].derived == parse_expr("-2*d(i,pi(I,i))", m.ctx, b));
  }
  REQUIRE(r.fixed);
  const KernelMatrix& t = r.brackets->matrix;
  CHECK(verify_inverse(symplectic_matrix(*r.fixed), t).is_zero());
  check_numeric_inverse(*r.fixed, t);

  std::vector<Cell> cells;
  for (int I = 0; I < 3; ++I) {
    for (int i = 1; i <= 2; ++i) {
      std::string di = "D(" + std::to_string(i) + ")";
      for (int j = 1; j <= 2; ++j) {
        std::string proj = (i == j ? "1 - " : "-") + di + "*D(" + std::to_string(j) + ")*invlap";
        cells.push_back({Label("e", I, i), Label("p", I, j), op(proj)});
        cells.push_back({Label("A", I, i), Label("pi", I, j), op(proj)});
      }
      cells.push_back({Label("p", I, i), Label("lambda", I), op("-1/2*" + di + "*invlap")});
      cells.push_back({Label("pi", I, i), Label("rho", I), op("-1/2*" + di + "*invlap")});
      cells.push_back({Label("e", I, i), Label("phi", I), op("-" + di + "*invlap")});
      cells.push_back({Label("A", I, i), Label("theta", I), op("-" + di + "*invlap")});
    }
    cells.push_back({Label("lambda", I), Label("phi", I), op("-1/2*invlap")});
    cells.push_back({Label("rho", I), Label("theta", I), op("-1/2*invlap")});
  }
  check_cells(t, cells);
}

TEST_CASE("non-abelian: ansatz modes and inverse verify exactly") {
  ModelSpec m = load_model("nonabelian-exotic");
  FJResult r = run_fj(m.initial, m.fj, "temporal");
  bool saw_weak = false;
  for (const auto& l : r.levels) {
    if (l.stage == "consistency0") {
      CHECK(l.from_ansatz);
      CHECK(!l.weak_modes);
      for (const auto& v : l.modes) CHECK(mode_annihilates(l.matrix, v));
    }
    if (l.stage == "level1") {
      CHECK(l.from_ansatz);
      saw_weak = l.weak_modes;
      CHECK(l.potential_vanishes);
    }
    if (l.stage != "level0") CHECK(l.constraints.empty());
  }
  CHECK(saw_weak);
  REQUIRE(r.fixed);
  REQUIRE(r.brackets);
  CHECK(r.brackets->from_ansatz);
  CHECK(verify_inverse(symplectic_matrix(*r.fixed), r.brackets->matrix).is_zero());
  REQUIRE(r.dof);
  CHECK(*r.dof == 0);

  // generalized brackets among the frame and connection components
  const KernelMatrix& t = r.brackets->matrix;
  for (int I = 0; I < 3; ++I)
    for (int J = 0; J < 3; ++J) {
      Expr sign(static_cast<long>(I == J ? eta(I) : 0));
      CHECK(t.get(Label("e", I, 1), Label("e", J, 2)) == OperatorEntry::scalar(Rational(1, 2) * sign * Expr::param("Lambda", -1)));
      CHECK(t.get(Label("A", I, 1), Label("A", J, 2)) == OperatorEntry::scalar(Rational(1, 2) * sign));
      CHECK(t.get(Label("lambda", I), Label("phi", J)) == OperatorEntry::scalar(Expr(I == J ? 1 : 0)));
      for (int i = 1; i <= 2; ++i) {
        // (delta^I_J d_i - eps^I_JK A^K_i), eps^I_JK = eta^II eps_IJK
        Expr a, e;
        for (int K = 0; K < 3; ++K) {
          a -= Expr(static_cast<long>(eta(I) * levi(I, J, K))) * sym("A", K, i);
          e -= Expr(static_cast<long>(eta(I) * levi(I, J, K))) * sym("e", K, i);
        }
        OperatorEntry d = I == J ? op("D(" + std::to_string(i) + ")") : OperatorEntry();
        CHECK(t.get(Label("e", I, i), Label("phi", J)) == d + OperatorEntry::scalar(a));
        CHECK(t.get(Label("A", I, i), Label("alpha", J)) == d + OperatorEntry::scalar(a));
        CHECK(t.get(Label("e", I, i), Label("alpha", J)) == OperatorEntry::scalar(e));
        CHECK(t.get(Label("A", I, i), Label("phi", J)) == OperatorEntry::scalar(Expr::param("Lambda") * e));
      }
    }
}

TEST_CASE("non-abelian: computed gauge transformations preserve the constraints") {
  ModelSpec m = load_model("nonabelian-exotic");
  FJResult r = run_fj(m.initial, m.fj, std::nullopt);
  REQUIRE(!r.transformations.empty());
  WeakReducer weak = reducer_for(r.unfixed.constraints);
  for (const auto& c : r.unfixed.constraints) {
    INFO(render(c.label));
    CHECK(weak.weakly_zero(variation(c.normal, r.transformations)));
  }

  // Cross terms written as eps^I_JK e^K zeta^J and Lambda eps^I_JK e^K eps^J
  // (rather than e^J zeta^K) break the invariance of Omega.
  std::vector<GaugeTransformation> alt;
  for (int I = 0; I < 3; ++I)
    for (int i = 1; i <= 2; ++i) {
      Expr de = apply_partial(i, sym("epsilon", I)), dA = apply_partial(i, sym("zeta", I));
      for (int J = 0; J < 3; ++J)
        for (int K = 0; K < 3; ++K) {
          Expr c(static_cast<long>(eta(I) * levi(I, J, K)));
          de += c * (sym("A", J, i) * sym("epsilon", K) + sym("e", K, i) * sym("zeta", J));
          dA += c * (sym("A", J, i) * sym("zeta", K) + Expr::param("Lambda") * sym("e", K, i) * sym("epsilon", J));
        }
      alt.push_back({Label("e", I, i), de});
      alt.push_back({Label("A", I, i), dA});
    }
  bool broken = false;
  for (const auto& c : r.unfixed.constraints)
    if (c.label.name == "Omega") broken |= !weak.weakly_zero(variation(c.normal, alt));
  CHECK(broken);
}

TEST_CASE("non-abelian without ansatz needs one") {
  ModelSpec m = strip_ansatz(load_model("nonabelian-exotic"));
  try {
    run_fj(m.initial, m.fj, "temporal");
    FAIL("expected NeedsAnsatz");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NeedsAnsatz);
  }
}
