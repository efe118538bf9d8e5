#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fjq/index_expr.hpp"
#include "fjq/inversion.hpp"
#include "oracle.hpp"

using namespace fjq;

namespace {

OperatorEntry op(const std::string& s) { return parse_op(s); }

Label lab(const std::string& n, int i = -1, int s = -1) { return Label(n, i, s); }

}  // namespace

TEST_CASE("composition applies the Leibniz rule to coefficients") {
  Symbol a("a"), b("b");
  OperatorEntry lhs = compose(op("a*D(1)"), op("b"));
  OperatorEntry want = op("a*b*D(1) + a*d(1,b)");
  CHECK(lhs == want);
  // second order: D1^2 o b = b D1^2 + 2 d1b D1 + d1d1 b
  CHECK(compose(op("D(1)^2"), op("b")) == op("b*D(1)^2 + 2*d(1,b)*D(1) + d(1,d(1,b))"));
}

TEST_CASE("inverse Laplacian cancels against the Laplacian") {
  CHECK(op("(D(1)^2 + D(2)^2)*invlap") == OperatorEntry::identity());
  CHECK(op("D(1)*(D(1)^2 + D(2)^2)*invlap^2") == op("D(1)*invlap"));
  CHECK(op("D(1)*invlap").inv_lap() == 1);
}

TEST_CASE("inverse Laplacian may not pass a field-dependent coefficient") {
  CHECK_THROWS_AS(compose(op("invlap"), op("a")), Error);
  CHECK_NOTHROW(compose(op("a"), op("invlap")));
}

TEST_CASE("adjoint is an involution and reverses composition") {
  OperatorEntry x = op("a*D(1)*D(2) + b*D(2) + c");
  CHECK(adjoint(adjoint(x)) == x);
  OperatorEntry y = op("q*D(1) + r");
  CHECK(adjoint(compose(x, y)) == compose(adjoint(y), adjoint(x)));
  CHECK(adjoint(op("D(1)*invlap")) == op("-D(1)*invlap"));
}

TEST_CASE("apply agrees with composition") {
  OperatorEntry x = op("a*D(1) + D(2)^2"), y = op("b*D(2)");
  Expr f = Expr::symbol(Symbol("f"));
  CHECK(compose(x, y).apply(f) == x.apply(y.apply(f)));
}

TEST_CASE("render then parse round trips operator entries") {
  for (const char* s : {"-1/2*Lambda*D(1)*invlap", "(a + b)*D(1)^2 - D(2)", "(D(1) - Lambda*D(2))*invlap^2", "1"}) {
    OperatorEntry o = op(s);
    CHECK(parse_op(render(o)) == o);
  }
}

TEST_CASE("invert a rotation-like constant kernel") {
  KernelMatrix m({lab("x"), lab("y")}, {lab("x"), lab("y")});
  m.at(0, 0) = op("D(1)");
  m.at(0, 1) = op("D(2)");
  m.at(1, 0) = op("-D(2)");
  m.at(1, 1) = op("D(1)");
  KernelMatrix inv = invert_constant(m);
  CHECK(inv.at(0, 0) == op("D(1)*invlap"));
  CHECK(inv.at(0, 1) == op("-D(2)*invlap"));
  CHECK(verify_inverse(m, inv).is_zero());
}

TEST_CASE("inverse agrees with a numeric oracle") {
  // mixed block with a parameter and a derivative coupling
  std::vector<Label> L{lab("a"), lab("b"), lab("c"), lab("d")};
  KernelMatrix m(L, L);
  m.at(0, 1) = op("-2*Lambda");
  m.at(1, 0) = op("2*Lambda");
  m.at(0, 2) = op("D(1)");
  m.at(2, 0) = op("D(1)");
  m.at(1, 2) = op("D(2)");
  m.at(2, 1) = op("D(2)");
  m.at(2, 3) = op("-1");
  m.at(3, 2) = op("1");
  KernelMatrix inv = invert_constant(m);
  CHECK(verify_inverse(m, inv).is_zero());
  std::map<std::string, double> par{{"Lambda", 2.0}};
  for (auto [k1, k2] : std::vector<std::pair<double, double>>{{0.7, -1.3}, {2.1, 0.4}}) {
    oracle::Dense num, want = oracle::evaluate(inv, k1, k2, par);
    REQUIRE(oracle::invert(oracle::evaluate(m, k1, k2, par), num));
    CHECK(oracle::max_diff(num, want) < 1e-10);
  }
}

TEST_CASE("singular kernels report rank and a left null basis") {
  std::vector<Label> L{lab("u"), lab("w"), lab("z")};
  KernelMatrix m(L, L);
  m.at(0, 1) = op("-1");
  m.at(1, 0) = op("1");
  try {
    invert_constant(m);
    FAIL("expected singular");
  } catch (const SingularError& e) {
    CHECK(e.rank() == 2);
    REQUIRE(e.modes().size() == 1);
    CHECK(mode_annihilates(m, e.modes()[0]));
  }
}

TEST_CASE("left null space of a rectangular kernel") {
  KernelMatrix m({lab("u"), lab("w")}, {lab("z")});
  m.at(0, 0) = op("D(1)");
  m.at(1, 0) = op("D(2)");
  auto modes = left_null_space(m);
  REQUIRE(modes.size() == 1);
  CHECK(mode_annihilates(m, modes[0]));
  // free variable is the later row, with a monic leading coefficient there
  const auto& [f, comps] = *modes[0].parts.begin();
  CHECK(f.name == "v_w");
  CHECK(comps[1] == op("D(1)"));
  CHECK(comps[0] == op("-D(2)"));
}

TEST_CASE("mode contraction integrates by parts") {
  ModeVector mv;
  mv.rows = {lab("u")};
  mv.parts[Symbol("v")] = {op("D(1)")};
  Expr z = Expr::symbol(Symbol("p", 0, 1));
  auto c = mv.contract({z});
  CHECK(c.at(Symbol("v")) == -Expr::symbol(Symbol("p", 0, 1).derived(1)));
}

TEST_CASE("parallel and serial matrix products agree") {
  std::vector<Label> L{lab("a"), lab("b"), lab("c")};
  KernelMatrix x(L, L), y(L, L);
  const char* cells[] = {"D(1)", "q*D(2)", "Lambda", "0", "r", "D(1)*D(2)", "1", "-D(2)", "q"};
  for (int i = 0; i < 9; ++i) {
    x.at(i / 3, i % 3) = op(cells[i]);
    y.at(i % 3, i / 3) = op(cells[(i * 4) % 9]);
  }
  CHECK(matmul(x, y) == matmul_reference(x, y));
}

TEST_CASE("polynomial gcd and exact division") {
  int n = 3;
  Poly x = Poly::variable(n, 0), y = Poly::variable(n, 1), z = Poly::variable(n, 2);
  Poly a = (x + y) * (x - z) * (y + Poly::constant(n, 2));
  Poly b = (x + y) * (y * z + x) * (y + Poly::constant(n, 2));
  Poly g = gcd(a, b);
  CHECK(g == monic((x + y) * (y + Poly::constant(n, 2))));
  CHECK(exact_divide(a, g) * g == a);
  RatFunc r(a, b);
  CHECK(r.num() * b == r.den() * a);
}
