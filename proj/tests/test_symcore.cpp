#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fjq/error.hpp"
#include "fjq/index_expr.hpp"

using namespace fjq;

namespace {

ParseContext chern_ctx() {
  ParseContext c;
  c.fields["e"] = {"e", true, true, true, true};
  c.fields["A"] = {"A", true, true, true, true};
  c.fields["p"] = {"p", true, false, true, true};
  return c;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Validation;
}

}  // namespace

TEST_CASE("contraction over internal and spatial dummies") {
  auto ctx = chern_ctx();
  // eps^{0ij} eta_IJ d_i e_j^J for I = 1: single-component oracle by hand
  Expr got = parse_expr("eps(i,j)*eta(I,J)*d(i,e(J,j))", ctx, {{"I", 1}});
  Symbol e12("e", 1, 2), e11("e", 1, 1);
  Expr want = Expr::symbol(e12.derived(1)) - Expr::symbol(e11.derived(2));
  CHECK(got == want);
  // eta lowers the time component with a sign
  Expr t = parse_expr("eta(I,J)*e(J,1)", ctx, {{"I", 0}});
  CHECK(t == -Expr::symbol(Symbol("e", 0, 1)));
}

TEST_CASE("internal Levi-Civita is +1 on 012 with all lower indices") {
  auto ctx = chern_ctx();
  CHECK(parse_expr("eps3(0,1,2)", ctx) == Expr(1));
  CHECK(parse_expr("eps3(1,0,2)", ctx) == Expr(-1));
  CHECK(parse_expr("epsst(2,0,1)", ctx) == Expr(1));
  CHECK(parse_expr("eps(2,1)", ctx) == Expr(-1));
  // raising the first slot with etainv gives eps^0_12 = -1
  CHECK(parse_expr("etainv(I,L)*eps3(L,1,2)", ctx, {{"I", 0}}) == Expr(-1));
}

TEST_CASE("malformed index structure is rejected with the index name") {
  auto ctx = chern_ctx();
  try {
    parse_expr("e(I,i)*e(I,j)*eta(I,J)", ctx, {{"i", 1}, {"j", 1}, {"J", 0}});
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Structural);
    CHECK(std::string(e.what()).find("index I") != std::string::npos);
  }
  CHECK(kind_of([&] { parse_expr("e(I,1)*e(I,2)", ctx); }) == ErrorKind::Structural);
  CHECK(kind_of([&] { parse_expr("e(I,1) + e(J,1)", ctx, {{"I", 0}, {"J", 0}}); }) == ErrorKind::Structural);
  CHECK(kind_of([&] { parse_expr("e(I,1", ctx); }) == ErrorKind::Parse);
  // up-down contraction is fine
  CHECK_NOTHROW(parse_expr("p(I,1)*e(I,1)", ctx));
}

TEST_CASE("parse errors carry line and column") {
  try {
    parse("e(0,1) + * 2", {}, 3, 5);
    FAIL("expected error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 14);
  }
}

TEST_CASE("render then parse round trips") {
  auto ctx = chern_ctx();
  Expr e = parse_expr("-1/2*Lambda*eps(i,j)*eta(I,J)*e(I,0)*d(i,e(J,j)) + 3*Lambda^-2*dt(e(1,2))*e(1,2)^2", ctx);
  Expr back = parse_expr(render(e), ctx);
  CHECK(back == e);
}

TEST_CASE("apply_partial obeys the Leibniz rule") {
  Symbol q("q"), r("r");
  Expr f = Expr::symbol(q) * Expr::symbol(q) * Expr::symbol(r);
  Expr got = apply_partial(1, f);
  Expr want = Rational(2) * Expr::symbol(q) * Expr::symbol(q.derived(1)) * Expr::symbol(r) +
              Expr::symbol(q) * Expr::symbol(q) * Expr::symbol(r.derived(1));
  CHECK(got == want);
}

TEST_CASE("functional derivative of the first-order potential") {
  auto ctx = chern_ctx();
  Expr V = parse_expr("-1/2*eps(i,j)*eta(I,J)*(2*Lambda*e(I,0)*d(i,e(J,j)))", ctx);
  for (int I = 0; I < 3; ++I) {
    Expr got = functional_derivative(V, Symbol("e", I, 0));
    Expr want = parse_expr("-Lambda*eps(i,j)*eta(I,J)*d(i,e(J,j))", ctx, {{"I", I}});
    CHECK(got == want);
  }
  // derivative with respect to e_j moves the derivative across, and the
  // antisymmetry of eps makes the result depend only on d e_0
  Expr de = functional_derivative(V, Symbol("e", 1, 1));
  Expr want = parse_expr("Lambda*eps(i,1)*eta(I,1)*d(i,e(I,0))", ctx);
  CHECK(de == want);
}

TEST_CASE("second spatial derivatives of the target are rejected") {
  Symbol q("q");
  Expr d = Expr::symbol(q.derived(1).derived(1)) * Expr::symbol(q);
  CHECK(kind_of([&] { functional_derivative(d, q); }) == ErrorKind::UnsupportedOrder);
  CHECK_NOTHROW(functional_derivative(d, q, 2));
}

TEST_CASE("Euler-Lagrange of the A A-dA density") {
  auto ctx = chern_ctx();
  ParseContext st = ctx;
  Expr L = parse_expr("1/2*epsst(mu,nu,rho)*eta(I,J)*A(I,mu)*d(nu,A(J,rho))", st);
  for (int K = 0; K < 3; ++K)
    for (int s = 0; s < 3; ++s) {
      Expr got = euler_lagrange(L, Symbol("A", K, s));
      Expr want = parse_expr("epsst(sigma,nu,rho)*eta(K,J)*d(nu,A(J,rho))", st, {{"K", K}, {"sigma", s}});
      CHECK(got == want);
    }
}

TEST_CASE("declarations") {
  auto d = parse_declaration("e(I^,i)");
  CHECK(d.field.has_internal);
  CHECK(d.field.internal_up);
  CHECK(d.components().size() == 6);
  auto t = parse_declaration("p(I_,0)");
  CHECK(!t.field.internal_up);
  CHECK(t.components().size() == 3);
  CHECK(t.components()[2] == Symbol("p", 2, 0));
  CHECK(parse_declaration("A(I^,mu)").components().size() == 9);
  CHECK(parse_declaration("q").components().size() == 1);
}

TEST_CASE("evaluation") {
  auto ctx = chern_ctx();
  Expr e = parse_expr("Lambda^2*e(0,1) - 1/Lambda", ctx);
  Rational v = e.evaluate([](const Symbol&) { return Rational(3); }, {{"Lambda", 2}});
  CHECK(v == Rational(23, 2));
}
