#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ews/errors.hpp"
#include "ews/scaling.hpp"

using namespace ews;

namespace {

SweepResult synthetic(double c, double s, double k, double lo = -8, double hi = -2, int n = 20) {
  SweepResult r;
  for (double p : log_spaced_p(lo, hi, n)) {
    const double q = -p;
    r.points.push_back({p, c * std::pow(q, s) * std::pow(-std::log(q), k), 0.0});
  }
  return r;
}

const FitWindow kAll{-1.0 + 1e-12, -1e-300};

}  // namespace

TEST_CASE("one-dimensional catalog") {
  CHECK(law_1d(2.0) == ScalingLaw{-0.5, 0, false});
  CHECK(law_1d(1.0) == ScalingLaw{0.0, 1, false});
  CHECK(law_1d(1.0, 0.25) == ScalingLaw{-0.5, 0, false});
  CHECK(law_1d(0.5).convergent);
  CHECK(law_1d(0.5, 0.25) == ScalingLaw{0.0, 1, false});
  CHECK(law_1d(0.4, 0.1).convergent);
  CHECK_THROWS_AS(law_1d(0.0), ArgumentError);
  CHECK_THROWS_AS(law_1d(2.0, 0.5), ArgumentError);
  CHECK(law_1d(2.0).describe() == "s=-0.5 k=0");
  CHECK(law_1d(0.5).describe() == "convergent");
}

TEST_CASE("one-dimensional exponents stay in (-1, 0)") {
  for (double alpha = 0.3; alpha < 50; alpha *= 1.37) {
    for (double gamma : {0.0, 0.1, 0.2, 0.3, 0.45}) {
      if (2 * gamma + alpha <= 1.0) continue;
      const auto law = law_1d(alpha, gamma);
      CHECK(law.s == doctest::Approx(-1.0 + (1.0 - 2.0 * gamma) / alpha));
      CHECK(law.s > -1.0);
      CHECK(law.s < 0.0);
    }
  }
  CHECK(law_1d(1e6).s == doctest::Approx(-1.0).epsilon(1e-5));
}

TEST_CASE("row labels") {
  CHECK(catalog_row_1d(2.0) == "Table 1, α>1");
  CHECK(catalog_row_1d(1.0) == "Table 1, α=1");
  CHECK(catalog_row_1d(0.5) == "Table 1, 0<α<1");
  CHECK(catalog_row_1d(1.0, 0.25) == "Table 2, 2γ+α>1");
  CHECK(catalog_row_nd(MultiIndex{2, 10}) == "Table 3, case 1");
  CHECK(catalog_row_nd(MultiIndex{1, 5}) == "Table 3, case 2");
  CHECK(catalog_row_nd(MultiIndex{3, 3}) == "Table 3, case 3");
  CHECK(catalog_row_nd(MultiIndex{1, 1}) == "Table 3, case 4");
  CHECK(catalog_row_nd(MultiIndex{2, 3, 4}) == "Table 4, case 1");
  CHECK(catalog_row_nd(MultiIndex{2, 2, 4}) == "Table 4, case 2");
  CHECK(catalog_row_nd(MultiIndex{2, 4, 4}) == "Table 4, case 3");
  CHECK(catalog_row_nd(MultiIndex{2, 2, 2}) == "Table 4, case 4");
  CHECK(catalog_row_nd(MultiIndex{1, 2, 3}) == "Table 4, case 5");
  CHECK(catalog_row_nd(MultiIndex{1, 1, 3}) == "Table 4, case 6");
  CHECK(catalog_row_nd(MultiIndex{1, 3, 3}) == "Table 4, case 7");
  CHECK(catalog_row_nd(MultiIndex{1, 1, 1}) == "Table 4, case 8");
}

TEST_CASE("analytic drift uses the least index") {
  CHECK(law_analytic_1d({{2, 1.0}, {5, 3.0}}) == ScalingLaw{-0.5, 0, false});
  CHECK(law_analytic_1d({{1, 1.0}}) == ScalingLaw{0.0, 1, false});
  const auto l = law_analytic_1d({{3, 0.5}, {4, -0.1}});
  CHECK(l.s == doctest::Approx(-2.0 / 3.0));
  CHECK(l.k == 0);
  CHECK_THROWS_AS(law_analytic_1d({{0, 1.0}}), ArgumentError);
}

TEST_CASE("upper-bound catalog") {
  CHECK(law_upper_bound(MultiIndex{2, 10}).s == doctest::Approx(-0.9));
  CHECK(law_upper_bound(MultiIndex{2, 10}).k == 0);
  CHECK(law_upper_bound(MultiIndex{3, 3}).s == doctest::Approx(-2.0 / 3.0));
  CHECK(law_upper_bound(MultiIndex{3, 3}).k == 1);
  CHECK(law_upper_bound(MultiIndex{1, 1}) == ScalingLaw{0.0, 2, false});
  CHECK(law_upper_bound(MultiIndex{1, 1, 1}) == ScalingLaw{0.0, 3, false});
  CHECK(law_upper_bound(MultiIndex{2, 2, 2}).s == doctest::Approx(-0.5));
  CHECK(law_upper_bound(MultiIndex{2, 2, 2}).k == 2);
  CHECK(law_upper_bound(MultiIndex{1, 2, 3}).s == doctest::Approx(-2.0 / 3.0));
  CHECK(law_upper_bound(MultiIndex{1, 2, 3}).k == 0);
  CHECK_THROWS_AS(law_upper_bound(MultiIndex{0, 2}), ArgumentError);
}

TEST_CASE("upper bound is invariant under permutations") {
  for (int a = 1; a <= 4; ++a) {
    for (int b = 1; b <= 4; ++b) {
      for (int c = 1; c <= 4; ++c) {
        std::vector<int> v{a, b, c};
        const auto ref = law_upper_bound(MultiIndex(v));
        std::sort(v.begin(), v.end());
        do {
          CHECK(law_upper_bound(MultiIndex(v)) == ref);
        } while (std::next_permutation(v.begin(), v.end()));
      }
      CHECK(law_upper_bound(MultiIndex{a, b}) == law_upper_bound(MultiIndex{b, a}));
    }
  }
}

TEST_CASE("best upper bound") {
  CHECK(best_upper_bound(CoeffMap{{MultiIndex{1, 0}, 1.0}, {MultiIndex{0, 1}, 1.0}}, 1.0).convergent);
  const auto b = best_upper_bound(std::set<MultiIndex>{MultiIndex{2, 10}, MultiIndex{3, 3}}, 1.0);
  CHECK(b.s == doctest::Approx(-2.0 / 3.0));
  CHECK(b.k == 1);
  CHECK(best_upper_bound(std::set<MultiIndex>{MultiIndex{2, 3}}, 1.0).s == doctest::Approx(-2.0 / 3.0));
  // A zero component reduces to the 1D catalog.
  CHECK(best_upper_bound(std::set<MultiIndex>{MultiIndex{0, 2}}, 1.0) == law_1d(2.0));
  CHECK_THROWS_AS(best_upper_bound(std::set<MultiIndex>{}, 1.0), ArgumentError);
}

TEST_CASE("log spaced grid") {
  const auto ps = log_spaced_p(-8, -2, 24);
  REQUIRE(ps.size() == 24);
  CHECK(ps.front() == doctest::Approx(-1e-2));
  CHECK(ps.back() == doctest::Approx(-1e-8));
  for (std::size_t i = 1; i < ps.size(); ++i) CHECK(ps[i] > ps[i - 1]);
  CHECK_THROWS_AS(log_spaced_p(-2, -8, 10), ArgumentError);
}

TEST_CASE("fit recovers its own model exactly") {
  for (double s : {-0.9, -0.5, -0.25, 0.0}) {
    for (int k : {0, 1, 2, 3}) {
      const auto r = synthetic(1.7, s, k);
      const auto f = fit_loglog(r, kAll);
      CHECK(f.s_hat == doctest::Approx(s).epsilon(1e-6).scale(1.0));
      CHECK(f.k_hat == doctest::Approx(k).epsilon(1e-6).scale(1.0));
      CHECK(std::exp(f.c_hat) == doctest::Approx(1.7).epsilon(1e-6));
      CHECK(f.residual < 1e-9);
      const auto g = fit_loglog(r, kAll, static_cast<double>(k));
      CHECK(g.s_hat == doctest::Approx(s).epsilon(1e-9).scale(1.0));
    }
  }
  const auto pure = synthetic(1.0, -0.5, 0.0);
  CHECK(std::abs(fit_loglog(pure, kAll).s_hat + 0.5) < 1e-6);
  CHECK(std::abs(fit_loglog(pure, kAll).k_hat) < 1e-6);
  const auto logs = synthetic(1.0, 0.0, 1.0);
  CHECK(std::abs(fit_loglog(logs, kAll).k_hat - 1.0) < 1e-6);
}

TEST_CASE("fit window and preconditions") {
  const auto r = synthetic(1.0, -0.5, 0.0, -8, -2, 25);
  const auto w = default_window(r);
  CHECK(w.p_lo == doctest::Approx(-1e-6).epsilon(1e-6));
  CHECK(w.p_hi == doctest::Approx(-1e-8).epsilon(1e-6));
  CHECK(fit_loglog(r, w).points == 9);
  CHECK_THROWS_AS(fit_loglog(r, FitWindow{-1e-7, -1e-8}), FitError);
  // Exact at p <= -1 when no log term is involved.
  const auto wide = synthetic(2.0, -0.5, 0.0, -3, 1, 12);
  CHECK_THROWS_AS(fit_loglog(wide, FitWindow{-100, -1e-9}), FitError);
  CHECK(fit_loglog(wide, FitWindow{-100, -1e-9}, 0.0).s_hat == doctest::Approx(-0.5));
}

TEST_CASE("classification") {
  const std::vector<double> c3{0.0, -0.5, -2.0 / 3.0};
  const auto a = classify(-0.492, 0.03, c3);
  REQUIRE(a.law);
  CHECK(*a.law == ScalingLaw{-0.5, 0, false});
  const auto b = classify(-0.01, 0.97);
  REQUIRE(b.law);
  CHECK(*b.law == ScalingLaw{0.0, 1, false});
  CHECK_FALSE(classify(-0.25, 0.4, {0.0, -0.5}).law);
  CHECK(classify(-0.25, 0.4, {0.0, -0.5}).describe().find("unclassified") == 0);
  const auto d = default_candidates({-0.123});
  CHECK(std::find(d.begin(), d.end(), -0.123) != d.end());
  CHECK(d.front() == 0.0);
}

TEST_CASE("csv round trip") {
  SweepResult r = synthetic(1.0, -0.5, 1.0, -6, -1, 8);
  r.points[3].std_error = 0.25;
  r.source = SweepSource::Simulation;
  std::stringstream ss;
  write_sweep_csv(ss, r);
  CHECK(ss.str().rfind("p,value,stderr,source\n", 0) == 0);
  const auto back = read_sweep_csv(ss);
  REQUIRE(back.points.size() == r.points.size());
  CHECK(back.source == SweepSource::Simulation);
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    CHECK(back.points[i].p == r.points[i].p);
    CHECK(back.points[i].value == r.points[i].value);
    CHECK(back.points[i].std_error == r.points[i].std_error);
  }
}

TEST_CASE("csv errors name the row") {
  auto parse = [](const std::string& text) {
    std::istringstream is(text);
    return read_sweep_csv(is);
  };
  const std::string head = "p,value,stderr,source\n";
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_WITH_AS(parse(head + "-0.1,1,0,quadrature\n-0.2,x,0,quadrature\n"), doctest::Contains("row 3"),
                       ParseError);
  CHECK_THROWS_AS(parse(head + "-0.1,1,0\n"), ParseError);
  CHECK_THROWS_WITH_AS(parse(head + "0.1,1,0,quadrature\n"), doctest::Contains("row 2"), ArgumentError);
  CHECK_THROWS_AS(parse(head + "-0.1,-1,0,quadrature\n"), ArgumentError);
}

TEST_CASE("quadrature sweep is deterministic across thread counts") {
  const VarianceQuery base{SymbolSpec::tool_alpha(2.0), TestFunction::cube(1, 0.0, 1.0), -0.1, 1.0};
  const auto ps = log_spaced_p(-6, -1, 12);
  const auto one = sweep_quadrature(base, ps, {}, 1);
  const auto four = sweep_quadrature(base, ps, {}, 4);
  for (std::size_t i = 0; i < ps.size(); ++i) CHECK(one.points[i].value == four.points[i].value);
  for (std::size_t i = 1; i < ps.size(); ++i) CHECK(one.points[i].value > one.points[i - 1].value);
}

TEST_CASE("catalog and quadrature agree for every Table 1 row") {
  const auto ps = log_spaced_p(-9, -3, 24);
  for (double alpha : {1.0, 2.0, 3.0, 5.0}) {
    const VarianceQuery base{SymbolSpec::tool_alpha(alpha), TestFunction::cube(1, 0.0, 1.0), -0.1, 1.0};
    const auto r = sweep_quadrature(base, ps);
    const auto f = fit_loglog(r, default_window(r));
    const auto cls = classify(f.s_hat, f.k_hat);
    REQUIRE(cls.law);
    CAPTURE(alpha);
    CHECK(std::abs(cls.law->s - law_1d(alpha).s) <= 0.02);
    CHECK(cls.law->k == law_1d(alpha).k);
  }
  const VarianceQuery conv{SymbolSpec::tool_alpha(0.5), TestFunction::cube(1, 0.0, 1.0), -0.1, 1.0};
  CHECK(final_decade_change(sweep_quadrature(conv, ps)) < 0.01);
}

TEST_CASE("fit summary line") {
  FitResult f{-0.5, 0.0, 1.0, 1e-6, 1e-4, 10};
  const auto c = classify(f.s_hat, f.k_hat);
  const auto line = fit_summary_line(f, c);
  CHECK(std::count(line.begin(), line.end(), ',') == 5);
  CHECK(std::string(kFitSummaryHeader) == "s_hat,k_hat,c_hat,residual,classified_s,classified_k");
}
