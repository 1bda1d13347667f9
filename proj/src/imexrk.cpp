#include "nls/imexrk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "nls/errors.hpp"

namespace nls::imexrk {

namespace {

ImExTableau ark324() {
  ImExTableau t;
  t.name = "ImEx3";
  t.s = 4;
  t.p = 3;
  t.q = 2;
  const double g = 1767732205903.0 / 4055673282236.0;
  t.c = {0.0, 1767732205903.0 / 2027836641118.0, 3.0 / 5.0, 1.0};
  t.b1 = {1471266399579.0 / 7840856788654.0, -4482444167858.0 / 7529755066697.0,
          11266239266428.0 / 11593286722821.0, g};
  t.b2 = {2756255671327.0 / 12835298489170.0, -10771552573575.0 / 22201958757719.0,
          9247589265047.0 / 10645013368117.0, 2193209047091.0 / 5459859503100.0};
  t.a_ex = {0.0, 0.0, 0.0, 0.0,
            1767732205903.0 / 2027836641118.0, 0.0, 0.0, 0.0,
            5535828885825.0 / 10492691773637.0, 788022342437.0 / 10882634858940.0, 0.0, 0.0,
            6485989280629.0 / 16251701735622.0, -4246266847089.0 / 9704473918619.0,
            10755448449292.0 / 10357097424841.0, 0.0};
  t.a_im = {0.0, 0.0, 0.0, 0.0,
            g, g, 0.0, 0.0,
            2746238789719.0 / 10658868560708.0, -640167445237.0 / 6845629431997.0, g, 0.0,
            t.b1[0], t.b1[1], t.b1[2], g};
  return t;
}

ImExTableau ark436() {
  ImExTableau t;
  t.name = "ImEx4";
  t.s = 6;
  t.p = 4;
  t.q = 3;
  const double g = 0.25;
  t.c = {0.0, 0.5, 83.0 / 250.0, 31.0 / 50.0, 17.0 / 20.0, 1.0};
  t.b1 = {82889.0 / 524892.0, 0.0, 15625.0 / 83664.0, 69875.0 / 102672.0, -2260.0 / 8211.0, g};
  t.b2 = {4586570599.0 / 29645900160.0, 0.0, 178811875.0 / 945068544.0,
          814220225.0 / 1159782912.0, -3700637.0 / 11593932.0, 61727.0 / 225920.0};
  t.a_ex = {
      0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
      0.5, 0.0, 0.0, 0.0, 0.0, 0.0,
      13861.0 / 62500.0, 6889.0 / 62500.0, 0.0, 0.0, 0.0, 0.0,
      -116923316275.0 / 2393684061468.0, -2731218467317.0 / 15368042101831.0,
      9408046702089.0 / 11113171139209.0, 0.0, 0.0, 0.0,
      -451086348788.0 / 2902428689909.0, -2682348792572.0 / 7519795681897.0,
      12662868775082.0 / 11960479115383.0, 3355817975965.0 / 11060851509271.0, 0.0, 0.0,
      647845179188.0 / 3216320057751.0, 73281519250.0 / 8382639484533.0,
      552539513391.0 / 3454668386233.0, 3354512671639.0 / 8306763924573.0, 4040.0 / 17871.0, 0.0};
  t.a_im = {
      0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
      g, g, 0.0, 0.0, 0.0, 0.0,
      8611.0 / 62500.0, -1743.0 / 31250.0, g, 0.0, 0.0, 0.0,
      5012029.0 / 34652500.0, -654441.0 / 2922500.0, 174375.0 / 388108.0, g, 0.0, 0.0,
      15267082809.0 / 155376265600.0, -71443401.0 / 120774400.0, 730878875.0 / 902184768.0,
      2285395.0 / 8070912.0, g, 0.0,
      t.b1[0], t.b1[1], t.b1[2], t.b1[3], t.b1[4], g};
  return t;
}

// Rooted trees, each stored as its order and the (sorted) indices of its
// child subtrees in the same list.
struct Tree {
  int order;
  std::vector<std::size_t> children;
};

std::vector<Tree> rooted_trees(int max_order) {
  std::vector<Tree> trees{{1, {}}};
  for (int n = 2; n <= max_order; ++n) {
    const std::size_t known = trees.size();
    std::vector<std::size_t> current;
    // Multisets of known trees (nondecreasing index) with total order n - 1.
    std::function<void(std::size_t, int)> extend = [&](std::size_t first, int remaining) {
      if (remaining == 0) {
        trees.push_back({n, current});
        return;
      }
      for (std::size_t k = first; k < known; ++k) {
        if (trees[k].order > remaining) continue;
        current.push_back(k);
        extend(k, remaining - trees[k].order);
        current.pop_back();
      }
    };
    extend(0, n - 1);
  }
  return trees;
}

using Vec = std::vector<double>;

Vec mat_vec(const RealVector& a, std::size_t s, const Vec& v) {
  Vec out(s, 0.0);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) out[i] += a[i * s + j] * v[j];
  return out;
}

}  // namespace

ImExTableau tableau(const std::string& name) {
  if (name == "ImEx3") return ark324();
  if (name == "ImEx4") return ark436();
  throw LookupError("unknown ImEx tableau '" + name + "'");
}

double row_sum_residual(const ImExTableau& t) {
  double r = 0.0;
  for (std::size_t i = 0; i < t.s; ++i) {
    double si = 0.0;
    double se = 0.0;
    for (std::size_t j = 0; j < t.s; ++j) {
      si += t.im(i, j);
      se += t.ex(i, j);
    }
    r = std::max({r, std::abs(si - t.c[i]), std::abs(se - t.c[i])});
  }
  return r;
}

double order_conditions_residual(const ImExTableau& t, int order, Weights w) {
  if (order < 1 || order > 5)
    throw ConfigError("order_conditions_residual: supported orders are 1..5");
  const std::size_t s = t.s;
  const RealVector& b = w == Weights::main ? t.b1 : t.b2;
  const auto trees = rooted_trees(order);

  // For each tree: every stage-weight vector over all implicit/explicit
  // colourings of the edges below the root, and the tree density.
  std::vector<std::vector<Vec>> phis(trees.size());
  std::vector<double> density(trees.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < trees.size(); ++k) {
    const Tree& tree = trees[k];
    density[k] = tree.order;
    std::vector<Vec> acc{Vec(s, 1.0)};
    for (std::size_t child : tree.children) {
      density[k] *= density[child];
      std::vector<Vec> next;
      for (const Vec& partial : acc) {
        for (const Vec& phi : phis[child]) {
          for (const RealVector* a : {&t.a_im, &t.a_ex}) {
            Vec av = mat_vec(*a, s, phi);
            Vec prod(s);
            for (std::size_t i = 0; i < s; ++i) prod[i] = partial[i] * av[i];
            next.push_back(std::move(prod));
          }
        }
      }
      acc = std::move(next);
    }
    phis[k] = acc;
    for (const Vec& phi : acc) {
      double bphi = 0.0;
      for (std::size_t i = 0; i < s; ++i) bphi += b[i] * phi[i];
      worst = std::max(worst, std::abs(bphi - 1.0 / density[k]));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

void SpectralImplicit::apply(std::span<const Complex> u, std::span<Complex> out) {
  op_.apply(u, out);
}

void SpectralImplicit::solve(double mu, std::span<const Complex> rhs, std::span<Complex> g,
                             std::span<Complex> fg) {
  op_.stage_solve_apply(rhs, mu, g, fg);
}

void NonlinearExplicit::apply(std::span<const Complex> u, std::span<Complex> out) {
  spectral::nonlinear_term(u, b_, out);
}

void FemImplicit::apply(std::span<const Complex> u, std::span<Complex> out) {
  op_.apply_linear(interleaved(u), interleaved(out));
}

void FemImplicit::solve(double mu, std::span<const Complex> rhs, std::span<Complex> g,
                        std::span<Complex> fg) {
  if (mu == 0.0) {
    std::copy(rhs.begin(), rhs.end(), g.begin());
  } else {
    if (!fac_ || fac_->mu() != mu) {
      fac_.emplace(op_, mu);
      ++factorizations_;
    }
    fac_->solve(interleaved(rhs), interleaved(g));
  }
  apply(g, fg);
}

void FemExplicit::apply(std::span<const Complex> u, std::span<Complex> out) {
  op_.apply_nonlinear(interleaved(u), interleaved(out));
}

ComplexVector StepIncrements::u_hat(std::span<const Complex> un, double dt) const {
  ComplexVector out(un.size());
  for (std::size_t j = 0; j < un.size(); ++j) out[j] = un[j] + dt * d2[j];
  return out;
}

StepIncrements imex_step(std::span<const Complex> un, const ImExTableau& t, double dt,
                         ImplicitPart& fim, ExplicitPart& fex) {
  const std::size_t m = un.size();
  const std::size_t s = t.s;
  std::vector<ComplexVector> k_im(s, ComplexVector(m));
  std::vector<ComplexVector> k_ex(s, ComplexVector(m));
  ComplexVector rhs(m);
  ComplexVector g(m);

  for (std::size_t i = 0; i < s; ++i) {
    std::copy(un.begin(), un.end(), rhs.begin());
    for (std::size_t j = 0; j < i; ++j) {
      const double ai = dt * t.im(i, j);
      const double ae = dt * t.ex(i, j);
      if (ai == 0.0 && ae == 0.0) continue;
      for (std::size_t l = 0; l < m; ++l) rhs[l] += ai * k_im[j][l] + ae * k_ex[j][l];
    }
    const double mu = dt * t.im(i, i);
    if (mu == 0.0) {
      g = rhs;
      fim.apply(g, k_im[i]);
    } else {
      fim.solve(mu, rhs, g, k_im[i]);
    }
    if (!all_finite(g))
      throw NumericalFailure("imex_step: non-finite value at stage " + std::to_string(i + 1));
    fex.apply(g, k_ex[i]);
  }

  StepIncrements inc{ComplexVector(m), ComplexVector(m, Complex{}), ComplexVector(m, Complex{})};
  for (std::size_t j = 0; j < s; ++j) {
    const double w1 = t.b1[j];
    const double w2 = t.b2[j];
    for (std::size_t l = 0; l < m; ++l) {
      const Complex k = k_im[j][l] + k_ex[j][l];
      inc.d1[l] += w1 * k;
      inc.d2[l] += w2 * k;
    }
  }
  for (std::size_t l = 0; l < m; ++l) inc.u_next[l] = un[l] + dt * inc.d1[l];
  return inc;
}

}  // namespace nls::imexrk
