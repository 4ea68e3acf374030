#pragma once

// Finite-difference check of sgns_step against the objective definition.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "anchorvec/trainer.hpp"
#include "oracles.hpp"

namespace testing {

// Rows 0 = context, 1..k = negatives; every row trainable.
struct MatrixView {
  anchorvec::RowMatrix<double>* rows;
  anchorvec::ContextRow<double> resolve(anchorvec::WordId w) const {
    double* p = rows->row(w).data();
    return {p, p};
  }
};

struct GradientCheck {
  double max_relative_error = 0.0;
  int instances = 0;
};

// One sgns_step with lr = 1 moves every parameter by exactly its analytic
// gradient (all gradients use pre-step values), which is then compared with
// central differences of the objective.
inline GradientCheck check_sgns_gradients(int instances, std::uint64_t seed,
                                          double h = 1e-5) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim_dist(1, 8), k_dist(1, 3);
  GradientCheck out;
  for (int it = 0; it < instances; ++it) {
    const int d = dim_dist(rng);
    const int k = k_dist(rng);
    const oracle::Matrix x0 = oracle::random_matrix(1, static_cast<std::size_t>(d), rng, 0.7);
    const oracle::Matrix c0 = oracle::random_matrix(static_cast<std::size_t>(k + 1),
                                                    static_cast<std::size_t>(d), rng, 0.7);

    auto objective = [&](const oracle::Matrix& x, const oracle::Matrix& c) {
      return oracle::sgns_objective(x[0], c[0], oracle::Matrix(c.begin() + 1, c.end()));
    };

    anchorvec::RowMatrix<double> x(1, d), ctx(k + 1, d);
    for (int j = 0; j < d; ++j) x(0, j) = x0[0][static_cast<std::size_t>(j)];
    for (int r = 0; r <= k; ++r)
      for (int j = 0; j < d; ++j) ctx(r, j) = c0[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
    const anchorvec::RowMatrix<double> x_before = x, ctx_before = ctx;

    std::vector<anchorvec::WordId> negs;
    for (int n = 1; n <= k; ++n) negs.push_back(n);
    std::vector<double> scratch(static_cast<std::size_t>(d));
    anchorvec::sgns_step<double>(x.data(), d, 0, negs, MatrixView{&ctx}, 1.0, scratch.data());

    // Relative error per parameter vector: ||analytic - numeric|| / max norm.
    auto numeric = [&](auto&& perturb, int j) {
      auto xp = x0, cp = c0, xm = x0, cm = c0;
      perturb(xp, cp, j, +h);
      perturb(xm, cm, j, -h);
      return (objective(xp, cp) - objective(xm, cm)) / (2 * h);
    };
    auto compare = [&](const Eigen::RowVectorXd& analytic, auto&& perturb) {
      Eigen::RowVectorXd num(d);
      for (int j = 0; j < d; ++j) num(j) = numeric(perturb, j);
      const double scale = std::max({analytic.norm(), num.norm(), 1e-12});
      out.max_relative_error = std::max(out.max_relative_error, (analytic - num).norm() / scale);
    };
    compare(x.row(0) - x_before.row(0),
            [](oracle::Matrix& xv, oracle::Matrix&, int j, double e) {
              xv[0][static_cast<std::size_t>(j)] += e;
            });
    for (int r = 0; r <= k; ++r) {
      const auto sr = static_cast<std::size_t>(r);
      compare(ctx.row(r) - ctx_before.row(r),
              [sr](oracle::Matrix&, oracle::Matrix& cv, int j, double e) {
                cv[sr][static_cast<std::size_t>(j)] += e;
              });
    }
    ++out.instances;
  }
  return out;
}

}  // namespace testing
