#pragma once

#include <Eigen/Dense>

#include "deepex/enn/enn.hpp"
#include "fd_oracle.hpp"

namespace deepex::testing {

/// Head value for one (representation, index) pair, assembled explicitly.
inline Eigen::VectorXd head_out(const nn::DenseNet& head, const Eigen::VectorXd& rep, const Eigen::VectorXd& z,
                                nn::ForwardCache* cache = nullptr) {
  Eigen::VectorXd in(rep.size() + z.size());
  in << rep, z;
  return nn::forward(head, Eigen::MatrixXd(in), cache).col(0);
}

/// Epinet squared loss sum_{b,k} (h(x_b, z_k) - y(b,k))^2, with the head's
/// representation input taken from `frozen` (stop-gradient surrogate) or from
/// the live base (sg removed).
inline double epinet_loss(const enn::EpiNet& e, const nn::DenseNet* frozen, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& z, const Eigen::MatrixXd& y) {
  nn::ForwardCache live, fixed;
  const Eigen::MatrixXd f = nn::forward(e.base(), x, &live);
  if (frozen) nn::forward(*frozen, x, &fixed);
  const Eigen::MatrixXd& rep = frozen ? fixed.representation() : live.representation();
  double loss = 0.0;
  for (Eigen::Index b = 0; b < x.cols(); ++b)
    for (Eigen::Index k = 0; k < z.cols(); ++k) {
      const Eigen::VectorXd g = head_out(e.head(), rep.col(b), z.col(k)) +
                                e.prior_scale() * head_out(e.prior_head(), rep.col(b), z.col(k));
      const double h = f(0, b) + g.dot(z.col(k));
      loss += (h - y(b, k)) * (h - y(b, k));
    }
  return loss;
}

inline bool epinet_near_kink(const enn::EpiNet& e, const Eigen::MatrixXd& x, const Eigen::MatrixXd& z) {
  nn::ForwardCache base;
  nn::forward(e.base(), x, &base);
  if (min_hidden_preactivation(base) < kKinkMargin) return true;
  for (Eigen::Index b = 0; b < x.cols(); ++b)
    for (Eigen::Index k = 0; k < z.cols(); ++k)
      for (const auto* head : {&e.head(), &e.prior_head()}) {
        nn::ForwardCache c;
        head_out(*head, base.representation().col(b), z.col(k), &c);
        if (min_hidden_preactivation(c) < kKinkMargin) return true;
      }
  return false;
}

}  // namespace deepex::testing
