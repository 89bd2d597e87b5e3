#include "sinr/adam.hpp"

#include <cmath>
#include <string>

#include "sinr/errors.hpp"

namespace sinr {

AdamState::AdamState(AdamHyper hyper, std::span<const Matrix* const> params) : hyper_(hyper) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Matrix* p : params) {
    m_.emplace_back(p->rows(), p->cols());
    v_.emplace_back(p->rows(), p->cols());
  }
}

void AdamState::step(std::span<Matrix* const> params, std::span<const Matrix* const> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw DimensionError("adam: expected " + std::to_string(m_.size()) + " parameter blocks");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(m_[i]) || !grads[i]->same_shape(m_[i])) {
      throw DimensionError("adam: block " + std::to_string(i) + " changed shape");
    }
    if (!grads[i]->all_finite()) {
      throw TrainingError("adam: non-finite gradient in parameter block " + std::to_string(i) +
                          " at step " + std::to_string(t_ + 1));
    }
  }

  ++t_;
  const double b1 = hyper_.beta1;
  const double b2 = hyper_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i]->data();
    auto g = grads[i]->data();
    auto m = m_[i].data();
    auto v = v_[i].data();
    for (std::size_t j = 0; j < theta.size(); ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      theta[j] -= hyper_.learning_rate * m_hat / (std::sqrt(v_hat) + hyper_.epsilon);
    }
  }
}

}  // namespace sinr
