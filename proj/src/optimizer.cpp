#include "volkit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace volkit::optim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double guarded(const Objective& f, const Eigen::VectorXd& x, int& evaluations) {
  ++evaluations;
  const double v = f(x);
  return std::isfinite(v) ? v : kInf;
}

double step_size(double x, double base) { return base * std::max(1.0, std::abs(x)); }

}  // namespace

Minimum nelder_mead(const Objective& f, const Eigen::VectorXd& start, const NelderMeadOptions& options) {
  const auto n = start.size();
  std::vector<Eigen::VectorXd> simplex(n + 1, start);
  std::vector<double> values(n + 1);
  Minimum out;
  for (Eigen::Index i = 0; i < n; ++i) {
    simplex[i + 1](i) += options.initial_step;
  }
  for (Eigen::Index i = 0; i <= n; ++i) values[i] = guarded(f, simplex[i], out.evaluations);

  std::vector<Eigen::Index> order(n + 1);
  while (out.evaluations < options.max_evaluations) {
    ++out.iterations;
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const auto best = order.front();
    const auto worst = order.back();
    const auto second = order[n - 1];

    double spread = 0.0;
    for (Eigen::Index i = 0; i <= n; ++i) {
      spread = std::max(spread, (simplex[i] - simplex[best]).lpNorm<Eigen::Infinity>());
    }
    if (std::isfinite(values[worst]) &&
        std::abs(values[worst] - values[best]) <= options.f_tolerance * (std::abs(values[best]) + 1e-12) &&
        spread <= options.x_tolerance * std::max(1.0, simplex[best].lpNorm<Eigen::Infinity>())) {
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i <= n; ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double f_reflected = guarded(f, reflected, out.evaluations);
    if (f_reflected < values[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double f_expanded = guarded(f, expanded, out.evaluations);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + 0.5 * (reflected - centroid))
                : Eigen::VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
    const double f_contracted = guarded(f, contracted, out.evaluations);
    if (f_contracted < std::min(f_reflected, values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (Eigen::Index i = 0; i <= n; ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = guarded(f, simplex[i], out.evaluations);
    }
  }
  const auto best = std::min_element(values.begin(), values.end()) - values.begin();
  out.x = simplex[best];
  out.value = values[best];
  return out;
}

Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x) {
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step_size(x(i), base);
    probe(i) = x(i) + h;
    const double up = f(probe);
    probe(i) = x(i) - h;
    const double down = f(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd central_hessian(const Objective& f, const Eigen::VectorXd& x) {
  const auto n = x.size();
  Eigen::MatrixXd h(n, n);
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double step = step_size(x(i), 1e-4);
    probe(i) = x(i) + step;
    const Eigen::VectorXd up = central_gradient(f, probe);
    probe(i) = x(i) - step;
    const Eigen::VectorXd down = central_gradient(f, probe);
    probe(i) = x(i);
    h.row(i) = (up - down).transpose() / (2.0 * step);
  }
  return h;
}

Minimum bfgs(const Objective& f, const Eigen::VectorXd& start, const BfgsOptions& options) {
  const auto n = start.size();
  Minimum out;
  out.x = start;
  out.value = guarded(f, start, out.evaluations);
  if (!std::isfinite(out.value)) return out;

  auto gradient = [&](const Eigen::VectorXd& x) {
    out.evaluations += static_cast<int>(2 * n);
    return central_gradient(f, x);
  };
  Eigen::VectorXd g = gradient(out.x);
  Eigen::MatrixXd inverse_h = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  int stalled = 0;

  for (; out.iterations < options.max_iterations; ++out.iterations) {
    if (!g.allFinite() || g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) break;
    Eigen::VectorXd direction = -inverse_h * g;
    double slope = g.dot(direction);
    if (!(slope < 0.0)) {
      inverse_h.setIdentity();
      direction = -g;
      slope = -g.squaredNorm();
    }
    double t = 1.0;
    Eigen::VectorXd candidate;
    double f_candidate = kInf;
    bool accepted = false;
    for (int k = 0; k < 40; ++k) {
      candidate = out.x + t * direction;
      f_candidate = guarded(f, candidate, out.evaluations);
      if (f_candidate <= out.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // A restart from steepest descent is the last resort before giving up.
      if (inverse_h.isIdentity()) break;
      inverse_h.setIdentity();
      continue;
    }
    // Steps that no longer lower f mean the iterate sits at the noise floor of f.
    if (out.value - f_candidate <= 1e-15 * std::max(1.0, std::abs(out.value))) {
      if (++stalled >= 3) break;
    } else {
      stalled = 0;
    }
    const Eigen::VectorXd g_new = gradient(candidate);
    const Eigen::VectorXd s = candidate - out.x;
    const Eigen::VectorXd y = g_new - g;
    out.x = candidate;
    out.value = f_candidate;
    g = g_new;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        inverse_h *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      inverse_h = (eye - rho * s * y.transpose()) * inverse_h * (eye - rho * y * s.transpose()) + rho * s * s.transpose();
    }
  }
  return out;
}

}  // namespace volkit::optim
