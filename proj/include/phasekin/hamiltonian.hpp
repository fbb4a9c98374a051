#pragma once

#include <functional>
#include <utility>

#include "phasekin/grid.hpp"

namespace phasekin {

// Symmetric 2x2 matrix, row-major upper triangle.
struct Mat2 {
  double xx = 0.0, xy = 0.0, yy = 0.0;
  Vec2 mul(const Vec2 &v) const { return {xx * v[0] + xy * v[1], xy * v[0] + yy * v[1]}; }
  double at(int a, int b) const { return (a == 0) ? (b == 0 ? xx : xy) : (b == 0 ? xy : yy); }
};

enum class HamiltonianKind { NonRelativistic, Radiation, Custom };

// Separable Hamiltonian H(x,p) = K(p) + U(x) with evaluators for
// z = grad_p H, the p-Hessian of H, and grad_x U. The radiation kind has
// z and Hessian undefined at p = 0; callers working on a grid must keep
// every momentum cell center away from the origin.
class SeparableHamiltonian {
public:
  using Scalar1 = std::function<double(const Vec2 &)>;
  using Vector1 = std::function<Vec2(const Vec2 &)>;
  using Matrix1 = std::function<Mat2(const Vec2 &)>;

  static SeparableHamiltonian nonrelativistic(double mass) {
    return nonrelativistic(mass, [](const Vec2 &) { return 0.0; }, [](const Vec2 &) { return Vec2{0.0, 0.0}; });
  }

  static SeparableHamiltonian nonrelativistic(double mass, Scalar1 potential, Vector1 grad_potential) {
    if (!(mass > 0.0)) throw Error("SeparableHamiltonian: mass must be positive");
    SeparableHamiltonian h;
    h.kind_ = HamiltonianKind::NonRelativistic;
    h.mass_ = mass;
    h.kinetic_ = [mass](const Vec2 &p) { return dot(p, p) / (2.0 * mass); };
    h.z_ = [mass](const Vec2 &p) { return (1.0 / mass) * p; };
    h.hessian_ = [mass](const Vec2 &) { return Mat2{1.0 / mass, 0.0, 1.0 / mass}; };
    h.potential_ = std::move(potential);
    h.grad_potential_ = std::move(grad_potential);
    return h;
  }

  static SeparableHamiltonian radiation(double c) {
    if (!(c > 0.0)) throw Error("SeparableHamiltonian: speed must be positive");
    SeparableHamiltonian h;
    h.kind_ = HamiltonianKind::Radiation;
    h.speed_ = c;
    h.kinetic_ = [c](const Vec2 &p) { return c * norm(p); };
    h.z_ = [c](const Vec2 &p) {
      double n = norm(p);
      return (c / n) * p;
    };
    h.hessian_ = [c](const Vec2 &p) {
      double n = norm(p);
      double n3 = n * n * n;
      // (c/|p|) (I - w w^T), w = p/|p|
      return Mat2{c / n - c * p[0] * p[0] / n3, -c * p[0] * p[1] / n3, c / n - c * p[1] * p[1] / n3};
    };
    h.potential_ = [](const Vec2 &) { return 0.0; };
    h.grad_potential_ = [](const Vec2 &) { return Vec2{0.0, 0.0}; };
    return h;
  }

  static SeparableHamiltonian custom(Scalar1 kinetic, Vector1 z, Matrix1 hessian, Scalar1 potential,
                                     Vector1 grad_potential) {
    SeparableHamiltonian h;
    h.kind_ = HamiltonianKind::Custom;
    h.kinetic_ = std::move(kinetic);
    h.z_ = std::move(z);
    h.hessian_ = std::move(hessian);
    h.potential_ = std::move(potential);
    h.grad_potential_ = std::move(grad_potential);
    return h;
  }

  HamiltonianKind kind() const { return kind_; }
  bool is_radiation() const { return kind_ == HamiltonianKind::Radiation; }
  double mass() const { return mass_; }
  double speed() const { return speed_; }

  double operator()(const Vec2 &x, const Vec2 &p) const { return kinetic_(p) + potential_(x); }
  double kinetic(const Vec2 &p) const { return kinetic_(p); }
  double potential(const Vec2 &x) const { return potential_(x); }
  Vec2 z(const Vec2 &p) const { return z_(p); }
  Mat2 hessian(const Vec2 &p) const { return hessian_(p); }
  Vec2 grad_potential(const Vec2 &x) const { return grad_potential_(x); }

  // Radiation z is undefined at p = 0; reject grids whose active cell
  // centers come within 1e-12 of the origin relative to the p extent.
  void require_p_grid_valid(const PhaseGrid &g, const char *what) const {
    if (kind_ != HamiltonianKind::Radiation) return;
    double tol = 1e-12 * g.p_scale();
    for (int k = 0; k < g.p_cells[0]; ++k)
      for (int l = 0; l < g.p_cells[1]; ++l) {
        Vec2 p = g.p_center(k, l);
        if (g.dim() == 1) p[1] = 0.0;
        if (norm(p) < tol) throw Error(std::string(what) + ": radiation momentum grid contains p = 0");
      }
  }

private:
  HamiltonianKind kind_ = HamiltonianKind::Custom;
  double mass_ = 0.0;
  double speed_ = 0.0;
  Scalar1 kinetic_;
  Vector1 z_;
  Matrix1 hessian_;
  Scalar1 potential_;
  Vector1 grad_potential_;
};

inline double eval_hamiltonian(const SeparableHamiltonian &h, const Vec2 &x, const Vec2 &p) { return h(x, p); }

}  // namespace phasekin
