#include "phasekin/closures.hpp"

#include <cmath>
#include <limits>

namespace phasekin {

namespace {

double eps_grad_for(const SpatialGrid &g) {
  double scale = 0.0;
  for (int d = 0; d < g.dim; ++d) scale = std::max(scale, g.extent[d].length());
  return 1e-8 * scale;
}

[[noreturn]] void throw_degenerate(int i, int j) {
  throw DegenerateGradientError("radiation closure: |grad phi| below eps_grad at cell (" + std::to_string(i) + "," +
                                std::to_string(j) + ")");
}

// One-sided gradients of phi along axis d at cell (i,j): (minus, plus).
std::pair<double, double> one_sided(const ScalarField &phi, int i, int j, int d, const Vec2 &slope) {
  const SpatialGrid &g = phi.grid;
  if (d >= g.dim) return {0.0, 0.0};
  int ip = g.wrap(d, (d == 0 ? i : j) + 1);
  int im = g.wrap(d, (d == 0 ? i : j) - 1);
  double fc = phi(i, j);
  double fp = (d == 0) ? phi(ip, j) : phi(i, ip);
  double fm = (d == 0) ? phi(im, j) : phi(i, im);
  double h = g.delta(d);
  return {(fc - fm) / h + slope[d], (fp - fc) / h + slope[d]};
}

// Gradient on the face between cell (i,j) and its +1 neighbour along d:
// exact two-point difference in d, averaged central differences transverse.
Vec2 face_gradient(const ScalarField &phi, int i, int j, int d, const Vec2 &slope) {
  const SpatialGrid &g = phi.grid;
  int ip = (d == 0) ? g.wrap(0, i + 1) : i;
  int jp = (d == 1) ? g.wrap(1, j + 1) : j;
  Vec2 q{0.0, 0.0};
  q[d] = (phi(ip, jp) - phi(i, j)) / g.delta(d) + slope[d];
  int e = 1 - d;
  if (e < g.dim) q[e] = 0.5 * (central_diff(phi, i, j, e) + central_diff(phi, ip, jp, e)) + slope[e];
  return q;
}

}  // namespace

ClosureState::ClosureState(ScalarField m0, ScalarField phi_, SeparableHamiltonian h_, Vec2 slope)
    : degree(0), M0(std::move(m0)), phi(std::move(phi_)), phi_slope(slope), h(std::move(h_)) {
  if (!M0.grid.same(phi.grid)) throw GridError("ClosureState: grid mismatch");
}

ClosureState::ClosureState(ScalarField m0, VectorField p0, ScalarField phi_, SeparableHamiltonian h_, Vec2 slope)
    : degree(1), M0(std::move(m0)), P0(std::move(p0)), phi(std::move(phi_)), phi_slope(slope), h(std::move(h_)) {
  if (!M0.grid.same(phi.grid) || !M0.grid.same(P0.grid)) throw GridError("ClosureState: grid mismatch");
}

ScalarField hj_rhs(const ScalarField &phi, const SeparableHamiltonian &h, Vec2 phi_slope) {
  const SpatialGrid &g = phi.grid;
  const double eps = eps_grad_for(g);

  // Per-axis viscosity coefficient: a bound on |z_d(-q)| over the gradient
  // range. Radiation has |z_d| <= c exactly; otherwise scan the one-sided
  // gradients.
  Vec2 visc{0.0, 0.0};
  if (h.is_radiation()) {
    visc = {h.speed(), h.speed()};
  } else {
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) {
        Vec2 qc = phi_slope + central_gradient(phi, i, j);
        for (int d = 0; d < g.dim; ++d) {
          auto [qm, qp] = one_sided(phi, i, j, d, phi_slope);
          for (double qd : {qm, qp, qc[d]}) {
            Vec2 q = qc;
            q[d] = qd;
            Vec2 z = h.z(Vec2{-q[0], -q[1]});
            visc[d] = std::max(visc[d], std::abs(z[d]));
          }
        }
      }
  }

  ScalarField out(g);
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      Vec2 qbar{0.0, 0.0};
      double diss = 0.0;
      for (int d = 0; d < g.dim; ++d) {
        auto [qm, qp] = one_sided(phi, i, j, d, phi_slope);
        qbar[d] = 0.5 * (qm + qp);
        diss += 0.5 * visc[d] * (qp - qm);
      }
      if (h.is_radiation() && norm(qbar) < eps) throw_degenerate(i, j);
      out(i, j) = h(g.center(i, j), Vec2{-qbar[0], -qbar[1]}) + diss;
    }
  return out;
}

namespace {

// Upwinded finite-volume divergence of the closure flux
// M0 z(-grad phi) [+ Hess(-grad phi) . P0]; conservative by construction.
ScalarField m0_flux_divergence(const ClosureState &s, bool with_p0) {
  const SpatialGrid &g = s.grid();
  const double eps = eps_grad_for(g);
  ScalarField out(g);
  for (int d = 0; d < g.dim; ++d) {
    const double inv = 1.0 / g.delta(d);
    // Face flux between (i,j) and its +1 neighbour along d.
    ScalarField flux(g);
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) {
        Vec2 q = face_gradient(s.phi, i, j, d, s.phi_slope);
        if (s.h.is_radiation() && norm(q) < eps) throw_degenerate(i, j);
        Vec2 pstar{-q[0], -q[1]};
        double v = s.h.z(pstar)[d];
        int ip = (d == 0) ? g.wrap(0, i + 1) : i;
        int jp = (d == 1) ? g.wrap(1, j + 1) : j;
        double f = v * (v > 0.0 ? s.M0(i, j) : s.M0(ip, jp));
        if (with_p0) {
          Vec2 pf{0.5 * (s.P0(i, j, 0) + s.P0(ip, jp, 0)), 0.5 * (s.P0(i, j, 1) + s.P0(ip, jp, 1))};
          f += s.h.hessian(pstar).mul(pf)[d];
        }
        flux(i, j) = f;
      }
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) {
        int im = (d == 0) ? g.wrap(0, i - 1) : i;
        int jm = (d == 1) ? g.wrap(1, j - 1) : j;
        out(i, j) += (flux(i, j) - flux(im, jm)) * inv;
      }
  }
  return out;
}

// Cell-centered transport field w = z(-grad phi).
VectorField transport_velocity(const ClosureState &s) {
  const SpatialGrid &g = s.grid();
  const double eps = eps_grad_for(g);
  VectorField w(g);
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      Vec2 q = s.grad_phi(i, j);
      if (s.h.is_radiation() && norm(q) < eps) throw_degenerate(i, j);
      w.set(i, j, s.h.z(Vec2{-q[0], -q[1]}));
    }
  return w;
}

double comp_central_diff(const VectorField &f, int i, int j, int c, int d) {
  const SpatialGrid &g = f.grid;
  if (d >= g.dim) return 0.0;
  int ip = g.wrap(d, (d == 0 ? i : j) + 1);
  int im = g.wrap(d, (d == 0 ? i : j) - 1);
  double fp = (d == 0) ? f(ip, j, c) : f(i, ip, c);
  double fm = (d == 0) ? f(im, j, c) : f(i, im, c);
  return (fp - fm) / (2.0 * g.delta(d));
}

double comp_upwind_diff(const VectorField &f, int i, int j, int c, int d, double speed) {
  const SpatialGrid &g = f.grid;
  if (d >= g.dim) return 0.0;
  int ip = g.wrap(d, (d == 0 ? i : j) + 1);
  int im = g.wrap(d, (d == 0 ? i : j) - 1);
  double fc = f(i, j, c);
  double fp = (d == 0) ? f(ip, j, c) : f(i, ip, c);
  double fm = (d == 0) ? f(im, j, c) : f(i, im, c);
  double h = g.delta(d);
  return speed > 0.0 ? (fc - fm) / h : (fp - fc) / h;
}

}  // namespace

ClosureRhs closure0_rhs(const ClosureState &state) {
  if (state.degree != 0) throw Error("closure0_rhs: state degree must be 0");
  ClosureRhs r;
  ScalarField div = m0_flux_divergence(state, false);
  r.dM0 = ScalarField(state.grid());
  for (std::size_t m = 0; m < div.v.size(); ++m) r.dM0.v[m] = -div.v[m];
  r.dphi = hj_rhs(state.phi, state.h, state.phi_slope);
  return r;
}

ClosureRhs closure1_rhs(const ClosureState &state) {
  if (state.degree != 1) throw Error("closure1_rhs: state degree must be 1");
  const SpatialGrid &g = state.grid();
  ClosureRhs r;
  ScalarField div = m0_flux_divergence(state, true);
  r.dM0 = ScalarField(g);
  for (std::size_t m = 0; m < div.v.size(); ++m) r.dM0.v[m] = -div.v[m];

  // dP0_i = -P0_k d_i w_k - (w . grad) P0_i - (div w) P0_i
  VectorField w = transport_velocity(state);
  r.dP0 = VectorField(g);
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      double divw = 0.0;
      for (int d = 0; d < g.dim; ++d) divw += comp_central_diff(w, i, j, d, d);
      for (int c = 0; c < g.dim; ++c) {
        double acc = 0.0;
        for (int k = 0; k < g.dim; ++k) acc -= state.P0(i, j, k) * comp_central_diff(w, i, j, k, c);
        for (int d = 0; d < g.dim; ++d) acc -= w(i, j, d) * comp_upwind_diff(state.P0, i, j, c, d, w(i, j, d));
        acc -= divw * state.P0(i, j, c);
        r.dP0(i, j, c) = acc;
      }
    }
  r.dphi = hj_rhs(state.phi, state.h, state.phi_slope);
  return r;
}

VectorField m1_from_state0(const ClosureState &state) {
  const SpatialGrid &g = state.grid();
  const double eps = eps_grad_for(g);
  VectorField out(g);
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      Vec2 q = state.grad_phi(i, j);
      if (state.h.is_radiation() && norm(q) < eps) throw_degenerate(i, j);
      Vec2 z = state.h.z(Vec2{-q[0], -q[1]});
      out.set(i, j, state.M0(i, j) * z);
    }
  return out;
}

VectorField m1_from_state1(const ClosureState &state) {
  if (state.degree != 1) throw Error("m1_from_state1: state degree must be 1");
  const SpatialGrid &g = state.grid();
  const double eps = eps_grad_for(g);
  VectorField out(g);
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      Vec2 q = state.grad_phi(i, j);
      if (state.h.is_radiation() && norm(q) < eps) throw_degenerate(i, j);
      Vec2 pstar{-q[0], -q[1]};
      Vec2 z = state.h.z(pstar);
      Vec2 hp = state.h.hessian(pstar).mul(state.P0.at(i, j));
      out.set(i, j, state.M0(i, j) * z + hp);
    }
  return out;
}

SymTensorField m2_from_state1(const ClosureState &state) {
  if (state.degree != 1) throw Error("m2_from_state1: state degree must be 1");
  const SpatialGrid &g = state.grid();
  VectorField m1 = m1_from_state1(state);
  SymTensorField out(g, 2);
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      Vec2 q = state.grad_phi(i, j);
      Vec2 z = state.h.z(Vec2{-q[0], -q[1]});
      Vec2 w = m1.at(i, j);
      double m0 = state.M0(i, j);
      for (int c = 0; c < out.ncomp(); ++c) {
        int a = (g.dim == 1 || c == 0) ? 0 : (c == 1 ? 0 : 1);
        int b = (g.dim == 1 || c == 0) ? 0 : 1;
        out.comp(i, j, c) = -m0 * z[a] * z[b] + w[a] * z[b] + z[a] * w[b];
      }
    }
  return out;
}

GammaImageSpec::GammaImageSpec(int m, ScalarField m0, std::vector<SymTensorField> p, ScalarField phi_,
                               SeparableHamiltonian h_, Vec2 slope)
    : degree(m), M0(std::move(m0)), P(std::move(p)), phi(std::move(phi_)), phi_slope(slope), h(std::move(h_)) {
  if (degree < 0 || degree > kMaxTensorDegree) throw Error("GammaImageSpec: degree out of range");
  if (int(P.size()) != degree) throw Error("GammaImageSpec: need P0^1..P0^m");
  for (int k = 1; k <= degree; ++k) {
    if (P[k - 1].degree != k) throw Error("GammaImageSpec: coefficient degrees must be consecutive");
    if (!P[k - 1].grid.same(M0.grid)) throw GridError("GammaImageSpec: grid mismatch");
  }
  if (!phi.grid.same(M0.grid)) throw GridError("GammaImageSpec: grid mismatch");
}

SymTensorField gamma_moment(const GammaImageSpec &spec, int k) {
  if (k < 0 || k > kMaxTensorDegree) throw Error("gamma_moment: degree out of range");
  if (spec.h.is_radiation() && spec.degree >= 2 && k >= 1)
    throw Error("gamma_moment: radiation kernels need third p-derivatives of H for m >= 2");
  const SpatialGrid &g = spec.grid();
  const double eps = eps_grad_for(g);
  const int dim = g.dim;
  SymTensorField out(g, k);

  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      Vec2 q = spec.phi_slope + central_gradient(spec.phi, i, j);
      if (spec.h.is_radiation() && norm(q) < eps) throw_degenerate(i, j);
      Vec2 pstar{-q[0], -q[1]};
      Vec2 z = spec.h.z(pstar);
      Mat2 hes = spec.h.hessian(pstar);

      // Hessian-transformed coefficients Q^j = Hess^{(x)j} : P0^j.
      double q0 = spec.M0(i, j);
      double q1[2] = {0.0, 0.0};
      double q2[3] = {0.0, 0.0, 0.0};
      double q3[4] = {0.0, 0.0, 0.0, 0.0};
      if (spec.degree >= 1) {
        Vec2 p1{spec.P[0].comp(i, j, 0), dim == 2 ? spec.P[0].comp(i, j, 1) : 0.0};
        Vec2 t = hes.mul(p1);
        q1[0] = t[0];
        q1[1] = t[1];
      }
      if (spec.degree >= 2) {
        auto p2 = [&](int a, int b) { return spec.P[1].comp(i, j, dim == 1 ? 0 : a + b); };
        for (int a = 0; a < dim; ++a)
          for (int b = a; b < dim; ++b) {
            double acc = 0.0;
            for (int aa = 0; aa < dim; ++aa)
              for (int bb = 0; bb < dim; ++bb) acc += hes.at(a, aa) * p2(aa, bb) * hes.at(bb, b);
            q2[dim == 1 ? 0 : a + b] = acc;
          }
      }
      if (spec.degree >= 3) {
        auto p3 = [&](int a, int b, int c) { return spec.P[2].comp(i, j, dim == 1 ? 0 : a + b + c); };
        for (int a = 0; a < dim; ++a)
          for (int b = a; b < dim; ++b)
            for (int c = b; c < dim; ++c) {
              double acc = 0.0;
              for (int aa = 0; aa < dim; ++aa)
                for (int bb = 0; bb < dim; ++bb)
                  for (int cc = 0; cc < dim; ++cc)
                    acc += hes.at(a, aa) * hes.at(b, bb) * hes.at(c, cc) * p3(aa, bb, cc);
              q3[dim == 1 ? 0 : a + b + c] = acc;
            }
      }

      for (int c = 0; c < out.ncomp(); ++c) {
        // Multi-index of slot c: k-c zeros then c ones (all zeros in 1D).
        int idx[kMaxTensorDegree] = {0, 0, 0};
        if (dim == 2)
          for (int a = k - c; a < k; ++a) idx[a] = 1;
        double acc = 0.0;
        for (int mask = 0; mask < (1 << k); ++mask) {
          int jj = __builtin_popcount(unsigned(mask));
          if (jj > spec.degree) continue;
          int ones = 0;
          double zprod = 1.0;
          for (int a = 0; a < k; ++a) {
            if (mask & (1 << a))
              ones += idx[a];
            else
              zprod *= z[idx[a]];
          }
          double qv = (jj == 0) ? q0 : (jj == 1) ? q1[ones] : (jj == 2) ? q2[ones] : q3[ones];
          acc += qv * zprod;
        }
        out.comp(i, j, c) = acc;
      }
    }
  return out;
}

ScalarField init_phi_from_momentum(const VectorField &p) {
  const SpatialGrid &g = p.grid;
  double scale = 1.0;
  for (double x : p.v) scale = std::max(scale, std::abs(x));

  ScalarField phi(g);
  if (g.dim == 1) {
    double mean = 0.0;
    for (int i = 0; i < g.cells[0]; ++i) mean += p(i, 0, 0);
    mean /= g.cells[0];
    if (std::abs(mean) > 1e-10 * scale)
      throw Error("init_phi_from_momentum: 1D momentum must have zero mean on the periodic domain");
    const double h = g.delta(0);
    for (int i = 0; i + 1 < g.cells[0]; ++i) phi(i + 1, 0) = phi(i, 0) - 0.5 * (p(i, 0, 0) + p(i + 1, 0, 0)) * h;
  } else {
    // Solvability: the discrete curl must vanish.
    double curl_max = 0.0;
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) {
        double c = 0.0;
        {
          int ip = g.wrap(0, i + 1), im = g.wrap(0, i - 1);
          c += (p(ip, j, 1) - p(im, j, 1)) / (2.0 * g.delta(0));
          int jp = g.wrap(1, j + 1), jm = g.wrap(1, j - 1);
          c -= (p(i, jp, 0) - p(i, jm, 0)) / (2.0 * g.delta(1));
        }
        curl_max = std::max(curl_max, std::abs(c));
      }
    if (curl_max > 1e-8 * scale)
      throw Error("init_phi_from_momentum: 2D momentum is not discretely curl-free (max curl " +
                  std::to_string(curl_max) + ")");

    // Solve div(grad phi) = -div(P) with the composed central-difference
    // operators, so that the recovered phi satisfies the same discrete
    // gradient relation the closure dynamics use. The composed Laplacian
    // annihilates parity-constant modes on even grids; those modes are also
    // invisible to the central gradient, so projecting them out of the data
    // loses nothing.
    const std::size_t n = g.size();
    std::vector<double> b(n, 0.0);
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j) {
        int ip = g.wrap(0, i + 1), im = g.wrap(0, i - 1);
        int jp = g.wrap(1, j + 1), jm = g.wrap(1, j - 1);
        b[g.index(i, j)] = (p(ip, j, 0) - p(im, j, 0)) / (2.0 * g.delta(0)) +
                           (p(i, jp, 1) - p(i, jm, 1)) / (2.0 * g.delta(1));
      }
    auto demean = [&](std::vector<double> &x) {
      double mean[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
      double count[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
      for (int i = 0; i < g.cells[0]; ++i)
        for (int j = 0; j < g.cells[1]; ++j) {
          mean[i & 1][j & 1] += x[g.index(i, j)];
          count[i & 1][j & 1] += 1.0;
        }
      for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) mean[a][c] /= std::max(count[a][c], 1.0);
      for (int i = 0; i < g.cells[0]; ++i)
        for (int j = 0; j < g.cells[1]; ++j) x[g.index(i, j)] -= mean[i & 1][j & 1];
    };
    demean(b);
    auto apply = [&](const std::vector<double> &x, std::vector<double> &y) {
      const double cx = 1.0 / (4.0 * g.delta(0) * g.delta(0)), cy = 1.0 / (4.0 * g.delta(1) * g.delta(1));
      for (int i = 0; i < g.cells[0]; ++i)
        for (int j = 0; j < g.cells[1]; ++j) {
          int ip = g.wrap(0, i + 2), im = g.wrap(0, g.wrap(0, i - 1) - 1);
          int jp = g.wrap(1, j + 2), jm = g.wrap(1, g.wrap(1, j - 1) - 1);
          y[g.index(i, j)] = -(cx * (x[g.index(ip, j)] - 2.0 * x[g.index(i, j)] + x[g.index(im, j)]) +
                               cy * (x[g.index(i, jp)] - 2.0 * x[g.index(i, j)] + x[g.index(i, jm)]));
        }
    };
    std::vector<double> x(n, 0.0), r = b, pr = b, ap(n);
    double rr = 0.0;
    for (double t : r) rr += t * t;
    const double tol2 = 1e-26 * std::max(rr, 1e-300);
    for (std::size_t it = 0; it < 20 * n && rr > tol2; ++it) {
      apply(pr, ap);
      double pap = 0.0;
      for (std::size_t m = 0; m < n; ++m) pap += pr[m] * ap[m];
      if (pap <= 0.0) break;
      double alpha = rr / pap;
      for (std::size_t m = 0; m < n; ++m) {
        x[m] += alpha * pr[m];
        r[m] -= alpha * ap[m];
      }
      double rr2 = 0.0;
      for (double t : r) rr2 += t * t;
      double beta = rr2 / rr;
      rr = rr2;
      for (std::size_t m = 0; m < n; ++m) pr[m] = r[m] + beta * pr[m];
    }
    phi.v = x;
  }

  double mean = 0.0;
  for (double t : phi.v) mean += t;
  mean /= double(phi.v.size());
  for (double &t : phi.v) t -= mean;
  return phi;
}

double generating_function_gap(const GammaImageSpec &spec_p, const GammaImageSpec &spec_p1, const Vec2 &s) {
  if (spec_p1.degree != spec_p.degree + 1) throw Error("generating_function_gap: degrees must differ by one");
  if (spec_p1.degree > kMaxTensorDegree) throw Error("generating_function_gap: order overflow");
  if (!spec_p.grid().same(spec_p1.grid())) throw GridError("generating_function_gap: grid mismatch");
  double ns = norm(s);
  if (!(ns > 0.0) || ns > 1.0) throw Error("generating_function_gap: |s| must be in (0, 1]");

  const SpatialGrid &g = spec_p.grid();
  static const double inv_fact[4] = {1.0, 1.0, 0.5, 1.0 / 6.0};
  ScalarField gap(g);
  for (int k = 0; k <= kMaxTensorDegree; ++k) {
    SymTensorField a = gamma_moment(spec_p1, k);
    SymTensorField b = gamma_moment(spec_p, k);
    for (int i = 0; i < g.cells[0]; ++i)
      for (int j = 0; j < g.cells[1]; ++j)
        gap(i, j) += inv_fact[k] * (contract_full(a, i, j, s) - contract_full(b, i, j, s));
  }
  double l1 = 0.0;
  for (double t : gap.v) l1 += std::abs(t);
  return l1 * g.cell_volume();
}

double closure_cfl_bound(const ClosureState &state) {
  const SpatialGrid &g = state.grid();
  Vec2 zmax{0.0, 0.0};
  VectorField w = transport_velocity(state);
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j)
      for (int d = 0; d < g.dim; ++d) zmax[d] = std::max(zmax[d], std::abs(w(i, j, d)));
  double bound = std::numeric_limits<double>::infinity();
  for (int d = 0; d < g.dim; ++d)
    if (zmax[d] > 0.0) bound = std::min(bound, g.delta(d) / zmax[d]);
  return bound;
}

namespace {
ClosureState closure_axpy(const ClosureState &s, double a, const ClosureRhs &r) {
  ClosureState out = s;
  for (std::size_t m = 0; m < out.M0.v.size(); ++m) out.M0.v[m] += a * r.dM0.v[m];
  if (s.degree == 1)
    for (std::size_t m = 0; m < out.P0.v.size(); ++m) out.P0.v[m] += a * r.dP0.v[m];
  for (std::size_t m = 0; m < out.phi.v.size(); ++m) out.phi.v[m] += a * r.dphi.v[m];
  return out;
}
}  // namespace

ClosureState step_closure(const ClosureState &state, double dt, TimeScheme scheme) {
  double bound = closure_cfl_bound(state);
  if (std::abs(dt) > 0.9 * bound)
    throw CflError("step_closure: dt " + std::to_string(std::abs(dt)) + " exceeds 0.9 * CFL bound " +
                   std::to_string(bound));
  auto rhs = [](const ClosureState &s) { return s.degree == 0 ? closure0_rhs(s) : closure1_rhs(s); };
  switch (scheme) {
    case TimeScheme::Euler:
      return closure_axpy(state, dt, rhs(state));
    case TimeScheme::RK2: {
      ClosureRhs k1 = rhs(state);
      ClosureRhs k2 = rhs(closure_axpy(state, 0.5 * dt, k1));
      return closure_axpy(state, dt, k2);
    }
    case TimeScheme::RK4: {
      ClosureRhs k1 = rhs(state);
      ClosureRhs k2 = rhs(closure_axpy(state, 0.5 * dt, k1));
      ClosureRhs k3 = rhs(closure_axpy(state, 0.5 * dt, k2));
      ClosureRhs k4 = rhs(closure_axpy(state, dt, k3));
      ClosureState out = state;
      for (std::size_t m = 0; m < out.M0.v.size(); ++m)
        out.M0.v[m] += dt / 6.0 * (k1.dM0.v[m] + 2.0 * k2.dM0.v[m] + 2.0 * k3.dM0.v[m] + k4.dM0.v[m]);
      if (state.degree == 1)
        for (std::size_t m = 0; m < out.P0.v.size(); ++m)
          out.P0.v[m] += dt / 6.0 * (k1.dP0.v[m] + 2.0 * k2.dP0.v[m] + 2.0 * k3.dP0.v[m] + k4.dP0.v[m]);
      for (std::size_t m = 0; m < out.phi.v.size(); ++m)
        out.phi.v[m] += dt / 6.0 * (k1.dphi.v[m] + 2.0 * k2.dphi.v[m] + 2.0 * k3.dphi.v[m] + k4.dphi.v[m]);
      return out;
    }
  }
  throw Error("step_closure: unknown scheme");
}

double collective_hamiltonian(const ClosureState &state) {
  const SpatialGrid &g = state.grid();
  double acc = 0.0;
  for (int i = 0; i < g.cells[0]; ++i)
    for (int j = 0; j < g.cells[1]; ++j) {
      Vec2 q = state.grad_phi(i, j);
      Vec2 pstar{-q[0], -q[1]};
      acc += state.M0(i, j) * state.h(g.center(i, j), pstar);
      if (state.degree == 1) acc += dot(state.P0.at(i, j), state.h.z(pstar));
    }
  return acc * g.cell_volume();
}

double closure_mass(const ClosureState &state) {
  double acc = 0.0;
  for (double t : state.M0.v) acc += t;
  return acc * state.grid().cell_volume();
}

}  // namespace phasekin
