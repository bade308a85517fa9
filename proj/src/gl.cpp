#include "ivlab/gl.hpp"

namespace ivlab {

namespace {

// Forward difference (u(x+e_j) - u(x)) / h_j.
inline Complex fwd(const TorusDomain& dom, const ArrayXcd& u, const std::array<int, 3>& c, int j) {
  const std::int64_t idx = dom.index(c[0], c[1], c[2]);
  return (u[dom.shifted_index(c, j, +1)] - u[idx]) / dom.spacing(j);
}

}  // namespace

EnergyReport gl_energy(const ScalarField& f) {
  f.validate();
  const TorusDomain& dom = f.dom;
  const Real ieps2 = 1.0 / (f.epsilon * f.epsilon);
  EnergyReport rep;
  rep.density = ArrayXd::Zero(dom.sites());
  parallel_for(dom.sites(), [&](std::int64_t idx) {
    const auto c = dom.coords(idx);
    Real dir = 0;
    for (int j = 0; j < dom.n; ++j) {
      const Complex gf = fwd(dom, f.values, c, j);
      auto cm = c;
      cm[j] = dom.wrap(c[j] - 1, j);
      const Complex gb = fwd(dom, f.values, cm, j);
      dir += 0.25 * (std::norm(gf) + std::norm(gb));
    }
    rep.density[idx] = dir + double_well(f.values[idx]) * ieps2;
  });
  rep.total = block_sum(dom.sites(), [&](std::int64_t i) { return rep.density[i]; }) *
              dom.cell_volume();
  return rep;
}

Real gl_energy_total(const ScalarField& f) {
  const TorusDomain& dom = f.dom;
  const Real ieps2 = 1.0 / (f.epsilon * f.epsilon);
  const Real s = block_sum(dom.sites(), [&](std::int64_t idx) {
    const auto c = dom.coords(idx);
    Real t = 0;
    for (int j = 0; j < dom.n; ++j) t += 0.5 * std::norm(fwd(dom, f.values, c, j));
    return t + double_well(f.values[idx]) * ieps2;
  });
  return s * dom.cell_volume();
}

ArrayXcd gl_residual(const ScalarField& f) {
  f.validate();
  const TorusDomain& dom = f.dom;
  const Real eps2 = f.epsilon * f.epsilon;
  ArrayXcd r(dom.sites());
  parallel_for(dom.sites(), [&](std::int64_t idx) {
    const auto c = dom.coords(idx);
    Complex lap(0, 0);
    for (int j = 0; j < dom.n; ++j) {
      const Real h2 = dom.spacing(j) * dom.spacing(j);
      lap += (f.values[dom.shifted_index(c, j, +1)] - 2.0 * f.values[idx] +
              f.values[dom.shifted_index(c, j, -1)]) /
             h2;
    }
    const Complex u = f.values[idx];
    r[idx] = eps2 * lap - u * (std::norm(u) - 1.0);
  });
  return r;
}

ArrayXcd gl_gradient(const ScalarField& f) {
  return gl_residual(f) * Complex(-1.0 / (f.epsilon * f.epsilon), 0.0);
}

StressField gl_stress(const ScalarField& f) {
  f.validate();
  const TorusDomain& dom = f.dom;
  const EnergyReport e = gl_energy(f);
  StressField out;
  out.dom = dom;
  out.S.assign(dom.sites(), Mat3::Zero());
  out.T.assign(dom.sites(), Mat3::Zero());
  out.energy_density = e.density;
  parallel_for(dom.sites(), [&](std::int64_t idx) {
    const auto c = dom.coords(idx);
    std::array<Complex, 3> grad{};
    for (int j = 0; j < dom.n; ++j) {
      grad[j] = (f.values[dom.shifted_index(c, j, +1)] - f.values[dom.shifted_index(c, j, -1)]) /
                (2.0 * dom.spacing(j));
    }
    Mat3 S = Mat3::Zero();
    for (int j = 0; j < dom.n; ++j)
      for (int k = 0; k < dom.n; ++k)
        S(j, k) = (std::conj(grad[j]) * grad[k]).real();
    out.S[idx] = S;
    Mat3 T = Mat3::Zero();
    T.topLeftCorner(dom.n, dom.n) =
        e.density[idx] * MatrixXd::Identity(dom.n, dom.n) - S.topLeftCorner(dom.n, dom.n);
    out.T[idx] = T;
  });
  return out;
}

EnergyReport gl_energy_measure(const ScalarField& f) {
  if (!(f.epsilon < 1.0))
    throw std::invalid_argument("gl_energy_measure: requires eps < 1 so |log eps| > 0");
  EnergyReport rep = gl_energy(f);
  const Real scale = 1.0 / (kPi * std::abs(std::log(f.epsilon)));
  rep.total *= scale;
  rep.density *= scale;
  return rep;
}

ArrayXcd gl_hessian_apply(const ScalarField& f, const ArrayXcd& phi) {
  const TorusDomain& dom = f.dom;
  if (phi.size() != dom.sites()) throw std::invalid_argument("gl_hessian_apply: size mismatch");
  const Real ieps2 = 1.0 / (f.epsilon * f.epsilon);
  ArrayXcd out(dom.sites());
  parallel_for(dom.sites(), [&](std::int64_t idx) {
    const auto c = dom.coords(idx);
    Complex lap(0, 0);
    for (int j = 0; j < dom.n; ++j) {
      const Real h2 = dom.spacing(j) * dom.spacing(j);
      lap += (phi[dom.shifted_index(c, j, +1)] - 2.0 * phi[idx] +
              phi[dom.shifted_index(c, j, -1)]) /
             h2;
    }
    const Complex u = f.values[idx];
    out[idx] = -lap + ((2.0 * std::norm(u) - 1.0) * phi[idx] + u * u * std::conj(phi[idx])) * ieps2;
  });
  return out;
}

Real l2_inner(const TorusDomain& dom, const ArrayXcd& a, const ArrayXcd& b) {
  return block_sum(dom.sites(),
                   [&](std::int64_t i) { return (a[i] * std::conj(b[i])).real(); }) *
         dom.cell_volume();
}

}  // namespace ivlab
