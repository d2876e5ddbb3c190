#include "iontrap/hamiltonians.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <numeric>
#include <sstream>

namespace iontrap {

namespace {

double factorial(int k) { return std::tgamma(static_cast<double>(k) + 1.0); }

cplx i_power(int k) {
  switch (((k % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

Operator power(const Operator& op, int k) {
  Operator out = identity_matrix(op.rows());
  for (int j = 0; j < k; ++j) {
    Operator next = op * out;
    out = std::move(next);
  }
  return out;
}

/// Diagonal of â^k â†^k, exact on every retained level: (j+1)(j+2)…(j+k).
Operator raised_product_diagonal(Index dim, int k) {
  Operator d(dim, dim);
  d.reserve(Eigen::VectorXi::Constant(dim, 1));
  for (Index j = 0; j < dim; ++j) {
    double v = 1.0;
    for (int r = 1; r <= k; ++r) v *= static_cast<double>(j + r);
    d.insert(j, j) = v;
  }
  return d;
}

void require_modes_xy(const HybridSpace& space, int m, int n) {
  if (space.modes().size() != 2 || space.modes()[0].label != 'x' || space.modes()[1].label != 'y')
    throw DimensionError("space must have modes (x, y) in that order");
  if (m < 0 || n < 0) throw std::invalid_argument("sideband orders must be non-negative");
  if (m >= space.modes()[0].dim || n >= space.modes()[1].dim)
    throw DimensionError("sideband order must be smaller than the mode dimension");
}

void require_levels_ab(const HybridSpace& space) {
  if (!space.internal() || space.internal()->levels != std::vector<Level>{Level::a, Level::b})
    throw DimensionError("internal levels must be exactly {a, b}");
}

cplx exchange_coefficient(const EffectiveModel& model, PhaseConvention convention) {
  return convention == PhaseConvention::gauge_fixed ? cplx(model.coupling.magnitude)
                                                    : model.coupling.value();
}

Operator hermitian_part_sum(const Operator& op) {
  Operator h = op + Operator(op.adjoint());
  h.prune(cplx(0.0));
  return h;
}

}  // namespace

void validate(const IonParams& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be > 0");
  };
  positive(p.nu_x, "nu_x");
  positive(p.nu_y, "nu_y");
  positive(p.delta, "delta");
  if (!(p.rabi_x >= 0.0) || !(p.rabi_y >= 0.0)) throw std::invalid_argument("Rabi frequencies must be >= 0");
  if (!(p.epsilon >= 0.0)) throw std::invalid_argument("epsilon must be >= 0");
  if (p.m < 0 || p.n < 0) throw std::invalid_argument("sideband orders must be >= 0");
}

bool dispersive_regime(const IonParams& p, double ratio) {
  return p.delta > ratio * std::max(p.m * p.nu_x, p.n * p.nu_y);
}

bool lamb_dicke_regime(const IonParams& p, double max_occupation, double threshold) {
  return p.epsilon * std::sqrt(std::max(max_occupation, 0.0)) <= threshold;
}

CouplingConstant coupling_constant(const IonParams& p) {
  validate(p);
  CouplingConstant c;
  c.magnitude = std::pow(p.epsilon, p.m + p.n) * p.rabi_x * p.rabi_y /
                (4.0 * factorial(p.m) * factorial(p.n) * p.delta);
  const double sign = (p.n % 2 == 0) ? 1.0 : -1.0;
  c.phase = -sign * i_power(p.m + p.n);
  return c;
}

StarkCoefficients stark_coefficients(const IonParams& p) {
  validate(p);
  StarkCoefficients s;
  s.a = std::pow(p.epsilon, 2 * p.m) * p.rabi_x * p.rabi_x / (4.0 * std::pow(factorial(p.m), 2) * p.delta);
  s.b = std::pow(p.epsilon, 2 * p.n) * p.rabi_y * p.rabi_y / (4.0 * std::pow(factorial(p.n), 2) * p.delta);
  return s;
}

int signed_order_y(const IonParams& p, ResonanceVariant variant) {
  return variant == ResonanceVariant::normal ? p.n : -p.n;
}

LaserFrequencies resonant_lasers(const IonParams& p, ResonanceVariant variant) {
  const int ny = signed_order_y(p, variant);
  return {p.energy_c - p.energy_a - p.m * p.nu_x - p.delta,
          p.energy_c - p.energy_b - ny * p.nu_y - p.delta};
}

bool ResonanceReport::passed() const {
  for (const auto& c : checks)
    if (!c.warning_only && !c.pass) return false;
  return true;
}

bool ResonanceReport::has_warnings() const {
  for (const auto& c : checks)
    if (c.warning_only && !c.pass) return true;
  return false;
}

const ResonanceCheck& ResonanceReport::check(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return c;
  throw std::out_of_range("no resonance check named " + name);
}

std::string ResonanceReport::to_string() const {
  std::ostringstream out;
  out.precision(10);
  for (const auto& c : checks) {
    out << (c.pass ? "PASS" : (c.warning_only ? "WARN" : "FAIL")) << "  " << c.name
        << "  residual=" << c.residual << "  tolerance=" << c.tolerance << '\n';
  }
  return out.str();
}

ResonanceReport validate_resonance(const IonParams& p, const LaserFrequencies& lasers,
                                   ResonanceVariant variant) {
  validate(p);
  const int ny = signed_order_y(p, variant);
  const double scale = std::max({p.nu_x, p.nu_y, 1.0});
  const double tol = resonance_relative_tolerance * scale;
  ResonanceReport report;

  auto exact = [&](std::string name, double residual) {
    report.checks.push_back({std::move(name), std::abs(residual) <= tol, false, residual, tol});
  };
  // Raman resonance between a and b.
  exact("raman_resonance",
        (p.energy_a + lasers.x + p.m * p.nu_x) - (p.energy_b + lasers.y + ny * p.nu_y));
  // Upper-level detunings.
  exact("upper_detuning_a", (p.energy_c - p.energy_a) - (lasers.x + p.m * p.nu_x + p.delta));
  exact("upper_detuning_b", (p.energy_c - p.energy_b) - (lasers.y + ny * p.nu_y + p.delta));

  const double sideband = std::max(p.m * p.nu_x, p.n * p.nu_y);
  report.checks.push_back({"dispersive", p.delta > dispersive_ratio_threshold * sideband, true,
                           p.delta / std::max(sideband, 1e-300), dispersive_ratio_threshold});

  // The carrier Raman transition a↔b (no motional change) sits m ν_x − n_s ν_y
  // away from the sideband resonance; it must be resolved from its coupling.
  const double carrier_gap = std::abs(p.m * p.nu_x - ny * p.nu_y);
  const double carrier_coupling = p.rabi_x * p.rabi_y / (4.0 * p.delta);
  report.checks.push_back({"carrier_resolved", carrier_gap > 5.0 * carrier_coupling, true,
                           carrier_gap, 5.0 * carrier_coupling});
  return report;
}

EffectiveModel EffectiveModel::from_params(const IonParams& params, bool include_stark) {
  EffectiveModel model;
  model.m = params.m;
  model.n = params.n;
  model.coupling = coupling_constant(params);
  if (include_stark) model.stark = stark_coefficients(params);
  return model;
}

EffectiveModel EffectiveModel::direct(int m, int n, double lambda, StarkCoefficients stark) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  EffectiveModel model;
  model.m = m;
  model.n = n;
  model.coupling = {lambda, cplx(1.0)};
  model.stark = stark;
  return model;
}

Operator build_raman_effective(const HybridSpace& space, const EffectiveModel& model,
                               PhaseConvention convention) {
  require_modes_xy(space, model.m, model.n);
  require_levels_ab(space);
  const auto [ax, adx] = ladder_ops(space.modes()[0]);
  const auto [ay, ady] = ladder_ops(space.modes()[1]);
  const Index dx = space.modes()[0].dim;
  const Index dy = space.modes()[1].dim;

  const Operator motional = Eigen::kroneckerProduct(power(ax, model.m), power(ady, model.n)).eval();
  Operator flip(2, 2);
  flip.insert(1, 0) = 1.0;  // |b⟩⟨a|
  const Operator forward = Eigen::kroneckerProduct(motional, flip).eval();

  // Printed sign: H = −[coef·(…) + h.c.] with coef = magnitude·(−1)^n i^{m+n};
  // value() already carries the leading minus, so the line is +value()·(…).
  const cplx coef = exchange_coefficient(model, convention);
  Operator h = hermitian_part_sum(coef * forward);

  if (model.stark.a != 0.0 || model.stark.b != 0.0) {
    Operator pa(2, 2), pb(2, 2);
    pa.insert(0, 0) = 1.0;
    pb.insert(1, 1) = 1.0;
    const Operator sx = Eigen::kroneckerProduct(raised_product_diagonal(dx, model.m), identity_matrix(dy)).eval();
    const Operator sy = Eigen::kroneckerProduct(identity_matrix(dx), raised_product_diagonal(dy, model.n)).eval();
    const Operator stark_a = Eigen::kroneckerProduct(sx, pa).eval();
    const Operator stark_b = Eigen::kroneckerProduct(sy, pb).eval();
    h -= model.stark.a * stark_a;
    h -= model.stark.b * stark_b;
  }
  h.prune(cplx(0.0));
  h.makeCompressed();
  return h;
}

Operator build_degenerate_effective(const HybridSpace& space, const EffectiveModel& model,
                                    PhaseConvention convention) {
  require_modes_xy(space, model.m, model.n);
  if (space.internal()) throw DimensionError("degenerate model has no internal factor");
  const auto [ax, adx] = ladder_ops(space.modes()[0]);
  const auto [ay, ady] = ladder_ops(space.modes()[1]);
  const Index dx = space.modes()[0].dim;
  const Index dy = space.modes()[1].dim;

  const Operator forward = Eigen::kroneckerProduct(power(ax, model.m), power(ady, model.n)).eval();
  Operator h = hermitian_part_sum(exchange_coefficient(model, convention) * forward);
  if (model.stark.a != 0.0 || model.stark.b != 0.0) {
    const Operator sx = Eigen::kroneckerProduct(raised_product_diagonal(dx, model.m), identity_matrix(dy)).eval();
    const Operator sy = Eigen::kroneckerProduct(identity_matrix(dx), raised_product_diagonal(dy, model.n)).eval();
    h -= model.stark.a * sx;
    h -= model.stark.b * sy;
  }
  h.prune(cplx(0.0));
  h.makeCompressed();
  return h;
}

Operator build_counter_rotating(const HybridSpace& space, const EffectiveModel& model,
                                PairCreation orientation) {
  require_modes_xy(space, model.m, model.n);
  require_levels_ab(space);
  const auto [ax, adx] = ladder_ops(space.modes()[0]);
  const auto [ay, ady] = ladder_ops(space.modes()[1]);
  const Operator pairs = Eigen::kroneckerProduct(power(adx, model.m), power(ady, model.n)).eval();
  Operator flip(2, 2);
  if (orientation == PairCreation::with_a_to_b)
    flip.insert(1, 0) = 1.0;  // |b⟩⟨a|
  else
    flip.insert(0, 1) = 1.0;  // |a⟩⟨b|
  const Operator forward = Eigen::kroneckerProduct(pairs, flip).eval();
  Operator h = hermitian_part_sum(cplx(model.coupling.magnitude) * forward);
  h.makeCompressed();
  return h;
}

Operator build(const HamiltonianSpec& spec) {
  switch (spec.kind) {
    case HamiltonianKind::raman_effective:
      return build_raman_effective(spec.space, EffectiveModel::from_params(spec.params, spec.include_stark),
                                   spec.convention);
    case HamiltonianKind::degenerate_effective:
      return build_degenerate_effective(spec.space,
                                        EffectiveModel::from_params(spec.params, spec.include_stark),
                                        spec.convention);
    case HamiltonianKind::counter_rotating:
      return build_counter_rotating(spec.space, EffectiveModel::from_params(spec.params, false),
                                    spec.orientation);
    case HamiltonianKind::full_rotating_frame:
      break;
  }
  throw std::invalid_argument("full_rotating_frame is time dependent; use build_full_rotating_frame");
}

std::optional<double> common_period(double nu_x, double nu_y, int max_denominator) {
  const double ratio = nu_x / nu_y;
  for (int q = 1; q <= max_denominator; ++q) {
    const double p = std::round(ratio * q);
    if (p >= 1.0 && std::abs(p / q - ratio) <= 1e-12 * ratio) {
      const double omega0 = nu_y / q;
      return 2.0 * M_PI / omega0;
    }
  }
  return std::nullopt;
}

FullModelHamiltonian::FullModelHamiltonian(const HybridSpace& space, const FullModelSpec& spec)
    : space_(space), spec_(spec) {
  const auto& p = spec.params;
  require_modes_xy(space, 0, 0);
  if (!space.internal() || space.internal()->levels != std::vector<Level>{Level::a, Level::b, Level::c})
    throw DimensionError("full model requires internal levels exactly {a, b, c}");
  validate(p);
  order_y_ = signed_order_y(p, spec.variant);
  const cplx ie(0.0, p.epsilon);
  disp_x_ = displacement_operator(space.modes()[0], ie, 1.0);
  disp_y_ = displacement_operator(space.modes()[1], ie, 1.0);
  // Rotating-frame level energies relative to a, minus the motional reference
  // (m ν_x on c, m ν_x − n_s ν_y on b) that the interaction picture removes.
  delta_c_ = (p.energy_c - p.energy_a - spec.lasers.x) - p.m * p.nu_x;
  delta_b_ = (p.energy_b - p.energy_a - spec.lasers.x + spec.lasers.y) - (p.m * p.nu_x - order_y_ * p.nu_y) +
             spec.two_photon_offset;
  period_ = common_period(p.nu_x, p.nu_y);
}

Matrix FullModelHamiltonian::operator()(double t) const {
  const auto& p = spec_.params;
  const Index dx = space_.modes()[0].dim;
  const Index dy = space_.modes()[1].dim;
  const Index dim = space_.total_dim();
  constexpr Index L = 3, A = 0, B = 1, C = 2;
  const cplx I(0.0, 1.0);

  Vector phase_x(dx), phase_y(dy);
  for (Index j = 0; j < dx; ++j) phase_x(j) = std::exp(I * (p.nu_x * static_cast<double>(j) * t));
  for (Index j = 0; j < dy; ++j) phase_y(j) = std::exp(I * (p.nu_y * static_cast<double>(j) * t));
  const cplx carrier_x = 0.5 * p.rabi_x * std::exp(I * (p.m * p.nu_x * t));
  const cplx carrier_y = 0.5 * p.rabi_y * std::exp(I * (order_y_ * p.nu_y * t));

  Matrix h = Matrix::Zero(dim, dim);
  for (Index nx = 0; nx < dx; ++nx)
    for (Index ny = 0; ny < dy; ++ny) {
      const Index base = (nx * dy + ny) * L;
      h(base + C, base + C) = delta_c_;
      h(base + B, base + B) = delta_b_;
    }
  // (Ω_x/2) e^{imν_x t} D_x(t) ⊗ 1_y ⊗ |c⟩⟨a|
  for (Index j = 0; j < dx; ++j)
    for (Index k = 0; k < dx; ++k) {
      const cplx v = carrier_x * disp_x_(j, k) * phase_x(j) * std::conj(phase_x(k));
      for (Index ny = 0; ny < dy; ++ny) {
        const Index row = (j * dy + ny) * L + C;
        const Index col = (k * dy + ny) * L + A;
        h(row, col) += v;
        h(col, row) += std::conj(v);
      }
    }
  // (Ω_y/2) e^{i n_s ν_y t} 1_x ⊗ D_y(t) ⊗ |c⟩⟨b|
  for (Index j = 0; j < dy; ++j)
    for (Index k = 0; k < dy; ++k) {
      const cplx v = carrier_y * disp_y_(j, k) * phase_y(j) * std::conj(phase_y(k));
      for (Index nx = 0; nx < dx; ++nx) {
        const Index row = (nx * dy + j) * L + C;
        const Index col = (nx * dy + k) * L + B;
        h(row, col) += v;
        h(col, row) += std::conj(v);
      }
    }
  return h;
}

Operator FullModelHamiltonian::rotating_frame_static() const {
  const auto& p = spec_.params;
  Operator nx = number_operator(space_, 'x');
  Operator ny = number_operator(space_, 'y');
  Operator h = p.nu_x * nx + p.nu_y * ny;
  h += (delta_c_ + p.m * p.nu_x) * projector(space_, Level::c);
  h += (delta_b_ + p.m * p.nu_x - order_y_ * p.nu_y) * projector(space_, Level::b);

  Operator lambda_ca(3, 3), lambda_cb(3, 3);
  lambda_ca.insert(2, 0) = 1.0;
  lambda_cb.insert(2, 1) = 1.0;
  const Operator dx = disp_x_.sparseView();
  const Operator dy = disp_y_.sparseView();
  const Operator id_x = identity_matrix(space_.modes()[0].dim);
  const Operator id_y = identity_matrix(space_.modes()[1].dim);
  const Operator cx = Eigen::kroneckerProduct(Eigen::kroneckerProduct(dx, id_y).eval(), lambda_ca).eval();
  const Operator cy = Eigen::kroneckerProduct(Eigen::kroneckerProduct(id_x, dy).eval(), lambda_cb).eval();
  Operator coupling = (0.5 * p.rabi_x) * cx + (0.5 * p.rabi_y) * cy;
  h += coupling + Operator(coupling.adjoint());
  h.prune(cplx(0.0));
  h.makeCompressed();
  return h;
}

FullModelHamiltonian build_full_rotating_frame(const HybridSpace& space, const FullModelSpec& spec) {
  const auto report = validate_resonance(spec.params, spec.lasers, spec.variant);
  if (!report.passed())
    throw std::invalid_argument("resonance conditions not met; refusing to build full model:\n" +
                                report.to_string());
  return FullModelHamiltonian(space, spec);
}

CarrierLightShift carrier_light_shift(const IonParams& p, ResonanceVariant variant) {
  validate(p);
  const int ny = signed_order_y(p, variant);
  const double eb = p.m * p.nu_x - ny * p.nu_y;
  const double ec = p.m * p.nu_x + p.delta;
  if (std::abs(eb) <= 5.0 * p.rabi_x * p.rabi_y / (4.0 * p.delta))
    throw std::domain_error("carrier Raman transition a<->b is not resolved (m nu_x ~ n nu_y)");
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  h(1, 1) = eb;
  h(2, 2) = ec;
  h(0, 2) = h(2, 0) = 0.5 * p.rabi_x;
  h(1, 2) = h(2, 1) = 0.5 * p.rabi_y;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(h);
  auto dressed = [&](int level) {
    Index best = 0;
    eig.eigenvectors().row(level).cwiseAbs().maxCoeff(&best);
    return eig.eigenvalues()(best);
  };
  return {dressed(0) - 0.0, dressed(1) - eb};
}

}  // namespace iontrap
