#pragma once

// Hamiltonians of a Λ-configured ion (levels a, b, upper c) in a 2D trap,
// driven by one laser along x (a↔c) and one along y (b↔c). Units: ħ = 1,
// all frequencies are angular rates.

#include "iontrap/hilbert.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace iontrap {

struct IonParams {
  double nu_x = 10.0;     ///< trap frequency along x
  double nu_y = 14.0;     ///< trap frequency along y
  double rabi_x = 20.0;   ///< Ω_x, a↔c
  double rabi_y = 20.0;   ///< Ω_y, b↔c
  double epsilon = 0.1;   ///< Lamb–Dicke parameter, ε_x = ε_y
  double delta = 200.0;   ///< Raman detuning Δ from the upper level
  int m = 1;              ///< sideband order of the x laser
  int n = 1;              ///< sideband order of the y laser
  double energy_a = 0.0;
  double energy_b = 1000.0;
  double energy_c = 100000.0;
};

/// Throws std::invalid_argument when a field is out of its physical range.
void validate(const IonParams& params);

/// True when Δ exceeds `ratio` times the largest sideband energy.
bool dispersive_regime(const IonParams& params, double ratio = 10.0);
/// True when ε·√(max_occupation) stays below `threshold`.
bool lamb_dicke_regime(const IonParams& params, double max_occupation, double threshold = 0.3);

struct CouplingConstant {
  double magnitude = 0.0;
  cplx phase = 1.0;

  cplx value() const { return magnitude * phase; }
};

/// λ_mn = ε^{m+n} Ω_x Ω_y / (4 m! n! Δ) with phase −(−1)^n i^{m+n}, so that
/// the exchange line of the effective Hamiltonian is
/// value()·â_x^m â_y†^n |b⟩⟨a| + h.c.
CouplingConstant coupling_constant(const IonParams& params);

/// Stark prefactors ε^{2m}Ω_x²/(4 m!² Δ) and ε^{2n}Ω_y²/(4 n!² Δ).
struct StarkCoefficients {
  double a = 0.0;
  double b = 0.0;
};
StarkCoefficients stark_coefficients(const IonParams& params);

// ---------------------------------------------------------------------------
// Resonance conditions.

struct LaserFrequencies {
  double x = 0.0;
  double y = 0.0;
};

/// normal: E_a + ω_x + mν_x = E_b + ω_y + nν_y.
/// counter: E_a + ω_x + mν_x = E_b + ω_y − nν_y (the y sideband sign flips).
enum class ResonanceVariant { normal, counter };

/// Signed y sideband order for the variant (+n or −n).
int signed_order_y(const IonParams& params, ResonanceVariant variant);

/// Laser frequencies placing both upper-level detunings at exactly Δ, which
/// satisfies the Raman resonance by construction.
LaserFrequencies resonant_lasers(const IonParams& params,
                                 ResonanceVariant variant = ResonanceVariant::normal);

struct ResonanceCheck {
  std::string name;
  bool pass = false;
  bool warning_only = false;
  double residual = 0.0;
  double tolerance = 0.0;
};

struct ResonanceReport {
  std::vector<ResonanceCheck> checks;

  /// All non-warning checks pass.
  bool passed() const;
  bool has_warnings() const;
  const ResonanceCheck& check(const std::string& name) const;
  std::string to_string() const;
};

constexpr double resonance_relative_tolerance = 1e-9;
constexpr double dispersive_ratio_threshold = 10.0;

ResonanceReport validate_resonance(const IonParams& params, const LaserFrequencies& lasers,
                                   ResonanceVariant variant = ResonanceVariant::normal);

// ---------------------------------------------------------------------------
// Static effective Hamiltonians.

/// How the unit phase of λ_mn is treated. `gauge_fixed` drops it (a
/// level/mode phase redefinition), so the m=n=1 forms read λ(â_xâ_y†|b⟩⟨a| +
/// h.c.) with real positive λ. `as_printed` keeps −(−1)^n i^{m+n}.
enum class PhaseConvention { gauge_fixed, as_printed };

/// Which internal flip accompanies pair creation under the counter resonance.
/// `with_a_to_b`: λ(â_x†^m â_y†^n |b⟩⟨a| + h.c.).
/// `with_b_to_a`: λ(â_x†^m â_y†^n |a⟩⟨b| + h.c.), the term selected by the
/// counter resonance condition itself.
enum class PairCreation { with_a_to_b, with_b_to_a };

/// Parameters of an effective (c-eliminated) model, either derived from
/// IonParams or given directly as λ.
struct EffectiveModel {
  int m = 1;
  int n = 1;
  CouplingConstant coupling;
  StarkCoefficients stark;

  static EffectiveModel from_params(const IonParams& params, bool include_stark);
  static EffectiveModel direct(int m, int n, double lambda, StarkCoefficients stark = {});
};

/// −[… exchange …] − [stark_a â_x^m â_x†^m |a⟩⟨a| + stark_b â_y^n â_y†^n |b⟩⟨b|].
/// Space must be modes {x, y} with internal levels exactly {a, b}.
Operator build_raman_effective(const HybridSpace& space, const EffectiveModel& model,
                               PhaseConvention convention = PhaseConvention::gauge_fixed);

/// Two-mode version with the atomic operators eliminated (b ≡ a).
/// Space must be modes {x, y} with no internal factor.
Operator build_degenerate_effective(const HybridSpace& space, const EffectiveModel& model,
                                    PhaseConvention convention = PhaseConvention::gauge_fixed);

/// Pair creation/annihilation correlated with an internal flip.
Operator build_counter_rotating(const HybridSpace& space, const EffectiveModel& model,
                                PairCreation orientation = PairCreation::with_a_to_b);

enum class HamiltonianKind { full_rotating_frame, raman_effective, degenerate_effective, counter_rotating };

struct HamiltonianSpec {
  HamiltonianKind kind = HamiltonianKind::raman_effective;
  IonParams params;
  bool include_stark = true;
  HybridSpace space;
  PhaseConvention convention = PhaseConvention::gauge_fixed;
  PairCreation orientation = PairCreation::with_a_to_b;
};

/// Static builders dispatched on spec.kind (full_rotating_frame is rejected;
/// use build_full_rotating_frame).
Operator build(const HamiltonianSpec& spec);

// ---------------------------------------------------------------------------
// Full three-level model.

struct FullModelSpec {
  IonParams params;
  LaserFrequencies lasers;
  ResonanceVariant variant = ResonanceVariant::normal;
  /// Extra energy of level b in the rotating frame (two-photon offset),
  /// typically the carrier light-shift compensation.
  double two_photon_offset = 0.0;
};

/// Time-dependent Hamiltonian of the driven three-level ion in the frame
/// rotating at both laser frequencies combined with the motional interaction
/// picture. Surviving frequencies: Δ (static, on |c⟩⟨c|) and integer
/// combinations of ν_x, ν_y in the couplings.
///
///   H(t) = Δ_c P_c + δ_b P_b
///        + (Ω_x/2) e^{i m ν_x t} D_x(t) |c⟩⟨a| + (Ω_y/2) e^{i n_s ν_y t} D_y(t) |c⟩⟨b| + h.c.
///
/// with D_q(t)_{jk} = ⟨j|D_q(iε)|k⟩ e^{i ν_q (j−k) t} and n_s the signed y order.
class FullModelHamiltonian {
 public:
  FullModelHamiltonian(const HybridSpace& space, const FullModelSpec& spec);

  Matrix operator()(double t) const;
  const HybridSpace& space() const { return space_; }
  Index dim() const { return space_.total_dim(); }
  /// Common period of all surviving time dependences when ν_x/ν_y is rational.
  std::optional<double> period() const { return period_; }

  /// Equivalent time-independent Hamiltonian in the laser-rotating frame
  /// without the motional interaction picture. Internal-level and Fock
  /// populations agree between the two frames at every t.
  Operator rotating_frame_static() const;

  double level_c_detuning() const { return delta_c_; }
  double level_b_offset() const { return delta_b_; }

 private:
  HybridSpace space_;
  FullModelSpec spec_;
  Matrix disp_x_;
  Matrix disp_y_;
  double delta_c_ = 0.0;
  double delta_b_ = 0.0;
  int order_y_ = 1;
  std::optional<double> period_;
};

/// Validates the resonance report (throws std::invalid_argument listing the
/// failing checks) and the space (modes {x,y}, levels {a,b,c}).
FullModelHamiltonian build_full_rotating_frame(const HybridSpace& space, const FullModelSpec& spec);

struct CarrierLightShift {
  double a = 0.0;  ///< dressed shift of level a
  double b = 0.0;  ///< dressed shift of level b
  double differential() const { return b - a; }
};

/// Exact shifts of levels a and b from the carrier couplings alone (ε = 0,
/// all orders in Ω), from the 3×3 Λ block in the rotating frame. Independent
/// of the Fock numbers. Throws std::domain_error when the carrier Raman
/// transition a↔b is itself resonant.
CarrierLightShift carrier_light_shift(const IonParams& params,
                                      ResonanceVariant variant = ResonanceVariant::normal);

/// Smallest common period 2π/ω₀ with ν_x = pω₀, ν_y = qω₀ (q ≤ max_denominator).
std::optional<double> common_period(double nu_x, double nu_y, int max_denominator = 1000);

}  // namespace iontrap
