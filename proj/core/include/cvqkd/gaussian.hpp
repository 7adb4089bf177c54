#pragma once

// Gaussian-state machinery in shot-noise units (vacuum variance = 1).
// Quadratures are interleaved as (x1, p1, x2, p2, ...).

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cvqkd {

/// Tolerance below 1 inside which a symplectic eigenvalue is treated as
/// floating-point noise on a pure mode and clamped to 1.
inline constexpr double kPhysicalSlack = 1e-9;

/// Real symmetric positive-definite 2N x 2N second-moment matrix of an
/// N-mode zero-mean Gaussian state.
///
/// Construction validates shape, symmetry and positive definiteness.
/// Physicality (uncertainty relation) is a property of the symplectic
/// spectrum and is checked by is_physical() or lazily by the entropy.
class CovarianceMatrix {
public:
  explicit CovarianceMatrix(Eigen::MatrixXd entries);

  static CovarianceMatrix vacuum(int n_modes);

  /// Block-diagonal combination: modes of `first` followed by modes of `second`.
  static CovarianceMatrix direct_sum(const CovarianceMatrix& first,
                                     const CovarianceMatrix& second);

  [[nodiscard]] int n_modes() const noexcept {
    return static_cast<int>(entries_.rows() / 2);
  }
  [[nodiscard]] const Eigen::MatrixXd& entries() const noexcept {
    return entries_;
  }
  /// 2x2 block coupling mode `row` to mode `col`.
  [[nodiscard]] Eigen::Matrix2d block(int row, int col) const;

  double operator()(Eigen::Index i, Eigen::Index j) const {
    return entries_(i, j);
  }

private:
  Eigen::MatrixXd entries_;
};

/// Block-diagonal symplectic form, one [[0,1],[-1,0]] block per mode.
[[nodiscard]] Eigen::MatrixXd symplectic_form(int n_modes);

/// EPR correlation block diag(1, -1).
[[nodiscard]] Eigen::Matrix2d pauli_z();

/// Symplectic eigenvalues, one per mode, sorted descending.
struct SymplecticSpectrum {
  std::vector<double> values;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// g(x) = (x+1)/2 log2((x+1)/2) - (x-1)/2 log2((x-1)/2), in bits.
/// Throws DomainError for x < 1 - kPhysicalSlack.
[[nodiscard]] double entropy_g(double x);

/// Absolute eigenvalues of i*Omega*Gamma, each of the N pairs reported once.
[[nodiscard]] SymplecticSpectrum symplectic_spectrum(const CovarianceMatrix& gamma);

[[nodiscard]] bool is_physical(const CovarianceMatrix& gamma);

/// Sum of entropy_g over the symplectic spectrum, in bits.
[[nodiscard]] double von_neumann_entropy(const CovarianceMatrix& gamma);

/// Noisy two-mode squeezed state: mode 0 has variance mu, mode 1 has
/// mu + kappa, correlations sqrt(mu^2 - 1) * Z. Pure when kappa = 0.
[[nodiscard]] CovarianceMatrix epr_state(double mu, double kappa);

/// Pure two-mode squeezed state with variance w in both modes.
[[nodiscard]] CovarianceMatrix eve_epr_state(double w);

/// Beamsplitter of transmittance t mixing mode_a and mode_b:
///   a' = sqrt(t) a + sqrt(1-t) b,   b' = sqrt(1-t) a - sqrt(t) b
/// on both quadratures. Mode a' is written back to mode_a.
[[nodiscard]] CovarianceMatrix beamsplitter(const CovarianceMatrix& gamma,
                                            int mode_a, int mode_b,
                                            double transmittance);

/// Covariance of the remaining modes after an ideal heterodyne measurement
/// of `measured_mode`. The remaining modes keep their relative order.
[[nodiscard]] CovarianceMatrix condition_on_heterodyne(const CovarianceMatrix& gamma,
                                                       int measured_mode);

/// Reduced state on the listed modes, in the listed order.
[[nodiscard]] CovarianceMatrix partial_state(const CovarianceMatrix& gamma,
                                             std::span<const int> keep);
[[nodiscard]] CovarianceMatrix partial_state(const CovarianceMatrix& gamma,
                                             std::initializer_list<int> keep);

} // namespace cvqkd
