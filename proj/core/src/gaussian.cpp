#include "cvqkd/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>

#include "cvqkd/errors.hpp"

namespace cvqkd {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kPairingTolerance = 1e-9;

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

void check_mode(const CovarianceMatrix& gamma, int mode, const char* what) {
  if (mode < 0 || mode >= gamma.n_modes()) {
    std::ostringstream msg;
    msg << what << ": mode index " << mode << " out of range for a "
        << gamma.n_modes() << "-mode state";
    throw ValidationError(msg.str());
  }
}

} // namespace

CovarianceMatrix::CovarianceMatrix(Eigen::MatrixXd entries)
    : entries_(std::move(entries)) {
  const auto rows = entries_.rows();
  if (rows == 0 || rows != entries_.cols() || rows % 2 != 0) {
    throw ValidationError("covariance matrix must be square with even, non-zero dimension");
  }
  if (!entries_.allFinite()) {
    throw ValidationError("covariance matrix has non-finite entries");
  }
  // Absolute tolerance, scaled up for matrices whose entries exceed 1.
  const double scale = std::max(1.0, entries_.cwiseAbs().maxCoeff());
  const double asymmetry = (entries_ - entries_.transpose()).cwiseAbs().maxCoeff();
  if (asymmetry > kSymmetryTolerance * scale) {
    throw ValidationError("covariance matrix is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(entries_);
  if (llt.info() != Eigen::Success) {
    throw ValidationError("covariance matrix is not positive definite");
  }
}

CovarianceMatrix CovarianceMatrix::vacuum(int n_modes) {
  if (n_modes <= 0) {
    throw ValidationError("vacuum: number of modes must be positive");
  }
  return CovarianceMatrix(Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes));
}

CovarianceMatrix CovarianceMatrix::direct_sum(const CovarianceMatrix& first,
                                              const CovarianceMatrix& second) {
  const auto n1 = first.entries_.rows();
  const auto n2 = second.entries_.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  out.topLeftCorner(n1, n1) = first.entries_;
  out.bottomRightCorner(n2, n2) = second.entries_;
  return CovarianceMatrix(std::move(out));
}

Eigen::Matrix2d CovarianceMatrix::block(int row, int col) const {
  check_mode(*this, row, "block");
  check_mode(*this, col, "block");
  return entries_.block<2, 2>(2 * row, 2 * col);
}

Eigen::MatrixXd symplectic_form(int n_modes) {
  if (n_modes <= 0) {
    throw ValidationError("symplectic_form: number of modes must be positive");
  }
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  for (int k = 0; k < n_modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

Eigen::Matrix2d pauli_z() {
  return Eigen::Vector2d(1.0, -1.0).asDiagonal();
}

double entropy_g(double x) {
  if (!(x >= 1.0 - kPhysicalSlack)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "entropy_g: unphysical symplectic eigenvalue " << x << " < 1";
    throw DomainError(msg.str());
  }
  if (x <= 1.0) {
    return 0.0;
  }
  const double plus = 0.5 * (x + 1.0);
  const double minus = 0.5 * (x - 1.0);
  return plus * std::log2(plus) - minus * std::log2(minus);
}

SymplecticSpectrum symplectic_spectrum(const CovarianceMatrix& gamma) {
  const int n = gamma.n_modes();
  const Eigen::Index dim = 2 * n;

  // With Gamma = L L^T, the matrix L^T Omega L is similar to Omega Gamma and
  // antisymmetric, so i L^T Omega L is Hermitian with eigenvalues +-nu_k.
  // This keeps the eigenproblem well conditioned for strongly squeezed states.
  const Eigen::LLT<Eigen::MatrixXd> llt(gamma.entries());
  const Eigen::MatrixXd lower = llt.matrixL();
  const Eigen::MatrixXd antisym = lower.transpose() * symplectic_form(n) * lower;
  const Eigen::MatrixXcd hermitian =
      std::complex<double>(0.0, 1.0) * antisym.cast<std::complex<double>>();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      hermitian, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symplectic_spectrum: eigenvalue iteration did not converge");
  }
  const Eigen::VectorXd& eig = solver.eigenvalues(); // ascending

  SymplecticSpectrum spectrum;
  spectrum.values.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const double negative = eig(k);
    const double positive = eig(dim - 1 - k);
    const double scale = std::max(1.0, std::abs(positive));
    if (std::abs(positive + negative) > kPairingTolerance * scale) {
      throw NumericalError("symplectic_spectrum: eigenvalues of i*Omega*Gamma do not pair");
    }
    spectrum.values.push_back(0.5 * (positive - negative));
  }
  return spectrum;
}

bool is_physical(const CovarianceMatrix& gamma) {
  const auto spectrum = symplectic_spectrum(gamma);
  return std::all_of(spectrum.values.begin(), spectrum.values.end(),
                     [](double nu) { return nu >= 1.0 - kPhysicalSlack; });
}

double von_neumann_entropy(const CovarianceMatrix& gamma) {
  double total = 0.0;
  for (double nu : symplectic_spectrum(gamma).values) {
    total += entropy_g(nu);
  }
  return total;
}

CovarianceMatrix epr_state(double mu, double kappa) {
  if (!(mu >= 1.0) || !std::isfinite(mu)) {
    throw DomainError("epr_state: variance mu must be >= 1");
  }
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
    throw DomainError("epr_state: preparation noise kappa must be >= 0");
  }
  const double corr = std::sqrt(mu * mu - 1.0);
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  Eigen::MatrixXd m(4, 4);
  m << mu * id, corr * pauli_z(),
       corr * pauli_z(), (mu + kappa) * id;
  return CovarianceMatrix(std::move(m));
}

CovarianceMatrix eve_epr_state(double w) {
  if (!(w >= 1.0) || !std::isfinite(w)) {
    throw DomainError("eve_epr_state: variance W must be >= 1");
  }
  return epr_state(w, 0.0);
}

CovarianceMatrix beamsplitter(const CovarianceMatrix& gamma, int mode_a,
                              int mode_b, double transmittance) {
  check_mode(gamma, mode_a, "beamsplitter");
  check_mode(gamma, mode_b, "beamsplitter");
  if (mode_a == mode_b) {
    throw ValidationError("beamsplitter: modes must be distinct");
  }
  if (!(transmittance >= 0.0 && transmittance <= 1.0)) {
    throw DomainError("beamsplitter: transmittance must lie in [0, 1]");
  }
  const double t = std::sqrt(transmittance);
  const double r = std::sqrt(1.0 - transmittance);
  const Eigen::Index dim = gamma.entries().rows();
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(dim, dim);
  for (int q = 0; q < 2; ++q) {
    const Eigen::Index a = 2 * mode_a + q;
    const Eigen::Index b = 2 * mode_b + q;
    s(a, a) = t;
    s(a, b) = r;
    s(b, a) = r;
    s(b, b) = -t;
  }
  return CovarianceMatrix(symmetrized(s * gamma.entries() * s.transpose()));
}

CovarianceMatrix condition_on_heterodyne(const CovarianceMatrix& gamma,
                                         int measured_mode) {
  check_mode(gamma, measured_mode, "condition_on_heterodyne");
  const int n = gamma.n_modes();
  if (n < 2) {
    throw ValidationError("condition_on_heterodyne: need at least two modes");
  }
  std::vector<int> rest;
  rest.reserve(static_cast<std::size_t>(n - 1));
  for (int k = 0; k < n; ++k) {
    if (k != measured_mode) {
      rest.push_back(k);
    }
  }
  const Eigen::Index rdim = 2 * (n - 1);
  Eigen::MatrixXd rest_block(rdim, rdim);
  Eigen::MatrixXd cross(rdim, 2);
  const Eigen::MatrixXd& g = gamma.entries();
  for (Eigen::Index i = 0; i < rdim; ++i) {
    const Eigen::Index gi = 2 * rest[static_cast<std::size_t>(i / 2)] + i % 2;
    for (Eigen::Index j = 0; j < rdim; ++j) {
      const Eigen::Index gj = 2 * rest[static_cast<std::size_t>(j / 2)] + j % 2;
      rest_block(i, j) = g(gi, gj);
    }
    cross(i, 0) = g(gi, 2 * measured_mode);
    cross(i, 1) = g(gi, 2 * measured_mode + 1);
  }

  // Heterodyne adds one vacuum unit to the measured mode.
  const Eigen::Matrix2d measured =
      gamma.block(measured_mode, measured_mode) + Eigen::Matrix2d::Identity();
  const double det = measured.determinant();
  if (!(std::abs(det) > 1e-12 * measured.squaredNorm())) {
    throw NumericalError("condition_on_heterodyne: measured block is singular");
  }
  const Eigen::MatrixXd reduced = rest_block - cross * measured.inverse() * cross.transpose();
  return CovarianceMatrix(symmetrized(reduced));
}

CovarianceMatrix partial_state(const CovarianceMatrix& gamma, std::span<const int> keep) {
  if (keep.empty()) {
    throw ValidationError("partial_state: keep at least one mode");
  }
  for (int mode : keep) {
    check_mode(gamma, mode, "partial_state");
  }
  const auto dim = static_cast<Eigen::Index>(2 * keep.size());
  Eigen::MatrixXd out(dim, dim);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t j = 0; j < keep.size(); ++j) {
      out.block<2, 2>(static_cast<Eigen::Index>(2 * i), static_cast<Eigen::Index>(2 * j)) =
          gamma.entries().block<2, 2>(2 * keep[i], 2 * keep[j]);
    }
  }
  return CovarianceMatrix(std::move(out));
}

CovarianceMatrix partial_state(const CovarianceMatrix& gamma,
                               std::initializer_list<int> keep) {
  return partial_state(gamma, std::span<const int>(keep.begin(), keep.size()));
}

} // namespace cvqkd
