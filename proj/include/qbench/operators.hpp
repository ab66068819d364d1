#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "qbench/basis.hpp"
#include "qbench/types.hpp"

namespace qbench {

// Sparse Hermitian operator in the configuration basis (compressed rows).
class SparseOperator {
  public:
    using Matrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

    SparseOperator() = default;
    // Triplets are accumulated (duplicates summed) and exact zeros pruned.
    SparseOperator(std::int64_t dim, const std::vector<Eigen::Triplet<Complex>>& entries,
                   bool hermitian);

    std::int64_t dimension() const { return mat_.rows(); }
    std::int64_t nonzeros() const { return mat_.nonZeros(); }
    bool hermitian_flag() const { return hermitian_; }

    const Matrix& matrix() const { return mat_; }

    VectorXcd apply(const VectorXcd& v) const { return mat_ * v; }

    MatrixXcd to_dense() const { return MatrixXcd(mat_); }
    // Dense real part; throws if any entry has an imaginary part above tol.
    MatrixXd to_dense_real(double tol = 1e-12) const;
    bool is_real(double tol = 1e-12) const;

    double hermiticity_violation() const; // max |A - A^dagger|
    double max_abs() const;

    // Coordinate-triplet text dump, one "row col re im" line per entry.
    void write_coordinate_text(std::ostream& os) const;

  private:
    Matrix mat_;
    bool hermitian_ = false;
};

// Couplings for the four model families, in units of the reference coupling
// (Omega = 1 convention; all times are multiples of 1/Omega).
struct ModelParams {
    ModelKind kind = ModelKind::bose_hubbard;
    double omega = 1.0;
    std::optional<std::vector<double>> omega_per_bond; // disordered hopping
    double interaction = 0.0;   // U (Hubbard models)
    double field_rescaled = 0.0; // trapped-ion \tilde h_z
    double alpha = 1.0;          // trapped-ion power-law exponent
    std::optional<std::vector<double>> disorder_fields; // Delta_j sigma^z_j or Delta_j n_j
    double detuning = 0.0;       // PXP delta
};

SparseOperator build_bose_hubbard(const Basis& basis, double omega, double interaction);
SparseOperator build_bose_hubbard(const Basis& basis, const std::vector<double>& omega_per_bond,
                                  double interaction);
SparseOperator build_fermi_hubbard(const Basis& basis, double omega, double interaction);
SparseOperator build_trapped_ion(const Basis& basis, double omega, double field_rescaled,
                                 double alpha,
                                 const std::vector<double>* disorder_fields = nullptr);
SparseOperator build_pxp(const Basis& basis, double omega, double detuning);

SparseOperator build_hamiltonian(const Basis& basis, const ModelParams& params);

// h_z from the paper's rescaling: h_z = h_rescaled * N^-1 sum_{i>j} |i-j|^-alpha.
double trapped_ion_field_from_rescaled(int sites, double field_rescaled, double alpha);

// Disordered hopping ensemble Omega_j = 0.2 m_j, m_j uniform on integers 1..10.
std::vector<double> disordered_hoppings(int sites, std::uint64_t seed);

enum class ErrorModel {
    site_occupation, // {n_j} (BH) or {n_{j,up}+n_{j,down}} (FH)
    spin_flip_dephasing, // {sigma^x_j, sigma^z_j}
    dephasing, // {sigma^z_j}
};

ErrorModel default_error_model(ModelKind kind);
ErrorModel error_model_from_name(const std::string& name);
std::string error_model_name(ErrorModel model);

std::vector<SparseOperator> build_jump_operators(const Basis& basis, ErrorModel model);

// Single-site operators, exposed for error injection and autocorrelation
// studies.
SparseOperator site_number_operator(const Basis& basis, int site);
SparseOperator sigma_x(const Basis& basis, int site);
SparseOperator sigma_z(const Basis& basis, int site);

} // namespace qbench
