#include "qbench/operators.hpp"

#include <cmath>
#include <ostream>

#include "qbench/rng.hpp"

namespace qbench {

SparseOperator::SparseOperator(std::int64_t dim, const std::vector<Eigen::Triplet<Complex>>& entries,
                               bool hermitian)
    : hermitian_(hermitian) {
    mat_.resize(dim, dim);
    mat_.setFromTriplets(entries.begin(), entries.end());
    mat_.prune([](std::int64_t, std::int64_t, const Complex& v) {
        return std::abs(v.real()) > 0.0 || std::abs(v.imag()) > 0.0;
    });
    mat_.makeCompressed();
}

MatrixXd SparseOperator::to_dense_real(double tol) const {
    MatrixXd out = MatrixXd::Zero(mat_.rows(), mat_.cols());
    for (int k = 0; k < mat_.outerSize(); ++k) {
        for (Matrix::InnerIterator it(mat_, k); it; ++it) {
            if (std::abs(it.value().imag()) > tol)
                throw ComputeError("operator has complex entries; real projection refused");
            out(it.row(), it.col()) = it.value().real();
        }
    }
    return out;
}

bool SparseOperator::is_real(double tol) const {
    for (int k = 0; k < mat_.outerSize(); ++k)
        for (Matrix::InnerIterator it(mat_, k); it; ++it)
            if (std::abs(it.value().imag()) > tol) return false;
    return true;
}

double SparseOperator::hermiticity_violation() const {
    const Matrix adj = Matrix(mat_.adjoint());
    double worst = 0.0;
    Matrix diff = mat_ - adj;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (Matrix::InnerIterator it(diff, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    return worst;
}

double SparseOperator::max_abs() const {
    double worst = 0.0;
    for (int k = 0; k < mat_.outerSize(); ++k)
        for (Matrix::InnerIterator it(mat_, k); it; ++it)
            worst = std::max(worst, std::abs(it.value()));
    return worst;
}

void SparseOperator::write_coordinate_text(std::ostream& os) const {
    os << "# dim " << dimension() << " nnz " << nonzeros() << " hermitian "
       << (hermitian_ ? 1 : 0) << "\n";
    char buf[128];
    for (int k = 0; k < mat_.outerSize(); ++k) {
        for (Matrix::InnerIterator it(mat_, k); it; ++it) {
            std::snprintf(buf, sizeof(buf), "%lld %lld %.17g %.17g\n",
                          static_cast<long long>(it.row()), static_cast<long long>(it.col()),
                          it.value().real(), it.value().imag());
            os << buf;
        }
    }
}

namespace {

using Triplets = std::vector<Eigen::Triplet<Complex>>;

void require_kind(const Basis& basis, ModelKind kind, const char* builder) {
    if (basis.spec().kind != kind)
        throw ValidationError(std::string(builder) + " requires a " + model_kind_name(kind) +
                              " basis, got " + model_kind_name(basis.spec().kind));
}

void add_sym(Triplets& t, std::int64_t i, std::int64_t j, double v) {
    t.emplace_back(i, j, Complex(v, 0.0));
    if (i != j) t.emplace_back(j, i, Complex(v, 0.0));
}

} // namespace

SparseOperator build_bose_hubbard(const Basis& basis, double omega, double interaction) {
    const int bonds = basis.spec().length - 1;
    return build_bose_hubbard(basis, std::vector<double>(std::max(bonds, 0), omega), interaction);
}

SparseOperator build_bose_hubbard(const Basis& basis, const std::vector<double>& omega_per_bond,
                                  double interaction) {
    require_kind(basis, ModelKind::bose_hubbard, "build_bose_hubbard");
    const int L = basis.spec().length;
    if (static_cast<int>(omega_per_bond.size()) != std::max(L - 1, 0))
        throw ValidationError("omega_per_bond must have length sites-1");
    const std::int64_t D = basis.dimension();
    Triplets t;
    t.reserve(4 * static_cast<std::size_t>(D));
    for (std::int64_t i = 0; i < D; ++i) {
        const Configuration& z = basis.configuration_of(i);
        double diag = 0.0;
        for (int s = 0; s < L; ++s) diag += 0.5 * interaction * z[s] * (z[s] - 1.0);
        if (diag != 0.0) t.emplace_back(i, i, Complex(diag, 0.0));
        // Hopping b_j^dagger b_{j+1}: amplitude sqrt(n_{j+1} (n_j + 1)).
        for (int s = 0; s + 1 < L; ++s) {
            if (z[s + 1] == 0) continue;
            Configuration w = z;
            w[s + 1] -= 1;
            w[s] += 1;
            const auto j = basis.index_of(w);
            if (!j) throw ComputeError("hop left the constrained space; basis is inconsistent");
            const double amp = -omega_per_bond[s] * std::sqrt(double(z[s + 1]) * double(z[s] + 1));
            add_sym(t, *j, i, amp);
        }
    }
    return SparseOperator(D, t, true);
}

SparseOperator build_fermi_hubbard(const Basis& basis, double omega, double interaction) {
    require_kind(basis, ModelKind::fermi_hubbard, "build_fermi_hubbard");
    const int L = basis.spec().length;
    const std::int64_t D = basis.dimension();
    // Mode ordering for sign bookkeeping: site-major, up before down at each
    // site. Parity of the occupied modes strictly between the endpoints fixes
    // the hop sign.
    auto mode = [](int site, int spin) { return 2 * site + spin; };
    Triplets t;
    t.reserve(4 * static_cast<std::size_t>(D));
    for (std::int64_t i = 0; i < D; ++i) {
        const Configuration& z = basis.configuration_of(i);
        auto occ = [&](int site, int spin) { return z[spin == 0 ? site : L + site]; };
        double diag = 0.0;
        for (int s = 0; s < L; ++s) diag += interaction * occ(s, 0) * occ(s, 1);
        if (diag != 0.0) t.emplace_back(i, i, Complex(diag, 0.0));
        for (int spin = 0; spin < 2; ++spin) {
            for (int s = 0; s + 1 < L; ++s) {
                if (!occ(s + 1, spin) || occ(s, spin)) continue;
                Configuration w = z;
                const int base = spin == 0 ? 0 : L;
                w[base + s + 1] = 0;
                w[base + s] = 1;
                const auto j = basis.index_of(w);
                if (!j) throw ComputeError("hop left the constrained space; basis is inconsistent");
                int parity = 0;
                const int lo = mode(s, spin), hi = mode(s + 1, spin);
                for (int m = lo + 1; m < hi; ++m) {
                    const int msite = m / 2, mspin = m % 2;
                    parity += occ(msite, mspin);
                }
                const double amp = -omega * (parity % 2 ? -1.0 : 1.0);
                add_sym(t, *j, i, amp);
            }
        }
    }
    return SparseOperator(D, t, true);
}

double trapped_ion_field_from_rescaled(int sites, double field_rescaled, double alpha) {
    double sum = 0.0;
    for (int j = 0; j < sites; ++j)
        for (int i = j + 1; i < sites; ++i) sum += std::pow(double(i - j), -alpha);
    return field_rescaled * sum / double(sites);
}

SparseOperator build_trapped_ion(const Basis& basis, double omega, double field_rescaled,
                                 double alpha, const std::vector<double>* disorder_fields) {
    require_kind(basis, ModelKind::spin_chain, "build_trapped_ion");
    if (alpha <= 0.0) throw ValidationError("power-law exponent alpha must be > 0");
    const int L = basis.spec().length;
    if (disorder_fields && static_cast<int>(disorder_fields->size()) != L)
        throw ValidationError("disorder_fields must have one entry per site");
    const std::int64_t D = basis.dimension();
    const double hz = trapped_ion_field_from_rescaled(L, field_rescaled, alpha);
    Triplets t;
    t.reserve(static_cast<std::size_t>(D) * (1 + L * (L - 1) / 2));
    for (std::int64_t i = 0; i < D; ++i) {
        const Configuration& z = basis.configuration_of(i);
        double diag = 0.0;
        for (int s = 0; s < L; ++s) {
            const double sz = z[s] ? 1.0 : -1.0;
            diag += hz * sz;
            if (disorder_fields) diag += (*disorder_fields)[s] * sz;
        }
        if (diag != 0.0) t.emplace_back(i, i, Complex(diag, 0.0));
        for (int a = 0; a < L; ++a) {
            for (int b = a + 1; b < L; ++b) {
                Configuration w = z;
                w[a] ^= 1;
                w[b] ^= 1;
                const auto j = basis.index_of(w);
                if (!j) throw ComputeError("spin flip left the basis; basis is inconsistent");
                if (*j > i) add_sym(t, *j, i, omega * std::pow(double(b - a), -alpha));
            }
        }
    }
    return SparseOperator(D, t, true);
}

SparseOperator build_pxp(const Basis& basis, double omega, double detuning) {
    if (basis.spec().kind != ModelKind::pxp_1d && basis.spec().kind != ModelKind::pxp_2d)
        throw ValidationError("build_pxp requires a pxp-1d or pxp-2d basis, got " +
                              model_kind_name(basis.spec().kind));
    const int n = basis.spec().sites();
    const std::int64_t D = basis.dimension();
    std::vector<std::vector<int>> nbrs(n);
    for (int s = 0; s < n; ++s) nbrs[s] = basis.neighbours(s);
    Triplets t;
    t.reserve(static_cast<std::size_t>(D) * (n + 1));
    for (std::int64_t i = 0; i < D; ++i) {
        const Configuration& z = basis.configuration_of(i);
        double diag = 0.0;
        for (int s = 0; s < n; ++s) diag += detuning * z[s];
        if (diag != 0.0) t.emplace_back(i, i, Complex(diag, 0.0));
        for (int s = 0; s < n; ++s) {
            bool blocked = false;
            for (int m : nbrs[s])
                if (z[m]) { blocked = true; break; }
            if (blocked) continue;
            Configuration w = z;
            w[s] ^= 1;
            const auto j = basis.index_of(w);
            if (!j) throw ComputeError("projected flip left the basis; basis is inconsistent");
            if (*j > i) add_sym(t, *j, i, omega);
        }
    }
    return SparseOperator(D, t, true);
}

SparseOperator build_hamiltonian(const Basis& basis, const ModelParams& params) {
    switch (params.kind) {
        case ModelKind::bose_hubbard: {
            SparseOperator base =
                params.omega_per_bond
                    ? build_bose_hubbard(basis, *params.omega_per_bond, params.interaction)
                    : build_bose_hubbard(basis, params.omega, params.interaction);
            if (!params.disorder_fields) return base;
            // On-site potential sum_j Delta_j n_j (target-state scans).
            const std::int64_t D = basis.dimension();
            Triplets t;
            for (std::int64_t i = 0; i < D; ++i) {
                const Configuration& z = basis.configuration_of(i);
                double diag = 0.0;
                for (int s = 0; s < basis.spec().length; ++s)
                    diag += (*params.disorder_fields)[s] * z[s];
                if (diag != 0.0) t.emplace_back(i, i, Complex(diag, 0.0));
            }
            for (int k = 0; k < base.matrix().outerSize(); ++k)
                for (SparseOperator::Matrix::InnerIterator it(base.matrix(), k); it; ++it)
                    t.emplace_back(it.row(), it.col(), it.value());
            return SparseOperator(D, t, true);
        }
        case ModelKind::fermi_hubbard:
            return build_fermi_hubbard(basis, params.omega, params.interaction);
        case ModelKind::spin_chain:
            return build_trapped_ion(basis, params.omega, params.field_rescaled, params.alpha,
                                     params.disorder_fields ? &*params.disorder_fields : nullptr);
        case ModelKind::pxp_1d:
        case ModelKind::pxp_2d:
            return build_pxp(basis, params.omega, params.detuning);
    }
    throw ValidationError("unknown model kind");
}

std::vector<double> disordered_hoppings(int sites, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> omegas(std::max(sites - 1, 0));
    for (auto& w : omegas) w = 0.2 * double(rng.uniform_int(1, 10));
    return omegas;
}

ErrorModel default_error_model(ModelKind kind) {
    switch (kind) {
        case ModelKind::bose_hubbard:
        case ModelKind::fermi_hubbard: return ErrorModel::site_occupation;
        case ModelKind::spin_chain: return ErrorModel::spin_flip_dephasing;
        case ModelKind::pxp_1d:
        case ModelKind::pxp_2d: return ErrorModel::dephasing;
    }
    return ErrorModel::dephasing;
}

ErrorModel error_model_from_name(const std::string& name) {
    if (name == "site-occupation") return ErrorModel::site_occupation;
    if (name == "spin-flip-dephasing") return ErrorModel::spin_flip_dephasing;
    if (name == "dephasing") return ErrorModel::dephasing;
    throw ValidationError("unknown error model '" + name +
                          "' (expected site-occupation, spin-flip-dephasing, dephasing)");
}

std::string error_model_name(ErrorModel model) {
    switch (model) {
        case ErrorModel::site_occupation: return "site-occupation";
        case ErrorModel::spin_flip_dephasing: return "spin-flip-dephasing";
        case ErrorModel::dephasing: return "dephasing";
    }
    return "unknown";
}

SparseOperator site_number_operator(const Basis& basis, int site) {
    const auto& spec = basis.spec();
    if (site < 0 || site >= spec.sites()) throw ValidationError("site index out of range");
    const std::int64_t D = basis.dimension();
    Triplets t;
    for (std::int64_t i = 0; i < D; ++i) {
        const Configuration& z = basis.configuration_of(i);
        double n = 0.0;
        if (spec.kind == ModelKind::fermi_hubbard)
            n = double(z[site]) + double(z[spec.length + site]);
        else
            n = double(z[site]);
        if (n != 0.0) t.emplace_back(i, i, Complex(n, 0.0));
    }
    return SparseOperator(D, t, true);
}

SparseOperator sigma_x(const Basis& basis, int site) {
    const auto& spec = basis.spec();
    if (spec.kind != ModelKind::spin_chain)
        throw ValidationError("sigma_x is only defined on unconstrained spin chains");
    if (site < 0 || site >= spec.sites()) throw ValidationError("site index out of range");
    const std::int64_t D = basis.dimension();
    Triplets t;
    for (std::int64_t i = 0; i < D; ++i) {
        Configuration w = basis.configuration_of(i);
        w[site] ^= 1;
        const auto j = basis.index_of(w);
        if (!j) throw ComputeError("spin flip left the basis");
        t.emplace_back(*j, i, Complex(1.0, 0.0));
    }
    return SparseOperator(D, t, true);
}

SparseOperator sigma_z(const Basis& basis, int site) {
    const auto& spec = basis.spec();
    if (spec.kind != ModelKind::spin_chain && spec.kind != ModelKind::pxp_1d &&
        spec.kind != ModelKind::pxp_2d)
        throw ValidationError("sigma_z requires a two-level (spin or PXP) basis");
    if (site < 0 || site >= spec.sites()) throw ValidationError("site index out of range");
    const std::int64_t D = basis.dimension();
    Triplets t;
    for (std::int64_t i = 0; i < D; ++i) {
        const Configuration& z = basis.configuration_of(i);
        t.emplace_back(i, i, Complex(z[site] ? 1.0 : -1.0, 0.0));
    }
    return SparseOperator(D, t, true);
}

std::vector<SparseOperator> build_jump_operators(const Basis& basis, ErrorModel model) {
    const auto& spec = basis.spec();
    std::vector<SparseOperator> ops;
    switch (model) {
        case ErrorModel::site_occupation: {
            if (spec.kind != ModelKind::bose_hubbard && spec.kind != ModelKind::fermi_hubbard)
                throw ValidationError("site-occupation errors require a Hubbard basis");
            for (int s = 0; s < spec.sites(); ++s) ops.push_back(site_number_operator(basis, s));
            break;
        }
        case ErrorModel::spin_flip_dephasing: {
            if (spec.kind != ModelKind::spin_chain)
                throw ValidationError("spin-flip-dephasing errors require a spin-chain basis");
            for (int s = 0; s < spec.sites(); ++s) ops.push_back(sigma_x(basis, s));
            for (int s = 0; s < spec.sites(); ++s) ops.push_back(sigma_z(basis, s));
            break;
        }
        case ErrorModel::dephasing: {
            if (spec.kind == ModelKind::fermi_hubbard)
                throw ValidationError("dephasing errors are not defined on fermi-hubbard bases");
            for (int s = 0; s < spec.sites(); ++s) ops.push_back(sigma_z(basis, s));
            break;
        }
    }
    return ops;
}

} // namespace qbench
